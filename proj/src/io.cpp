#include "netcause/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "netcause/errors.hpp"

namespace netcause {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool is_integer(const std::string& s) {
    if (s.empty()) return false;
    std::size_t k = s[0] == '-' || s[0] == '+' ? 1 : 0;
    if (k == s.size()) return false;
    for (; k < s.size(); ++k)
        if (!std::isdigit(static_cast<unsigned char>(s[k]))) return false;
    return true;
}

double parse_double(const std::string& s, const std::string& what) {
    std::string t = trim(s);
    if (t.empty()) throw DataError("missing value in " + what);
    try {
        std::size_t used = 0;
        double v = std::stod(t, &used);
        if (used != t.size()) throw DataError("bad numeric value '" + t + "' in " + what);
        return v;
    } catch (const DataError&) {
        throw;
    } catch (const std::exception&) {
        throw DataError("bad numeric value '" + t + "' in " + what);
    }
}

std::optional<double> parse_optional(const std::string& s, const std::string& what) {
    if (trim(s).empty()) return std::nullopt;
    return parse_double(s, what);
}

std::string opt_str(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string{};
}

std::vector<std::pair<std::string, std::string>> read_edge_pairs(const std::string& path,
                                                                 bool header) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open edge list '" + path + "'");
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (first && header) {
            first = false;
            continue;
        }
        first = false;
        // accept comma, tab or space separated
        for (char& c : line)
            if (c == '\t' || c == ' ') c = ',';
        auto fields = split_fields(line, ',');
        std::vector<std::string> nonempty;
        for (auto& f : fields)
            if (!trim(f).empty()) nonempty.push_back(trim(f));
        if (nonempty.size() != 2)
            throw DataError("edge list line '" + line + "' does not hold a src,dst pair");
        pairs.emplace_back(nonempty[0], nonempty[1]);
    }
    return pairs;
}

}  // namespace

LoadedDataset load_dataset(const std::string& edge_path, const std::string& node_path,
                           bool edge_header) {
    auto pairs = read_edge_pairs(edge_path, edge_header);
    bool numeric_ids = true;
    for (const auto& [a, b] : pairs)
        numeric_ids = numeric_ids && is_integer(a) && is_integer(b);

    std::ifstream in(node_path);
    if (!in) throw DataError("cannot open node table '" + node_path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty node table '" + node_path + "'");
    auto header = split_fields(trim(line), ',');
    for (auto& h : header) h = trim(h);

    int id_col = -1, z_col = -1, y_col = -1;
    std::vector<int> cov_cols;
    std::vector<std::string> cov_names;
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (header[k] == "id") id_col = static_cast<int>(k);
        else if (header[k] == "Z") z_col = static_cast<int>(k);
        else if (header[k] == "Y") y_col = static_cast<int>(k);
        else {
            cov_cols.push_back(static_cast<int>(k));
            cov_names.push_back(header[k]);
        }
    }
    if (z_col < 0 || y_col < 0)
        throw DataError("node table must carry 'Z' and 'Y' columns (got header '" + line + "')");
    if (!numeric_ids && id_col < 0)
        throw DataError("edge list uses non-integer ids; the node table needs an 'id' column");

    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto fields = split_fields(line, ',');
        if (fields.size() != header.size())
            throw DataError("node table row has " + std::to_string(fields.size()) +
                            " fields, header has " + std::to_string(header.size()));
        rows.push_back(std::move(fields));
    }
    const int n = static_cast<int>(rows.size());
    if (n == 0) throw DataError("node table has no rows");

    LoadedDataset ds;
    std::map<std::string, int> dense;
    if (id_col >= 0) {
        std::vector<std::string> ids;
        for (auto& r : rows) ids.push_back(trim(r[id_col]));
        std::vector<std::string> sorted = ids;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw DataError("duplicate id in node table");
        for (int k = 0; k < n; ++k) dense[sorted[k]] = k;
        ds.id_map = sorted;
        // reorder rows into dense-id order
        std::vector<std::vector<std::string>> reordered(n);
        for (int k = 0; k < n; ++k) reordered[dense[ids[k]]] = std::move(rows[k]);
        rows = std::move(reordered);
    } else {
        for (int k = 0; k < n; ++k) {
            dense[std::to_string(k)] = k;
            ds.id_map.push_back(std::to_string(k));
        }
    }

    std::vector<std::pair<int, int>> edges;
    for (const auto& [a, b] : pairs) {
        auto ia = dense.find(a), ib = dense.find(b);
        if (ia == dense.end() || ib == dense.end())
            throw DataError("edge references id '" + (ia == dense.end() ? a : b) +
                            "' absent from the node table");
        edges.emplace_back(ia->second, ib->second);
    }
    ds.graph = load_graph(edges, n);

    ds.data.X.resize(n, cov_cols.size());
    ds.data.Z.resize(n);
    ds.data.Y.resize(n);
    ds.data.column_names = cov_names;
    for (int i = 0; i < n; ++i) {
        double z = parse_double(rows[i][z_col], "column Z");
        if (z != 0.0 && z != 1.0)
            throw DataError("treatment must be 0/1, got '" + rows[i][z_col] + "'");
        ds.data.Z(i) = static_cast<int>(z);
        ds.data.Y(i) = parse_double(rows[i][y_col], "column Y");
        for (std::size_t k = 0; k < cov_cols.size(); ++k)
            ds.data.X(i, k) = parse_double(rows[i][cov_cols[k]], "column " + cov_names[k]);
    }
    validate_node_data(ds.graph, ds.data);
    return ds;
}

void write_estimates_csv(const std::string& path, const std::string& config_echo,
                         const std::vector<EstimateRow>& rows) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << "# config " << config_echo << "\n";
    out << "estimator,estimand,alpha,alpha_prime,point,se,ci_lo,ci_hi,diagnostics\n";
    for (const auto& r : rows) {
        out << r.estimator << ',' << r.estimand << ',' << format_double(r.alpha) << ','
            << format_double(r.alpha_prime) << ',' << format_double(r.point) << ','
            << opt_str(r.se) << ',' << opt_str(r.ci_lo) << ',' << opt_str(r.ci_hi) << ','
            << r.diagnostics << "\n";
    }
}

std::vector<EstimateRow> read_estimates_csv(const std::string& path, std::string* config_echo) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    std::vector<EstimateRow> rows;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (line.rfind("# config ", 0) == 0) {
            if (config_echo) *config_echo = line.substr(9);
            continue;
        }
        if (trim(line).empty()) continue;
        if (!saw_header) {
            saw_header = true;
            continue;
        }
        auto f = split_fields(line, ',');
        if (f.size() != 9) throw DataError("estimates CSV row with " +
                                           std::to_string(f.size()) + " fields");
        EstimateRow r;
        r.estimator = f[0];
        r.estimand = f[1];
        r.alpha = parse_double(f[2], "alpha");
        r.alpha_prime = parse_double(f[3], "alpha_prime");
        r.point = parse_double(f[4], "point");
        r.se = parse_optional(f[5], "se");
        r.ci_lo = parse_optional(f[6], "ci_lo");
        r.ci_hi = parse_optional(f[7], "ci_hi");
        r.diagnostics = f[8];
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string render_estimates_table(const std::vector<EstimateRow>& rows) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-8s %-6s %7s %7s %10s %10s %22s\n", "est.", "effect",
                  "alpha", "alpha'", "point", "se", "95% CI");
    out << buf;
    for (const auto& r : rows) {
        std::string ci = "-";
        if (r.ci_lo && r.ci_hi) {
            char cb[64];
            std::snprintf(cb, sizeof cb, "[%.3f, %.3f]", *r.ci_lo, *r.ci_hi);
            ci = cb;
        }
        std::snprintf(buf, sizeof buf, "%-8s %-6s %7.3f %7.3f %10.4f %10s %22s\n",
                      r.estimator.c_str(), r.estimand.c_str(), r.alpha, r.alpha_prime, r.point,
                      r.se ? format_double(*r.se).substr(0, 10).c_str() : "-", ci.c_str());
        out << buf;
    }
    return out.str();
}

void write_scenario_csv(const std::string& path, const std::string& config_echo,
                        const ScenarioReport& report) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << "# config " << config_echo << "\n";
    out << "scenario,estimator,estimand,truth,bias,mse,ese,ase,coverage,used,excluded\n";
    for (const auto& r : report.rows) {
        out << r.scenario << ',' << estimator_name(r.estimator) << ',' << r.estimand.label()
            << ',' << format_double(r.truth) << ',' << format_double(r.bias) << ','
            << format_double(r.mse) << ',' << format_double(r.ese) << ','
            << (std::isnan(r.ase) ? "" : format_double(r.ase)) << ','
            << (std::isnan(r.coverage) ? "" : format_double(r.coverage)) << ',' << r.used << ','
            << r.excluded << "\n";
    }
}

std::vector<ScenarioRow> read_scenario_csv(const std::string& path, std::string* config_echo) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    std::vector<ScenarioRow> rows;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (line.rfind("# config ", 0) == 0) {
            if (config_echo) *config_echo = line.substr(9);
            continue;
        }
        if (trim(line).empty()) continue;
        if (!saw_header) {
            saw_header = true;
            continue;
        }
        auto f = split_fields(line, ',');
        if (f.size() != 11)
            throw DataError("scenario CSV row with " + std::to_string(f.size()) + " fields");
        ScenarioRow r;
        r.scenario = f[0];
        r.estimator = parse_estimator(f[1]);
        // estimand label "KIND(a)" or "KIND(a,b)"
        {
            const std::string& lab = f[2];
            auto open = lab.find('('), comma = lab.find(','), close = lab.find(')');
            std::string kind = lab.substr(0, open);
            r.estimand.kind = kind == "DE"   ? EffectKind::DE
                              : kind == "IE" ? EffectKind::IE
                              : kind == "TE" ? EffectKind::TE
                                             : EffectKind::OE;
            if (comma == std::string::npos) {
                r.estimand.alpha = parse_double(lab.substr(open + 1, close - open - 1), "alpha");
                r.estimand.alpha_prime = r.estimand.alpha;
            } else {
                r.estimand.alpha = parse_double(lab.substr(open + 1, comma - open - 1), "alpha");
                r.estimand.alpha_prime =
                    parse_double(lab.substr(comma + 1, close - comma - 1), "alpha_prime");
            }
        }
        r.truth = parse_double(f[3], "truth");
        r.bias = parse_double(f[4], "bias");
        r.mse = parse_double(f[5], "mse");
        r.ese = parse_double(f[6], "ese");
        auto ase = parse_optional(f[7], "ase");
        auto cov = parse_optional(f[8], "coverage");
        r.ase = ase ? *ase : std::numeric_limits<double>::quiet_NaN();
        r.coverage = cov ? *cov : std::numeric_limits<double>::quiet_NaN();
        r.used = static_cast<int>(parse_double(f[9], "used"));
        r.excluded = static_cast<int>(parse_double(f[10], "excluded"));
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string render_scenario_table(const ScenarioReport& report) {
    std::ostringstream out;
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-18s %-7s %-14s %9s %9s %9s %9s %9s %9s %5s %5s\n",
                  "scenario", "est.", "estimand", "truth", "bias", "mse", "ese", "ase",
                  "coverage", "used", "excl");
    out << buf;
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof buf,
                      "%-18s %-7s %-14s %9.4f %9.4f %9.4f %9.4f %9.4f %9.3f %5d %5d\n",
                      r.scenario.c_str(), estimator_name(r.estimator),
                      r.estimand.label().c_str(), r.truth, r.bias, r.mse, r.ese, r.ase,
                      r.coverage, r.used, r.excluded);
        out << buf;
    }
    for (const auto& [key, causes] : report.exclusions) {
        for (const auto& [cause, count] : causes)
            out << "  excluded " << count << "x " << key << ": " << cause << "\n";
    }
    return out.str();
}

void write_truth_csv(const std::string& path, const TruthTable& truth,
                     const std::vector<double>& alphas, const std::vector<double>& alpha_refs) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << "estimand,alpha,alpha_prime,value\n";
    for (double a : alphas) {
        out << "DE," << format_double(a) << ',' << format_double(a) << ','
            << format_double(truth.effect(EffectKind::DE, a, a)) << "\n";
    }
    for (double ap : alpha_refs) {
        for (double a : alphas) {
            out << "IE," << format_double(a) << ',' << format_double(ap) << ','
                << format_double(truth.effect(EffectKind::IE, a, ap)) << "\n";
            out << "TE," << format_double(a) << ',' << format_double(ap) << ','
                << format_double(truth.effect(EffectKind::TE, a, ap)) << "\n";
            if (truth.mu.count({2, a}) && truth.mu.count({2, ap}))
                out << "OE," << format_double(a) << ',' << format_double(ap) << ','
                    << format_double(truth.effect(EffectKind::OE, a, ap)) << "\n";
        }
    }
}

void write_id_map(const std::string& path, const std::vector<std::string>& id_map) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << "dense_id,id\n";
    for (std::size_t k = 0; k < id_map.size(); ++k) out << k << ',' << id_map[k] << "\n";
}

}  // namespace netcause
