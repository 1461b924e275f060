#include "netcause/design.hpp"

#include <cmath>

#include "netcause/errors.hpp"

namespace netcause {

double DesignTerm::value(const Eigen::Ref<const Eigen::RowVectorXd>& xraw) const {
    double v = xraw(a.column);
    if (a.absolute) v = std::abs(v);
    if (b) {
        double w = xraw(b->column);
        if (b->absolute) w = std::abs(w);
        v *= w;
    }
    return v;
}

namespace {
DesignFactor parse_factor(const std::string& text, const std::vector<std::string>& names) {
    DesignFactor f;
    std::string name = text;
    if (text.size() > 5 && text.substr(0, 4) == "abs(" && text.back() == ')') {
        f.absolute = true;
        name = text.substr(4, text.size() - 5);
    }
    f.column = -1;
    for (std::size_t k = 0; k < names.size(); ++k)
        if (names[k] == name) f.column = static_cast<int>(k);
    if (f.column < 0)
        throw ConfigError("design term references unknown column '" + name + "'");
    return f;
}
}  // namespace

DesignTerm parse_design_term(const std::string& text, const std::vector<std::string>& names) {
    DesignTerm t;
    t.label = text;
    auto star = text.find('*');
    if (star == std::string::npos) {
        t.a = parse_factor(text, names);
    } else {
        t.a = parse_factor(text.substr(0, star), names);
        t.b = parse_factor(text.substr(star + 1), names);
    }
    return t;
}

Eigen::VectorXd CovariateSpec::row(const Eigen::Ref<const Eigen::RowVectorXd>& xraw) const {
    Eigen::VectorXd out(dim());
    for (int k = 0; k < dim(); ++k) out(k) = terms[k].value(xraw);
    return out;
}

Eigen::MatrixXd CovariateSpec::matrix(const NodeData& data) const {
    Eigen::MatrixXd out(data.n(), dim());
    for (int i = 0; i < data.n(); ++i) out.row(i) = row(data.X.row(i)).transpose();
    return out;
}

std::vector<std::string> CovariateSpec::labels() const {
    std::vector<std::string> out;
    out.reserve(terms.size());
    for (const auto& t : terms) out.push_back(t.label);
    return out;
}

CovariateSpec CovariateSpec::parse(const std::vector<std::string>& term_texts,
                                   const std::vector<std::string>& names) {
    CovariateSpec spec;
    for (const auto& t : term_texts) spec.terms.push_back(parse_design_term(t, names));
    return spec;
}

double ExposureSpec::h(int s, int d_eff) const {
    if (d_eff == 0) return 0.0;
    if (custom_h) return custom_h(s, d_eff);
    return scale == ExposureScale::Proportion ? static_cast<double>(s) / d_eff
                                              : static_cast<double>(s);
}

ExposureState ExposureState::build(const ComponentGraph& g, const Eigen::VectorXi& Z,
                                   const ExposureSpec& spec) {
    ExposureState st;
    st.count.resize(g.n_nodes);
    st.eff_deg.resize(g.n_nodes);
    for (int i = 0; i < g.n_nodes; ++i) {
        st.count[i] = spec.observed_count(g, Z, i);
        st.eff_deg[i] = spec.eff_degree(g, i);
    }
    return st;
}

}  // namespace netcause
