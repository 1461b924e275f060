// Declarative model designs: covariate transforms shared by the treatment and
// outcome models, and the exposure summary describing how neighbourhood
// treatments enter the outcome model and the estimands.
#ifndef NETCAUSE_DESIGN_HPP
#define NETCAUSE_DESIGN_HPP

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "netcause/graph.hpp"

namespace netcause {

// One multiplicative factor: a covariate column, optionally |.|-transformed.
struct DesignFactor {
    int column = 0;
    bool absolute = false;
};

// A design term is a single factor or a pairwise product, e.g. "abs(X1)*X2".
struct DesignTerm {
    DesignFactor a;
    std::optional<DesignFactor> b;
    std::string label;

    double value(const Eigen::Ref<const Eigen::RowVectorXd>& xraw) const;
};

// Parse "X2", "abs(X1)" or "abs(X1)*X2" against the data's column names.
DesignTerm parse_design_term(const std::string& text, const std::vector<std::string>& names);

struct CovariateSpec {
    std::vector<DesignTerm> terms;

    int dim() const { return static_cast<int>(terms.size()); }
    Eigen::VectorXd row(const Eigen::Ref<const Eigen::RowVectorXd>& xraw) const;
    Eigen::MatrixXd matrix(const NodeData& data) const;  // n x dim
    std::vector<std::string> labels() const;

    static CovariateSpec parse(const std::vector<std::string>& term_texts,
                               const std::vector<std::string>& names);
};

// Exposure summary h() and the interference set it ranges over. The default is
// the first-order neighbourhood with h = treated proportion; alternative sets
// (e.g. attribute-matched neighbours, or first plus second order) and a raw
// count or custom mapping are supported for the sensitivity studies.
enum class ExposureScale { Proportion, Count };

struct ExposureSpec {
    ExposureScale scale = ExposureScale::Proportion;
    // When absent, the graph's first-order neighbourhoods are used.
    std::optional<std::vector<std::vector<int>>> sets;
    // Optional custom mapping h(s, d_eff); overrides `scale` when set.
    std::function<double(int, int)> custom_h;

    const std::vector<int>& set_of(const ComponentGraph& g, int i) const {
        return sets ? (*sets)[i] : g.neighbors[i];
    }
    int eff_degree(const ComponentGraph& g, int i) const {
        return static_cast<int>(set_of(g, i).size());
    }
    int observed_count(const ComponentGraph& g, const Eigen::VectorXi& Z, int i) const {
        int s = 0;
        for (int j : set_of(g, i)) s += Z(j);
        return s;
    }
    // h(s); zero on an empty interference set.
    double h(int s, int d_eff) const;
};

// Precomputed observed exposure state for one treatment vector.
struct ExposureState {
    std::vector<int> count;    // s_i
    std::vector<int> eff_deg;  // d_i over the spec's sets
    static ExposureState build(const ComponentGraph& g, const Eigen::VectorXi& Z,
                               const ExposureSpec& spec);
};

}  // namespace netcause

#endif
