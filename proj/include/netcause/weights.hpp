// Inverse-propensity weight machinery shared by the IPW-type estimators and
// the weighted outcome fits: per-node joint propensities of the observed
// treatment pattern over a chosen interference set, evaluated at explicit
// (gamma, phi_b) so the sandwich variance can re-evaluate them.
#ifndef NETCAUSE_WEIGHTS_HPP
#define NETCAUSE_WEIGHTS_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "netcause/allocation.hpp"
#include "netcause/graph.hpp"
#include "netcause/propensity.hpp"

namespace netcause {

struct WeightContext {
    Eigen::VectorXd f_obs;      // joint propensity of the observed pattern, floored
    std::vector<int> count;     // treated count over the interference set (i excluded)
    std::vector<int> set_size;

    // `sets` widens the product beyond first-order neighbourhoods (i excluded);
    // when absent the graph neighbourhoods are used.
    static WeightContext build(const ComponentGraph& g, const NodeData& data,
                               const PropensityModel& model, const Eigen::VectorXd& gamma,
                               double phi_b, const GaussHermite& gh, double floor,
                               const std::optional<std::vector<std::vector<int>>>& sets = {},
                               PropensityEvalStats* stats = nullptr);
    static WeightContext from_fit(const ComponentGraph& g, const NodeData& data,
                                  const PropensityFit& fit,
                                  const std::optional<std::vector<std::vector<int>>>& sets = {},
                                  PropensityEvalStats* stats = nullptr);

    // 1(Z_i = z) alpha^S (1-alpha)^(d-S) / f_i
    double arm_weight(int i, int z, double alpha, const Eigen::VectorXi& Z) const {
        if (Z(i) != z) return 0.0;
        return treatment_profile(count[i], set_size[i], alpha) / f_obs(i);
    }
    // alpha^(Z_i+S) (1-alpha)^(1-Z_i+d-S) / f_i
    double marginal_weight(int i, double alpha, const Eigen::VectorXi& Z) const {
        double own = Z(i) == 1 ? alpha : 1.0 - alpha;
        return own * treatment_profile(count[i], set_size[i], alpha) / f_obs(i);
    }
};

}  // namespace netcause

#endif
