#include "netcause/allocation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace netcause {

namespace {
void check_args(int s, int d, double alpha) {
    if (d < 0) throw std::domain_error("allocation: negative degree");
    if (s < 0 || s > d) throw std::domain_error("allocation: count outside {0..d}");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::domain_error("allocation: alpha outside [0,1]");
}
}  // namespace

double log_choose(int d, int s) {
    return std::lgamma(d + 1.0) - std::lgamma(s + 1.0) - std::lgamma(d - s + 1.0);
}

double log_treatment_profile(int s, int d, double alpha) {
    check_args(s, d, alpha);
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    if (alpha == 0.0) return s == 0 ? 0.0 : neg_inf;
    if (alpha == 1.0) return s == d ? 0.0 : neg_inf;
    return s * std::log(alpha) + (d - s) * std::log1p(-alpha);
}

double treatment_profile(int s, int d, double alpha) {
    double lp = log_treatment_profile(s, d, alpha);
    return std::isinf(lp) ? 0.0 : std::exp(lp);
}

double pi_neighborhood(int s, int d, double alpha) {
    check_args(s, d, alpha);
    if (alpha == 0.0) return s == 0 ? 1.0 : 0.0;
    if (alpha == 1.0) return s == d ? 1.0 : 0.0;
    return std::exp(log_choose(d, s) + s * std::log(alpha) + (d - s) * std::log1p(-alpha));
}

double pi_joint(int z, int s, int d, double alpha) {
    if (z != 0 && z != 1) throw std::domain_error("allocation: z must be 0 or 1");
    check_args(s, d, alpha);
    double own = z == 1 ? alpha : 1.0 - alpha;
    return own * pi_neighborhood(s, d, alpha);
}

}  // namespace netcause
