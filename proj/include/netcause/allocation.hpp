// Bernoulli allocation-strategy weights: binomial probabilities of neighbourhood
// treatment counts, and joint (individual, neighbourhood) versions.
#ifndef NETCAUSE_ALLOCATION_HPP
#define NETCAUSE_ALLOCATION_HPP

namespace netcause {

// log C(d, s) via lgamma; valid for 0 <= s <= d.
double log_choose(int d, int s);

// log[alpha^s (1-alpha)^(d-s)]; the alpha in {0,1} endpoints are handled
// exactly (no 0*log 0) and may return -inf.
double log_treatment_profile(int s, int d, double alpha);

// alpha^s (1-alpha)^(d-s)  ==  pi_neighborhood(s,d,alpha) / C(d,s).
// This is the factor the inverse-propensity weights need; using the ratio
// directly keeps endpoints exact and avoids the binomial coefficient.
double treatment_profile(int s, int d, double alpha);

// P(neighbourhood count = s | degree d, Bernoulli(alpha)); log-space internally.
double pi_neighborhood(int s, int d, double alpha);

// P(individual = z, neighbourhood count = s): alpha^z (1-alpha)^(1-z) * pi_neighborhood.
double pi_joint(int z, int s, int d, double alpha);

}  // namespace netcause

#endif
