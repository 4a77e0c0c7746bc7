#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace jbrsim::analytic {

// Every symbol of the analytical model in one bag. Rates are per second,
// probabilities dimensionless, costs in abstract units.
struct AnalyticParams {
    double mu = 0.5;          // location-change rate (mean interval 1/mu)
    double lambda_rate = 2.0; // packet arrival rate (mean interval 1/lambda)
    double e_l = 4.0;         // expected route length, hops
    double e_n = 4.0;         // janitor count
    double k = 1.0;           // hops before the janitor takes over
    double k_hat = 1.0;       // hops after the janitor takes over
    double k_cap = 3.0;       // hop budget K
    double p_l = 0.9;         // per-link success probability
    double p_js = 0.8;        // janitor route-find probability
    double p_0 = 0.2;         // per-hop discovery success probability
    double p_s = 0.8;         // end-to-end success probability
    double c_ls = 1.0;        // cost: successful link transmission
    double c_lf = 1.0;        // cost: link failure
    double c_qd = 1.0;        // cost: query drop
    double c_ru = 1.0;        // cost: route unsuccessful
    double q = 1.0;           // failure-cost weight
    double z = 1.0;           // routing-cost scale factor

    void validate() const;  // throws ConfigError on out-of-domain values
};

// ---- link/route break model ------------------------------------------------

// P_B = mu / (mu + lambda). Domain error when both rates are zero.
double p_route_broken(double mu, double lambda_rate);

// Monte Carlo oracle: race of exp(mu) break times against exp(lambda)
// arrivals; returns the fraction of races the break wins.
double p_route_broken_mc(double mu, double lambda_rate, std::uint64_t trials,
                         std::uint64_t seed);

// ---- transmission cost -----------------------------------------------------

enum class SuccessMode { Literal, Conjunction };

// Per-term routing success probability. The literal mode evaluates the
// printed inclusion-exclusion term P_L + P_JS - (P_L + P_JS - P_L*P_JS); the
// conjunction mode evaluates P_L*P_JS directly. They coincide by algebra and
// both are exposed so either form can be traced.
double p_routing_success(double p_l, double p_js, SuccessMode mode);

// S = P_s / (E_L + (E_L - k) + (E_L - k_hat)); denominator must be positive.
double expected_success_ratio(double p_s, double e_l, double k, double k_hat);
// F = (1 - P_s) / (same denominator).
double expected_failure_ratio(double p_s, double e_l, double k, double k_hat);

struct RoutingCost {
    double c_rf = 0.0;  // q*(C_LS + C_LF + C_QD + C_RU)
    double c_rs = 0.0;  // 3*E_L*C_LS - C_LS*(k + k_hat)
    double c_r = 0.0;   // z * C_RF * C_RS
    bool alt_defined = false;  // ratio form needs P_L < 1 and P_s > 0
    double c_r_alt = 0.0;      // [3E_L - k - k_hat + P_L(1-P_s)/(P_s(1-P_L))] * C_RF * C_RS
};
RoutingCost routing_cost(const AnalyticParams& p);

// ---- packet routing probabilities -------------------------------------------

enum class JanitorRouteVariant { Literal, AtLeastOne };

// tau = (1 - P_B)^3 is one janitor's chance to find the route. The literal
// variant returns the printed (1 - tau)^{E_N}, which is the all-janitors-fail
// probability; the at-least-one variant returns its complement, matching the
// surrounding prose. Neither is endorsed over the other.
double p_janitor_route(double p_b, double e_n, JanitorRouteVariant variant);

// P(H = K) = C(E_N, K) tau^K (1 - tau)^{E_N - K}
double binomial_janitor_count(std::uint32_t e_n, double tau, std::uint32_t k_count);

// ---- discovery probabilities -------------------------------------------------

struct DiscoverySuccess {
    double p_f0 = 0.0;  // (1 - P_0)^K           self diagnosis fails
    double p_f1 = 0.0;  // (1 - P_0)^{K*E_N}     all janitors fail
    double p_r = 0.0;   // 1 - P_F0 * P_F1
};
DiscoverySuccess p_discovery_success(double p_0, double k_cap, double e_n);

// Monte Carlo oracle for the same event: K*(1+E_N) independent attempts,
// success when at least one lands.
double p_discovery_success_mc(double p_0, std::uint32_t k_cap, std::uint32_t e_n,
                              std::uint64_t trials, std::uint64_t seed);

// ---- end-to-end success (estimator) -----------------------------------------

// Event decomposition of end-to-end packet success: no link error along the
// route, or exactly one link error whose recovery succeeds. The printed
// closed form is unusable, so this is estimated.
struct PacketSuccessInput {
    double per_link_failure = 0.0;  // from P_B
    double e_l = 1.0;               // independent links on the route
    double recovery_success = 0.0;  // from the discovery model
};

struct McEstimate {
    double estimate = 0.0;
    double half_width = 0.0;  // 95% confidence
    std::uint64_t trials = 0;
};
McEstimate p_packet_success_mc(const PacketSuccessInput& in, std::uint64_t trials,
                               std::uint64_t seed);

// Two-term closed form of the same decomposition (oracle for the estimator).
double p_packet_success_closed(const PacketSuccessInput& in);

// Monte Carlo oracle for per-term routing success: two independent Bernoulli
// events both succeeding.
double p_routing_success_mc(double p_l, double p_js, std::uint64_t trials,
                            std::uint64_t seed);

// Monte Carlo oracle for the at-least-one janitor variant.
double p_janitor_route_mc(double p_b, std::uint32_t e_n, std::uint64_t trials,
                          std::uint64_t seed);

} // namespace jbrsim::analytic
