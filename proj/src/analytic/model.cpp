#include "jbrsim/analytic/model.hpp"

#include "jbrsim/errors.hpp"

#include <cmath>
#include <random>

namespace jbrsim::analytic {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("analytic domain error: ") + what);
}

void require_prob(double p, const char* name) {
    require(p >= 0.0 && p <= 1.0, name);
}

std::mt19937_64 seeded(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      0x9e37u, 0x79b9u};
    return std::mt19937_64(seq);
}

} // namespace

void AnalyticParams::validate() const {
    require(mu >= 0.0 && lambda_rate >= 0.0, "rates must be nonnegative");
    require(e_l >= 1.0, "e_l must be >= 1");
    require(e_n >= 0.0, "e_n must be >= 0");
    require(k >= 0.0 && k_hat >= 0.0, "k and k_hat must be >= 0");
    require(k + k_hat < 3.0 * e_l, "k + k_hat must be below 3*e_l");
    require(k_cap >= 1.0, "k_cap must be >= 1");
    require_prob(p_l, "p_l");
    require_prob(p_js, "p_js");
    require_prob(p_0, "p_0");
    require_prob(p_s, "p_s");
    require(c_ls >= 0.0 && c_lf >= 0.0 && c_qd >= 0.0 && c_ru >= 0.0,
            "costs must be nonnegative");
}

// ---- route break -----------------------------------------------------------

double p_route_broken(double mu, double lambda_rate) {
    require(mu >= 0.0 && lambda_rate >= 0.0, "rates must be nonnegative");
    require(mu + lambda_rate > 0.0, "mu + lambda must be positive");
    return mu / (mu + lambda_rate);
}

double p_route_broken_mc(double mu, double lambda_rate, std::uint64_t trials,
                         std::uint64_t seed) {
    require(mu >= 0.0 && lambda_rate >= 0.0, "rates must be nonnegative");
    require(mu + lambda_rate > 0.0, "mu + lambda must be positive");
    require(trials >= 1000, "trials too small");
    auto rng = seeded(seed);
    if (mu == 0.0) return 0.0;
    if (lambda_rate == 0.0) return 1.0;
    std::exponential_distribution<double> break_time(mu);
    std::exponential_distribution<double> arrival(lambda_rate);
    std::uint64_t broken = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
        if (break_time(rng) < arrival(rng)) ++broken;
    }
    return static_cast<double>(broken) / static_cast<double>(trials);
}

// ---- transmission cost -------------------------------------------------------

double p_routing_success(double p_l, double p_js, SuccessMode mode) {
    require_prob(p_l, "p_l");
    require_prob(p_js, "p_js");
    switch (mode) {
    case SuccessMode::Literal: {
        const double union_prob = p_l + p_js - p_l * p_js;
        return p_l + p_js - union_prob;
    }
    case SuccessMode::Conjunction:
        return p_l * p_js;
    }
    return 0.0;
}

double p_routing_success_mc(double p_l, double p_js, std::uint64_t trials,
                            std::uint64_t seed) {
    require_prob(p_l, "p_l");
    require_prob(p_js, "p_js");
    require(trials >= 1000, "trials too small");
    auto rng = seeded(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
        const bool link_ok = u(rng) < p_l;
        const bool janitor_ok = u(rng) < p_js;
        if (link_ok && janitor_ok) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

namespace {

double attempt_denominator(double e_l, double k, double k_hat) {
    const double denom = e_l + (e_l - k) + (e_l - k_hat);
    require(denom > 0.0, "denominator 3*e_l - k - k_hat must be positive");
    return denom;
}

} // namespace

double expected_success_ratio(double p_s, double e_l, double k, double k_hat) {
    require_prob(p_s, "p_s");
    return p_s / attempt_denominator(e_l, k, k_hat);
}

double expected_failure_ratio(double p_s, double e_l, double k, double k_hat) {
    require_prob(p_s, "p_s");
    return (1.0 - p_s) / attempt_denominator(e_l, k, k_hat);
}

RoutingCost routing_cost(const AnalyticParams& p) {
    p.validate();
    RoutingCost out;
    out.c_rf = p.q * (p.c_ls + p.c_lf + p.c_qd + p.c_ru);
    out.c_rs = 3.0 * p.e_l * p.c_ls - p.c_ls * (p.k + p.k_hat);
    out.c_r = p.z * out.c_rf * out.c_rs;
    if (p.p_l < 1.0 && p.p_s > 0.0) {
        out.alt_defined = true;
        const double ratio = p.p_l * (1.0 - p.p_s) / (p.p_s * (1.0 - p.p_l));
        const double bracket = p.e_l + (p.e_l - p.k) + (p.e_l - p.k_hat) + ratio;
        out.c_r_alt = bracket * out.c_rf * out.c_rs;
    }
    return out;
}

// ---- packet routing probabilities --------------------------------------------

double p_janitor_route(double p_b, double e_n, JanitorRouteVariant variant) {
    require_prob(p_b, "p_b");
    require(e_n >= 1.0, "e_n must be >= 1");
    const double tau = std::pow(1.0 - p_b, 3.0);
    const double all_fail = std::pow(1.0 - tau, e_n);
    return variant == JanitorRouteVariant::Literal ? all_fail : 1.0 - all_fail;
}

double p_janitor_route_mc(double p_b, std::uint32_t e_n, std::uint64_t trials,
                          std::uint64_t seed) {
    require_prob(p_b, "p_b");
    require(e_n >= 1, "e_n must be >= 1");
    require(trials >= 1000, "trials too small");
    const double tau = std::pow(1.0 - p_b, 3.0);
    auto rng = seeded(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
        for (std::uint32_t j = 0; j < e_n; ++j) {
            if (u(rng) < tau) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

double binomial_janitor_count(std::uint32_t e_n, double tau, std::uint32_t k_count) {
    require_prob(tau, "tau");
    require(k_count <= e_n, "k_count out of range");
    // multiplicative form keeps the mass exact enough to normalize to 1e-12
    double mass = 1.0;
    for (std::uint32_t i = 1; i <= k_count; ++i) {
        mass *= static_cast<double>(e_n - k_count + i) / static_cast<double>(i);
        mass *= tau;
    }
    for (std::uint32_t i = 0; i < e_n - k_count; ++i) {
        mass *= 1.0 - tau;
    }
    return mass;
}

// ---- discovery ---------------------------------------------------------------

DiscoverySuccess p_discovery_success(double p_0, double k_cap, double e_n) {
    require_prob(p_0, "p_0");
    require(k_cap >= 1.0, "k_cap must be >= 1");
    require(e_n >= 0.0, "e_n must be >= 0");
    DiscoverySuccess out;
    out.p_f0 = std::pow(1.0 - p_0, k_cap);
    out.p_f1 = std::pow(1.0 - p_0, k_cap * e_n);
    out.p_r = 1.0 - out.p_f0 * out.p_f1;
    return out;
}

double p_discovery_success_mc(double p_0, std::uint32_t k_cap, std::uint32_t e_n,
                              std::uint64_t trials, std::uint64_t seed) {
    require_prob(p_0, "p_0");
    require(k_cap >= 1, "k_cap must be >= 1");
    require(trials >= 1000, "trials too small");
    const std::uint32_t attempts = k_cap * (1 + e_n);
    auto rng = seeded(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
        for (std::uint32_t a = 0; a < attempts; ++a) {
            if (u(rng) < p_0) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

// ---- end-to-end success --------------------------------------------------------

double p_packet_success_closed(const PacketSuccessInput& in) {
    require_prob(in.per_link_failure, "per_link_failure");
    require_prob(in.recovery_success, "recovery_success");
    require(in.e_l >= 1.0, "e_l must be >= 1");
    const double p = in.per_link_failure;
    const double links = in.e_l;
    const double none = std::pow(1.0 - p, links);
    const double one = links * p * std::pow(1.0 - p, links - 1.0);
    return none + one * in.recovery_success;
}

McEstimate p_packet_success_mc(const PacketSuccessInput& in, std::uint64_t trials,
                               std::uint64_t seed) {
    require_prob(in.per_link_failure, "per_link_failure");
    require_prob(in.recovery_success, "recovery_success");
    require(in.e_l >= 1.0, "e_l must be >= 1");
    require(trials >= 1000, "trials below 10^3 rejected");

    const auto links = static_cast<std::uint32_t>(std::llround(in.e_l));
    auto rng = seeded(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uint64_t successes = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        std::uint32_t errors = 0;
        for (std::uint32_t l = 0; l < links && errors < 2; ++l) {
            if (u(rng) < in.per_link_failure) ++errors;
        }
        if (errors == 0) {
            ++successes;
        } else if (errors == 1 && u(rng) < in.recovery_success) {
            ++successes;
        }
    }
    McEstimate out;
    out.trials = trials;
    out.estimate = static_cast<double>(successes) / static_cast<double>(trials);
    out.half_width = 1.96 * std::sqrt(out.estimate * (1.0 - out.estimate) /
                                      static_cast<double>(trials));
    return out;
}

} // namespace jbrsim::analytic
