#include "fantomette/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace fantomette::analytics {

namespace {

double log_choose(double n, double k) { return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1); }

/// C(trials, k) p^k (1-p)^(trials-k), computed in log space.
double binom_pmf(std::uint64_t trials, std::uint64_t k, double p) {
    if (k > trials) return 0.0;
    if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return k == trials ? 1.0 : 0.0;
    const double t = static_cast<double>(trials);
    const double kk = static_cast<double>(k);
    return std::exp(log_choose(t, kk) + kk * std::log(p) + (t - kk) * std::log1p(-p));
}

double choose(double n, double k) { return std::exp(log_choose(n, k)); }

}  // namespace

void validate(const CoalitionParams& params) {
    if (params.n == 0 || params.n_c == 0 || params.n_c > params.n) {
        throw std::invalid_argument("coalition params need 0 < n_c <= n");
    }
    if (!(params.p > 0.0) || params.p > 1.0) throw std::invalid_argument("coalition params need p in (0, 1]");
}

CoalitionParams make_params(std::uint64_t n, std::uint64_t n_c) {
    CoalitionParams params{n, n_c, n == 0 ? 0.0 : 1.0 / static_cast<double>(n)};
    validate(params);
    return params;
}

double expected_consecutive(const CoalitionParams& params) {
    validate(params);
    const double q = 1.0 - std::pow(1.0 - params.p, static_cast<double>(params.n_c));
    if (q >= 1.0) throw std::domain_error("expected_consecutive diverges when q = 1");
    double sum = 0.0;
    double qj = q;
    for (std::uint64_t j = 1;; ++j, qj *= q) {
        const double term = static_cast<double>(j) * qj * (1.0 - q);
        sum += term;
        // Remaining tail is bounded by term * q / (1 - q)^2 * (1 + 1/j).
        const double tail = term * q / ((1.0 - q) * (1.0 - q)) * 2.0;
        if (tail <= 1e-12 * std::max(sum, 1e-300) || j > 100000000) break;
    }
    return sum;
}

double grinding_exact_term(const CoalitionParams& params, unsigned len, std::uint64_t cap) {
    validate(params);
    if (len < 1 || len > 3) throw std::invalid_argument("grinding_exact_term: len must be 1..3");
    const std::uint64_t nc = params.n_c;
    const double p = params.p;
    const double lq = std::log1p(-p);
    double total = 0.0;
    // Each x_i ~ Binomial(nc * x_{i-1}, p) with x_0 = 1, then the last
    // generation has no offspring: (1-p)^(nc * x_len).
    auto end = [&](std::uint64_t x) { return std::exp(static_cast<double>(nc * x) * lq); };
    for (std::uint64_t x1 = 1; x1 <= std::min(nc, cap); ++x1) {
        const double a = binom_pmf(nc, x1, p);
        if (len == 1) {
            total += a * end(x1);
            continue;
        }
        for (std::uint64_t x2 = 1; x2 <= std::min(nc * x1, cap); ++x2) {
            const double b = a * binom_pmf(nc * x1, x2, p);
            if (len == 2) {
                total += b * end(x2);
                continue;
            }
            for (std::uint64_t x3 = 1; x3 <= std::min(nc * x2, cap); ++x3) {
                total += b * binom_pmf(nc * x2, x3, p) * end(x3);
            }
        }
    }
    return total;
}

Estimate grinding_depth_mc(const CoalitionParams& params, std::uint64_t trials, std::uint64_t seed) {
    validate(params);
    std::mt19937_64 rng(seed);
    double sum = 0.0;
    double sq = 0.0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        std::uint64_t gen = 1;
        std::uint64_t depth = 0;
        while (gen > 0 && depth < 10000) {
            std::binomial_distribution<std::uint64_t> draw(gen * params.n_c, params.p);
            gen = draw(rng);
            if (gen > 0) ++depth;
        }
        const double d = static_cast<double>(depth);
        sum += d;
        sq += d * d;
    }
    const double n = static_cast<double>(trials);
    const double mean = sum / n;
    const double var = std::max(0.0, sq / n - mean * mean);
    return {mean, std::sqrt(var / n)};
}

double grinding_expectation(const CoalitionParams& params, unsigned max_exact, std::uint64_t trials,
                            std::uint64_t seed) {
    validate(params);
    max_exact = std::min(max_exact, 3u);
    double exact = 0.0;
    for (unsigned len = 1; len <= max_exact; ++len) exact += len * grinding_exact_term(params, len);
    if (trials == 0) return exact;
    // Tail: E[depth * 1{depth > max_exact}] by simulation.
    std::mt19937_64 rng(seed);
    double tail = 0.0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        std::uint64_t gen = 1;
        std::uint64_t depth = 0;
        while (gen > 0 && depth < 10000) {
            std::binomial_distribution<std::uint64_t> draw(gen * params.n_c, params.p);
            gen = draw(rng);
            if (gen > 0) ++depth;
        }
        if (depth > max_exact) tail += static_cast<double>(depth);
    }
    return exact + tail / static_cast<double>(trials);
}

double harm_term_sum(const CoalitionParams& params) {
    validate(params);
    const double nc = static_cast<double>(params.n_c);
    const double p = params.p;
    const double q = 1.0 - p;
    auto pw = [&](double e) { return std::pow(q, e); };
    const double single = nc * p * pw(nc - 1);
    return pw(nc)                                              // no block
           + nc * p * pw(2 * nc - 1)                           // one block
           + choose(nc, 2) * p * p * pw(3 * nc - 2)            // two siblings
           + single * single * pw(nc)                          // chain of two
           + choose(nc, 3) * p * p * p * pw(4 * nc - 3)        // three siblings
           + choose(nc, 2) * nc * p * p * p * pw(4 * nc - 3)   // one block, two children
           + choose(nc, 2) * 2 * nc * p * p * p * pw(4 * nc - 3)  // two siblings, one child
           + single * single * single * pw(nc);                // chain of three
}

double harm_subdag_probability(const CoalitionParams& params, unsigned k) {
    validate(params);
    if (k == 3) return std::max(0.0, 1.0 - harm_term_sum(params));
    double at_most = 0.0;
    for (std::uint64_t j = 1; j <= k + 1; ++j) at_most += binom_pmf(j * params.n_c, j - 1, params.p) / static_cast<double>(j);
    return std::max(0.0, 1.0 - at_most);
}

Estimate harm_subdag_mc(const CoalitionParams& params, unsigned k, std::uint64_t trials, std::uint64_t seed) {
    validate(params);
    std::mt19937_64 rng(seed);
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        std::uint64_t gen = 1;
        std::uint64_t blocks = 0;
        while (gen > 0 && blocks <= k) {
            std::binomial_distribution<std::uint64_t> draw(gen * params.n_c, params.p);
            gen = draw(rng);
            blocks += gen;
        }
        if (blocks > k) ++hits;
    }
    const double n = static_cast<double>(trials);
    const double mean = static_cast<double>(hits) / n;
    return {mean, std::sqrt(mean * (1.0 - mean) / n)};
}

double immunity_ratio(const CoalitionParams& params, double pun, double c, unsigned k) {
    const double harm = harm_subdag_probability(params, k);
    const double denom = 67.0 * c - 100.0 * harm * pun;
    if (denom <= 0.0) throw std::domain_error("immunity_ratio: honest payoff fully consumed");
    return 67.0 * c / denom;
}

}  // namespace fantomette::analytics
