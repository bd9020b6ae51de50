#pragma once

// Closed-form and Monte-Carlo estimates for coalition block production:
// consecutive leaders, grinding depth, private subDAG size and immunity.

#include <cstdint>
#include <stdexcept>

namespace fantomette::analytics {

struct CoalitionParams {
    std::uint64_t n = 150;
    std::uint64_t n_c = 50;
    /// Per-player per-round win probability; 1/n when constructed via make_params.
    double p = 1.0 / 150.0;
};

/// Validates and fills p = 1/n.
CoalitionParams make_params(std::uint64_t n, std::uint64_t n_c);
void validate(const CoalitionParams& params);

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Sum_j j q^j (1-q), q = 1 - (1-p)^n_c, summed until the tail is below
/// 1e-12 relative. Throws std::domain_error when q = 1.
double expected_consecutive(const CoalitionParams& params);

/// Probability that grinding produces exactly `len` consecutive coalition
/// blocks: generation sizes x_1..x_len over S_len, generation i drawn from
/// Binomial(n_c * x_{i-1}, p), followed by an empty generation. Exact
/// summation with every x_i capped at `cap`. len must be 1..3.
double grinding_exact_term(const CoalitionParams& params, unsigned len, std::uint64_t cap = 64);

/// Expected grinding depth: exact terms for len <= max_exact (at most 3),
/// Monte-Carlo for the tail beyond.
double grinding_expectation(const CoalitionParams& params, unsigned max_exact = 3, std::uint64_t trials = 200000,
                            std::uint64_t seed = 1);

/// Branching-process simulation: depth (number of non-empty generations).
Estimate grinding_depth_mc(const CoalitionParams& params, std::uint64_t trials, std::uint64_t seed);

/// P(the coalition privately assembles more than k blocks). For k = 3 this
/// is one minus the eight-term sum enumerating subDAGs of 0-3 blocks; other
/// k use the hitting-time identity P(T = j) = P(Bin(j n_c, p) = j - 1) / j.
double harm_subdag_probability(const CoalitionParams& params, unsigned k = 3);

/// The eight enumerated terms (0, 1, 2 and 3 private blocks), k = 3 only.
double harm_term_sum(const CoalitionParams& params);

/// Monte-Carlo estimate of P(total private blocks > k).
Estimate harm_subdag_mc(const CoalitionParams& params, unsigned k, std::uint64_t trials, std::uint64_t seed);

/// 67c / (67c - 100 * harm * pun). Throws std::domain_error when the
/// denominator is not positive.
double immunity_ratio(const CoalitionParams& params, double pun, double c, unsigned k = 3);

}  // namespace fantomette::analytics
