#include "fantomette/analytics.hpp"

#include <doctest.h>

#include <boost/math/distributions/binomial.hpp>

#include <cmath>
#include <map>
#include <utility>
#include <vector>

using namespace fantomette::analytics;

namespace {

double binom_pmf(std::uint64_t trials, double p, std::uint64_t k) {
    if (k > trials) return 0.0;
    if (trials == 0) return k == 0 ? 1.0 : 0.0;
    return boost::math::pdf(boost::math::binomial(static_cast<double>(trials), p), static_cast<double>(k));
}

/// Generation-size distributions of the branching process started from one
/// block, each offspring count Binomial(n_c * x, p). Returns the expected
/// number of non-empty generations.
double depth_oracle(const CoalitionParams& cp, std::uint64_t cap = 40, int generations = 40) {
    std::vector<double> dist(cap + 1, 0.0);
    dist[1] = 1.0;
    double expected = 0.0;
    for (int g = 0; g < generations; ++g) {
        std::vector<double> next(cap + 1, 0.0);
        next[0] = dist[0];
        for (std::uint64_t x = 1; x <= cap; ++x) {
            if (dist[x] == 0.0) continue;
            for (std::uint64_t y = 0; y <= cap; ++y) next[y] += dist[x] * binom_pmf(cp.n_c * x, cp.p, y);
        }
        dist = std::move(next);
        expected += 1.0 - dist[0];
    }
    return expected;
}

/// P(total progeny > k) by dynamic programming over (generation size, total).
double harm_oracle(const CoalitionParams& cp, unsigned k) {
    std::map<std::pair<std::uint64_t, std::uint64_t>, double> live{{{1, 0}, 1.0}};
    double extinct_small = 0.0;
    while (!live.empty()) {
        std::map<std::pair<std::uint64_t, std::uint64_t>, double> next;
        for (const auto& [state, prob] : live) {
            const auto [x, total] = state;
            for (std::uint64_t y = 0; total + y <= k; ++y) {
                const double q = prob * binom_pmf(cp.n_c * x, cp.p, y);
                if (y == 0) extinct_small += q;
                else next[{y, total + y}] += q;
            }
        }
        live = std::move(next);
    }
    return 1.0 - extinct_small;
}

}  // namespace

TEST_CASE("parameter validation") {
    CHECK(make_params(150, 50).p == doctest::Approx(1.0 / 150.0));
    CHECK_THROWS_AS(make_params(0, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_params(10, 11), std::invalid_argument);
    CHECK_THROWS_AS(expected_consecutive(CoalitionParams{1, 1, 1.0}), std::domain_error);
}

TEST_CASE("expected consecutive coalition leaders") {
    for (std::uint64_t nc : {1, 12, 37, 50, 75}) {
        const auto cp = make_params(150, nc);
        const double q = 1.0 - std::pow(1.0 - cp.p, static_cast<double>(nc));
        CHECK(expected_consecutive(cp) == doctest::Approx(q / (1.0 - q)).epsilon(1e-9));
    }
    CHECK(std::abs(expected_consecutive(make_params(150, 50)) - 0.395) <= 0.005);
}

TEST_CASE("grinding depth matches the generation-distribution oracle") {
    for (std::uint64_t nc : {12, 37, 50}) {
        const auto cp = make_params(150, nc);
        const double want = depth_oracle(cp);
        INFO("n_c = " << nc);
        CHECK(grinding_expectation(cp) == doctest::Approx(want).epsilon(0.01));
        const Estimate mc = grinding_depth_mc(cp, 100000, 3);
        CHECK(std::abs(mc.mean - want) <= 4.0 * mc.std_error + 1e-9);
    }
    CHECK(std::abs(grinding_expectation(make_params(150, 50)) - 0.42) <= 0.01);
}

TEST_CASE("exact grinding terms are probabilities of exact lengths") {
    const auto cp = make_params(150, 50);
    const double p1 = grinding_exact_term(cp, 1);
    // One coalition leader, then none: Binomial(50, p) = j then Binomial(50 j, p) = 0.
    double want = 0.0;
    for (std::uint64_t j = 1; j <= 50; ++j) want += binom_pmf(50, cp.p, j) * binom_pmf(50 * j, cp.p, 0);
    CHECK(p1 == doctest::Approx(want).epsilon(1e-9));
    CHECK(grinding_exact_term(cp, 2) < p1);
    CHECK(grinding_exact_term(cp, 3) < grinding_exact_term(cp, 2));
    CHECK_THROWS(grinding_exact_term(cp, 4));
    CHECK_THROWS(grinding_exact_term(cp, 0));
}

TEST_CASE("private subDAG harm matches the dynamic-programming oracle") {
    for (std::uint64_t nc : {12, 37, 50}) {
        for (unsigned k : {2u, 3u, 4u}) {
            const auto cp = make_params(150, nc);
            INFO("n_c = " << nc << " k = " << k);
            CHECK(harm_subdag_probability(cp, k) == doctest::Approx(harm_oracle(cp, k)).epsilon(1e-6));
        }
    }
    const auto third = make_params(150, 50);
    CHECK(harm_term_sum(third) == doctest::Approx(1.0 - harm_oracle(third, 3)).epsilon(1e-9));
    const Estimate mc = harm_subdag_mc(third, 3, 200000, 5);
    CHECK(std::abs(mc.mean - harm_oracle(third, 3)) <= 4.0 * mc.std_error);
    CHECK(std::abs(harm_subdag_probability(third) - 0.025) <= 0.003);
    CHECK(std::abs(harm_subdag_probability(make_params(150, 37)) - 0.010) <= 0.002);
}

TEST_CASE("immunity ratio") {
    const auto third = make_params(150, 50);
    const double h = harm_oracle(third, 3);
    CHECK(immunity_ratio(third, 6.0, 1.0) == doctest::Approx(67.0 / (67.0 - 100.0 * h * 6.0)).epsilon(1e-6));
    CHECK(std::abs(immunity_ratio(third, 6.0, 1.0) - 1.29) <= 0.03);
    CHECK(std::abs(immunity_ratio(make_params(150, 37), 6.0, 1.0) - 1.10) <= 0.02);
    CHECK(immunity_ratio(third, 0.0, 1.0) == 1.0);
    CHECK_THROWS_AS(immunity_ratio(third, 1000.0, 1.0), std::domain_error);
}
