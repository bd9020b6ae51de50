#pragma once

#include "fantomette/blockdag.hpp"
#include "fantomette/incentives.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fantomette {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimConfig {
    std::uint64_t n_players = 150;
    std::uint64_t slots = 5000;
    double f_byzantine = 0.0;
    double f_altruistic = 1.0;
    double f_rational = 0.0;
    std::uint64_t k = 3;
    double c = 1.0;
    double pun = 6.0;
    double bigpun = 10.0;
    double delay_mean = 2.0;
    std::uint64_t delta_cap = 10;
    std::uint64_t delay_pod = 40;
    std::uint64_t w = 6;
    std::int64_t x_commit = 10;
    std::uint64_t runs = 10;
    std::uint64_t seed = 1;
    ScoreMode score_mode = ScoreMode::induced;
    bool reward_floor = true;
    PairScope pair_scope = PairScope::majority;
    bool rotation = false;
    std::uint64_t pod_iters = 1;
    std::uint64_t rational_depth = 4;
    std::uint64_t rational_horizon = 10;
    std::uint64_t rational_rollouts = 32;
    std::uint64_t convergence_depth = 20;

    std::uint64_t byzantine_count() const;
    std::uint64_t rational_count() const;
    std::uint64_t altruistic_count() const;
    IncentiveParams incentive_params() const;

    /// Throws ConfigError on an unknown key or malformed value.
    void set(std::string_view key, std::string_view value);
    /// Throws ConfigError on violated constraints.
    void validate() const;
    /// Every field as (key, value) in declaration order.
    std::vector<std::pair<std::string, std::string>> entries() const;
};

/// Flat `key = value` lines, `#` starts a comment. Errors name the line.
SimConfig parse_config_text(std::string_view text, SimConfig base = {});
SimConfig load_config_file(const std::string& path, SimConfig base = {});

/// `key=value` per line.
std::string config_echo(const SimConfig& cfg);

std::string format_fixed(double v);

}  // namespace fantomette
