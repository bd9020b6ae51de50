#pragma once

// Slot-based network simulator: exponential delivery delays capped at delta,
// one step per agent per slot, settlement at the horizon.

#include "fantomette/agents.hpp"
#include "fantomette/config.hpp"
#include "fantomette/finality.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace fantomette {

struct FinalityRecord {
    std::uint64_t slot = 0;
    std::uint64_t rank = 0;
    FinalityEventKind kind = FinalityEventKind::candidate;
    BlockId block{};
    BlockId candidate{};
};

struct PlayerPayoff {
    AgentClass cls = AgentClass::altruistic;
    Payoff payoff;
};

struct RunMetrics {
    std::uint64_t run = 0;
    std::uint64_t seed = 0;
    std::uint64_t coalition_size = 0;
    AgentClass cls = AgentClass::altruistic;

    std::size_t blocks = 0;
    std::size_t main_chain_length = 0;
    std::size_t longest_fork = 0;
    /// Fractions of the settled main chain (genesis excluded) by sender class.
    double quality_altruistic = 0.0;
    double quality_coalition = 0.0;
    /// Mean totals per class; NaN for an empty class.
    double payoff_altruistic = 0.0;
    double payoff_coalition = 0.0;
    std::size_t finality_violations = 0;
    /// Slot after the last time any altruist's depth-k0 chain prefix moved
    /// to a conflicting branch.
    std::uint64_t convergence_slot = 0;
    std::size_t prefix_reorgs = 0;
    /// Mean slots between consecutive main-chain blocks.
    double mean_gap = 0.0;
    std::size_t invalid_broadcasts = 0;
    std::size_t late_deliveries = 0;
    std::size_t alarms = 0;
    std::size_t rational_decisions = 0;
    std::size_t rational_withholds = 0;

    std::vector<PlayerPayoff> payoffs;
    std::vector<FinalityRecord> finality_events;
};

/// Seed of run `run_index`; independent of coalition sizes so sweeps share
/// randomness across sizes.
std::uint64_t derive_run_seed(std::uint64_t master, std::uint64_t run_index);

/// Throws ConfigError when the config is invalid.
RunMetrics run_simulation(const SimConfig& cfg, std::uint64_t run_index);

/// For each size, config.runs runs with that many players of class `cls`
/// and the rest altruistic.
std::vector<RunMetrics> sweep(const SimConfig& cfg, const std::vector<std::uint64_t>& sizes, AgentClass cls);

void write_metrics_csv(std::ostream& os, const std::vector<RunMetrics>& rows);
void write_payoffs_csv(std::ostream& os, const std::vector<RunMetrics>& rows);
void write_finality_csv(std::ostream& os, const std::vector<RunMetrics>& rows);

}  // namespace fantomette
