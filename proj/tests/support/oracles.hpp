#pragma once

// Brute-force reference implementations over plain edge lists, used to
// cross-check the indexed BlockDag, fork choice, labelling and settlement.

#include "fantomette/blockdag.hpp"
#include "fantomette/incentives.hpp"
#include "fantomette/rules.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace fantomette::testing {

/// Edge-list copy of a DAG; no cached relations.
struct RawDag {
    std::vector<BlockId> ids;
    std::vector<std::vector<int>> parents;  // prev first
    std::vector<ParticipantId> senders;
    std::vector<Digest> fingerprints;
    std::vector<Digest> tiebreaks;
    std::vector<std::size_t> leaf_refs;  // |B_leaf|
    ScoreMode mode = ScoreMode::induced;

    static RawDag from(const BlockDag& dag);
    int size() const { return static_cast<int>(ids.size()); }
};

std::set<int> oracle_past(const RawDag& g, int b);
std::set<int> oracle_ancestors(const RawDag& g, int b);
std::set<int> oracle_anticone(const RawDag& g, int b);
std::set<int> oracle_direct_future(const RawDag& g, int b);
std::optional<int> oracle_distance(const RawDag& g, int a, int b);
std::set<int> oracle_double(const RawDag& g);
std::uint64_t oracle_score(const RawDag& g, int b);
int oracle_fcr(const RawDag& g);
/// Label by the textbook procedure; 0 winner, 1 loser, 2 neutral.
std::vector<int> oracle_label(const RawDag& g, std::size_t k);
/// Payoff totals for `players` over views given as sets of block ids of one
/// universe DAG.
std::vector<double> oracle_settle(const RawDag& universe, const std::vector<std::set<int>>& views,
                                  const std::vector<ParticipantId>& players, const IncentiveParams& params);

struct RandomDagOptions {
    int max_blocks = 12;
    int players = 4;
    double double_probability = 0.1;
};

/// Random valid-shape DAG: each block picks a prev and a few other
/// references among existing blocks; some reuse an earlier proof (Double).
BlockDag random_dag(std::mt19937_64& rng, const RandomDagOptions& opt = {}, ScoreMode mode = ScoreMode::induced);

/// Random downward-closed subset (always containing genesis).
std::set<int> random_view(std::mt19937_64& rng, const RawDag& g);

struct OracleReport {
    std::map<std::string, std::size_t> mismatches;
    std::size_t dags = 0;
    std::size_t total() const;
};

/// Compares ancestors/past/anticone/direct_future/distance/fcr/label/settle
/// against the oracles on `count` random DAGs.
OracleReport compare_with_oracles(std::uint64_t seed, std::size_t count);

}  // namespace fantomette::testing
