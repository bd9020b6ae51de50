#pragma once

// Settlement: utilities of every player over the biggest common prefix DAG.

#include "fantomette/blockdag.hpp"
#include "fantomette/rules.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace fantomette {

/// Which DAG the mutually-unaware pairs N are evaluated on.
enum class PairScope {
    /// Blocks held by a majority of views. Views are downward closed, so this
    /// is exactly the bcpc.
    majority,
    /// Every block held by any view.
    union_of_views,
};

struct IncentiveParams {
    double c = 1.0;
    double pun = 6.0;
    double bigpun = 10.0;
    std::size_t k = 3;
    /// rwd(B) = max(1, |B_leaf|) * c instead of |B_leaf| * c.
    bool reward_floor = true;
    PairScope pair_scope = PairScope::majority;
};

struct Payoff {
    ParticipantId player = 0;
    double reward_sum = 0.0;
    std::size_t pun_count = 0;
    std::size_t bigpun_count = 0;
    double total = 0.0;
};

double block_reward(const Block& b, const IncentiveParams& params);

/// Unordered pairs of `player`'s blocks with neither in the other's past.
std::vector<std::pair<BlockId, BlockId>> own_unaware_pairs(const BlockDag& dag, ParticipantId player);
std::size_t own_unaware_pair_count(const BlockDag& dag, ParticipantId player);

/// One player's utility on a labelled DAG, with |N| supplied by the caller.
Payoff payoff_on(const BlockDag& dag, const LabelMap& labels, ParticipantId player, std::size_t pairs,
                 const IncentiveParams& params);

/// Union of views as one DAG.
BlockDag merge_views(std::span<const BlockDag* const> views, ScoreMode mode = ScoreMode::induced);

/// G* = bcpc(views), M = label(G*); one Payoff per listed player.
std::vector<Payoff> settle(std::span<const BlockDag* const> views, std::span<const ParticipantId> players,
                           const IncentiveParams& params);

}  // namespace fantomette
