#include "fantomette/incentives.hpp"

#include <algorithm>
#include <unordered_map>

namespace fantomette {

double block_reward(const Block& b, const IncentiveParams& params) {
    const std::size_t refs = b.leaves.size();
    const std::size_t units = params.reward_floor ? std::max<std::size_t>(1, refs) : refs;
    return static_cast<double>(units) * params.c;
}

namespace {

std::vector<BlockDag::Index> blocks_of(const BlockDag& dag, ParticipantId player) {
    std::vector<BlockDag::Index> out;
    for (BlockDag::Index i = 1; i < dag.size(); ++i) {
        if (dag.block(i).sender == player) out.push_back(i);
    }
    return out;
}

}  // namespace

std::vector<std::pair<BlockId, BlockId>> own_unaware_pairs(const BlockDag& dag, ParticipantId player) {
    const auto own = blocks_of(dag, player);
    std::vector<std::pair<BlockId, BlockId>> out;
    for (std::size_t a = 0; a < own.size(); ++a) {
        for (std::size_t b = a + 1; b < own.size(); ++b) {
            if (dag.in_past(own[a], own[b]) || dag.in_past(own[b], own[a])) continue;
            out.emplace_back(dag.id_of(own[a]), dag.id_of(own[b]));
        }
    }
    return out;
}

std::size_t own_unaware_pair_count(const BlockDag& dag, ParticipantId player) {
    const auto own = blocks_of(dag, player);
    std::size_t n = 0;
    for (std::size_t a = 0; a < own.size(); ++a) {
        for (std::size_t b = a + 1; b < own.size(); ++b) {
            if (!dag.in_past(own[a], own[b]) && !dag.in_past(own[b], own[a])) ++n;
        }
    }
    return n;
}

Payoff payoff_on(const BlockDag& dag, const LabelMap& labels, ParticipantId player, std::size_t pairs,
                 const IncentiveParams& params) {
    Payoff p;
    p.player = player;
    for (BlockDag::Index i = 1; i < dag.size(); ++i) {
        const Block& b = dag.block(i);
        if (b.sender != player) continue;
        if (labels.labels[i] == Label::winner) p.reward_sum += block_reward(b, params);
        if (labels.labels[i] == Label::loser) ++p.pun_count;
    }
    p.bigpun_count = pairs;
    p.total = p.reward_sum - params.pun * static_cast<double>(p.pun_count) -
              params.bigpun * static_cast<double>(p.bigpun_count);
    return p;
}

BlockDag merge_views(std::span<const BlockDag* const> views, ScoreMode mode) {
    std::unordered_map<BlockId, std::pair<std::uint64_t, BlockPtr>, DigestHash> all;
    for (const BlockDag* v : views) {
        for (BlockDag::Index i = 0; i < v->size(); ++i) all.emplace(v->id_of(i), std::make_pair(v->level(i), v->block_ptr(i)));
    }
    std::vector<std::pair<std::uint64_t, BlockPtr>> order;
    order.reserve(all.size());
    for (auto& [id, e] : all) order.push_back(e);
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second->id < b.second->id;
    });
    BlockDag out(mode);
    for (auto& [lvl, b] : order) out.insert(b);
    return out;
}

std::vector<Payoff> settle(std::span<const BlockDag* const> views, std::span<const ParticipantId> players,
                           const IncentiveParams& params) {
    const ScoreMode mode = views.empty() ? ScoreMode::induced : views.front()->score_mode();
    const BlockDag g = bcpc(views, mode);
    const LabelMap m = label(g, params.k);
    BlockDag merged;
    const BlockDag* pair_dag = &g;
    if (params.pair_scope == PairScope::union_of_views) {
        merged = merge_views(views, mode);
        pair_dag = &merged;
    }
    std::vector<Payoff> out;
    out.reserve(players.size());
    for (ParticipantId p : players) {
        out.push_back(payoff_on(g, m, p, own_unaware_pair_count(*pair_dag, p), params));
    }
    return out;
}

}  // namespace fantomette
