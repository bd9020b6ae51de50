#include "fantomette/rules.hpp"

#include <algorithm>
#include <sstream>

namespace fantomette {

bool preferred(const Score& a, const Score& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.tiebreak != b.tiebreak) return a.tiebreak < b.tiebreak;
    return a.id < b.id;
}

Score score_at(const BlockDag& dag, BlockDag::Index i) {
    return {dag.score_value(i), dag.block(i).tiebreak(), dag.id_of(i)};
}

Score score(const BlockDag& dag, const BlockId& b) { return score_at(dag, dag.index_of(b)); }

BlockDag::Index fcr_index(const BlockDag& dag) {
    if (dag.empty()) throw DagError(DagError::Kind::unknown_block, "fcr of an empty DAG");
    if (dag.size() == 1) return dag.genesis();
    BlockDag::Index best = BlockDag::npos;
    Score best_score;
    for (BlockDag::Index l : dag.leaf_indices()) {
        const Score s = score_at(dag, l);
        if (best == BlockDag::npos || preferred(s, best_score)) {
            best = l;
            best_score = s;
        }
    }
    return best;
}

BlockId fcr(const BlockDag& dag) { return dag.id_of(fcr_index(dag)); }

BlockDag::Index fcr_of_parents(const BlockDag& dag, std::span<const BlockDag::Index> parents) {
    if (parents.empty()) throw std::invalid_argument("fcr_of_parents: no parents");
    // Leaves of past(b): parents not inside another parent's past.
    std::vector<BlockDag::Index> leaves;
    for (BlockDag::Index p : parents) {
        bool covered = false;
        for (BlockDag::Index q : parents) {
            if (q != p && dag.in_past(p, q)) {
                covered = true;
                break;
            }
        }
        if (!covered) leaves.push_back(p);
    }
    IndexSet past;
    bool needs_mask = false;
    if (dag.double_set().any()) {
        for (BlockDag::Index p : parents) {
            past |= dag.past_set(p);
            past.set(p);
        }
        needs_mask = past.intersects(dag.double_set());
    }
    const IndexSet mask = needs_mask ? dag.double_within(past) : IndexSet{};
    BlockDag::Index best = BlockDag::npos;
    Score best_score;
    for (BlockDag::Index l : leaves) {
        const Score s = needs_mask ? Score{dag.score_within(l, mask), dag.block(l).tiebreak(), dag.id_of(l)} : score_at(dag, l);
        if (best == BlockDag::npos || preferred(s, best_score)) {
            best = l;
            best_score = s;
        }
    }
    return best;
}

BeaconState beacon_for(const BlockDag& dag, BlockDag::Index prev, const ChainContext& ctx) {
    return BeaconState(dag.block(prev).beacon, static_cast<std::int64_t>(dag.height(prev) + 1), ctx.registry, ctx.beacon);
}

std::string to_string(Violation v) {
    switch (v) {
        case Violation::fcr_mismatch: return "FCR_MISMATCH";
        case Violation::ineligible: return "INELIGIBLE";
        case Violation::witness_rule: return "WITNESS_RULE";
        case Violation::second_witness_rule: return "SECOND_WITNESS_RULE";
    }
    return "UNKNOWN";
}

namespace {

std::vector<BlockDag::Index> resolve_parents(const BlockDag& dag, const Block& b) {
    if (b.is_genesis()) throw std::invalid_argument("verify_block: genesis is not verified");
    std::vector<BlockDag::Index> parents;
    auto add = [&](const BlockId& id) {
        auto i = dag.find(id);
        if (!i) throw DagError(DagError::Kind::dangling_reference, "reference to absent block " + short_hex(id));
        parents.push_back(*i);
    };
    add(*b.prev);
    for (const auto& l : b.leaves) add(l);
    return parents;
}

bool checkpoint_rules_hold(const BlockDag& dag, const FinalityTracker& fin, std::span<const BlockDag::Index> parents,
                           std::optional<Violation>* which) {
    const BlockDag::Index prev = parents.front();
    bool witness_seen = false;
    std::uint64_t rank_seen = 0;
    for (BlockDag::Index p : parents) {
        witness_seen = witness_seen || fin.witness_in_past(p);
        rank_seen = std::max(rank_seen, fin.finalized_rank_seen(p));
    }
    if (witness_seen && !fin.witness_in_chain(prev)) {
        if (which) *which = Violation::witness_rule;
        return false;
    }
    if (rank_seen > 0) {
        bool backed = false;
        for (BlockDag::Index c : fin.candidates(rank_seen)) {
            if (c != prev && !dag.in_ancestors(c, prev)) continue;
            if (fin.finalized_below(c, parents, dag)) {
                backed = true;
                break;
            }
        }
        if (!backed) {
            if (which) *which = Violation::second_witness_rule;
            return false;
        }
    }
    return true;
}

}  // namespace

std::optional<Violation> verify_block(const BlockDag& dag, const Block& b, const ChainContext& ctx,
                                      const FinalityTracker* fin) {
    if (ctx.vrf == nullptr) throw std::invalid_argument("verify_block: no VRF verifier");
    const auto parents = resolve_parents(dag, b);
    const BlockDag::Index prev = parents.front();

    if (fcr_of_parents(dag, parents) != prev) return Violation::fcr_mismatch;

    const BeaconState state = beacon_for(dag, prev, ctx);
    if (b.proof.participant != b.sender) return Violation::ineligible;
    if (!verify_eligibility(state, b.proof, *ctx.vrf)) return Violation::ineligible;
    if (b.beacon != xor_digest(state.input_at(b.proof.redraw_depth), b.proof.y)) return Violation::ineligible;

    if (fin != nullptr) {
        std::optional<Violation> which;
        if (!checkpoint_rules_hold(dag, *fin, parents, &which)) return which;
    }
    return std::nullopt;
}

Block assemble_block(const BlockDag& dag, BlockDag::Index prev, std::vector<BlockDag::Index> refs,
                     const EligibilityProof& proof, ParticipantId sender, const ChainContext& ctx,
                     std::vector<std::uint8_t> txset) {
    const BeaconState state = beacon_for(dag, prev, ctx);
    std::vector<BlockId> leaf_ids;
    leaf_ids.reserve(refs.size());
    for (auto r : refs) leaf_ids.push_back(dag.id_of(r));
    return Block::make(dag.id_of(prev), std::move(leaf_ids), proof, std::move(txset), sender,
                       xor_digest(state.input_at(proof.redraw_depth), proof.y));
}

std::vector<BlockDag::Index> reference_set(const BlockDag& view, const FinalityTracker* fin, BlockDag::Index target) {
    std::vector<BlockDag::Index> refs;
    std::vector<BlockDag::Index> parents{target};
    for (BlockDag::Index l : view.leaf_indices()) {
        if (l == target) continue;
        if (fin != nullptr) {
            parents.push_back(l);
            const bool ok = checkpoint_rules_hold(view, *fin, parents, nullptr);
            parents.pop_back();
            if (!ok) continue;
            parents.push_back(l);
        }
        refs.push_back(l);
    }
    return refs;
}

bool long_range_alarm(const BlockDag& view, const FinalityTracker& fin, BlockDag::Index target) {
    const auto sw = fin.latest_second_witness(view);
    return sw && sw->candidate != target && !view.in_ancestors(sw->candidate, target);
}

BetResult make_bet(const BlockDag& view, const FinalityTracker& fin, const Participant& me, const ChainContext& ctx,
                   std::uint32_t depth, std::vector<std::uint8_t> txset) {
    BetResult out;
    const BlockDag::Index tip = fcr_index(view);
    if (long_range_alarm(view, fin, tip)) {
        out.alarm = true;
        return out;
    }
    std::optional<EligibilityProof> proof;
    try {
        proof = check_eligibility(beacon_for(view, tip, ctx), me.id, me.keys, depth);
    } catch (const NotCommittedError&) {
        return out;
    }
    if (!proof) return out;
    Block b = assemble_block(view, tip, reference_set(view, &fin, tip), *proof, me.id, ctx, txset);
    if (verify_block(view, b, ctx, &fin)) {
        // Double-masked scores inside the pruned past can differ; a pure bet
        // on the tip is always consistent with the fork choice.
        b = assemble_block(view, tip, {}, *proof, me.id, ctx, std::move(txset));
        if (verify_block(view, b, ctx, &fin)) return out;
    }
    out.block = std::move(b);
    return out;
}

std::string to_string(Label l) {
    switch (l) {
        case Label::winner: return "winner";
        case Label::loser: return "loser";
        case Label::neutral: return "neutral";
    }
    return "unknown";
}

std::map<BlockId, Label> LabelMap::by_id(const BlockDag& dag) const {
    std::map<BlockId, Label> out;
    for (BlockDag::Index i = 0; i < labels.size(); ++i) out.emplace(dag.id_of(i), labels[i]);
    return out;
}

LabelMap label(const BlockDag& dag, std::size_t k) {
    LabelMap m;
    const std::size_t n = dag.size();
    m.labels.assign(n, Label::loser);
    m.blue = IndexSet(n);
    if (n == 0) return m;

    const BlockDag::Index tip = fcr_index(dag);
    IndexSet chain = dag.ancestor_set(tip);
    chain.set(tip);
    chain.for_each([&](std::size_t c) {
        m.labels[c] = Label::winner;
        m.blue.set(c);
    });
    chain.for_each([&](std::size_t c) {
        for (BlockDag::Index x : dag.children(static_cast<BlockDag::Index>(c))) {
            if (chain.test(x)) continue;
            m.labels[x] = Label::neutral;
            m.blue.set(x);
        }
    });

    std::vector<BlockDag::Index> rest;
    for (BlockDag::Index i = 0; i < n; ++i) {
        if (!m.blue.test(i)) rest.push_back(i);
    }
    std::sort(rest.begin(), rest.end(), [&](BlockDag::Index a, BlockDag::Index b) {
        if (dag.level(a) != dag.level(b)) return dag.level(a) < dag.level(b);
        return dag.id_of(a) < dag.id_of(b);
    });
    for (BlockDag::Index x : rest) {
        std::size_t overlap = 0;
        const IndexSet& px = dag.past_set(x);
        m.blue.for_each([&](std::size_t b) {
            if (px.test(b) || dag.in_past(x, static_cast<BlockDag::Index>(b))) return;
            ++overlap;
        });
        if (overlap <= k) {
            m.labels[x] = Label::neutral;
            m.blue.set(x);
        }
    }
    return m;
}

std::string label_csv(const BlockDag& dag, const LabelMap& m) {
    std::ostringstream os;
    os << "block-id,label\n";
    for (BlockDag::Index i = 0; i < m.labels.size(); ++i) os << to_hex(dag.id_of(i)) << ',' << to_string(m.labels[i]) << '\n';
    return os.str();
}

}  // namespace fantomette
