#include "fantomette/agents.hpp"

#include <algorithm>
#include <deque>

namespace fantomette {

std::string to_string(AgentClass c) {
    switch (c) {
        case AgentClass::altruistic: return "altruistic";
        case AgentClass::rational: return "rational";
        case AgentClass::byzantine: return "byzantine";
    }
    return "unknown";
}

std::optional<std::uint32_t> TipClock::due(const BlockId& tip, std::uint64_t slot, std::uint64_t delay) {
    if (!tip_ || *tip_ != tip) {
        tip_ = tip;
        since_ = slot;
        last_depth_ = -1;
    }
    const auto d = static_cast<std::int64_t>((slot - since_) / std::max<std::uint64_t>(delay, 1));
    if (d <= last_depth_) return std::nullopt;
    last_depth_ = d;
    return static_cast<std::uint32_t>(d);
}

Agent::Agent(AgentClass cls, std::vector<Participant> members, const AgentParams& params)
    : class_(cls), members_(std::move(members)), params_(params), view_(params.score_mode), fin_(params.finality) {
    if (members_.empty()) throw std::invalid_argument("Agent: no members");
    if (!params_.genesis || !params_.genesis->is_genesis()) throw std::invalid_argument("Agent: no genesis block");
    insert_block(params_.genesis);
}

bool Agent::is_member(ParticipantId p) const {
    return std::any_of(members_.begin(), members_.end(), [&](const Participant& m) { return m.id == p; });
}

void Agent::deliver(BlockPtr b) { inbox_.push_back(std::move(b)); }

void Agent::insert_block(const BlockPtr& b) {
    view_.insert(b);
    fin_.on_insert(view_, static_cast<BlockDag::Index>(view_.size() - 1));
}

bool Agent::try_insert(const BlockPtr& b) {
    if (view_.contains(b->id)) return true;
    const BlockId* missing = nullptr;
    if (b->prev && !view_.contains(*b->prev)) missing = &*b->prev;
    for (const auto& l : b->leaves) {
        if (missing) break;
        if (!view_.contains(l)) missing = &l;
    }
    if (missing) {
        orphans_[*missing].push_back(b);
        return false;
    }
    insert_block(b);
    return true;
}

void Agent::ingest() {
    std::vector<BlockPtr> inbox;
    inbox.swap(inbox_);
    std::deque<BlockPtr> work;
    for (auto& b : inbox) {
        if (view_.contains(b->id) || !orphan_ids_.insert(b->id).second) continue;
        work.push_back(std::move(b));
        while (!work.empty()) {
            BlockPtr cur = std::move(work.front());
            work.pop_front();
            if (!try_insert(cur)) continue;
            orphan_ids_.erase(cur->id);
            auto it = orphans_.find(cur->id);
            if (it == orphans_.end()) continue;
            for (auto& waiting : it->second) work.push_back(std::move(waiting));
            orphans_.erase(it);
        }
    }
}

std::vector<BlockPtr> Agent::protocol_step(std::uint64_t slot) {
    std::vector<BlockPtr> out;
    const BlockDag::Index tip = fcr_index(view_);
    const auto depth = clock_.due(view_.id_of(tip), slot, params_.delay_pod);
    if (!depth) return out;
    for (const auto& me : members_) {
        BetResult r = make_bet(view_, fin_, me, params_.chain, *depth);
        if (r.alarm) ++alarms_;
        if (!r.block) continue;
        auto ptr = std::make_shared<const Block>(std::move(*r.block));
        insert_block(ptr);
        out.push_back(ptr);
        break;
    }
    return out;
}

AltruisticAgent::AltruisticAgent(Participant me, const AgentParams& params)
    : Agent(AgentClass::altruistic, {std::move(me)}, params) {}

std::vector<BlockPtr> AltruisticAgent::step(std::uint64_t slot) {
    ingest();
    return protocol_step(slot);
}

namespace {

std::optional<Block> valid_bet(const BlockDag& view, const FinalityTracker& fin, BlockDag::Index prev,
                               std::vector<BlockDag::Index> refs, const EligibilityProof& proof, ParticipantId sender,
                               const ChainContext& ctx) {
    Block b = assemble_block(view, prev, std::move(refs), proof, sender, ctx);
    if (!verify_block(view, b, ctx, &fin)) return b;
    if (b.leaves.empty()) return std::nullopt;
    b = assemble_block(view, prev, {}, proof, sender, ctx);
    if (!verify_block(view, b, ctx, &fin)) return b;
    return std::nullopt;
}

std::optional<EligibilityProof> eligible(const BeaconState& state, const Participant& m, std::uint32_t depth) {
    try {
        return check_eligibility(state, m.id, m.keys, depth);
    } catch (const NotCommittedError&) {
        return std::nullopt;
    }
}

}  // namespace

ByzantineCoalition::ByzantineCoalition(std::vector<Participant> members, const AgentParams& params)
    : Agent(AgentClass::byzantine, std::move(members), params) {}

std::vector<BlockPtr> ByzantineCoalition::step(std::uint64_t slot) {
    ingest();
    std::vector<BlockPtr> out;
    std::deque<std::pair<BlockDag::Index, std::uint32_t>> queue;
    for (BlockDag::Index l : view_.leaf_indices()) {
        if (tried_.insert(view_.id_of(l)).second) queue.emplace_back(l, 0);
    }
    const BlockDag::Index tip = fcr_index(view_);
    if (auto d = clock_.due(view_.id_of(tip), slot, params_.delay_pod); d && *d > 0) queue.emplace_back(tip, *d);

    while (!queue.empty()) {
        const auto [target, depth] = queue.front();
        queue.pop_front();
        const BeaconState state = beacon_for(view_, target, params_.chain);
        for (const auto& m : members_) {
            const auto proof = eligible(state, m, depth);
            if (!proof) continue;
            const Score ts = score_at(view_, target);
            std::vector<BlockDag::Index> refs;
            for (BlockDag::Index l : view_.leaf_indices()) {
                if (l == target || !is_member(view_.block(l).sender) || l == view_.genesis()) continue;
                if (preferred(score_at(view_, l), ts)) continue;
                refs.push_back(l);
            }
            auto b = valid_bet(view_, fin_, target, std::move(refs), *proof, m.id, params_.chain);
            if (!b) continue;
            auto ptr = std::make_shared<const Block>(std::move(*b));
            insert_block(ptr);
            out.push_back(ptr);
            tried_.insert(ptr->id);
            queue.emplace_back(static_cast<BlockDag::Index>(view_.size() - 1), 0);
        }
    }
    return out;
}

RationalCoalition::RationalCoalition(std::vector<Participant> members, const AgentParams& params)
    : Agent(AgentClass::rational, std::move(members), params) {}

void RationalCoalition::rebuild(const std::vector<BlockPtr>& keep) {
    view_.truncate(public_size_);
    fin_.truncate(public_size_);
    withheld_.clear();
    const std::uint64_t floor_height = view_.height(fcr_index(view_));
    for (const auto& b : keep) {
        // Blocks too far below the public tip to ever catch up are dropped,
        // together with everything built on them.
        if (!view_.contains(*b->prev) ||
            std::any_of(b->leaves.begin(), b->leaves.end(), [&](const BlockId& l) { return !view_.contains(l); })) {
            continue;
        }
        const std::uint64_t h = view_.height(view_.index_of(*b->prev)) + 1;
        if (h + params_.rational_depth < floor_height) continue;
        insert_block(b);
        withheld_.push_back(b);
    }
}

std::size_t RationalCoalition::private_depth(BlockDag::Index leaf) const {
    std::size_t d = 0;
    for (BlockDag::Index x = leaf; x != BlockDag::npos && x >= public_size_; x = view_.prev_of(x)) ++d;
    return d;
}

void RationalCoalition::explore(std::uint64_t slot) {
    std::deque<std::pair<BlockDag::Index, std::uint32_t>> queue;
    // Public side branches are not ground on: a private chain forking off
    // below the public tip mostly ends up losing the race and punished.
    for (BlockDag::Index l : view_.leaf_indices()) {
        if (l < public_size_ && l != public_tip_) continue;
        if (tried_.insert(view_.id_of(l)).second) queue.emplace_back(l, 0);
    }
    const BlockDag::Index tip = fcr_index(view_);
    if (auto d = clock_.due(view_.id_of(tip), slot, params_.delay_pod); d && *d > 0) queue.emplace_back(tip, *d);

    while (!queue.empty()) {
        const auto [target, depth] = queue.front();
        queue.pop_front();
        if (private_depth(target) >= params_.rational_depth) continue;
        if (long_range_alarm(view_, fin_, target)) {
            ++alarms_;
            continue;
        }
        const BeaconState state = beacon_for(view_, target, params_.chain);
        for (const auto& m : members_) {
            const auto proof = eligible(state, m, depth);
            if (!proof) continue;
            // Drop only the leaves that would beat the target.
            const Score ts = score_at(view_, target);
            std::vector<BlockDag::Index> refs;
            IndexSet past = view_.past_set(target);
            past.set(target);
            for (BlockDag::Index l : view_.leaf_indices()) {
                if (l == target || preferred(score_at(view_, l), ts)) continue;
                refs.push_back(l);
                past |= view_.past_set(l);
                past.set(l);
            }
            // Every earlier block of this member must be in the new block's
            // past, or the pair is punished as mutually unaware.
            bool own_ok = true;
            for (BlockDag::Index i = 1; i < view_.size() && own_ok; ++i) {
                if (view_.block(i).sender == m.id && !past.test(i)) own_ok = false;
            }
            if (!own_ok) continue;
            auto b = valid_bet(view_, fin_, target, std::move(refs), *proof, m.id, params_.chain);
            if (!b) continue;
            auto ptr = std::make_shared<const Block>(std::move(*b));
            insert_block(ptr);
            withheld_.push_back(ptr);
            tried_.insert(ptr->id);
            queue.emplace_back(static_cast<BlockDag::Index>(view_.size() - 1), 0);
        }
    }
}

double coalition_utility(const BlockDag& dag, const std::vector<Participant>& members, const IncentiveParams& params) {
    if (dag.empty()) return 0.0;
    const LabelMap m = label(dag, params.k);
    std::unordered_map<ParticipantId, std::vector<BlockDag::Index>> own;
    for (const auto& p : members) own[p.id];
    double u = 0.0;
    for (BlockDag::Index i = 1; i < dag.size(); ++i) {
        auto it = own.find(dag.block(i).sender);
        if (it == own.end()) continue;
        it->second.push_back(i);
        if (m.labels[i] == Label::winner) u += block_reward(dag.block(i), params);
        if (m.labels[i] == Label::loser) u -= params.pun;
    }
    for (const auto& [p, blocks] : own) {
        for (std::size_t a = 0; a < blocks.size(); ++a) {
            for (std::size_t b = a + 1; b < blocks.size(); ++b) {
                if (!dag.in_past(blocks[a], blocks[b]) && !dag.in_past(blocks[b], blocks[a])) u -= params.bigpun;
            }
        }
    }
    return u;
}

double RationalCoalition::rollout(const std::vector<BlockPtr>& reveal, std::uint64_t delay, std::uint64_t slot,
                                  std::uint64_t r) {
    const Digest seed_digest = Hasher{}.tag("rollout").put_u64(params_.seed).put_u64(slot).put_u64(r).finish();
    std::uint64_t s = 0;
    for (int i = 0; i < 8; ++i) s = (s << 8) | seed_digest[static_cast<std::size_t>(i)];
    std::mt19937_64 rng(s);

    view_.truncate(public_size_);
    std::vector<std::uint64_t> visible_at(public_size_, 0);
    auto honest_tip_now = [&](std::uint64_t now) {
        // fcr over the blocks honest players can see at `now`.
        std::vector<char> has_child(view_.size(), 0);
        for (BlockDag::Index i = 0; i < view_.size(); ++i) {
            if (visible_at[i] > now) continue;
            for (BlockDag::Index p : view_.parents(i)) has_child[p] = 1;
        }
        BlockDag::Index best = BlockDag::npos;
        Score bs;
        std::vector<BlockDag::Index> leaves;
        for (BlockDag::Index i = 0; i < view_.size(); ++i) {
            if (visible_at[i] > now || has_child[i]) continue;
            leaves.push_back(i);
            const Score sc = score_at(view_, i);
            if (best == BlockDag::npos || preferred(sc, bs)) {
                best = i;
                bs = sc;
            }
        }
        return std::make_pair(best, leaves);
    };
    auto add_block = [&](BlockDag::Index prev, std::vector<BlockDag::Index> refs, ParticipantId sender,
                         std::uint64_t visible) {
        EligibilityProof proof;
        proof.participant = sender;
        for (std::size_t i = 0; i < proof.y.size(); i += 8) {
            const std::uint64_t w = rng();
            for (std::size_t j = 0; j < 8; ++j) proof.y[i + j] = static_cast<std::uint8_t>(w >> (8 * j));
        }
        proof.rnd = static_cast<std::int64_t>(view_.height(prev) + 1);
        std::vector<BlockId> ids;
        for (auto x : refs) {
            if (x != prev) ids.push_back(view_.id_of(x));
        }
        view_.insert(Block::make(view_.id_of(prev), std::move(ids), proof, {}, sender, proof.y));
        visible_at.push_back(visible);
    };

    for (const auto& b : reveal) {
        view_.insert(b);
        visible_at.push_back(slot + 1 + delay);
    }

    const std::uint64_t n = params_.n_players;
    const std::uint64_t nc = members_.size();
    const std::uint64_t nh = n > nc ? n - nc : 0;
    const double p = 1.0 / static_cast<double>(n);
    const std::uint64_t delta = std::max<std::uint64_t>(params_.delay_pod, 1);
    // Both sides already drew on their current tips at `slot`.
    BlockDag::Index last_h = honest_tip_now(slot).first;
    std::uint64_t h_since = slot;
    BlockDag::Index last_c = fcr_index(view_);
    std::uint64_t c_since = slot;
    std::binomial_distribution<std::uint64_t> honest_draw(nh, p);
    std::binomial_distribution<std::uint64_t> coalition_draw(nc, p);

    for (std::uint64_t t = 1; t <= params_.rational_horizon; ++t) {
        const std::uint64_t now = slot + t;
        auto [htip, hleaves] = honest_tip_now(now);
        bool h_draw = false;
        if (htip != last_h) {
            last_h = htip;
            h_since = now;
            h_draw = true;
        } else if ((now - h_since) % delta == 0) {
            h_draw = true;
        }
        const BlockDag::Index ctip = fcr_index(view_);
        bool c_draw = false;
        if (ctip != last_c) {
            last_c = ctip;
            c_draw = true;
            c_since = now;
        } else if ((now - c_since) % delta == 0) {
            c_draw = true;
        }
        const std::uint64_t hk = h_draw ? honest_draw(rng) : 0;
        const std::uint64_t ck = c_draw ? coalition_draw(rng) : 0;
        std::vector<BlockDag::Index> cleaves(view_.leaf_indices().begin(), view_.leaf_indices().end());
        for (std::uint64_t j = 0; j < hk; ++j) add_block(htip, hleaves, static_cast<ParticipantId>(n + 1 + j), now + 1);
        for (std::uint64_t j = 0; j < ck; ++j) {
            const auto& m = members_[rng() % nc];
            add_block(ctip, cleaves, m.id, now + 1);
        }
    }
    const double u = coalition_utility(view_, members_, params_.incentives);
    view_.truncate(public_size_);
    return u;
}

std::vector<BlockPtr> RationalCoalition::step(std::uint64_t slot) {
    if (members_.size() == 1) {
        ingest();
        return protocol_step(slot);
    }
    const std::vector<BlockPtr> keep = withheld_;
    view_.truncate(public_size_);
    fin_.truncate(public_size_);
    ingest();
    public_size_ = view_.size();
    public_tip_ = fcr_index(view_);
    const Score public_best = score_at(view_, public_tip_);
    rebuild(keep);
    explore(slot);
    if (withheld_.empty()) return {};

    // Best private chain: score, then coalition blocks, then hash. A chain
    // that would not become the fork choice once public stays private.
    BlockDag::Index best = BlockDag::npos;
    std::tuple<std::uint64_t, std::size_t> best_key{};
    for (BlockDag::Index i = static_cast<BlockDag::Index>(public_size_); i < view_.size(); ++i) {
        if (!view_.children(i).empty() || !preferred(score_at(view_, i), public_best)) continue;
        const std::tuple<std::uint64_t, std::size_t> key{view_.score_value(i), private_depth(i)};
        if (best == BlockDag::npos || key > best_key ||
            (key == best_key && view_.block(i).tiebreak() < view_.block(best).tiebreak())) {
            best = i;
            best_key = key;
        }
    }
    if (best == BlockDag::npos) return {};
    std::vector<BlockPtr> reveal;
    for (BlockDag::Index i = static_cast<BlockDag::Index>(public_size_); i < view_.size(); ++i) {
        if (i == best || view_.in_past(i, best)) reveal.push_back(view_.block_ptr(i));
    }

    ++decisions_;
    const std::vector<BlockPtr> all = withheld_;
    double now_u = 0.0;
    double later_u = 0.0;
    for (std::uint64_t r = 0; r < params_.rational_rollouts; ++r) {
        now_u += rollout(reveal, 0, slot, r);
        later_u += rollout(reveal, 1, slot, r);
    }
    if (now_u < later_u) {
        ++withhold_choices_;
        rebuild(all);
        return {};
    }
    // Reveal the chain; the rest of the private tree is dropped.
    view_.truncate(public_size_);
    fin_.truncate(public_size_);
    withheld_.clear();
    for (const auto& b : reveal) insert_block(b);
    public_size_ = view_.size();
    return reveal;
}

std::unique_ptr<Agent> make_agent(AgentClass cls, std::vector<Participant> members, const AgentParams& params) {
    switch (cls) {
        case AgentClass::altruistic:
            if (members.size() != 1) throw std::invalid_argument("altruistic agents have one member");
            return std::make_unique<AltruisticAgent>(std::move(members.front()), params);
        case AgentClass::byzantine: return std::make_unique<ByzantineCoalition>(std::move(members), params);
        case AgentClass::rational: return std::make_unique<RationalCoalition>(std::move(members), params);
    }
    throw std::invalid_argument("unknown agent class");
}

}  // namespace fantomette
