#include "fantomette/finality.hpp"

#include <algorithm>

namespace fantomette {

std::size_t finality_threshold(std::size_t n_players) { return (2 * n_players + 2) / 3; }

std::string to_string(FinalityEventKind kind) {
    switch (kind) {
        case FinalityEventKind::candidate: return "candidate";
        case FinalityEventKind::justified: return "justified";
        case FinalityEventKind::finalized: return "finalized";
        case FinalityEventKind::witness: return "witness";
        case FinalityEventKind::second_witness: return "second-witness";
    }
    return "unknown";
}

FinalityTracker::FinalityTracker(FinalityConfig cfg) : cfg_(cfg), threshold_(finality_threshold(cfg.n_players)) {
    if (cfg_.n_players == 0) throw std::invalid_argument("FinalityTracker: n_players must be positive");
}

const IndexSet* FinalityTracker::bets_of(const Target& t, Index x) const {
    if (x == BlockDag::npos || x < t.block) return nullptr;
    const std::size_t j = x - t.block;
    return j < t.bets.size() ? &t.bets[j] : nullptr;
}

void FinalityTracker::add_candidate(Index x, std::uint64_t rank) {
    CandidateInfo ci;
    ci.rank = rank;
    ci.target = targets_.size();
    candidates_.emplace(x, ci);
    Target t;
    t.block = x;
    t.candidate = x;
    t.rank = rank;
    t.bets.emplace_back();
    targets_.push_back(std::move(t));
    events_.push_back({rank, x, x, FinalityEventKind::candidate});
}

void FinalityTracker::on_insert(const BlockDag& dag, Index x) {
    if (x != blocks_.size()) throw std::logic_error("FinalityTracker: blocks must be fed in insertion order");
    BlockInfo info;
    info.targets_before = targets_.size();
    info.events_before = events_.size();
    const auto parents = dag.parents(x);
    const Index prev = dag.prev_of(x);
    for (Index p : parents) {
        info.witness_in_past = info.witness_in_past || blocks_[p].witness_in_past;
        info.finalized_rank_seen = std::max(info.finalized_rank_seen, blocks_[p].finalized_rank_seen);
    }
    if (prev != BlockDag::npos) info.witness_in_chain = blocks_[prev].witness_in_chain;

    const ParticipantId sender = dag.block(x).sender;
    for (std::size_t ti = 0; ti < info.targets_before; ++ti) {
        Target& t = targets_[ti];
        if (!dag.in_past(t.block, x)) continue;
        IndexSet b;
        for (Index p : parents) {
            if (const IndexSet* pb = bets_of(t, p)) b |= *pb;
        }
        if (dag.in_ancestors(t.block, x)) b.set(sender);
        t.bets.resize(x - t.block + 1);
        t.bets.back() = std::move(b);
    }

    auto reaches = [&](const Target& t, Index at) {
        const IndexSet* b = bets_of(t, at);
        return b != nullptr && b->count() >= threshold_;
    };

    std::vector<Target> new_targets;
    std::vector<std::uint64_t> sw_ranks;
    for (auto& [c, ci] : candidates_) {
        const Target& cand_target = targets_[ci.target];
        if (reaches(cand_target, x)) {
            info.witness = true;
            if (ci.justified_by == BlockDag::npos) {
                ci.justified_by = x;
                events_.push_back({ci.rank, x, c, FinalityEventKind::justified});
            }
            if (!reaches(cand_target, prev)) {
                Target wt;
                wt.block = x;
                wt.is_witness = true;
                wt.candidate = c;
                wt.rank = ci.rank;
                wt.bets.emplace_back();
                ci.witness_targets.push_back(static_cast<Index>(info.targets_before + new_targets.size()));
                new_targets.push_back(std::move(wt));
                events_.push_back({ci.rank, x, c, FinalityEventKind::witness});
            }
        }
        bool sw_x = false;
        bool sw_prev = false;
        for (Index wi : ci.witness_targets) {
            if (wi >= info.targets_before) continue;
            sw_x = sw_x || reaches(targets_[wi], x);
            sw_prev = sw_prev || reaches(targets_[wi], prev);
        }
        if (!sw_x) continue;
        info.second_witness = true;
        info.finalized_rank_seen = std::max(info.finalized_rank_seen, ci.rank);
        if (!sw_prev) {
            ci.second_witnesses.push_back(x);
            second_witness_log_.push_back({x, c, ci.rank});
            events_.push_back({ci.rank, x, c, FinalityEventKind::second_witness});
            sw_ranks.push_back(ci.rank);
        }
        if (ci.finalized_by == BlockDag::npos) {
            ci.finalized_by = x;
            events_.push_back({ci.rank, x, c, FinalityEventKind::finalized});
        }
    }
    for (auto& t : new_targets) targets_.push_back(std::move(t));
    info.witness_in_past = info.witness_in_past || info.witness;
    info.witness_in_chain = info.witness_in_chain || info.witness;

    // Candidate status of x itself. A block that already sees a finalized
    // candidate of rank r is never a rank-r candidate.
    std::uint64_t cand_rank = 0;
    if (prev != BlockDag::npos && prev == dag.genesis()) cand_rank = 1;
    if (cfg_.w == 0) {
        for (auto r : sw_ranks) cand_rank = std::max(cand_rank, r + 1);
    } else {
        for (const auto& s : second_witness_log_) {
            if (s.block >= x || s.rank + 1 <= cand_rank) continue;
            if (!dag.in_ancestors(s.block, x)) continue;
            if (dag.height(x) - dag.height(s.block) < cfg_.w) continue;
            const auto d = dag.distance_between(s.block, x);
            if (d && *d == cfg_.w) cand_rank = s.rank + 1;
        }
    }
    blocks_.push_back(info);
    if (cand_rank > 0 && blocks_.back().finalized_rank_seen < cand_rank) add_candidate(x, cand_rank);
}

void FinalityTracker::truncate(std::size_t n) {
    if (n >= blocks_.size()) return;
    targets_.resize(blocks_[n].targets_before);
    events_.resize(blocks_[n].events_before);
    blocks_.resize(n);
    for (auto& t : targets_) {
        if (t.bets.size() > n - t.block) t.bets.resize(n - t.block);
    }
    for (auto it = candidates_.begin(); it != candidates_.end();) {
        if (it->first >= n) {
            it = candidates_.erase(it);
            continue;
        }
        auto& ci = it->second;
        if (ci.justified_by != BlockDag::npos && ci.justified_by >= n) ci.justified_by = BlockDag::npos;
        if (ci.finalized_by != BlockDag::npos && ci.finalized_by >= n) ci.finalized_by = BlockDag::npos;
        std::erase_if(ci.witness_targets, [&](Index wi) { return wi >= targets_.size(); });
        std::erase_if(ci.second_witnesses, [&](Index s) { return s >= n; });
        ++it;
    }
    std::erase_if(second_witness_log_, [&](const SecondWitnessRef& s) { return s.block >= n; });
}

std::optional<std::uint64_t> FinalityTracker::candidate_rank(Index x) const {
    auto it = candidates_.find(x);
    if (it == candidates_.end()) return std::nullopt;
    return it->second.rank;
}

std::vector<FinalityTracker::Index> FinalityTracker::candidates(std::uint64_t rank) const {
    std::vector<Index> out;
    for (const auto& [c, ci] : candidates_) {
        if (ci.rank == rank) out.push_back(c);
    }
    return out;
}

bool FinalityTracker::is_justified(Index c) const {
    auto it = candidates_.find(c);
    return it != candidates_.end() && it->second.justified_by != BlockDag::npos;
}

bool FinalityTracker::is_finalized(Index c) const {
    auto it = candidates_.find(c);
    return it != candidates_.end() && it->second.finalized_by != BlockDag::npos;
}

std::vector<FinalityTracker::Index> FinalityTracker::justified() const {
    std::vector<Index> out;
    for (const auto& [c, ci] : candidates_) {
        if (ci.justified_by != BlockDag::npos) out.push_back(c);
    }
    return out;
}

std::vector<FinalityTracker::Index> FinalityTracker::finalized() const {
    std::vector<Index> out;
    for (const auto& [c, ci] : candidates_) {
        if (ci.finalized_by != BlockDag::npos) out.push_back(c);
    }
    return out;
}

std::uint64_t FinalityTracker::rank() const {
    std::uint64_t r = 0;
    for (const auto& [c, ci] : candidates_) r = std::max(r, ci.rank);
    return r;
}

const std::vector<FinalityTracker::Index>& FinalityTracker::minimal_second_witnesses(Index c) const {
    static const std::vector<Index> none;
    auto it = candidates_.find(c);
    return it == candidates_.end() ? none : it->second.second_witnesses;
}

bool FinalityTracker::finalized_below(Index c, std::span<const Index> parents, const BlockDag& dag) const {
    for (Index s : minimal_second_witnesses(c)) {
        for (Index p : parents) {
            if (p == s || dag.in_past(s, p)) return true;
        }
    }
    return false;
}

std::optional<SecondWitnessRef> FinalityTracker::latest_second_witness(const BlockDag& dag) const {
    std::optional<SecondWitnessRef> best;
    for (const auto& s : second_witness_log_) {
        if (!best || s.rank > best->rank || (s.rank == best->rank && dag.id_of(s.block) < dag.id_of(best->block))) {
            best = s;
        }
    }
    return best;
}

std::size_t FinalityTracker::violations(const BlockDag& dag) const {
    std::map<std::uint64_t, std::vector<Index>> by_rank;
    for (const auto& [c, ci] : candidates_) {
        if (ci.finalized_by != BlockDag::npos) by_rank[ci.rank].push_back(c);
    }
    std::size_t bad = 0;
    for (const auto& [rank, cs] : by_rank) {
        for (std::size_t i = 0; i < cs.size(); ++i) {
            for (std::size_t j = i + 1; j < cs.size(); ++j) {
                if (!dag.in_ancestors(cs[i], cs[j]) && !dag.in_ancestors(cs[j], cs[i])) ++bad;
            }
        }
    }
    return bad;
}

void Reconfiguration::begin(const FinalityTracker& tracker, std::uint64_t w) {
    if (tracker.finalized().empty()) throw NotFinalizedError("reconfiguration needs a finalized block");
    open_ = true;
    remaining_ = w;
    if (remaining_ == 0) close();
}

bool Reconfiguration::request_join(ParticipantId who) {
    if (!open_) return false;
    leaves_.erase(who);
    joins_.insert(who);
    return true;
}

bool Reconfiguration::request_leave(ParticipantId who) {
    if (!open_) return false;
    joins_.erase(who);
    leaves_.insert(who);
    return true;
}

void Reconfiguration::on_block() {
    if (!open_) return;
    if (remaining_ > 0) --remaining_;
    if (remaining_ == 0) close();
}

void Reconfiguration::close() {
    for (auto p : leaves_) players_.erase(p);
    for (auto p : joins_) players_.insert(p);
    joins_.clear();
    leaves_.clear();
    open_ = false;
}

}  // namespace fantomette
