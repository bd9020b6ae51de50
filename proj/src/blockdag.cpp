#include "fantomette/blockdag.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace fantomette {

Block Block::genesis(const Digest& beacon) {
    Block g;
    g.beacon = beacon;
    g.id = g.compute_id();
    return g;
}

Block Block::make(const BlockId& prev, std::vector<BlockId> leaves, const EligibilityProof& proof,
                  std::vector<std::uint8_t> txset, ParticipantId sender, const Digest& beacon) {
    Block b;
    b.prev = prev;
    std::vector<BlockId> norm;
    norm.reserve(leaves.size());
    for (auto& l : leaves) {
        if (l == prev) continue;
        if (std::find(norm.begin(), norm.end(), l) != norm.end()) continue;
        norm.push_back(l);
    }
    b.leaves = std::move(norm);
    b.proof = proof;
    b.txset = std::move(txset);
    b.sender = sender;
    b.beacon = beacon;
    b.id = b.compute_id();
    return b;
}

Digest Block::tiebreak() const { return is_genesis() ? sha256(beacon) : sha256(proof.y); }

Digest Block::compute_id() const {
    Hasher h;
    h.tag("fantomette/block");
    h.put_u64(prev ? 1 : 0);
    if (prev) h.put(*prev);
    h.put_u64(leaves.size());
    for (const auto& l : leaves) h.put(l);
    h.put(proof.fingerprint());
    h.put(std::span<const std::uint8_t>(txset));
    h.put_u64(sender);
    h.put(beacon);
    return h.finish();
}

std::optional<BlockDag::Index> BlockDag::find(const BlockId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

BlockDag::Index BlockDag::index_of(const BlockId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw DagError(DagError::Kind::unknown_block, "unknown block " + short_hex(id));
    return it->second;
}

BlockDag::Index BlockDag::genesis() const {
    if (blocks_.empty()) throw DagError(DagError::Kind::unknown_block, "empty DAG has no genesis");
    return 0;
}

void BlockDag::insert(BlockPtr b) {
    if (!b) throw std::invalid_argument("insert: null block");
    if (contains(b->id)) throw DagError(DagError::Kind::duplicate_id, "duplicate block " + short_hex(b->id));
    if (blocks_.empty() != b->is_genesis()) {
        throw DagError(b->is_genesis() ? DagError::Kind::duplicate_id : DagError::Kind::dangling_reference,
                       b->is_genesis() ? "second genesis block" : "first block must be genesis");
    }

    std::vector<Index> parents;
    if (b->prev) {
        parents.reserve(1 + b->leaves.size());
        auto add = [&](const BlockId& ref) {
            auto it = index_.find(ref);
            if (it == index_.end()) {
                throw DagError(DagError::Kind::dangling_reference, "reference to absent block " + short_hex(ref));
            }
            parents.push_back(it->second);
        };
        add(*b->prev);
        for (const auto& l : b->leaves) add(l);
    }

    const auto idx = static_cast<Index>(blocks_.size());
    IndexSet past(idx);
    IndexSet anc(idx);
    for (Index p : parents) {
        past |= past_[p];
        past.set(p);
    }
    std::uint64_t h = 0;
    std::uint64_t lvl = 0;
    for (Index p : parents) lvl = std::max(lvl, level_[p] + 1);
    if (!parents.empty()) {
        const Index prev = parents.front();
        anc = anc_[prev];
        anc.set(prev);
        h = height_[prev] + 1;
    }

    blocks_.push_back(b);
    index_.emplace(b->id, idx);
    for (Index p : parents) {
        if (children_[p].empty()) leaves_.erase(p);
        children_[p].push_back(idx);
    }
    parents_.push_back(std::move(parents));
    children_.emplace_back();
    past_.push_back(std::move(past));
    anc_.push_back(std::move(anc));
    height_.push_back(h);
    level_.push_back(lvl);
    leaves_.insert(idx);

    const Digest fp = b->is_genesis() ? b->id : b->proof.fingerprint();
    proof_fp_.push_back(fp);
    auto& group = proof_groups_[fp];
    group.push_back(idx);
    if (group.size() >= 2) {
        // A reused proof: every block in the group is Double.
        recompute_double_and_scores();
    } else {
        score_.push_back(compute_score(idx));
    }
}

void BlockDag::recompute_double_and_scores() {
    double_ = IndexSet(blocks_.size());
    for (const auto& [fp, members] : proof_groups_) {
        if (members.size() >= 2) {
            for (Index m : members) double_.set(m);
        }
    }
    score_.assign(blocks_.size(), 0);
    for (Index i = 0; i < blocks_.size(); ++i) score_[i] = compute_score(i);
}

std::uint64_t BlockDag::compute_score(Index i) const { return score_within(i, double_); }

std::uint64_t BlockDag::score_within(Index i, const IndexSet& dbl) const {
    std::uint64_t total = 0;
    auto edges_of = [&](std::size_t x) {
        if (dbl.test(x)) return;
        const auto& ps = parents_[x];
        if (mode_ == ScoreMode::literal) {
            total += ps.size();
            return;
        }
        for (Index p : ps) {
            if (!dbl.test(p)) ++total;
        }
    };
    past_[i].for_each(edges_of);
    edges_of(i);
    return total;
}

IndexSet BlockDag::double_within(const IndexSet& keep) const {
    IndexSet out(blocks_.size());
    IndexSet cand = double_;
    cand &= keep;
    cand.for_each([&](std::size_t i) {
        if (out.test(i)) return;
        const auto& members = proof_groups_.at(proof_fp_[i]);
        std::size_t inside = 0;
        for (Index m : members) inside += keep.test(m) ? 1 : 0;
        if (inside < 2) return;
        for (Index m : members) {
            if (keep.test(m)) out.set(m);
        }
    });
    return out;
}

IndexSet BlockDag::future_set(Index i) const {
    IndexSet fut(blocks_.size());
    for (Index j = i + 1; j < blocks_.size(); ++j) {
        if (past_[j].test(i)) fut.set(j);
    }
    return fut;
}

IndexSet BlockDag::anticone_set(Index i) const {
    IndexSet out(blocks_.size());
    for (Index j = 0; j < blocks_.size(); ++j) {
        if (j == i) continue;
        if (past_[i].test(j) || past_[j].test(i)) continue;
        out.set(j);
    }
    return out;
}

std::optional<std::uint64_t> BlockDag::distance_between(Index a, Index b) const {
    if (a == b) return 0;
    Index from = b;
    Index to = a;
    if (past_[a].test(b)) {
        from = a;
        to = b;
    } else if (!past_[b].test(a)) {
        return std::nullopt;
    }
    // BFS along outgoing edges (towards the past) restricted to past(from).
    std::vector<std::uint64_t> dist(blocks_.size(), ~std::uint64_t{0});
    std::deque<Index> q;
    dist[from] = 0;
    q.push_back(from);
    while (!q.empty()) {
        const Index x = q.front();
        q.pop_front();
        if (x == to) return dist[x];
        for (Index p : parents_[x]) {
            if (dist[p] != ~std::uint64_t{0}) continue;
            if (p != to && !past_[p].test(to)) continue;
            dist[p] = dist[x] + 1;
            q.push_back(p);
        }
    }
    return std::nullopt;
}

BlockSet BlockDag::to_ids(const IndexSet& s) const {
    BlockSet out;
    s.for_each([&](std::size_t i) { out.insert(blocks_[i]->id); });
    return out;
}

BlockSet BlockDag::ancestors(const BlockId& b) const { return to_ids(anc_[index_of(b)]); }
BlockSet BlockDag::past(const BlockId& b) const { return to_ids(past_[index_of(b)]); }
BlockSet BlockDag::anticone(const BlockId& b) const { return to_ids(anticone_set(index_of(b))); }

BlockSet BlockDag::direct_future(const BlockId& b) const {
    BlockSet out;
    for (Index c : children_[index_of(b)]) out.insert(blocks_[c]->id);
    return out;
}

BlockSet BlockDag::leaves() const {
    BlockSet out;
    for (Index i : leaves_) out.insert(blocks_[i]->id);
    return out;
}

std::uint64_t BlockDag::distance(const BlockId& a, const BlockId& b) const {
    auto d = distance_between(index_of(a), index_of(b));
    if (!d) throw DagError(DagError::Kind::incomparable_blocks, "blocks are not comparable");
    return *d;
}

BlockSet BlockDag::detect_double() const { return to_ids(double_); }

BlockDag BlockDag::subdag(const IndexSet& keep) const {
    BlockDag out(mode_);
    keep.for_each([&](std::size_t i) {
        if (i < blocks_.size()) out.insert(blocks_[i]);
    });
    return out;
}

void BlockDag::truncate(std::size_t n) {
    if (n >= blocks_.size()) return;
    bool double_changed = false;
    while (blocks_.size() > n) {
        const auto idx = static_cast<Index>(blocks_.size() - 1);
        for (Index p : parents_[idx]) {
            auto& ch = children_[p];
            // idx is the newest block, so it is the last child of every parent.
            ch.pop_back();
            if (ch.empty()) leaves_.insert(p);
        }
        leaves_.erase(idx);
        auto git = proof_groups_.find(proof_fp_[idx]);
        git->second.pop_back();
        if (git->second.size() == 1) double_changed = true;
        if (git->second.empty()) proof_groups_.erase(git);
        index_.erase(blocks_[idx]->id);
        blocks_.pop_back();
        parents_.pop_back();
        children_.pop_back();
        past_.pop_back();
        anc_.pop_back();
        height_.pop_back();
        level_.pop_back();
        score_.pop_back();
        proof_fp_.pop_back();
    }
    double_.truncate(n);
    if (double_changed) recompute_double_and_scores();
}

std::string BlockDag::snapshot() const {
    std::ostringstream os;
    for (Index i = 0; i < blocks_.size(); ++i) {
        const Block& b = *blocks_[i];
        os << to_hex(b.id) << ' ' << (b.prev ? to_hex(*b.prev) : std::string("-")) << " [";
        for (std::size_t k = 0; k < b.leaves.size(); ++k) {
            if (k) os << ',';
            os << to_hex(b.leaves[k]);
        }
        os << "] " << b.sender << ' ' << to_hex(b.is_genesis() ? Digest{} : b.proof.fingerprint()) << '\n';
    }
    return os.str();
}

std::string BlockDag::to_dot() const {
    std::ostringstream os;
    os << "digraph blockdag {\n  rankdir=RL;\n";
    for (Index i = 0; i < blocks_.size(); ++i) {
        const Block& b = *blocks_[i];
        os << "  \"" << short_hex(b.id) << "\" [label=\"" << short_hex(b.id, 6) << "\\n"
           << (b.is_genesis() ? std::string("genesis") : "p" + std::to_string(b.sender)) << "\"";
        if (double_.test(i)) os << ", color=red";
        os << "];\n";
    }
    for (Index i = 0; i < blocks_.size(); ++i) {
        for (std::size_t k = 0; k < parents_[i].size(); ++k) {
            os << "  \"" << short_hex(blocks_[i]->id) << "\" -> \"" << short_hex(blocks_[parents_[i][k]]->id) << "\"";
            if (k > 0) os << " [style=dashed]";
            os << ";\n";
        }
    }
    os << "}\n";
    return os.str();
}

BlockDag bcpc(std::span<const BlockDag* const> views, ScoreMode mode) {
    BlockDag out(mode);
    if (views.empty()) return out;
    struct Entry {
        BlockPtr block;
        std::size_t count = 0;
        std::uint64_t level = 0;
    };
    std::unordered_map<BlockId, Entry, DigestHash> seen;
    for (const BlockDag* v : views) {
        for (BlockDag::Index i = 0; i < v->size(); ++i) {
            auto& e = seen[v->id_of(i)];
            if (!e.block) e.block = v->block_ptr(i);
            ++e.count;
        }
    }
    const std::size_t need = views.size() / 2 + 1;
    std::vector<Entry*> majority;
    for (auto& [id, e] : seen) {
        if (e.count >= need) majority.push_back(&e);
    }
    // Longest-path level gives a topological order across views.
    for (const BlockDag* v : views) {
        for (BlockDag::Index i = 0; i < v->size(); ++i) {
            auto& e = seen[v->id_of(i)];
            std::uint64_t lvl = 0;
            for (BlockDag::Index p : v->parents(i)) lvl = std::max(lvl, seen[v->id_of(p)].level + 1);
            e.level = std::max(e.level, lvl);
        }
    }
    std::sort(majority.begin(), majority.end(), [](const Entry* a, const Entry* b) {
        if (a->level != b->level) return a->level < b->level;
        return a->block->id < b->block->id;
    });
    for (const Entry* e : majority) {
        const Block& b = *e->block;
        bool ok = b.is_genesis() ? out.empty() : (!out.empty() && out.contains(*b.prev));
        for (const auto& l : b.leaves) ok = ok && out.contains(l);
        if (ok) out.insert(e->block);
    }
    return out;
}

}  // namespace fantomette
