#pragma once

#include "fantomette/bitset.hpp"
#include "fantomette/hash.hpp"
#include "fantomette/vrf_beacon.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace fantomette {

using BlockId = Digest;
using BlockSet = std::set<BlockId>;

/// A bet: one parent (prev), references to other leaves, an eligibility
/// proof and an opaque payload. Immutable once built.
struct Block {
    BlockId id{};
    std::optional<BlockId> prev;
    std::vector<BlockId> leaves;
    EligibilityProof proof{};
    std::vector<std::uint8_t> txset;
    ParticipantId sender = 0;
    /// R(B): the beacon value after folding this block's VRF output.
    Digest beacon{};

    static Block genesis(const Digest& beacon);

    /// Strips prev and duplicates from `leaves` (order kept) and computes id.
    static Block make(const BlockId& prev, std::vector<BlockId> leaves, const EligibilityProof& proof,
                      std::vector<std::uint8_t> txset, ParticipantId sender, const Digest& beacon);

    bool is_genesis() const { return !prev.has_value(); }

    /// H(y): fork-choice tie-break. Genesis uses H(beacon).
    Digest tiebreak() const;

    Digest compute_id() const;
};

using BlockPtr = std::shared_ptr<const Block>;

enum class ScoreMode {
    /// Edges of the subgraph induced by Past(B) ∪ {B} minus Double.
    induced,
    /// Every outgoing edge of every non-Double block in Past(B) ∪ {B}, even
    /// when the edge points into Double.
    literal,
};

class DagError : public std::runtime_error {
public:
    enum class Kind { dangling_reference, duplicate_id, unknown_block, incomparable_blocks, not_genesis };
    DagError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Append-only blockDAG with the derived relations of the protocol:
/// Past, Ancestors, DirectFuture, Anticone, Leaves, distance and Double.
/// Single writer; reads are safe to share once insertion stops.
class BlockDag {
public:
    using Index = std::uint32_t;
    static constexpr Index npos = ~Index{0};

    explicit BlockDag(ScoreMode mode = ScoreMode::induced) : mode_(mode) {}

    void insert(BlockPtr b);
    void insert(Block b) { insert(std::make_shared<const Block>(std::move(b))); }

    std::size_t size() const { return blocks_.size(); }
    bool empty() const { return blocks_.empty(); }
    bool contains(const BlockId& id) const { return index_.count(id) != 0; }
    std::optional<Index> find(const BlockId& id) const;
    Index index_of(const BlockId& id) const;

    const Block& block(Index i) const { return *blocks_[i]; }
    const BlockPtr& block_ptr(Index i) const { return blocks_[i]; }
    const BlockId& id_of(Index i) const { return blocks_[i]->id; }
    Index genesis() const;

    /// prev first, then leaf references.
    std::span<const Index> parents(Index i) const { return parents_[i]; }
    Index prev_of(Index i) const { return parents_[i].empty() ? npos : parents_[i].front(); }
    std::span<const Index> children(Index i) const { return children_[i]; }
    std::uint64_t height(Index i) const { return height_[i]; }
    /// Longest path to genesis over all edges; a canonical topological key.
    std::uint64_t level(Index i) const { return level_[i]; }

    const IndexSet& past_set(Index i) const { return past_[i]; }
    const IndexSet& ancestor_set(Index i) const { return anc_[i]; }
    IndexSet future_set(Index i) const;
    IndexSet anticone_set(Index i) const;
    bool in_past(Index x, Index of) const { return past_[of].test(x); }
    bool in_ancestors(Index x, Index of) const { return anc_[of].test(x); }

    const std::set<Index>& leaf_indices() const { return leaves_; }
    const IndexSet& double_set() const { return double_; }
    /// Double as it would be computed inside the subDAG `keep`.
    IndexSet double_within(const IndexSet& keep) const;
    bool is_double(Index i) const { return double_.test(i); }

    ScoreMode score_mode() const { return mode_; }
    std::uint64_t score_value(Index i) const { return score_[i]; }
    /// Score of `i` counting only blocks in `mask` (which must contain past(i)).
    std::uint64_t score_within(Index i, const IndexSet& double_mask) const;

    /// Shortest directed path length between comparable blocks, else nullopt.
    std::optional<std::uint64_t> distance_between(Index a, Index b) const;

    // Id-level queries. All throw DagError(unknown_block) on absent ids.
    BlockSet ancestors(const BlockId& b) const;
    BlockSet past(const BlockId& b) const;
    BlockSet anticone(const BlockId& b) const;
    BlockSet direct_future(const BlockId& b) const;
    BlockSet leaves() const;
    std::uint64_t distance(const BlockId& a, const BlockId& b) const;
    BlockSet detect_double() const;

    /// Downward-closed subset as its own DAG (indices renumbered).
    BlockDag subdag(const IndexSet& keep) const;

    /// Rollback support: truncate(mark()) after speculative inserts.
    std::size_t mark() const { return size(); }
    void truncate(std::size_t n);

    /// `id prev [leaf,...] sender proof-hash`, one block per line.
    std::string snapshot() const;
    std::string to_dot() const;

    BlockSet to_ids(const IndexSet& s) const;

private:
    void recompute_double_and_scores();
    std::uint64_t compute_score(Index i) const;

    ScoreMode mode_;
    std::vector<BlockPtr> blocks_;
    std::unordered_map<BlockId, Index, DigestHash> index_;
    std::vector<std::vector<Index>> parents_;
    std::vector<std::vector<Index>> children_;
    std::vector<IndexSet> past_;
    std::vector<IndexSet> anc_;
    std::vector<std::uint64_t> height_;
    std::vector<std::uint64_t> level_;
    std::vector<std::uint64_t> score_;
    std::set<Index> leaves_;
    std::unordered_map<Digest, std::vector<Index>, DigestHash> proof_groups_;
    std::vector<Digest> proof_fp_;
    IndexSet double_;
};

/// Biggest common prefix DAG: blocks held by strictly more than half of the
/// views whose whole past also qualifies.
BlockDag bcpc(std::span<const BlockDag* const> views, ScoreMode mode = ScoreMode::induced);

}  // namespace fantomette
