#pragma once

// Decentralized checkpointing: candidates, witnesses, second witnesses,
// justified/finalized status per rank, and the reconfiguration window.
//
// Every status is a property of a block's past, so the tracker can be fed
// blocks in any topological order and produces the same statuses.

#include "fantomette/bitset.hpp"
#include "fantomette/blockdag.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace fantomette {

struct FinalityConfig {
    std::size_t n_players = 150;
    /// Distance between a second witness and the next rank's candidates.
    std::uint64_t w = 6;
};

/// ceil(2n/3) distinct players.
std::size_t finality_threshold(std::size_t n_players);

enum class FinalityEventKind { candidate, justified, finalized, witness, second_witness };

std::string to_string(FinalityEventKind kind);

struct FinalityEvent {
    std::uint64_t rank = 0;
    BlockDag::Index block = 0;
    /// The candidate the event refers to (the block itself for `candidate`).
    BlockDag::Index candidate = 0;
    FinalityEventKind kind = FinalityEventKind::candidate;
};

struct SecondWitnessRef {
    BlockDag::Index block = 0;
    BlockDag::Index candidate = 0;
    std::uint64_t rank = 0;
};

class FinalityTracker {
public:
    using Index = BlockDag::Index;

    explicit FinalityTracker(FinalityConfig cfg);

    const FinalityConfig& config() const { return cfg_; }
    std::size_t threshold() const { return threshold_; }

    /// Must be called once per inserted block, in insertion order.
    void on_insert(const BlockDag& dag, Index x);
    /// Forgets everything about blocks with index >= n (pairs with BlockDag::truncate).
    void truncate(std::size_t n);
    std::size_t size() const { return blocks_.size(); }

    bool is_witness(Index x) const { return blocks_[x].witness; }
    bool is_second_witness(Index x) const { return blocks_[x].second_witness; }
    /// A witness in past(x) ∪ {x}.
    bool witness_in_past(Index x) const { return blocks_[x].witness_in_past; }
    /// A witness in ancestors(x) ∪ {x}.
    bool witness_in_chain(Index x) const { return blocks_[x].witness_in_chain; }
    /// Highest rank finalized by a second witness in past(x) ∪ {x}; 0 if none.
    std::uint64_t finalized_rank_seen(Index x) const { return blocks_[x].finalized_rank_seen; }

    std::optional<std::uint64_t> candidate_rank(Index x) const;
    std::vector<Index> candidates(std::uint64_t rank) const;
    bool is_justified(Index c) const;
    bool is_finalized(Index c) const;
    std::vector<Index> justified() const;
    std::vector<Index> finalized() const;
    /// Highest rank with at least one candidate.
    std::uint64_t rank() const;

    /// Second witnesses of `c` whose prev is not one.
    const std::vector<Index>& minimal_second_witnesses(Index c) const;
    /// True when some second witness of `c` lies in past(b) for a block b
    /// with the given parents.
    bool finalized_below(Index c, std::span<const Index> parents, const BlockDag& dag) const;

    /// Highest rank, ties broken by smallest block id.
    std::optional<SecondWitnessRef> latest_second_witness(const BlockDag& dag) const;

    /// Pairs of finalized candidates of one rank that are not on one chain.
    std::size_t violations(const BlockDag& dag) const;

    const std::vector<FinalityEvent>& events() const { return events_; }

private:
    struct Target {
        Index block = 0;
        bool is_witness = false;  // else candidate
        Index candidate = 0;
        std::uint64_t rank = 0;
        /// bets[j] = players betting on `block` within past(block + j) ∪ {block + j}.
        std::vector<IndexSet> bets;
    };
    struct CandidateInfo {
        std::uint64_t rank = 0;
        std::size_t target = 0;
        Index justified_by = BlockDag::npos;
        Index finalized_by = BlockDag::npos;
        std::vector<Index> witness_targets;
        std::vector<Index> second_witnesses;
    };
    struct BlockInfo {
        bool witness = false;
        bool second_witness = false;
        bool witness_in_past = false;
        bool witness_in_chain = false;
        std::uint64_t finalized_rank_seen = 0;
        std::size_t targets_before = 0;
        std::size_t events_before = 0;
    };

    const IndexSet* bets_of(const Target& t, Index x) const;
    void add_candidate(Index x, std::uint64_t rank);

    FinalityConfig cfg_;
    std::size_t threshold_;
    std::vector<BlockInfo> blocks_;
    std::vector<Target> targets_;
    std::map<Index, CandidateInfo> candidates_;
    /// (rank, second witness, candidate) for every minimal second witness, in order.
    std::vector<SecondWitnessRef> second_witness_log_;
    std::vector<FinalityEvent> events_;
};

class NotFinalizedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Membership changes are accepted only during the w-block window opened by
/// a finalization; outside it the player set is fixed.
class Reconfiguration {
public:
    explicit Reconfiguration(std::set<ParticipantId> players) : players_(std::move(players)) {}

    /// Opens the window for `w` blocks. Throws NotFinalizedError when the
    /// tracker has no finalized block.
    void begin(const FinalityTracker& tracker, std::uint64_t w);
    bool request_join(ParticipantId who);
    bool request_leave(ParticipantId who);
    /// Counts one block towards the window; applies pending changes when it closes.
    void on_block();

    bool open() const { return open_; }
    std::uint64_t remaining() const { return remaining_; }
    const std::set<ParticipantId>& players() const { return players_; }

private:
    void close();

    std::set<ParticipantId> players_;
    std::set<ParticipantId> joins_;
    std::set<ParticipantId> leaves_;
    bool open_ = false;
    std::uint64_t remaining_ = 0;
};

}  // namespace fantomette
