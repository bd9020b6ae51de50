#pragma once

// Consensus rules: fork choice, block validity, betting and labelling.

#include "fantomette/blockdag.hpp"
#include "fantomette/finality.hpp"
#include "fantomette/vrf_beacon.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fantomette {

struct Score {
    std::uint64_t value = 0;
    Digest tiebreak{};
    /// Last resort for blocks sharing a VRF output.
    BlockId id{};
};

/// True when `a` wins the fork choice against `b`: higher value, then
/// smaller hash, then smaller block id.
bool preferred(const Score& a, const Score& b);

Score score_at(const BlockDag& dag, BlockDag::Index i);
Score score(const BlockDag& dag, const BlockId& b);

/// Leaf with the best score; genesis when the DAG is only genesis.
BlockDag::Index fcr_index(const BlockDag& dag);
BlockId fcr(const BlockDag& dag);

/// fcr(past(b)) for a block b whose parents are `parents` (already in dag).
BlockDag::Index fcr_of_parents(const BlockDag& dag, std::span<const BlockDag::Index> parents);

/// Everything needed to check eligibility besides the DAG itself.
struct ChainContext {
    std::shared_ptr<const CommitmentRegistry> registry;
    BeaconConfig beacon{};
    const VrfVerifier* vrf = nullptr;
};

/// Lottery state for betting on `prev`: R(prev), round height(prev) + 1.
BeaconState beacon_for(const BlockDag& dag, BlockDag::Index prev, const ChainContext& ctx);

enum class Violation { fcr_mismatch, ineligible, witness_rule, second_witness_rule };

std::string to_string(Violation v);

/// Checks 1-4 for a block not yet in dag. References must resolve
/// (throws DagError otherwise). `fin` must track `dag`; null skips checks 3-4.
std::optional<Violation> verify_block(const BlockDag& dag, const Block& b, const ChainContext& ctx,
                                      const FinalityTracker* fin);

struct Participant {
    ParticipantId id = 0;
    VrfKeypair keys;
};

/// Builds the block (beacon R(B) = F^d(R(prev)) xor y) for a known proof.
Block assemble_block(const BlockDag& dag, BlockDag::Index prev, std::vector<BlockDag::Index> refs,
                     const EligibilityProof& proof, ParticipantId sender, const ChainContext& ctx,
                     std::vector<std::uint8_t> txset = {});

struct BetResult {
    std::optional<Block> block;
    /// The FCR tip does not descend from the candidate of the player's latest
    /// second witness: a long-range rewrite.
    bool alarm = false;
};

/// True when `target` does not descend from (or equal) the candidate of the
/// latest second witness in the view: betting on it would rewrite a
/// finalized checkpoint.
bool long_range_alarm(const BlockDag& view, const FinalityTracker& fin, BlockDag::Index target);

/// Protocol bet at redraw depth `depth` on fcr(view), referencing every
/// other leaf (minus leaves whose witnesses would break checks 3-4).
BetResult make_bet(const BlockDag& view, const FinalityTracker& fin, const Participant& me, const ChainContext& ctx,
                   std::uint32_t depth = 0, std::vector<std::uint8_t> txset = {});

/// References for a bet on `target`: the other leaves of the view, dropping
/// any that would bring an unbacked witness or second witness into the past.
std::vector<BlockDag::Index> reference_set(const BlockDag& view, const FinalityTracker* fin, BlockDag::Index target);

enum class Label { winner, loser, neutral };

std::string to_string(Label l);

struct LabelMap {
    std::vector<Label> labels;  // by block index
    IndexSet blue;

    std::map<BlockId, Label> by_id(const BlockDag& dag) const;
};

/// Main chain winners, their direct future neutral, then every remaining
/// block (canonical topological order) neutral iff |anticone ∩ blue| <= k.
LabelMap label(const BlockDag& dag, std::size_t k);

/// `block-id,label` rows with a header line.
std::string label_csv(const BlockDag& dag, const LabelMap& m);

}  // namespace fantomette
