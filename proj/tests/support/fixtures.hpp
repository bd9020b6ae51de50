#pragma once

#include "fantomette/agents.hpp"
#include "fantomette/blockdag.hpp"
#include "fantomette/finality.hpp"
#include "fantomette/rules.hpp"

#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace fantomette::testing {

/// The nine-block example DAG: genesis, A..D on genesis, E on A referencing
/// B and C, F on C, G on D, H on E referencing F, I on F.
struct Fig1 {
    BlockDag dag;
    std::map<std::string, BlockId> id;

    std::set<std::string> names(const BlockSet& s) const;
};

Fig1 fig1_fixture();

/// A block with a unique dummy proof; no eligibility.
Block plain_block(const BlockDag& dag, const std::string& prev, const std::vector<std::string>& refs,
                  ParticipantId sender, const std::map<std::string, BlockId>& ids, std::uint64_t salt);

/// Committed players with real keys, a shared oracle and genesis.
class TestNet {
public:
    explicit TestNet(std::size_t n_players, std::uint64_t seed = 7, std::int64_t x_commit = 10);

    const ChainContext& ctx() const { return ctx_; }
    const std::vector<Participant>& players() const { return players_; }
    const BlockPtr& genesis() const { return genesis_; }
    BlockDag fresh_dag(ScoreMode mode = ScoreMode::induced) const;

    /// Smallest redraw depth at which `player` is eligible on `prev`.
    std::uint32_t eligible_depth(const BlockDag& dag, BlockDag::Index prev, ParticipantId player) const;
    /// A valid-proof bet by `player` on `prev` with the given references.
    Block mint(const BlockDag& dag, BlockDag::Index prev, const std::vector<BlockDag::Index>& refs,
               ParticipantId player) const;

    AgentParams agent_params(std::uint64_t w = 6) const;

private:
    std::vector<Participant> players_;
    std::shared_ptr<CommitmentRegistry> registry_;
    std::unique_ptr<VrfOracle> oracle_;
    ChainContext ctx_;
    BlockPtr genesis_;
};

/// Inserts into both the DAG and its tracker.
BlockDag::Index add(BlockDag& dag, FinalityTracker& fin, Block b);

/// Four players finalize a rank-1 candidate, then two of them rebuild a
/// longer chain from genesis with their old keys.
struct LongRangeOutcome {
    bool finalized = false;
    bool attacker_chain_preferred = false;
    /// Every protocol bet at depths 0..7 raised the alarm and produced nothing.
    bool bets_refused = false;
    /// An attacker block referencing the second witness fails verification.
    bool carrier_rejected = false;
    std::size_t agents_tested = 0;
    /// Agents that emitted a block extending or referencing the attacker chain.
    std::size_t agents_extending = 0;

    bool rejected() const {
        return finalized && attacker_chain_preferred && bets_refused && carrier_rejected && agents_tested > 0 &&
               agents_extending == 0;
    }
};

LongRangeOutcome long_range_scenario(std::uint64_t slots = 400);

}  // namespace fantomette::testing
