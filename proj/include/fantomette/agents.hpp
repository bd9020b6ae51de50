#pragma once

// Player strategies: altruistic protocol followers, Byzantine block
// maximizers and rational withhold-and-grind coalitions. A coalition is one
// agent with a shared view and several member keys.

#include "fantomette/blockdag.hpp"
#include "fantomette/finality.hpp"
#include "fantomette/incentives.hpp"
#include "fantomette/rules.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace fantomette {

enum class AgentClass { altruistic, rational, byzantine };

std::string to_string(AgentClass c);

struct AgentParams {
    /// Shared genesis block every view starts from.
    BlockPtr genesis;
    ChainContext chain;
    FinalityConfig finality;
    ScoreMode score_mode = ScoreMode::induced;
    /// Slots per proof-of-delay redraw.
    std::uint64_t delay_pod = 40;
    std::uint64_t n_players = 150;
    IncentiveParams incentives;
    std::uint64_t rational_depth = 4;
    std::uint64_t rational_horizon = 10;
    std::uint64_t rational_rollouts = 32;
    std::uint64_t seed = 1;
};

/// Redraw schedule on one tip: depth d becomes available d * delay slots
/// after the tip was first seen.
class TipClock {
public:
    /// Depth to try now, if a new one is due.
    std::optional<std::uint32_t> due(const BlockId& tip, std::uint64_t slot, std::uint64_t delay);
    void reset() { tip_.reset(); }

private:
    std::optional<BlockId> tip_;
    std::uint64_t since_ = 0;
    std::int64_t last_depth_ = -1;
};

class Agent {
public:
    Agent(AgentClass cls, std::vector<Participant> members, const AgentParams& params);
    virtual ~Agent() = default;
    Agent(const Agent&) = delete;
    Agent& operator=(const Agent&) = delete;

    AgentClass agent_class() const { return class_; }
    const std::vector<Participant>& members() const { return members_; }
    bool is_member(ParticipantId p) const;
    const BlockDag& view() const { return view_; }
    const FinalityTracker& finality() const { return fin_; }
    std::size_t alarms() const { return alarms_; }

    /// Queues a delivered block; it is inserted at the start of the next step.
    void deliver(BlockPtr b);
    /// One slot: ingest deliveries, then act. Returns blocks to broadcast.
    virtual std::vector<BlockPtr> step(std::uint64_t slot) = 0;

protected:
    /// Inserts queued deliveries whose references resolve; the rest wait.
    void ingest();
    void insert_block(const BlockPtr& b);
    /// One protocol bet per member on fcr(view) when a redraw is due.
    std::vector<BlockPtr> protocol_step(std::uint64_t slot);

    AgentClass class_;
    std::vector<Participant> members_;
    AgentParams params_;
    BlockDag view_;
    FinalityTracker fin_;
    TipClock clock_;
    std::size_t alarms_ = 0;

private:
    bool try_insert(const BlockPtr& b);

    std::vector<BlockPtr> inbox_;
    std::unordered_map<BlockId, std::vector<BlockPtr>, DigestHash> orphans_;
    std::unordered_set<BlockId, DigestHash> orphan_ids_;
};

class AltruisticAgent final : public Agent {
public:
    AltruisticAgent(Participant me, const AgentParams& params);
    std::vector<BlockPtr> step(std::uint64_t slot) override;
};

/// Grinds every new leaf with every member, redraws on the fork-choice tip,
/// references only coalition leaves and broadcasts everything.
class ByzantineCoalition final : public Agent {
public:
    ByzantineCoalition(std::vector<Participant> members, const AgentParams& params);
    std::vector<BlockPtr> step(std::uint64_t slot) override;

private:
    std::unordered_set<BlockId, DigestHash> tried_;
};

/// Builds a private tree of bets (depth <= rational_depth) on the public
/// fork-choice tip, picks the best chain that would win the fork choice and
/// reveals it when rollouts say revealing now beats waiting a slot.
/// A single member has nothing to grind and follows the protocol.
class RationalCoalition final : public Agent {
public:
    RationalCoalition(std::vector<Participant> members, const AgentParams& params);
    std::vector<BlockPtr> step(std::uint64_t slot) override;

    std::size_t withheld_count() const { return withheld_.size(); }
    std::size_t decisions() const { return decisions_; }
    std::size_t withhold_choices() const { return withhold_choices_; }
    /// Forgets unpublished blocks; the view becomes what others can know.
    void drop_withheld() { rebuild({}); }

private:
    void rebuild(const std::vector<BlockPtr>& keep);
    void explore(std::uint64_t slot);
    std::size_t private_depth(BlockDag::Index leaf) const;
    double rollout(const std::vector<BlockPtr>& reveal, std::uint64_t delay, std::uint64_t slot, std::uint64_t r);

    std::size_t public_size_ = 1;
    BlockDag::Index public_tip_ = 0;
    std::vector<BlockPtr> withheld_;
    std::unordered_set<BlockId, DigestHash> tried_;
    std::size_t decisions_ = 0;
    std::size_t withhold_choices_ = 0;
};

std::unique_ptr<Agent> make_agent(AgentClass cls, std::vector<Participant> members, const AgentParams& params);

/// Coalition utility of the blocks sent by `members` in `dag`: rewards and
/// punishments under the label of the whole DAG.
double coalition_utility(const BlockDag& dag, const std::vector<Participant>& members, const IncentiveParams& params);

}  // namespace fantomette
