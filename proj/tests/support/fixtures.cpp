#include "fixtures.hpp"

#include <set>
#include <stdexcept>

namespace fantomette::testing {

std::set<std::string> Fig1::names(const BlockSet& s) const {
    std::set<std::string> out;
    for (const auto& [name, bid] : id) {
        if (s.count(bid)) out.insert(name);
    }
    return out;
}

Block plain_block(const BlockDag& dag, const std::string& prev, const std::vector<std::string>& refs,
                  ParticipantId sender, const std::map<std::string, BlockId>& ids, std::uint64_t salt) {
    (void)dag;
    EligibilityProof proof;
    proof.participant = sender;
    proof.y = Hasher{}.tag("fixture").put_u64(salt).finish();
    std::vector<BlockId> leaves;
    for (const auto& r : refs) leaves.push_back(ids.at(r));
    return Block::make(ids.at(prev), leaves, proof, {}, sender, proof.y);
}

Fig1 fig1_fixture() {
    Fig1 f;
    const Block g = Block::genesis(Hasher{}.tag("fixture-genesis").finish());
    f.id["genesis"] = g.id;
    f.dag.insert(g);
    struct Spec {
        const char* name;
        const char* prev;
        std::vector<std::string> refs;
        ParticipantId sender;
    };
    const std::vector<Spec> specs{
        {"A", "genesis", {}, 0}, {"B", "genesis", {}, 1}, {"C", "genesis", {}, 2},
        {"D", "genesis", {}, 0}, {"E", "A", {"B", "C"}, 1}, {"F", "C", {}, 0},
        {"G", "D", {}, 2},       {"H", "E", {"F"}, 2},     {"I", "F", {}, 1},
    };
    std::uint64_t salt = 0;
    for (const auto& s : specs) {
        Block b = plain_block(f.dag, s.prev, s.refs, s.sender, f.id, ++salt);
        f.id[s.name] = b.id;
        f.dag.insert(std::move(b));
    }
    return f;
}

TestNet::TestNet(std::size_t n_players, std::uint64_t seed, std::int64_t x_commit)
    : registry_(std::make_shared<CommitmentRegistry>()), oracle_(std::make_unique<VrfOracle>()) {
    std::mt19937_64 rng(seed);
    for (std::size_t p = 0; p < n_players; ++p) {
        Participant part{static_cast<ParticipantId>(p), gen_keypair(rng)};
        oracle_->enroll(part.keys);
        registry_->commit(part.id, part.keys.pk, -x_commit);
        players_.push_back(part);
    }
    ctx_ = ChainContext{registry_, BeaconConfig{x_commit, false, 1}, oracle_.get()};
    genesis_ = std::make_shared<const Block>(Block::genesis(Hasher{}.tag("testnet").put_u64(seed).finish()));
}

BlockDag TestNet::fresh_dag(ScoreMode mode) const {
    BlockDag dag(mode);
    dag.insert(genesis_);
    return dag;
}

std::uint32_t TestNet::eligible_depth(const BlockDag& dag, BlockDag::Index prev, ParticipantId player) const {
    const BeaconState state = beacon_for(dag, prev, ctx_);
    for (std::uint32_t d = 0; d < 10000; ++d) {
        if (check_eligibility(state, player, players_.at(player).keys, d)) return d;
    }
    throw std::runtime_error("no eligible depth found");
}

Block TestNet::mint(const BlockDag& dag, BlockDag::Index prev, const std::vector<BlockDag::Index>& refs,
                    ParticipantId player) const {
    const std::uint32_t d = eligible_depth(dag, prev, player);
    const auto proof = check_eligibility(beacon_for(dag, prev, ctx_), player, players_.at(player).keys, d);
    return assemble_block(dag, prev, refs, *proof, player, ctx_);
}

AgentParams TestNet::agent_params(std::uint64_t w) const {
    AgentParams p;
    p.genesis = genesis_;
    p.chain = ctx_;
    p.finality = FinalityConfig{players_.size(), w};
    p.n_players = players_.size();
    p.delay_pod = 40;
    return p;
}

BlockDag::Index add(BlockDag& dag, FinalityTracker& fin, Block b) {
    dag.insert(std::move(b));
    const auto i = static_cast<BlockDag::Index>(dag.size() - 1);
    fin.on_insert(dag, i);
    return i;
}

LongRangeOutcome long_range_scenario(std::uint64_t slots) {
    LongRangeOutcome out;
    TestNet net(4);
    BlockDag dag = net.fresh_dag();
    FinalityTracker fin(FinalityConfig{4, 1});
    fin.on_insert(dag, 0);
    auto chain = [&](BlockDag::Index from, const std::vector<ParticipantId>& senders) {
        for (ParticipantId p : senders) from = add(dag, fin, net.mint(dag, from, {}, p));
        return from;
    };
    const auto c = chain(0, {0});
    const auto second_witness = chain(c, {1, 2, 3, 0, 1, 2});
    out.finalized = fin.is_finalized(c) && fin.is_second_witness(second_witness);

    const auto first_attack = dag.size();
    const auto attack_tip = chain(0, {1, 2, 1, 2, 1, 2, 1, 2, 1, 2});
    out.attacker_chain_preferred = fcr_index(dag) == attack_tip;

    out.bets_refused = true;
    for (const auto& p : net.players()) {
        for (std::uint32_t d = 0; d < 8; ++d) {
            const BetResult r = make_bet(dag, fin, p, net.ctx(), d);
            if (!r.alarm || r.block) out.bets_refused = false;
        }
    }
    out.carrier_rejected =
        verify_block(dag, net.mint(dag, attack_tip, {second_witness}, 1), net.ctx(), &fin).has_value();

    std::set<BlockId> attack;
    for (auto i = first_attack; i < dag.size(); ++i) attack.insert(dag.id_of(static_cast<BlockDag::Index>(i)));
    const AgentParams params = net.agent_params(1);
    const auto& ps = net.players();
    std::vector<std::unique_ptr<Agent>> agents;
    for (const auto& p : ps) agents.push_back(make_agent(AgentClass::altruistic, {p}, params));
    for (const auto& p : ps) agents.push_back(make_agent(AgentClass::rational, {p}, params));
    agents.push_back(make_agent(AgentClass::rational, {ps[0], ps[3]}, params));
    agents.push_back(make_agent(AgentClass::rational, {ps[1], ps[2]}, params));
    for (auto& agent : agents) {
        ++out.agents_tested;
        for (BlockDag::Index i = 1; i < dag.size(); ++i) agent->deliver(dag.block_ptr(i));
        std::set<BlockId> tainted = attack;
        bool extends = false;
        for (std::uint64_t slot = 1; slot <= slots; ++slot) {
            for (const auto& b : agent->step(slot)) {
                bool bad = tainted.count(*b->prev) > 0;
                for (const auto& l : b->leaves) bad = bad || tainted.count(l) > 0;
                if (bad) {
                    extends = true;
                    tainted.insert(b->id);
                }
            }
        }
        out.agents_extending += extends;
    }
    return out;
}

}  // namespace fantomette::testing
