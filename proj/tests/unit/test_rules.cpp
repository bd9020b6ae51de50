#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace fantomette;
using namespace fantomette::testing;

TEST_CASE("fork choice on the example DAG") {
    const Fig1 f = fig1_fixture();
    CHECK(fcr(f.dag) == f.id.at("H"));
    CHECK(f.dag.score_value(f.dag.index_of(f.id.at("H"))) == 9);
    CHECK(f.dag.score_value(f.dag.index_of(f.id.at("I"))) == 3);
    CHECK(f.dag.score_value(f.dag.index_of(f.id.at("G"))) == 2);

    BlockDag only;
    only.insert(f.dag.block_ptr(0));
    CHECK(fcr(only) == f.id.at("genesis"));
    CHECK_THROWS_AS(fcr_index(BlockDag{}), DagError);
}

TEST_CASE("labels on the example DAG") {
    const Fig1 f = fig1_fixture();
    auto lab = [&](std::size_t k, const char* n) { return label(f.dag, k).by_id(f.dag).at(f.id.at(n)); };
    for (const char* w : {"genesis", "A", "E", "H"}) CHECK(lab(3, w) == Label::winner);
    for (const char* n : {"B", "C", "D"}) CHECK(lab(3, n) == Label::neutral);
    // anticone(F) meets the blue set in A, B, D, E.
    CHECK(lab(3, "F") == Label::loser);
    CHECK(lab(4, "F") == Label::neutral);
    const std::string csv = label_csv(f.dag, label(f.dag, 3));
    CHECK(csv.rfind("block-id,label\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
}

TEST_CASE("label properties on random DAGs") {
    std::mt19937_64 rng(41);
    for (int t = 0; t < 300; ++t) {
        const BlockDag dag = random_dag(rng, {12, 4, 0.1});
        const std::size_t k = static_cast<std::size_t>(t % 4);
        const LabelMap m = label(dag, k);
        REQUIRE(m.labels.size() == dag.size());
        // Winners are exactly the prev-chain of the fork-choice tip.
        BlockDag::Index x = fcr_index(dag);
        std::size_t chain = 0;
        while (true) {
            CHECK(m.labels[x] == Label::winner);
            ++chain;
            if (x == dag.genesis()) break;
            x = dag.prev_of(x);
        }
        CHECK(static_cast<std::size_t>(std::count(m.labels.begin(), m.labels.end(), Label::winner)) == chain);
        for (BlockDag::Index i = 0; i < dag.size(); ++i) CHECK(m.blue.test(i) == (m.labels[i] != Label::loser));
        // Larger k never turns a neutral block into a loser.
        const LabelMap looser = label(dag, k + 1);
        for (BlockDag::Index i = 0; i < dag.size(); ++i) {
            if (m.labels[i] == Label::neutral) CHECK(looser.labels[i] != Label::loser);
        }
    }
}

TEST_CASE("block verification") {
    TestNet net(4);
    BlockDag dag = net.fresh_dag();
    const auto& ctx = net.ctx();

    Block a = net.mint(dag, 0, {}, 0);
    CHECK_FALSE(verify_block(dag, a, ctx, nullptr));
    dag.insert(a);
    Block b = net.mint(dag, 0, {}, 1);
    CHECK_FALSE(verify_block(dag, b, ctx, nullptr));
    dag.insert(b);
    const auto ia = dag.index_of(a.id);
    const auto ib = dag.index_of(b.id);
    Block c = net.mint(dag, ia, {}, 2);
    dag.insert(c);
    const auto ic = dag.index_of(c.id);

    SUBCASE("valid bet on the fork choice with references") {
        const Block d = net.mint(dag, ic, {ib}, 3);
        CHECK_FALSE(verify_block(dag, d, ctx, nullptr));
    }
    SUBCASE("prev that is not the fork choice of the past") {
        const Block d = net.mint(dag, ib, {ic}, 3);
        CHECK(verify_block(dag, d, ctx, nullptr) == Violation::fcr_mismatch);
        CHECK(to_string(Violation::fcr_mismatch) == "FCR_MISMATCH");
        // Without the reference to C, betting on B is fine.
        CHECK_FALSE(verify_block(dag, net.mint(dag, ib, {}, 3), ctx, nullptr));
    }
    SUBCASE("sender and proof mismatches") {
        const Block good = net.mint(dag, ic, {}, 3);
        Block wrong_sender = Block::make(*good.prev, good.leaves, good.proof, {}, 1, good.beacon);
        CHECK(verify_block(dag, wrong_sender, ctx, nullptr) == Violation::ineligible);
        Digest bad_beacon = good.beacon;
        bad_beacon[5] ^= 0x40;
        Block tampered = Block::make(*good.prev, good.leaves, good.proof, {}, 3, bad_beacon);
        CHECK(verify_block(dag, tampered, ctx, nullptr) == Violation::ineligible);
        // A proof for another round does not transfer.
        Block moved = Block::make(a.id, {}, good.proof, {}, 3, good.beacon);
        CHECK(verify_block(dag, moved, ctx, nullptr) == Violation::ineligible);
    }
    SUBCASE("preconditions") {
        CHECK_THROWS_AS(verify_block(dag, dag.block(0), ctx, nullptr), std::invalid_argument);
        ChainContext no_vrf = ctx;
        no_vrf.vrf = nullptr;
        CHECK_THROWS_AS(verify_block(dag, net.mint(dag, ic, {}, 3), no_vrf, nullptr), std::invalid_argument);
        Block orphan = Block::make(Hasher{}.tag("missing").finish(), {}, a.proof, {}, 0, a.beacon);
        CHECK_THROWS_AS(verify_block(dag, orphan, ctx, nullptr), DagError);
    }
}

TEST_CASE("protocol bets follow the fork choice and reference every other leaf") {
    TestNet net(4);
    BlockDag dag = net.fresh_dag();
    FinalityTracker fin(FinalityConfig{4, 2});
    fin.on_insert(dag, 0);
    const auto a = add(dag, fin, net.mint(dag, 0, {}, 0));
    add(dag, fin, net.mint(dag, 0, {}, 1));
    add(dag, fin, net.mint(dag, a, {}, 2));
    const auto tip = fcr_index(dag);
    for (ParticipantId p = 0; p < 4; ++p) {
        const std::uint32_t depth = net.eligible_depth(dag, tip, p);
        if (depth > 0) CHECK_FALSE(make_bet(dag, fin, net.players()[p], net.ctx(), depth - 1).block);
        const BetResult r = make_bet(dag, fin, net.players()[p], net.ctx(), depth);
        REQUIRE(r.block);
        CHECK_FALSE(r.alarm);
        CHECK(*r.block->prev == dag.id_of(tip));
        CHECK(r.block->leaves.size() == dag.leaf_indices().size() - 1);
        CHECK_FALSE(verify_block(dag, *r.block, net.ctx(), &fin));
    }
    CHECK(reference_set(dag, nullptr, tip).size() == dag.leaf_indices().size() - 1);
}

TEST_CASE("random protocol-built DAGs stay valid") {
    // Every block made by make_bet on a random sub-view passes verification
    // against the full DAG.
    TestNet net(5, 13);
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        BlockDag dag = net.fresh_dag();
        FinalityTracker fin(FinalityConfig{5, 2});
        fin.on_insert(dag, 0);
        for (int step = 0; step < 25; ++step) {
            const auto p = static_cast<ParticipantId>(rng() % 5);
            const auto tip = fcr_index(dag);
            const std::uint32_t depth = net.eligible_depth(dag, tip, p);
            const BetResult r = make_bet(dag, fin, net.players()[p], net.ctx(), depth);
            if (!r.block) {
                CHECK(r.alarm);
                break;
            }
            CHECK_FALSE(verify_block(dag, *r.block, net.ctx(), &fin));
            add(dag, fin, *r.block);
        }
        CHECK(fin.violations(dag) == 0);
    }
}
