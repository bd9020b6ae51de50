#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace fantomette;
using namespace fantomette::testing;

TEST_CASE("example DAG relations") {
    const Fig1 f = fig1_fixture();
    const auto& d = f.dag;
    const auto& id = f.id;
    CHECK(f.names(d.ancestors(id.at("H"))) == std::set<std::string>{"E", "A", "genesis"});
    CHECK(f.names(d.past(id.at("H"))) == std::set<std::string>{"E", "A", "B", "C", "F", "genesis"});
    CHECK(f.names(d.direct_future(id.at("F"))) == std::set<std::string>{"H", "I"});
    CHECK(d.distance(id.at("A"), id.at("H")) == 2);
    CHECK(d.distance(id.at("H"), id.at("A")) == 2);

    // F is a parent of H but neither in E's past nor its future.
    const auto anti_e = f.names(d.anticone(id.at("E")));
    CHECK(anti_e == std::set<std::string>{"D", "F", "G", "I"});
    CHECK(f.names(d.leaves()) == std::set<std::string>{"G", "H", "I"});
}

TEST_CASE("relations agree with brute force on random DAGs") {
    const OracleReport rep = compare_with_oracles(20240611, 500);
    CHECK(rep.dags == 500);
    for (const auto& [query, count] : rep.mismatches) {
        INFO(query);
        CHECK(count == 0);
    }
}

TEST_CASE("past, future and anticone partition the DAG") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 200; ++t) {
        const BlockDag dag = random_dag(rng);
        for (BlockDag::Index b = 0; b < dag.size(); ++b) {
            IndexSet all = dag.past_set(b);
            const IndexSet fut = dag.future_set(b);
            const IndexSet anti = dag.anticone_set(b);
            CHECK_FALSE(all.intersects(fut));
            CHECK_FALSE(all.intersects(anti));
            CHECK_FALSE(fut.intersects(anti));
            all |= fut;
            all |= anti;
            all.set(b);
            CHECK(all.count() == dag.size());
            // Past is downward closed and contains the ancestors.
            dag.past_set(b).for_each([&](std::size_t x) {
                for (auto p : dag.parents(static_cast<BlockDag::Index>(x))) CHECK(dag.in_past(p, b));
            });
            dag.ancestor_set(b).for_each([&](std::size_t x) { CHECK(dag.in_past(static_cast<BlockDag::Index>(x), b)); });
        }
    }
}

TEST_CASE("insert errors") {
    Fig1 f = fig1_fixture();
    SUBCASE("dangling reference") {
        auto ids = f.id;
        ids["ghost"] = Hasher{}.tag("ghost").finish();
        Block b = plain_block(f.dag, "ghost", {}, 0, ids, 99);
        try {
            f.dag.insert(b);
            FAIL("expected DagError");
        } catch (const DagError& e) {
            CHECK(e.kind() == DagError::Kind::dangling_reference);
        }
        CHECK(f.dag.size() == 10);
    }
    SUBCASE("duplicate id") {
        try {
            f.dag.insert(f.dag.block_ptr(3));
            FAIL("expected DagError");
        } catch (const DagError& e) {
            CHECK(e.kind() == DagError::Kind::duplicate_id);
        }
    }
    SUBCASE("unknown block and incomparable distance") {
        CHECK_THROWS_AS(f.dag.past(Hasher{}.tag("nope").finish()), DagError);
        try {
            (void)f.dag.distance(f.id.at("B"), f.id.at("D"));
            FAIL("expected DagError");
        } catch (const DagError& e) {
            CHECK(e.kind() == DagError::Kind::incomparable_blocks);
        }
    }
}

TEST_CASE("blocks sharing a proof form Double and lose their score") {
    Fig1 f = fig1_fixture();
    const Block& e = f.dag.block(f.dag.index_of(f.id.at("E")));
    const std::uint64_t before = f.dag.score_value(f.dag.index_of(f.id.at("H")));
    // Same proof as E, different prev.
    Block twin = Block::make(f.id.at("G"), {}, e.proof, {}, e.sender, e.beacon);
    f.dag.insert(twin);
    CHECK(f.dag.detect_double() == BlockSet{e.id, twin.id});
    const auto h = f.dag.index_of(f.id.at("H"));
    // E's three edges no longer count, nor H -> E.
    CHECK(f.dag.score_value(h) == before - 4);
}

TEST_CASE("truncate undoes speculative inserts") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 100; ++t) {
        BlockDag dag = random_dag(rng, {8, 4, 0.2});
        const std::string snap = dag.snapshot();
        const auto mark = dag.mark();
        std::vector<std::uint64_t> scores;
        for (BlockDag::Index i = 0; i < dag.size(); ++i) scores.push_back(dag.score_value(i));
        const auto leaves = dag.leaves();
        // Add a few blocks, one of them reusing a proof.
        for (int k = 0; k < 3; ++k) {
            const auto prev = static_cast<BlockDag::Index>(rng() % dag.size());
            EligibilityProof p = k == 2 ? dag.block(prev).proof : EligibilityProof{};
            if (k != 2) p.y = Hasher{}.tag("fake-y").put_u64(rng()).finish();
            if (dag.block(prev).is_genesis()) p.y = Hasher{}.tag("spec2").put_u64(rng()).finish();
            Block b = Block::make(dag.id_of(prev), {}, p, {}, 0, p.y);
            if (!dag.contains(b.id)) dag.insert(b);
        }
        dag.truncate(mark);
        CHECK(dag.snapshot() == snap);
        CHECK(dag.leaves() == leaves);
        for (BlockDag::Index i = 0; i < dag.size(); ++i) CHECK(dag.score_value(i) == scores[i]);
    }
}

TEST_CASE("biggest common prefix keeps majority blocks with their past") {
    const Fig1 f = fig1_fixture();
    auto view_of = [&](std::set<std::string> names) {
        IndexSet keep;
        for (const auto& n : names) keep.set(f.dag.index_of(f.id.at(n)));
        return f.dag.subdag(keep);
    };
    const BlockDag v1 = view_of({"genesis", "A", "B", "C", "E", "F"});
    const BlockDag v2 = view_of({"genesis", "A", "B", "C", "E", "D"});
    const BlockDag v3 = view_of({"genesis", "A", "C", "F", "D"});
    std::vector<const BlockDag*> views{&v1, &v2, &v3};
    const BlockDag g = bcpc(views);
    CHECK(f.names(g.past(f.id.at("E"))) == std::set<std::string>{"A", "B", "C", "genesis"});
    std::set<std::string> in_g;
    for (const auto& [n, bid] : f.id) {
        if (g.contains(bid)) in_g.insert(n);
    }
    CHECK(in_g == std::set<std::string>{"genesis", "A", "B", "C", "D", "E", "F"});

    std::vector<const BlockDag*> none;
    CHECK(bcpc(none).empty());
}

TEST_CASE("snapshot is independent of insertion order for equal DAGs") {
    const Fig1 f = fig1_fixture();
    BlockDag reordered;
    for (const char* n : {"genesis", "D", "C", "B", "A", "G", "F", "E", "I", "H"}) {
        reordered.insert(f.dag.block_ptr(f.dag.index_of(f.id.at(n))));
    }
    CHECK(reordered.leaves() == f.dag.leaves());
    for (const auto& [n, bid] : f.id) {
        CHECK(reordered.past(bid) == f.dag.past(bid));
        CHECK(reordered.score_value(reordered.index_of(bid)) == f.dag.score_value(f.dag.index_of(bid)));
    }
    CHECK(fcr(reordered) == fcr(f.dag));
}
