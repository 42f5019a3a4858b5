#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "ordermill/bdd.hpp"
#include "ordermill/rng.hpp"
#include "support/fixtures.hpp"

using namespace ordermill;
using ordermill::testing::counter_model;

namespace {

// Slot expressions for a bare boolean function over k slots, built from a
// 2^k-entry truth table as a disjunction of minterms.
SlotExprs minterm_exprs(unsigned truth, int slots, const std::vector<int>& slot_of_var) {
    SlotExprs se;
    se.slot_count = slots;
    auto add = [&se](ExprNode n) {
        se.pool.push_back(std::move(n));
        return static_cast<ExprId>(se.pool.size() - 1);
    };
    std::vector<ExprId> minterms;
    for (unsigned rowbits = 0; rowbits < (1u << slots); ++rowbits) {
        if (!((truth >> rowbits) & 1)) continue;
        std::vector<ExprId> lits;
        for (int v = 0; v < slots; ++v) {
            ExprId ref = add({ExprKind::VarRef, slot_of_var[v], {}});
            lits.push_back((rowbits >> v) & 1 ? ref : add({ExprKind::Not, -1, {ref}}));
        }
        minterms.push_back(lits.size() == 1 ? lits[0]
                                            : add({ExprKind::And, -1, std::move(lits)}));
    }
    if (minterms.empty()) se.roots.push_back(add({ExprKind::Const0, -1, {}}));
    else if (minterms.size() == 1) se.roots.push_back(minterms[0]);
    else se.roots.push_back(add({ExprKind::Or, -1, std::move(minterms)}));
    return se;
}

// Engine-side build of the same function + order, returning the count.
std::size_t engine_count(unsigned truth, int slots, const std::vector<int>& slot_of_var) {
    SlotAssignment sa;
    sa.present.assign(slots, -1);
    sa.next.assign(slots, -1);
    for (int v = 0; v < slots; ++v) sa.present[v] = slot_of_var[v];
    sa.slot_count = slots;
    BddManager mgr(sa);
    BddNode f = kFalse;
    for (unsigned rowbits = 0; rowbits < (1u << slots); ++rowbits) {
        if (!((truth >> rowbits) & 1)) continue;
        BddNode minterm = kTrue;
        for (int v = 0; v < slots; ++v) {
            BddNode lit = mgr.var(slot_of_var[v]);
            if (!((rowbits >> v) & 1)) lit = mgr.mk_not(lit);
            minterm = mgr.mk_and(minterm, lit);
        }
        f = mgr.mk_or(f, minterm);
    }
    return mgr.count_reachable({f});
}

// Figure-3 function (x1==x3) & (x2==x4) under a given variable order,
// built as a model of four inputs so each variable owns one slot.
std::size_t figure3_count(const std::vector<std::string>& order_names) {
    // Evaluate the bare function, not the model: use build_expr directly.
    Model f = parse_native("var d\ninput v1 v2 v3 v4\nnext d := (v1 == v3) & (v2 == v4)\n");
    VariableOrder o;
    o.push_back(f.find_var("d"));
    for (const auto& n : order_names) o.push_back(f.find_var(n));
    BddManager mgr(expand_order(o, f));
    BddNode root = build_expr(mgr, f, f.next[f.find_var("d")]);
    return mgr.count_reachable({root});
}

}  // namespace

TEST_CASE("expand_order: counter order (v2,v1,v0)") {
    Model m = counter_model();
    SlotAssignment sa = expand_order({2, 1, 0}, m);
    CHECK(sa.present[2] == 0);
    CHECK(sa.next[2] == 1);
    CHECK(sa.present[1] == 2);
    CHECK(sa.next[1] == 3);
    CHECK(sa.present[0] == 4);
    CHECK(sa.next[0] == 5);
    CHECK(sa.slot_count == 6);
}

TEST_CASE("expand_order: inputs take one slot") {
    Model m = parse_native("var s\ninput i\nnext s := i & s\n");
    SlotAssignment sa = expand_order({m.find_var("i"), m.find_var("s")}, m);
    CHECK(sa.present[m.find_var("i")] == 0);
    CHECK(sa.next[m.find_var("i")] == -1);
    CHECK(sa.present[m.find_var("s")] == 1);
    CHECK(sa.next[m.find_var("s")] == 2);
    CHECK(sa.slot_count == 3);
}

TEST_CASE("expand_order rejects non-permutations") {
    Model m = counter_model();
    CHECK_THROWS(expand_order({0, 0, 1}, m));
    CHECK_THROWS(expand_order({0, 1}, m));
    CHECK_THROWS(expand_order({0, 1, 5}, m));
}

TEST_CASE("build_expr basics") {
    Model m = parse_native("var d\ninput x y\nnext d := x & y\n");
    VariableOrder o{m.find_var("x"), m.find_var("y"), m.find_var("d")};
    BddManager mgr(expand_order(o, m));
    SUBCASE("x & y has two nodes") {
        BddNode n = build_expr(mgr, m, m.next[m.find_var("d")]);
        CHECK(mgr.count_reachable({n}) == 2);
    }
    SUBCASE("x ^ x reduces to terminal 0") {
        Model mx = parse_native("var d\ninput x\nnext d := x ^ x\n");
        BddManager mg2(expand_order({0, 1}, mx));
        BddNode n = build_expr(mg2, mx, mx.next[0]);
        CHECK(n == kFalse);
        CHECK(mg2.count_reachable({n}) == 0);
    }
}

TEST_CASE("Figure-3 order sensitivity: 6 vs 9 nodes, delta 3") {
    std::size_t good = figure3_count({"v1", "v3", "v2", "v4"});
    std::size_t bad = figure3_count({"v1", "v2", "v3", "v4"});
    CHECK(good == 6);
    CHECK(bad == 9);
    CHECK(bad - good == 3);
}

TEST_CASE("build_mbdd: identity relation on adjacent slots") {
    Model m = parse_native("var a\nnext a := a\n");
    MBdd b = build_mbdd(m, {0});
    // roots: init (!a: 1 node) and T = (a' == a): 3 nodes, sharing a'.
    REQUIRE(b.roots.size() == 2);
    CHECK(b.mgr->count_reachable({b.roots[1]}) == 3);
    SlotExprs se = mbdd_slot_exprs(m, {0});
    CHECK(truth_table_oracle(se) == b.node_count);
}

TEST_CASE("build_mbdd: counter T0 alone matches oracle") {
    Model m = counter_model();
    MBdd b = build_mbdd(m, {0, 1, 2});
    // T0 = (v0' == !v0) over adjacent slots: root plus the two v0' nodes.
    CHECK(b.mgr->count_reachable({b.roots[1]}) == 3);
}

TEST_CASE("count_nodes: terminal roots and sharing") {
    Model m = parse_native("var d\ninput x y\nnext d := x & y\n");
    BddManager mgr(expand_order({1, 2, 0}, m));
    SUBCASE("all-terminal roots count zero") {
        CHECK(mgr.count_reachable({kFalse, kTrue}) == 0);
    }
    SUBCASE("two roots at the same node count once") {
        BddNode n = build_expr(mgr, m, m.next[0]);
        CHECK(mgr.count_reachable({n, n}) == 2);
    }
}

TEST_CASE("evaluate_order: counter, all six orders match the oracle") {
    Model m = counter_model();
    VariableOrder o{0, 1, 2};
    std::sort(o.begin(), o.end());
    do {
        auto eo = evaluate_order(m, o);
        REQUIRE(eo.has_value());
        std::size_t expect = truth_table_oracle(mbdd_slot_exprs(m, o));
        CHECK(eo->node_count == expect);
        CHECK(eo->utility == doctest::Approx(1.0 / static_cast<double>(expect)));
    } while (std::next_permutation(o.begin(), o.end()));
}

TEST_CASE("evaluate_order: determinism and node cap") {
    Model m = counter_model();
    auto a = evaluate_order(m, {2, 0, 1});
    auto b = evaluate_order(m, {2, 0, 1});
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(a->node_count == b->node_count);
    // An impossibly small cap forces an evaluation failure.
    CHECK_FALSE(evaluate_order(m, {0, 1, 2}, 3).has_value());
}

TEST_CASE("truth_table_oracle basics") {
    SUBCASE("x & y") {
        SlotExprs se;
        se.slot_count = 2;
        se.pool = {{ExprKind::VarRef, 0, {}}, {ExprKind::VarRef, 1, {}},
                   {ExprKind::And, -1, {0, 1}}};
        se.roots = {2};
        CHECK(truth_table_oracle(se) == 2);
    }
    SUBCASE("single-variable functions have at most one node") {
        SlotExprs se;
        se.slot_count = 1;
        se.pool = {{ExprKind::VarRef, 0, {}}, {ExprKind::Not, -1, {0}}};
        se.roots = {1};
        CHECK(truth_table_oracle(se) == 1);
        se.roots = {0};
        CHECK(truth_table_oracle(se) == 1);
    }
    SUBCASE("slot cap enforced") {
        SlotExprs se;
        se.slot_count = 30;
        CHECK_THROWS(truth_table_oracle(se));
    }
}

TEST_CASE("canonicity: engine equals oracle over random functions and all slot orders") {
    std::vector<int> perm{0, 1, 2, 3};
    std::mt19937_64 rng(mix64(2024));
    for (int f = 0; f < 60; ++f) {
        unsigned truth = static_cast<unsigned>(rng() & 0xffff);
        std::sort(perm.begin(), perm.end());
        do {
            std::size_t got = engine_count(truth, 4, perm);
            std::size_t expect = truth_table_oracle(minterm_exprs(truth, 4, perm));
            REQUIRE(got == expect);
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
}

TEST_CASE("reduction and order-path invariants on reachable nodes") {
    Model m = counter_model();
    MBdd b = build_mbdd(m, {1, 2, 0});
    const BddManager& mgr = *b.mgr;
    // Walk every stored node reachable from the roots.
    std::vector<char> seen(mgr.store_size(), 0);
    std::vector<BddNode> stack;
    for (BddNode r : b.roots)
        if (!mgr.is_terminal(r)) stack.push_back(r);
    while (!stack.empty()) {
        BddNode n = stack.back();
        stack.pop_back();
        if (seen[n]) continue;
        seen[n] = 1;
        CHECK(mgr.low(n) != mgr.high(n));
        for (BddNode kid : {mgr.low(n), mgr.high(n)}) {
            if (mgr.is_terminal(kid)) continue;
            CHECK(mgr.slot_of(kid) > mgr.slot_of(n));
            stack.push_back(kid);
        }
    }
}

TEST_CASE("orders are not normalized: reversal may change counts") {
    // f1 = (a=b=c) | (c=d): its order and the reverse differ in size.
    Model m = parse_native("var w\ninput a b c d e\n"
                           "next w := ((a == b) & (b == c)) | (c == d)\n");
    int W = m.find_var("w");
    VariableOrder fwd{m.find_var("a"), m.find_var("b"), m.find_var("c"),
                      m.find_var("d"), m.find_var("e"), W};
    VariableOrder rev(fwd.rbegin(), fwd.rend());
    auto cf = evaluate_order(m, fwd);
    auto cr = evaluate_order(m, rev);
    REQUIRE(cf.has_value());
    REQUIRE(cr.has_value());
    CHECK(cf->node_count == truth_table_oracle(mbdd_slot_exprs(m, fwd)));
    CHECK(cr->node_count == truth_table_oracle(mbdd_slot_exprs(m, rev)));
    CHECK(cf->node_count != cr->node_count);
}

TEST_CASE("M-BDD counts match the oracle on random models and random orders") {
    for (std::uint64_t seed = 100; seed < 112; ++seed) {
        Model m = ordermill::testing::random_model(seed, 4, 2);
        std::mt19937_64 rng(mix64(seed, 0x0d5e));
        for (int round = 0; round < 4; ++round) {
            VariableOrder o(m.var_count());
            std::iota(o.begin(), o.end(), 0);
            shuffle_vec(o, rng);
            auto eo = evaluate_order(m, o);
            REQUIRE(eo.has_value());
            CHECK(eo->node_count == truth_table_oracle(mbdd_slot_exprs(m, o)));
        }
    }
}

TEST_CASE("build_expr: next-of environment maps one variable to its primed slot") {
    Model m = parse_native("var a\nnext a := a\n");
    BddManager mgr(expand_order({0}, m));
    BddNode present = build_expr(mgr, m, m.next[0]);
    BddNode primed = build_expr(mgr, m, m.next[0], 0);
    CHECK(mgr.slot_of(present) == 0);
    CHECK(mgr.slot_of(primed) == 1);
    CHECK(present != primed);
}

TEST_CASE("utility is strictly inverse to node count") {
    Model m = counter_model();
    auto a = evaluate_order(m, {0, 1, 2});
    auto b = evaluate_order(m, {2, 1, 0});
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK((a->node_count < b->node_count) == (a->utility > b->utility));
}
