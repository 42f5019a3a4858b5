#include "ordermill/bdd.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <tuple>

#include "ordermill/rng.hpp"

namespace ordermill {

SlotAssignment expand_order(const VariableOrder& o, const Model& m) {
    const int n = m.var_count();
    if (static_cast<int>(o.size()) != n)
        throw std::invalid_argument("order length does not match variable count");
    std::vector<char> seen(n, 0);
    for (int v : o) {
        if (v < 0 || v >= n) throw std::invalid_argument("order names an unknown variable");
        if (seen[v]) throw std::invalid_argument("order lists a variable twice");
        seen[v] = 1;
    }
    SlotAssignment sa;
    sa.present.assign(n, -1);
    sa.next.assign(n, -1);
    int slot = 0;
    for (int v : o) {
        sa.present[v] = slot++;
        if (m.is_state(v)) sa.next[v] = slot++;
    }
    sa.slot_count = slot;
    return sa;
}

BddManager::BddManager(SlotAssignment slots, std::size_t node_cap)
    : slots_(std::move(slots)), node_cap_(node_cap) {
    nodes_.push_back({kTerminalSlot, kFalse, kFalse});  // 0
    nodes_.push_back({kTerminalSlot, kTrue, kTrue});    // 1
}

BddNode BddManager::mk_node(std::uint32_t slot, BddNode low, BddNode high) {
    if (low == high) return low;
    Key3 key{slot, low, high};
    auto it = unique_.find(key);
    if (it != unique_.end()) return it->second;
    if (nodes_.size() >= node_cap_) throw NodeLimitError(node_cap_);
    nodes_.push_back({slot, low, high});
    BddNode id = static_cast<BddNode>(nodes_.size() - 1);
    unique_.emplace(key, id);
    return id;
}

BddNode BddManager::var(int slot) {
    return mk_node(static_cast<std::uint32_t>(slot), kFalse, kTrue);
}

BddNode BddManager::apply(Op op, BddNode a, BddNode b) {
    switch (op) {
        case Op::And:
            if (a == kFalse || b == kFalse) return kFalse;
            if (a == kTrue) return b;
            if (b == kTrue) return a;
            if (a == b) return a;
            if (a > b) std::swap(a, b);
            break;
        case Op::Or:
            if (a == kTrue || b == kTrue) return kTrue;
            if (a == kFalse) return b;
            if (b == kFalse) return a;
            if (a == b) return a;
            if (a > b) std::swap(a, b);
            break;
        case Op::Xor:
            if (a == b) return kFalse;
            if (a == kFalse) return b;
            if (b == kFalse) return a;
            if (a > b) std::swap(a, b);
            break;
        case Op::Not:
            if (a == kFalse) return kTrue;
            if (a == kTrue) return kFalse;
            b = a;
            break;
    }
    Key3 key{static_cast<std::uint32_t>(op), a, b};
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;

    std::uint32_t sa = nodes_[a].slot, sb = nodes_[b].slot;
    std::uint32_t top = std::min(sa, sb);
    BddNode a0 = sa == top ? nodes_[a].low : a;
    BddNode a1 = sa == top ? nodes_[a].high : a;
    BddNode b0 = sb == top ? nodes_[b].low : b;
    BddNode b1 = sb == top ? nodes_[b].high : b;
    BddNode lo = apply(op, a0, b0);
    BddNode hi = apply(op, a1, b1);
    BddNode r = mk_node(top, lo, hi);
    cache_.emplace(key, r);
    return r;
}

BddNode BddManager::mk_not(BddNode a) { return apply(Op::Not, a, a); }
BddNode BddManager::mk_and(BddNode a, BddNode b) { return apply(Op::And, a, b); }
BddNode BddManager::mk_or(BddNode a, BddNode b) { return apply(Op::Or, a, b); }
BddNode BddManager::mk_xor(BddNode a, BddNode b) { return apply(Op::Xor, a, b); }
BddNode BddManager::mk_xnor(BddNode a, BddNode b) { return mk_not(mk_xor(a, b)); }

std::size_t BddManager::count_reachable(const std::vector<BddNode>& roots) const {
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<BddNode> stack;
    for (BddNode r : roots)
        if (!is_terminal(r) && !seen[r]) {
            seen[r] = 1;
            stack.push_back(r);
        }
    std::size_t count = 0;
    while (!stack.empty()) {
        BddNode n = stack.back();
        stack.pop_back();
        ++count;
        for (BddNode kid : {nodes_[n].low, nodes_[n].high})
            if (!is_terminal(kid) && !seen[kid]) {
                seen[kid] = 1;
                stack.push_back(kid);
            }
    }
    return count;
}

BddNode build_expr(BddManager& mgr, const Model& m, ExprId e, int next_of) {
    const auto& sa = mgr.slots();
    std::unordered_map<ExprId, BddNode> memo;

    std::function<BddNode(ExprId)> go = [&](ExprId id) -> BddNode {
        auto it = memo.find(id);
        if (it != memo.end()) return it->second;
        const ExprNode& n = m.pool[id];
        BddNode r;
        switch (n.kind) {
            case ExprKind::Const0: r = kFalse; break;
            case ExprKind::Const1: r = kTrue; break;
            case ExprKind::VarRef: {
                int slot = n.var == next_of ? sa.next[n.var] : sa.present[n.var];
                if (slot < 0)
                    throw std::invalid_argument("expression references variable '" +
                                                m.variables[n.var].name +
                                                "' absent from the slot assignment");
                r = mgr.var(slot);
                break;
            }
            case ExprKind::Not: r = mgr.mk_not(go(n.kids[0])); break;
            case ExprKind::Buff: r = go(n.kids[0]); break;
            case ExprKind::Xor: r = mgr.mk_xor(go(n.kids[0]), go(n.kids[1])); break;
            case ExprKind::Xnor: r = mgr.mk_xnor(go(n.kids[0]), go(n.kids[1])); break;
            case ExprKind::And:
            case ExprKind::Or:
            case ExprKind::Nand:
            case ExprKind::Nor: {
                bool conj = n.kind == ExprKind::And || n.kind == ExprKind::Nand;
                r = go(n.kids[0]);
                for (std::size_t i = 1; i < n.kids.size(); ++i)
                    r = conj ? mgr.mk_and(r, go(n.kids[i])) : mgr.mk_or(r, go(n.kids[i]));
                if (n.kind == ExprKind::Nand || n.kind == ExprKind::Nor) r = mgr.mk_not(r);
                break;
            }
            default: r = kFalse; break;
        }
        memo.emplace(id, r);
        return r;
    };
    return go(e);
}

MBdd build_mbdd(const Model& m, const VariableOrder& o, std::size_t node_cap) {
    MBdd b;
    b.mgr = std::make_unique<BddManager>(expand_order(o, m), node_cap);
    BddManager& mgr = *b.mgr;

    BddNode init = kTrue;
    for (const auto& v : m.variables) {
        if (v.kind != VarKind::State) continue;
        BddNode lit = mgr.var(mgr.slots().present[v.index]);
        if (!m.init[v.index]) lit = mgr.mk_not(lit);
        init = mgr.mk_and(init, lit);
    }
    b.roots.push_back(init);

    for (const auto& v : m.variables) {
        if (v.kind != VarKind::State) continue;
        BddNode ns = build_expr(mgr, m, m.next[v.index]);
        BddNode primed = mgr.var(mgr.slots().next[v.index]);
        b.roots.push_back(mgr.mk_xnor(primed, ns));
    }
    b.node_count = mgr.count_reachable(b.roots);
    return b;
}

std::size_t count_nodes(const MBdd& b) {
    return b.mgr->count_reachable(b.roots);
}

std::optional<EvaluatedOrder> evaluate_order(const Model& m, const VariableOrder& o,
                                             std::size_t node_cap) {
    try {
        MBdd b = build_mbdd(m, o, node_cap);
        EvaluatedOrder eo;
        eo.order = o;
        eo.node_count = b.node_count;
        eo.utility = b.node_count == 0 ? std::numeric_limits<double>::infinity()
                                       : 1.0 / static_cast<double>(b.node_count);
        return eo;
    } catch (const NodeLimitError&) {
        return std::nullopt;
    }
}

// --- truth-table oracle -------------------------------------------------

namespace {

// Minimal hash-consed store for the oracle's reduced DAG. Kept separate
// from BddManager on purpose: the oracle must not inherit engine bugs.
struct OracleStore {
    struct Node {
        int slot;
        std::int64_t low, high;
    };
    std::vector<Node> nodes;
    std::map<std::tuple<int, std::int64_t, std::int64_t>, std::int64_t> unique;

    static constexpr std::int64_t kZero = -2;
    static constexpr std::int64_t kOne = -1;

    std::int64_t mk(int slot, std::int64_t low, std::int64_t high) {
        if (low == high) return low;
        auto key = std::make_tuple(slot, low, high);
        auto it = unique.find(key);
        if (it != unique.end()) return it->second;
        nodes.push_back({slot, low, high});
        std::int64_t id = static_cast<std::int64_t>(nodes.size()) - 1;
        unique.emplace(key, id);
        return id;
    }
};

}  // namespace

std::size_t truth_table_oracle(const SlotExprs& exprs) {
    const int n = exprs.slot_count;
    if (n < 0 || n > 24) throw std::invalid_argument("oracle supports at most 24 slots");
    const std::uint64_t rows = 1ULL << n;

    // One evaluation sweep fills the tables of every root. Assignment bit
    // for slot s sits at position (n - 1 - s), so slot 0 is the most
    // significant bit and a node at depth d with path prefix p covers the
    // contiguous row range [p << (n-d), (p+1) << (n-d)).
    std::vector<std::vector<char>> tables(exprs.roots.size(), std::vector<char>(rows));
    std::vector<char> val(exprs.pool.size());
    for (std::uint64_t row = 0; row < rows; ++row) {
        for (std::size_t i = 0; i < exprs.pool.size(); ++i) {
            const ExprNode& e = exprs.pool[i];
            char v = 0;
            switch (e.kind) {
                case ExprKind::Const0: v = 0; break;
                case ExprKind::Const1: v = 1; break;
                case ExprKind::VarRef:
                    v = static_cast<char>((row >> (n - 1 - e.var)) & 1);
                    break;
                case ExprKind::Not: v = static_cast<char>(!val[e.kids[0]]); break;
                case ExprKind::Buff: v = val[e.kids[0]]; break;
                case ExprKind::Xor:
                    v = static_cast<char>(val[e.kids[0]] ^ val[e.kids[1]]);
                    break;
                case ExprKind::Xnor:
                    v = static_cast<char>(!(val[e.kids[0]] ^ val[e.kids[1]]));
                    break;
                case ExprKind::And:
                case ExprKind::Nand: {
                    v = 1;
                    for (ExprId k : e.kids) v = static_cast<char>(v && val[k]);
                    if (e.kind == ExprKind::Nand) v = static_cast<char>(!v);
                    break;
                }
                case ExprKind::Or:
                case ExprKind::Nor: {
                    v = 0;
                    for (ExprId k : e.kids) v = static_cast<char>(v || val[k]);
                    if (e.kind == ExprKind::Nor) v = static_cast<char>(!v);
                    break;
                }
            }
            val[i] = v;
        }
        for (std::size_t r = 0; r < exprs.roots.size(); ++r)
            tables[r][row] = val[exprs.roots[r]];
    }

    OracleStore store;
    std::set<std::int64_t> root_ids;
    for (const auto& table : tables) {
        // Reduce the complete decision tree bottom-up; merging of equal
        // children plus hash-consing yields the canonical shared DAG.
        std::function<std::int64_t(int, std::uint64_t)> reduce =
            [&](int depth, std::uint64_t prefix) -> std::int64_t {
            if (depth == n)
                return table[prefix] ? OracleStore::kOne : OracleStore::kZero;
            std::int64_t lo = reduce(depth + 1, prefix << 1);
            std::int64_t hi = reduce(depth + 1, (prefix << 1) | 1);
            return store.mk(depth, lo, hi);
        };
        root_ids.insert(reduce(0, 0));
    }

    std::set<std::int64_t> seen;
    std::vector<std::int64_t> stack;
    for (std::int64_t r : root_ids)
        if (r >= 0 && seen.insert(r).second) stack.push_back(r);
    std::size_t count = 0;
    while (!stack.empty()) {
        std::int64_t id = stack.back();
        stack.pop_back();
        ++count;
        for (std::int64_t kid : {store.nodes[static_cast<std::size_t>(id)].low,
                                 store.nodes[static_cast<std::size_t>(id)].high})
            if (kid >= 0 && seen.insert(kid).second) stack.push_back(kid);
    }
    return count;
}

SlotExprs mbdd_slot_exprs(const Model& m, const VariableOrder& o) {
    SlotAssignment sa = expand_order(o, m);
    SlotExprs se;
    se.slot_count = sa.slot_count;

    auto add = [&se](ExprNode node) {
        se.pool.push_back(std::move(node));
        return static_cast<ExprId>(se.pool.size() - 1);
    };

    // init conjunction over present slots
    {
        std::vector<ExprId> lits;
        for (const auto& v : m.variables) {
            if (v.kind != VarKind::State) continue;
            ExprId ref = add({ExprKind::VarRef, sa.present[v.index], {}});
            lits.push_back(m.init[v.index] ? ref : add({ExprKind::Not, -1, {ref}}));
        }
        if (lits.empty())
            se.roots.push_back(add({ExprKind::Const1, -1, {}}));
        else if (lits.size() == 1)
            se.roots.push_back(lits[0]);
        else
            se.roots.push_back(add({ExprKind::And, -1, std::move(lits)}));
    }

    // T_i = xnor(primed slot, NS_i remapped to present slots); DAG sharing
    // within one next-state function carries over via the memo.
    for (const auto& v : m.variables) {
        if (v.kind != VarKind::State) continue;
        std::unordered_map<ExprId, ExprId> memo;
        std::function<ExprId(ExprId)> copy = [&](ExprId id) -> ExprId {
            auto it = memo.find(id);
            if (it != memo.end()) return it->second;
            ExprNode node = m.pool[id];
            if (node.kind == ExprKind::VarRef) {
                node.var = sa.present[node.var];
            } else {
                for (ExprId& k : node.kids) k = copy(k);
            }
            ExprId nid = add(std::move(node));
            memo.emplace(id, nid);
            return nid;
        };
        ExprId ns = copy(m.next[v.index]);
        ExprId primed = add({ExprKind::VarRef, sa.next[v.index], {}});
        se.roots.push_back(add({ExprKind::Xnor, -1, {primed, ns}}));
    }
    return se;
}

}  // namespace ordermill
