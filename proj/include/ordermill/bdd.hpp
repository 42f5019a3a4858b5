#pragma once

// Reduced ordered BDD engine without complement edges or garbage
// collection. A manager is created fresh per evaluated order and owns a
// hash-consed node store, so results are a pure function of
// (model, order, node cap). Managers are single-owner; evaluations of
// distinct orders may run fully in parallel.

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "ordermill/errors.hpp"
#include "ordermill/model.hpp"

namespace ordermill {

// A permutation of all model-variable indices.
using VariableOrder = std::vector<int>;

// A state variable at order position p owns two adjacent slots
// (present, next = present + 1); an input owns one slot.
struct SlotAssignment {
    std::vector<int> present;  // by variable index
    std::vector<int> next;     // by variable index; -1 for inputs
    int slot_count = 0;
};

SlotAssignment expand_order(const VariableOrder& o, const Model& m);

using BddNode = std::uint32_t;
constexpr BddNode kFalse = 0;
constexpr BddNode kTrue = 1;
constexpr std::uint32_t kTerminalSlot = std::numeric_limits<std::uint32_t>::max();
constexpr std::size_t kDefaultNodeCap = 5'000'000;

class BddManager {
public:
    explicit BddManager(SlotAssignment slots, std::size_t node_cap = kDefaultNodeCap);

    const SlotAssignment& slots() const { return slots_; }

    BddNode var(int slot);                       // single-variable function
    BddNode mk_not(BddNode a);
    BddNode mk_and(BddNode a, BddNode b);
    BddNode mk_or(BddNode a, BddNode b);
    BddNode mk_xor(BddNode a, BddNode b);
    BddNode mk_xnor(BddNode a, BddNode b);

    std::uint32_t slot_of(BddNode n) const { return nodes_[n].slot; }
    BddNode low(BddNode n) const { return nodes_[n].low; }
    BddNode high(BddNode n) const { return nodes_[n].high; }
    bool is_terminal(BddNode n) const { return n <= kTrue; }
    std::size_t store_size() const { return nodes_.size(); }

    // Distinct non-terminal nodes reachable from the given roots, shared
    // nodes counted once.
    std::size_t count_reachable(const std::vector<BddNode>& roots) const;

private:
    struct Node {
        std::uint32_t slot;
        BddNode low;
        BddNode high;
    };
    enum class Op : std::uint8_t { And, Or, Xor, Not };

    // Exact-equality key; hash collisions only cost probes, never identity.
    struct Key3 {
        std::uint32_t a, b, c;
        bool operator==(const Key3&) const = default;
    };
    struct Key3Hash {
        std::size_t operator()(const Key3& k) const {
            std::uint64_t h = (static_cast<std::uint64_t>(k.a) << 32) ^ k.b;
            h = h * 0x9e3779b97f4a7c15ULL + k.c;
            h ^= h >> 29;
            return static_cast<std::size_t>(h * 0xbf58476d1ce4e5b9ULL);
        }
    };

    BddNode mk_node(std::uint32_t slot, BddNode low, BddNode high);
    BddNode apply(Op op, BddNode a, BddNode b);

    SlotAssignment slots_;
    std::size_t node_cap_;
    std::vector<Node> nodes_;
    std::unordered_map<Key3, BddNode, Key3Hash> unique_;
    std::unordered_map<Key3, BddNode, Key3Hash> cache_;
};

// Builds the canonical node for expression e, mapping varrefs to present
// slots. When next_of >= 0, a varref to that one variable maps to its
// primed slot instead.
BddNode build_expr(BddManager& mgr, const Model& m, ExprId e, int next_of = -1);

// The multi-rooted model BDD: the initial-state predicate plus one
// T_i(V, v'_i) = (v'_i == NS_i(V)) root per state variable, all sharing
// one manager.
struct MBdd {
    std::unique_ptr<BddManager> mgr;
    std::vector<BddNode> roots;  // init first, then T_i in variable order
    std::size_t node_count = 0;
};

MBdd build_mbdd(const Model& m, const VariableOrder& o,
                std::size_t node_cap = kDefaultNodeCap);

std::size_t count_nodes(const MBdd& b);

struct EvaluatedOrder {
    VariableOrder order;
    std::size_t node_count = 0;
    double utility = 0.0;  // 1 / node_count; +inf when node_count == 0
};

// Empty optional means the node cap was exceeded.
std::optional<EvaluatedOrder> evaluate_order(const Model& m, const VariableOrder& o,
                                             std::size_t node_cap = kDefaultNodeCap);

// --- independent verification oracle ----------------------------------
//
// Expressions over slots (varref index = slot number). The oracle fills a
// complete truth table per root and reduces the full binary decision tree
// into a shared canonical DAG. It deliberately shares no code with the
// engine's apply path.

struct SlotExprs {
    std::vector<ExprNode> pool;   // varref.var holds a slot index
    std::vector<ExprId> roots;
    int slot_count = 0;
};

// Non-terminal node count of the shared reduced DAG. slot_count <= 24.
std::size_t truth_table_oracle(const SlotExprs& exprs);

// Slot-space translation of the M-BDD's roots for the given order, for
// feeding the oracle.
SlotExprs mbdd_slot_exprs(const Model& m, const VariableOrder& o);

}  // namespace ordermill
