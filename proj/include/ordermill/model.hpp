#pragma once

// Finite-state models: boolean state/input variables, next-state expression
// DAGs, initial-state assignment, and the connectivity graph derived from
// them. Everything here is immutable after construction and safe to share
// across threads.

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ordermill/errors.hpp"

namespace ordermill {

enum class VarKind { State, Input };

struct Variable {
    std::string name;
    VarKind kind = VarKind::State;
    int index = -1;  // dense ordinal, declaration order
};

enum class ExprKind {
    Const0,
    Const1,
    VarRef,
    Not,
    And,
    Or,
    Xor,
    Xnor,
    Nand,
    Nor,
    Buff,
};

using ExprId = std::int32_t;
constexpr ExprId kNoExpr = -1;

// One node of a rooted expression DAG. Nodes live in the owning Model's
// pool; children reference earlier pool entries, so the pool order is a
// topological order and acyclicity holds by construction.
struct ExprNode {
    ExprKind kind = ExprKind::Const0;
    int var = -1;                // for VarRef
    std::vector<ExprId> kids;    // arity >= 2 for And/Or/Nand/Nor, 2 for Xor/Xnor, 1 for Not/Buff
};

struct Model {
    std::string name;
    std::vector<Variable> variables;
    std::vector<ExprNode> pool;
    std::vector<ExprId> next;   // indexed by variable index; kNoExpr for inputs
    std::vector<char> init;     // indexed by variable index; 0 for inputs

    int var_count() const { return static_cast<int>(variables.size()); }
    bool is_state(int v) const { return variables[v].kind == VarKind::State; }
    int state_count() const;
    int input_count() const;
    int find_var(const std::string& name) const;  // -1 if absent
};

// Directed graph of variable vertices (ids 0..n-1, matching variable
// indices) and gate vertices (one per operator node reachable from any
// next-state root). Edges run operand -> consuming gate, so every edge
// targets a gate vertex. ns_root maps a state variable to the gate vertex
// of its next-state expression; a leaf next-state expression (bare varref
// or constant) gets a synthetic identity gate so the root is always a gate.
struct ConnectivityGraph {
    struct Vertex {
        bool is_gate = false;
        ExprKind gate_kind = ExprKind::Buff;  // meaningful for gates
        int var = -1;                         // meaningful for variable vertices
    };
    std::vector<Vertex> vertices;
    std::vector<std::vector<int>> out;      // adjacency, deduplicated, sorted
    std::vector<std::vector<int>> in;
    std::vector<int> ns_root;               // by variable index; -1 for inputs
    std::vector<ExprId> gate_expr;          // by vertex id; kNoExpr for variables

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int var_vertex(int var_index) const { return var_index; }
};

using VarPair = std::pair<int, int>;  // unordered, stored with first < second

Model parse_native(const std::string& text);
std::string print_native(const Model& m);
Model parse_bench(const std::string& text);

ConnectivityGraph build_connectivity_graph(const Model& m);

// Variables with a varref occurrence in NS(v). Throws if v is an input.
std::vector<int> support(const Model& m, int v);

// Unordered pairs {u,w} that appear together in the support of at least
// one next-state function; initial states are not considered.
std::vector<VarPair> interacting_pairs(const Model& m);

// Fan-out per variable: number of distinct gate vertices consuming it.
std::vector<int> variable_fanout(const ConnectivityGraph& g);

}  // namespace ordermill
