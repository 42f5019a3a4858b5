#pragma once

// Non-learning static ordering baselines: random permutations, the level
// metric with decreasing-level ordering, backward-DFS append with the
// multi-start adaptation and out-edge tie break, and DFS interleaving.
// All are pure functions of (graph, seed).

#include <cstdint>

#include "ordermill/bdd.hpp"
#include "ordermill/model.hpp"

namespace ordermill {

// Vertex -> level. Levels follow edges forward (operand to consumer) and
// additionally the feedback hop from a next-state root gate to the state
// variable it defines; vertices with no successors sit at level 0. State
// feedback makes that relation cyclic, so levels are computed on the
// strongly-connected-component condensation: every vertex of a component
// shares the component's level, one step above its highest successor
// component.
using LevelMap = std::vector<int>;

LevelMap compute_levels(const ConnectivityGraph& g);

VariableOrder random_order(const Model& m, std::uint64_t seed);

// Variables sorted by decreasing level; ties by ascending variable index.
VariableOrder malik_level_order(const ConnectivityGraph& g);

VariableOrder dfs_append_order(const ConnectivityGraph& g);
VariableOrder interleave_order(const ConnectivityGraph& g);

enum class BaselineAlgo { DfsAppend, Interleave };

// Same search, but final-level ties resolve uniformly at random per seed
// instead of by ascending index.
VariableOrder randomized_tiebreak_variant(const ConnectivityGraph& g, BaselineAlgo algo,
                                          std::uint64_t seed);

}  // namespace ordermill
