#pragma once

// From classifiers to orders: per-classifier precedence tables, confidence
// voting across tables, greedy cycle elimination, and the topological
// order construction with fan-out selection, optionally filtered through
// context precedence tables.

#include <functional>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "ordermill/features.hpp"
#include "ordermill/learning.hpp"
#include "ordermill/model.hpp"

namespace ordermill {

// Relation over an unordered pair stored with first < second:
// FirstSecond means pair.first precedes pair.second.
enum class PairRelation { Unknown, FirstSecond, SecondFirst };

struct TableEntry {
    PairRelation rel = PairRelation::Unknown;
    double confidence = 0.0;
};

struct PrecedenceTable {
    int nvars = 0;
    std::map<VarPair, TableEntry> entries;
};

struct MergedEntry {
    PairRelation rel = PairRelation::Unknown;
    double confidence = 0.0;
    int votes_first_second = 0;
    int votes_second_first = 0;
};

struct MergedTable {
    int nvars = 0;
    std::map<VarPair, MergedEntry> entries;
};

// Answers the two questions "vi before vj?" / "vj before vi?" with one
// classifier per call; only a clean yes/no disagreement yields a direction
// (confidence = mean of the two supporting leaf confidences), every other
// answer combination is unknown.
PrecedenceTable build_pair_table(const DecisionTree& tree, const std::vector<VarPair>& pairs,
                                 const FeatureExtractor& fx);

// Majority vote per pair, unknown votes ignored; vote ties are unknown.
// Winner confidence = (conf(win) - conf(lose)) / (votes(win) + votes(lose)),
// floored at 0.1.
MergedTable merge_tables(const std::vector<PrecedenceTable>& tables);

struct WeightedEdge {
    int src = -1, dst = -1;
    double weight = 0.0;
};

struct PrecedenceGraph {
    int nvars = 0;
    std::vector<WeightedEdge> edges;
};

PrecedenceGraph precedence_graph(const MergedTable& t);

struct EdgeDecision {
    WeightedEdge edge;
    bool kept = true;
};

struct ResolveResult {
    PrecedenceGraph graph;
    std::vector<EdgeDecision> decisions;
};

// Greedy pass in decreasing confidence (ties by (src, dst)); an edge is
// kept iff it does not close a cycle with the edges already kept.
ResolveResult resolve_cycles(const PrecedenceGraph& g);

enum class CycleMode { Upfront, OnDemand };

// Relation between a and b given that context precedes both;
// FirstSecond means a before b.
using ContextOracle = std::function<PairRelation(int context, int a, int b)>;

VariableOrder ppo(const MergedTable& merged, const std::vector<int>& fanout,
                  CycleMode mode, std::vector<EdgeDecision>* audit = nullptr);

VariableOrder ppo_cpf(const MergedTable& merged, const std::vector<int>& fanout,
                      const ContextOracle& oracle, CycleMode mode,
                      std::vector<EdgeDecision>* audit = nullptr);

// Memoized context tables over triplet classifiers: each query classifies
// the triplet vectors (c, a, b) and (c, b, a) per tree, resolves via the
// pair-order table, and merges across trees with the same voting scheme
// as merge_tables. Queries are answered only inside the classifiers'
// domain -- {context,a} and {context,b} must both be interacting pairs --
// and are unknown otherwise.
class ContextTableCache {
public:
    ContextTableCache(std::vector<DecisionTree> triplet_trees, const FeatureExtractor& fx,
                      const std::vector<VarPair>& interacting);

    PairRelation query(int context, int a, int b);
    ContextOracle oracle();

private:
    std::vector<DecisionTree> trees_;
    const FeatureExtractor& fx_;
    std::vector<std::vector<char>> interacting_;
    std::map<std::tuple<int, int, int>, PairRelation> memo_;  // (context, lo, hi)
};

}  // namespace ordermill
