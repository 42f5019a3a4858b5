#pragma once

// Attribute extraction from the model connectivity graph: 9 per-variable
// attributes, 14 symmetric and 6 non-symmetric pair attributes (the
// non-symmetric block is computed with relevance to the pair's first
// variable), and triplet vectors combined componentwise from two pair
// vectors. Distances are edge counts on the undirected view of the graph;
// anything unreachable or with a zero denominator yields the -1 sentinel.

#include <array>
#include <string>
#include <vector>

#include "ordermill/model.hpp"

namespace ordermill {

constexpr double kSentinel = -1.0;
constexpr int kFeatureCount = 38;

using FeatureVector = std::vector<double>;

struct VariableAttrs {
    std::array<double, 9> values;
};

// Component names and zero-capability flags; stable across training and
// inference and serialized with every classifier. Every component can hit
// 0 (or the sentinel) on degenerate models, so all 38 are zero-capable and
// triplet combination is subtraction throughout.
struct FeatureSchema {
    std::vector<std::string> names;
    std::vector<bool> zero_capable;

    static const FeatureSchema& canonical();
};

class FeatureExtractor {
public:
    FeatureExtractor(const Model& m, const ConnectivityGraph& g);

    VariableAttrs variable_attrs(int v) const;
    FeatureVector pair_features(int vi, int vj) const;

    int var_count() const { return nvars_; }

private:
    double pair_sum_distance(int vi, int vj) const;
    std::vector<int> canonical_path(int lo, int hi) const;
    int within_function_distance(int state, int vi, int vj) const;

    const Model& model_;
    const ConnectivityGraph& graph_;
    int nvars_;
    std::vector<std::vector<char>> dep_;         // dep_[i][j]: i depends on j
    std::vector<int> dep_count_;
    std::vector<int> dependents_count_;
    std::vector<int> interact_count_;
    std::vector<int> sup_size_;                  // |support(NS(i))|, 0 for inputs
    std::vector<std::vector<int>> dist_;         // var index -> vertex -> distance
    std::vector<std::vector<std::int64_t>> path_count_;  // shortest-path counts, capped
    std::vector<std::vector<int>> und_;          // undirected adjacency
    std::vector<std::vector<int>> fn_gates_;     // state var -> sorted gate vertices of NS
    std::vector<std::vector<int>> ns_depth_;     // state var -> var -> min varref depth
};

// Componentwise combination: subtraction where zero-capable, division
// otherwise. Throws if a division component sees a zero divisor.
FeatureVector triplet_features(const FeatureVector& pv_ij, const FeatureVector& pv_ik,
                               const FeatureSchema& schema);

}  // namespace ordermill
