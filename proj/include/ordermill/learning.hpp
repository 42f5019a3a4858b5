#pragma once

// Training-order generation and evaluation, statistical example tagging
// via the unpaired (pooled-variance) t-test, decision-tree induction with
// numeric thresholds and leaf confidences, and classifier serialization.

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "ordermill/bdd.hpp"
#include "ordermill/features.hpp"
#include "ordermill/model.hpp"

namespace ordermill {

enum class Tag : char { Plus = '+', Minus = '-', Unknown = '?' };

inline Tag mirror(Tag t) {
    if (t == Tag::Plus) return Tag::Minus;
    if (t == Tag::Minus) return Tag::Plus;
    return Tag::Unknown;
}

struct TrainConfig {
    int orders = 200;
    double confidence = 0.95;
    int min_samples = 5;
    std::uint64_t seed = 1;
    std::size_t triplet_cap = 200'000;
    std::size_t node_cap = kDefaultNodeCap;
    int retry_cap = 20;
    int threads = 1;
};

struct OrderSample {
    std::vector<EvaluatedOrder> orders;
};

// Random orders evaluated under fresh managers; evaluation failures are
// resampled with derived seeds up to cfg.retry_cap, so the result is a
// pure function of (model, cfg).
OrderSample generate_and_evaluate(const Model& m, const TrainConfig& cfg);

struct TTestResult {
    double t = 0.0;
    int df = 0;
    bool significant = false;
};

// Pooled-variance two-sample t statistic with df = n1 + n2 - 2 and
// two-sided significance. Both-variances-zero degenerates by convention:
// equal means are never significant, unequal means always are (t = +-inf).
TTestResult t_test(const std::vector<double>& a, const std::vector<double>& b,
                   double confidence);

// Regularized incomplete beta I_x(a, b); exposed for the statistics path.
double incomplete_beta(double a, double b, double x);

struct TaggedPairExample {
    int vi = -1, vj = -1;
    Tag tag = Tag::Unknown;
    FeatureVector features;
    double t_stat = 0.0;  // diagnostic; t of the (vi first) side
};

std::vector<TaggedPairExample> tag_pairs(const OrderSample& s,
                                         const std::vector<VarPair>& pairs,
                                         const FeatureExtractor& fx,
                                         const TrainConfig& cfg);

struct Triplet {
    int first = -1;   // context variable
    int second = -1;  // canonical j < k
    int third = -1;
};

// Triples (vi; vj, vk) whose pairs {vi,vj} and {vi,vk} both interact,
// deduplicated over the unordered {vi,vj,vk}; when the universe exceeds
// cap it is thinned by deterministic hash selection.
std::vector<Triplet> triplet_universe(const std::vector<VarPair>& pairs, int nvars,
                                      std::size_t cap);

struct TaggedTripletExample {
    int vi = -1, vj = -1, vk = -1;
    Tag tag = Tag::Unknown;
    FeatureVector features;
};

std::vector<TaggedTripletExample> tag_triplets(const OrderSample& s,
                                               const std::vector<Triplet>& universe,
                                               const FeatureExtractor& fx,
                                               const TrainConfig& cfg);

enum class TreeKind { Pair, Triplet };

struct TreeNode {
    bool leaf = true;
    int feature = -1;        // split component
    double threshold = 0.0;  // value <= threshold goes left
    int left = -1, right = -1;
    Tag cls = Tag::Unknown;
    double confidence = 1.0;
};

struct DecisionTree {
    TreeKind kind = TreeKind::Pair;
    FeatureSchema schema;
    std::vector<TreeNode> nodes;
    int root = -1;

    bool operator==(const DecisionTree& other) const;
};

struct LabeledExample {
    FeatureVector features;
    Tag tag = Tag::Unknown;
};

constexpr int kDefaultDepthCap = 25;

// Greedy top-down induction over the three classes; binary splits at
// midpoints of sorted distinct values by information gain. Equal-gain ties
// go to the lowest component index, then the lowest threshold.
DecisionTree id3_train(const std::vector<LabeledExample>& examples,
                       const FeatureSchema& schema, TreeKind kind,
                       int depth_cap = kDefaultDepthCap);

DecisionTree make_leaf_tree(const FeatureSchema& schema, TreeKind kind, Tag cls,
                            double confidence);

std::pair<Tag, double> classify(const DecisionTree& t, const FeatureVector& v);

std::string serialize_tree(const DecisionTree& t);
DecisionTree deserialize_tree(const std::string& text);

}  // namespace ordermill
