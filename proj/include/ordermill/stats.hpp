#pragma once

// Experiment harness: runs algorithm suites over a model, aggregates
// node-count statistics, and produces learning curves. The whole harness
// is a pure function of (inputs, master seed); entries run concurrently
// but results are gathered into a fixed total order, so CSV output is
// byte-identical across repeat runs. Wall times are measured but excluded
// from the CSV unless explicitly requested, to keep that guarantee.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ordermill/learning.hpp"
#include "ordermill/ordering.hpp"

namespace ordermill {

struct BenchConfig {
    int random_runs = 200;
    int static_runs = 10;
    std::uint64_t master_seed = 1;
    std::size_t node_cap = kDefaultNodeCap;
    int threads = 1;
    CycleMode cycle_mode = CycleMode::OnDemand;
    std::vector<DecisionTree> pair_trees;      // enables the ppo entry
    std::vector<DecisionTree> triplet_trees;   // with pair trees, enables ppo-cpf
};

struct BenchResult {
    std::string algorithm;
    int run = 0;
    std::uint64_t seed = 0;
    std::optional<std::size_t> node_count;  // empty on evaluation failure
    std::int64_t millis = 0;
    VariableOrder order;
};

std::vector<BenchResult> run_bench(const Model& m, const BenchConfig& cfg);

// Header: algorithm,run,seed,node_count,millis,error
std::string bench_csv(const std::vector<BenchResult>& rows, bool with_timings = false);

struct Aggregate {
    std::string algorithm;
    double mean = 0.0;
    double stddev = 0.0;  // sample std (n-1); 0 when n == 1
    double min = 0.0;
    double max = 0.0;
    int n = 0;
};

std::vector<Aggregate> aggregate(const std::vector<BenchResult>& rows);
Aggregate aggregate_counts(const std::string& algorithm, const std::vector<double>& counts);

// Header: algorithm,n,mean,std,min,max
std::string aggregate_csv(const std::vector<Aggregate>& rows);

struct LearningCurvePoint {
    int budget = 0;
    double mean = 0.0;
    double stddev = 0.0;
    int n = 0;
};

struct CurveConfig {
    std::vector<int> budgets;   // ascending, starting at 0
    int repeats = 5;            // retrain/order runs per nonzero budget
    int random_baseline = 200;  // budget-0 sample size
    TrainConfig train;          // orders field is overridden per budget
    CycleMode cycle_mode = CycleMode::OnDemand;
    bool use_triplets = true;   // order with ppo-cpf when true
};

// For each budget, retrains classifiers from that many evaluated orders
// per training model and orders the test model; budget 0 short-circuits
// to the random-ordering baseline statistic.
std::vector<LearningCurvePoint> learning_curve(const std::vector<Model>& train_models,
                                               const Model& test_model,
                                               const CurveConfig& cfg);

// Header: budget,mean,std,n
std::string curve_csv(const std::vector<LearningCurvePoint>& points);

// Classifier training wrappers shared by the harness and the CLI; an
// empty example set degrades to a single all-unknown leaf.
DecisionTree train_pair_classifier(const Model& m, const FeatureExtractor& fx,
                                   const OrderSample& s, const TrainConfig& cfg);
DecisionTree train_triplet_classifier(const Model& m, const FeatureExtractor& fx,
                                      const OrderSample& s, const TrainConfig& cfg);

// Full ordering pipeline for a model given trained classifiers.
VariableOrder order_with_classifiers(const Model& m,
                                     const std::vector<DecisionTree>& pair_trees,
                                     const std::vector<DecisionTree>& triplet_trees,
                                     CycleMode mode,
                                     std::vector<EdgeDecision>* audit = nullptr);

}  // namespace ordermill
