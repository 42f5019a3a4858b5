#include "ordermill/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ordermill/baselines.hpp"
#include "ordermill/parallel.hpp"
#include "ordermill/rng.hpp"
#include "ordermill/text.hpp"

namespace ordermill {

DecisionTree train_pair_classifier(const Model& m, const FeatureExtractor& fx,
                                   const OrderSample& s, const TrainConfig& cfg) {
    const auto& schema = FeatureSchema::canonical();
    if (s.orders.empty()) return make_leaf_tree(schema, TreeKind::Pair, Tag::Unknown, 1.0);
    auto tagged = tag_pairs(s, interacting_pairs(m), fx, cfg);
    std::vector<LabeledExample> examples;
    examples.reserve(tagged.size());
    for (auto& ex : tagged) examples.push_back({std::move(ex.features), ex.tag});
    if (examples.empty()) return make_leaf_tree(schema, TreeKind::Pair, Tag::Unknown, 1.0);
    return id3_train(examples, schema, TreeKind::Pair);
}

DecisionTree train_triplet_classifier(const Model& m, const FeatureExtractor& fx,
                                      const OrderSample& s, const TrainConfig& cfg) {
    const auto& schema = FeatureSchema::canonical();
    if (s.orders.empty()) return make_leaf_tree(schema, TreeKind::Triplet, Tag::Unknown, 1.0);
    auto universe = triplet_universe(interacting_pairs(m), m.var_count(), cfg.triplet_cap);
    auto tagged = tag_triplets(s, universe, fx, cfg);
    std::vector<LabeledExample> examples;
    examples.reserve(tagged.size());
    for (auto& ex : tagged) examples.push_back({std::move(ex.features), ex.tag});
    if (examples.empty()) return make_leaf_tree(schema, TreeKind::Triplet, Tag::Unknown, 1.0);
    return id3_train(examples, schema, TreeKind::Triplet);
}

VariableOrder order_with_classifiers(const Model& m,
                                     const std::vector<DecisionTree>& pair_trees,
                                     const std::vector<DecisionTree>& triplet_trees,
                                     CycleMode mode, std::vector<EdgeDecision>* audit) {
    if (pair_trees.empty()) throw std::invalid_argument("at least one pair classifier required");
    ConnectivityGraph g = build_connectivity_graph(m);
    FeatureExtractor fx(m, g);
    auto pairs = interacting_pairs(m);
    std::vector<PrecedenceTable> tables;
    tables.reserve(pair_trees.size());
    for (const auto& t : pair_trees) tables.push_back(build_pair_table(t, pairs, fx));
    MergedTable merged = merge_tables(tables);
    std::vector<int> fanout = variable_fanout(g);
    if (triplet_trees.empty()) return ppo(merged, fanout, mode, audit);
    ContextTableCache cache(triplet_trees, fx, pairs);
    return ppo_cpf(merged, fanout, cache.oracle(), mode, audit);
}

std::vector<BenchResult> run_bench(const Model& m, const BenchConfig& cfg) {
    ConnectivityGraph g = build_connectivity_graph(m);

    struct Entry {
        std::string algorithm;
        int run;
        std::uint64_t seed;
    };
    std::vector<Entry> entries;
    for (int r = 0; r < cfg.random_runs; ++r)
        entries.push_back({"random", r, mix64(cfg.master_seed, hash_str("random"), r)});
    for (int r = 0; r < cfg.static_runs; ++r)
        entries.push_back({"dfs-append", r, mix64(cfg.master_seed, hash_str("dfs-append"), r)});
    for (int r = 0; r < cfg.static_runs; ++r)
        entries.push_back({"interleave", r, mix64(cfg.master_seed, hash_str("interleave"), r)});
    if (!cfg.pair_trees.empty()) {
        entries.push_back({"ppo", 0, mix64(cfg.master_seed, hash_str("ppo"), 0)});
        if (!cfg.triplet_trees.empty())
            entries.push_back({"ppo-cpf", 0, mix64(cfg.master_seed, hash_str("ppo-cpf"), 0)});
    }

    std::vector<BenchResult> rows(entries.size());
    parallel_for(entries.size(), cfg.threads, [&](std::size_t i) {
        const Entry& e = entries[i];
        BenchResult row;
        row.algorithm = e.algorithm;
        row.run = e.run;
        row.seed = e.seed;
        auto t0 = std::chrono::steady_clock::now();
        VariableOrder order;
        if (e.algorithm == "random") {
            order = random_order(m, e.seed);
        } else if (e.algorithm == "dfs-append") {
            order = randomized_tiebreak_variant(g, BaselineAlgo::DfsAppend, e.seed);
        } else if (e.algorithm == "interleave") {
            order = randomized_tiebreak_variant(g, BaselineAlgo::Interleave, e.seed);
        } else if (e.algorithm == "ppo") {
            order = order_with_classifiers(m, cfg.pair_trees, {}, cfg.cycle_mode);
        } else {
            order = order_with_classifiers(m, cfg.pair_trees, cfg.triplet_trees,
                                           cfg.cycle_mode);
        }
        row.order = order;
        auto eo = evaluate_order(m, order, cfg.node_cap);
        if (eo) row.node_count = eo->node_count;
        auto t1 = std::chrono::steady_clock::now();
        row.millis = std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
        rows[i] = std::move(row);
    });
    return rows;
}

std::string bench_csv(const std::vector<BenchResult>& rows, bool with_timings) {
    std::string out = "algorithm,run,seed,node_count,millis,error\n";
    for (const auto& r : rows) {
        out += r.algorithm + "," + std::to_string(r.run) + "," + std::to_string(r.seed) + ",";
        if (r.node_count) out += std::to_string(*r.node_count);
        out += ",";
        out += with_timings ? std::to_string(r.millis) : "0";
        out += ",";
        if (!r.node_count) out += "node_cap_exceeded";
        out += "\n";
    }
    return out;
}

Aggregate aggregate_counts(const std::string& algorithm, const std::vector<double>& counts) {
    if (counts.empty()) throw std::invalid_argument("empty result group for " + algorithm);
    Aggregate a;
    a.algorithm = algorithm;
    a.n = static_cast<int>(counts.size());
    double sum = 0;
    a.min = a.max = counts[0];
    for (double c : counts) {
        sum += c;
        a.min = std::min(a.min, c);
        a.max = std::max(a.max, c);
    }
    a.mean = sum / a.n;
    if (a.n > 1) {
        double ss = 0;
        for (double c : counts) ss += (c - a.mean) * (c - a.mean);
        a.stddev = std::sqrt(ss / (a.n - 1));
    }
    return a;
}

std::vector<Aggregate> aggregate(const std::vector<BenchResult>& rows) {
    std::vector<std::string> algo_order;
    std::map<std::string, std::vector<double>> groups;
    for (const auto& r : rows) {
        if (!r.node_count) continue;
        if (!groups.count(r.algorithm)) algo_order.push_back(r.algorithm);
        groups[r.algorithm].push_back(static_cast<double>(*r.node_count));
    }
    std::vector<Aggregate> out;
    for (const auto& name : algo_order) out.push_back(aggregate_counts(name, groups[name]));
    return out;
}

std::string aggregate_csv(const std::vector<Aggregate>& rows) {
    std::string out = "algorithm,n,mean,std,min,max\n";
    for (const auto& a : rows)
        out += a.algorithm + "," + std::to_string(a.n) + "," + format_double(a.mean) + "," +
               format_double(a.stddev) + "," + format_double(a.min) + "," +
               format_double(a.max) + "\n";
    return out;
}

std::vector<LearningCurvePoint> learning_curve(const std::vector<Model>& train_models,
                                               const Model& test_model,
                                               const CurveConfig& cfg) {
    if (cfg.budgets.empty() || cfg.budgets.front() != 0)
        throw std::invalid_argument("budgets must start at 0");
    for (std::size_t i = 1; i < cfg.budgets.size(); ++i)
        if (cfg.budgets[i] <= cfg.budgets[i - 1])
            throw std::invalid_argument("budgets must be strictly ascending");
    if (train_models.empty()) throw std::invalid_argument("no training models");

    std::vector<LearningCurvePoint> points;
    for (int budget : cfg.budgets) {
        LearningCurvePoint p;
        p.budget = budget;
        std::vector<double> counts;
        if (budget == 0) {
            // No training resources: performance equals random ordering.
            TrainConfig base = cfg.train;
            base.orders = cfg.random_baseline;
            base.seed = mix64(cfg.train.seed, hash_str("baseline"));
            OrderSample s = generate_and_evaluate(test_model, base);
            for (const auto& eo : s.orders)
                counts.push_back(static_cast<double>(eo.node_count));
        } else {
            for (int rep = 0; rep < cfg.repeats; ++rep) {
                std::vector<DecisionTree> pair_trees, triplet_trees;
                for (std::size_t mi = 0; mi < train_models.size(); ++mi) {
                    TrainConfig tc = cfg.train;
                    tc.orders = budget;
                    tc.seed = mix64(cfg.train.seed, static_cast<std::uint64_t>(budget),
                                    mix64(rep, mi));
                    const Model& tm = train_models[mi];
                    ConnectivityGraph g = build_connectivity_graph(tm);
                    FeatureExtractor fx(tm, g);
                    OrderSample s = generate_and_evaluate(tm, tc);
                    pair_trees.push_back(train_pair_classifier(tm, fx, s, tc));
                    if (cfg.use_triplets)
                        triplet_trees.push_back(train_triplet_classifier(tm, fx, s, tc));
                }
                VariableOrder order = order_with_classifiers(
                    test_model, pair_trees, triplet_trees, cfg.cycle_mode);
                auto eo = evaluate_order(test_model, order, cfg.train.node_cap);
                if (!eo) throw EvalResourceError("learning-curve evaluation exceeded the node cap");
                counts.push_back(static_cast<double>(eo->node_count));
            }
        }
        Aggregate a = aggregate_counts("curve", counts);
        p.mean = a.mean;
        p.stddev = a.stddev;
        p.n = a.n;
        points.push_back(p);
    }
    return points;
}

std::string curve_csv(const std::vector<LearningCurvePoint>& points) {
    std::string out = "budget,mean,std,n\n";
    for (const auto& p : points)
        out += std::to_string(p.budget) + "," + format_double(p.mean) + "," +
               format_double(p.stddev) + "," + std::to_string(p.n) + "\n";
    return out;
}

}  // namespace ordermill
