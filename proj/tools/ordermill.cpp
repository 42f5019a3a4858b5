// ordermill: learning-based static variable ordering for BDDs.
// Subcommands: train, order, eval, bench, learning-curve, features.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ordermill/baselines.hpp"
#include "ordermill/parallel.hpp"
#include "ordermill/rng.hpp"
#include "ordermill/stats.hpp"
#include "ordermill/text.hpp"

namespace fs = std::filesystem;
using namespace ordermill;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitResource = 3;
constexpr int kExitSchema = 4;
constexpr int kExitOrderMismatch = 5;
constexpr int kExitUsage = 64;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

Model load_model(const std::string& path, const std::string& format) {
    std::string text = read_file(path);
    std::string fmt = format;
    if (fmt == "auto")
        fmt = fs::path(path).extension() == ".bench" ? "bench" : "native";
    if (fmt == "bench") return parse_bench(text);
    return parse_native(text);
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, ','))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

std::vector<DecisionTree> load_trees(const std::vector<std::string>& specs, TreeKind kind) {
    std::vector<std::string> paths;
    for (const auto& s : specs)
        for (auto& p : split_commas(s)) paths.push_back(p);
    std::vector<DecisionTree> trees;
    for (const auto& p : paths) {
        DecisionTree t = deserialize_tree(read_file(p));
        if (t.schema.names != FeatureSchema::canonical().names)
            throw SchemaError("classifier '" + p + "' does not match the feature schema");
        if (t.kind != kind)
            throw SchemaError("classifier '" + p + "' has the wrong kind for this option");
        trees.push_back(std::move(t));
    }
    return trees;
}

std::string order_file_text(const Model& m, const VariableOrder& o) {
    std::string out;
    for (int v : o) out += m.variables[v].name + "\n";
    return out;
}

VariableOrder read_order_file(const Model& m, const std::string& text) {
    VariableOrder o;
    std::vector<char> seen(m.var_count(), 0);
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::string name;
        if (!(ls >> name)) continue;
        int v = m.find_var(name);
        if (v < 0) throw OrderMismatchError("order names unknown variable '" + name + "'");
        if (seen[v]) throw OrderMismatchError("order lists variable '" + name + "' twice");
        seen[v] = 1;
        o.push_back(v);
    }
    for (const auto& v : m.variables)
        if (!seen[v.index])
            throw OrderMismatchError("order is missing variable '" + v.name + "'");
    return o;
}

std::string audit_csv(const Model& m, const std::vector<EdgeDecision>& decisions) {
    std::string out = "event,source,target,confidence\n";
    for (const auto& d : decisions)
        out += std::string(d.kept ? "kept" : "dropped") + "," +
               m.variables[d.edge.src].name + "," + m.variables[d.edge.dst].name + "," +
               format_double(d.edge.weight) + "\n";
    return out;
}

struct GlobalFlags {
    std::uint64_t seed = 1;
    int threads = default_threads();
    std::size_t node_cap = kDefaultNodeCap;
    double confidence = 0.95;
    bool verbose = false;
};

void add_common(CLI::App* cmd, GlobalFlags& g) {
    cmd->add_option("--seed", g.seed, "Master seed (default 1)")->envname("ORDERMILL_SEED");
    cmd->add_option("--threads", g.threads, "Worker threads")->envname("ORDERMILL_THREADS");
    cmd->add_option("--node-cap", g.node_cap, "Per-evaluation BDD node cap")
        ->envname("ORDERMILL_NODE_CAP");
    cmd->add_flag("--verbose", g.verbose, "Log effective configuration");
}

void banner(const GlobalFlags& g, const std::string& extra) {
    if (!g.verbose) return;
    std::cerr << "ordermill: seed=" << g.seed << " threads=" << g.threads
              << " node-cap=" << g.node_cap << " confidence=" << g.confidence;
    if (!extra.empty()) std::cerr << " " << extra;
    std::cerr << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"learning-based static variable ordering for BDDs"};
    app.require_subcommand(1);

    GlobalFlags g;

    // train
    auto* train = app.add_subcommand("train", "Train precedence classifiers from a model");
    std::vector<std::string> train_models;
    std::string train_format = "auto", out_dir = ".";
    int train_orders = 200, min_samples = 5;
    bool with_triplets = false;
    std::size_t triplet_cap = 200'000;
    train->add_option("--model", train_models, "Model file (repeatable)")->required();
    train->add_option("--format", train_format, "auto|native|bench");
    train->add_option("--orders", train_orders, "Training orders per model (default 200)");
    train->add_option("--confidence", g.confidence, "t-test confidence (default 0.95)");
    train->add_option("--min-samples", min_samples, "Minimum per-side sample (default 5)");
    train->add_option("--triplet-cap", triplet_cap, "Triplet universe cap");
    train->add_flag("--triplets", with_triplets, "Also train triplet classifiers");
    train->add_option("--out-dir", out_dir, "Output directory (default .)");
    add_common(train, g);

    // order
    auto* order_cmd = app.add_subcommand("order", "Produce a variable order for a model");
    std::string order_model, order_format = "auto", algo = "ppo", cycle_res = "on-demand";
    std::string order_out, explain_path;
    std::vector<std::string> pair_specs, triplet_specs;
    order_cmd->add_option("--model", order_model, "Model file")->required();
    order_cmd->add_option("--format", order_format, "auto|native|bench");
    order_cmd->add_option("--classifiers", pair_specs, "Pair classifier files (comma separated)")
        ->required();
    order_cmd->add_option("--triplet-classifiers", triplet_specs,
                          "Triplet classifier files (comma separated)");
    order_cmd->add_option("--algo", algo, "ppo|ppo-cpf (default ppo)");
    order_cmd->add_option("--cycle-resolution", cycle_res, "on-demand|upfront");
    order_cmd->add_option("--out", order_out, "Order file to write")->required();
    order_cmd->add_option("--explain", explain_path, "Write a constraint audit CSV");
    add_common(order_cmd, g);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate an order file against a model");
    std::string eval_model, eval_format = "auto", eval_order;
    eval_cmd->add_option("--model", eval_model, "Model file")->required();
    eval_cmd->add_option("--format", eval_format, "auto|native|bench");
    eval_cmd->add_option("--order", eval_order, "Order file")->required();
    add_common(eval_cmd, g);

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Run the algorithm suite over a model");
    std::string bench_model, bench_format = "auto", bench_csv_path, bench_cycle = "on-demand";
    std::vector<std::string> bench_pair_specs, bench_triplet_specs;
    int bench_random = 200, bench_runs = 10;
    bool bench_timings = false;
    bench_cmd->add_option("--model", bench_model, "Model file")->required();
    bench_cmd->add_option("--format", bench_format, "auto|native|bench");
    bench_cmd->add_option("--classifiers", bench_pair_specs, "Pair classifier files");
    bench_cmd->add_option("--triplet-classifiers", bench_triplet_specs,
                          "Triplet classifier files");
    bench_cmd->add_option("--random", bench_random, "Random orders (default 200)");
    bench_cmd->add_option("--runs", bench_runs, "Runs per static algorithm (default 10)");
    bench_cmd->add_option("--cycle-resolution", bench_cycle, "on-demand|upfront");
    bench_cmd->add_option("--csv", bench_csv_path, "CSV output path")->required();
    bench_cmd->add_flag("--timings", bench_timings,
                        "Record real wall times (CSV no longer byte-reproducible)");
    add_common(bench_cmd, g);

    // learning-curve
    auto* curve_cmd = app.add_subcommand("learning-curve", "Learning curve over training budgets");
    std::string curve_train, curve_test, curve_budgets = "0,20,40,60,80,100,120,140,160,180,200";
    std::string curve_csv_path, curve_format = "auto";
    int curve_repeats = 5, curve_baseline = 200;
    bool curve_no_triplets = false;
    curve_cmd->add_option("--train", curve_train, "Training model files, comma separated")
        ->required();
    curve_cmd->add_option("--test", curve_test, "Held-out test model")->required();
    curve_cmd->add_option("--budgets", curve_budgets, "Budgets, ascending from 0");
    curve_cmd->add_option("--repeats", curve_repeats, "Retrain runs per budget (default 5)");
    curve_cmd->add_option("--baseline-orders", curve_baseline,
                          "Random sample size for budget 0 (default 200)");
    curve_cmd->add_option("--format", curve_format, "auto|native|bench");
    curve_cmd->add_flag("--no-triplets", curve_no_triplets, "Order with plain ppo");
    curve_cmd->add_option("--csv", curve_csv_path, "CSV output path")->required();
    add_common(curve_cmd, g);

    // features
    auto* feat_cmd = app.add_subcommand("features", "Dump pair feature vectors as CSV");
    std::string feat_model, feat_format = "auto", feat_csv_path;
    feat_cmd->add_option("--model", feat_model, "Model file")->required();
    feat_cmd->add_option("--format", feat_format, "auto|native|bench");
    feat_cmd->add_option("--csv", feat_csv_path, "CSV output path")->required();
    add_common(feat_cmd, g);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*train) {
            banner(g, "command=train orders=" + std::to_string(train_orders) +
                          (with_triplets ? " triplets=on" : " triplets=off") +
                          " out-dir=" + out_dir);
            fs::create_directories(out_dir);
            for (std::size_t mi = 0; mi < train_models.size(); ++mi) {
                Model m = load_model(train_models[mi], train_format);
                ConnectivityGraph graph = build_connectivity_graph(m);
                FeatureExtractor fx(m, graph);
                TrainConfig tc;
                tc.orders = train_orders;
                tc.confidence = g.confidence;
                tc.min_samples = min_samples;
                tc.seed = mix64(g.seed, mi);
                tc.triplet_cap = triplet_cap;
                tc.node_cap = g.node_cap;
                tc.threads = g.threads;
                OrderSample sample = generate_and_evaluate(m, tc);
                std::string stem = fs::path(train_models[mi]).stem().string();
                DecisionTree pair_tree = train_pair_classifier(m, fx, sample, tc);
                write_file((fs::path(out_dir) / (stem + ".pair.tree")).string(),
                           serialize_tree(pair_tree));
                if (with_triplets) {
                    DecisionTree trip_tree = train_triplet_classifier(m, fx, sample, tc);
                    write_file((fs::path(out_dir) / (stem + ".triplet.tree")).string(),
                               serialize_tree(trip_tree));
                }
            }
        } else if (*order_cmd) {
            if (algo != "ppo" && algo != "ppo-cpf")
                throw CLI::ValidationError("--algo must be ppo or ppo-cpf");
            if (cycle_res != "on-demand" && cycle_res != "upfront")
                throw CLI::ValidationError("--cycle-resolution must be on-demand or upfront");
            auto pair_trees = load_trees(pair_specs, TreeKind::Pair);
            auto triplet_trees = load_trees(triplet_specs, TreeKind::Triplet);
            if (algo == "ppo-cpf" && triplet_trees.empty())
                throw CLI::ValidationError("ppo-cpf requires --triplet-classifiers");
            if (algo == "ppo") triplet_trees.clear();
            banner(g, "command=order algo=" + algo + " cycle-resolution=" + cycle_res);
            Model m = load_model(order_model, order_format);
            CycleMode mode = cycle_res == "upfront" ? CycleMode::Upfront : CycleMode::OnDemand;
            std::vector<EdgeDecision> audit;
            VariableOrder o = order_with_classifiers(
                m, pair_trees, triplet_trees, mode,
                explain_path.empty() ? nullptr : &audit);
            write_file(order_out, order_file_text(m, o));
            if (!explain_path.empty()) write_file(explain_path, audit_csv(m, audit));
        } else if (*eval_cmd) {
            banner(g, "command=eval");
            Model m = load_model(eval_model, eval_format);
            VariableOrder o = read_order_file(m, read_file(eval_order));
            auto eo = evaluate_order(m, o, g.node_cap);
            if (!eo) throw EvalResourceError("evaluation exceeded the node cap");
            std::cout << "node_count=" << eo->node_count << "\n";
        } else if (*bench_cmd) {
            banner(g, "command=bench random=" + std::to_string(bench_random) +
                          " runs=" + std::to_string(bench_runs));
            Model m = load_model(bench_model, bench_format);
            BenchConfig bc;
            bc.random_runs = bench_random;
            bc.static_runs = bench_runs;
            bc.master_seed = g.seed;
            bc.node_cap = g.node_cap;
            bc.threads = g.threads;
            bc.cycle_mode = bench_cycle == "upfront" ? CycleMode::Upfront : CycleMode::OnDemand;
            bc.pair_trees = load_trees(bench_pair_specs, TreeKind::Pair);
            bc.triplet_trees = load_trees(bench_triplet_specs, TreeKind::Triplet);
            auto rows = run_bench(m, bc);
            write_file(bench_csv_path, bench_csv(rows, bench_timings));
        } else if (*curve_cmd) {
            banner(g, "command=learning-curve budgets=" + curve_budgets);
            std::vector<Model> train_set;
            for (const auto& p : split_commas(curve_train))
                train_set.push_back(load_model(p, curve_format));
            Model test_model = load_model(curve_test, curve_format);
            CurveConfig cc;
            for (const auto& b : split_commas(curve_budgets)) {
                try {
                    cc.budgets.push_back(std::stoi(b));
                } catch (const std::exception&) {
                    throw CLI::ValidationError("--budgets must be a comma list of integers");
                }
            }
            bool valid = !cc.budgets.empty() && cc.budgets[0] == 0;
            for (std::size_t i = 1; valid && i < cc.budgets.size(); ++i)
                valid = cc.budgets[i] > cc.budgets[i - 1];
            if (!valid) throw CLI::ValidationError("--budgets must ascend from 0");
            cc.repeats = curve_repeats;
            cc.random_baseline = curve_baseline;
            cc.train.confidence = g.confidence;
            cc.train.seed = g.seed;
            cc.train.node_cap = g.node_cap;
            cc.train.threads = g.threads;
            cc.use_triplets = !curve_no_triplets;
            auto points = learning_curve(train_set, test_model, cc);
            write_file(curve_csv_path, curve_csv(points));
        } else if (*feat_cmd) {
            banner(g, "command=features");
            Model m = load_model(feat_model, feat_format);
            ConnectivityGraph graph = build_connectivity_graph(m);
            FeatureExtractor fx(m, graph);
            const auto& schema = FeatureSchema::canonical();
            std::string csv;
            for (std::size_t i = 0; i < schema.names.size(); ++i)
                csv += (i ? "," : "") + schema.names[i];
            csv += "\n";
            auto pairs = interacting_pairs(m);
            std::vector<std::pair<int, int>> ordered;
            for (auto [a, b] : pairs) {
                ordered.emplace_back(a, b);
                ordered.emplace_back(b, a);
            }
            std::sort(ordered.begin(), ordered.end());
            for (auto [i, j] : ordered) {
                FeatureVector f = fx.pair_features(i, j);
                for (std::size_t c = 0; c < f.size(); ++c)
                    csv += (c ? "," : "") + format_double(f[c]);
                csv += "\n";
            }
            write_file(feat_csv_path, csv);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "ordermill: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "ordermill: parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const NodeLimitError& e) {
        std::cerr << "ordermill: " << e.what() << "\n";
        return kExitResource;
    } catch (const EvalResourceError& e) {
        std::cerr << "ordermill: " << e.what() << "\n";
        return kExitResource;
    } catch (const SchemaError& e) {
        std::cerr << "ordermill: " << e.what() << "\n";
        return kExitSchema;
    } catch (const OrderMismatchError& e) {
        std::cerr << "ordermill: " << e.what() << "\n";
        return kExitOrderMismatch;
    } catch (const std::exception& e) {
        std::cerr << "ordermill: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
