#include "ordermill/learning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "ordermill/baselines.hpp"
#include "ordermill/parallel.hpp"
#include "ordermill/rng.hpp"

namespace ordermill {

OrderSample generate_and_evaluate(const Model& m, const TrainConfig& cfg) {
    if (cfg.orders < 0) throw std::invalid_argument("order count must be non-negative");
    std::vector<std::optional<EvaluatedOrder>> slots(cfg.orders);
    parallel_for(static_cast<std::size_t>(cfg.orders), cfg.threads, [&](std::size_t i) {
        for (int attempt = 0; attempt <= cfg.retry_cap; ++attempt) {
            VariableOrder o = random_order(m, mix64(cfg.seed, i, static_cast<std::uint64_t>(attempt)));
            auto eo = evaluate_order(m, o, cfg.node_cap);
            if (eo) {
                slots[i] = std::move(eo);
                return;
            }
        }
    });
    OrderSample s;
    s.orders.reserve(slots.size());
    for (auto& slot : slots) {
        if (!slot) throw EvalResourceError("retry cap exhausted: order evaluation kept exceeding the node cap");
        s.orders.push_back(std::move(*slot));
    }
    return s;
}

namespace {

double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 400;
    constexpr double kEps = 3e-16, kFpMin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                   a * std::log(x) + b * std::log1p(-x);
    double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

TTestResult t_test(const std::vector<double>& a, const std::vector<double>& b,
                   double confidence) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("t-test needs at least two observations per sample");
    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());
    double mean1 = 0, mean2 = 0;
    for (double x : a) mean1 += x;
    for (double x : b) mean2 += x;
    mean1 /= n1;
    mean2 /= n2;
    double ss1 = 0, ss2 = 0;
    for (double x : a) ss1 += (x - mean1) * (x - mean1);
    for (double x : b) ss2 += (x - mean2) * (x - mean2);

    TTestResult r;
    r.df = static_cast<int>(a.size() + b.size()) - 2;
    double pooled = (ss1 + ss2) / r.df;
    if (pooled == 0.0) {
        if (mean1 == mean2) return r;  // t = 0, not significant
        r.t = mean1 < mean2 ? -std::numeric_limits<double>::infinity()
                            : std::numeric_limits<double>::infinity();
        r.significant = true;
        return r;
    }
    double se = std::sqrt(pooled * (1.0 / n1 + 1.0 / n2));
    r.t = (mean1 - mean2) / se;
    double df = static_cast<double>(r.df);
    // Two-sided p-value of Student's t via the incomplete beta identity.
    double p = incomplete_beta(df / 2.0, 0.5, df / (df + r.t * r.t));
    r.significant = p < 1.0 - confidence;
    return r;
}

namespace {

// Tagging direction: the side with the smaller average node count (that
// is, the larger average utility) is preferred. Isolated here because the
// opposite reading would flip every tag globally.
bool first_side_preferred(double mean_first_counts, double mean_second_counts) {
    return mean_first_counts < mean_second_counts;
}

double mean_of(const std::vector<double>& xs) {
    double s = 0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

std::vector<std::vector<int>> order_positions(const OrderSample& s, int nvars) {
    std::vector<std::vector<int>> pos(s.orders.size(), std::vector<int>(nvars, -1));
    for (std::size_t i = 0; i < s.orders.size(); ++i)
        for (std::size_t p = 0; p < s.orders[i].order.size(); ++p)
            pos[i][s.orders[i].order[p]] = static_cast<int>(p);
    return pos;
}

}  // namespace

std::vector<TaggedPairExample> tag_pairs(const OrderSample& s,
                                         const std::vector<VarPair>& pairs,
                                         const FeatureExtractor& fx,
                                         const TrainConfig& cfg) {
    if (s.orders.empty()) throw std::invalid_argument("empty order sample");
    const int nvars = fx.var_count();
    auto pos = order_positions(s, nvars);

    // The t-test itself needs two observations per side, whatever the
    // configured floor says.
    const int side_floor = std::max(cfg.min_samples, 2);

    std::vector<TaggedPairExample> out;
    out.reserve(pairs.size() * 2);
    for (auto [u, w] : pairs) {
        std::vector<double> first_counts, second_counts;  // u before w / w before u
        for (std::size_t i = 0; i < s.orders.size(); ++i) {
            double c = static_cast<double>(s.orders[i].node_count);
            (pos[i][u] < pos[i][w] ? first_counts : second_counts).push_back(c);
        }
        Tag tag = Tag::Unknown;
        double t_stat = 0.0;
        if (static_cast<int>(first_counts.size()) >= side_floor &&
            static_cast<int>(second_counts.size()) >= side_floor) {
            TTestResult r = t_test(first_counts, second_counts, cfg.confidence);
            t_stat = r.t;
            if (r.significant)
                tag = first_side_preferred(mean_of(first_counts), mean_of(second_counts))
                          ? Tag::Plus
                          : Tag::Minus;
        }
        out.push_back({u, w, tag, fx.pair_features(u, w), t_stat});
        out.push_back({w, u, mirror(tag), fx.pair_features(w, u), -t_stat});
    }
    return out;
}

std::vector<Triplet> triplet_universe(const std::vector<VarPair>& pairs, int nvars,
                                      std::size_t cap) {
    std::vector<std::vector<char>> interacting(nvars, std::vector<char>(nvars, 0));
    for (auto [a, b] : pairs) interacting[a][b] = interacting[b][a] = 1;

    std::set<std::tuple<int, int, int>> seen;  // unordered triple, sorted
    std::vector<Triplet> universe;
    for (int i = 0; i < nvars; ++i) {
        for (int j = 0; j < nvars; ++j) {
            if (j == i || !interacting[i][j]) continue;
            for (int k = j + 1; k < nvars; ++k) {
                if (k == i || !interacting[i][k]) continue;
                std::array<int, 3> t{i, j, k};
                std::sort(t.begin(), t.end());
                if (!seen.insert({t[0], t[1], t[2]}).second) continue;
                universe.push_back({i, j, k});
            }
        }
    }
    if (universe.size() > cap) {
        std::stable_sort(universe.begin(), universe.end(), [](const Triplet& a, const Triplet& b) {
            return mix64(a.first, a.second, a.third) < mix64(b.first, b.second, b.third);
        });
        universe.resize(cap);
        std::sort(universe.begin(), universe.end(), [](const Triplet& a, const Triplet& b) {
            return std::tie(a.first, a.second, a.third) < std::tie(b.first, b.second, b.third);
        });
    }
    return universe;
}

std::vector<TaggedTripletExample> tag_triplets(const OrderSample& s,
                                               const std::vector<Triplet>& universe,
                                               const FeatureExtractor& fx,
                                               const TrainConfig& cfg) {
    if (s.orders.empty()) throw std::invalid_argument("empty order sample");
    const int nvars = fx.var_count();
    const int side_floor = std::max(cfg.min_samples, 2);
    auto pos = order_positions(s, nvars);

    // A triple is examined once per unordered {vi,vj,vk}; its candidate
    // contexts are the universe members that share the variable set.
    std::map<std::tuple<int, int, int>, std::vector<int>> contexts;
    for (const auto& t : universe) {
        std::array<int, 3> key{t.first, t.second, t.third};
        std::sort(key.begin(), key.end());
        contexts[{key[0], key[1], key[2]}].push_back(t.first);
    }

    std::vector<TaggedTripletExample> out;
    for (auto& [key, ctxs] : contexts) {
        std::sort(ctxs.begin(), ctxs.end());
        auto [x, y, z] = key;

        // Partition by the first-appearing member; within a context's
        // partition, t-test the remaining pair's node counts.
        struct Candidate {
            int context;
            int a, b;  // remaining pair, a < b
            TTestResult res;
            double mean_a_first, mean_b_first;
        };
        std::vector<Candidate> candidates;
        for (int c : ctxs) {
            int a = c == x ? y : x;
            int b = c == z ? y : z;
            if (a > b) std::swap(a, b);
            std::vector<double> a_first, b_first;
            for (std::size_t i = 0; i < s.orders.size(); ++i) {
                const auto& p = pos[i];
                if (p[c] > p[a] || p[c] > p[b]) continue;  // c not first
                double count = static_cast<double>(s.orders[i].node_count);
                (p[a] < p[b] ? a_first : b_first).push_back(count);
            }
            if (static_cast<int>(a_first.size()) < side_floor ||
                static_cast<int>(b_first.size()) < side_floor)
                continue;
            Candidate cand;
            cand.context = c;
            cand.a = a;
            cand.b = b;
            cand.res = t_test(a_first, b_first, cfg.confidence);
            cand.mean_a_first = mean_of(a_first);
            cand.mean_b_first = mean_of(b_first);
            candidates.push_back(cand);
        }
        if (candidates.empty()) continue;
        const Candidate* best = &candidates[0];
        for (const auto& c : candidates)
            if (std::fabs(c.res.t) > std::fabs(best->res.t)) best = &c;

        auto emit = [&](int c, int first, int second, Tag tag) {
            TaggedTripletExample ex;
            ex.vi = c;
            ex.vj = first;
            ex.vk = second;
            ex.tag = tag;
            ex.features = triplet_features(fx.pair_features(c, first),
                                           fx.pair_features(c, second),
                                           FeatureSchema::canonical());
            out.push_back(std::move(ex));
        };
        if (best->res.significant) {
            int winner = first_side_preferred(best->mean_a_first, best->mean_b_first)
                             ? best->a
                             : best->b;
            int loser = winner == best->a ? best->b : best->a;
            emit(best->context, winner, loser, Tag::Plus);
            emit(best->context, loser, winner, Tag::Minus);
        } else {
            emit(best->context, best->a, best->b, Tag::Unknown);
            emit(best->context, best->b, best->a, Tag::Unknown);
        }
    }
    return out;
}

namespace {

double entropy3(const std::array<int, 3>& counts, int total) {
    double h = 0;
    for (int c : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / total;
        h -= p * std::log2(p);
    }
    return h;
}

int tag_index(Tag t) {
    switch (t) {
        case Tag::Plus: return 0;
        case Tag::Minus: return 1;
        default: return 2;
    }
}

struct TreeBuilder {
    const std::vector<LabeledExample>& examples;
    int feature_count;
    int depth_cap;
    std::vector<TreeNode> nodes;

    int make_leaf(const std::array<int, 3>& counts, int total) {
        int best = 0;
        for (int i = 1; i < 3; ++i)
            if (counts[i] > counts[best]) best = i;
        bool tied = false;
        for (int i = 0; i < 3; ++i)
            if (i != best && counts[i] == counts[best]) tied = true;
        TreeNode leaf;
        leaf.leaf = true;
        leaf.cls = tied ? Tag::Unknown
                        : (best == 0 ? Tag::Plus : best == 1 ? Tag::Minus : Tag::Unknown);
        leaf.confidence = static_cast<double>(counts[best]) / total;
        nodes.push_back(leaf);
        return static_cast<int>(nodes.size()) - 1;
    }

    int build(std::vector<int> idx, int depth) {
        std::array<int, 3> counts{0, 0, 0};
        for (int i : idx) ++counts[tag_index(examples[i].tag)];
        int total = static_cast<int>(idx.size());
        int nonzero = 0;
        for (int c : counts)
            if (c > 0) ++nonzero;
        if (nonzero <= 1 || depth >= depth_cap) return make_leaf(counts, total);

        double h = entropy3(counts, total);
        double best_gain = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;

        std::vector<std::pair<double, int>> vals(idx.size());  // value, tag index
        for (int f = 0; f < feature_count; ++f) {
            for (std::size_t i = 0; i < idx.size(); ++i)
                vals[i] = {examples[idx[i]].features[f], tag_index(examples[idx[i]].tag)};
            std::sort(vals.begin(), vals.end());
            std::array<int, 3> left{0, 0, 0};
            for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                ++left[vals[i].second];
                if (vals[i].first == vals[i + 1].first) continue;
                int nl = static_cast<int>(i) + 1;
                int nr = total - nl;
                std::array<int, 3> right{counts[0] - left[0], counts[1] - left[1],
                                         counts[2] - left[2]};
                double gain = h - (static_cast<double>(nl) / total) * entropy3(left, nl) -
                              (static_cast<double>(nr) / total) * entropy3(right, nr);
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best_feature = f;
                    // The midpoint of two very close values can round up to
                    // the higher one, which would send both sides left; any
                    // threshold in [lower, higher) realizes this boundary.
                    double mid = (vals[i].first + vals[i + 1].first) / 2.0;
                    if (!(mid < vals[i + 1].first)) mid = vals[i].first;
                    best_threshold = mid;
                }
            }
        }
        if (best_feature < 0) return make_leaf(counts, total);

        std::vector<int> left_idx, right_idx;
        for (int i : idx)
            (examples[i].features[best_feature] <= best_threshold ? left_idx : right_idx)
                .push_back(i);
        idx.clear();
        idx.shrink_to_fit();
        TreeNode split;
        split.leaf = false;
        split.feature = best_feature;
        split.threshold = best_threshold;
        nodes.push_back(split);
        int self = static_cast<int>(nodes.size()) - 1;
        int left = build(std::move(left_idx), depth + 1);
        int right = build(std::move(right_idx), depth + 1);
        nodes[self].left = left;
        nodes[self].right = right;
        return self;
    }
};

}  // namespace

bool DecisionTree::operator==(const DecisionTree& other) const {
    if (kind != other.kind || root != other.root || nodes.size() != other.nodes.size())
        return false;
    if (schema.names != other.schema.names) return false;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const TreeNode& a = nodes[i];
        const TreeNode& b = other.nodes[i];
        if (a.leaf != b.leaf) return false;
        if (a.leaf) {
            if (a.cls != b.cls || a.confidence != b.confidence) return false;
        } else {
            if (a.feature != b.feature || a.threshold != b.threshold || a.left != b.left ||
                a.right != b.right)
                return false;
        }
    }
    return true;
}

DecisionTree id3_train(const std::vector<LabeledExample>& examples,
                       const FeatureSchema& schema, TreeKind kind, int depth_cap) {
    if (examples.empty()) throw std::invalid_argument("cannot train on an empty example list");
    for (const auto& e : examples)
        if (e.features.size() != schema.names.size())
            throw std::invalid_argument("example length does not match schema");
    TreeBuilder builder{examples, static_cast<int>(schema.names.size()), depth_cap, {}};
    std::vector<int> idx(examples.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    int root = builder.build(std::move(idx), 0);
    DecisionTree t;
    t.kind = kind;
    t.schema = schema;
    t.nodes = std::move(builder.nodes);
    t.root = root;
    return t;
}

DecisionTree make_leaf_tree(const FeatureSchema& schema, TreeKind kind, Tag cls,
                            double confidence) {
    DecisionTree t;
    t.kind = kind;
    t.schema = schema;
    TreeNode leaf;
    leaf.leaf = true;
    leaf.cls = cls;
    leaf.confidence = confidence;
    t.nodes.push_back(leaf);
    t.root = 0;
    return t;
}

std::pair<Tag, double> classify(const DecisionTree& t, const FeatureVector& v) {
    if (v.size() != t.schema.names.size())
        throw std::invalid_argument("feature vector length does not match the tree schema");
    int cur = t.root;
    while (!t.nodes[cur].leaf)
        cur = v[t.nodes[cur].feature] <= t.nodes[cur].threshold ? t.nodes[cur].left
                                                                : t.nodes[cur].right;
    return {t.nodes[cur].cls, t.nodes[cur].confidence};
}

namespace {

std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

std::string serialize_tree(const DecisionTree& t) {
    std::string out = "ordermill-tree v1\n";
    out += t.kind == TreeKind::Pair ? "kind pair\n" : "kind triplet\n";
    out += "schema " + std::to_string(t.schema.names.size());
    for (const auto& n : t.schema.names) out += " " + n;
    out += "\n";
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const TreeNode& n = t.nodes[i];
        out += "node " + std::to_string(i);
        if (n.leaf) {
            out += " leaf ";
            out += static_cast<char>(n.cls);
            out += " " + fmt17(n.confidence) + "\n";
        } else {
            out += " split " + std::to_string(n.feature) + " " + fmt17(n.threshold) + " " +
                   std::to_string(n.left) + " " + std::to_string(n.right) + "\n";
        }
    }
    out += "root " + std::to_string(t.root) + "\n";
    return out;
}

DecisionTree deserialize_tree(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(is, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    };

    if (!next_line() || line != "ordermill-tree v1")
        throw ParseError("expected header 'ordermill-tree v1'", lineno);

    DecisionTree t;
    if (!next_line()) throw ParseError("missing 'kind' line", lineno);
    if (line == "kind pair") t.kind = TreeKind::Pair;
    else if (line == "kind triplet") t.kind = TreeKind::Triplet;
    else throw ParseError("unknown kind line '" + line + "'", lineno);

    if (!next_line()) throw ParseError("missing 'schema' line", lineno);
    {
        std::istringstream ls(line);
        std::string kw;
        std::size_t n = 0;
        ls >> kw >> n;
        if (kw != "schema" || n == 0) throw ParseError("malformed schema line", lineno);
        t.schema.names.resize(n);
        for (auto& name : t.schema.names)
            if (!(ls >> name)) throw ParseError("schema names truncated", lineno);
        std::string extra;
        if (ls >> extra) throw ParseError("trailing schema tokens", lineno);
        t.schema.zero_capable.assign(n, true);
    }

    std::map<int, TreeNode> by_id;
    std::map<int, int> slot_of;  // file id -> node slot, in file order
    int root_id = -1;
    bool have_root = false;
    while (next_line()) {
        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        if (kw == "node") {
            int id;
            std::string what;
            if (!(ls >> id >> what)) throw ParseError("malformed node line", lineno);
            if (by_id.count(id)) throw ParseError("duplicate node id", lineno);
            TreeNode n;
            if (what == "split") {
                n.leaf = false;
                if (!(ls >> n.feature >> n.threshold >> n.left >> n.right))
                    throw ParseError("malformed split line", lineno);
                if (n.feature < 0 || n.feature >= static_cast<int>(t.schema.names.size()))
                    throw ParseError("split component out of schema range", lineno);
            } else if (what == "leaf") {
                std::string cls;
                if (!(ls >> cls >> n.confidence))
                    throw ParseError("malformed leaf line", lineno);
                if (cls == "+") n.cls = Tag::Plus;
                else if (cls == "-") n.cls = Tag::Minus;
                else if (cls == "?") n.cls = Tag::Unknown;
                else throw ParseError("unknown class token '" + cls + "'", lineno);
                if (!(n.confidence > 0.0 && n.confidence <= 1.0))
                    throw ParseError("leaf confidence out of (0,1]", lineno);
            } else {
                throw ParseError("unknown node form '" + what + "'", lineno);
            }
            slot_of[id] = static_cast<int>(by_id.size());
            by_id.emplace(id, n);
        } else if (kw == "root") {
            if (!(ls >> root_id)) throw ParseError("malformed root line", lineno);
            have_root = true;
        } else {
            throw ParseError("unknown line '" + line + "'", lineno);
        }
    }
    if (!have_root) throw ParseError("missing root line");
    if (!by_id.count(root_id)) throw ParseError("root references a missing node");

    // Nodes keep file order; ids remap to dense slots.
    std::vector<std::pair<int, TreeNode>> ordered(by_id.begin(), by_id.end());
    std::sort(ordered.begin(), ordered.end(),
              [&](const auto& a, const auto& b) { return slot_of[a.first] < slot_of[b.first]; });
    t.nodes.resize(ordered.size());
    for (std::size_t i = 0; i < ordered.size(); ++i) t.nodes[i] = ordered[i].second;
    for (auto& n : t.nodes) {
        if (n.leaf) continue;
        auto l = slot_of.find(n.left);
        auto r = slot_of.find(n.right);
        if (l == slot_of.end() || r == slot_of.end())
            throw ParseError("split references a missing node");
        n.left = l->second;
        n.right = r->second;
    }
    t.root = slot_of[root_id];

    // Reject files whose links form a cycle; classify must terminate.
    {
        std::vector<int> state(t.nodes.size(), 0);  // 0 new, 1 on stack, 2 done
        std::vector<int> stack{t.root};
        while (!stack.empty()) {
            int v = stack.back();
            if (state[v] == 0) {
                state[v] = 1;
                if (!t.nodes[v].leaf) {
                    for (int kid : {t.nodes[v].left, t.nodes[v].right}) {
                        if (state[kid] == 1) throw ParseError("node links form a cycle");
                        if (state[kid] == 0) stack.push_back(kid);
                    }
                }
            } else {
                state[v] = 2;
                stack.pop_back();
            }
        }
    }
    return t;
}

}  // namespace ordermill
