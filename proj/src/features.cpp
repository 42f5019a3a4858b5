#include "ordermill/features.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace ordermill {

namespace {

constexpr std::int64_t kPathCountCap = 1 << 20;

// Operator classes for pair-minimal-connection-class.
double connection_class(ExprKind k) {
    switch (k) {
        case ExprKind::And:
        case ExprKind::Nand: return 1.0;
        case ExprKind::Or:
        case ExprKind::Nor: return 2.0;
        case ExprKind::Xor:
        case ExprKind::Xnor: return 3.0;
        case ExprKind::Not:
        case ExprKind::Buff: return 4.0;
        default: return kSentinel;
    }
}

}  // namespace

const FeatureSchema& FeatureSchema::canonical() {
    static const FeatureSchema schema = [] {
        FeatureSchema s;
        const char* variable[] = {
            "variable-dependence",
            "variable-dependency",
            "variable-dependency-size",
            "variable-dependency-average-size",
            "variable-dependence-dependency-ratio",
            "variable-interaction",
            "variable-dependence-percentage",
            "variable-dependency-percentage",
            "variable-interaction-percentage",
        };
        for (const char* n : variable) s.names.push_back(std::string("vi-") + n);
        for (const char* n : variable) s.names.push_back(std::string("vj-") + n);
        const char* pair[] = {
            "pair-minimal-distance",
            "pair-minimal-distance-eval",
            "pair-minimal-dependency",
            "pair-minimal-dependency-eval",
            "pair-minimal-connection-class",
            "pair-minimal-maximal",
            "pair-minimal-maximal-eval",
            "pair-sum-distance",
            "pair-dependency-ns-size",
            "pair-sum-distance-dependency-ratio",
            "pair-mutual-dependence",
            "pair-mutual-dependency",
            "pair-mutual-interaction",
            "pair-mutual-ns-dependency",
            "pair-ns-distance",
            "pair-dependence-ratio",
            "pair-dependency-ratio",
            "pair-interaction-ratio",
            "pair-dependence-flag",
            "pair-interaction-flag",
        };
        for (const char* n : pair) s.names.push_back(n);
        s.zero_capable.assign(s.names.size(), true);
        return s;
    }();
    return schema;
}

FeatureExtractor::FeatureExtractor(const Model& m, const ConnectivityGraph& g)
    : model_(m), graph_(g), nvars_(m.var_count()) {
    dep_.assign(nvars_, std::vector<char>(nvars_, 0));
    sup_size_.assign(nvars_, 0);
    for (int v = 0; v < nvars_; ++v) {
        if (!m.is_state(v)) continue;
        auto sup = support(m, v);
        sup_size_[v] = static_cast<int>(sup.size());
        for (int s : sup) dep_[v][s] = 1;
    }
    dep_count_.assign(nvars_, 0);
    dependents_count_.assign(nvars_, 0);
    interact_count_.assign(nvars_, 0);
    for (int i = 0; i < nvars_; ++i) {
        for (int j = 0; j < nvars_; ++j) {
            if (dep_[i][j]) ++dep_count_[i];
            if (dep_[j][i]) ++dependents_count_[i];
            if (dep_[i][j] || dep_[j][i]) ++interact_count_[i];
        }
    }

    const int nv = g.vertex_count();
    und_.assign(nv, {});
    for (int v = 0; v < nv; ++v) {
        und_[v] = g.out[v];
        und_[v].insert(und_[v].end(), g.in[v].begin(), g.in[v].end());
        std::sort(und_[v].begin(), und_[v].end());
        und_[v].erase(std::unique(und_[v].begin(), und_[v].end()), und_[v].end());
    }

    dist_.assign(nvars_, std::vector<int>(nv, -1));
    path_count_.assign(nvars_, std::vector<std::int64_t>(nv, 0));
    for (int src = 0; src < nvars_; ++src) {
        auto& dist = dist_[src];
        auto& cnt = path_count_[src];
        std::deque<int> queue{src};
        dist[src] = 0;
        cnt[src] = 1;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int w : und_[u]) {
                if (dist[w] < 0) {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
                if (dist[w] == dist[u] + 1)
                    cnt[w] = std::min<std::int64_t>(cnt[w] + cnt[u], kPathCountCap);
            }
        }
    }

    // Gate vertices of each next-state function, via the expr-to-vertex map.
    std::vector<int> vertex_of_expr(m.pool.size(), -1);
    for (int v = 0; v < nv; ++v)
        if (g.vertices[v].is_gate && g.gate_expr[v] != kNoExpr) {
            ExprId e = g.gate_expr[v];
            if (m.pool[e].kind != ExprKind::VarRef && m.pool[e].kind != ExprKind::Const0 &&
                m.pool[e].kind != ExprKind::Const1)
                vertex_of_expr[e] = v;
        }
    fn_gates_.assign(nvars_, {});
    ns_depth_.assign(nvars_, {});
    for (int v = 0; v < nvars_; ++v) {
        if (!m.is_state(v)) continue;
        ns_depth_[v].assign(nvars_, -1);
        std::vector<int> gates{g.ns_root[v]};
        // BFS over the expression DAG records gate vertices and the
        // shallowest depth of each variable occurrence.
        std::deque<std::pair<ExprId, int>> queue{{m.next[v], 0}};
        std::vector<char> seen(m.pool.size(), 0);
        seen[m.next[v]] = 1;
        while (!queue.empty()) {
            auto [e, depth] = queue.front();
            queue.pop_front();
            const ExprNode& n = m.pool[e];
            if (n.kind == ExprKind::VarRef) {
                if (ns_depth_[v][n.var] < 0 || ns_depth_[v][n.var] > depth)
                    ns_depth_[v][n.var] = depth;
                continue;
            }
            if (vertex_of_expr[e] >= 0) gates.push_back(vertex_of_expr[e]);
            for (ExprId kid : n.kids)
                if (!seen[kid]) {
                    seen[kid] = 1;
                    queue.push_back({kid, depth + 1});
                }
        }
        std::sort(gates.begin(), gates.end());
        gates.erase(std::unique(gates.begin(), gates.end()), gates.end());
        fn_gates_[v] = std::move(gates);
    }
}

VariableAttrs FeatureExtractor::variable_attrs(int v) const {
    VariableAttrs a;
    double dependence = dep_count_[v];
    double dependency = dependents_count_[v];
    double dep_size = 0;
    for (int j = 0; j < nvars_; ++j)
        if (dep_[j][v]) dep_size += sup_size_[j];
    a.values[0] = dependence;
    a.values[1] = dependency;
    a.values[2] = dep_size;
    a.values[3] = dependency > 0 ? dep_size / dependency : kSentinel;
    a.values[4] = dependency > 0 ? dependence / dependency : kSentinel;
    a.values[5] = interact_count_[v];
    a.values[6] = dependence / nvars_;
    a.values[7] = dependency / nvars_;
    a.values[8] = static_cast<double>(interact_count_[v]) / nvars_;
    return a;
}

// Lexicographically smallest shortest path between two variable vertices,
// as a vertex sequence; empty when unreachable.
std::vector<int> FeatureExtractor::canonical_path(int lo, int hi) const {
    if (dist_[lo][hi] < 0) return {};
    std::vector<int> path{lo};
    int cur = lo;
    const auto& dist_to_hi = dist_[hi];
    while (cur != hi) {
        int step = dist_to_hi[cur];
        for (int w : und_[cur]) {
            if (dist_to_hi[w] == step - 1) {
                path.push_back(w);
                cur = w;
                break;
            }
        }
    }
    return path;
}

int FeatureExtractor::within_function_distance(int state, int vi, int vj) const {
    // BFS restricted to this function's gate vertices; variable vertices
    // are admissible as leaves throughout.
    const auto& gates = fn_gates_[state];
    auto allowed = [&](int v) {
        if (!graph_.vertices[v].is_gate) return true;
        return std::binary_search(gates.begin(), gates.end(), v);
    };
    std::vector<int> dist(graph_.vertex_count(), -1);
    std::deque<int> queue{vi};
    dist[vi] = 0;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        if (u == vj) return dist[u];
        for (int w : und_[u])
            if (dist[w] < 0 && allowed(w)) {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
    }
    return -1;
}

double FeatureExtractor::pair_sum_distance(int vi, int vj) const {
    double sum = 0;
    bool any = false;
    for (int k = 0; k < nvars_; ++k) {
        if (!dep_[k][vi] || !dep_[k][vj]) continue;
        int d = within_function_distance(k, vi, vj);
        if (d >= 0) {
            sum += d;
            any = true;
        }
    }
    return any ? sum : kSentinel;
}

FeatureVector FeatureExtractor::pair_features(int vi, int vj) const {
    if (vi == vj) throw std::invalid_argument("pair features need two distinct variables");
    FeatureVector f;
    f.reserve(kFeatureCount);
    for (double x : variable_attrs(vi).values) f.push_back(x);
    for (double x : variable_attrs(vj).values) f.push_back(x);

    const int lo = std::min(vi, vj), hi = std::max(vi, vj);
    const int d = dist_[lo][hi];

    f.push_back(d < 0 ? kSentinel : d);                                     // minimal-distance
    f.push_back(d < 0 ? kSentinel
                      : static_cast<double>(d) /
                            static_cast<double>(path_count_[lo][hi]));      // minimal-distance-eval

    auto path = canonical_path(lo, hi);
    std::vector<int> path_gates;
    for (int v : path)
        if (graph_.vertices[v].is_gate) path_gates.push_back(v);
    std::sort(path_gates.begin(), path_gates.end());

    // Next-state functions whose gate set contains every gate of the
    // canonical shortest path.
    int connecting = 0;
    double max_sup = 0;
    if (d >= 0) {
        for (int k = 0; k < nvars_; ++k) {
            if (!model_.is_state(k)) continue;
            const auto& gates = fn_gates_[k];
            bool all = std::includes(gates.begin(), gates.end(), path_gates.begin(),
                                     path_gates.end());
            if (all) {
                ++connecting;
                max_sup = std::max(max_sup, static_cast<double>(sup_size_[k]));
            }
        }
    }
    f.push_back(d < 0 ? kSentinel : connecting);                            // minimal-dependency
    f.push_back(d < 0 || connecting == 0 ? kSentinel
                                         : static_cast<double>(d) / connecting);  // minimal-dependency-eval

    // Connection class of the gate adjacent to the higher-indexed endpoint
    // on the canonical path; the endpoint choice is fixed by the unordered
    // pair so the attribute stays symmetric.
    double cls = kSentinel;
    if (path.size() >= 2) {
        int adj = path[path.size() - 2];
        if (graph_.vertices[adj].is_gate) cls = connection_class(graph_.vertices[adj].gate_kind);
    }
    f.push_back(cls);                                                       // minimal-connection-class

    f.push_back(d < 0 || connecting == 0 ? kSentinel : max_sup);            // minimal-maximal
    f.push_back(d < 0 || max_sup <= 0 ? kSentinel
                                      : static_cast<double>(d) / max_sup);  // minimal-maximal-eval

    double sum_dist = pair_sum_distance(vi, vj);
    f.push_back(sum_dist);                                                  // sum-distance

    double dep_ns_size = 0;
    for (int k = 0; k < nvars_; ++k)
        if (dep_[k][vi] && dep_[k][vj]) dep_ns_size += sup_size_[k];
    f.push_back(dep_ns_size);                                               // dependency-ns-size
    f.push_back(sum_dist < 0 || dep_ns_size == 0 ? kSentinel
                                                 : sum_dist / dep_ns_size);  // sum-distance-dependency-ratio

    int mutual_dependence = 0, mutual_dependency = 0, mutual_interaction = 0;
    for (int k = 0; k < nvars_; ++k) {
        if (dep_[vi][k] && dep_[vj][k]) ++mutual_dependence;
        if (dep_[k][vi] && dep_[k][vj]) ++mutual_dependency;
        bool ik = dep_[vi][k] || dep_[k][vi];
        bool jk = dep_[vj][k] || dep_[k][vj];
        if (ik && jk) ++mutual_interaction;
    }
    f.push_back(mutual_dependence);                                         // mutual-dependence
    f.push_back(mutual_dependency);                                         // mutual-dependency
    f.push_back(mutual_interaction);                                        // mutual-interaction
    f.push_back(dep_[vi][vj] && dep_[vj][vi] ? 1.0 : 0.0);                  // mutual-ns-dependency

    // Non-symmetric block, relevance to vi.
    double ns_dist = kSentinel;
    if (model_.is_state(vi) && ns_depth_[vi][vj] >= 0) ns_dist = ns_depth_[vi][vj];
    f.push_back(ns_dist);                                                   // ns-distance

    auto ratio = [](int a, int b) {
        return b > 0 ? static_cast<double>(a) / b : kSentinel;
    };
    f.push_back(ratio(dep_count_[vi], dep_count_[vj]));                     // dependence-ratio
    f.push_back(ratio(dependents_count_[vi], dependents_count_[vj]));       // dependency-ratio
    f.push_back(ratio(interact_count_[vi], interact_count_[vj]));           // interaction-ratio
    f.push_back(dep_count_[vi] >= dep_count_[vj] ? 1.0 : 0.0);              // dependence-flag
    f.push_back(interact_count_[vi] >= interact_count_[vj] ? 1.0 : 0.0);    // interaction-flag

    return f;
}

FeatureVector triplet_features(const FeatureVector& pv_ij, const FeatureVector& pv_ik,
                               const FeatureSchema& schema) {
    if (pv_ij.size() != schema.names.size() || pv_ik.size() != schema.names.size())
        throw std::invalid_argument("feature vector length does not match schema");
    FeatureVector out(pv_ij.size());
    for (std::size_t l = 0; l < out.size(); ++l) {
        if (schema.zero_capable[l]) {
            out[l] = pv_ij[l] - pv_ik[l];
        } else {
            if (pv_ik[l] == 0.0)
                throw std::logic_error("zero divisor in component marked division-safe: " +
                                       schema.names[l]);
            out[l] = pv_ij[l] / pv_ik[l];
        }
    }
    return out;
}

}  // namespace ordermill
