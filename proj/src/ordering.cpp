#include "ordermill/ordering.hpp"

#include <algorithm>

namespace ordermill {

namespace {

void check_schema(const DecisionTree& tree) {
    if (tree.schema.names != FeatureSchema::canonical().names)
        throw SchemaError("classifier schema does not match the feature extractor");
}

// Table-2 resolution: the answers to "a before b?" and "b before a?" give
// a direction only on a clean yes/no disagreement.
std::pair<PairRelation, double> resolve_answers(Tag ab, double conf_ab, Tag ba,
                                                double conf_ba) {
    if (ab == Tag::Plus && ba == Tag::Minus)
        return {PairRelation::FirstSecond, (conf_ab + conf_ba) / 2.0};
    if (ab == Tag::Minus && ba == Tag::Plus)
        return {PairRelation::SecondFirst, (conf_ab + conf_ba) / 2.0};
    return {PairRelation::Unknown, 0.0};
}

}  // namespace

PrecedenceTable build_pair_table(const DecisionTree& tree, const std::vector<VarPair>& pairs,
                                 const FeatureExtractor& fx) {
    check_schema(tree);
    PrecedenceTable table;
    table.nvars = fx.var_count();
    for (auto [i, j] : pairs) {
        auto [cls_ij, conf_ij] = classify(tree, fx.pair_features(i, j));
        auto [cls_ji, conf_ji] = classify(tree, fx.pair_features(j, i));
        auto [rel, conf] = resolve_answers(cls_ij, conf_ij, cls_ji, conf_ji);
        table.entries[{i, j}] = {rel, conf};
    }
    return table;
}

MergedTable merge_tables(const std::vector<PrecedenceTable>& tables) {
    if (tables.empty()) throw std::invalid_argument("no tables to merge");
    for (const auto& t : tables)
        if (t.nvars != tables[0].nvars)
            throw std::invalid_argument("tables cover inconsistent variable sets");

    MergedTable merged;
    merged.nvars = tables[0].nvars;

    std::map<VarPair, std::array<std::pair<int, double>, 2>> votes;  // (count, conf sum)
    for (const auto& t : tables) {
        for (const auto& [pair, entry] : t.entries) {
            if (entry.rel == PairRelation::Unknown) continue;
            auto& v = votes[pair][entry.rel == PairRelation::FirstSecond ? 0 : 1];
            v.first += 1;
            v.second += entry.confidence;
        }
    }
    for (const auto& [pair, v] : votes) {
        const auto& [n_fs, c_fs] = v[0];
        const auto& [n_sf, c_sf] = v[1];
        MergedEntry e;
        e.votes_first_second = n_fs;
        e.votes_second_first = n_sf;
        if (n_fs == n_sf) {
            e.rel = PairRelation::Unknown;
        } else {
            bool fs = n_fs > n_sf;
            e.rel = fs ? PairRelation::FirstSecond : PairRelation::SecondFirst;
            double conf = ((fs ? c_fs : c_sf) - (fs ? c_sf : c_fs)) / (n_fs + n_sf);
            e.confidence = std::max(conf, 0.1);
        }
        merged.entries[pair] = e;
    }
    return merged;
}

PrecedenceGraph precedence_graph(const MergedTable& t) {
    PrecedenceGraph g;
    g.nvars = t.nvars;
    for (const auto& [pair, entry] : t.entries) {
        if (entry.rel == PairRelation::Unknown) continue;
        if (entry.rel == PairRelation::FirstSecond)
            g.edges.push_back({pair.first, pair.second, entry.confidence});
        else
            g.edges.push_back({pair.second, pair.first, entry.confidence});
    }
    return g;
}

ResolveResult resolve_cycles(const PrecedenceGraph& g) {
    std::vector<WeightedEdge> edges = g.edges;
    std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
    });

    std::vector<std::vector<int>> adj(g.nvars);
    auto reaches = [&](int from, int to) {
        std::vector<char> seen(g.nvars, 0);
        std::vector<int> stack{from};
        seen[from] = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            if (v == to) return true;
            for (int w : adj[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
        }
        return false;
    };

    ResolveResult res;
    res.graph.nvars = g.nvars;
    for (const auto& e : edges) {
        bool closes_cycle = reaches(e.dst, e.src);
        res.decisions.push_back({e, !closes_cycle});
        if (!closes_cycle) {
            adj[e.src].push_back(e.dst);
            res.graph.edges.push_back(e);
        }
    }
    return res;
}

namespace {

struct Orderer {
    int n;
    const std::vector<int>& fanout;
    std::vector<WeightedEdge> active;
    std::vector<char> ordered;
    VariableOrder out;
    std::vector<EdgeDecision>* audit;
    const ContextOracle* oracle;
    std::vector<std::vector<int>> out_adj, in_adj;  // mirrors `active`

    void rebuild_adjacency() {
        out_adj.assign(n, {});
        in_adj.assign(n, {});
        for (const auto& e : active) {
            out_adj[e.src].push_back(e.dst);
            in_adj[e.dst].push_back(e.src);
        }
    }

    bool has_unordered_pred(int v) const {
        for (int u : in_adj[v])
            if (!ordered[u]) return true;
        return false;
    }

    std::vector<int> minimal_set() const {
        std::vector<int> m;
        for (int v = 0; v < n; ++v)
            if (!ordered[v] && !has_unordered_pred(v)) m.push_back(v);
        return m;
    }

    // Greedy cycle elimination restricted to edges whose endpoints are
    // both still unordered; constraints already honored by the emitted
    // prefix are never revisited.
    void resolve_unordered() {
        PrecedenceGraph live;
        live.nvars = n;
        std::vector<WeightedEdge> frozen;
        for (const auto& e : active)
            (!ordered[e.src] && !ordered[e.dst] ? live.edges : frozen).push_back(e);
        ResolveResult res = resolve_cycles(live);
        if (audit)
            audit->insert(audit->end(), res.decisions.begin(), res.decisions.end());
        active = std::move(frozen);
        active.insert(active.end(), res.graph.edges.begin(), res.graph.edges.end());
        rebuild_adjacency();
    }

    int best_by_fanout(const std::vector<int>& cands) const {
        int best = cands[0];
        for (int v : cands)
            if (fanout[v] > fanout[best] || (fanout[v] == fanout[best] && v < best))
                best = v;
        return best;
    }

    // Context precedence filtering: most recently ordered contexts first,
    // iterated to a fixpoint; a removal that would empty the candidate
    // set stops filtering instead.
    void cpf_filter(std::vector<int>& cands) const {
        if (!oracle || out.empty() || cands.size() < 2) return;
        bool changed = true;
        while (changed) {
            changed = false;
            for (auto ctx = out.rbegin(); ctx != out.rend(); ++ctx) {
                for (std::size_t a = 0; a < cands.size(); ++a) {
                    for (std::size_t b = 0; b < cands.size(); ++b) {
                        if (a == b) continue;
                        PairRelation rel = (*oracle)(*ctx, cands[a], cands[b]);
                        if (rel != PairRelation::FirstSecond) continue;
                        if (cands.size() == 1) return;  // never empty the set
                        cands.erase(cands.begin() + static_cast<std::ptrdiff_t>(b));
                        if (b < a) --a;
                        b = cands.size();  // restart inner scan
                        changed = true;
                        if (cands.size() < 2) return;
                    }
                }
            }
        }
    }

    void append(int v) {
        out.push_back(v);
        ordered[v] = 1;
    }

    std::vector<int> transitive_successors(int v) const {
        std::vector<char> seen(n, 0);
        std::vector<int> stack{v}, succ;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int w : out_adj[u]) {
                if (seen[w] || ordered[w]) continue;
                seen[w] = 1;
                succ.push_back(w);
                stack.push_back(w);
            }
        }
        return succ;
    }

    bool constrained_outside(int w, const std::vector<char>& in_succ) const {
        for (int other : out_adj[w])
            if (!ordered[other] && !in_succ[other]) return true;
        for (int other : in_adj[w])
            if (!ordered[other] && !in_succ[other]) return true;
        return false;
    }

    VariableOrder run(CycleMode mode) {
        rebuild_adjacency();
        if (mode == CycleMode::Upfront) resolve_unordered();
        while (static_cast<int>(out.size()) < n) {
            std::vector<int> minimal = minimal_set();
            if (minimal.empty()) {
                resolve_unordered();
                minimal = minimal_set();
            }
            cpf_filter(minimal);
            int v_add = best_by_fanout(minimal);
            append(v_add);

            // Pull in successors of v_add that have no constraint with any
            // still-unordered variable outside the successor set; each must
            // itself be minimal when appended. Context filtering applies to
            // this selection as well, otherwise pulled variables would
            // never see the context tables.
            std::vector<int> succ = transitive_successors(v_add);
            std::vector<char> in_succ(n, 0);
            for (int w : succ) in_succ[w] = 1;
            while (true) {
                std::vector<int> eligible;
                for (int w : succ)
                    if (!ordered[w] && !has_unordered_pred(w) &&
                        !constrained_outside(w, in_succ))
                        eligible.push_back(w);
                if (eligible.empty()) break;
                cpf_filter(eligible);
                append(best_by_fanout(eligible));
            }
        }
        return out;
    }
};

VariableOrder ppo_impl(const MergedTable& merged, const std::vector<int>& fanout,
                       CycleMode mode, const ContextOracle* oracle,
                       std::vector<EdgeDecision>* audit) {
    if (merged.nvars != static_cast<int>(fanout.size()))
        throw std::invalid_argument("fan-out map does not cover the merged table's variables");
    Orderer o{merged.nvars, fanout, precedence_graph(merged).edges,
              std::vector<char>(merged.nvars, 0), {}, audit, oracle, {}, {}};
    return o.run(mode);
}

}  // namespace

VariableOrder ppo(const MergedTable& merged, const std::vector<int>& fanout, CycleMode mode,
                  std::vector<EdgeDecision>* audit) {
    return ppo_impl(merged, fanout, mode, nullptr, audit);
}

VariableOrder ppo_cpf(const MergedTable& merged, const std::vector<int>& fanout,
                      const ContextOracle& oracle, CycleMode mode,
                      std::vector<EdgeDecision>* audit) {
    if (!oracle) return ppo_impl(merged, fanout, mode, nullptr, audit);
    return ppo_impl(merged, fanout, mode, &oracle, audit);
}

ContextTableCache::ContextTableCache(std::vector<DecisionTree> triplet_trees,
                                     const FeatureExtractor& fx,
                                     const std::vector<VarPair>& interacting)
    : trees_(std::move(triplet_trees)), fx_(fx) {
    for (const auto& t : trees_) {
        check_schema(t);
        if (t.kind != TreeKind::Triplet)
            throw SchemaError("context tables require triplet classifiers");
    }
    interacting_.assign(fx.var_count(), std::vector<char>(fx.var_count(), 0));
    for (auto [i, j] : interacting) interacting_[i][j] = interacting_[j][i] = 1;
}

PairRelation ContextTableCache::query(int context, int a, int b) {
    if (context == a || context == b)
        throw std::invalid_argument("context variable must differ from the queried pair");
    if (!interacting_[context][a] || !interacting_[context][b]) return PairRelation::Unknown;
    const int lo = std::min(a, b), hi = std::max(a, b);
    auto key = std::make_tuple(context, lo, hi);
    auto it = memo_.find(key);
    PairRelation canonical;
    if (it != memo_.end()) {
        canonical = it->second;
    } else {
        const auto& schema = FeatureSchema::canonical();
        FeatureVector fwd = triplet_features(fx_.pair_features(context, lo),
                                             fx_.pair_features(context, hi), schema);
        FeatureVector rev = triplet_features(fx_.pair_features(context, hi),
                                             fx_.pair_features(context, lo), schema);
        // Per-tree Table-2 resolution, then the merge_tables voting scheme.
        int votes_fs = 0, votes_sf = 0;
        double conf_fs = 0, conf_sf = 0;
        for (const auto& tree : trees_) {
            auto [cls_lo_hi, conf1] = classify(tree, fwd);
            auto [cls_hi_lo, conf2] = classify(tree, rev);
            auto [rel, conf] = resolve_answers(cls_lo_hi, conf1, cls_hi_lo, conf2);
            if (rel == PairRelation::FirstSecond) {
                ++votes_fs;
                conf_fs += conf;
            } else if (rel == PairRelation::SecondFirst) {
                ++votes_sf;
                conf_sf += conf;
            }
        }
        if (votes_fs == votes_sf) canonical = PairRelation::Unknown;
        else canonical = votes_fs > votes_sf ? PairRelation::FirstSecond
                                             : PairRelation::SecondFirst;
        memo_.emplace(key, canonical);
    }
    if (canonical == PairRelation::Unknown || a == lo) return canonical;
    return canonical == PairRelation::FirstSecond ? PairRelation::SecondFirst
                                                  : PairRelation::FirstSecond;
}

ContextOracle ContextTableCache::oracle() {
    return [this](int context, int a, int b) { return query(context, a, b); };
}

}  // namespace ordermill
