#include "ordermill/baselines.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "ordermill/rng.hpp"

namespace ordermill {

namespace {

// Adjacency used by the level metric: graph edges plus the feedback hop
// from each next-state root gate to the state variable it defines.
std::vector<std::vector<int>> level_adjacency(const ConnectivityGraph& g) {
    std::vector<std::vector<int>> adj = g.out;
    for (std::size_t v = 0; v < g.ns_root.size(); ++v) {
        int root = g.ns_root[v];
        if (root >= 0) adj[root].push_back(static_cast<int>(v));
    }
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    return adj;
}

// Iterative Tarjan; components are emitted sinks-first, which is exactly
// the evaluation order the level recurrence needs.
std::vector<int> strongly_connected(const std::vector<std::vector<int>>& adj,
                                    int& comp_count) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<char> on_stack(n, 0);
    std::vector<int> stack;
    struct Frame {
        int v;
        std::size_t child;
    };
    std::vector<Frame> frames;
    int next_index = 0;
    comp_count = 0;

    for (int s = 0; s < n; ++s) {
        if (index[s] != -1) continue;
        frames.push_back({s, 0});
        index[s] = low[s] = next_index++;
        stack.push_back(s);
        on_stack[s] = 1;
        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.child < adj[f.v].size()) {
                int w = adj[f.v][f.child++];
                if (index[w] == -1) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                int v = f.v;
                if (low[v] == index[v]) {
                    while (true) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        comp[w] = comp_count;
                        if (w == v) break;
                    }
                    ++comp_count;
                }
                frames.pop_back();
                if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
            }
        }
    }
    return comp;
}

}  // namespace

LevelMap compute_levels(const ConnectivityGraph& g) {
    auto adj = level_adjacency(g);
    int comp_count = 0;
    std::vector<int> comp = strongly_connected(adj, comp_count);

    // Tarjan numbers components sinks-first, so every cross edge points at
    // a lower component id; ascending id order finalizes successors first.
    std::vector<std::vector<int>> members(comp_count);
    for (int v = 0; v < static_cast<int>(adj.size()); ++v) members[comp[v]].push_back(v);
    std::vector<int> comp_level(comp_count, 0);
    for (int c = 0; c < comp_count; ++c)
        for (int v : members[c])
            for (int w : adj[v])
                if (comp[w] != c)
                    comp_level[c] = std::max(comp_level[c], comp_level[comp[w]] + 1);

    LevelMap levels(adj.size());
    for (std::size_t v = 0; v < adj.size(); ++v) levels[v] = comp_level[comp[v]];
    return levels;
}

VariableOrder random_order(const Model& m, std::uint64_t seed) {
    VariableOrder o(m.var_count());
    std::iota(o.begin(), o.end(), 0);
    std::mt19937_64 rng(mix64(seed));
    shuffle_vec(o, rng);
    return o;
}

VariableOrder malik_level_order(const ConnectivityGraph& g) {
    LevelMap levels = compute_levels(g);
    int nvars = 0;
    while (nvars < g.vertex_count() && !g.vertices[nvars].is_gate) ++nvars;
    VariableOrder o(nvars);
    std::iota(o.begin(), o.end(), 0);
    std::stable_sort(o.begin(), o.end(),
                     [&](int a, int b) { return levels[a] > levels[b]; });
    return o;
}

namespace {

// Chooses among candidates left tied by every earlier rule: lowest id for
// the deterministic builds, a uniform draw for the randomized variant.
struct TieBreak {
    std::mt19937_64* rng = nullptr;
    int pick(const std::vector<int>& tied) const {
        if (!rng || tied.size() == 1) return *std::min_element(tied.begin(), tied.end());
        return tied[static_cast<std::size_t>(bounded(*rng, tied.size()))];
    }
};

struct GuidedDfs {
    const ConnectivityGraph& g;
    const TieBreak& tie;
    int nvars;
    std::vector<char> placed;  // by variable index

    GuidedDfs(const ConnectivityGraph& graph, const TieBreak& t)
        : g(graph), tie(t) {
        nvars = 0;
        while (nvars < g.vertex_count() && !g.vertices[nvars].is_gate) ++nvars;
        placed.assign(nvars, 0);
    }

    // Distinct variable vertices backward-reachable from x (x included if
    // it is a variable) that are not yet placed.
    int reach_unplaced(int x) const {
        std::vector<char> seen(g.vertex_count(), 0);
        std::vector<int> stack{x};
        seen[x] = 1;
        int count = 0;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            if (!g.vertices[v].is_gate && !placed[v]) ++count;
            for (int w : g.in[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
        }
        return count;
    }

    int reach_all(int x) const {
        std::vector<char> seen(g.vertex_count(), 0);
        std::vector<int> stack{x};
        seen[x] = 1;
        int count = 0;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            if (!g.vertices[v].is_gate) ++count;
            for (int w : g.in[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
        }
        return count;
    }

    int out_deg(int v) const { return static_cast<int>(g.out[v].size()); }

    // Max by (reach_unplaced desc, out-degree desc, tie break).
    int pick_guided(std::vector<int> cands) const {
        std::vector<int> best;
        int best_reach = -1;
        for (int c : cands) {
            int r = reach_unplaced(c);
            if (r > best_reach) {
                best_reach = r;
                best.clear();
            }
            if (r == best_reach) best.push_back(c);
        }
        if (best.size() > 1) {
            std::vector<int> best2;
            int best_deg = -1;
            for (int c : best) {
                int d = out_deg(c);
                if (d > best_deg) {
                    best_deg = d;
                    best2.clear();
                }
                if (d == best_deg) best2.push_back(c);
            }
            best = std::move(best2);
        }
        return tie.pick(best);
    }

    // Distinct next-state roots with their static support size, best first.
    struct Root {
        int vertex;
        int support;
    };
    std::vector<Root> roots() const {
        std::vector<Root> out;
        std::vector<char> seen(g.vertex_count(), 0);
        for (int v = 0; v < nvars; ++v) {
            int r = v < static_cast<int>(g.ns_root.size()) ? g.ns_root[v] : -1;
            if (r >= 0 && !seen[r]) {
                seen[r] = 1;
                out.push_back({r, reach_all(r)});
            }
        }
        return out;
    }

    int pick_root(const std::vector<Root>& roots, const std::vector<char>& done) const {
        std::vector<int> best;
        int best_sup = -1;
        for (const auto& r : roots) {
            if (done[r.vertex]) continue;
            if (r.support > best_sup) {
                best_sup = r.support;
                best.clear();
            }
            if (r.support == best_sup) best.push_back(r.vertex);
        }
        if (best.empty()) return -1;
        if (best.size() > 1) {
            std::vector<int> best2;
            int best_deg = -1;
            for (int c : best) {
                int d = out_deg(c);
                if (d > best_deg) {
                    best_deg = d;
                    best2.clear();
                }
                if (d == best_deg) best2.push_back(c);
            }
            best = std::move(best2);
        }
        return tie.pick(best);
    }

    void append_leftovers(VariableOrder& order) {
        std::vector<int> rest;
        for (int v = 0; v < nvars; ++v)
            if (!placed[v]) rest.push_back(v);
        while (!rest.empty()) {
            int v = tie.pick(rest);
            order.push_back(v);
            placed[v] = 1;
            rest.erase(std::find(rest.begin(), rest.end(), v));
        }
    }
};

VariableOrder dfs_append_impl(const ConnectivityGraph& g, const TieBreak& tie) {
    GuidedDfs dfs(g, tie);
    VariableOrder order;
    std::vector<char> visited(g.vertex_count(), 0);

    // Post-order append; backward edges only, so cones are acyclic.
    std::function<void(int)> walk = [&](int v) {
        visited[v] = 1;
        while (true) {
            std::vector<int> cands;
            for (int w : g.in[v])
                if (!visited[w]) cands.push_back(w);
            if (cands.empty()) break;
            walk(dfs.pick_guided(std::move(cands)));
        }
        if (!g.vertices[v].is_gate && !dfs.placed[v]) {
            order.push_back(v);
            dfs.placed[v] = 1;
        }
    };

    auto roots = dfs.roots();
    std::vector<char> done(g.vertex_count(), 0);
    while (true) {
        int r = -1;
        // Roots explored during another cone's walk are spent.
        for (auto& rt : roots)
            if (visited[rt.vertex]) done[rt.vertex] = 1;
        r = dfs.pick_root(roots, done);
        if (r < 0) break;
        done[r] = 1;
        walk(r);
    }
    dfs.append_leftovers(order);
    return order;
}

VariableOrder interleave_impl(const ConnectivityGraph& g, const TieBreak& tie) {
    GuidedDfs dfs(g, tie);
    std::vector<int> order;

    auto insert_after = [&order](int var, int prev) {
        if (prev < 0) {
            order.push_back(var);
            return;
        }
        auto it = std::find(order.begin(), order.end(), prev);
        order.insert(it + 1, var);
    };

    auto roots = dfs.roots();
    std::vector<char> done(g.vertex_count(), 0);
    while (true) {
        int root = dfs.pick_root(roots, done);
        if (root < 0) break;
        done[root] = 1;

        // Each cone is walked in full so already-placed variables still
        // anchor the predecessor chain for newly reached ones.
        std::vector<char> visited(g.vertex_count(), 0);
        int last_var = -1;
        std::function<void(int)> walk = [&](int v) {
            visited[v] = 1;
            while (true) {
                std::vector<int> cands;
                for (int w : g.in[v])
                    if (!visited[w]) cands.push_back(w);
                if (cands.empty()) break;
                walk(dfs.pick_guided(std::move(cands)));
            }
            if (!g.vertices[v].is_gate) {
                if (!dfs.placed[v]) {
                    insert_after(v, last_var);
                    dfs.placed[v] = 1;
                }
                last_var = v;
            }
        };
        walk(root);
    }
    VariableOrder out(order.begin(), order.end());
    dfs.append_leftovers(out);
    return out;
}

}  // namespace

VariableOrder dfs_append_order(const ConnectivityGraph& g) {
    TieBreak tie;
    return dfs_append_impl(g, tie);
}

VariableOrder interleave_order(const ConnectivityGraph& g) {
    TieBreak tie;
    return interleave_impl(g, tie);
}

VariableOrder randomized_tiebreak_variant(const ConnectivityGraph& g, BaselineAlgo algo,
                                          std::uint64_t seed) {
    std::mt19937_64 rng(mix64(seed, 0x7ea5));
    TieBreak tie;
    tie.rng = &rng;
    return algo == BaselineAlgo::DfsAppend ? dfs_append_impl(g, tie)
                                           : interleave_impl(g, tie);
}

}  // namespace ordermill
