#pragma once

// Synthetic model families for the end-to-end tests. Both lift the
// two-cluster equality pattern into next-state functions; the guarded
// family adds a shared selector that every sink reads, which plants a
// strong precedence preference (selector early), while the clustered
// family keeps only the adjacency preference between equality partners.

#include <stdexcept>
#include <string>

#include "ordermill/model.hpp"

namespace ordermill::testing {

// Variables: selector input s, data inputs a<p>/b<p> in equality pairs,
// state sinks w<j> with NS(w_j) = (s & (a_p==b_p)) | (!s & (a_q==b_q)).
inline Model guarded_family(int n_vars, int variant) {
    if (n_vars < 8) throw std::invalid_argument("guarded family needs >= 8 variables");
    int k = n_vars < 10 ? 2 : n_vars < 14 ? 3 : 4;
    int sinks = n_vars - 1 - 2 * k;
    std::string src = "model guarded" + std::to_string(n_vars) + "\nvar";
    for (int j = 0; j < sinks; ++j) src += " w" + std::to_string(j);
    src += "\ninput s";
    for (int p = 0; p < k; ++p)
        src += " a" + std::to_string(p) + " b" + std::to_string(p);
    src += "\n";
    for (int j = 0; j < sinks; ++j) {
        int p = (j + variant) % k;
        int q = (j + variant + 1) % k;
        src += "next w" + std::to_string(j) + " := (s & (a" + std::to_string(p) +
               " == b" + std::to_string(p) + ")) | (!s & (a" + std::to_string(q) +
               " == b" + std::to_string(q) + "))\n";
    }
    return parse_native(src);
}

// A symmetric ring of equality clusters: k data pairs a<p>/b<p> and k
// state sinks, sink j conjoining the equalities of pairs {j, j+1, j+2}
// (mod k, rotated by the variant). The rotational symmetry leaves pair
// precedences statistically neutral, and the a-block/b-block declaration
// order makes the fallback order interleave partners -- so any gain has
// to come from context-driven clustering. Needs n divisible by 3.
inline Model clustered_family(int n_vars, int variant) {
    if (n_vars < 9 || n_vars % 3 != 0)
        throw std::invalid_argument("clustered family needs n >= 9 divisible by 3");
    int k = n_vars / 3;
    std::string src = "model clustered" + std::to_string(n_vars) + "\nvar";
    for (int j = 0; j < k; ++j) src += " w" + std::to_string(j);
    src += "\ninput";
    for (int p = 0; p < k; ++p) src += " a" + std::to_string(p);
    for (int p = 0; p < k; ++p) src += " b" + std::to_string(p);
    src += "\n";
    for (int j = 0; j < k; ++j) {
        src += "next w" + std::to_string(j) + " :=";
        for (int d = 0; d < 3; ++d) {
            int p = (j + variant + d) % k;
            src += std::string(d ? " &" : "") + " (a" + std::to_string(p) + " == b" +
                   std::to_string(p) + ")";
        }
        src += "\n";
    }
    return parse_native(src);
}

}  // namespace ordermill::testing
