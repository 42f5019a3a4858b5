#pragma once

// Shared test fixtures and small generators.

#include <functional>
#include <string>

#include "ordermill/model.hpp"
#include "ordermill/rng.hpp"

namespace ordermill::testing {

inline const char* kCounterSource =
    "model counter\n"
    "var v0 v1 v2\n"
    "next v0 := !v0\n"
    "next v1 := v0 ^ v1\n"
    "next v2 := v2 ^ (v0 & v1)\n";

inline Model counter_model() { return parse_native(kCounterSource); }

// Random native-expressible model for property tests: every state
// variable gets a random expression over a random subset of variables.
inline Model random_model(std::uint64_t seed, int n_state = 4, int n_input = 2) {
    std::mt19937_64 rng(mix64(seed, 0xfeed));
    std::string src = "model rnd\nvar";
    for (int i = 0; i < n_state; ++i) src += " s" + std::to_string(i);
    src += "\n";
    if (n_input > 0) {
        src += "input";
        for (int i = 0; i < n_input; ++i) src += " i" + std::to_string(i);
        src += "\n";
    }
    auto var_name = [&](int idx) {
        return idx < n_state ? "s" + std::to_string(idx)
                             : "i" + std::to_string(idx - n_state);
    };
    const int total = n_state + n_input;
    // Depth-bounded random expression text.
    std::function<std::string(int)> gen = [&](int depth) -> std::string {
        if (depth == 0 || bounded(rng, 4) == 0)
            return var_name(static_cast<int>(bounded(rng, total)));
        switch (bounded(rng, 5)) {
            case 0: return "!(" + gen(depth - 1) + ")";
            case 1: return "(" + gen(depth - 1) + " & " + gen(depth - 1) + ")";
            case 2: return "(" + gen(depth - 1) + " | " + gen(depth - 1) + ")";
            case 3: return "(" + gen(depth - 1) + " ^ " + gen(depth - 1) + ")";
            default: return "(" + gen(depth - 1) + " == " + gen(depth - 1) + ")";
        }
    };
    for (int i = 0; i < n_state; ++i) {
        src += "next s" + std::to_string(i) + " := " + gen(2 + static_cast<int>(bounded(rng, 2)));
        src += "\n";
    }
    return parse_native(src);
}

}  // namespace ordermill::testing
