#include "ordermill/model.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>

namespace ordermill {

int Model::state_count() const {
    int n = 0;
    for (const auto& v : variables)
        if (v.kind == VarKind::State) ++n;
    return n;
}

int Model::input_count() const {
    return var_count() - state_count();
}

int Model::find_var(const std::string& name) const {
    for (const auto& v : variables)
        if (v.name == name) return v.index;
    return -1;
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Statements of the native DSL, one per line; ';' also separates statements.
struct Stmt {
    std::string text;
    int line;
};

std::vector<Stmt> split_statements(const std::string& text) {
    std::vector<Stmt> out;
    std::string cur;
    int line = 1, start_line = 1;
    bool in_comment = false;
    auto flush = [&] {
        std::size_t b = cur.find_first_not_of(" \t\r");
        if (b != std::string::npos) {
            std::size_t e = cur.find_last_not_of(" \t\r");
            out.push_back({cur.substr(b, e - b + 1), start_line});
        }
        cur.clear();
        start_line = line;
    };
    for (char c : text) {
        if (c == '\n') {
            flush();
            ++line;
            start_line = line;
            in_comment = false;
        } else if (in_comment) {
            continue;
        } else if (c == '#') {
            in_comment = true;
        } else if (c == ';') {
            flush();
        } else {
            cur.push_back(c);
        }
    }
    flush();
    return out;
}

// Recursive-descent expression parser over one statement.
// Precedence: ! > & > ^ > | > ==, binaries left-associative. Syntactic
// chains of & and | collapse into one n-ary node.
class ExprParser {
public:
    ExprParser(const std::string& s, int line, const Model& m, std::vector<ExprNode>& pool)
        : s_(s), line_(line), model_(m), pool_(pool) {}

    ExprId parse() {
        ExprId e = parse_xnor();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    ExprId add(ExprNode n) {
        pool_.push_back(std::move(n));
        return static_cast<ExprId>(pool_.size() - 1);
    }

    [[noreturn]] void fail(const std::string& msg) {
        throw ParseError(msg, line_, static_cast<int>(pos_) + 1);
    }

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    bool eat2(const char* op) {
        skip_ws();
        if (pos_ + 1 < s_.size() && s_[pos_] == op[0] && s_[pos_ + 1] == op[1]) {
            pos_ += 2;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    ExprId parse_xnor() {
        ExprId lhs = parse_or();
        while (eat2("==")) {
            ExprId rhs = parse_or();
            lhs = add({ExprKind::Xnor, -1, {lhs, rhs}});
        }
        return lhs;
    }

    ExprId parse_or() {
        ExprId lhs = parse_xor();
        std::vector<ExprId> kids{lhs};
        while (peek() == '|') {
            eat('|');
            kids.push_back(parse_xor());
        }
        if (kids.size() == 1) return lhs;
        return add({ExprKind::Or, -1, std::move(kids)});
    }

    ExprId parse_xor() {
        ExprId lhs = parse_and();
        while (true) {
            skip_ws();
            if (pos_ < s_.size() && s_[pos_] == '^') {
                ++pos_;
                ExprId rhs = parse_and();
                lhs = add({ExprKind::Xor, -1, {lhs, rhs}});
            } else {
                break;
            }
        }
        return lhs;
    }

    ExprId parse_and() {
        ExprId lhs = parse_unary();
        std::vector<ExprId> kids{lhs};
        while (peek() == '&') {
            eat('&');
            kids.push_back(parse_unary());
        }
        if (kids.size() == 1) return lhs;
        return add({ExprKind::And, -1, std::move(kids)});
    }

    ExprId parse_unary() {
        if (eat('!')) {
            ExprId child = parse_unary();
            return add({ExprKind::Not, -1, {child}});
        }
        return parse_atom();
    }

    ExprId parse_atom() {
        skip_ws();
        if (pos_ >= s_.size()) fail("expected expression");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            ExprId e = parse_xnor();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (c == '0' || c == '1') {
            ++pos_;
            return add({c == '0' ? ExprKind::Const0 : ExprKind::Const1, -1, {}});
        }
        if (!ident_start(c)) fail("expected identifier, constant, or '('");
        std::size_t b = pos_;
        while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
        std::string name = s_.substr(b, pos_ - b);
        int v = model_.find_var(name);
        if (v < 0) throw ParseError("undeclared variable '" + name + "'", line_, static_cast<int>(b) + 1);
        return add({ExprKind::VarRef, v, {}});
    }

    const std::string& s_;
    int line_;
    const Model& model_;
    std::vector<ExprNode>& pool_;
    std::size_t pos_ = 0;
};

std::vector<std::string> split_words(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

void declare(Model& m, const std::string& name, VarKind kind, int line) {
    if (name.empty() || !ident_start(name[0]))
        throw ParseError("invalid variable name '" + name + "'", line);
    for (char c : name)
        if (!ident_char(c)) throw ParseError("invalid variable name '" + name + "'", line);
    if (m.find_var(name) >= 0)
        throw ParseError("duplicate declaration of '" + name + "'", line);
    Variable v;
    v.name = name;
    v.kind = kind;
    v.index = m.var_count();
    m.variables.push_back(std::move(v));
    m.next.push_back(kNoExpr);
    m.init.push_back(0);
}

}  // namespace

Model parse_native(const std::string& text) {
    Model m;
    m.name = "model";
    struct PendingNext {
        std::string var;
        std::string expr;
        int line;
    };
    std::vector<PendingNext> pending;
    std::vector<std::pair<std::string, int>> pending_init;  // "name=bit", line

    for (const auto& st : split_statements(text)) {
        std::istringstream is(st.text);
        std::string kw;
        is >> kw;
        if (kw == "model") {
            std::string rest;
            std::getline(is, rest);
            auto words = split_words(rest);
            if (words.size() != 1) throw ParseError("expected 'model <name>'", st.line);
            m.name = words[0];
        } else if (kw == "var" || kw == "input") {
            std::string rest;
            std::getline(is, rest);
            auto words = split_words(rest);
            if (words.empty()) throw ParseError("expected variable names after '" + kw + "'", st.line);
            for (const auto& w : words)
                declare(m, w, kw == "var" ? VarKind::State : VarKind::Input, st.line);
        } else if (kw == "init") {
            std::string rest;
            std::getline(is, rest);
            for (const auto& w : split_words(rest)) pending_init.emplace_back(w, st.line);
        } else if (kw == "next") {
            std::string rest;
            std::getline(is, rest);
            std::size_t asg = rest.find(":=");
            if (asg == std::string::npos) throw ParseError("expected ':=' in next clause", st.line);
            auto lhs = split_words(rest.substr(0, asg));
            if (lhs.size() != 1) throw ParseError("expected 'next <name> := <expr>'", st.line);
            pending.push_back({lhs[0], rest.substr(asg + 2), st.line});
        } else {
            throw ParseError("unknown statement '" + kw + "'", st.line);
        }
    }

    for (const auto& [assign, line] : pending_init) {
        std::size_t eq = assign.find('=');
        if (eq == std::string::npos) throw ParseError("expected '<name>=<0|1>' in init", line);
        std::string name = assign.substr(0, eq);
        std::string val = assign.substr(eq + 1);
        int v = m.find_var(name);
        if (v < 0) throw ParseError("undeclared variable '" + name + "' in init", line);
        if (m.variables[v].kind != VarKind::State)
            throw ParseError("init applies to state variables only ('" + name + "' is an input)", line);
        if (val != "0" && val != "1") throw ParseError("init value must be 0 or 1", line);
        m.init[v] = static_cast<char>(val == "1" ? 1 : 0);
    }

    for (const auto& p : pending) {
        int v = m.find_var(p.var);
        if (v < 0) throw ParseError("undeclared variable '" + p.var + "' in next clause", p.line);
        if (m.variables[v].kind != VarKind::State)
            throw ParseError("next clause for input '" + p.var + "'", p.line);
        if (m.next[v] != kNoExpr)
            throw ParseError("duplicate next clause for '" + p.var + "'", p.line);
        ExprParser ep(p.expr, p.line, m, m.pool);
        m.next[v] = ep.parse();
    }

    for (const auto& v : m.variables)
        if (v.kind == VarKind::State && m.next[v.index] == kNoExpr)
            throw ParseError("state variable '" + v.name + "' missing a next clause");

    return m;
}

namespace {

int prec_of(ExprKind k) {
    switch (k) {
        case ExprKind::Not: return 5;
        case ExprKind::And: return 4;
        case ExprKind::Xor: return 3;
        case ExprKind::Or: return 2;
        case ExprKind::Xnor: return 1;
        default: return 6;  // atoms
    }
}

void print_expr(const Model& m, ExprId id, int parent_prec, std::string& out) {
    const ExprNode& n = m.pool[id];
    switch (n.kind) {
        case ExprKind::Const0: out += '0'; return;
        case ExprKind::Const1: out += '1'; return;
        case ExprKind::VarRef: out += m.variables[n.var].name; return;
        case ExprKind::Not:
            out += '!';
            print_expr(m, n.kids[0], prec_of(ExprKind::Not), out);
            return;
        case ExprKind::Buff:
            // No native spelling; identity.
            print_expr(m, n.kids[0], parent_prec, out);
            return;
        case ExprKind::Nand:
        case ExprKind::Nor: {
            out += "!(";
            const char* op = n.kind == ExprKind::Nand ? " & " : " | ";
            for (std::size_t i = 0; i < n.kids.size(); ++i) {
                if (i) out += op;
                print_expr(m, n.kids[i], n.kind == ExprKind::Nand ? 4 : 2, out);
            }
            out += ')';
            return;
        }
        default: break;
    }
    const char* op = nullptr;
    int prec = prec_of(n.kind);
    switch (n.kind) {
        case ExprKind::And: op = " & "; break;
        case ExprKind::Or: op = " | "; break;
        case ExprKind::Xor: op = " ^ "; break;
        case ExprKind::Xnor: op = " == "; break;
        default: break;
    }
    bool parens = prec < parent_prec;
    // And/Or are n-ary: a same-kind child must keep its parens or it would
    // flatten into the parent on reparse. Xor/Xnor are binary left-folds,
    // so the first operand may sit at equal precedence.
    bool nary = n.kind == ExprKind::And || n.kind == ExprKind::Or;
    if (parens) out += '(';
    for (std::size_t i = 0; i < n.kids.size(); ++i) {
        if (i) out += op;
        print_expr(m, n.kids[i], (i == 0 && !nary) ? prec : prec + 1, out);
    }
    if (parens) out += ')';
}

}  // namespace

std::string print_native(const Model& m) {
    std::string out = "model " + m.name + "\n";
    std::string states, inputs;
    for (const auto& v : m.variables)
        (v.kind == VarKind::State ? states : inputs) += " " + v.name;
    if (!states.empty()) out += "var" + states + "\n";
    if (!inputs.empty()) out += "input" + inputs + "\n";
    if (m.state_count() > 0) {
        out += "init";
        for (const auto& v : m.variables)
            if (v.kind == VarKind::State)
                out += " " + v.name + "=" + (m.init[v.index] ? "1" : "0");
        out += "\n";
    }
    for (const auto& v : m.variables) {
        if (v.kind != VarKind::State) continue;
        out += "next " + v.name + " := ";
        print_expr(m, m.next[v.index], 0, out);
        out += "\n";
    }
    return out;
}

namespace {

struct BenchLine {
    enum Kind { Input, Output, Gate } kind;
    std::string lhs;
    std::string gate;           // upper-cased
    std::vector<std::string> args;
    int line;
};

std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<BenchLine> lex_bench(const std::string& text) {
    std::vector<BenchLine> out;
    std::istringstream is(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.resize(hash);
        std::string line = trim(raw);
        if (line.empty()) continue;

        auto parse_call = [&](const std::string& s, std::string& name,
                              std::vector<std::string>& args) {
            std::size_t lp = s.find('(');
            std::size_t rp = s.rfind(')');
            if (lp == std::string::npos || rp == std::string::npos || rp < lp)
                throw ParseError("expected '(...)'", lineno);
            if (!trim(s.substr(rp + 1)).empty())
                throw ParseError("unexpected trailing input", lineno);
            name = trim(s.substr(0, lp));
            std::string inner = s.substr(lp + 1, rp - lp - 1);
            std::size_t pos = 0;
            while (true) {
                std::size_t comma = inner.find(',', pos);
                std::string a = trim(inner.substr(pos, comma == std::string::npos
                                                           ? std::string::npos
                                                           : comma - pos));
                if (!a.empty()) args.push_back(a);
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
        };

        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            std::string head;
            std::vector<std::string> args;
            parse_call(line, head, args);
            head = upper(head);
            if (head != "INPUT" && head != "OUTPUT")
                throw ParseError("expected INPUT(...), OUTPUT(...), or '<name> = GATE(...)'", lineno);
            if (args.size() != 1)
                throw ParseError(head + " takes exactly one signal", lineno);
            out.push_back({head == "INPUT" ? BenchLine::Input : BenchLine::Output,
                           args[0], "", {}, lineno});
        } else {
            std::string lhs = trim(line.substr(0, eq));
            if (lhs.empty()) throw ParseError("missing signal name before '='", lineno);
            std::string gate;
            std::vector<std::string> args;
            parse_call(line.substr(eq + 1), gate, args);
            out.push_back({BenchLine::Gate, lhs, upper(gate), std::move(args), lineno});
        }
    }
    return out;
}

}  // namespace

Model parse_bench(const std::string& text) {
    auto lines = lex_bench(text);

    Model m;
    m.name = "bench";

    struct GateDef {
        std::string gate;
        std::vector<std::string> args;
        int line;
    };
    std::map<std::string, GateDef> gates;  // combinational definitions
    std::vector<std::pair<std::string, std::string>> dffs;  // output, input signal
    std::vector<std::string> outputs;

    auto check_arity = [](const GateDef& g) {
        std::size_t n = g.args.size();
        if (g.gate == "NOT" || g.gate == "BUFF") {
            if (n != 1) throw ParseError(g.gate + " takes exactly one operand", g.line);
        } else if (g.gate == "AND" || g.gate == "OR" || g.gate == "NAND" || g.gate == "NOR") {
            if (n < 2) throw ParseError(g.gate + " takes at least two operands", g.line);
        } else if (g.gate == "XOR" || g.gate == "XNOR") {
            if (n < 2) throw ParseError(g.gate + " takes at least two operands", g.line);
        } else {
            throw ParseError("unknown gate '" + g.gate + "'", g.line);
        }
    };

    for (const auto& l : lines) {
        switch (l.kind) {
            case BenchLine::Input:
                declare(m, l.lhs, VarKind::Input, l.line);
                break;
            case BenchLine::Output:
                outputs.push_back(l.lhs);
                break;
            case BenchLine::Gate:
                if (m.find_var(l.lhs) >= 0 || gates.count(l.lhs))
                    throw ParseError("duplicate declaration of '" + l.lhs + "'", l.line);
                if (l.gate == "DFF") {
                    if (l.args.size() != 1)
                        throw ParseError("DFF takes exactly one operand", l.line);
                    declare(m, l.lhs, VarKind::State, l.line);
                    dffs.emplace_back(l.lhs, l.args[0]);
                } else {
                    GateDef g{l.gate, l.args, l.line};
                    check_arity(g);
                    gates.emplace(l.lhs, std::move(g));
                }
                break;
        }
    }

    // Expand combinational logic into the expression pool, one pool node per
    // netlist gate (n-ary XOR/XNOR left-folds into binary nodes).
    std::unordered_map<std::string, ExprId> built;
    enum class Mark { White, Gray, Black };
    std::unordered_map<std::string, Mark> marks;

    auto add_node = [&m](ExprNode n) {
        m.pool.push_back(std::move(n));
        return static_cast<ExprId>(m.pool.size() - 1);
    };

    // Iterative DFS; gray-on-stack detects combinational cycles.
    std::function<ExprId(const std::string&, int)> build_signal =
        [&](const std::string& sig, int use_line) -> ExprId {
        int v = m.find_var(sig);
        if (v >= 0) return add_node({ExprKind::VarRef, v, {}});
        auto it = gates.find(sig);
        if (it == gates.end())
            throw ParseError("dangling signal '" + sig + "' (used but never defined)", use_line);
        auto cached = built.find(sig);
        if (cached != built.end()) return cached->second;
        if (marks[sig] == Mark::Gray)
            throw ParseError("combinational cycle through '" + sig + "'", it->second.line);
        marks[sig] = Mark::Gray;
        const GateDef& g = it->second;
        std::vector<ExprId> kids;
        kids.reserve(g.args.size());
        for (const auto& a : g.args) kids.push_back(build_signal(a, g.line));
        ExprKind kind;
        if (g.gate == "AND") kind = ExprKind::And;
        else if (g.gate == "OR") kind = ExprKind::Or;
        else if (g.gate == "NAND") kind = ExprKind::Nand;
        else if (g.gate == "NOR") kind = ExprKind::Nor;
        else if (g.gate == "NOT") kind = ExprKind::Not;
        else if (g.gate == "BUFF") kind = ExprKind::Buff;
        else if (g.gate == "XOR" || g.gate == "XNOR") {
            ExprKind k2 = g.gate == "XOR" ? ExprKind::Xor : ExprKind::Xnor;
            ExprId acc = kids[0];
            for (std::size_t i = 1; i < kids.size(); ++i)
                acc = add_node({k2, -1, {acc, kids[i]}});
            marks[sig] = Mark::Black;
            built.emplace(sig, acc);
            return acc;
        } else {
            throw ParseError("unknown gate '" + g.gate + "'", g.line);
        }
        ExprId id = add_node({kind, -1, std::move(kids)});
        marks[sig] = Mark::Black;
        built.emplace(sig, id);
        return id;
    };

    for (const auto& [out_sig, in_sig] : dffs) {
        int v = m.find_var(out_sig);
        if (m.find_var(in_sig) < 0 && !gates.count(in_sig))
            throw ParseError("DFF '" + out_sig + "' fed by undefined signal '" + in_sig + "'");
        m.next[v] = build_signal(in_sig, 0);
    }

    for (const auto& sig : outputs)
        if (m.find_var(sig) < 0 && !gates.count(sig))
            throw ParseError("dangling signal '" + sig + "' (used but never defined)");

    return m;
}

ConnectivityGraph build_connectivity_graph(const Model& m) {
    ConnectivityGraph g;
    const int nvars = m.var_count();
    g.vertices.resize(nvars);
    g.gate_expr.assign(nvars, kNoExpr);
    for (int v = 0; v < nvars; ++v) {
        g.vertices[v].is_gate = false;
        g.vertices[v].var = v;
    }
    g.ns_root.assign(nvars, -1);

    std::vector<int> vertex_of_expr(m.pool.size(), -1);
    std::vector<std::pair<int, int>> edges;  // src vertex -> dst gate vertex

    auto new_gate = [&](ExprKind kind, ExprId e) {
        ConnectivityGraph::Vertex gv;
        gv.is_gate = true;
        gv.gate_kind = kind;
        g.vertices.push_back(gv);
        g.gate_expr.push_back(e);
        return g.vertex_count() - 1;
    };

    // Deterministic numbering: gates are numbered on first visit, walking
    // state variables in index order and operands left to right.
    std::function<int(ExprId)> visit = [&](ExprId e) -> int {
        const ExprNode& n = m.pool[e];
        if (n.kind == ExprKind::VarRef) return g.var_vertex(n.var);
        if (n.kind == ExprKind::Const0 || n.kind == ExprKind::Const1) return -1;
        if (vertex_of_expr[e] >= 0) return vertex_of_expr[e];
        int gv = new_gate(n.kind, e);
        vertex_of_expr[e] = gv;
        for (ExprId kid : n.kids) {
            int src = visit(kid);
            if (src >= 0) edges.emplace_back(src, gv);
        }
        return gv;
    };

    for (int v = 0; v < nvars; ++v) {
        if (!m.is_state(v)) continue;
        ExprId root = m.next[v];
        const ExprNode& n = m.pool[root];
        if (n.kind == ExprKind::VarRef || n.kind == ExprKind::Const0 ||
            n.kind == ExprKind::Const1) {
            // Leaf next-state function: synthesize an identity gate so the
            // root map always points at a gate vertex.
            int gv = new_gate(ExprKind::Buff, root);
            if (n.kind == ExprKind::VarRef) edges.emplace_back(g.var_vertex(n.var), gv);
            g.ns_root[v] = gv;
        } else {
            g.ns_root[v] = visit(root);
        }
    }

    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    g.out.assign(g.vertex_count(), {});
    g.in.assign(g.vertex_count(), {});
    for (auto [s, d] : edges) {
        g.out[s].push_back(d);
        g.in[d].push_back(s);
    }
    return g;
}

std::vector<int> support(const Model& m, int v) {
    if (v < 0 || v >= m.var_count()) throw std::out_of_range("no such variable");
    if (!m.is_state(v))
        throw std::invalid_argument("variable '" + m.variables[v].name +
                                    "' is an input (no next-state function)");
    std::vector<char> seen_expr(m.pool.size(), 0);
    std::vector<char> in_sup(m.var_count(), 0);
    std::vector<ExprId> stack{m.next[v]};
    while (!stack.empty()) {
        ExprId e = stack.back();
        stack.pop_back();
        if (seen_expr[e]) continue;
        seen_expr[e] = 1;
        const ExprNode& n = m.pool[e];
        if (n.kind == ExprKind::VarRef) in_sup[n.var] = 1;
        for (ExprId kid : n.kids) stack.push_back(kid);
    }
    std::vector<int> out;
    for (int i = 0; i < m.var_count(); ++i)
        if (in_sup[i]) out.push_back(i);
    return out;
}

std::vector<VarPair> interacting_pairs(const Model& m) {
    std::set<VarPair> pairs;
    for (int v = 0; v < m.var_count(); ++v) {
        if (!m.is_state(v)) continue;
        auto sup = support(m, v);
        for (std::size_t i = 0; i < sup.size(); ++i)
            for (std::size_t j = i + 1; j < sup.size(); ++j)
                pairs.emplace(sup[i], sup[j]);
    }
    return {pairs.begin(), pairs.end()};
}

std::vector<int> variable_fanout(const ConnectivityGraph& g) {
    std::vector<int> fan;
    for (int v = 0; v < g.vertex_count(); ++v) {
        if (g.vertices[v].is_gate) break;
        fan.push_back(static_cast<int>(g.out[v].size()));
    }
    return fan;
}

}  // namespace ordermill
