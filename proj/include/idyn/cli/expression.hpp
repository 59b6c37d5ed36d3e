#pragma once

// Closed-form parameter expressions for run configurations, e.g.
// "2 + sin(t/3)" or "3 - sin(t*x/5)". Whitelisted vocabulary only:
// numbers, the variables t, x, y, the constants pi and e, the operators
// + - * / ^ and the functions sin cos exp log sqrt abs.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "idyn/error.hpp"

namespace idyn::cli {

struct Variables {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

class Expression {
public:
    static Expression parse(std::string_view text) {
        Parser p{text, 0, {}};
        Expression e;
        e.root_ = p.parse_expr();
        p.skip_ws();
        if (p.pos != text.size()) p.fail("unexpected '" + std::string(1, text[p.pos]) + "'");
        e.nodes_ = std::move(p.nodes);
        e.text_ = std::string(text);
        return e;
    }

    [[nodiscard]] double operator()(const Variables& v) const { return eval(root_, v); }
    [[nodiscard]] double operator()(double t, double x = 0.0, double y = 0.0) const { return eval(root_, {t, x, y}); }
    [[nodiscard]] const std::string& text() const noexcept { return text_; }

    /// Whether the variable ('t', 'x' or 'y') occurs in the expression.
    [[nodiscard]] bool uses(char var) const {
        for (const auto& n : nodes_)
            if (n.op == Op::var && n.var == var) return true;
        return false;
    }

    [[nodiscard]] bool is_constant() const { return !uses('t') && !uses('x') && !uses('y'); }

private:
    enum class Op { num, var, neg, add, sub, mul, div, pow, sin, cos, exp, log, sqrt, abs };

    struct Node {
        Op op;
        double value = 0.0;
        char var = 0;
        int lhs = -1;
        int rhs = -1;
    };

    struct Parser {
        std::string_view s;
        std::size_t pos;
        std::vector<Node> nodes;

        [[noreturn]] void fail(const std::string& msg) const {
            throw InputError("expression \"" + std::string(s) + "\", column " + std::to_string(pos + 1) + ": " + msg);
        }
        void skip_ws() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        bool eat(char c) {
            skip_ws();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }
        int push(Node n) {
            nodes.push_back(n);
            return static_cast<int>(nodes.size()) - 1;
        }
        int parse_expr() {
            int lhs = parse_term();
            for (;;) {
                if (eat('+')) lhs = push({Op::add, 0, 0, lhs, parse_term()});
                else if (eat('-')) lhs = push({Op::sub, 0, 0, lhs, parse_term()});
                else return lhs;
            }
        }
        int parse_term() {
            int lhs = parse_unary();
            for (;;) {
                if (eat('*')) lhs = push({Op::mul, 0, 0, lhs, parse_unary()});
                else if (eat('/')) lhs = push({Op::div, 0, 0, lhs, parse_unary()});
                else return lhs;
            }
        }
        int parse_unary() {
            if (eat('-')) return push({Op::neg, 0, 0, parse_unary(), -1});
            if (eat('+')) return parse_unary();
            return parse_power();
        }
        int parse_power() {
            const int base = parse_primary();
            if (eat('^')) return push({Op::pow, 0, 0, base, parse_unary()});
            return base;
        }
        int parse_primary() {
            skip_ws();
            if (pos >= s.size()) fail("unexpected end of expression");
            const char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                const std::string rest(s.substr(pos));
                char* end = nullptr;
                const double v = std::strtod(rest.c_str(), &end);
                if (end == rest.c_str()) fail("malformed number");
                pos += static_cast<std::size_t>(end - rest.c_str());
                return push({Op::num, v});
            }
            if (eat('(')) {
                const int inner = parse_expr();
                if (!eat(')')) fail("missing ')'");
                return inner;
            }
            if (std::isalpha(static_cast<unsigned char>(c))) {
                const std::size_t start = pos;
                while (pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos]))) ++pos;
                const std::string_view name = s.substr(start, pos - start);
                if (name == "t" || name == "x" || name == "y") return push({Op::var, 0, name[0]});
                if (name == "pi") return push({Op::num, std::numbers::pi});
                if (name == "e") return push({Op::num, std::numbers::e});
                static constexpr std::pair<std::string_view, Op> functions[] = {
                    {"sin", Op::sin}, {"cos", Op::cos},   {"exp", Op::exp},
                    {"log", Op::log}, {"sqrt", Op::sqrt}, {"abs", Op::abs}};
                for (const auto& [fname, op] : functions) {
                    if (name != fname) continue;
                    if (!eat('(')) fail("expected '(' after " + std::string(fname));
                    const int arg = parse_expr();
                    if (!eat(')')) fail("missing ')'");
                    return push({op, 0, 0, arg, -1});
                }
                pos = start;
                fail("unknown identifier '" + std::string(name) + "'");
            }
            fail("unexpected '" + std::string(1, c) + "'");
        }
    };

    [[nodiscard]] double eval(int i, const Variables& v) const {
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        switch (n.op) {
        case Op::num: return n.value;
        case Op::var: return n.var == 't' ? v.t : (n.var == 'x' ? v.x : v.y);
        case Op::neg: return -eval(n.lhs, v);
        case Op::add: return eval(n.lhs, v) + eval(n.rhs, v);
        case Op::sub: return eval(n.lhs, v) - eval(n.rhs, v);
        case Op::mul: return eval(n.lhs, v) * eval(n.rhs, v);
        case Op::div: return eval(n.lhs, v) / eval(n.rhs, v);
        case Op::pow: return std::pow(eval(n.lhs, v), eval(n.rhs, v));
        case Op::sin: return std::sin(eval(n.lhs, v));
        case Op::cos: return std::cos(eval(n.lhs, v));
        case Op::exp: return std::exp(eval(n.lhs, v));
        case Op::log: return std::log(eval(n.lhs, v));
        case Op::sqrt: return std::sqrt(eval(n.lhs, v));
        case Op::abs: return std::abs(eval(n.lhs, v));
        }
        return 0.0;
    }

    std::vector<Node> nodes_;
    int root_ = -1;
    std::string text_;
};

} // namespace idyn::cli
