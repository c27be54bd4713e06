#pragma once

// Minimal arithmetic expression language for weights, profiles and flows:
// literals, named variables, + - * / ^, unary minus, |..|, and the
// functions exp, log, pow, sqrt, abs, sin, cos. Constants: pi, e.

#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wsemb {

struct ExpressionError : std::runtime_error {
    ExpressionError(const std::string& source, std::size_t pos, const std::string& what)
        : std::runtime_error("expression '" + source + "' at column " + std::to_string(pos + 1) +
                             ": " + what) {}
};

class Expression {
public:
    Expression() = default;

    /// Compile `source`; identifiers must come from `variables` (their order
    /// fixes the argument layout of eval()).
    Expression(std::string source, std::vector<std::string> variables)
        : source_(std::move(source)), vars_(std::move(variables)) {
        Parser p{source_, vars_, 0};
        root_ = p.parse_expr();
        p.skip_ws();
        if (p.pos != source_.size()) throw ExpressionError(source_, p.pos, "unexpected trailing input");
    }

    double eval(std::span<const double> args) const {
        if (!root_) throw std::logic_error("empty expression");
        return root_->eval(args);
    }
    double operator()(std::initializer_list<double> args) const {
        return eval(std::span<const double>(args.begin(), args.size()));
    }

    const std::string& source() const { return source_; }
    const std::vector<std::string>& variables() const { return vars_; }
    bool empty() const { return !root_; }

    /// True if the compiled expression reads variable `name`.
    bool uses(const std::string& name) const {
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i] == name) return root_ && root_->uses(static_cast<int>(i));
        return false;
    }

private:
    enum class Op { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Exp, Log, Sqrt, Abs, Sin, Cos };

    struct Node {
        Op op;
        double num = 0.0;
        int var = -1;
        std::shared_ptr<const Node> a, b;

        double eval(std::span<const double> x) const {
            switch (op) {
                case Op::Num: return num;
                case Op::Var: return x[static_cast<std::size_t>(var)];
                case Op::Neg: return -a->eval(x);
                case Op::Add: return a->eval(x) + b->eval(x);
                case Op::Sub: return a->eval(x) - b->eval(x);
                case Op::Mul: return a->eval(x) * b->eval(x);
                case Op::Div: return a->eval(x) / b->eval(x);
                case Op::Pow: return std::pow(a->eval(x), b->eval(x));
                case Op::Exp: return std::exp(a->eval(x));
                case Op::Log: return std::log(a->eval(x));
                case Op::Sqrt: return std::sqrt(a->eval(x));
                case Op::Abs: return std::fabs(a->eval(x));
                case Op::Sin: return std::sin(a->eval(x));
                case Op::Cos: return std::cos(a->eval(x));
            }
            return std::nan("");
        }
        bool uses(int v) const {
            if (op == Op::Var) return var == v;
            return (a && a->uses(v)) || (b && b->uses(v));
        }
    };
    using NodePtr = std::shared_ptr<const Node>;

    static NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
        auto n = std::make_shared<Node>();
        n->op = op;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }

    struct Parser {
        const std::string& s;
        const std::vector<std::string>& vars;
        std::size_t pos;

        void skip_ws() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        bool accept(char c) {
            skip_ws();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }
        void expect(char c) {
            if (!accept(c)) throw ExpressionError(s, pos, std::string("expected '") + c + "'");
        }

        NodePtr parse_expr() {
            NodePtr lhs = parse_term();
            for (;;) {
                if (accept('+')) lhs = make(Op::Add, lhs, parse_term());
                else if (accept('-')) lhs = make(Op::Sub, lhs, parse_term());
                else return lhs;
            }
        }
        NodePtr parse_term() {
            NodePtr lhs = parse_unary();
            for (;;) {
                if (accept('*')) lhs = make(Op::Mul, lhs, parse_unary());
                else if (accept('/')) lhs = make(Op::Div, lhs, parse_unary());
                else return lhs;
            }
        }
        NodePtr parse_unary() {
            if (accept('-')) return make(Op::Neg, parse_unary());
            if (accept('+')) return parse_unary();
            return parse_power();
        }
        NodePtr parse_power() {
            NodePtr base = parse_primary();
            if (accept('^')) return make(Op::Pow, base, parse_unary());
            return base;
        }
        NodePtr parse_primary() {
            skip_ws();
            if (pos >= s.size()) throw ExpressionError(s, pos, "unexpected end of input");
            const char c = s[pos];
            if (c == '(') {
                ++pos;
                NodePtr e = parse_expr();
                expect(')');
                return e;
            }
            if (c == '|') {
                ++pos;
                NodePtr e = parse_expr();
                expect('|');
                return make(Op::Abs, e);
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
            throw ExpressionError(s, pos, std::string("unexpected character '") + c + "'");
        }
        NodePtr parse_number() {
            const char* begin = s.c_str() + pos;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) throw ExpressionError(s, pos, "malformed number");
            pos += static_cast<std::size_t>(end - begin);
            auto n = std::make_shared<Node>();
            n->op = Op::Num;
            n->num = v;
            return n;
        }
        NodePtr parse_ident() {
            const std::size_t start = pos;
            while (pos < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                ++pos;
            const std::string name = s.substr(start, pos - start);
            skip_ws();
            if (pos < s.size() && s[pos] == '(') {
                ++pos;
                NodePtr a = parse_expr();
                NodePtr b;
                if (name == "pow") {
                    expect(',');
                    b = parse_expr();
                }
                expect(')');
                if (name == "exp") return make(Op::Exp, a);
                if (name == "log") return make(Op::Log, a);
                if (name == "sqrt") return make(Op::Sqrt, a);
                if (name == "abs") return make(Op::Abs, a);
                if (name == "sin") return make(Op::Sin, a);
                if (name == "cos") return make(Op::Cos, a);
                if (name == "pow") return make(Op::Pow, a, b);
                throw ExpressionError(s, start, "unknown function '" + name + "'");
            }
            for (std::size_t i = 0; i < vars.size(); ++i) {
                if (vars[i] == name) {
                    auto n = std::make_shared<Node>();
                    n->op = Op::Var;
                    n->var = static_cast<int>(i);
                    return n;
                }
            }
            auto n = std::make_shared<Node>();
            n->op = Op::Num;
            if (name == "pi") n->num = std::numbers::pi;
            else if (name == "e") n->num = std::numbers::e;
            else throw ExpressionError(s, start, "unknown identifier '" + name + "'");
            return n;
        }
    };

    std::string source_;
    std::vector<std::string> vars_;
    NodePtr root_;
};

}  // namespace wsemb
