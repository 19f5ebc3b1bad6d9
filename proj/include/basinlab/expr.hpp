#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>

namespace basinlab::expr {

/// Thrown on malformed input; offset() is the byte position in the
/// original text where parsing failed.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t offset)
        : std::runtime_error(message + " (offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Thrown by evaluate() when the tree produces a non-finite value
/// (division by zero, overflow).
class EvalError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class NodeKind {
    constant,
    variable,   // the single free variable x
    pi_const,
    negate,
    add,
    subtract,
    multiply,
    divide,
    power,      // integer exponent, stored in `exponent`
    sine,
    cosine,
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// One node of an immutable expression tree. Trees are shared freely
/// across threads; nothing mutates a Node after construction.
struct Node {
    NodeKind kind;
    double value = 0.0;   // constant only
    int exponent = 0;     // power only
    NodePtr lhs;          // unary operand / left operand
    NodePtr rhs;          // right operand
};

/// Value-semantic handle to an immutable expression tree in the grammar
/// {+, -, *, /, ^int, sin, cos, pi, x, decimal literals}.
///
/// Constants in parsed trees are always non-negative: the grammar has no
/// signed literals, negation is an explicit node. The folding constructors
/// below preserve that, which is what makes print/parse round trips exact.
class Expression {
public:
    Expression() : node_(zero_node()) {}
    explicit Expression(NodePtr node) : node_(std::move(node)) {}

    /// Raw IEEE-754 evaluation; may return NaN/inf (see evaluate() for
    /// the checked variant).
    double operator()(double x) const { return eval(node_.get(), x); }

    const NodePtr& node() const { return node_; }

    friend bool operator==(const Expression& a, const Expression& b) {
        return equal(a.node_.get(), b.node_.get());
    }

private:
    static const NodePtr& zero_node() {
        static const NodePtr zero = std::make_shared<Node>(Node{NodeKind::constant});
        return zero;
    }

    static double eval(const Node* n, double x) {
        switch (n->kind) {
            case NodeKind::constant: return n->value;
            case NodeKind::variable: return x;
            case NodeKind::pi_const: return std::numbers::pi;
            case NodeKind::negate:   return -eval(n->lhs.get(), x);
            case NodeKind::add:      return eval(n->lhs.get(), x) + eval(n->rhs.get(), x);
            case NodeKind::subtract: return eval(n->lhs.get(), x) - eval(n->rhs.get(), x);
            case NodeKind::multiply: return eval(n->lhs.get(), x) * eval(n->rhs.get(), x);
            case NodeKind::divide:   return eval(n->lhs.get(), x) / eval(n->rhs.get(), x);
            case NodeKind::power:    return std::pow(eval(n->lhs.get(), x),
                                                     static_cast<double>(n->exponent));
            case NodeKind::sine:     return std::sin(eval(n->lhs.get(), x));
            case NodeKind::cosine:   return std::cos(eval(n->lhs.get(), x));
        }
        return std::numeric_limits<double>::quiet_NaN();
    }

    static bool equal(const Node* a, const Node* b) {
        if (a == b) return true;
        if (a->kind != b->kind) return false;
        switch (a->kind) {
            case NodeKind::constant: return a->value == b->value;
            case NodeKind::variable:
            case NodeKind::pi_const: return true;
            case NodeKind::power:
                return a->exponent == b->exponent && equal(a->lhs.get(), b->lhs.get());
            case NodeKind::negate:
            case NodeKind::sine:
            case NodeKind::cosine:
                return equal(a->lhs.get(), b->lhs.get());
            default:
                return equal(a->lhs.get(), b->lhs.get()) && equal(a->rhs.get(), b->rhs.get());
        }
    }

    NodePtr node_;
};

namespace detail {

inline NodePtr make(NodeKind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr,
                    double value = 0.0, int exponent = 0) {
    return std::make_shared<Node>(Node{kind, value, exponent, std::move(lhs), std::move(rhs)});
}

inline bool is_const(const NodePtr& n, double v) {
    return n->kind == NodeKind::constant && n->value == v;
}

}  // namespace detail

// --- folding constructors ------------------------------------------------
//
// These apply the constant folds used by differentiate(): neutral elements,
// zero annihilation, and arithmetic on constant pairs. Folds never introduce
// negative constants; a negative result becomes an explicit negate node.

inline Expression constant(double v) {
    return Expression(detail::make(NodeKind::constant, nullptr, nullptr, v));
}

inline Expression variable() { return Expression(detail::make(NodeKind::variable)); }
inline Expression pi_const() { return Expression(detail::make(NodeKind::pi_const)); }

inline Expression negate(const Expression& e) {
    const NodePtr& n = e.node();
    if (detail::is_const(n, 0.0)) return e;
    if (n->kind == NodeKind::negate) return Expression(n->lhs);
    return Expression(detail::make(NodeKind::negate, n));
}

inline Expression add(const Expression& a, const Expression& b) {
    if (a.node()->kind == NodeKind::constant && b.node()->kind == NodeKind::constant)
        return constant(a.node()->value + b.node()->value);
    if (detail::is_const(a.node(), 0.0)) return b;
    if (detail::is_const(b.node(), 0.0)) return a;
    return Expression(detail::make(NodeKind::add, a.node(), b.node()));
}

inline Expression subtract(const Expression& a, const Expression& b) {
    if (a.node()->kind == NodeKind::constant && b.node()->kind == NodeKind::constant) {
        double av = a.node()->value, bv = b.node()->value;
        return av >= bv ? constant(av - bv) : negate(constant(bv - av));
    }
    if (detail::is_const(b.node(), 0.0)) return a;
    if (detail::is_const(a.node(), 0.0)) return negate(b);
    return Expression(detail::make(NodeKind::subtract, a.node(), b.node()));
}

inline Expression multiply(const Expression& a, const Expression& b) {
    if (a.node()->kind == NodeKind::constant && b.node()->kind == NodeKind::constant)
        return constant(a.node()->value * b.node()->value);
    if (detail::is_const(a.node(), 0.0) || detail::is_const(b.node(), 0.0))
        return constant(0.0);
    if (detail::is_const(a.node(), 1.0)) return b;
    if (detail::is_const(b.node(), 1.0)) return a;
    return Expression(detail::make(NodeKind::multiply, a.node(), b.node()));
}

inline Expression divide(const Expression& a, const Expression& b) {
    if (a.node()->kind == NodeKind::constant && b.node()->kind == NodeKind::constant &&
        b.node()->value != 0.0)
        return constant(a.node()->value / b.node()->value);
    if (detail::is_const(b.node(), 1.0)) return a;
    return Expression(detail::make(NodeKind::divide, a.node(), b.node()));
}

inline Expression power(const Expression& base, int exponent) {
    if (exponent == 0) return constant(1.0);
    if (exponent == 1) return base;
    if (base.node()->kind == NodeKind::constant)
        return constant(std::pow(base.node()->value, static_cast<double>(exponent)));
    return Expression(detail::make(NodeKind::power, base.node(), nullptr, 0.0, exponent));
}

inline Expression sine(const Expression& e) {
    return Expression(detail::make(NodeKind::sine, e.node()));
}

inline Expression cosine(const Expression& e) {
    return Expression(detail::make(NodeKind::cosine, e.node()));
}

// --- parsing --------------------------------------------------------------
//
// Grammar, loosest binding first (standard precedence, left associative):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' nonneg-integer)*
//   primary := number | 'x' | 'pi' | ('sin' | 'cos') '(' sum ')' | '(' sum ')'
// Whitespace is insignificant. Numbers are unsigned decimal literals with
// optional fraction and exponent part.

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    NodePtr run() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("empty expression", 0);
        NodePtr n = parse_sum();
        skip_ws();
        if (pos_ < text_.size()) fail("unexpected trailing input");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& message) const {
        throw ParseError(message, pos_);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    NodePtr parse_sum() {
        NodePtr n = parse_product();
        for (;;) {
            if (consume('+')) n = add(Expression(n), Expression(parse_product())).node();
            else if (consume('-')) n = subtract(Expression(n), Expression(parse_product())).node();
            else return n;
        }
    }

    NodePtr parse_product() {
        NodePtr n = parse_unary();
        for (;;) {
            if (consume('*')) n = multiply(Expression(n), Expression(parse_unary())).node();
            else if (consume('/')) n = divide(Expression(n), Expression(parse_unary())).node();
            else return n;
        }
    }

    NodePtr parse_unary() {
        if (consume('-')) return negate(Expression(parse_unary())).node();
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        while (consume('^')) {
            skip_ws();
            base = power(Expression(base), parse_exponent()).node();
        }
        return base;
    }

    int parse_exponent() {
        std::size_t start = pos_;
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
            fail("exponent must be a non-negative integer literal");
        int value = 0;
        auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
        if (ec == std::errc::result_out_of_range) {
            pos_ = start;
            fail("exponent out of range");
        }
        pos_ = static_cast<std::size_t>(ptr - text_.data());
        // "x^2.5" and "x^2e3" are not integer literals
        if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
            pos_ = start;
            fail("exponent must be a non-negative integer literal");
        }
        return value;
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        if (c == '(') {
            ++pos_;
            NodePtr n = parse_sum();
            if (!consume(')')) fail("expected ')'");
            return n;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr parse_number() {
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
        if (ec != std::errc() || ptr == text_.data() + pos_) fail("malformed number");
        pos_ = static_cast<std::size_t>(ptr - text_.data());
        return constant(value).node();
    }

    NodePtr parse_identifier() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        std::string_view name = text_.substr(start, pos_ - start);
        if (name == "x") return variable().node();
        if (name == "pi") return pi_const().node();
        if (name == "sin" || name == "cos") {
            if (!consume('(')) fail(std::string("expected '(' after '") + std::string(name) + "'");
            NodePtr arg = parse_sum();
            if (!consume(')')) fail("expected ')'");
            return detail::make(name == "sin" ? NodeKind::sine : NodeKind::cosine, arg);
        }
        pos_ = start;
        fail("unknown identifier '" + std::string(name) + "'");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline Expression parse(std::string_view text) {
    return Expression(detail::Parser(text).run());
}

// --- evaluation and differentiation ---------------------------------------

/// Checked evaluation: throws EvalError if the result is not finite.
inline double evaluate(const Expression& e, double x) {
    double v = e(x);
    if (!std::isfinite(v))
        throw EvalError("expression is not finite at x = " + std::to_string(x));
    return v;
}

namespace detail {

inline Expression diff(const NodePtr& n) {
    Expression u(n->lhs ? Expression(n->lhs) : Expression());
    switch (n->kind) {
        case NodeKind::constant:
        case NodeKind::pi_const:
            return constant(0.0);
        case NodeKind::variable:
            return constant(1.0);
        case NodeKind::negate:
            return negate(diff(n->lhs));
        case NodeKind::add:
            return add(diff(n->lhs), diff(n->rhs));
        case NodeKind::subtract:
            return subtract(diff(n->lhs), diff(n->rhs));
        case NodeKind::multiply:
            return add(multiply(diff(n->lhs), Expression(n->rhs)),
                       multiply(Expression(n->lhs), diff(n->rhs)));
        case NodeKind::divide:
            return divide(subtract(multiply(diff(n->lhs), Expression(n->rhs)),
                                   multiply(Expression(n->lhs), diff(n->rhs))),
                          power(Expression(n->rhs), 2));
        case NodeKind::power:
            return multiply(multiply(constant(static_cast<double>(n->exponent)),
                                     power(u, n->exponent - 1)),
                            diff(n->lhs));
        case NodeKind::sine:
            return multiply(cosine(u), diff(n->lhs));
        case NodeKind::cosine:
            return negate(multiply(sine(u), diff(n->lhs)));
    }
    return constant(0.0);
}

}  // namespace detail

/// d/dx by the standard rules; results are folded by the constructors above.
inline Expression differentiate(const Expression& e) {
    return detail::diff(e.node());
}

// --- printing ---------------------------------------------------------------

namespace detail {

inline int precedence(NodeKind k) {
    switch (k) {
        case NodeKind::add:
        case NodeKind::subtract: return 1;
        case NodeKind::multiply:
        case NodeKind::divide:   return 2;
        case NodeKind::negate:   return 3;
        case NodeKind::power:    return 4;
        default:                 return 5;
    }
}

inline void print_number(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    out.append(buf, ptr);
}

inline void print(std::string& out, const Node* n);

inline void print_child(std::string& out, const Node* child, int min_prec) {
    if (precedence(child->kind) < min_prec) {
        out += '(';
        print(out, child);
        out += ')';
    } else {
        print(out, child);
    }
}

inline void print(std::string& out, const Node* n) {
    switch (n->kind) {
        case NodeKind::constant: print_number(out, n->value); return;
        case NodeKind::variable: out += 'x'; return;
        case NodeKind::pi_const: out += "pi"; return;
        case NodeKind::negate:
            out += '-';
            print_child(out, n->lhs.get(), 4);
            return;
        case NodeKind::add:
            // binary ops parse left associative, so right children at the
            // same precedence level need parentheses to round-trip
            print_child(out, n->lhs.get(), 1);
            out += " + ";
            print_child(out, n->rhs.get(), 2);
            return;
        case NodeKind::subtract:
            print_child(out, n->lhs.get(), 1);
            out += " - ";
            print_child(out, n->rhs.get(), 2);
            return;
        case NodeKind::multiply:
            print_child(out, n->lhs.get(), 2);
            out += '*';
            print_child(out, n->rhs.get(), 3);
            return;
        case NodeKind::divide:
            print_child(out, n->lhs.get(), 2);
            out += '/';
            print_child(out, n->rhs.get(), 3);
            return;
        case NodeKind::power:
            print_child(out, n->lhs.get(), 5);
            out += '^';
            out += std::to_string(n->exponent);
            return;
        case NodeKind::sine:
        case NodeKind::cosine:
            out += n->kind == NodeKind::sine ? "sin(" : "cos(";
            print(out, n->lhs.get());
            out += ')';
            return;
    }
}

}  // namespace detail

inline std::string to_string(const Expression& e) {
    std::string out;
    detail::print(out, e.node().get());
    return out;
}

}  // namespace basinlab::expr
