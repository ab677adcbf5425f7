#include "expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "util.hpp"

namespace randlmi {

ExprPtr Expr::constant(double v) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Constant;
    e->value = v;
    return e;
}

ExprPtr Expr::param(std::string name) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Param;
    e->name = std::move(name);
    return e;
}

ExprPtr Expr::neg(ExprPtr child) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Neg;
    e->lhs = std::move(child);
    return e;
}

ExprPtr Expr::binary(Kind k, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
}

ExprPtr Expr::pow(ExprPtr base, int exponent) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Pow;
    e->lhs = std::move(base);
    e->exponent = exponent;
    return e;
}

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    ExprPtr run() {
        skip_ws();
        ExprPtr e = expr();
        skip_ws();
        if (pos_ != text_.size())
            throw ParseError("unexpected character '" + std::string(1, text_[pos_]) + "'", pos_);
        return e;
    }

private:
    std::string_view text_;
    size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    bool accept(char c) {
        skip_ws();
        if (!eof() && peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    ExprPtr expr() {
        ExprPtr e = term();
        for (;;) {
            if (accept('+'))
                e = Expr::binary(Expr::Kind::Add, e, term());
            else if (accept('-'))
                e = Expr::binary(Expr::Kind::Sub, e, term());
            else
                return e;
        }
    }

    ExprPtr term() {
        ExprPtr e = factor();
        for (;;) {
            if (accept('*'))
                e = Expr::binary(Expr::Kind::Mul, e, factor());
            else if (accept('/'))
                e = Expr::binary(Expr::Kind::Div, e, factor());
            else
                return e;
        }
    }

    ExprPtr factor() {
        if (accept('-')) return Expr::neg(factor());
        return base();
    }

    ExprPtr base() {
        ExprPtr a = atom();
        if (accept('^')) return Expr::pow(a, integer());
        return a;
    }

    int integer() {
        skip_ws();
        size_t start = pos_;
        if (!eof() && (peek() == '-' || peek() == '+')) ++pos_;
        if (eof() || !std::isdigit(static_cast<unsigned char>(peek())))
            throw ParseError("expected integer exponent", pos_);
        long v = 0;
        bool neg = text_[start] == '-';
        while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
            v = v * 10 + (peek() - '0');
            if (v > 1000000) throw ParseError("exponent out of range", start);
            ++pos_;
        }
        return static_cast<int>(neg ? -v : v);
    }

    ExprPtr atom() {
        skip_ws();
        if (eof()) throw ParseError("unexpected end of input", pos_);
        char c = peek();
        if (c == '(') {
            ++pos_;
            ExprPtr e = expr();
            skip_ws();
            if (eof() || peek() != ')') throw ParseError("expected ')'", pos_);
            ++pos_;
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
    }

    ExprPtr number() {
        size_t start = pos_;
        while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        if (!eof() && peek() == '.') {
            ++pos_;
            while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        }
        if (!eof() && (peek() == 'e' || peek() == 'E')) {
            size_t mark = pos_;
            ++pos_;
            if (!eof() && (peek() == '+' || peek() == '-')) ++pos_;
            if (eof() || !std::isdigit(static_cast<unsigned char>(peek()))) {
                pos_ = mark;  // "2e" is the number 2 followed by identifier "e"? No:
                // an exponent marker not followed by digits is a syntax error.
                throw ParseError("malformed exponent in number literal", mark);
            }
            while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        }
        std::string lit(text_.substr(start, pos_ - start));
        return Expr::constant(std::strtod(lit.c_str(), nullptr));
    }

    ExprPtr identifier() {
        size_t start = pos_;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) ++pos_;
        return Expr::param(std::string(text_.substr(start, pos_ - start)));
    }
};

}  // namespace

ExprPtr parse_expr(std::string_view text) { return Parser(text).run(); }

double ParamBinding::lookup(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return values[i];
    throw EvalError("unbound parameter '" + name + "'");
}

double eval_expr(const Expr& e, const ParamBinding& q) {
    switch (e.kind) {
        case Expr::Kind::Constant: return e.value;
        case Expr::Kind::Param: return q.lookup(e.name);
        case Expr::Kind::Neg: return -eval_expr(*e.lhs, q);
        case Expr::Kind::Add: return eval_expr(*e.lhs, q) + eval_expr(*e.rhs, q);
        case Expr::Kind::Sub: return eval_expr(*e.lhs, q) - eval_expr(*e.rhs, q);
        case Expr::Kind::Mul: return eval_expr(*e.lhs, q) * eval_expr(*e.rhs, q);
        case Expr::Kind::Div: {
            double den = eval_expr(*e.rhs, q);
            if (den == 0.0) throw EvalError("division by zero in '" + to_string(e) + "'");
            return eval_expr(*e.lhs, q) / den;
        }
        case Expr::Kind::Pow: {
            double b = eval_expr(*e.lhs, q);
            if (e.exponent < 0 && b == 0.0)
                throw EvalError("division by zero in '" + to_string(e) + "'");
            return std::pow(b, e.exponent);
        }
    }
    throw EvalError("corrupt expression node");
}

namespace {

void collect_params(const Expr& e, std::set<std::string>& out) {
    switch (e.kind) {
        case Expr::Kind::Constant: return;
        case Expr::Kind::Param: out.insert(e.name); return;
        default:
            if (e.lhs) collect_params(*e.lhs, out);
            if (e.rhs) collect_params(*e.rhs, out);
    }
}

// Precedence levels for printing: + - (1), * / (2), unary - (3), ^ (4), atom (5).
int precedence(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Add:
        case Expr::Kind::Sub: return 1;
        case Expr::Kind::Mul:
        case Expr::Kind::Div: return 2;
        case Expr::Kind::Neg: return 3;
        case Expr::Kind::Pow: return 4;
        case Expr::Kind::Constant: return e.value < 0 ? 3 : 5;
        case Expr::Kind::Param: return 5;
    }
    return 5;
}

void print(const Expr& e, int min_prec, std::string& out) {
    int prec = precedence(e);
    bool parens = prec < min_prec;
    if (parens) out += '(';
    switch (e.kind) {
        case Expr::Kind::Constant: out += dtos(e.value); break;
        case Expr::Kind::Param: out += e.name; break;
        case Expr::Kind::Neg:
            out += '-';
            print(*e.lhs, 3, out);
            break;
        case Expr::Kind::Add:
            print(*e.lhs, 1, out);
            out += '+';
            print(*e.rhs, 2, out);
            break;
        case Expr::Kind::Sub:
            print(*e.lhs, 1, out);
            out += '-';
            print(*e.rhs, 2, out);
            break;
        case Expr::Kind::Mul:
            print(*e.lhs, 2, out);
            out += '*';
            print(*e.rhs, 3, out);
            break;
        case Expr::Kind::Div:
            print(*e.lhs, 2, out);
            out += '/';
            print(*e.rhs, 3, out);
            break;
        case Expr::Kind::Pow:
            print(*e.lhs, 5, out);  // base must read back as an atom
            out += '^';
            out += std::to_string(e.exponent);
            break;
    }
    if (parens) out += ')';
}

}  // namespace

std::set<std::string> free_params(const Expr& e) {
    std::set<std::string> out;
    collect_params(e, out);
    return out;
}

std::string to_string(const Expr& e) {
    std::string out;
    print(e, 0, out);
    return out;
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Expr::Kind::Constant: return a.value == b.value;
        case Expr::Kind::Param: return a.name == b.name;
        case Expr::Kind::Pow:
            return a.exponent == b.exponent && structurally_equal(*a.lhs, *b.lhs);
        case Expr::Kind::Neg: return structurally_equal(*a.lhs, *b.lhs);
        default:
            return structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
    }
}

}  // namespace randlmi
