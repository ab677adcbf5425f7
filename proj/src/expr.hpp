#pragma once

#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace randlmi {

// Scalar expression tree over named parameters. Grammar:
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := "-" factor | base
//   base   := atom ("^" integer)?
//   atom   := number | identifier | "(" expr ")"
// Trees are immutable after construction and safe to share across threads.
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind { Constant, Param, Neg, Add, Sub, Mul, Div, Pow };

    Kind kind;
    double value = 0.0;   // Constant
    std::string name;     // Param
    int exponent = 0;     // Pow
    ExprPtr lhs, rhs;     // children; Neg/Pow use lhs only

    static ExprPtr constant(double v);
    static ExprPtr param(std::string name);
    static ExprPtr neg(ExprPtr e);
    static ExprPtr binary(Kind k, ExprPtr a, ExprPtr b);
    static ExprPtr pow(ExprPtr base, int exponent);
};

struct ParseError : std::runtime_error {
    size_t offset;
    ParseError(const std::string& what, size_t off) : std::runtime_error(what), offset(off) {}
};

struct EvalError : std::runtime_error {
    explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

ExprPtr parse_expr(std::string_view text);

// Name/value pairs binding every parameter of an expression. Lookup is a
// linear scan; parameter tables are a handful of entries.
struct ParamBinding {
    std::span<const std::string> names;
    std::span<const double> values;

    // Returns the bound value or throws EvalError for an unbound name.
    double lookup(const std::string& name) const;
};

double eval_expr(const Expr& e, const ParamBinding& q);

std::set<std::string> free_params(const Expr& e);

// Precedence-aware rendering; parse(to_string(e)) reproduces the tree.
std::string to_string(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

}  // namespace randlmi
