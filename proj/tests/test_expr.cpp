#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "expr.hpp"
#include "sampling.hpp"

using namespace randlmi;

namespace {

double eval_with(const ExprPtr& e, std::vector<std::string> names, std::vector<double> values) {
    ParamBinding b{names, values};
    return eval_expr(*e, b);
}

double eval0(const ExprPtr& e) { return eval_with(e, {}, {}); }

}  // namespace

TEST_CASE("precedence and associativity") {
    CHECK(eval0(parse_expr("1+2*3")) == 7.0);
    CHECK(eval0(parse_expr("2*3+1")) == 7.0);
    CHECK(eval0(parse_expr("8-2-3")) == 3.0);
    CHECK(eval0(parse_expr("8/2/2")) == 2.0);
    CHECK(eval0(parse_expr("2^3")) == 8.0);
    CHECK(eval0(parse_expr("-2^2")) == -4.0);   // unary minus binds below ^
    CHECK(eval0(parse_expr("(1+2)*3")) == 9.0);
    CHECK(eval0(parse_expr("2*-3")) == -6.0);
    CHECK(eval0(parse_expr("2^-1")) == 0.5);
    CHECK(eval0(parse_expr("1.5e2")) == 150.0);
}

TEST_CASE("section-7 style entries evaluate to the hand values") {
    // c / (M^2 I_m) at the nominal parameter point
    ExprPtr e = parse_expr("c/(M^2*I_m)");
    double v = eval_with(e, {"c", "M", "I_m"}, {130.0, -260.6, 0.001});
    CHECK(v == doctest::Approx(1.91423).epsilon(1e-4));

    ExprPtr e2 = parse_expr("-beta/I_son");
    CHECK(eval_with(e2, {"beta", "I_son"}, {0.4, 400.0}) == doctest::Approx(-0.001));

    ExprPtr e3 = parse_expr("-c/(M^2*I_m)-c/I_son");
    double v3 = eval_with(e3, {"c", "M", "I_m", "I_son"}, {130.0, -260.6, 0.001, 400.0});
    CHECK(v3 == doctest::Approx(-2.23923).epsilon(1e-4));
}

TEST_CASE("eval basics") {
    CHECK(eval0(parse_expr("5")) == 5.0);
    CHECK(eval_with(parse_expr("x^3"), {"x"}, {2.0}) == 8.0);
    CHECK_THROWS_AS(eval0(parse_expr("1/0")), EvalError);
    CHECK_THROWS_AS(eval_with(parse_expr("1/x"), {"x"}, {0.0}), EvalError);
    CHECK_THROWS_AS(eval_with(parse_expr("x^-1"), {"x"}, {0.0}), EvalError);
    CHECK_THROWS_AS(eval0(parse_expr("y")), EvalError);  // unbound parameter
}

TEST_CASE("syntax errors carry byte offsets") {
    try {
        parse_expr("1+*2");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset == 2);
    }
    try {
        parse_expr("1 + $");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset == 4);
    }
    CHECK_THROWS_AS(parse_expr("(1+2"), ParseError);
    CHECK_THROWS_AS(parse_expr(""), ParseError);
    CHECK_THROWS_AS(parse_expr("1 2"), ParseError);
    CHECK_THROWS_AS(parse_expr("x^y"), ParseError);  // exponents are integer literals
}

TEST_CASE("free_params") {
    CHECK(free_params(*parse_expr("1")).empty());
    auto s = free_params(*parse_expr("c/(M^2*I_m)"));
    CHECK(s == std::set<std::string>{"c", "M", "I_m"});
    CHECK(free_params(*parse_expr("beta + beta")) == std::set<std::string>{"beta"});
}

namespace {

// random tree generator for the round-trip and homomorphism properties;
// constants are nonnegative so printing never synthesizes a unary minus
ExprPtr random_tree(Rng& rng, int depth) {
    double pick = rng.next_unit();
    if (depth <= 0 || pick < 0.25) {
        if (rng.next_unit() < 0.5) return Expr::constant(std::floor(rng.uniform(0, 100)) / 4.0);
        const char* names[] = {"a", "b", "c_long", "x1", "_u"};
        return Expr::param(names[rng.next_u64() % 5]);
    }
    if (pick < 0.35) return Expr::neg(random_tree(rng, depth - 1));
    if (pick < 0.45)
        return Expr::pow(random_tree(rng, depth - 1),
                         static_cast<int>(rng.next_u64() % 7) - 3);
    Expr::Kind kinds[] = {Expr::Kind::Add, Expr::Kind::Sub, Expr::Kind::Mul, Expr::Kind::Div};
    return Expr::binary(kinds[rng.next_u64() % 4], random_tree(rng, depth - 1),
                        random_tree(rng, depth - 1));
}

// direct recursive oracle used to cross-check eval_expr
double oracle_eval(const Expr& e, const ParamBinding& q) {
    switch (e.kind) {
        case Expr::Kind::Constant: return e.value;
        case Expr::Kind::Param: return q.lookup(e.name);
        case Expr::Kind::Neg: return -oracle_eval(*e.lhs, q);
        case Expr::Kind::Add: return oracle_eval(*e.lhs, q) + oracle_eval(*e.rhs, q);
        case Expr::Kind::Sub: return oracle_eval(*e.lhs, q) - oracle_eval(*e.rhs, q);
        case Expr::Kind::Mul: return oracle_eval(*e.lhs, q) * oracle_eval(*e.rhs, q);
        case Expr::Kind::Div: return oracle_eval(*e.lhs, q) / oracle_eval(*e.rhs, q);
        case Expr::Kind::Pow: return std::pow(oracle_eval(*e.lhs, q), e.exponent);
    }
    return 0.0;
}

}  // namespace

TEST_CASE("round trip: print then parse gives a structurally identical tree") {
    Rng rng(20240101);
    int checked = 0;
    for (int i = 0; i < 500; ++i) {
        ExprPtr t = random_tree(rng, 8);
        std::string text = to_string(*t);
        ExprPtr back = parse_expr(text);
        if (!structurally_equal(*t, *back)) {
            CAPTURE(text);
            FAIL_CHECK("round trip mismatch");
        }
        ++checked;
    }
    CHECK(checked == 500);
}

TEST_CASE("eval agrees with a direct recursive oracle") {
    Rng rng(777);
    std::vector<std::string> names{"a", "b", "c_long", "x1", "_u"};
    for (int i = 0; i < 300; ++i) {
        ExprPtr t = random_tree(rng, 6);
        std::vector<double> vals;
        for (size_t j = 0; j < names.size(); ++j) vals.push_back(rng.uniform(0.5, 3.0));
        ParamBinding b{names, vals};
        double got, want;
        try {
            got = eval_expr(*t, b);
            want = oracle_eval(*t, b);
        } catch (const EvalError&) {
            continue;  // division by zero path; exactness checked elsewhere
        }
        if (std::isfinite(want))
            CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("param-free trees are independent of the binding") {
    ExprPtr t = parse_expr("(1+2)^3/4-5");
    std::vector<std::string> names{"q"};
    std::vector<double> v1{1.0}, v2{-7.5};
    ParamBinding b1{names, v1}, b2{names, v2};
    CHECK(eval_expr(*t, b1) == eval_expr(*t, b2));
}
