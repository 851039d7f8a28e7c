#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "starrep/errors.hpp"
#include "starrep/sentence.hpp"

using namespace starrep;

namespace {

// Two-point-group structure with pi(phi) eigenvalues {1, 1/2}: small enough
// that optimizer answers are known in closed form.
MetricStructure z2_structure() {
  GroupPtr z2 = Group::cyclic(2);
  AlgebraElement phi =
      AlgebraElement::density(z2, {{0, Complex(0.75, 0.0)}, {1, Complex(0.25, 0.0)}});
  AlgebraElement em = approximate_identity(z2, 0);
  return MetricStructure::build(UnitaryRep::regular(z2), {{"phi", phi}, {"em", em}});
}

MetricStructure z6_structure() {
  GroupPtr z6 = Group::cyclic(6);
  AlgebraElement phi = AlgebraElement::density(
      z6, {{0, Complex(0.4, 0.0)}, {1, Complex(0.35, 0.0)}, {2, Complex(0.25, 0.0)}});
  AlgebraElement em = approximate_identity(z6, 0);
  return MetricStructure::build(UnitaryRep::regular(z6), {{"phi", phi}, {"em", em}});
}

}  // namespace

TEST_CASE("canonically spaced sentences survive a print-parse round trip") {
  std::vector<std::string> corpus = {
      "1",
      "-3",
      "0.25",
      "1e-05",
      "1 + 2 * 3 + 0.5",
      "2 * (1 + -3) * 0.5",
      "max(1.5, min(-2, 0.25)) + absdiff(2, 0.5)",
      "nrm(0)",
      "sup x:S[phi] . nrm(x)",
      "inf y:S[em] . absdiff(ip(y, y), 1)",
      "sup x:S[phi] . inf y:S[phi.phi] . nrm(avg(x, -y))",
      "sup x:S[phi*] . ip(pi[phi.phi](x), i*x)",
      "sup x:S[em] . 1 + nrm(pi[phi](avg(x, 0)))",
      "(sup x:S[em] . nrm(x)) + 1",
      "2 * (sup x:S[em] . inf y:S[phi] . nrm(avg(x, -y)))",
      "sup x:S[phi] . nrm(i*-avg(x, x))",
  };
  for (const std::string& text : corpus) {
    CAPTURE(text);
    CHECK(print_sentence(parse_sentence(text)) == text);
  }
}

TEST_CASE("printing normalizes redundant parentheses to a fixpoint") {
  std::vector<std::string> inputs = {
      "(1)",
      "((2 + 3))",
      "(nrm(0)) * (1 + 1)",
      "sup x:S[a] . ((ip(x, x)))",
  };
  for (const std::string& text : inputs) {
    CAPTURE(text);
    std::string once = print_sentence(parse_sentence(text));
    CHECK(print_sentence(parse_sentence(once)) == once);
  }
  CHECK(print_sentence(parse_sentence("(1)")) == "1");
}

TEST_CASE("parse errors carry the offending position") {
  CHECK_THROWS_WITH_AS(parse_sentence("1 1"), "trailing input at position 2", ParseError);
  CHECK_THROWS_WITH_AS(parse_sentence("1 +"), "expected a scalar factor at position 3",
                       ParseError);
  CHECK_THROWS_WITH_AS(parse_sentence("sup x:S[oops . 1"),
                       "unterminated label at position 8", ParseError);
  CHECK_THROWS_AS(parse_sentence(""), ParseError);
  CHECK_THROWS_AS(parse_sentence("sup :S[a] . 1"), ParseError);      // missing binder name
  CHECK_THROWS_AS(parse_sentence("sup x S[a] . 1"), ParseError);     // missing colon
  CHECK_THROWS_AS(parse_sentence("sup x:S[a] 1"), ParseError);       // missing dot
  CHECK_THROWS_AS(parse_sentence("ip(x)"), ParseError);              // arity
  CHECK_THROWS_AS(parse_sentence("max(1)"), ParseError);             // arity
  CHECK_THROWS_AS(parse_sentence("nrm(3)"), ParseError);             // 3 is not a vector
  CHECK_THROWS_AS(parse_sentence("nrm(min)"), ParseError);           // keyword as vector
  CHECK_THROWS_AS(parse_sentence("1 @ 2"), ParseError);              // stray character
  CHECK_THROWS_AS(parse_sentence("i*0"), ParseError);                // term outside ip/nrm
}

TEST_CASE("reserved keywords cannot bind") {
  for (const std::string& kw : {"sup", "inf", "max", "min", "absdiff", "ip", "nrm", "avg",
                                "pi", "S", "i"}) {
    CAPTURE(kw);
    CHECK_THROWS_AS(parse_sentence("sup " + kw + ":S[a] . 1"), ParseError);
  }
}

TEST_CASE("sort checking resolves terms against the structure") {
  MetricStructure m = z6_structure();

  Sentence ok = parse_sentence("sup x:S[phi] . nrm(pi[phi](avg(x, 0)))");
  CHECK_NOTHROW(check_sorts(ok, m));

  Sentence unknown_sort = parse_sentence("sup x:S[nope] . nrm(x)");
  CHECK_THROWS_AS(check_sorts(unknown_sort, m), MissingSort);

  Sentence duplicate = parse_sentence("sup x:S[phi] . inf x:S[em] . 1");
  CHECK_THROWS_AS(check_sorts(duplicate, m), ParseError);

  Sentence unbound = parse_sentence("nrm(x)");
  CHECK_THROWS_AS(check_sorts(unbound, m), ParseError);

  // Cross-sort averages live in the ambient space: fine under nrm/ip, but
  // sortless, so pi cannot be applied to them.
  Sentence mixed = parse_sentence("sup x:S[phi] . inf y:S[em] . nrm(avg(x, y))");
  CHECK_NOTHROW(check_sorts(mixed, m));
  Sentence pi_on_mixed =
      parse_sentence("sup x:S[phi] . inf y:S[em] . nrm(pi[phi](avg(x, y)))");
  CHECK_THROWS_AS(check_sorts(pi_on_mixed, m), ParseError);

  Sentence no_pi = parse_sentence("sup x:S[em] . nrm(pi[zzz](x))");
  CHECK_THROWS_AS(check_sorts(no_pi, m), MissingSort);

  // Depth-2 closure: products of product sorts are not in the structure.
  Sentence too_deep = parse_sentence("sup x:S[em] . nrm(pi[phi.phi](pi[phi](x)))");
  CHECK_THROWS_AS(check_sorts(too_deep, m), MissingSort);

  Sentence pi_on_zero = parse_sentence("nrm(pi[phi](0))");
  CHECK_THROWS_AS(check_sorts(pi_on_zero, m), ParseError);
}

TEST_CASE("quadratic bodies are solved exactly") {
  MetricStructure m = z6_structure();
  EvalOptions opt{16, 60, 3};

  EvalReport sup_nrm = evaluate_sentence(parse_sentence("sup x:S[em] . nrm(x)"), m, opt);
  CHECK(sup_nrm.value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sup_nrm.exact_binders == 1);
  CHECK(sup_nrm.engine_binders == 0);

  EvalReport inf_nrm = evaluate_sentence(parse_sentence("inf x:S[em] . nrm(x)"), m, opt);
  CHECK(inf_nrm.value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(inf_nrm.exact_binders == 1);

  // The top singular value of pi(phi) for a probability density is 1.
  EvalReport sup_phi = evaluate_sentence(parse_sentence("sup x:S[phi] . nrm(x)"), m, opt);
  CHECK(sup_phi.value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sup_phi.exact_binders == 1);

  EvalReport sup_ip = evaluate_sentence(parse_sentence("sup x:S[em] . ip(x, x)"), m, opt);
  CHECK(sup_ip.value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sup_ip.exact_binders == 1);

  // Scaled norm bodies keep the exact path through the split multiplier.
  EvalReport scaled =
      evaluate_sentence(parse_sentence("sup x:S[em] . 2.5 * nrm(x)"), m, opt);
  CHECK(scaled.value == doctest::Approx(2.5).epsilon(1e-10));
  CHECK(scaled.exact_binders == 1);
}

TEST_CASE("term algebra matches the ambient complex structure") {
  MetricStructure m = z6_structure();
  EvalOptions opt{16, 60, 5};

  // [i xi, xi] = Re(i ||xi||^2) = 0.
  EvalReport rot = evaluate_sentence(parse_sentence("sup x:S[em] . ip(i*x, x)"), m, opt);
  CHECK(std::abs(rot.value) <= 1e-10);

  // avg(x, -x) is the zero vector.
  EvalReport cancel =
      evaluate_sentence(parse_sentence("sup x:S[em] . nrm(avg(x, -x))"), m, opt);
  CHECK(cancel.value <= 1e-12);

  // The norm squared agrees with the predicate on the diagonal.
  EvalReport norm_axiom = evaluate_sentence(
      parse_sentence("sup x:S[phi] . absdiff(nrm(x) * nrm(x), ip(x, x))"), m, opt);
  CHECK(norm_axiom.value <= 1e-10);

  // pi[phi] on S[em] lands in S[phi]: distance of the image vanishes.
  EvalReport pi_member = evaluate_sentence(
      parse_sentence("sup x:S[em] . inf y:S[phi] . nrm(avg(pi[phi](x), -y))"), m, opt);
  CHECK(pi_member.value <= 1e-7);  // sqrt of the inner solver's eps-level residual
}

TEST_CASE("non-quadratic bodies fall back to the ascent engine") {
  MetricStructure m = z6_structure();
  EvalOptions opt{32, 80, 7};
  EvalReport doubled =
      evaluate_sentence(parse_sentence("sup x:S[phi] . nrm(x) + nrm(x)"), m, opt);
  CHECK(doubled.exact_binders == 0);
  CHECK(doubled.engine_binders == 1);
  CHECK(doubled.value == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("the farthest-point sentence reproduces the hausdorff gap") {
  MetricStructure m = z2_structure();
  // sup over the full ball of the distance to pi(phi)'s image ball: the worst
  // direction is the sigma = 1/2 eigenvector, at distance 1 - 1/2; the factor
  // 2 undoes avg's halving.
  EvalOptions opt{48, 200, 11};
  EvalReport gap = evaluate_sentence(
      parse_sentence("2 * (sup x:S[em] . inf y:S[phi] . nrm(avg(x, -y)))"), m, opt);
  CHECK(gap.value == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(gap.engine_binders >= 1);  // the outer distance profile is not quadratic

  AuditBudget budget{16, 48, 2, 200, 16, 11};
  BallMaxResult haus = one_sided_hausdorff(m, "em", "phi", budget);
  CHECK(haus.value == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(std::abs(gap.value - haus.value) <= 1e-6);
}

TEST_CASE("evaluation is deterministic for a fixed seed") {
  MetricStructure m = z6_structure();
  EvalOptions opt{24, 80, 42};
  Sentence s = parse_sentence("sup x:S[phi] . nrm(x) + nrm(x)");
  double first = evaluate_sentence(s, m, opt).value;
  double second = evaluate_sentence(s, m, opt).value;
  CHECK(first == second);
}

TEST_CASE("empty sentences are rejected") {
  Sentence empty;
  CHECK_THROWS_AS(print_sentence(empty), ParseError);
  MetricStructure m = z2_structure();
  CHECK_THROWS_AS(check_sorts(empty, m), ParseError);
}
