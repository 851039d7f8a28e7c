#pragma once

#include <memory>

#include "starrep/structure.hpp"

namespace starrep {

// Scalar sentences over the structure, with sup/inf binders ranging over
// sorts.  Grammar (canonical print form shown):
//
//   scalar := "sup" NAME ":S[" LABEL "]" " . " scalar
//           | "inf" NAME ":S[" LABEL "]" " . " scalar
//           | additive
//   additive := mult (" + " mult)*
//   mult     := factor (" * " factor)*
//   factor   := NUMBER | "max(" scalar ", " scalar ")" | "min(" scalar ", " scalar ")"
//             | "absdiff(" scalar ", " scalar ")" | "ip(" term ", " term ")"
//             | "nrm(" term ")" | "(" scalar ")"
//   term     := "0" | NAME | "-" term | "i*" term | "avg(" term ", " term ")"
//             | "pi[" LABEL "](" term ")"
//
// Numbers may be negative literals; there is no binary minus.  Sort labels
// are read raw up to the closing bracket.  Binder names must be unique and
// may not shadow keywords.

struct TermNode;
struct ScalarNode;
using TermPtr = std::shared_ptr<TermNode>;
using ScalarPtr = std::shared_ptr<ScalarNode>;

struct TermNode {
  enum class Kind { Zero, Var, Neg, IMul, Avg, Pi };
  Kind kind;
  std::string name;  // Var: variable name, Pi: sort label of the acting element
  TermPtr a, b;
  std::string sort;  // resolved by check_sorts; empty means undetermined (Zero)
};

struct ScalarNode {
  enum class Kind { Number, Sup, Inf, Add, Mul, Max, Min, AbsDiff, Ip, Nrm };
  Kind kind;
  double number = 0.0;
  std::string binder_var, binder_sort;  // Sup / Inf
  ScalarPtr body;                       // Sup / Inf
  std::vector<ScalarPtr> args;          // Add / Mul (2+), Max / Min / AbsDiff (2)
  TermPtr ta, tb;                       // Ip (both), Nrm (ta)
};

struct Sentence {
  ScalarPtr root;
};

// Throws ParseError with a character position on malformed input.
Sentence parse_sentence(const std::string& text);

// Canonical rendering; print(parse(s)) == s for canonically spaced s.
std::string print_sentence(const Sentence& s);

// Resolves term sorts against the structure: binder uniqueness, pi products
// present, pi never applied to a sortless vector (0 or a cross-sort avg).
// Throws ParseError / MissingSort.
void check_sorts(Sentence& s, const MetricStructure& m);

struct EvalOptions {
  int multistarts = 16;
  int iters = 60;
  std::uint64_t seed = 0;
};

// Binder evaluation strategy: every binder body is first probed as a
// quadratic in the bound ball coordinates; when the probe certifies an exact
// quadratic (which covers inner distances written through ip/nrm, since all
// terms are affine in each variable), the ball optimum comes from the
// trust-region solver, exactly.  Otherwise the shared multistart ascent
// engine takes over, started from the sort's extremal direction like the
// audit optimizers.
struct EvalReport {
  double value = 0.0;
  int exact_binders = 0;
  int engine_binders = 0;
  EvalOptions options;
};
EvalReport evaluate_sentence(const Sentence& s, const MetricStructure& m,
                             const EvalOptions& options);
EvalReport evaluate_sentence(const Sentence& s, const MetricStructure& m);

}  // namespace starrep
