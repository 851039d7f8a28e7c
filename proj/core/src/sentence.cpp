#include "starrep/sentence.hpp"

#include <cstdlib>
#include <iomanip>
#include <set>
#include <sstream>

#include "starrep/errors.hpp"

namespace starrep {

namespace {

const std::set<std::string>& keywords() {
  static const std::set<std::string> kw{"sup", "inf", "max", "min",  "absdiff",
                                        "ip",  "nrm", "avg", "pi",   "S",
                                        "i"};
  return kw;
}

struct Token {
  enum class Type { Name, Number, LParen, RParen, LBracket, RBracket, Comma, Colon, Dot, Plus, Star, Minus, End };
  Type type;
  std::string text;
  double num = 0.0;
  int pos = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }
  Token next() {
    Token t = tok_;
    advance();
    return t;
  }
  // Raw read used for sort labels: everything from the current lookahead up
  // to the closing bracket, which is consumed as well.  Reading raw (instead
  // of token by token) lets product labels like "a.b" and star labels like
  // "a*" pass through unmangled.
  std::string raw_label() {
    int start = tok_.pos;
    int end = start;
    while (end < static_cast<int>(src_.size()) && src_[end] != ']') ++end;
    if (end >= static_cast<int>(src_.size()))
      throw ParseError("unterminated label at position " + std::to_string(start));
    std::string out = src_.substr(start, end - start);
    at_ = end + 1;
    advance();
    return out;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " at position " + std::to_string(tok_.pos));
  }

 private:
  void advance() {
    while (at_ < static_cast<int>(src_.size()) && std::isspace((unsigned char)src_[at_])) ++at_;
    tok_.pos = at_;
    if (at_ >= static_cast<int>(src_.size())) {
      tok_.type = Token::Type::End;
      tok_.text.clear();
      return;
    }
    char c = src_[at_];
    auto one = [&](Token::Type t) {
      tok_.type = t;
      tok_.text = std::string(1, c);
      ++at_;
    };
    if (std::isdigit((unsigned char)c) ||
        (c == '-' && at_ + 1 < static_cast<int>(src_.size()) &&
         std::isdigit((unsigned char)src_[at_ + 1]))) {
      const char* start = src_.c_str() + at_;
      char* end = nullptr;
      tok_.num = std::strtod(start, &end);
      tok_.type = Token::Type::Number;
      tok_.text = std::string(start, end - start);
      at_ += static_cast<int>(end - start);
      return;
    }
    if (std::isalpha((unsigned char)c) || c == '_') {
      int b = at_;
      while (at_ < static_cast<int>(src_.size()) &&
             (std::isalnum((unsigned char)src_[at_]) || src_[at_] == '_'))
        ++at_;
      tok_.type = Token::Type::Name;
      tok_.text = src_.substr(b, at_ - b);
      return;
    }
    switch (c) {
      case '(': one(Token::Type::LParen); return;
      case ')': one(Token::Type::RParen); return;
      case '[': one(Token::Type::LBracket); return;
      case ']': one(Token::Type::RBracket); return;
      case ',': one(Token::Type::Comma); return;
      case ':': one(Token::Type::Colon); return;
      case '.': one(Token::Type::Dot); return;
      case '+': one(Token::Type::Plus); return;
      case '*': one(Token::Type::Star); return;
      case '-': one(Token::Type::Minus); return;
      default:
        throw ParseError(std::string("unexpected character '") + c + "' at position " +
                         std::to_string(at_));
    }
  }

  std::string src_;
  int at_ = 0;
  Token tok_;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lex_(text) {}

  ScalarPtr parse() {
    ScalarPtr s = scalar();
    if (lex_.peek().type != Token::Type::End) lex_.fail("trailing input");
    return s;
  }

 private:
  void expect(Token::Type t, const std::string& what) {
    if (lex_.peek().type != t) lex_.fail("expected " + what);
    lex_.next();
  }

  ScalarPtr scalar() {
    const Token& t = lex_.peek();
    if (t.type == Token::Type::Name && (t.text == "sup" || t.text == "inf")) {
      bool is_sup = t.text == "sup";
      lex_.next();
      if (lex_.peek().type != Token::Type::Name) lex_.fail("expected binder name");
      std::string var = lex_.next().text;
      if (keywords().count(var)) throw ParseError("binder name '" + var + "' is reserved");
      expect(Token::Type::Colon, "':'");
      if (lex_.peek().type != Token::Type::Name || lex_.peek().text != "S")
        lex_.fail("expected sort 'S[...]'");
      lex_.next();
      expect(Token::Type::LBracket, "'['");
      std::string sort = lex_.raw_label();
      expect(Token::Type::Dot, "'.' before binder body");
      auto node = std::make_shared<ScalarNode>();
      node->kind = is_sup ? ScalarNode::Kind::Sup : ScalarNode::Kind::Inf;
      node->binder_var = var;
      node->binder_sort = sort;
      node->body = scalar();
      return node;
    }
    return additive();
  }

  ScalarPtr additive() {
    std::vector<ScalarPtr> parts{mult()};
    while (lex_.peek().type == Token::Type::Plus) {
      lex_.next();
      parts.push_back(mult());
    }
    if (parts.size() == 1) return parts[0];
    auto node = std::make_shared<ScalarNode>();
    node->kind = ScalarNode::Kind::Add;
    node->args = std::move(parts);
    return node;
  }

  ScalarPtr mult() {
    std::vector<ScalarPtr> parts{factor()};
    while (lex_.peek().type == Token::Type::Star) {
      lex_.next();
      parts.push_back(factor());
    }
    if (parts.size() == 1) return parts[0];
    auto node = std::make_shared<ScalarNode>();
    node->kind = ScalarNode::Kind::Mul;
    node->args = std::move(parts);
    return node;
  }

  ScalarPtr two_arg(ScalarNode::Kind kind) {
    lex_.next();
    expect(Token::Type::LParen, "'('");
    auto node = std::make_shared<ScalarNode>();
    node->kind = kind;
    node->args.push_back(scalar());
    expect(Token::Type::Comma, "','");
    node->args.push_back(scalar());
    expect(Token::Type::RParen, "')'");
    return node;
  }

  ScalarPtr factor() {
    const Token& t = lex_.peek();
    if (t.type == Token::Type::Number) {
      auto node = std::make_shared<ScalarNode>();
      node->kind = ScalarNode::Kind::Number;
      node->number = lex_.next().num;
      return node;
    }
    if (t.type == Token::Type::LParen) {
      lex_.next();
      ScalarPtr inner = scalar();
      expect(Token::Type::RParen, "')'");
      return inner;
    }
    if (t.type == Token::Type::Name) {
      if (t.text == "max") return two_arg(ScalarNode::Kind::Max);
      if (t.text == "min") return two_arg(ScalarNode::Kind::Min);
      if (t.text == "absdiff") return two_arg(ScalarNode::Kind::AbsDiff);
      if (t.text == "ip") {
        lex_.next();
        expect(Token::Type::LParen, "'('");
        auto node = std::make_shared<ScalarNode>();
        node->kind = ScalarNode::Kind::Ip;
        node->ta = term();
        expect(Token::Type::Comma, "','");
        node->tb = term();
        expect(Token::Type::RParen, "')'");
        return node;
      }
      if (t.text == "nrm") {
        lex_.next();
        expect(Token::Type::LParen, "'('");
        auto node = std::make_shared<ScalarNode>();
        node->kind = ScalarNode::Kind::Nrm;
        node->ta = term();
        expect(Token::Type::RParen, "')'");
        return node;
      }
    }
    lex_.fail("expected a scalar factor");
  }

  TermPtr term() {
    const Token& t = lex_.peek();
    auto node = std::make_shared<TermNode>();
    if (t.type == Token::Type::Number) {
      if (t.num != 0.0) lex_.fail("only 0 is a vector literal");
      lex_.next();
      node->kind = TermNode::Kind::Zero;
      return node;
    }
    if (t.type == Token::Type::Minus) {
      lex_.next();
      node->kind = TermNode::Kind::Neg;
      node->a = term();
      return node;
    }
    if (t.type == Token::Type::Name) {
      if (t.text == "i") {
        lex_.next();
        expect(Token::Type::Star, "'*' after i");
        node->kind = TermNode::Kind::IMul;
        node->a = term();
        return node;
      }
      if (t.text == "avg") {
        lex_.next();
        expect(Token::Type::LParen, "'('");
        node->kind = TermNode::Kind::Avg;
        node->a = term();
        expect(Token::Type::Comma, "','");
        node->b = term();
        expect(Token::Type::RParen, "')'");
        return node;
      }
      if (t.text == "pi") {
        lex_.next();
        expect(Token::Type::LBracket, "'['");
        node->kind = TermNode::Kind::Pi;
        node->name = lex_.raw_label();
        expect(Token::Type::LParen, "'('");
        node->a = term();
        expect(Token::Type::RParen, "')'");
        return node;
      }
      if (keywords().count(t.text)) lex_.fail("keyword '" + t.text + "' is not a vector");
      node->kind = TermNode::Kind::Var;
      node->name = lex_.next().text;
      return node;
    }
    lex_.fail("expected a vector term");
  }

  Lexer lex_;
};

// Shortest decimal rendering that parses back to the same double.
std::string fmt_double(double v) {
  for (int prec = 1; prec <= 17; ++prec) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    if (std::strtod(os.str().c_str(), nullptr) == v) return os.str();
  }
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

enum class Ctx { Top, AddArg, MulArg };

void print_term(const TermPtr& t, std::string& out) {
  switch (t->kind) {
    case TermNode::Kind::Zero: out += "0"; return;
    case TermNode::Kind::Var: out += t->name; return;
    case TermNode::Kind::Neg:
      out += "-";
      print_term(t->a, out);
      return;
    case TermNode::Kind::IMul:
      out += "i*";
      print_term(t->a, out);
      return;
    case TermNode::Kind::Avg:
      out += "avg(";
      print_term(t->a, out);
      out += ", ";
      print_term(t->b, out);
      out += ")";
      return;
    case TermNode::Kind::Pi:
      out += "pi[" + t->name + "](";
      print_term(t->a, out);
      out += ")";
      return;
  }
}

void print_scalar(const ScalarPtr& s, Ctx ctx, std::string& out) {
  auto parenthesized = [&](auto&& body) {
    out += "(";
    body();
    out += ")";
  };
  switch (s->kind) {
    case ScalarNode::Kind::Number: out += fmt_double(s->number); return;
    case ScalarNode::Kind::Sup:
    case ScalarNode::Kind::Inf: {
      auto body = [&] {
        out += (s->kind == ScalarNode::Kind::Sup ? "sup " : "inf ");
        out += s->binder_var + ":S[" + s->binder_sort + "] . ";
        print_scalar(s->body, Ctx::Top, out);
      };
      if (ctx == Ctx::Top)
        body();
      else
        parenthesized(body);
      return;
    }
    case ScalarNode::Kind::Add: {
      auto body = [&] {
        for (size_t i = 0; i < s->args.size(); ++i) {
          if (i) out += " + ";
          print_scalar(s->args[i], Ctx::AddArg, out);
        }
      };
      if (ctx == Ctx::MulArg || ctx == Ctx::AddArg)
        parenthesized(body);
      else
        body();
      return;
    }
    case ScalarNode::Kind::Mul: {
      auto body = [&] {
        for (size_t i = 0; i < s->args.size(); ++i) {
          if (i) out += " * ";
          print_scalar(s->args[i], Ctx::MulArg, out);
        }
      };
      if (ctx == Ctx::MulArg)
        parenthesized(body);
      else
        body();
      return;
    }
    case ScalarNode::Kind::Max:
    case ScalarNode::Kind::Min:
    case ScalarNode::Kind::AbsDiff: {
      out += s->kind == ScalarNode::Kind::Max   ? "max("
             : s->kind == ScalarNode::Kind::Min ? "min("
                                                : "absdiff(";
      print_scalar(s->args[0], Ctx::Top, out);
      out += ", ";
      print_scalar(s->args[1], Ctx::Top, out);
      out += ")";
      return;
    }
    case ScalarNode::Kind::Ip:
      out += "ip(";
      print_term(s->ta, out);
      out += ", ";
      print_term(s->tb, out);
      out += ")";
      return;
    case ScalarNode::Kind::Nrm:
      out += "nrm(";
      print_term(s->ta, out);
      out += ")";
      return;
  }
}

std::string infer_term(const TermPtr& t, std::map<std::string, std::string>& env,
                       const MetricStructure& m) {
  std::string sort;
  switch (t->kind) {
    case TermNode::Kind::Zero: sort = ""; break;
    case TermNode::Kind::Var: {
      auto it = env.find(t->name);
      if (it == env.end()) throw ParseError("unbound variable '" + t->name + "'");
      sort = it->second;
      break;
    }
    case TermNode::Kind::Neg:
    case TermNode::Kind::IMul: sort = infer_term(t->a, env, m); break;
    case TermNode::Kind::Avg: {
      std::string sa = infer_term(t->a, env, m);
      std::string sb = infer_term(t->b, env, m);
      // All sorts share one ambient space, so cross-sort averages are valid
      // vectors; they just carry no sort of their own (pi cannot follow).
      if (sa == sb) sort = sa;
      else if (sa.empty() || sb.empty()) sort = sa.empty() ? sb : sa;
      else sort = "";
      break;
    }
    case TermNode::Kind::Pi: {
      if (!m.has_sort(t->name)) throw MissingSort("pi[" + t->name + "]: no such sort");
      std::string inner = infer_term(t->a, env, m);
      if (inner.empty())
        throw ParseError("cannot apply pi[" + t->name + "] to a vector of undetermined sort");
      auto target = m.product_label(t->name, inner);
      if (!target)
        throw MissingSort("no product sort for pi[" + t->name + "] on S[" + inner + "]");
      sort = *target;
      break;
    }
  }
  t->sort = sort;
  return sort;
}

void check_scalar(const ScalarPtr& s, std::map<std::string, std::string>& env,
                  std::set<std::string>& seen, const MetricStructure& m) {
  switch (s->kind) {
    case ScalarNode::Kind::Number: return;
    case ScalarNode::Kind::Sup:
    case ScalarNode::Kind::Inf: {
      if (keywords().count(s->binder_var))
        throw ParseError("binder name '" + s->binder_var + "' is reserved");
      if (!seen.insert(s->binder_var).second)
        throw ParseError("duplicate binder name '" + s->binder_var + "'");
      if (!m.has_sort(s->binder_sort))
        throw MissingSort("binder ranges over unknown sort '" + s->binder_sort + "'");
      env[s->binder_var] = s->binder_sort;
      check_scalar(s->body, env, seen, m);
      env.erase(s->binder_var);
      return;
    }
    case ScalarNode::Kind::Add:
    case ScalarNode::Kind::Mul:
    case ScalarNode::Kind::Max:
    case ScalarNode::Kind::Min:
    case ScalarNode::Kind::AbsDiff:
      for (const auto& a : s->args) check_scalar(a, env, seen, m);
      return;
    case ScalarNode::Kind::Ip:
      infer_term(s->ta, env, m);
      infer_term(s->tb, env, m);
      return;
    case ScalarNode::Kind::Nrm: infer_term(s->ta, env, m); return;
  }
}

// Evaluation: binders optimize over their sort's ball coordinates.
class Evaluator {
 public:
  Evaluator(const MetricStructure& m, const EvalOptions& opt) : m_(m), opt_(opt) {
    report_.options = opt;
  }

  EvalReport run(const Sentence& s) {
    report_.value = eval(s.root);
    return report_;
  }

 private:
  VecC eval_term(const TermPtr& t) {
    switch (t->kind) {
      case TermNode::Kind::Zero: return VecC::Zero(m_.ambient_dim());
      case TermNode::Kind::Var: {
        auto it = env_.find(t->name);
        if (it == env_.end()) throw ParseError("unbound variable '" + t->name + "'");
        return it->second;
      }
      case TermNode::Kind::Neg: return -eval_term(t->a);
      case TermNode::Kind::IMul: return Complex(0, 1) * eval_term(t->a);
      case TermNode::Kind::Avg: return 0.5 * (eval_term(t->a) + eval_term(t->b));
      case TermNode::Kind::Pi: return m_.sort(t->name).pi_op * eval_term(t->a);
    }
    throw ParseError("corrupt term node");
  }

  double eval(const ScalarPtr& s) {
    switch (s->kind) {
      case ScalarNode::Kind::Number: return s->number;
      case ScalarNode::Kind::Add: {
        double v = 0.0;
        for (const auto& a : s->args) v += eval(a);
        return v;
      }
      case ScalarNode::Kind::Mul: {
        double v = 1.0;
        for (const auto& a : s->args) v *= eval(a);
        return v;
      }
      case ScalarNode::Kind::Max: return std::max(eval(s->args[0]), eval(s->args[1]));
      case ScalarNode::Kind::Min: return std::min(eval(s->args[0]), eval(s->args[1]));
      case ScalarNode::Kind::AbsDiff: return std::abs(eval(s->args[0]) - eval(s->args[1]));
      case ScalarNode::Kind::Ip: return m_.predicate(eval_term(s->ta), eval_term(s->tb));
      case ScalarNode::Kind::Nrm: return eval_term(s->ta).norm();
      case ScalarNode::Kind::Sup: return binder(s, true);
      case ScalarNode::Kind::Inf: return binder(s, false);
    }
    throw ParseError("corrupt scalar node");
  }

  static VecC complexify(const Eigen::VectorXd& v) {
    int d = static_cast<int>(v.size()) / 2;
    VecC w(d);
    for (int k = 0; k < d; ++k) w(k) = Complex(v(k), v(d + k));
    return w;
  }

  double binder(const ScalarPtr& s, bool is_sup) {
    const Sort& sort = m_.sort(s->binder_sort);
    const int D = m_.ambient_dim();
    auto value_at = [&](const VecC& w) {
      env_[s->binder_var] = sort.op * w;
      double v = eval(s->body);
      return v;
    };

    // Split gamma * nrm(term) products so the square becomes a quadratic.
    double gamma = 1.0;
    ScalarPtr norm_node;
    bool is_norm = false;
    if (s->body->kind == ScalarNode::Kind::Nrm) {
      is_norm = true;
      norm_node = s->body;
    } else if (s->body->kind == ScalarNode::Kind::Mul) {
      int nrm_count = 0;
      for (const auto& a : s->body->args) {
        if (a->kind == ScalarNode::Kind::Number) {
          gamma *= a->number;
        } else if (a->kind == ScalarNode::Kind::Nrm) {
          ++nrm_count;
          norm_node = a;
        } else {
          nrm_count = 3;  // unsupported shape
        }
      }
      is_norm = nrm_count == 1;
    }

    double result = 0.0;
    if (try_quadratic(s, is_sup, is_norm, gamma, norm_node, sort, D, value_at, result)) {
      ++report_.exact_binders;
      env_.erase(s->binder_var);
      return result;
    }

    auto fn = [&](const VecC& w) { return is_sup ? value_at(w) : -value_at(w); };
    Rng rng(opt_.seed ^ (0x51ed270b7a3c9f45ULL + std::hash<std::string>{}(s->binder_var)));
    std::vector<VecC> starts{sort.solver.top_right_singular()};
    BallMaxOptions bopt{opt_.multistarts, opt_.iters, 0.4};
    BallMaxResult r = maximize_over_ball(D, fn, nullptr, starts, nullptr, bopt, rng);
    ++report_.engine_binders;
    env_.erase(s->binder_var);
    return is_sup ? r.value : -r.value;
  }

  // Probe the body (or the squared norm inside it) as a quadratic in the
  // ball coordinates; on a certified match, the trust-region solver gives
  // the exact ball optimum.
  bool try_quadratic(const ScalarPtr& s, bool is_sup, bool is_norm, double gamma,
                     const ScalarPtr& norm_node, const Sort& sort, int D,
                     const std::function<double(const VecC&)>& value_at, double& result) {
    const int n = 2 * D;
    if (n > 64) return false;
    auto probe = [&](const Eigen::VectorXd& v) -> double {
      VecC w = complexify(v);
      if (is_norm) {
        env_[s->binder_var] = sort.op * w;
        return eval_term(norm_node->ta).squaredNorm();
      }
      return value_at(w);
    };
    double c0 = probe(Eigen::VectorXd::Zero(n));
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd b(n), qp(n);
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e(k) = 1.0;
      double plus = probe(e), minus = probe(-e);
      qp(k) = plus;
      a(k, k) = 0.5 * (plus + minus - 2.0 * c0);
      b(k) = 0.25 * (plus - minus);
    }
    for (int k = 0; k < n; ++k)
      for (int l = k + 1; l < n; ++l) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e(k) = 1.0;
        e(l) = 1.0;
        double val = probe(e);
        a(k, l) = a(l, k) = 0.5 * (val - qp(k) - qp(l) + c0);
      }
    // Certify the quadratic model at random ball points before trusting it.
    Rng rng(opt_.seed ^ 0x0f0f1e1e2d2d3c3cULL);
    double scale = std::abs(c0) + b.cwiseAbs().sum() + a.cwiseAbs().sum() + 1.0;
    for (int trial = 0; trial < 8; ++trial) {
      VecC w = rng.ball_vector(D);
      Eigen::VectorXd v(n);
      for (int k = 0; k < D; ++k) {
        v(k) = w(k).real();
        v(D + k) = w(k).imag();
      }
      double actual = probe(v);
      double predicted = v.dot(a * v) + 2.0 * b.dot(v) + c0;
      if (std::abs(actual - predicted) > 1e-8 * scale) return false;
    }

    if (is_norm) {
      if (gamma == 0.0) {
        result = 0.0;
        return true;
      }
      bool want_max = is_sup == (gamma > 0.0);
      double sq;
      if (want_max)
        sq = -trust_region_min(-a, -b, -c0).value;
      else
        sq = trust_region_min(a, b, c0).value;
      result = gamma * std::sqrt(std::max(sq, 0.0));
      return true;
    }
    if (is_sup)
      result = -trust_region_min(-a, -b, -c0).value;
    else
      result = trust_region_min(a, b, c0).value;
    return true;
  }

  const MetricStructure& m_;
  EvalOptions opt_;
  EvalReport report_;
  std::map<std::string, VecC> env_;
};

}  // namespace

Sentence parse_sentence(const std::string& text) {
  Parser p(text);
  return Sentence{p.parse()};
}

std::string print_sentence(const Sentence& s) {
  if (!s.root) throw ParseError("empty sentence");
  std::string out;
  print_scalar(s.root, Ctx::Top, out);
  return out;
}

void check_sorts(Sentence& s, const MetricStructure& m) {
  if (!s.root) throw ParseError("empty sentence");
  std::map<std::string, std::string> env;
  std::set<std::string> seen;
  check_scalar(s.root, env, seen, m);
}

EvalReport evaluate_sentence(const Sentence& s, const MetricStructure& m,
                             const EvalOptions& options) {
  Sentence copy = s;  // sort annotations are refreshed against this structure
  check_sorts(copy, m);
  Evaluator ev(m, options);
  return ev.run(copy);
}

EvalReport evaluate_sentence(const Sentence& s, const MetricStructure& m) {
  return evaluate_sentence(s, m, EvalOptions());
}

}  // namespace starrep
