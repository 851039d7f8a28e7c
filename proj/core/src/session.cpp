#include "starrep/session.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "starrep/errors.hpp"
#include "starrep/kazhdan.hpp"
#include "starrep/sentence.hpp"
#include "starrep/structure.hpp"
#include "starrep/ultraproduct.hpp"

namespace starrep {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

// Unknown fields are config errors: silent typos must not change a run.
void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) fail(where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) fail(where + ": unknown field \"" + k + "\"");
}

const json* find(const json& j, const std::string& key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

int get_int(const json& j, const std::string& key, const std::string& where) {
  const json* v = find(j, key);
  if (!v || !v->is_number_integer()) fail(where + ": \"" + key + "\" must be an integer");
  return v->get<int>();
}

int get_int_or(const json& j, const std::string& key, int fallback, const std::string& where) {
  return find(j, key) ? get_int(j, key, where) : fallback;
}

double get_double(const json& j, const std::string& key, const std::string& where) {
  const json* v = find(j, key);
  if (!v || !v->is_number()) fail(where + ": \"" + key + "\" must be a number");
  return v->get<double>();
}

double get_double_or(const json& j, const std::string& key, double fallback,
                     const std::string& where) {
  return find(j, key) ? get_double(j, key, where) : fallback;
}

std::string get_string(const json& j, const std::string& key, const std::string& where) {
  const json* v = find(j, key);
  if (!v || !v->is_string()) fail(where + ": \"" + key + "\" must be a string");
  return v->get<std::string>();
}

bool get_bool_or(const json& j, const std::string& key, bool fallback, const std::string& where) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_boolean()) fail(where + ": \"" + key + "\" must be a boolean");
  return v->get<bool>();
}

Complex parse_complex(const json& j, const std::string& where) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return Complex(j[0].get<double>(), j[1].get<double>());
  fail(where + ": expected a number or an [re, im] pair");
}

int parse_element_key(const std::string& key, const std::string& where) {
  try {
    std::size_t pos = 0;
    int g = std::stoi(key, &pos);
    if (pos != key.size()) fail(where + ": key \"" + key + "\" is not a group element index");
    return g;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    fail(where + ": key \"" + key + "\" is not a group element index");
  }
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t x = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  return x;
}

long long powmod(long long b, long long e, long long mod) {
  long long out = 1 % mod;
  b %= mod;
  for (; e > 0; e >>= 1) {
    if (e & 1) out = out * b % mod;
    b = b * b % mod;
  }
  return out;
}

std::string sanitize(const std::string& raw) {
  std::string out;
  for (char c : raw)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out.empty() ? std::string("cmd") : out;
}

json json_complex(const Complex& c) { return json::array({c.real(), c.imag()}); }

json json_vector(const VecC& v) {
  json out = json::array();
  for (int k = 0; k < v.size(); ++k) out.push_back(json_complex(v(k)));
  return out;
}

VecC parse_vector(const json& j, int dim, const std::string& where) {
  if (j.is_object()) {
    require_keys(j, {"basis", "random", "ones"}, where);
    if (const json* b = find(j, "basis")) {
      int k = b->get<int>();
      if (k < 0 || k >= dim) fail(where + ": basis index out of range");
      VecC v = VecC::Zero(dim);
      v(k) = 1.0;
      return v;
    }
    if (const json* s = find(j, "random")) {
      Rng rng(s->get<std::uint64_t>());
      return rng.unit_vector(dim);
    }
    if (find(j, "ones")) {
      VecC v = VecC::Ones(dim);
      return v / v.norm();
    }
    fail(where + ": empty vector spec");
  }
  if (j.is_array()) {
    if (static_cast<int>(j.size()) != dim)
      fail(where + ": vector literal has length " + std::to_string(j.size()) + ", expected " +
           std::to_string(dim));
    VecC v(dim);
    for (int k = 0; k < dim; ++k) v(k) = parse_complex(j[k], where);
    return v;
  }
  fail(where + ": expected a vector literal or a {basis|random|ones} spec");
}

// ---------------------------------------------------------------------------
// Config resolution.  Everything below throws ConfigError; nothing here runs
// a command, so a bad config never produces partial artifacts.

struct Resolved {
  std::uint64_t seed = 0;
  double tolerance = 1e-8;
  GroupPtr group;
  std::vector<std::pair<std::string, AlgebraElement>> elements;
  std::map<std::string, int> element_index;
  std::vector<std::string> export_elements;
  std::vector<std::pair<std::string, UnitaryRep>> reps;
  std::map<std::string, int> rep_index;
  std::vector<std::pair<std::string, MetricStructure>> structures;
  std::map<std::string, int> structure_index;
  std::vector<std::pair<std::string, VectorSequence>> sequences;
  std::map<std::string, int> sequence_index;
  json commands = json::array();

  const AlgebraElement& element(const std::string& name, const std::string& where) const {
    auto it = element_index.find(name);
    if (it == element_index.end()) fail(where + ": unknown element \"" + name + "\"");
    return elements[it->second].second;
  }
  const UnitaryRep& rep(const std::string& name, const std::string& where) const {
    auto it = rep_index.find(name);
    if (it == rep_index.end()) fail(where + ": unknown representation \"" + name + "\"");
    return reps[it->second].second;
  }
  const MetricStructure& structure(const std::string& name, const std::string& where) const {
    auto it = structure_index.find(name);
    if (it == structure_index.end()) fail(where + ": unknown structure \"" + name + "\"");
    return structures[it->second].second;
  }
  const VectorSequence& sequence(const std::string& name, const std::string& where) const {
    auto it = sequence_index.find(name);
    if (it == sequence_index.end()) fail(where + ": unknown sequence \"" + name + "\"");
    return sequences[it->second].second;
  }
};

GroupPtr resolve_group(const json& spec) {
  const std::string where = "group";
  require_keys(spec, {"kind", "n", "points", "window", "table"}, where);
  std::string kind = get_string(spec, "kind", where);
  try {
    if (kind == "cyclic") return Group::cyclic(get_int(spec, "n", where));
    if (kind == "symmetric3") return Group::symmetric3();
    if (kind == "dihedral") return Group::dihedral(get_int(spec, "n", where));
    if (kind == "circle") return Group::circle_discretized(get_int(spec, "points", where));
    if (kind == "integers") return Group::integers_windowed(get_int(spec, "window", where));
    if (kind == "table") {
      const json* t = find(spec, "table");
      if (!t || !t->is_array()) fail(where + ": \"table\" must be an array of rows");
      std::vector<std::vector<int>> table;
      for (const auto& row : *t) table.push_back(row.get<std::vector<int>>());
      return Group::finite_table(std::move(table));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(where + ": " + e.what());
  } catch (const std::exception& e) {
    fail(where + ": " + e.what());
  }
  fail(where + ": unknown kind \"" + kind + "\" (cyclic, symmetric3, dihedral, circle, integers, table)");
}

std::map<int, Complex> parse_value_map(const json& j, const GroupPtr& group,
                                       const std::string& where) {
  std::map<int, Complex> out;
  if (!j.is_object()) fail(where + ": expected an object keyed by element index");
  for (const auto& [k, v] : j.items()) {
    int g = parse_element_key(k, where);
    if (!group->contains(g)) fail(where + ": element " + k + " is outside the group");
    out[g] = parse_complex(v, where);
  }
  return out;
}

AlgebraElement resolve_element_spec(const json& spec, const GroupPtr& group, const Resolved& r,
                                    const std::string& name) {
  const std::string where = "elements." + name;
  require_keys(spec,
               {"atoms", "density", "approx_id", "uniform", "dirac", "coeff", "star_of",
                "convolve", "sum", "scale", "of", "by"},
               where);
  try {
    if (find(spec, "approx_id")) {
      int level = get_int(spec, "approx_id", where);
      if (level < 0 || level > group->resolution_limit())
        fail(where + ": approx_id level must lie in [0, " +
             std::to_string(group->resolution_limit()) + "]");
      return approximate_identity(group, level);
    }
    if (find(spec, "uniform")) return AlgebraElement::uniform_density(group);
    if (find(spec, "dirac")) {
      int g = get_int(spec, "dirac", where);
      if (!group->contains(g)) fail(where + ": dirac element is outside the group");
      Complex c = find(spec, "coeff") ? parse_complex(*find(spec, "coeff"), where) : Complex(1.0);
      return AlgebraElement::dirac(group, g, c);
    }
    if (find(spec, "star_of")) return r.element(get_string(spec, "star_of", where), where).involution();
    if (const json* conv = find(spec, "convolve")) {
      if (!conv->is_array() || conv->size() != 2) fail(where + ": convolve takes two names");
      return convolve(r.element((*conv)[0].get<std::string>(), where),
                      r.element((*conv)[1].get<std::string>(), where));
    }
    if (const json* s = find(spec, "sum")) {
      if (!s->is_array() || s->empty()) fail(where + ": sum takes at least one name");
      AlgebraElement acc = r.element((*s)[0].get<std::string>(), where);
      for (std::size_t k = 1; k < s->size(); ++k)
        acc = acc + r.element((*s)[k].get<std::string>(), where);
      return acc;
    }
    if (find(spec, "scale")) {
      std::string of = get_string(spec, "of", where);
      Complex by = find(spec, "by") ? parse_complex(*find(spec, "by"), where) : Complex(1.0);
      return r.element(of, where).scaled(by);
    }
    const json* atoms = find(spec, "atoms");
    const json* density = find(spec, "density");
    if (!atoms && !density) fail(where + ": element spec is empty");
    AlgebraElement out = AlgebraElement::zero(group);
    if (density) out = AlgebraElement::density(group, parse_value_map(*density, group, where));
    if (atoms)
      for (const auto& [g, c] : parse_value_map(*atoms, group, where))
        out = out + AlgebraElement::dirac(group, g, c);
    return out;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(where + ": " + e.what());
  }
}

UnitaryRep resolve_rep_spec(const json& spec, const GroupPtr& group, const Resolved& r,
                            const std::string& name) {
  const std::string where = "representations." + name;
  require_keys(spec, {"kind", "dim", "k", "parts", "of", "extra", "seed"}, where);
  std::string kind = get_string(spec, "kind", where);
  try {
    if (kind == "regular") return UnitaryRep::regular(group);
    if (kind == "trivial") return UnitaryRep::trivial(group, get_int_or(spec, "dim", 1, where));
    if (kind == "character") return UnitaryRep::character(group, get_int(spec, "k", where));
    if (kind == "direct_sum") {
      const json* parts = find(spec, "parts");
      if (!parts || !parts->is_array() || parts->size() < 2)
        fail(where + ": direct_sum takes at least two part names");
      UnitaryRep acc = r.rep((*parts)[0].get<std::string>(), where);
      for (std::size_t k = 1; k < parts->size(); ++k)
        acc = acc.direct_sum(r.rep((*parts)[k].get<std::string>(), where));
      return acc;
    }
    if (kind == "padded")
      return r.rep(get_string(spec, "of", where), where).padded(get_int(spec, "extra", where));
    if (kind == "conjugated") {
      const UnitaryRep& base = r.rep(get_string(spec, "of", where), where);
      Rng rng(static_cast<std::uint64_t>(get_int(spec, "seed", where)));
      return base.conjugated(random_unitary(base.dim(), rng));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(where + ": " + e.what());
  }
  fail(where + ": unknown kind \"" + kind +
       "\" (regular, trivial, character, direct_sum, padded, conjugated)");
}

MetricStructure resolve_structure_spec(const json& spec, const Resolved& r,
                                       const std::string& name) {
  const std::string where = "structures." + name;
  require_keys(spec, {"rep", "generators", "inflate_labels", "inflate_factor"}, where);
  const UnitaryRep& rep = r.rep(get_string(spec, "rep", where), where);
  const json* gens = find(spec, "generators");
  if (!gens || !gens->is_array() || gens->empty())
    fail(where + ": \"generators\" must be a nonempty array of element names");
  std::vector<std::pair<std::string, AlgebraElement>> generators;
  for (const auto& g : *gens) {
    std::string label = g.get<std::string>();
    generators.emplace_back(label, r.element(label, where));
  }
  MetricStructure::Options options;
  options.inflate_factor = get_double_or(spec, "inflate_factor", 1.0, where);
  if (const json* labels = find(spec, "inflate_labels"))
    options.inflate_labels = labels->get<std::vector<std::string>>();
  try {
    return MetricStructure::build(rep, generators, options);
  } catch (const Error& e) {
    fail(where + ": " + e.what());
  }
}

int character_modulus(const GroupPtr& group) {
  switch (group->kind()) {
    case GroupKind::Cyclic: return group->param();
    case GroupKind::CircleDiscretized: return group->param();
    case GroupKind::IntegersWindowed: return 256;  // matches the character convention
    default: fail("sequences: character_pow needs an abelian kind");
  }
}

VectorSequence resolve_sequence_spec(const json& spec, const GroupPtr& group, const Resolved& r,
                                     const std::string& name) {
  const std::string where = "sequences." + name;
  require_keys(spec, {"rule", "rep", "vector", "base", "start", "of", "phi", "seed"}, where);
  std::string rule = get_string(spec, "rule", where);
  if (rule == "constant") {
    UnitaryRep rep = r.rep(get_string(spec, "rep", where), where);
    const json* vspec = find(spec, "vector");
    if (!vspec) fail(where + ": constant rule needs a \"vector\"");
    VecC v = parse_vector(*vspec, rep.ambient_dim(), where);
    return VectorSequence{RepSequence{group, [rep](int) { return rep; }, name},
                          [v](int) { return v; },
                          name,
                          std::nullopt,
                          {}};
  }
  if (rule == "character_pow") {
    long long modulus = character_modulus(group);
    long long base = get_int_or(spec, "base", 2, where);
    long long start = get_int_or(spec, "start", 1, where);
    if (base < 1 || start < 0) fail(where + ": base must be >= 1 and start >= 0");
    auto reps = [group, base, start, modulus](int i) {
      long long k = start % modulus * powmod(base, i, modulus) % modulus;
      return UnitaryRep::character(group, static_cast<int>(k));
    };
    return VectorSequence{RepSequence{group, reps, name},
                          [](int) { return VecC::Ones(1).eval(); },
                          name,
                          std::nullopt,
                          {}};
  }
  if (rule == "pushforward") {
    const VectorSequence& of = r.sequence(get_string(spec, "of", where), where);
    const AlgebraElement& phi = r.element(get_string(spec, "phi", where), where);
    return pushforward(of.reps, phi, of.at, name);
  }
  if (rule == "random_unit") {
    UnitaryRep rep = r.rep(get_string(spec, "rep", where), where);
    std::uint64_t seed = static_cast<std::uint64_t>(get_int_or(spec, "seed", 0, where));
    int dim = rep.ambient_dim();
    auto at = [seed, dim](int i) {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
      return rng.unit_vector(dim);
    };
    return VectorSequence{RepSequence{group, [rep](int) { return rep; }, name}, at, name,
                          std::nullopt, {}};
  }
  fail(where + ": unknown rule \"" + rule +
       "\" (constant, character_pow, pushforward, random_unit)");
}

Schedule parse_schedule(const json& cmd, const std::string& where) {
  const json* s = find(cmd, "schedule");
  if (!s) return default_schedule();
  if (!s->is_array() || s->empty()) fail(where + ": \"schedule\" must be a nonempty array");
  Schedule out;
  for (const auto& v : *s) {
    if (!v.is_number_integer() || v.get<int>() < 0)
      fail(where + ": schedule entries must be nonnegative integers");
    out.push_back(v.get<int>());
  }
  return out;
}

const std::set<std::string> kCommands = {"audit",    "reconstruct", "kazhdan", "classify",
                                         "cover",    "eval",        "search-q36"};

void validate_assert_keys(const json& cmd, const std::set<std::string>& allowed,
                          const std::string& where) {
  if (const json* a = find(cmd, "assert")) require_keys(*a, allowed, where + ".assert");
}

// Resolution-time validation of one command object; referenced names must
// already exist and sentences must parse and sort-check.
void validate_command(const json& cmd, const Resolved& r, int index) {
  const std::string where = "commands[" + std::to_string(index) + "]";
  if (!cmd.is_object()) fail(where + ": expected an object");
  std::string command = get_string(cmd, "command", where);
  if (!kCommands.count(command)) fail(where + ": unknown command \"" + command + "\"");
  if (find(cmd, "label")) get_string(cmd, "label", where);

  if (command == "audit") {
    require_keys(cmd, {"command", "label", "structure", "budget", "assert"}, where);
    r.structure(get_string(cmd, "structure", where), where);
    if (const json* b = find(cmd, "budget"))
      require_keys(*b, {"samples", "multistarts", "tuple_len", "iters", "pair_cap", "seed"},
                   where + ".budget");
    validate_assert_keys(
        cmd, {"max_residual_at_most", "max_residual_at_least", "axiom_residual_at_most",
              "sorts_at_least"},
        where);
  } else if (command == "reconstruct") {
    require_keys(cmd, {"command", "label", "structure", "rank_rel_tol", "tolerance", "assert"},
                 where);
    r.structure(get_string(cmd, "structure", where), where);
    validate_assert_keys(
        cmd, {"dim_equals", "intertwiner_at_most", "complex_structure_at_most"}, where);
  } else if (command == "kazhdan") {
    require_keys(cmd, {"command", "label", "rep", "q", "options", "definability", "assert"},
                 where);
    const UnitaryRep& rep = r.rep(get_string(cmd, "rep", where), where);
    const json* q = find(cmd, "q");
    if (!q || !q->is_array() || q->empty())
      fail(where + ": \"q\" must be a nonempty array of group elements");
    for (const auto& g : *q)
      if (!g.is_number_integer() || !rep.group()->contains(g.get<int>()))
        fail(where + ": q contains an element outside the group");
    if (const json* o = find(cmd, "options"))
      require_keys(*o, {"multistarts", "iters", "seed"}, where + ".options");
    if (const json* d = find(cmd, "definability"))
      require_keys(*d, {"samples", "bins", "seed"}, where + ".definability");
    validate_assert_keys(cmd, {"kappa_at_least", "kappa_at_most", "kappa_equals"}, where);
  } else if (command == "classify") {
    require_keys(cmd,
                 {"command", "label", "sequence", "schedule", "cauchy_tol", "tolerance",
                  "naive_limit", "assert"},
                 where);
    r.sequence(get_string(cmd, "sequence", where), where);
    parse_schedule(cmd, where);
    validate_assert_keys(
        cmd, {"agree", "pointwise_is", "approx_identity_is", "uniform_is"}, where);
    if (const json* a = find(cmd, "assert"))
      for (const std::string key : {"pointwise_is", "approx_identity_is", "uniform_is"})
        if (const json* v = find(*a, key)) {
          std::string s = v->get<std::string>();
          if (s != "holds" && s != "fails" && s != "inconclusive")
            fail(where + ".assert." + key + ": expected holds | fails | inconclusive");
        }
  } else if (command == "cover") {
    require_keys(cmd,
                 {"command", "label", "rep", "phi", "k", "max_level", "zeta", "scale", "trials",
                  "seed", "assert"},
                 where);
    const UnitaryRep& rep = r.rep(get_string(cmd, "rep", where), where);
    r.element(get_string(cmd, "phi", where), where);
    if (const json* k = find(cmd, "k")) {
      if (!k->is_array()) fail(where + ": \"k\" must be an array of group elements");
      for (const auto& g : *k)
        if (!g.is_number_integer() || !rep.group()->contains(g.get<int>()))
          fail(where + ": k contains an element outside the group");
    } else if (rep.group()->kind() == GroupKind::IntegersWindowed) {
      fail(where + ": the windowed integers need an explicit \"k\" set");
    }
    get_int(cmd, "max_level", where);
    if (const json* z = find(cmd, "zeta")) parse_vector(*z, rep.dim(), where);
    validate_assert_keys(cmd, {"violations_equal", "applicable_at_least"}, where);
  } else if (command == "eval") {
    require_keys(cmd, {"command", "label", "structure", "sentence", "options", "assert"}, where);
    const MetricStructure& m = r.structure(get_string(cmd, "structure", where), where);
    std::string text = get_string(cmd, "sentence", where);
    try {
      Sentence s = parse_sentence(text);
      check_sorts(s, m);
    } catch (const Error& e) {
      fail(where + ": sentence rejected: " + e.what());
    }
    if (const json* o = find(cmd, "options"))
      require_keys(*o, {"multistarts", "iters", "seed"}, where + ".options");
    validate_assert_keys(cmd, {"value_at_most", "value_at_least", "value_equals"}, where);
  } else if (command == "search-q36") {
    require_keys(cmd,
                 {"command", "label", "count", "seed", "schedule", "cauchy_tol", "tolerance",
                  "assert"},
                 where);
    if (get_int_or(cmd, "count", 8, where) < 1) fail(where + ": count must be positive");
    parse_schedule(cmd, where);
    validate_assert_keys(cmd, {"searched_equals"}, where);
  }
}

Resolved resolve(const json& config, const SessionOverrides& overrides) {
  require_keys(config,
               {"seed", "tolerance", "group", "elements", "export_elements", "representations",
                "structures", "sequences", "commands"},
               "config");
  Resolved r;
  r.seed = overrides.seed ? *overrides.seed
                          : static_cast<std::uint64_t>(get_int_or(config, "seed", 0, "config"));
  r.tolerance = overrides.tolerance ? *overrides.tolerance
                                    : get_double_or(config, "tolerance", 1e-8, "config");
  if (r.tolerance <= 0) fail("config: tolerance must be positive");
  const json* group = find(config, "group");
  if (!group) fail("config: missing \"group\"");
  r.group = resolve_group(*group);

  if (const json* elements = find(config, "elements")) {
    if (!elements->is_object()) fail("elements: expected an object of named elements");
    for (const auto& [name, spec] : elements->items()) {
      if (r.element_index.count(name)) fail("elements: duplicate name \"" + name + "\"");
      AlgebraElement e = resolve_element_spec(spec, r.group, r, name);
      r.element_index[name] = static_cast<int>(r.elements.size());
      r.elements.emplace_back(name, std::move(e));
    }
  }
  if (const json* exports = find(config, "export_elements")) {
    if (!exports->is_array()) fail("export_elements: expected an array of element names");
    for (const auto& name : *exports) {
      std::string n = name.get<std::string>();
      r.element(n, "export_elements");
      r.export_elements.push_back(n);
    }
  }
  if (const json* reps = find(config, "representations")) {
    if (!reps->is_object()) fail("representations: expected an object of named representations");
    for (const auto& [name, spec] : reps->items()) {
      if (r.rep_index.count(name)) fail("representations: duplicate name \"" + name + "\"");
      UnitaryRep rep = resolve_rep_spec(spec, r.group, r, name);
      r.rep_index[name] = static_cast<int>(r.reps.size());
      r.reps.emplace_back(name, std::move(rep));
    }
  }
  if (const json* structures = find(config, "structures")) {
    if (!structures->is_object()) fail("structures: expected an object of named structures");
    for (const auto& [name, spec] : structures->items()) {
      if (r.structure_index.count(name)) fail("structures: duplicate name \"" + name + "\"");
      MetricStructure m = resolve_structure_spec(spec, r, name);
      r.structure_index[name] = static_cast<int>(r.structures.size());
      r.structures.emplace_back(name, std::move(m));
    }
  }
  if (const json* sequences = find(config, "sequences")) {
    if (!sequences->is_object()) fail("sequences: expected an object of named sequences");
    for (const auto& [name, spec] : sequences->items()) {
      if (r.sequence_index.count(name)) fail("sequences: duplicate name \"" + name + "\"");
      VectorSequence seq = resolve_sequence_spec(spec, r.group, r, name);
      try {
        (void)seq.reps.at(1);
        (void)seq.at(1);
      } catch (const Error& e) {
        fail("sequences." + name + ": " + e.what());
      }
      r.sequence_index[name] = static_cast<int>(r.sequences.size());
      r.sequences.emplace_back(name, std::move(seq));
    }
  }
  if (const json* commands = find(config, "commands")) {
    if (!commands->is_array()) fail("commands: expected an array");
    r.commands = *commands;
    for (std::size_t i = 0; i < r.commands.size(); ++i)
      validate_command(r.commands[i], r, static_cast<int>(i));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Execution.

struct Workspace {
  fs::path out_dir;
  std::vector<std::string> artifacts;
  std::vector<std::string> failures;
  bool nonconvergent = false;

  std::ofstream open_artifact(const std::string& name) {
    std::ofstream out(out_dir / name);
    if (!out) fail("cannot write artifact \"" + name + "\" in " + out_dir.string());
    out.precision(17);
    artifacts.push_back(name);
    return out;
  }
};

// Records each configured assertion as {check, value, bound, passed}.
struct Asserter {
  json rows = json::array();
  bool all_passed = true;
  std::string context;
  std::vector<std::string>* failures;

  void record(const std::string& check, double value, double bound, bool passed) {
    rows.push_back({{"check", check}, {"value", value}, {"bound", bound}, {"passed", passed}});
    if (!passed) {
      all_passed = false;
      std::ostringstream msg;
      msg.precision(17);
      msg << context << ": " << check << " failed (value " << value << ", bound " << bound << ")";
      failures->push_back(msg.str());
    }
  }
  void at_most(const std::string& check, double value, double bound) {
    record(check, value, bound, value <= bound);
  }
  void at_least(const std::string& check, double value, double bound) {
    record(check, value, bound, value >= bound);
  }
  void equals(const std::string& check, double value, double target, double tol) {
    record(check, value, target, std::abs(value - target) <= tol);
  }
  void truth(const std::string& check, bool value, bool expected) {
    record(check, value ? 1.0 : 0.0, expected ? 1.0 : 0.0, value == expected);
  }
};

std::string command_label(const json& cmd, int index) {
  std::string base = find(cmd, "label") ? cmd["label"].get<std::string>()
                                        : cmd["command"].get<std::string>();
  char prefix[16];
  std::snprintf(prefix, sizeof prefix, "%02d_", index + 1);
  return prefix + sanitize(base);
}

double equals_tol(const json& spec, double fallback) {
  if (spec.is_object() && spec.contains("tol")) return spec["tol"].get<double>();
  return fallback;
}
double equals_target(const json& spec, const std::string& where) {
  if (spec.is_number()) return spec.get<double>();
  if (spec.is_object() && spec.contains("value")) return spec["value"].get<double>();
  fail(where + ": *_equals takes a number or {value, tol}");
}

json run_audit(const json& cmd, const Resolved& r, Workspace& ws, const std::string& label,
               int index) {
  const std::string name = get_string(cmd, "structure", "audit");
  const MetricStructure& m = r.structure(name, "audit");
  AuditBudget budget;
  budget.seed = mix_seed(r.seed, index);
  if (const json* b = find(cmd, "budget")) {
    budget.samples = get_int_or(*b, "samples", budget.samples, "budget");
    budget.multistarts = get_int_or(*b, "multistarts", budget.multistarts, "budget");
    budget.tuple_len = get_int_or(*b, "tuple_len", budget.tuple_len, "budget");
    budget.iters = get_int_or(*b, "iters", budget.iters, "budget");
    budget.pair_cap = get_int_or(*b, "pair_cap", budget.pair_cap, "budget");
    if (find(*b, "seed")) budget.seed = static_cast<std::uint64_t>(get_int(*b, "seed", "budget"));
  }
  AuditReport report = audit_axioms(m, budget);

  json entry;
  entry["command"] = "audit";
  entry["structure"] = name;
  entry["sorts"] = m.sorts().size();
  entry["budget"] = {{"samples", budget.samples},   {"multistarts", budget.multistarts},
                     {"tuple_len", budget.tuple_len}, {"iters", budget.iters},
                     {"pair_cap", budget.pair_cap},   {"seed", budget.seed}};
  entry["max_residual"] = report.max_residual();
  json axioms = json::array();
  for (const AxiomResult& ax : report.axioms) {
    json a;
    a["axiom"] = ax.axiom;
    a["residual"] = ax.residual;
    a["certificate"] = ax.certificate;
    a["starts"] = ax.starts;
    if (!ax.note.empty()) a["note"] = ax.note;
    axioms.push_back(std::move(a));
  }
  entry["axioms"] = std::move(axioms);

  auto csv = ws.open_artifact(label + "_axioms.csv");
  csv << "axiom,residual,certificate,starts\n";
  for (const AxiomResult& ax : report.axioms)
    csv << ax.axiom << "," << ax.residual << "," << ax.certificate << "," << ax.starts << "\n";

  Asserter as{.context = label, .failures = &ws.failures};
  if (const json* a = find(cmd, "assert")) {
    if (const json* v = find(*a, "max_residual_at_most"))
      as.at_most("max_residual_at_most", report.max_residual(), v->get<double>());
    if (const json* v = find(*a, "max_residual_at_least"))
      as.at_least("max_residual_at_least", report.max_residual(), v->get<double>());
    if (const json* v = find(*a, "sorts_at_least"))
      as.at_least("sorts_at_least", static_cast<double>(m.sorts().size()), v->get<double>());
    if (const json* v = find(*a, "axiom_residual_at_most"))
      for (const auto& [axiom, bound] : v->items())
        as.at_most("axiom_residual_at_most." + axiom, report.by_name(axiom).residual,
                   bound.get<double>());
  }
  entry["assertions"] = std::move(as.rows);
  entry["passed"] = as.all_passed;
  return entry;
}

json run_reconstruct(const json& cmd, const Resolved& r, Workspace& ws,
                     const std::string& label) {
  const std::string name = get_string(cmd, "structure", "reconstruct");
  const MetricStructure& m = r.structure(name, "reconstruct");
  double rank_rel_tol = get_double_or(cmd, "rank_rel_tol", 1e-10, "reconstruct");
  double tol = get_double_or(cmd, "tolerance", r.tolerance, "reconstruct");
  ReconstructionReport report = reconstruct(m, rank_rel_tol, tol);

  json entry;
  entry["command"] = "reconstruct";
  entry["structure"] = name;
  entry["rank_rel_tol"] = rank_rel_tol;
  entry["tolerance"] = tol;
  entry["dim"] = report.dim_f;
  entry["rank"] = report.nondegenerate_rank;
  entry["intertwiner_residual"] = report.intertwiner_residual;
  entry["complex_structure_residual"] = report.complex_structure_residual;
  entry["gram_min_kept"] = report.gram_min_kept;
  entry["gram_max_dropped"] = report.gram_max_dropped;

  auto csv = ws.open_artifact(label + "_sorts.csv");
  csv << "sort,operator_residual\n";
  for (const auto& [sort, residual] : report.per_sort_residual)
    csv << sort << "," << residual << "\n";

  Asserter as{.context = label, .failures = &ws.failures};
  if (const json* a = find(cmd, "assert")) {
    if (const json* v = find(*a, "dim_equals"))
      as.equals("dim_equals", report.dim_f, v->get<double>(), 0.0);
    if (const json* v = find(*a, "intertwiner_at_most"))
      as.at_most("intertwiner_at_most", report.intertwiner_residual, v->get<double>());
    if (const json* v = find(*a, "complex_structure_at_most"))
      as.at_most("complex_structure_at_most", report.complex_structure_residual, v->get<double>());
  }
  entry["assertions"] = std::move(as.rows);
  entry["passed"] = as.all_passed;
  return entry;
}

json run_kazhdan(const json& cmd, const Resolved& r, Workspace& ws, const std::string& label,
                 int index) {
  const std::string name = get_string(cmd, "rep", "kazhdan");
  const UnitaryRep& rep = r.rep(name, "kazhdan");
  std::vector<int> q = cmd["q"].get<std::vector<int>>();
  KazhdanOptions options;
  options.seed = mix_seed(r.seed, index);
  if (const json* o = find(cmd, "options")) {
    options.multistarts = get_int_or(*o, "multistarts", options.multistarts, "options");
    options.iters = get_int_or(*o, "iters", options.iters, "options");
    if (find(*o, "seed")) options.seed = static_cast<std::uint64_t>(get_int(*o, "seed", "options"));
  }
  KazhdanResult res = kazhdan_constant(rep, q, options);

  json entry;
  entry["command"] = "kazhdan";
  entry["rep"] = name;
  entry["Q"] = q;
  entry["options"] = {{"multistarts", options.multistarts},
                      {"iters", options.iters},
                      {"seed", options.seed}};
  entry["defined"] = res.defined;
  entry["kappa"] = res.kappa;
  entry["lower"] = res.lower;
  entry["upper"] = res.upper;
  entry["lambda_min"] = res.lambda_min;
  entry["complement_dim"] = res.complement_dim;
  entry["trials"] = options.multistarts;
  entry["witness"] = json_vector(res.witness);

  Asserter as{.context = label, .failures = &ws.failures};
  if (res.defined)
    as.record("sandwich", res.kappa, res.upper,
              res.lower <= res.kappa + 1e-12 && res.kappa <= res.upper + 1e-12);

  // Definability curve: how far a vector can sit from the invariants as a
  // function of its worst displacement over Q.
  int samples = 200, bins = 24;
  std::uint64_t dseed = mix_seed(options.seed, 97);
  if (const json* d = find(cmd, "definability")) {
    samples = get_int_or(*d, "samples", samples, "definability");
    bins = get_int_or(*d, "bins", bins, "definability");
    if (find(*d, "seed")) dseed = static_cast<std::uint64_t>(get_int(*d, "seed", "definability"));
  }
  if (res.defined && samples > 0) {
    MatC projector = invariant_projection(rep, q);
    Rng rng(dseed);
    std::vector<std::pair<double, double>> points;  // (delta, fix distance)
    double max_delta = 0.0;
    int certified_failures = 0;
    for (int s = 0; s < samples; ++s) {
      VecC xi = rng.unit_vector(rep.dim());
      double delta = 0.0;
      for (int g : q) delta = std::max(delta, (rep.matrix(g) * xi - xi).norm());
      double dist = (xi - projector * xi).norm();
      points.emplace_back(delta, dist);
      max_delta = std::max(max_delta, delta);
      if (res.lower > 0 && dist > delta / res.lower + 1e-9) ++certified_failures;
    }
    auto csv = ws.open_artifact(label + "_definability.csv");
    csv << "delta,sup_fix_distance,bound_delta_over_kappa\n";
    for (int b = 1; b <= bins; ++b) {
      double hi = max_delta * b / bins;
      double lo = max_delta * (b - 1) / bins;
      double sup = 0.0;
      bool seen = false;
      for (const auto& [delta, dist] : points)
        if (delta > lo && delta <= hi + (b == bins ? 1e-15 : 0.0)) {
          sup = std::max(sup, dist);
          seen = true;
        }
      if (seen) csv << hi << "," << sup << "," << (res.kappa > 0 ? hi / res.kappa : 0.0) << "\n";
    }
    entry["definability"] = {{"samples", samples}, {"bins", bins}, {"seed", dseed}};
    as.record("definability_certified", certified_failures, 0, certified_failures == 0);
  }

  if (const json* a = find(cmd, "assert")) {
    if (const json* v = find(*a, "kappa_at_least"))
      as.at_least("kappa_at_least", res.kappa, v->get<double>());
    if (const json* v = find(*a, "kappa_at_most"))
      as.at_most("kappa_at_most", res.kappa, v->get<double>());
    if (const json* v = find(*a, "kappa_equals"))
      as.equals("kappa_equals", res.kappa, equals_target(*v, label),
                equals_tol(*v, r.tolerance));
  }
  entry["assertions"] = std::move(as.rows);
  entry["passed"] = as.all_passed;
  return entry;
}

json criterion_json(const CriterionEvidence& ev) {
  json levels = json::array();
  for (std::size_t m = 0; m < ev.by_level.size(); ++m) {
    const LimitInfo& info = ev.by_level[m];
    levels.push_back({{"level", m},
                      {"converged", info.converged},
                      {"value", info.value},
                      {"lo", info.lo},
                      {"hi", info.hi}});
  }
  json out;
  out["criterion"] = ev.criterion;
  out["verdict"] = to_string(ev.verdict);
  if (!ev.note.empty()) out["note"] = ev.note;
  out["levels"] = std::move(levels);
  return out;
}

json run_classify(const json& cmd, const Resolved& r, Workspace& ws, const std::string& label) {
  const std::string name = get_string(cmd, "sequence", "classify");
  const VectorSequence& seq = r.sequence(name, "classify");
  ClassifyOptions options;
  options.schedule = parse_schedule(cmd, "classify");
  options.cauchy_tol = get_double_or(cmd, "cauchy_tol", options.cauchy_tol, "classify");
  options.tol = get_double_or(cmd, "tolerance", options.tol, "classify");
  ClassificationReport report = classify_vector(seq, options);

  json entry;
  entry["command"] = "classify";
  entry["sequence"] = name;
  entry["schedule"] = options.schedule;
  entry["cauchy_tol"] = options.cauchy_tol;
  entry["tolerance"] = options.tol;
  entry["resolution"] = report.resolution;
  entry["criteria"] = json::array({criterion_json(report.pointwise),
                                   criterion_json(report.approx_identity),
                                   criterion_json(report.uniform)});
  entry["agree"] = report.agree();

  Asserter as{.context = label, .failures = &ws.failures};
  if (seq.dominator.has_value()) {
    double residual = domination_residual(seq, report.resolution, options.schedule);
    entry["domination_residual"] = residual;
    as.at_most("domination_certified", residual, 1e-8);
  }
  if (get_bool_or(cmd, "naive_limit", false, "classify")) {
    NaiveUltraproduct limit = naive_ultraproduct(seq, options.schedule, options.cauchy_tol);
    entry["naive_limit"] = {{"dim", limit.rep.dim()},
                            {"ambient_dim", limit.rep.ambient_dim()},
                            {"xi_norm", limit.xi.norm()},
                            {"validated", limit.rep.validate()}};
  }

  auto csv = ws.open_artifact(label + "_evidence.csv");
  write_evidence_csv(report, csv);

  if (const json* a = find(cmd, "assert")) {
    if (const json* v = find(*a, "agree")) as.truth("agree", report.agree(), v->get<bool>());
    auto check_verdict = [&](const std::string& key, const CriterionEvidence& ev) {
      if (const json* v = find(*a, key))
        as.record(key, ev.verdict == Verdict::Holds   ? 1.0
                       : ev.verdict == Verdict::Fails ? -1.0
                                                      : 0.0,
                  0.0, to_string(ev.verdict) == v->get<std::string>());
    };
    check_verdict("pointwise_is", report.pointwise);
    check_verdict("approx_identity_is", report.approx_identity);
    check_verdict("uniform_is", report.uniform);
  }
  entry["assertions"] = std::move(as.rows);
  entry["passed"] = as.all_passed;
  return entry;
}

json run_cover(const json& cmd, const Resolved& r, Workspace& ws, const std::string& label,
               int index) {
  const std::string rep_name = get_string(cmd, "rep", "cover");
  const UnitaryRep& rep = r.rep(rep_name, "cover");
  const std::string phi_name = get_string(cmd, "phi", "cover");
  const AlgebraElement& phi = r.element(phi_name, "cover");
  std::vector<int> k_set = find(cmd, "k") ? cmd["k"].get<std::vector<int>>()
                                          : rep.group()->elements();
  int max_level = get_int(cmd, "max_level", "cover");
  CoverFamily cover = build_cover(rep.group(), k_set, phi, max_level);

  json entry;
  entry["command"] = "cover";
  entry["rep"] = rep_name;
  entry["phi"] = phi_name;
  entry["k_size"] = k_set.size();
  entry["max_level"] = max_level;
  json levels = json::array();
  for (const Cover& level : cover.levels) {
    std::size_t largest = 0;
    for (const CoverPiece& piece : level.pieces) largest = std::max(largest, piece.members.size());
    levels.push_back(
        {{"level", level.level}, {"pieces", level.pieces.size()}, {"largest", largest}});
  }
  entry["levels"] = std::move(levels);

  VecC zeta = find(cmd, "zeta") ? parse_vector(cmd["zeta"], rep.dim(), "cover")
                                : VecC(VecC::Ones(rep.dim()) / std::sqrt(double(rep.dim())));
  VecC xi = rep.operator_of(phi).topLeftCorner(rep.dim(), rep.dim()) * zeta;
  PhiInterval interval = phi_predicate(rep, cover, xi);
  entry["phi_interval"] = {{"value", interval.value},
                           {"hi", interval.hi},
                           {"truncation_level", interval.truncation_level}};

  int scale = get_int_or(cmd, "scale", std::max(0, max_level / 2 - 1), "cover");
  int trials = get_int_or(cmd, "trials", 0, "cover");
  std::uint64_t seed = find(cmd, "seed")
                           ? static_cast<std::uint64_t>(get_int(cmd, "seed", "cover"))
                           : mix_seed(r.seed, index);
  int applicable = 0, violations = 0;
  std::ofstream csv;
  if (trials > 0) {
    csv = ws.open_artifact(label + "_forward.csv");
    csv << "trial,applicable,phi_hi,threshold,displacement,bound_via_cover,holds\n";
  }
  Rng rng(seed);
  for (int t = 0; t < trials; ++t) {
    VecC z = t == 0 ? zeta : rng.ball_vector(rep.dim());
    PhiInvarianceReport fwd = phi_invariance_forward(rep, cover, z, scale);
    if (fwd.applicable) {
      ++applicable;
      if (!fwd.holds) ++violations;
    }
    csv << t << "," << fwd.applicable << "," << fwd.phi_hi << "," << fwd.threshold << ","
        << fwd.displacement << "," << fwd.bound_via_cover << "," << fwd.holds << "\n";
  }
  {
    auto levels_csv = ws.open_artifact(label + "_cover.csv");
    levels_csv << "level,pieces,largest\n";
    for (const Cover& level : cover.levels) {
      std::size_t largest = 0;
      for (const CoverPiece& piece : level.pieces)
        largest = std::max(largest, piece.members.size());
      levels_csv << level.level << "," << level.pieces.size() << "," << largest << "\n";
    }
  }
  entry["forward"] = {{"scale", scale},
                      {"trials", trials},
                      {"seed", seed},
                      {"applicable", applicable},
                      {"violations", violations}};

  Asserter as{.context = label, .failures = &ws.failures};
  if (trials > 0) as.record("forward_sound", violations, 0, violations == 0);
  if (const json* a = find(cmd, "assert")) {
    if (const json* v = find(*a, "violations_equal"))
      as.equals("violations_equal", violations, v->get<double>(), 0.0);
    if (const json* v = find(*a, "applicable_at_least"))
      as.at_least("applicable_at_least", applicable, v->get<double>());
  }
  entry["assertions"] = std::move(as.rows);
  entry["passed"] = as.all_passed;
  return entry;
}

json run_eval(const json& cmd, const Resolved& r, Workspace& ws, const std::string& label,
              int index) {
  const std::string name = get_string(cmd, "structure", "eval");
  const MetricStructure& m = r.structure(name, "eval");
  Sentence sentence = parse_sentence(get_string(cmd, "sentence", "eval"));
  EvalOptions options;
  options.seed = mix_seed(r.seed, index);
  if (const json* o = find(cmd, "options")) {
    options.multistarts = get_int_or(*o, "multistarts", options.multistarts, "options");
    options.iters = get_int_or(*o, "iters", options.iters, "options");
    if (find(*o, "seed")) options.seed = static_cast<std::uint64_t>(get_int(*o, "seed", "options"));
  }
  EvalReport report = evaluate_sentence(sentence, m, options);

  json entry;
  entry["command"] = "eval";
  entry["structure"] = name;
  entry["sentence"] = print_sentence(sentence);
  entry["options"] = {{"multistarts", options.multistarts},
                      {"iters", options.iters},
                      {"seed", options.seed}};
  entry["value"] = report.value;
  entry["exact_binders"] = report.exact_binders;
  entry["engine_binders"] = report.engine_binders;

  auto csv = ws.open_artifact(label + "_eval.csv");
  csv << "quantity,value\n";
  csv << "value," << report.value << "\n";
  csv << "exact_binders," << report.exact_binders << "\n";
  csv << "engine_binders," << report.engine_binders << "\n";

  Asserter as{.context = label, .failures = &ws.failures};
  if (const json* a = find(cmd, "assert")) {
    if (const json* v = find(*a, "value_at_most"))
      as.at_most("value_at_most", report.value, v->get<double>());
    if (const json* v = find(*a, "value_at_least"))
      as.at_least("value_at_least", report.value, v->get<double>());
    if (const json* v = find(*a, "value_equals"))
      as.equals("value_equals", report.value, equals_target(*v, label),
                equals_tol(*v, r.tolerance));
  }
  entry["assertions"] = std::move(as.rows);
  entry["passed"] = as.all_passed;
  return entry;
}

// Randomized search for a sequence whose classification separates pointwise
// invariance from uniform invariance.  Candidates are reported for human
// inspection only; the report never upgrades a candidate to a conclusion.
json run_search(const json& cmd, const Resolved& r, Workspace& ws, const std::string& label,
                int index) {
  int count = get_int_or(cmd, "count", 8, "search-q36");
  std::uint64_t seed = find(cmd, "seed")
                           ? static_cast<std::uint64_t>(get_int(cmd, "seed", "search-q36"))
                           : mix_seed(r.seed, index);
  ClassifyOptions options;
  options.schedule = find(cmd, "schedule") ? parse_schedule(cmd, "search-q36")
                                           : Schedule{0, 1, 2, 3, 4, 5, 6, 7};
  options.cauchy_tol = get_double_or(cmd, "cauchy_tol", options.cauchy_tol, "search-q36");
  options.tol = get_double_or(cmd, "tolerance", options.tol, "search-q36");

  const GroupPtr& group = r.group;
  bool abelian = group->kind() == GroupKind::Cyclic ||
                 group->kind() == GroupKind::CircleDiscretized ||
                 group->kind() == GroupKind::IntegersWindowed;
  UnitaryRep regular = UnitaryRep::regular(group);

  json table = json::array();
  json candidates = json::array();
  auto csv = ws.open_artifact(label + "_candidates.csv");
  csv << "name,pointwise,approx_identity,uniform,candidate\n";
  for (int t = 0; t < count; ++t) {
    Rng rng(mix_seed(seed, t));
    VectorSequence seq{RepSequence{group, {}, ""}, {}, "", std::nullopt, {}};
    if (abelian && t % 2 == 0) {
      long long modulus = character_modulus(group);
      long long base = 2 + rng.uniform_int(0, 2);
      long long start = 1 + rng.uniform_int(0, static_cast<int>(modulus) - 1);
      int level = rng.uniform_int(0, std::min(2, group->resolution_limit()));
      AlgebraElement phi = approximate_identity(group, level);
      auto reps = [group, base, start, modulus](int i) {
        long long k = start % modulus * powmod(base, i, modulus) % modulus;
        return UnitaryRep::character(group, static_cast<int>(k));
      };
      std::string name = "char-pow-" + std::to_string(t);
      seq = pushforward(RepSequence{group, reps, name},
                        phi, [](int) { return VecC::Ones(1).eval(); }, name);
    } else {
      std::string name = "raw-" + std::to_string(t);
      int dim = regular.ambient_dim();
      std::uint64_t vec_seed = mix_seed(seed, 1000 + t);
      auto at = [vec_seed, dim](int i) {
        Rng local(mix_seed(vec_seed, static_cast<std::uint64_t>(i)));
        return local.unit_vector(dim);
      };
      seq = VectorSequence{RepSequence{group, [regular](int) { return regular; }, name}, at, name,
                           std::nullopt, {}};
    }
    ClassificationReport report = classify_vector(seq, options);
    bool candidate = report.pointwise.verdict == Verdict::Holds &&
                     report.uniform.verdict != Verdict::Holds;
    json row = {{"name", seq.name},
                {"pointwise", to_string(report.pointwise.verdict)},
                {"approx_identity", to_string(report.approx_identity.verdict)},
                {"uniform", to_string(report.uniform.verdict)},
                {"candidate", candidate}};
    table.push_back(row);
    if (candidate) candidates.push_back(row);
    csv << seq.name << "," << to_string(report.pointwise.verdict) << ","
        << to_string(report.approx_identity.verdict) << ","
        << to_string(report.uniform.verdict) << "," << candidate << "\n";
  }

  json entry;
  entry["command"] = "search-q36";
  entry["count"] = count;
  entry["seed"] = seed;
  entry["schedule"] = options.schedule;
  entry["note"] = "reports candidates only, never conclusions";
  entry["searched"] = count;
  entry["sequences"] = std::move(table);
  entry["candidates"] = std::move(candidates);

  Asserter as{.context = label, .failures = &ws.failures};
  if (const json* a = find(cmd, "assert"))
    if (const json* v = find(*a, "searched_equals"))
      as.equals("searched_equals", count, v->get<double>(), 0.0);
  entry["assertions"] = std::move(as.rows);
  entry["passed"] = as.all_passed;
  return entry;
}

SessionResult run(const json& config, const std::string& out_dir,
                  const SessionOverrides& overrides) {
  Resolved r = resolve(config, overrides);

  Workspace ws;
  ws.out_dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  std::error_code ec;
  fs::create_directories(ws.out_dir, ec);
  if (ec) fail("cannot create output directory " + ws.out_dir.string());

  for (const std::string& name : r.export_elements) {
    auto csv = ws.open_artifact("element_" + sanitize(name) + ".csv");
    write_csv(r.element(name, "export_elements"), csv);
  }

  json entries = json::array();
  for (std::size_t i = 0; i < r.commands.size(); ++i) {
    const json& cmd = r.commands[i];
    std::string command = cmd["command"].get<std::string>();
    std::string label = command_label(cmd, static_cast<int>(i));
    json entry;
    try {
      if (command == "audit") entry = run_audit(cmd, r, ws, label, static_cast<int>(i));
      else if (command == "reconstruct") entry = run_reconstruct(cmd, r, ws, label);
      else if (command == "kazhdan") entry = run_kazhdan(cmd, r, ws, label, static_cast<int>(i));
      else if (command == "classify") entry = run_classify(cmd, r, ws, label);
      else if (command == "cover") entry = run_cover(cmd, r, ws, label, static_cast<int>(i));
      else if (command == "eval") entry = run_eval(cmd, r, ws, label, static_cast<int>(i));
      else entry = run_search(cmd, r, ws, label, static_cast<int>(i));
    } catch (const NonConvergent& e) {
      entry = {{"command", command}, {"error", e.what()}, {"passed", false}};
      ws.failures.push_back(label + ": non-convergence: " + e.what());
      ws.nonconvergent = true;
    } catch (const ConfigError&) {
      throw;  // late config problems (unwritable artifacts) stay exit 2
    } catch (const Error& e) {
      entry = {{"command", command}, {"error", e.what()}, {"passed", false}};
      ws.failures.push_back(label + ": " + e.what());
    }
    entry["label"] = label;
    entries.push_back(std::move(entry));
  }

  json report;
  report["session"] = {{"seed", r.seed},
                       {"tolerance", r.tolerance},
                       {"group", r.group->describe()}};
  report["commands"] = std::move(entries);
  report["failures"] = ws.failures;
  bool passed = ws.failures.empty();
  report["passed"] = passed;

  SessionResult result;
  result.exit_code = ws.nonconvergent ? 3 : (passed ? 0 : 1);
  report["exit_code"] = result.exit_code;

  std::vector<std::string> artifacts = {"report.json"};
  artifacts.insert(artifacts.end(), ws.artifacts.begin(), ws.artifacts.end());
  report["artifacts"] = artifacts;

  result.report_text = report.dump(2) + "\n";
  result.artifacts = std::move(artifacts);
  result.failures = std::move(ws.failures);

  std::ofstream out(ws.out_dir / "report.json");
  if (!out) fail("cannot write report.json in " + ws.out_dir.string());
  out << result.report_text;
  return result;
}

}  // namespace

SessionResult run_session_text(const std::string& config_text, const std::string& out_dir,
                               const SessionOverrides& overrides) {
  json config;
  try {
    config = json::parse(config_text);
  } catch (const std::exception& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  return run(config, out_dir, overrides);
}

SessionResult run_session_text(const std::string& config_text, const std::string& out_dir) {
  return run_session_text(config_text, out_dir, SessionOverrides{});
}

SessionResult run_session_file(const std::string& config_path, const std::string& out_dir,
                               const SessionOverrides& overrides) {
  std::ifstream in(config_path);
  if (!in) fail("cannot read config file " + config_path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return run_session_text(buffer.str(), out_dir, overrides);
}

SessionResult run_session_file(const std::string& config_path, const std::string& out_dir) {
  return run_session_file(config_path, out_dir, SessionOverrides{});
}

}  // namespace starrep
