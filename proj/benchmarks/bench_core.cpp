// Micro benchmarks for the hot numerical paths: convolution, structure
// distances, axiom audits, and spectral-gap extraction.

#include <benchmark/benchmark.h>

#include <map>

#include "starrep/kazhdan.hpp"
#include "starrep/structure.hpp"

using namespace starrep;

namespace {

AlgebraElement dense_element(const GroupPtr& group, std::uint64_t seed) {
  Rng rng(seed);
  std::map<int, Complex> values;
  for (int g : group->elements()) values[g] = rng.gaussian_complex();
  AlgebraElement out = AlgebraElement::density(group, std::move(values));
  return out.scaled(1.0 / out.norm1());
}

void bm_convolve_circle(benchmark::State& state) {
  GroupPtr circle = Group::circle_discretized(static_cast<int>(state.range(0)));
  AlgebraElement a = dense_element(circle, 1);
  AlgebraElement b = dense_element(circle, 2);
  for (auto _ : state) benchmark::DoNotOptimize(convolve(a, b));
}

void bm_convolve_dihedral(benchmark::State& state) {
  GroupPtr group = Group::dihedral(static_cast<int>(state.range(0)));
  AlgebraElement a = dense_element(group, 3);
  AlgebraElement b = dense_element(group, 4);
  for (auto _ : state) benchmark::DoNotOptimize(convolve(a, b));
}

MetricStructure z6_structure() {
  GroupPtr z6 = Group::cyclic(6);
  std::map<int, Complex> phi = {{0, 0.4}, {1, 0.35}, {2, 0.25}};
  return MetricStructure::build(
      UnitaryRep::regular(z6), {{"phi", AlgebraElement::density(z6, std::move(phi))},
                                {"em", approximate_identity(z6, 0)}});
}

void bm_sort_distance(benchmark::State& state) {
  MetricStructure m = z6_structure();
  Rng rng(5);
  VecC x = rng.ball_vector(6);
  for (auto _ : state) benchmark::DoNotOptimize(m.sort_distance("phi", x));
}

void bm_audit(benchmark::State& state) {
  MetricStructure m = z6_structure();
  AuditBudget budget{8, 8, 2, 30, 8, 6};
  for (auto _ : state) benchmark::DoNotOptimize(audit_axioms(m, budget));
}

void bm_kazhdan(benchmark::State& state) {
  UnitaryRep rep = UnitaryRep::regular(Group::cyclic(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(kazhdan_constant(rep, {1}));
}

void bm_projection(benchmark::State& state) {
  GroupPtr group = Group::cyclic(8);
  UnitaryRep rep = UnitaryRep::regular(group).padded(2);
  std::vector<AlgebraElement> sample = {approximate_identity(group, 0),
                                        dense_element(group, 9)};
  for (auto _ : state) benchmark::DoNotOptimize(nondegenerate_projection(rep, sample));
}

BENCHMARK(bm_convolve_circle)->Arg(64)->Arg(256);
BENCHMARK(bm_convolve_dihedral)->Arg(4)->Arg(8);
BENCHMARK(bm_sort_distance);
BENCHMARK(bm_audit);
BENCHMARK(bm_kazhdan)->Arg(6)->Arg(12);
BENCHMARK(bm_projection);

}  // namespace

BENCHMARK_MAIN();
