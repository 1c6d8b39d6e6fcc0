// Parallel kernels against their serial references on generated systems.

#include <benchmark/benchmark.h>

#include <map>

#include "sbcheck/adapt.hpp"
#include "sbcheck/generate.hpp"

using namespace sbcheck;

namespace {

const SBSystem& system_of(std::int64_t b_states) {
  static std::map<std::int64_t, SBSystem> cache;
  auto it = cache.find(b_states);
  if (it == cache.end()) {
    GenParams p;
    p.seed = 1;
    p.b_states = static_cast<std::size_t>(b_states);
    p.s_states = 4;
    p.density = 12.0 / static_cast<double>(b_states);
    it = cache.emplace(b_states, gen_random(p)).first;
  }
  return it->second;
}

const Kripke& kripke_of(std::int64_t b_states) {
  static std::map<std::int64_t, Kripke> cache;
  auto it = cache.find(b_states);
  if (it == cache.end()) it = cache.emplace(b_states, to_kripke(build_flat(system_of(b_states)))).first;
  return it->second;
}

void BM_build_flat(benchmark::State& st) {
  const SBSystem& sys = system_of(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(build_flat(sys));
}

void BM_build_flat_reference(benchmark::State& st) {
  const SBSystem& sys = system_of(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(build_flat_reference(sys));
}

void BM_sat_tables(benchmark::State& st) {
  const SBSystem& sys = system_of(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(SatTables::compute(sys));
}

void BM_sat_tables_reference(benchmark::State& st) {
  const SBSystem& sys = system_of(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(SatTables::compute_reference(sys));
}

void BM_sat_set_weak(benchmark::State& st) {
  const Kripke& k = kripke_of(st.range(0));
  const Ctl phi = weak_formula();
  for (auto _ : st) benchmark::DoNotOptimize(sat_set(k, phi));
}

void BM_sat_set_weak_reference(benchmark::State& st) {
  const Kripke& k = kripke_of(st.range(0));
  const Ctl phi = weak_formula();
  for (auto _ : st) benchmark::DoNotOptimize(sat_set_reference(k, phi));
}

}  // namespace

#define SIZES ->Arg(1000)->Arg(4000)->Arg(16000)->Unit(benchmark::kMillisecond)
BENCHMARK(BM_build_flat) SIZES;
BENCHMARK(BM_build_flat_reference) SIZES;
BENCHMARK(BM_sat_tables) SIZES;
BENCHMARK(BM_sat_tables_reference) SIZES;
BENCHMARK(BM_sat_set_weak) SIZES;
BENCHMARK(BM_sat_set_weak_reference) SIZES;

BENCHMARK_MAIN();
