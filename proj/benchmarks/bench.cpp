#include <benchmark/benchmark.h>

#include <vector>

#include "statecap/channel.hpp"
#include "statecap/prob.hpp"
#include "statecap/rng.hpp"
#include "statecap/sim.hpp"
#include "statecap/solve.hpp"

using namespace statecap;

namespace {

channel::StateChannel xor_channel(double q) {
  std::vector<double> k = {1, 0, 0, 1, 0, 1, 1, 0};
  return {2, 2, 2, k, prob::Pmf({1.0 - q, q})};
}

channel::StateChannel random_single(std::uint64_t seed, int nx, int ns, int ny) {
  rng::Engine eng(seed);
  std::vector<double> k;
  for (int i = 0; i < nx * ns; ++i) {
    auto row = eng.dirichlet(ny);
    k.insert(k.end(), row.begin(), row.end());
  }
  return {nx, ns, ny, k, prob::Pmf(eng.dirichlet(ns))};
}

void BM_SingleUserCapacity(benchmark::State& state) {
  auto ch = random_single(7, static_cast<int>(state.range(0)), 2, 3);
  for (auto _ : state) {
    auto rep = solve::single_user_capacity(ch);
    benchmark::DoNotOptimize(rep.value);
  }
}
BENCHMARK(BM_SingleUserCapacity)->Arg(2)->Arg(3)->Arg(4);

void BM_MutualInformation(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  rng::Engine eng(9);
  prob::JointPmf j({{"A", n}, {"B", n}, {"C", n}}, eng.dirichlet(n * n * n));
  for (auto _ : state) {
    benchmark::DoNotOptimize(prob::mutual_information(j, {"A"}, {"B"}, {"C"}));
  }
}
BENCHMARK(BM_MutualInformation)->Arg(4)->Arg(8);

void BM_Typicality(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  prob::JointPmf half({{"A", 2}}, {0.5, 0.5});
  rng::Engine eng(11);
  std::vector<int> seq(n);
  for (auto& v : seq) v = eng.uniform_int(2);
  std::vector<std::vector<int>> seqs = {seq};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim::joint_typicality(seqs, half, 0.25));
  }
}
BENCHMARK(BM_Typicality)->Arg(64)->Arg(256);

void BM_SimulateSingleUser(benchmark::State& state) {
  auto ch = xor_channel(0.3);
  prob::Pmf pmf({0.0, 0.5, 0.5, 0.0});
  sim::SimConfig cfg;
  cfg.n = static_cast<int>(state.range(0));
  cfg.rate1 = 0.5;
  cfg.trials = 20;
  cfg.seed = 3;
  for (auto _ : state) {
    auto rep = sim::simulate_single_user(ch, pmf, cfg);
    benchmark::DoNotOptimize(rep.estimates[0].errors);
  }
}
BENCHMARK(BM_SimulateSingleUser)->Arg(12)->Arg(16);

void BM_RelaySolve(benchmark::State& state) {
  rng::Engine eng(5);
  std::vector<std::vector<double>> first(8), second(8);
  for (auto& row : first) row = eng.dirichlet(2);
  for (auto& row : second) row = eng.dirichlet(2);
  std::vector<double> k;
  for (int x = 0; x < 2; ++x)
    for (int x1 = 0; x1 < 2; ++x1)
      for (int s = 0; s < 2; ++s)
        for (int y = 0; y < 2; ++y)
          for (int y1 = 0; y1 < 2; ++y1)
            k.push_back(first[(x * 2 + x1) * 2 + s][y1] * second[(y1 * 2 + x1) * 2 + s][y]);
  channel::RelayStateChannel ch(2, 2, 2, 2, 2, k, prob::Pmf({0.5, 0.5}));
  solve::RelayOptions opt;
  opt.restarts = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto rep = solve::relay_capacity(ch, opt);
    benchmark::DoNotOptimize(rep.value);
  }
}
BENCHMARK(BM_RelaySolve)->Arg(4)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
