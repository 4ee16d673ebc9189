#pragma once

#include <cmath>
#include <vector>

#include "statecap/channel.hpp"
#include "statecap/prob.hpp"
#include "statecap/rng.hpp"

namespace testutil {

inline double h2(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

// Y = X xor S with P(S=1) = q.
inline statecap::channel::StateChannel xor_channel(double q) {
  std::vector<double> k = {1, 0, 0, 1, 0, 1, 1, 0};
  return {2, 2, 2, k, statecap::prob::Pmf({1.0 - q, q})};
}

// BSC(p) with a one-letter dummy state.
inline statecap::channel::StateChannel bsc_channel(double p) {
  std::vector<double> k = {1 - p, p, p, 1 - p};
  return {2, 1, 2, k, statecap::prob::Pmf({1.0})};
}

// Random single-user channel: Dirichlet rows, Dirichlet state pmf.
inline statecap::channel::StateChannel random_single(std::uint64_t seed, int nx = 2, int ns = 2,
                                                     int ny = 2) {
  statecap::rng::Engine eng(seed);
  std::vector<double> k;
  for (int i = 0; i < nx * ns; ++i) {
    auto row = eng.dirichlet(ny);
    k.insert(k.end(), row.begin(), row.end());
  }
  return {nx, ns, ny, k, statecap::prob::Pmf(eng.dirichlet(ns))};
}

// Random physically degraded broadcast channel, built as a random
// p(y1|x,s) composed with a random p(y2|y1) so the factorization holds
// by construction.
inline statecap::channel::BroadcastStateChannel random_degraded_bc(std::uint64_t seed, int nx = 2,
                                                                   int ns = 2, int ny1 = 2,
                                                                   int ny2 = 2) {
  statecap::rng::Engine eng(seed);
  std::vector<std::vector<double>> first(nx * ns);
  for (auto& row : first) row = eng.dirichlet(ny1);
  std::vector<std::vector<double>> second(ny1);
  for (auto& row : second) row = eng.dirichlet(ny2);
  std::vector<double> k;
  k.reserve(static_cast<std::size_t>(nx) * ns * ny1 * ny2);
  for (int x = 0; x < nx; ++x)
    for (int s = 0; s < ns; ++s)
      for (int y1 = 0; y1 < ny1; ++y1)
        for (int y2 = 0; y2 < ny2; ++y2) k.push_back(first[x * ns + s][y1] * second[y1][y2]);
  return {nx, ns, ny1, ny2, k, statecap::prob::Pmf(eng.dirichlet(ns))};
}

// Random physically degraded relay channel: random p(y1|x,x1,s) composed
// with a random p(y|y1,x1,s).
inline statecap::channel::RelayStateChannel random_degraded_relay(std::uint64_t seed, int nx = 2,
                                                                  int nx1 = 2, int ns = 2,
                                                                  int ny = 2, int ny1 = 2) {
  statecap::rng::Engine eng(seed);
  std::vector<std::vector<double>> first(nx * nx1 * ns);
  for (auto& row : first) row = eng.dirichlet(ny1);
  std::vector<std::vector<double>> second(ny1 * nx1 * ns);
  for (auto& row : second) row = eng.dirichlet(ny);
  std::vector<double> k;
  k.reserve(static_cast<std::size_t>(nx) * nx1 * ns * ny * ny1);
  for (int x = 0; x < nx; ++x)
    for (int x1 = 0; x1 < nx1; ++x1)
      for (int s = 0; s < ns; ++s)
        for (int y = 0; y < ny; ++y)
          for (int y1 = 0; y1 < ny1; ++y1)
            k.push_back(first[(x * nx1 + x1) * ns + s][y1] *
                        second[(y1 * nx1 + x1) * ns + s][y]);
  return {nx, nx1, ns, ny, ny1, k, statecap::prob::Pmf(eng.dirichlet(ns))};
}

// Random two-sender channel with Dirichlet rows.
inline statecap::channel::MacStateChannel random_mac(std::uint64_t seed, int nx1 = 2, int nx2 = 2,
                                                     int ns = 2, int ny = 2) {
  statecap::rng::Engine eng(seed);
  std::vector<double> k;
  for (int i = 0; i < nx1 * nx2 * ns; ++i) {
    auto row = eng.dirichlet(ny);
    k.insert(k.end(), row.begin(), row.end());
  }
  return {nx1, nx2, ns, ny, k, statecap::prob::Pmf(eng.dirichlet(ns))};
}

// Mutual information across an ordinary channel at a given input pmf.
inline double dmc_mi(const statecap::channel::Dmc& ch, const std::vector<double>& input) {
  using namespace statecap::prob;
  std::vector<double> joint(static_cast<std::size_t>(ch.input_size) * ch.output_size);
  for (int t = 0; t < ch.input_size; ++t)
    for (int y = 0; y < ch.output_size; ++y)
      joint[static_cast<std::size_t>(t) * ch.output_size + y] = input[t] * ch.p(y, t);
  JointPmf j({{"T", ch.input_size}, {"Y", ch.output_size}}, joint);
  return mutual_information(j, {"T"}, {"Y"});
}

}  // namespace testutil
