#include <cmath>
#include <vector>

#include "doctest.h"
#include "statecap/error.hpp"
#include "statecap/prob.hpp"
#include "statecap/rng.hpp"
#include "test_util.hpp"

using namespace statecap;
using prob::Axis;
using prob::JointPmf;
using prob::Pmf;

namespace {

JointPmf random_joint(std::uint64_t seed, std::vector<Axis> axes) {
  int cells = 1;
  for (const auto& a : axes) cells *= a.size;
  rng::Engine eng(seed);
  return {std::move(axes), eng.dirichlet(cells)};
}

}  // namespace

TEST_SUITE("prob") {

TEST_CASE("pmf validates mass and sign") {
  CHECK_THROWS_AS(Pmf({0.5, 0.6}), ValidationError);
  CHECK_THROWS_AS(Pmf({1.5, -0.5}), ValidationError);
  CHECK_THROWS_AS(Pmf({}), ValidationError);
  Pmf u = Pmf::uniform(4);
  for (int i = 0; i < 4; ++i) CHECK(u[i] == doctest::Approx(0.25));
  Pmf pt = Pmf::point_mass(3, 1);
  CHECK(pt[1] == 1.0);
  CHECK(pt[0] == 0.0);
}

TEST_CASE("entropy of uniform and point distributions") {
  JointPmf u({{"A", 8}}, std::vector<double>(8, 0.125));
  CHECK(prob::entropy(u, {"A"}) == doctest::Approx(3.0).epsilon(1e-12));
  std::vector<double> pt(8, 0.0);
  pt[5] = 1.0;
  JointPmf p({{"A", 8}}, pt);
  CHECK(prob::entropy(p, {"A"}) == doctest::Approx(0.0));
}

TEST_CASE("chain rule holds on random joints") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto j = random_joint(seed, {{"A", 3}, {"B", 4}});
    double lhs = prob::entropy(j, {"A", "B"});
    double rhs = prob::entropy(j, {"A"}) + prob::entropy(j, {"B"}, {"A"});
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("conditioning never increases entropy") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto j = random_joint(100 + seed, {{"A", 3}, {"B", 3}});
    CHECK(prob::entropy(j, {"A"}, {"B"}) <= prob::entropy(j, {"A"}) + 1e-10);
  }
}

TEST_CASE("mutual information is symmetric and nonnegative") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto j = random_joint(200 + seed, {{"A", 3}, {"B", 4}});
    double ab = prob::mutual_information(j, {"A"}, {"B"});
    double ba = prob::mutual_information(j, {"B"}, {"A"});
    CHECK(ab >= 0.0);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-10));
  }
  // independent product: exactly zero after clamping
  std::vector<double> prod;
  for (double a : {0.3, 0.7})
    for (double b : {0.25, 0.25, 0.5}) prod.push_back(a * b);
  JointPmf ind({{"A", 2}, {"B", 3}}, prod);
  CHECK(prob::mutual_information(ind, {"A"}, {"B"}) == 0.0);
}

TEST_CASE("conditional mutual information is nonnegative") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto j = random_joint(300 + seed, {{"A", 2}, {"B", 3}, {"C", 2}});
    CHECK(prob::mutual_information(j, {"A"}, {"B"}, {"C"}) >= 0.0);
  }
}

TEST_CASE("data processing along an assembled Markov chain") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    rng::Engine eng(400 + seed);
    prob::Factor fa = prob::factor_from_pmf("A", Pmf(eng.dirichlet(3)));
    prob::Factor fb{{"A"}, {{"B", 3}}, {}};
    for (int i = 0; i < 3; ++i) {
      auto row = eng.dirichlet(3);
      fb.kernel.insert(fb.kernel.end(), row.begin(), row.end());
    }
    prob::Factor fc{{"B"}, {{"C", 3}}, {}};
    for (int i = 0; i < 3; ++i) {
      auto row = eng.dirichlet(3);
      fc.kernel.insert(fc.kernel.end(), row.begin(), row.end());
    }
    auto j = prob::assemble_joint({fa, fb, fc});
    double iab = prob::mutual_information(j, {"A"}, {"B"});
    double iac = prob::mutual_information(j, {"A"}, {"C"});
    CHECK(iac <= iab + 1e-10);
    // Markov: I(A;C|B) = 0
    CHECK(prob::mutual_information(j, {"A"}, {"C"}, {"B"}) ==
          doctest::Approx(0.0).epsilon(1e-10));
  }
}

TEST_CASE("marginals keep axis order and mass") {
  auto j = random_joint(77, {{"A", 2}, {"B", 3}, {"C", 2}});
  auto m = j.marginal({"C", "A"});
  REQUIRE(m.axes().size() == 2);
  CHECK(m.axes()[0].name == "A");  // original relative order
  CHECK(m.axes()[1].name == "C");
  double total = 0.0;
  for (double v : m.probs()) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(j.axis_index("Z"), ValidationError);
}

TEST_CASE("deterministic factors compose exactly") {
  // B = A xor 1 over a biased A
  prob::Factor fa = prob::factor_from_pmf("A", Pmf({0.25, 0.75}));
  auto fb = prob::factor_deterministic({"A"}, {2}, {"B", 2}, {1, 0});
  auto j = prob::assemble_joint({fa, fb});
  CHECK(prob::mutual_information(j, {"A"}, {"B"}) == doctest::Approx(testutil::h2(0.25)));
  auto pb = j.marginal({"B"});
  CHECK(pb.probs()[0] == doctest::Approx(0.75));
}

TEST_CASE("assemble_joint rejects malformed factor lists") {
  prob::Factor fa = prob::factor_from_pmf("A", Pmf({0.5, 0.5}));
  prob::Factor dup = prob::factor_from_pmf("A", Pmf({0.5, 0.5}));
  CHECK_THROWS_AS(prob::assemble_joint({fa, dup}), ValidationError);
  prob::Factor orphan{{"Q"}, {{"B", 2}}, {1, 0, 0, 1}};
  CHECK_THROWS_AS(prob::assemble_joint({fa, orphan}), ValidationError);
  prob::Factor bad{{"A"}, {{"B", 2}}, {0.9, 0.2, 0.5, 0.5}};
  CHECK_THROWS_AS(prob::assemble_joint({fa, bad}), ValidationError);
}

TEST_CASE("seed derivation separates roles and indices") {
  auto a = rng::derive_seed(7, "trial", 0);
  auto b = rng::derive_seed(7, "trial", 1);
  auto c = rng::derive_seed(7, "restart", 0);
  CHECK(a != b);
  CHECK(a != c);
  CHECK(a == rng::derive_seed(7, "trial", 0));
}

TEST_CASE("engine sampling is deterministic and in-range") {
  rng::Engine e1(99), e2(99);
  for (int i = 0; i < 100; ++i) CHECK(e1.next() == e2.next());
  rng::Engine e3(5);
  std::vector<double> pmf = {0.0, 0.5, 0.5, 0.0};
  for (int i = 0; i < 200; ++i) {
    int k = e3.categorical(pmf);
    CHECK((k == 1 || k == 2));
  }
  auto d = e3.dirichlet(5);
  double total = 0.0;
  for (double v : d) {
    CHECK(v >= 0.0);
    total += v;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

}  // TEST_SUITE
