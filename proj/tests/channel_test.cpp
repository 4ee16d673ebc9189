#include <vector>

#include "doctest.h"
#include "statecap/channel.hpp"
#include "statecap/error.hpp"
#include "statecap/prob.hpp"
#include "test_util.hpp"

using namespace statecap;

TEST_SUITE("channel") {

TEST_CASE("strategy enumeration is lexicographic and capped") {
  auto ts = channel::enumerate_strategies(2, 2);
  REQUIRE(ts.size() == 4);
  CHECK(ts[0].table == std::vector<int>{0, 0});
  CHECK(ts[1].table == std::vector<int>{0, 1});
  CHECK(ts[2].table == std::vector<int>{1, 0});
  CHECK(ts[3].table == std::vector<int>{1, 1});
  CHECK(channel::enumerate_strategies(3, 4).size() == 81);
  // 4^7 = 16384 > 4096
  CHECK_THROWS_AS(channel::enumerate_strategies(4, 7), CapExceededError);
}

TEST_CASE("induced channel rows for the xor channel") {
  auto ch = testutil::xor_channel(0.3);
  auto dmc = channel::induced_strategy_channel(ch);
  REQUIRE(dmc.input_size == 4);
  REQUIRE(dmc.output_size == 2);
  // t = (0,0): always x=0, y = s, so p(y=1) = 0.3
  CHECK(dmc.p(1, 0) == doctest::Approx(0.3));
  // t = (0,1): x = s cancels the state, y = 0 surely
  CHECK(dmc.p(0, 1) == doctest::Approx(1.0));
  // t = (1,0): x = 1-s, y = 1 surely
  CHECK(dmc.p(1, 2) == doctest::Approx(1.0));
  // t = (1,1): y = 1-s
  CHECK(dmc.p(0, 3) == doctest::Approx(0.3));
}

TEST_CASE("dummy state induces the base channel with duplicated inputs") {
  auto ch = testutil::bsc_channel(0.1);
  auto dmc = channel::induced_strategy_channel(ch);
  REQUIRE(dmc.input_size == 2);  // |X|^1
  CHECK(dmc.p(0, 0) == doctest::Approx(0.9));
  CHECK(dmc.p(0, 1) == doctest::Approx(0.1));
}

TEST_CASE("induced channel rows are stochastic on random instances") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto ch = testutil::random_single(seed, 2, 3, 3);
    auto dmc = channel::induced_strategy_channel(ch);
    REQUIRE(dmc.input_size == 8);  // 2^3
    for (int t = 0; t < dmc.input_size; ++t) {
      double total = 0.0;
      for (int y = 0; y < dmc.output_size; ++y) {
        CHECK(dmc.p(y, t) >= 0.0);
        total += dmc.p(y, t);
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("strategy channel mutual information matches a direct assembly") {
  // I(T;Y) computed through the induced kernel must agree with the joint
  // law T -> (S,X,Y) assembled from first principles.
  auto ch = testutil::random_single(42, 2, 2, 3);
  auto dmc = channel::induced_strategy_channel(ch);
  auto ts = channel::enumerate_strategies(2, 2);
  prob::Pmf pt = prob::Pmf::uniform(4);

  double direct = testutil::dmc_mi(dmc, {0.25, 0.25, 0.25, 0.25});

  std::vector<prob::Factor> fs;
  fs.push_back(prob::factor_from_pmf("T", pt));
  fs.push_back(prob::factor_from_pmf("S", prob::Pmf(
      std::vector<double>(ch.state_pmf().probs().begin(), ch.state_pmf().probs().end()))));
  std::vector<int> xtab;
  for (const auto& t : ts)
    for (int s = 0; s < 2; ++s) xtab.push_back(t(s));
  fs.push_back(prob::factor_deterministic({"T", "S"}, {4, 2}, {"X", 2}, xtab));
  prob::Factor fy{{"X", "S"}, {{"Y", 3}}, {}};
  for (int x = 0; x < 2; ++x)
    for (int s = 0; s < 2; ++s)
      for (int y = 0; y < 3; ++y) fy.kernel.push_back(ch.p(y, x, s));
  fs.push_back(fy);
  auto j = prob::assemble_joint(fs);
  CHECK(direct == doctest::Approx(prob::mutual_information(j, {"T"}, {"Y"})).epsilon(1e-10));
}

TEST_CASE("broadcast marginals agree with the joint induced kernel") {
  auto ch = testutil::random_degraded_bc(7);
  auto bc = channel::induced_bc_strategy_channel(ch);
  auto m1 = bc.marginal1();
  auto m2 = bc.marginal2();
  for (int t = 0; t < bc.input_size; ++t) {
    for (int y1 = 0; y1 < bc.y1_size; ++y1) {
      double total = 0.0;
      for (int y2 = 0; y2 < bc.y2_size; ++y2) total += bc.p(y1, y2, t);
      CHECK(m1.p(y1, t) == doctest::Approx(total).epsilon(1e-12));
    }
    for (int y2 = 0; y2 < bc.y2_size; ++y2) {
      double total = 0.0;
      for (int y1 = 0; y1 < bc.y1_size; ++y1) total += bc.p(y1, y2, t);
      CHECK(m2.p(y2, t) == doctest::Approx(total).epsilon(1e-12));
    }
  }
}

TEST_CASE("degradedness check accepts composed channels and recovers the tail") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto ch = testutil::random_degraded_bc(500 + seed);
    auto v = channel::check_bc_degraded(ch);
    REQUIRE(v.pass);
    CHECK(v.residual <= channel::kDegradedTol);
    // recovered p(y2|y1) must reproduce the kernel exactly
    for (int x = 0; x < ch.x_size(); ++x)
      for (int s = 0; s < ch.s_size(); ++s)
        for (int y1 = 0; y1 < ch.y1_size(); ++y1) {
          double py1 = 0.0;
          for (int y2 = 0; y2 < ch.y2_size(); ++y2) py1 += ch.p(y1, y2, x, s);
          for (int y2 = 0; y2 < ch.y2_size(); ++y2)
            CHECK(ch.p(y1, y2, x, s) ==
                  doctest::Approx(py1 * v.recovered[y1 * ch.y2_size() + y2]).epsilon(1e-9));
        }
  }
}

TEST_CASE("degradedness check rejects a crossed channel with a witness") {
  // receiver 2 sees the opposite bit when y1 = 0: no p(y2|y1) explains both x rows
  std::vector<double> k = {
      0.9, 0.1, 0.0, 0.0,   // x=0: y1=0, y2 ~ (0.9, 0.1)
      0.1, 0.0, 0.0, 0.9,   // x=1: mass at (y1=0,y2=0) and (y1=1,y2=1)
  };
  channel::BroadcastStateChannel ch(2, 1, 2, 2, k, prob::Pmf({1.0}));
  auto v = channel::check_bc_degraded(ch);
  CHECK_FALSE(v.pass);
  CHECK(v.residual > 0.01);
  CHECK(v.witness.x >= 0);
  CHECK(v.witness.y1 >= 0);
}

TEST_CASE("degradedness in information form on random broadcast instances") {
  // any strategy pmf: I(T;Y2) <= I(T;Y1) when receiver 2 is a further
  // degraded copy
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto ch = testutil::random_degraded_bc(900 + seed);
    auto bc = channel::induced_bc_strategy_channel(ch);
    auto m1 = bc.marginal1();
    auto m2 = bc.marginal2();
    rng::Engine eng(seed);
    for (int rep = 0; rep < 4; ++rep) {
      auto p = eng.dirichlet(bc.input_size);
      CHECK(testutil::dmc_mi(m2, p) <= testutil::dmc_mi(m1, p) + 1e-9);
    }
  }
}

TEST_CASE("relay degradedness accepts composed channels") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto ch = testutil::random_degraded_relay(700 + seed);
    auto v = channel::check_relay_degraded(ch);
    REQUIRE(v.pass);
    CHECK(v.residual <= channel::kDegradedTol);
  }
}

TEST_CASE("relay degradedness rejects a direct source-destination path") {
  // Y copies X while Y1 is pure noise: the destination sees more than the relay
  std::vector<double> k;
  for (int x = 0; x < 2; ++x)
    for (int x1 = 0; x1 < 2; ++x1)
      for (int y = 0; y < 2; ++y)
        for (int y1 = 0; y1 < 2; ++y1) k.push_back((y == x ? 1.0 : 0.0) * 0.5);
  channel::RelayStateChannel ch(2, 2, 1, 2, 2, k, prob::Pmf({1.0}));
  auto v = channel::check_relay_degraded(ch);
  CHECK_FALSE(v.pass);
  CHECK(v.witness.x >= 0);
}

TEST_CASE("relay joint satisfies the Markov identity of degradedness") {
  // I(T; Y,Y1 | T1,S) = I(T; Y1 | T1,S): adding the destination output
  // next to the relay observation brings nothing new about the source.
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto ch = testutil::random_degraded_relay(300 + seed);
    rng::Engine eng(seed);
    auto q = eng.dirichlet(4 * 4);  // |T| = |X|^|S| = 4 and |T1| = |X1|^|S| = 4
    auto j = channel::induced_relay_joint(ch, q);
    double with_y = prob::mutual_information(j, {"T"}, {"Y", "Y1"}, {"T1", "S"});
    double without = prob::mutual_information(j, {"T"}, {"Y1"}, {"T1", "S"});
    CHECK(with_y == doctest::Approx(without).epsilon(1e-9));
  }
}

TEST_CASE("mac joint marginalizes back to the product of inputs") {
  auto ch = testutil::random_mac(11);
  rng::Engine eng(3);
  auto p1 = eng.dirichlet(4);
  auto p2 = eng.dirichlet(4);
  std::vector<double> p12(16);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) p12[a * 4 + b] = p1[a] * p2[b];
  auto j = channel::induced_mac_joint(ch, p12);
  auto m1 = j.marginal({"T1"});
  auto m2 = j.marginal({"T2"});
  for (int a = 0; a < 4; ++a) CHECK(m1.probs()[a] == doctest::Approx(p1[a]).epsilon(1e-12));
  for (int b = 0; b < 4; ++b) CHECK(m2.probs()[b] == doctest::Approx(p2[b]).epsilon(1e-12));
  // independent inputs stay independent
  CHECK(prob::mutual_information(j, {"T1"}, {"T2"}) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("channel constructors validate shapes and rows") {
  CHECK_THROWS_AS(channel::StateChannel(2, 2, 2, std::vector<double>(7, 0.125),
                                        prob::Pmf({0.5, 0.5})),
                  ValidationError);
  std::vector<double> bad = {0.9, 0.2, 0.1, 0.9, 0.5, 0.5, 0.5, 0.5};
  CHECK_THROWS_AS(channel::StateChannel(2, 2, 2, bad, prob::Pmf({0.5, 0.5})), ValidationError);
  CHECK_THROWS_AS(channel::StateChannel(2, 3, 2, std::vector<double>(12, 0.5),
                                        prob::Pmf({0.5, 0.5})),
                  ValidationError);  // state pmf length mismatch
}

}  // TEST_SUITE
