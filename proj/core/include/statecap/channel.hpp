#pragma once

#include <vector>

#include "statecap/prob.hpp"

namespace statecap::channel {

/// Hard cap on strategy alphabet sizes (and on the joint strategy alphabet
/// used by the two-sender region solvers). 4096 = 4^6.
inline constexpr int kStrategyCap = 4096;

/// Default tolerance for degradedness factorization checks.
inline constexpr double kDegradedTol = 1e-9;

/// Memoryless point-to-point channel p(y|x,s) whose state s is drawn i.i.d.
/// from state_pmf and revealed causally to the encoder. Kernel layout is
/// [x][s][y], rows (x,s) stochastic over y.
class StateChannel {
 public:
  StateChannel(int x_size, int s_size, int y_size, std::vector<double> kernel,
               prob::Pmf state_pmf);

  int x_size() const { return x_; }
  int s_size() const { return s_; }
  int y_size() const { return y_; }
  const prob::Pmf& state_pmf() const { return ps_; }
  double p(int y, int x, int s) const { return k_[(static_cast<std::size_t>(x) * s_ + s) * y_ + y]; }
  const std::vector<double>& kernel() const { return k_; }

 private:
  int x_, s_, y_;
  std::vector<double> k_;
  prob::Pmf ps_;
};

/// Two-receiver broadcast channel p(y1,y2|x,s). Kernel layout [x][s][y1][y2].
class BroadcastStateChannel {
 public:
  BroadcastStateChannel(int x_size, int s_size, int y1_size, int y2_size,
                        std::vector<double> kernel, prob::Pmf state_pmf);

  int x_size() const { return x_; }
  int s_size() const { return s_; }
  int y1_size() const { return y1_; }
  int y2_size() const { return y2_; }
  const prob::Pmf& state_pmf() const { return ps_; }
  double p(int y1, int y2, int x, int s) const {
    return k_[((static_cast<std::size_t>(x) * s_ + s) * y1_ + y1) * y2_ + y2];
  }
  const std::vector<double>& kernel() const { return k_; }

 private:
  int x_, s_, y1_, y2_;
  std::vector<double> k_;
  prob::Pmf ps_;
};

/// Relay channel p(y,y1|x,x1,s): x is the source input, x1 the relay input,
/// y1 the relay observation, y the destination observation. Kernel layout
/// [x][x1][s][y][y1].
class RelayStateChannel {
 public:
  RelayStateChannel(int x_size, int x1_size, int s_size, int y_size, int y1_size,
                    std::vector<double> kernel, prob::Pmf state_pmf);

  int x_size() const { return x_; }
  int x1_size() const { return x1_; }
  int s_size() const { return s_; }
  int y_size() const { return y_; }
  int y1_size() const { return y1_; }
  const prob::Pmf& state_pmf() const { return ps_; }
  double p(int y, int y1, int x, int x1, int s) const {
    return k_[(((static_cast<std::size_t>(x) * x1_ + x1) * s_ + s) * y_ + y) * y1_ + y1];
  }
  const std::vector<double>& kernel() const { return k_; }

 private:
  int x_, x1_, s_, y_, y1_;
  std::vector<double> k_;
  prob::Pmf ps_;
};

/// Two-sender multiple-access channel p(y|x1,x2,s). Kernel layout [x1][x2][s][y].
class MacStateChannel {
 public:
  MacStateChannel(int x1_size, int x2_size, int s_size, int y_size,
                  std::vector<double> kernel, prob::Pmf state_pmf);

  int x1_size() const { return x1_; }
  int x2_size() const { return x2_; }
  int s_size() const { return s_; }
  int y_size() const { return y_; }
  const prob::Pmf& state_pmf() const { return ps_; }
  double p(int y, int x1, int x2, int s) const {
    return k_[((static_cast<std::size_t>(x1) * x2_ + x2) * s_ + s) * y_ + y];
  }
  const std::vector<double>& kernel() const { return k_; }

 private:
  int x1_, x2_, s_, y_;
  std::vector<double> k_;
  prob::Pmf ps_;
};

/// An encoding strategy: a map from state letters to input letters.
/// table[s] is the input transmitted when the current state is s.
struct StrategyMap {
  std::vector<int> table;
  int operator()(int s) const { return table[s]; }
};

/// All |X|^|S| strategy maps in lexicographic order of their tables
/// (table[0] most significant). Throws CapExceededError when the count
/// exceeds `cap`.
std::vector<StrategyMap> enumerate_strategies(int x_size, int s_size,
                                              int cap = kStrategyCap);

/// Ordinary discrete memoryless channel, rows stochastic over the output.
struct Dmc {
  int input_size = 0;
  int output_size = 0;
  std::vector<double> kernel;  // [input][output]
  double p(int y, int x) const { return kernel[static_cast<std::size_t>(x) * output_size + y]; }
};

/// Two-output channel over a strategy input alphabet. Kernel [t][y1][y2].
struct BcDmc {
  int input_size = 0;
  int y1_size = 0;
  int y2_size = 0;
  std::vector<double> kernel;
  double p(int y1, int y2, int t) const {
    return kernel[(static_cast<std::size_t>(t) * y1_size + y1) * y2_size + y2];
  }
  /// Marginal kernel to receiver 1 (rows over y1).
  Dmc marginal1() const;
  /// Marginal kernel to receiver 2 (rows over y2).
  Dmc marginal2() const;
};

/// The ordinary channel induced on the strategy alphabet:
/// p(y|t) = sum_s ps(s) p(y | t(s), s). Row order matches
/// enumerate_strategies.
Dmc induced_strategy_channel(const StateChannel& ch, int cap = kStrategyCap);

/// Broadcast counterpart: p(y1,y2|t) = sum_s ps(s) p(y1,y2 | t(s), s).
BcDmc induced_bc_strategy_channel(const BroadcastStateChannel& ch, int cap = kStrategyCap);

/// Joint law over (T, T1, S, Y1, Y) induced by a joint strategy pmf
/// q(t,t1): q(t,t1) ps(s) p(y,y1 | t(s), t1(s), s). `q` is row-major [t][t1].
prob::JointPmf induced_relay_joint(const RelayStateChannel& ch,
                                   const std::vector<double>& q,
                                   int cap = kStrategyCap);

/// Joint law over (T1, T2, S, Y) induced by a joint strategy pmf p12(t1,t2):
/// p12(t1,t2) ps(s) p(y | t1(s), t2(s), s). `p12` is row-major [t1][t2].
prob::JointPmf induced_mac_joint(const MacStateChannel& ch,
                                 const std::vector<double>& p12,
                                 int cap = kStrategyCap);

/// Result of a physical-degradedness factorization check for a broadcast
/// channel: p(y1,y2|x,s) = p(y1|x,s) p(y2|y1). On PASS, `recovered` holds the
/// recovered kernel p(y2|y1) (rows [y1][y2]; rows for y1 values unreachable
/// at tolerance are uniform). On FAIL, `witness` is the maximally violating
/// cell and `residual` its deviation.
struct BcDegradedVerdict {
  bool pass = false;
  std::vector<double> recovered;
  struct Witness {
    int x = -1, s = -1, y1 = -1, y2 = -1;
  } witness;
  double residual = 0.0;
};

BcDegradedVerdict check_bc_degraded(const BroadcastStateChannel& ch,
                                    double tol = kDegradedTol);

/// Relay counterpart: p(y,y1|x,x1,s) = p(y1|x,x1,s) p(y|y1,x1,s). On PASS,
/// `recovered` holds p(y|y1,x1,s) laid out [x1][s][y1][y].
struct RelayDegradedVerdict {
  bool pass = false;
  std::vector<double> recovered;
  struct Witness {
    int x = -1, x1 = -1, s = -1, y1 = -1, y = -1;
  } witness;
  double residual = 0.0;
};

RelayDegradedVerdict check_relay_degraded(const RelayStateChannel& ch,
                                          double tol = kDegradedTol);

}  // namespace statecap::channel
