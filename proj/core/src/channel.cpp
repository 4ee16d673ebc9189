#include "statecap/channel.hpp"

#include <cmath>
#include <sstream>

#include "statecap/error.hpp"

namespace statecap::channel {

namespace {

void check_rows(const std::vector<double>& kernel, std::size_t rows, std::size_t cols,
                const char* what) {
  if (kernel.size() != rows * cols) {
    throw ValidationError(std::string(what) + ": kernel size mismatch");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      double v = kernel[r * cols + c];
      if (v < 0.0) throw ValidationError(std::string(what) + ": negative kernel entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > prob::kMassTol) {
      std::ostringstream os;
      os << what << ": row " << r << " sums to " << sum << ", not 1 within " << prob::kMassTol;
      throw ValidationError(os.str());
    }
  }
}

void check_sizes(std::initializer_list<int> sizes, const char* what) {
  for (int s : sizes) {
    if (s < 1) throw ValidationError(std::string(what) + ": alphabet size < 1");
  }
}

int checked_strategy_count(int x_size, int s_size, int cap, const char* what) {
  long long count = 1;
  for (int i = 0; i < s_size; ++i) {
    count *= x_size;
    if (count > cap) {
      std::ostringstream os;
      os << what << ": strategy alphabet |X|^|S| = " << x_size << "^" << s_size
         << " exceeds cap " << cap;
      throw CapExceededError(os.str());
    }
  }
  return static_cast<int>(count);
}

}  // namespace

StateChannel::StateChannel(int x_size, int s_size, int y_size, std::vector<double> kernel,
                           prob::Pmf state_pmf)
    : x_(x_size), s_(s_size), y_(y_size), k_(std::move(kernel)), ps_(std::move(state_pmf)) {
  check_sizes({x_, s_, y_}, "StateChannel");
  if (ps_.size() != s_) throw ValidationError("StateChannel: state pmf size != |S|");
  check_rows(k_, static_cast<std::size_t>(x_) * s_, y_, "StateChannel");
}

BroadcastStateChannel::BroadcastStateChannel(int x_size, int s_size, int y1_size, int y2_size,
                                             std::vector<double> kernel, prob::Pmf state_pmf)
    : x_(x_size), s_(s_size), y1_(y1_size), y2_(y2_size), k_(std::move(kernel)),
      ps_(std::move(state_pmf)) {
  check_sizes({x_, s_, y1_, y2_}, "BroadcastStateChannel");
  if (ps_.size() != s_) throw ValidationError("BroadcastStateChannel: state pmf size != |S|");
  check_rows(k_, static_cast<std::size_t>(x_) * s_, static_cast<std::size_t>(y1_) * y2_,
             "BroadcastStateChannel");
}

RelayStateChannel::RelayStateChannel(int x_size, int x1_size, int s_size, int y_size, int y1_size,
                                     std::vector<double> kernel, prob::Pmf state_pmf)
    : x_(x_size), x1_(x1_size), s_(s_size), y_(y_size), y1_(y1_size), k_(std::move(kernel)),
      ps_(std::move(state_pmf)) {
  check_sizes({x_, x1_, s_, y_, y1_}, "RelayStateChannel");
  if (ps_.size() != s_) throw ValidationError("RelayStateChannel: state pmf size != |S|");
  check_rows(k_, static_cast<std::size_t>(x_) * x1_ * s_, static_cast<std::size_t>(y_) * y1_,
             "RelayStateChannel");
}

MacStateChannel::MacStateChannel(int x1_size, int x2_size, int s_size, int y_size,
                                 std::vector<double> kernel, prob::Pmf state_pmf)
    : x1_(x1_size), x2_(x2_size), s_(s_size), y_(y_size), k_(std::move(kernel)),
      ps_(std::move(state_pmf)) {
  check_sizes({x1_, x2_, s_, y_}, "MacStateChannel");
  if (ps_.size() != s_) throw ValidationError("MacStateChannel: state pmf size != |S|");
  check_rows(k_, static_cast<std::size_t>(x1_) * x2_ * s_, y_, "MacStateChannel");
}

std::vector<StrategyMap> enumerate_strategies(int x_size, int s_size, int cap) {
  if (x_size < 1 || s_size < 1) throw ValidationError("enumerate_strategies: sizes must be >= 1");
  int count = checked_strategy_count(x_size, s_size, cap, "enumerate_strategies");
  std::vector<StrategyMap> out;
  out.reserve(count);
  std::vector<int> table(s_size, 0);
  for (int i = 0; i < count; ++i) {
    out.push_back(StrategyMap{table});
    // Lexicographic increment, table[0] most significant.
    for (int pos = s_size - 1; pos >= 0; --pos) {
      if (++table[pos] < x_size) break;
      table[pos] = 0;
    }
  }
  return out;
}

Dmc BcDmc::marginal1() const {
  Dmc out;
  out.input_size = input_size;
  out.output_size = y1_size;
  out.kernel.assign(static_cast<std::size_t>(input_size) * y1_size, 0.0);
  for (int t = 0; t < input_size; ++t) {
    for (int a = 0; a < y1_size; ++a) {
      double acc = 0.0;
      for (int b = 0; b < y2_size; ++b) acc += p(a, b, t);
      out.kernel[static_cast<std::size_t>(t) * y1_size + a] = acc;
    }
  }
  return out;
}

Dmc BcDmc::marginal2() const {
  Dmc out;
  out.input_size = input_size;
  out.output_size = y2_size;
  out.kernel.assign(static_cast<std::size_t>(input_size) * y2_size, 0.0);
  for (int t = 0; t < input_size; ++t) {
    for (int b = 0; b < y2_size; ++b) {
      double acc = 0.0;
      for (int a = 0; a < y1_size; ++a) acc += p(a, b, t);
      out.kernel[static_cast<std::size_t>(t) * y2_size + b] = acc;
    }
  }
  return out;
}

Dmc induced_strategy_channel(const StateChannel& ch, int cap) {
  auto strategies = enumerate_strategies(ch.x_size(), ch.s_size(), cap);
  Dmc out;
  out.input_size = static_cast<int>(strategies.size());
  out.output_size = ch.y_size();
  out.kernel.assign(strategies.size() * ch.y_size(), 0.0);
  for (std::size_t t = 0; t < strategies.size(); ++t) {
    for (int s = 0; s < ch.s_size(); ++s) {
      double ps = ch.state_pmf()[s];
      if (ps == 0.0) continue;
      int x = strategies[t](s);
      for (int y = 0; y < ch.y_size(); ++y) {
        out.kernel[t * ch.y_size() + y] += ps * ch.p(y, x, s);
      }
    }
  }
  return out;
}

BcDmc induced_bc_strategy_channel(const BroadcastStateChannel& ch, int cap) {
  auto strategies = enumerate_strategies(ch.x_size(), ch.s_size(), cap);
  BcDmc out;
  out.input_size = static_cast<int>(strategies.size());
  out.y1_size = ch.y1_size();
  out.y2_size = ch.y2_size();
  out.kernel.assign(strategies.size() * ch.y1_size() * ch.y2_size(), 0.0);
  for (std::size_t t = 0; t < strategies.size(); ++t) {
    for (int s = 0; s < ch.s_size(); ++s) {
      double ps = ch.state_pmf()[s];
      if (ps == 0.0) continue;
      int x = strategies[t](s);
      for (int a = 0; a < ch.y1_size(); ++a) {
        for (int b = 0; b < ch.y2_size(); ++b) {
          out.kernel[(t * ch.y1_size() + a) * ch.y2_size() + b] += ps * ch.p(a, b, x, s);
        }
      }
    }
  }
  return out;
}

prob::JointPmf induced_relay_joint(const RelayStateChannel& ch, const std::vector<double>& q,
                                   int cap) {
  auto st = enumerate_strategies(ch.x_size(), ch.s_size(), cap);
  auto st1 = enumerate_strategies(ch.x1_size(), ch.s_size(), cap);
  const int nt = static_cast<int>(st.size());
  const int nt1 = static_cast<int>(st1.size());
  if (static_cast<long long>(nt) * nt1 > cap) {
    throw CapExceededError("induced_relay_joint: |T|*|T1| exceeds cap");
  }
  if (static_cast<int>(q.size()) != nt * nt1) {
    throw ValidationError("induced_relay_joint: q size != |T|*|T1|");
  }

  const int ns = ch.s_size(), ny = ch.y_size(), ny1 = ch.y1_size();
  std::vector<double> cells(static_cast<std::size_t>(nt) * nt1 * ns * ny1 * ny, 0.0);
  std::size_t idx = 0;
  for (int t = 0; t < nt; ++t) {
    for (int t1 = 0; t1 < nt1; ++t1) {
      double qv = q[static_cast<std::size_t>(t) * nt1 + t1];
      for (int s = 0; s < ns; ++s) {
        double base = qv * ch.state_pmf()[s];
        int x = st[t](s);
        int x1 = st1[t1](s);
        for (int y1 = 0; y1 < ny1; ++y1) {
          for (int y = 0; y < ny; ++y) {
            cells[idx++] = base * ch.p(y, y1, x, x1, s);
          }
        }
      }
    }
  }
  return prob::JointPmf({prob::Axis{"T", nt}, prob::Axis{"T1", nt1}, prob::Axis{"S", ns},
                         prob::Axis{"Y1", ny1}, prob::Axis{"Y", ny}},
                        std::move(cells));
}

prob::JointPmf induced_mac_joint(const MacStateChannel& ch, const std::vector<double>& p12,
                                 int cap) {
  auto st1 = enumerate_strategies(ch.x1_size(), ch.s_size(), cap);
  auto st2 = enumerate_strategies(ch.x2_size(), ch.s_size(), cap);
  const int nt1 = static_cast<int>(st1.size());
  const int nt2 = static_cast<int>(st2.size());
  if (static_cast<long long>(nt1) * nt2 > cap) {
    throw CapExceededError("induced_mac_joint: |T1|*|T2| exceeds cap");
  }
  if (static_cast<int>(p12.size()) != nt1 * nt2) {
    throw ValidationError("induced_mac_joint: p12 size != |T1|*|T2|");
  }

  const int ns = ch.s_size(), ny = ch.y_size();
  std::vector<double> cells(static_cast<std::size_t>(nt1) * nt2 * ns * ny, 0.0);
  std::size_t idx = 0;
  for (int t1 = 0; t1 < nt1; ++t1) {
    for (int t2 = 0; t2 < nt2; ++t2) {
      double pv = p12[static_cast<std::size_t>(t1) * nt2 + t2];
      for (int s = 0; s < ns; ++s) {
        double base = pv * ch.state_pmf()[s];
        int x1 = st1[t1](s);
        int x2 = st2[t2](s);
        for (int y = 0; y < ny; ++y) {
          cells[idx++] = base * ch.p(y, x1, x2, s);
        }
      }
    }
  }
  return prob::JointPmf({prob::Axis{"T1", nt1}, prob::Axis{"T2", nt2}, prob::Axis{"S", ns},
                         prob::Axis{"Y", ny}},
                        std::move(cells));
}

BcDegradedVerdict check_bc_degraded(const BroadcastStateChannel& ch, double tol) {
  const int nx = ch.x_size(), ns = ch.s_size(), ny1 = ch.y1_size(), ny2 = ch.y2_size();
  BcDegradedVerdict v;
  v.recovered.assign(static_cast<std::size_t>(ny1) * ny2, 0.0);

  for (int y1 = 0; y1 < ny1; ++y1) {
    // Reference conditional from the (x,s) cell with the largest p(y1|x,s);
    // unreachable y1 rows are unconstrained and reported uniform.
    double best_mass = 0.0;
    int bx = -1, bs = -1;
    for (int x = 0; x < nx; ++x) {
      for (int s = 0; s < ns; ++s) {
        double m = 0.0;
        for (int y2 = 0; y2 < ny2; ++y2) m += ch.p(y1, y2, x, s);
        if (m > best_mass) {
          best_mass = m;
          bx = x;
          bs = s;
        }
      }
    }
    if (best_mass <= tol) {
      for (int y2 = 0; y2 < ny2; ++y2) v.recovered[static_cast<std::size_t>(y1) * ny2 + y2] = 1.0 / ny2;
      continue;
    }
    for (int y2 = 0; y2 < ny2; ++y2) {
      v.recovered[static_cast<std::size_t>(y1) * ny2 + y2] = ch.p(y1, y2, bx, bs) / best_mass;
    }
    for (int x = 0; x < nx; ++x) {
      for (int s = 0; s < ns; ++s) {
        double m = 0.0;
        for (int y2 = 0; y2 < ny2; ++y2) m += ch.p(y1, y2, x, s);
        if (m <= tol) continue;
        for (int y2 = 0; y2 < ny2; ++y2) {
          double dev = std::abs(ch.p(y1, y2, x, s) / m -
                                v.recovered[static_cast<std::size_t>(y1) * ny2 + y2]);
          if (dev > v.residual) {
            v.residual = dev;
            v.witness = {x, s, y1, y2};
          }
        }
      }
    }
  }
  v.pass = v.residual <= tol;
  if (v.pass) {
    v.witness = {};
  } else {
    v.recovered.clear();
  }
  return v;
}

RelayDegradedVerdict check_relay_degraded(const RelayStateChannel& ch, double tol) {
  const int nx = ch.x_size(), nx1 = ch.x1_size(), ns = ch.s_size();
  const int ny = ch.y_size(), ny1 = ch.y1_size();
  RelayDegradedVerdict v;
  v.recovered.assign(static_cast<std::size_t>(nx1) * ns * ny1 * ny, 0.0);

  auto rec = [&](int x1, int s, int y1) -> double* {
    return v.recovered.data() + ((static_cast<std::size_t>(x1) * ns + s) * ny1 + y1) * ny;
  };

  for (int x1 = 0; x1 < nx1; ++x1) {
    for (int s = 0; s < ns; ++s) {
      for (int y1 = 0; y1 < ny1; ++y1) {
        double best_mass = 0.0;
        int bx = -1;
        for (int x = 0; x < nx; ++x) {
          double m = 0.0;
          for (int y = 0; y < ny; ++y) m += ch.p(y, y1, x, x1, s);
          if (m > best_mass) {
            best_mass = m;
            bx = x;
          }
        }
        double* row = rec(x1, s, y1);
        if (best_mass <= tol) {
          for (int y = 0; y < ny; ++y) row[y] = 1.0 / ny;
          continue;
        }
        for (int y = 0; y < ny; ++y) row[y] = ch.p(y, y1, bx, x1, s) / best_mass;
        for (int x = 0; x < nx; ++x) {
          double m = 0.0;
          for (int y = 0; y < ny; ++y) m += ch.p(y, y1, x, x1, s);
          if (m <= tol) continue;
          for (int y = 0; y < ny; ++y) {
            double dev = std::abs(ch.p(y, y1, x, x1, s) / m - row[y]);
            if (dev > v.residual) {
              v.residual = dev;
              v.witness = {x, x1, s, y1, y};
            }
          }
        }
      }
    }
  }
  v.pass = v.residual <= tol;
  if (v.pass) {
    v.witness = {};
  } else {
    v.recovered.clear();
  }
  return v;
}

}  // namespace statecap::channel
