#include "statecap/solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "parallel.hpp"
#include "statecap/error.hpp"
#include "statecap/rng.hpp"

namespace statecap::solve {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.6931471805599453;

inline double safe_log(double x) { return std::log(x > 1e-300 ? x : 1e-300); }

// Lexicographic comparison used for deterministic tie-breaking between
// argmax candidates of equal value.
bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

std::vector<double> project_to_simplex(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    css += u[j];
    double cand = (css - 1.0) / static_cast<double>(j + 1);
    if (u[j] - cand > 0.0) theta = cand;
  }
  for (auto& x : v) x = std::max(x - theta, 0.0);
  double total = std::accumulate(v.begin(), v.end(), 0.0);
  for (auto& x : v) x /= total;
  return v;
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged: return "converged";
    case SolveStatus::kIterationLimit: return "iteration-limit";
    case SolveStatus::kRestartLimit: return "restart-limit";
    case SolveStatus::kBoundOnly: return "bound-only";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// RateRegion

RateRegion RateRegion::from_points(std::vector<RatePoint> points,
                                   std::vector<std::string> labels) {
  if (labels.size() != points.size()) {
    throw ValidationError("RateRegion::from_points: labels/points length mismatch");
  }
  for (auto& p : points) {
    p.r1 = std::max(p.r1, 0.0);
    p.r2 = std::max(p.r2, 0.0);
  }
  double m1 = 0.0, m2 = 0.0;
  for (const auto& p : points) {
    m1 = std::max(m1, p.r1);
    m2 = std::max(m2, p.r2);
  }
  points.push_back({0.0, m2});
  labels.emplace_back("corner");
  points.push_back({m1, 0.0});
  labels.emplace_back("corner");

  std::vector<int> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (points[a].r1 != points[b].r1) return points[a].r1 < points[b].r1;
    if (points[a].r2 != points[b].r2) return points[a].r2 > points[b].r2;
    return a < b;
  });

  auto cross = [](RatePoint o, RatePoint a, RatePoint b) {
    return (a.r1 - o.r1) * (b.r2 - o.r2) - (a.r2 - o.r2) * (b.r1 - o.r1);
  };

  // Restart endpoints that converged to the same optimum differ by solver
  // noise only (observed spread ~1e-6); snap them together so the boundary
  // keeps one vertex each. The snap is far below any tolerance used on
  // region coordinates.
  constexpr double kSnap = 1e-5;
  RateRegion out;
  for (int idx : order) {
    const RatePoint p = points[idx];
    if (!out.v_.empty() && std::abs(out.v_.back().r1 - p.r1) <= kSnap &&
        std::abs(out.v_.back().r2 - p.r2) <= kSnap) {
      continue;
    }
    while (out.v_.size() >= 2 &&
           cross(out.v_[out.v_.size() - 2], out.v_.back(), p) >= 0.0) {
      out.v_.pop_back();
      out.tags_.pop_back();
    }
    // A new point at (nearly) the same r1 as the stack top is dominated
    // (points are sorted by r2 descending within equal r1).
    if (!out.v_.empty() && p.r1 <= out.v_.back().r1 + kSnap) continue;
    out.v_.push_back(p);
    out.tags_.push_back(labels[idx]);
  }
  return out;
}

double RateRegion::r1_max() const { return v_.empty() ? 0.0 : v_.back().r1; }

double RateRegion::r2_max() const { return v_.empty() ? 0.0 : v_.front().r2; }

double RateRegion::boundary_r2(double r1) const {
  if (v_.empty()) return 0.0;
  if (r1 <= v_.front().r1) return v_.front().r2;
  for (std::size_t i = 1; i < v_.size(); ++i) {
    if (r1 <= v_[i].r1) {
      double span = v_[i].r1 - v_[i - 1].r1;
      if (span <= 0.0) return std::max(v_[i - 1].r2, v_[i].r2);
      double f = (r1 - v_[i - 1].r1) / span;
      return v_[i - 1].r2 + f * (v_[i].r2 - v_[i - 1].r2);
    }
  }
  return v_.back().r2;
}

double RateRegion::margin(RatePoint p) const {
  double m1 = r1_max();
  double over = std::max(0.0, p.r1 - m1);
  return boundary_r2(std::min(p.r1, m1)) - p.r2 - over;
}

// ---------------------------------------------------------------------------
// Blahut-Arimoto

SolveReport blahut_arimoto(const channel::Dmc& ch, const BaOptions& opt) {
  const int n = ch.input_size, m = ch.output_size;
  if (n < 1 || m < 1 || static_cast<int>(ch.kernel.size()) != n * m) {
    throw ValidationError("blahut_arimoto: malformed channel");
  }
  std::vector<double> p(n, 1.0 / n), q(m), d(n);
  SolveReport rep;
  rep.status = SolveStatus::kIterationLimit;
  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    std::fill(q.begin(), q.end(), 0.0);
    for (int x = 0; x < n; ++x) {
      const double* row = ch.kernel.data() + static_cast<std::size_t>(x) * m;
      for (int y = 0; y < m; ++y) q[y] += p[x] * row[y];
    }
    double lower = 0.0, upper = -kInf;
    for (int x = 0; x < n; ++x) {
      const double* row = ch.kernel.data() + static_cast<std::size_t>(x) * m;
      double dx = 0.0;
      for (int y = 0; y < m; ++y) {
        if (row[y] > 0.0) dx += row[y] * std::log2(row[y] / q[y]);
      }
      d[x] = dx;
      lower += p[x] * dx;
      upper = std::max(upper, dx);
    }
    rep.iterations = iter;
    rep.lower = lower;
    rep.upper = upper;
    if (upper - lower <= opt.tol) {
      rep.status = SolveStatus::kConverged;
      break;
    }
    double total = 0.0;
    for (int x = 0; x < n; ++x) {
      p[x] *= std::exp2(d[x] - upper);
      total += p[x];
    }
    for (int x = 0; x < n; ++x) p[x] /= total;
  }
  rep.value = rep.lower;
  rep.argmax = std::move(p);
  return rep;
}

SolveReport single_user_capacity(const channel::StateChannel& ch, const BaOptions& opt) {
  SolveReport rep = blahut_arimoto(channel::induced_strategy_channel(ch), opt);
  rep.label = "exact";
  return rep;
}

// ---------------------------------------------------------------------------
// Grid oracle

OracleResult grid_oracle_maximize(
    const std::function<double(std::span<const double>)>& objective, int dims, int resolution,
    long long budget) {
  if (dims < 1 || resolution < 1) {
    throw ValidationError("grid_oracle_maximize: dims and resolution must be >= 1");
  }
  long double count = 1.0L;
  for (int i = 1; i < dims; ++i) {
    count = count * (resolution + i) / i;  // C(resolution + dims - 1, dims - 1)
    if (count > 4e18L) break;
  }
  if (count > static_cast<long double>(budget)) {
    std::ostringstream os;
    os << "grid_oracle_maximize: lattice of ~" << static_cast<double>(count)
       << " points exceeds budget " << budget;
    throw CapExceededError(os.str());
  }

  OracleResult res;
  res.value = -kInf;
  std::vector<int> cnt(dims, 0);
  std::vector<double> pmf(dims, 0.0);
  const double inv = 1.0 / resolution;
  auto rec = [&](auto&& self, int i, int remaining) -> void {
    if (i == dims - 1) {
      cnt[i] = remaining;
      for (int j = 0; j < dims; ++j) pmf[j] = cnt[j] * inv;
      double v = objective(std::span<const double>(pmf));
      ++res.evaluations;
      if (v > res.value) {
        res.value = v;
        res.argmax = pmf;
      }
      return;
    }
    for (int k = 0; k <= remaining; ++k) {
      cnt[i] = k;
      self(self, i + 1, remaining - k);
    }
  };
  rec(rec, 0, resolution);
  return res;
}

// ---------------------------------------------------------------------------
// Broadcast region

namespace {

struct BcKernels {
  int nu2 = 0, nt = 0, ny1 = 0, ny2 = 0;
  std::vector<double> k1;  // [t][y1]
  std::vector<double> k2;  // [t][y2]
};

struct BcEval {
  double j = 0.0, r1 = 0.0, r2 = 0.0;
};

// Objective lambda*I(T;Y1|U2) + (1-lambda)*I(U2;Y2) of the joint P[u2][t],
// in bits. When grad != nullptr it receives dJ/dP (same layout).
BcEval bc_eval(const BcKernels& K, double lambda, const std::vector<double>& P,
               std::vector<double>* grad) {
  const int nu2 = K.nu2, nt = K.nt, ny1 = K.ny1, ny2 = K.ny2;
  std::vector<double> b(nu2, 0.0);              // p(u2)
  std::vector<double> a(nu2 * ny2, 0.0);        // p(u2, y2)
  std::vector<double> dy(ny2, 0.0);             // p(y2)
  std::vector<double> e(nu2 * ny1, 0.0);        // p(u2, y1)

  for (int u = 0; u < nu2; ++u) {
    for (int t = 0; t < nt; ++t) {
      double pv = P[u * nt + t];
      if (pv == 0.0) continue;
      b[u] += pv;
      const double* r2row = K.k2.data() + static_cast<std::size_t>(t) * ny2;
      for (int y = 0; y < ny2; ++y) {
        if (r2row[y] > 0.0) a[u * ny2 + y] += pv * r2row[y];
      }
      const double* r1row = K.k1.data() + static_cast<std::size_t>(t) * ny1;
      for (int y = 0; y < ny1; ++y) {
        if (r1row[y] > 0.0) e[u * ny1 + y] += pv * r1row[y];
      }
    }
  }
  for (int u = 0; u < nu2; ++u) {
    for (int y = 0; y < ny2; ++y) dy[y] += a[u * ny2 + y];
  }

  double r2 = 0.0;
  for (int u = 0; u < nu2; ++u) {
    for (int y = 0; y < ny2; ++y) {
      double av = a[u * ny2 + y];
      if (av > 0.0) r2 += av * std::log2(av / (b[u] * dy[y]));
    }
  }

  double r1 = 0.0;
  for (int u = 0; u < nu2; ++u) {
    for (int t = 0; t < nt; ++t) {
      double pv = P[u * nt + t];
      if (pv == 0.0) continue;
      const double* r1row = K.k1.data() + static_cast<std::size_t>(t) * ny1;
      for (int y = 0; y < ny1; ++y) {
        if (r1row[y] <= 0.0) continue;
        double cv = pv * r1row[y];
        r1 += cv * std::log2((cv * b[u]) / (pv * e[u * ny1 + y]));
      }
    }
  }
  r1 = std::max(r1, 0.0);
  r2 = std::max(r2, 0.0);

  if (grad) {
    grad->assign(static_cast<std::size_t>(nu2) * nt, 0.0);
    for (int u = 0; u < nu2; ++u) {
      double lnb = safe_log(b[u]);
      for (int t = 0; t < nt; ++t) {
        double pv = P[u * nt + t];
        // dI(U2;Y2)/dP: sum_y k2 ln(a/dy) - ln b - 1.
        double g2 = -lnb - 1.0;
        const double* r2row = K.k2.data() + static_cast<std::size_t>(t) * ny2;
        for (int y = 0; y < ny2; ++y) {
          if (r2row[y] > 0.0) {
            g2 += r2row[y] * (safe_log(a[u * ny2 + y]) - safe_log(dy[y]));
          }
        }
        // dI(T;Y1|U2)/dP: sum_y k1 ln(c/e) - ln(P/b).
        double g1 = -(safe_log(pv) - lnb);
        const double* r1row = K.k1.data() + static_cast<std::size_t>(t) * ny1;
        for (int y = 0; y < ny1; ++y) {
          if (r1row[y] > 0.0) {
            g1 += r1row[y] * (safe_log(pv * r1row[y]) - safe_log(e[u * ny1 + y]));
          }
        }
        (*grad)[u * nt + t] = (lambda * g1 + (1.0 - lambda) * g2) / kLn2;
      }
    }
  }
  return {lambda * r1 + (1.0 - lambda) * r2, r1, r2};
}

struct BcAscentResult {
  BcEval best;
  std::vector<double> P;
  int iterations = 0;
  bool converged = false;
};

// Alternating exponentiated-gradient ascent over p(u2) and the rows p(t|u2).
// Each block step backtracks until the full objective improves, so the
// objective is monotone along the run.
BcAscentResult bc_ascend(const BcKernels& K, double lambda, std::vector<double> w,
                         std::vector<double> Q, int max_iter, double tol) {
  const int nu2 = K.nu2, nt = K.nt;
  auto compose = [&](const std::vector<double>& wv, const std::vector<double>& Qv) {
    std::vector<double> P(static_cast<std::size_t>(nu2) * nt);
    for (int u = 0; u < nu2; ++u)
      for (int t = 0; t < nt; ++t) P[u * nt + t] = wv[u] * Qv[u * nt + t];
    return P;
  };

  std::vector<double> P = compose(w, Q), grad;
  BcEval cur = bc_eval(K, lambda, P, nullptr);
  double eta_w = 0.5, eta_q = 0.5;
  int stall = 0;
  BcAscentResult out;

  for (int iter = 1; iter <= max_iter; ++iter) {
    out.iterations = iter;
    double j_before = cur.j;

    // Block 1: cloud weights.
    bc_eval(K, lambda, P, &grad);
    std::vector<double> gw(nu2, 0.0);
    for (int u = 0; u < nu2; ++u) {
      for (int t = 0; t < nt; ++t) gw[u] += Q[u * nt + t] * grad[u * nt + t];
    }
    double gmax = *std::max_element(gw.begin(), gw.end());
    for (double eta = eta_w; eta > 1e-13; eta *= 0.5) {
      std::vector<double> wc(nu2);
      double total = 0.0;
      for (int u = 0; u < nu2; ++u) {
        wc[u] = w[u] * std::exp(eta * (gw[u] - gmax));
        total += wc[u];
      }
      for (auto& x : wc) x /= total;
      std::vector<double> Pc = compose(wc, Q);
      BcEval ev = bc_eval(K, lambda, Pc, nullptr);
      if (ev.j > cur.j) {
        w = std::move(wc);
        P = std::move(Pc);
        cur = ev;
        eta_w = std::min(eta * 1.5, 64.0);
        break;
      }
    }

    // Block 2: satellite rows.
    bc_eval(K, lambda, P, &grad);
    for (double eta = eta_q; eta > 1e-13; eta *= 0.5) {
      std::vector<double> Qc(Q.size());
      for (int u = 0; u < nu2; ++u) {
        double rmax = -kInf;
        for (int t = 0; t < nt; ++t) rmax = std::max(rmax, grad[u * nt + t]);
        double total = 0.0;
        for (int t = 0; t < nt; ++t) {
          Qc[u * nt + t] = Q[u * nt + t] * std::exp(eta * (grad[u * nt + t] - rmax));
          total += Qc[u * nt + t];
        }
        for (int t = 0; t < nt; ++t) Qc[u * nt + t] /= total;
      }
      std::vector<double> Pc = compose(w, Qc);
      BcEval ev = bc_eval(K, lambda, Pc, nullptr);
      if (ev.j > cur.j) {
        Q = std::move(Qc);
        P = std::move(Pc);
        cur = ev;
        eta_q = std::min(eta * 1.5, 64.0);
        break;
      }
    }

    if (cur.j - j_before <= tol * std::max(1.0, std::abs(cur.j))) {
      if (++stall >= 3) {
        out.converged = true;
        break;
      }
    } else {
      stall = 0;
    }
  }
  out.best = cur;
  out.P = std::move(P);
  return out;
}

}  // namespace

BcRegionResult bc_region(const channel::BroadcastStateChannel& ch, const BcRegionOptions& opt) {
  auto verdict = channel::check_bc_degraded(ch, opt.degraded_tol);
  if (!verdict.pass) {
    std::ostringstream os;
    os << "bc_region: channel is not physically degraded; worst cell (x=" << verdict.witness.x
       << ", s=" << verdict.witness.s << ", y1=" << verdict.witness.y1
       << ", y2=" << verdict.witness.y2 << ") residual " << verdict.residual;
    throw ValidationError(os.str());
  }

  channel::BcDmc bc = induced_bc_strategy_channel(ch);
  BcKernels K;
  K.nt = bc.input_size;
  K.ny1 = bc.y1_size;
  K.ny2 = bc.y2_size;
  K.nu2 = opt.u2_size > 0 ? opt.u2_size : bc.input_size + 1;
  K.k1 = bc.marginal1().kernel;
  K.k2 = bc.marginal2().kernel;

  const int L = std::max(opt.lambda_points, 2);
  const int R = std::max(opt.restarts, 1);

  struct Task {
    BcAscentResult res;
  };
  std::vector<Task> tasks(static_cast<std::size_t>(L) * R);

  detail::parallel_for(L * R, opt.workers, [&](int idx) {
    const int li = idx / R;
    const int ri = idx % R;
    const double lambda = static_cast<double>(li) / (L - 1);
    std::vector<double> w(K.nu2, 1.0 / K.nu2);
    std::vector<double> Q(static_cast<std::size_t>(K.nu2) * K.nt, 1.0 / K.nt);
    if (ri > 0) {
      rng::Engine eng(rng::derive_seed(opt.seed, "bc_restart",
                                       static_cast<std::uint64_t>(li) * 4096 + ri));
      w = eng.dirichlet(K.nu2);
      for (int u = 0; u < K.nu2; ++u) {
        auto row = eng.dirichlet(K.nt);
        std::copy(row.begin(), row.end(), Q.begin() + static_cast<std::size_t>(u) * K.nt);
      }
    }
    tasks[idx].res = bc_ascend(K, lambda, std::move(w), std::move(Q), opt.max_iter, opt.tol);
  });

  BcRegionResult out;
  std::vector<RatePoint> points;
  std::vector<std::string> labels;

  for (int li = 0; li < L; ++li) {
    const double lambda = static_cast<double>(li) / (L - 1);
    std::ostringstream tag;
    tag << "lambda=" << lambda;
    const BcAscentResult* best = nullptr;
    for (int ri = 0; ri < R; ++ri) {
      const BcAscentResult& r = tasks[static_cast<std::size_t>(li) * R + ri].res;
      points.push_back({r.best.r1, r.best.r2});
      labels.push_back(tag.str());
      if (!best || r.best.j > best->best.j ||
          (r.best.j == best->best.j && lex_less(r.P, best->P))) {
        best = &r;
      }
    }
    SolveReport rep;
    rep.value = best->best.j;
    rep.lower = best->best.j;
    rep.upper = kInf;
    rep.argmax = best->P;
    rep.terms = {{"R1", best->best.r1}, {"R2", best->best.r2}, {"lambda", lambda}};
    rep.iterations = best->iterations;
    rep.restarts_used = R;
    rep.status = best->converged ? SolveStatus::kConverged : SolveStatus::kIterationLimit;
    rep.label = "achievable lower bound under the strategy parametrization";
    out.per_lambda.push_back(std::move(rep));
  }

  // Single-user corners from the marginal channels.
  channel::Dmc m1{K.nt, K.ny1, K.k1};
  channel::Dmc m2{K.nt, K.ny2, K.k2};
  points.push_back({blahut_arimoto(m1).value, 0.0});
  labels.emplace_back("corner");
  points.push_back({0.0, blahut_arimoto(m2).value});
  labels.emplace_back("corner");

  out.region = RateRegion::from_points(std::move(points), std::move(labels));
  return out;
}

// ---------------------------------------------------------------------------
// Relay

namespace {

struct RelayKernels {
  int nt = 0, nt1 = 0, ns = 0, ny = 0, ny1 = 0;
  std::vector<double> ps;
  std::vector<double> ky;  // [t][t1][y]      p(y | t, t1)
  std::vector<double> a1;  // [t][t1][s][y1]  p(y1 | t, t1, s)
};

RelayKernels relay_kernels(const channel::RelayStateChannel& ch) {
  auto st = channel::enumerate_strategies(ch.x_size(), ch.s_size());
  auto st1 = channel::enumerate_strategies(ch.x1_size(), ch.s_size());
  RelayKernels K;
  K.nt = static_cast<int>(st.size());
  K.nt1 = static_cast<int>(st1.size());
  if (static_cast<long long>(K.nt) * K.nt1 > channel::kStrategyCap) {
    throw CapExceededError("relay_capacity: |T|*|T1| exceeds cap");
  }
  K.ns = ch.s_size();
  K.ny = ch.y_size();
  K.ny1 = ch.y1_size();
  K.ps.assign(ch.state_pmf().probs().begin(), ch.state_pmf().probs().end());
  K.ky.assign(static_cast<std::size_t>(K.nt) * K.nt1 * K.ny, 0.0);
  K.a1.assign(static_cast<std::size_t>(K.nt) * K.nt1 * K.ns * K.ny1, 0.0);
  for (int t = 0; t < K.nt; ++t) {
    for (int t1 = 0; t1 < K.nt1; ++t1) {
      for (int s = 0; s < K.ns; ++s) {
        double ps = K.ps[s];
        if (ps == 0.0) continue;
        int x = st[t](s), x1 = st1[t1](s);
        for (int y = 0; y < K.ny; ++y) {
          for (int y1 = 0; y1 < K.ny1; ++y1) {
            double pv = ch.p(y, y1, x, x1, s);
            K.ky[(static_cast<std::size_t>(t) * K.nt1 + t1) * K.ny + y] += ps * pv;
            K.a1[((static_cast<std::size_t>(t) * K.nt1 + t1) * K.ns + s) * K.ny1 + y1] += pv;
          }
        }
      }
    }
  }
  return K;
}

struct RelayEval {
  double i1 = 0.0;  // I(T,T1;Y)
  double i2 = 0.0;  // I(T;Y1|T1,S)
};

RelayEval relay_eval(const RelayKernels& K, const std::vector<double>& q,
                     std::vector<double>* g1, std::vector<double>* g2) {
  const int nt = K.nt, nt1 = K.nt1, ns = K.ns, ny = K.ny, ny1 = K.ny1;
  const int M = nt * nt1;

  // I(T,T1;Y): plain channel mutual information over the joint input.
  std::vector<double> qy(ny, 0.0);
  for (int m = 0; m < M; ++m) {
    if (q[m] == 0.0) continue;
    const double* row = K.ky.data() + static_cast<std::size_t>(m) * ny;
    for (int y = 0; y < ny; ++y) qy[y] += q[m] * row[y];
  }
  RelayEval ev;
  if (g1) g1->assign(M, 0.0);
  for (int m = 0; m < M; ++m) {
    const double* row = K.ky.data() + static_cast<std::size_t>(m) * ny;
    double d = 0.0;
    for (int y = 0; y < ny; ++y) {
      if (row[y] > 0.0) d += row[y] * (std::log(row[y]) - safe_log(qy[y]));
    }
    ev.i1 += q[m] * d;
    if (g1) (*g1)[m] = (d - 1.0) / kLn2;
  }
  ev.i1 = std::max(ev.i1 / kLn2, 0.0);

  // I(T;Y1|T1,S).
  std::vector<double> q1(nt1, 0.0);
  for (int t = 0; t < nt; ++t)
    for (int t1 = 0; t1 < nt1; ++t1) q1[t1] += q[t * nt1 + t1];

  double nats = 0.0;
  std::vector<double> e(ny1);
  if (g2) g2->assign(M, 0.0);
  for (int t1 = 0; t1 < nt1; ++t1) {
    for (int s = 0; s < ns; ++s) {
      double ps = K.ps[s];
      if (ps == 0.0) continue;
      std::fill(e.begin(), e.end(), 0.0);
      for (int t = 0; t < nt; ++t) {
        double qv = q[t * nt1 + t1];
        if (qv == 0.0) continue;
        const double* arow =
            K.a1.data() + ((static_cast<std::size_t>(t) * nt1 + t1) * ns + s) * ny1;
        for (int y1 = 0; y1 < ny1; ++y1) e[y1] += qv * arow[y1];
      }
      for (int t = 0; t < nt; ++t) {
        double qv = q[t * nt1 + t1];
        const double* arow =
            K.a1.data() + ((static_cast<std::size_t>(t) * nt1 + t1) * ns + s) * ny1;
        for (int y1 = 0; y1 < ny1; ++y1) {
          if (arow[y1] <= 0.0) continue;
          double j4 = qv * arow[y1];
          if (j4 > 0.0) nats += ps * j4 * std::log(j4 / e[y1]);
          if (g2) (*g2)[t * nt1 + t1] += ps * arow[y1] * (safe_log(j4) - safe_log(e[y1]));
        }
        if (g2) (*g2)[t * nt1 + t1] += ps * (safe_log(q1[t1]) - safe_log(qv));
      }
    }
  }
  // The loop above accumulates sum ps j4 ln(j4/e); the remaining ln(q1/qv)
  // part of the conditional information telescopes over (y1, s):
  for (int t = 0; t < nt; ++t) {
    for (int t1 = 0; t1 < nt1; ++t1) {
      double qv = q[t * nt1 + t1];
      if (qv > 0.0 && q1[t1] > 0.0) nats += qv * std::log(q1[t1] / qv);
    }
  }
  if (g2) {
    for (auto& x : *g2) x /= kLn2;
  }
  ev.i2 = std::max(nats / kLn2, 0.0);
  return ev;
}

double softmin(double a, double b, double tau) {
  double lo = std::min(a, b), hi = std::max(a, b);
  return lo - tau * std::log1p(std::exp(-(hi - lo) / tau));
}

struct RelayAscentResult {
  double value = 0.0;  // true min
  RelayEval ev;
  std::vector<double> q;
  int iterations = 0;
  bool converged = false;
};

RelayAscentResult relay_ascend(const RelayKernels& K, std::vector<double> q, int max_iter,
                               double tol) {
  const int M = K.nt * K.nt1;
  const double taus[] = {0.5, 0.125, 0.03125, 0.0078125, 0.001};
  const int stages = 5;
  const int per_stage = std::max(max_iter / stages, 50);

  std::vector<double> g1, g2, grad(M);
  RelayAscentResult out;
  double eta = 0.5;
  int iters = 0;
  bool last_stage_converged = false;

  for (int stage = 0; stage < stages; ++stage) {
    const double tau = taus[stage];
    RelayEval ev = relay_eval(K, q, nullptr, nullptr);
    double f = softmin(ev.i1, ev.i2, tau);
    last_stage_converged = false;
    int stall = 0;
    for (int it = 0; it < per_stage; ++it) {
      ++iters;
      relay_eval(K, q, &g1, &g2);
      double lo = std::min(ev.i1, ev.i2);
      double w1 = 1.0, w2 = 1.0;
      {
        double e1 = std::exp(-(ev.i1 - lo) / tau);
        double e2 = std::exp(-(ev.i2 - lo) / tau);
        w1 = e1 / (e1 + e2);
        w2 = e2 / (e1 + e2);
      }
      for (int m = 0; m < M; ++m) grad[m] = w1 * g1[m] + w2 * g2[m];

      bool accepted = false;
      double gain = 0.0;
      for (double step = eta; step > 1e-14; step *= 0.5) {
        std::vector<double> qc(M);
        for (int m = 0; m < M; ++m) qc[m] = q[m] + step * grad[m];
        qc = project_to_simplex(std::move(qc));
        RelayEval evc = relay_eval(K, qc, nullptr, nullptr);
        double fc = softmin(evc.i1, evc.i2, tau);
        if (fc > f) {
          gain = fc - f;
          q = std::move(qc);
          ev = evc;
          f = fc;
          eta = std::min(step * 1.5, 64.0);
          accepted = true;
          break;
        }
      }
      if (!accepted || gain <= tol * std::max(1.0, std::abs(f))) {
        if (!accepted || ++stall >= 3) {
          last_stage_converged = true;
          break;
        }
      } else {
        stall = 0;
      }
      if (iters >= max_iter) break;
    }
    if (iters >= max_iter) break;
  }

  out.ev = relay_eval(K, q, nullptr, nullptr);
  out.value = std::min(out.ev.i1, out.ev.i2);
  out.q = std::move(q);
  out.iterations = iters;
  out.converged = last_stage_converged;
  return out;
}

}  // namespace

SolveReport relay_capacity(const channel::RelayStateChannel& ch, const RelayOptions& opt) {
  auto verdict = channel::check_relay_degraded(ch, opt.degraded_tol);
  if (!verdict.pass) {
    std::ostringstream os;
    os << "relay_capacity: channel is not physically degraded; worst cell (x=" << verdict.witness.x
       << ", x1=" << verdict.witness.x1 << ", s=" << verdict.witness.s
       << ", y1=" << verdict.witness.y1 << ", y=" << verdict.witness.y << ") residual "
       << verdict.residual;
    throw ValidationError(os.str());
  }

  RelayKernels K = relay_kernels(ch);
  const int M = K.nt * K.nt1;
  const int R = std::max(opt.restarts, 1);

  std::vector<RelayAscentResult> results(R);
  detail::parallel_for(R, opt.workers, [&](int ri) {
    std::vector<double> q0(M, 1.0 / M);
    if (ri > 0) {
      rng::Engine eng(rng::derive_seed(opt.seed, "relay_restart", ri));
      q0 = eng.dirichlet(M);
    }
    results[ri] = relay_ascend(K, std::move(q0), opt.max_iter, opt.tol);
  });

  const RelayAscentResult* best = &results[0];
  for (int ri = 1; ri < R; ++ri) {
    if (results[ri].value > best->value ||
        (results[ri].value == best->value && lex_less(results[ri].q, best->q))) {
      best = &results[ri];
    }
  }

  SolveReport rep;
  rep.value = best->value;
  rep.lower = best->value;
  rep.upper = kInf;
  rep.argmax = best->q;
  rep.terms = {{"I(T,T1;Y)", best->ev.i1}, {"I(T;Y1|T1,S)", best->ev.i2}};
  rep.iterations = best->iterations;
  rep.restarts_used = R;
  rep.status = best->converged ? SolveStatus::kConverged : SolveStatus::kIterationLimit;
  rep.label = "achievable lower bound under the strategy parametrization";
  return rep;
}

// ---------------------------------------------------------------------------
// Two-sender regions

namespace {

// Deterministic seed pmfs for one sender: point masses, uniform over all
// strategies, uniform over state-constant strategies, and (when the table is
// square) uniform over state-bijective strategies. The last family contains
// the state-canceling mixtures that additive-state channels reward.
std::vector<std::vector<double>> sender_seed_pmfs(const std::vector<channel::StrategyMap>& st,
                                                  int x_size) {
  const int n = static_cast<int>(st.size());
  std::vector<std::vector<double>> out;
  for (int i = 0; i < n; ++i) {
    std::vector<double> v(n, 0.0);
    v[i] = 1.0;
    out.push_back(std::move(v));
  }
  out.emplace_back(n, 1.0 / n);

  std::vector<int> constants, bijections;
  for (int i = 0; i < n; ++i) {
    const auto& tbl = st[i].table;
    bool is_const = true;
    for (int v : tbl) is_const = is_const && v == tbl[0];
    if (is_const) constants.push_back(i);
    if (static_cast<int>(tbl.size()) == x_size) {
      std::vector<char> seen(x_size, 0);
      bool bij = true;
      for (int v : tbl) {
        if (seen[v]) {
          bij = false;
          break;
        }
        seen[v] = 1;
      }
      if (bij && static_cast<int>(tbl.size()) > 1) bijections.push_back(i);
    }
  }
  if (static_cast<int>(constants.size()) > 1) {
    std::vector<double> v(n, 0.0);
    for (int i : constants) v[i] = 1.0 / constants.size();
    out.push_back(std::move(v));
  }
  if (static_cast<int>(bijections.size()) > 1) {
    std::vector<double> v(n, 0.0);
    for (int i : bijections) v[i] = 1.0 / bijections.size();
    out.push_back(std::move(v));
  }
  return out;
}

void pentagon_corners(double a, double b, double c, const std::string& label,
                      std::vector<RatePoint>& points, std::vector<std::string>& labels) {
  double r1a = std::min(a, c);
  double r2b = std::min(b, c);
  points.push_back({r1a, std::min(b, std::max(0.0, c - r1a))});
  labels.push_back(label);
  points.push_back({std::min(a, std::max(0.0, c - r2b)), r2b});
  labels.push_back(label);
  points.push_back({r1a, 0.0});
  labels.push_back(label);
  points.push_back({0.0, r2b});
  labels.push_back(label);
}

struct MacCandidate {
  std::vector<double> p12;
  std::string label;
};

std::vector<MacCandidate> mac_inner_candidates(const channel::MacStateChannel& ch,
                                               const MacRegionOptions& opt) {
  auto st1 = channel::enumerate_strategies(ch.x1_size(), ch.s_size());
  auto st2 = channel::enumerate_strategies(ch.x2_size(), ch.s_size());
  const int n1 = static_cast<int>(st1.size());
  const int n2 = static_cast<int>(st2.size());
  auto seeds1 = sender_seed_pmfs(st1, ch.x1_size());
  auto seeds2 = sender_seed_pmfs(st2, ch.x2_size());

  auto product = [&](const std::vector<double>& p1, const std::vector<double>& p2) {
    std::vector<double> p12(static_cast<std::size_t>(n1) * n2);
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n2; ++j) p12[static_cast<std::size_t>(i) * n2 + j] = p1[i] * p2[j];
    return p12;
  };

  std::vector<MacCandidate> out;
  for (std::size_t i = 0; i < seeds1.size(); ++i) {
    for (std::size_t j = 0; j < seeds2.size(); ++j) {
      std::ostringstream tag;
      tag << "grid=" << i << "x" << j;
      out.push_back({product(seeds1[i], seeds2[j]), tag.str()});
    }
  }
  for (int k = 0; k < opt.samples; ++k) {
    rng::Engine e1(rng::derive_seed(opt.seed, "mac_inner", 2 * k));
    rng::Engine e2(rng::derive_seed(opt.seed, "mac_inner", 2 * k + 1));
    std::ostringstream tag;
    tag << "sample=" << k;
    out.push_back({product(e1.dirichlet(n1), e2.dirichlet(n2)), tag.str()});
  }
  return out;
}

MacRegionResult mac_region_from(const channel::MacStateChannel& ch,
                                const std::vector<MacCandidate>& candidates,
                                const std::string& label) {
  std::vector<RatePoint> points;
  std::vector<std::string> labels;
  double best_sum = 0.0;
  const MacCandidate* best_cand = nullptr;
  for (const auto& cand : candidates) {
    prob::JointPmf j = channel::induced_mac_joint(ch, cand.p12);
    double a = prob::mutual_information(j, {"T1"}, {"Y"}, {"T2"});
    double b = prob::mutual_information(j, {"T2"}, {"Y"}, {"T1"});
    double c = prob::mutual_information(j, {"T1", "T2"}, {"Y"});
    pentagon_corners(a, b, c, cand.label, points, labels);
    double sum = std::min(c, a + b);
    if (best_cand == nullptr || sum > best_sum) {
      best_sum = sum;
      best_cand = &cand;
    }
  }
  MacRegionResult out;
  out.region = RateRegion::from_points(std::move(points), std::move(labels));
  if (best_cand != nullptr) out.report.argmax = best_cand->p12;
  out.report.value = best_sum;
  out.report.lower = best_sum;
  out.report.upper = kInf;
  out.report.terms = {{"max_sum_rate", best_sum}};
  out.report.restarts_used = static_cast<int>(candidates.size());
  out.report.status = SolveStatus::kConverged;
  out.report.label = label;
  return out;
}

}  // namespace

MacRegionResult mac_inner_region(const channel::MacStateChannel& ch,
                                 const MacRegionOptions& opt) {
  return mac_region_from(
      ch, mac_inner_candidates(ch, opt),
      "achievable lower bound under the strategy parametrization (product pmfs)");
}

MacRegionResult mac_outer_region(const channel::MacStateChannel& ch,
                                 const MacRegionOptions& opt) {
  auto st1 = channel::enumerate_strategies(ch.x1_size(), ch.s_size());
  auto st2 = channel::enumerate_strategies(ch.x2_size(), ch.s_size());
  const int n1 = static_cast<int>(st1.size());
  const int n2 = static_cast<int>(st2.size());
  if (static_cast<long long>(n1) * n2 > channel::kStrategyCap) {
    throw CapExceededError("mac_outer_region: |T1|*|T2| exceeds cap");
  }

  // Superset of the inner candidates: containment of the sampled hulls is
  // structural, not statistical.
  std::vector<MacCandidate> candidates = mac_inner_candidates(ch, opt);
  const int cells = n1 * n2;
  for (int i = 0; i < cells; ++i) {
    std::vector<double> p12(cells, 0.0);
    p12[i] = 1.0;
    std::ostringstream tag;
    tag << "joint_point=" << i;
    candidates.push_back({std::move(p12), tag.str()});
  }
  candidates.push_back({std::vector<double>(cells, 1.0 / cells), "joint_uniform"});
  for (int k = 0; k < opt.samples; ++k) {
    rng::Engine eng(rng::derive_seed(opt.seed, "mac_outer", k));
    std::ostringstream tag;
    tag << "joint_sample=" << k;
    candidates.push_back({eng.dirichlet(cells), tag.str()});
  }
  return mac_region_from(ch, candidates,
                         "sampled outer bound; containment tests against it use a margin");
}

}  // namespace statecap::solve
