#include "statecap/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "parallel.hpp"
#include "statecap/error.hpp"
#include "statecap/rng.hpp"

namespace statecap::sim {

namespace {

constexpr double kNegInf = -1e100;
constexpr double kZ95 = 1.96;

void validate_common(const SimConfig& cfg) {
  if (cfg.n < 1) throw ValidationError("simulate: blocklength must be >= 1");
  if (cfg.trials < 1) throw ValidationError("simulate: trials must be >= 1");
  if (cfg.decoder == Decoder::kTypicality && cfg.epsilon <= 0.0) {
    throw ValidationError("simulate: typicality decoding needs epsilon > 0");
  }
  if (cfg.codebook_cap < 1) throw ValidationError("simulate: codebook cap must be >= 1");
}

long long checked_count(int n, double rate, long long cap, const char* what) {
  long long m = message_count(n, rate);
  if (m > cap) {
    throw CapExceededError(std::string(what) + ": codebook of " + std::to_string(m) +
                           " sequences exceeds the cap of " + std::to_string(cap));
  }
  return m;
}

std::vector<double> log_or_neginf(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? std::log(v[i]) : kNegInf;
  return out;
}

std::span<const double> row_span(const std::vector<double>& k, std::size_t offset, int len) {
  return {k.data() + offset, static_cast<std::size_t>(len)};
}

/// Strong-typicality test against a fixed flat target pmf. Counting is O(n)
/// via a touched-cell list; the verdict checks every positive cell, so an
/// absent high-probability cell fails as it should.
class TypChecker {
 public:
  explicit TypChecker(std::span<const double> pmf)
      : p_(pmf), counts_(pmf.size(), 0) {}

  template <class CellFn>
  bool run(int n, double eps, CellFn cell) {
    touched_.clear();
    bool zero_hit = false;
    for (int i = 0; i < n; ++i) {
      int c = cell(i);
      if (counts_[c]++ == 0) touched_.push_back(c);
      if (p_[c] <= 0.0) zero_hit = true;
    }
    bool ok = !zero_hit;
    if (ok) {
      const double inv = 1.0 / n;
      for (std::size_t c = 0; c < p_.size(); ++c) {
        if (p_[c] <= 0.0) continue;
        if (std::abs(counts_[c] * inv - p_[c]) > eps * p_[c] + 1e-12) {
          ok = false;
          break;
        }
      }
    }
    for (int c : touched_) counts_[c] = 0;
    return ok;
  }

 private:
  std::span<const double> p_;
  std::vector<int> counts_;
  std::vector<int> touched_;
};

struct TrialStats {
  long long err = 0, err1 = 0, err2 = 0;
  std::array<long long, 5> ev{};
};

std::uint64_t codebook_master(const SimConfig& cfg, int trial) {
  std::uint64_t index = cfg.codebook == CodebookMode::kCached ? 0 : static_cast<std::uint64_t>(trial);
  return rng::derive_seed(cfg.seed, "codebook", index);
}

}  // namespace

double ErrorEstimate::halfwidth() const {
  return trials > 0 ? wilson_halfwidth(errors, trials) : 0.0;
}

long long message_count(int n, double rate) {
  if (n < 1) throw ValidationError("message_count: n must be >= 1");
  if (rate < 0.0) throw ValidationError("message_count: rate must be nonnegative");
  double v = std::exp2(static_cast<double>(n) * rate);
  if (!(v < 4.0e18)) throw CapExceededError("message_count: 2^{n rate} exceeds the representable range");
  double r = std::nearbyint(v);
  // 2^{nR} lands a few ulps off an exact integer whenever n*rate is meant to
  // be an integer; snap to it instead of rounding up.
  if (std::abs(v - r) <= 1e-9 * std::max(r, 1.0)) {
    return std::max<long long>(1, static_cast<long long>(r));
  }
  return std::max<long long>(1, static_cast<long long>(std::ceil(v)));
}

double wilson_halfwidth(long long errors, long long trials) {
  if (trials <= 0) throw ValidationError("wilson_halfwidth: trials must be positive");
  if (errors < 0 || errors > trials) throw ValidationError("wilson_halfwidth: errors out of range");
  const double z = kZ95;
  const double nn = static_cast<double>(trials);
  const double ph = static_cast<double>(errors) / nn;
  return z * std::sqrt(ph * (1.0 - ph) / nn + z * z / (4.0 * nn * nn)) / (1.0 + z * z / nn);
}

bool joint_typicality(const std::vector<std::vector<int>>& seqs, const prob::JointPmf& joint,
                      double eps) {
  const auto& axes = joint.axes();
  if (seqs.size() != axes.size()) {
    throw ValidationError("joint_typicality: one sequence per axis is required");
  }
  if (eps < 0.0) throw ValidationError("joint_typicality: eps must be nonnegative");
  if (seqs.empty() || seqs[0].empty()) {
    throw ValidationError("joint_typicality: sequences must be nonempty");
  }
  const int n = static_cast<int>(seqs[0].size());
  for (std::size_t a = 0; a < seqs.size(); ++a) {
    if (static_cast<int>(seqs[a].size()) != n) {
      throw ValidationError("joint_typicality: sequences must share one length");
    }
    for (int v : seqs[a]) {
      if (v < 0 || v >= axes[a].size) {
        throw ValidationError("joint_typicality: letter outside the axis alphabet");
      }
    }
  }
  TypChecker chk(joint.probs());
  return chk.run(n, eps, [&](int i) {
    int c = 0;
    for (std::size_t a = 0; a < seqs.size(); ++a) c = c * axes[a].size + seqs[a][i];
    return c;
  });
}

// ---------------------------------------------------------------------------
// Point-to-point

SimReport simulate_single_user(const channel::StateChannel& ch, const prob::Pmf& strategy_pmf,
                               const SimConfig& cfg) {
  validate_common(cfg);
  auto st = channel::enumerate_strategies(ch.x_size(), ch.s_size());
  const int nt = static_cast<int>(st.size());
  const int ny = ch.y_size(), ns = ch.s_size(), n = cfg.n;
  if (strategy_pmf.size() != nt) {
    throw ValidationError("simulate_single_user: strategy pmf has the wrong size");
  }
  channel::Dmc ind = channel::induced_strategy_channel(ch);
  const std::vector<double> ll = log_or_neginf(ind.kernel);  // [t][y]
  std::vector<double> pty(static_cast<std::size_t>(nt) * ny);
  for (int t = 0; t < nt; ++t) {
    for (int y = 0; y < ny; ++y) {
      pty[static_cast<std::size_t>(t) * ny + y] = strategy_pmf[t] * ind.p(y, t);
    }
  }
  const long long M = checked_count(n, cfg.rate1, cfg.codebook_cap, "simulate_single_user");
  const bool typ = cfg.decoder == Decoder::kTypicality;

  std::vector<TrialStats> slots(cfg.trials);
  detail::parallel_for(cfg.trials, cfg.workers, [&](int tr) {
    rng::Engine env(rng::derive_seed(cfg.seed, "trial", tr));
    rng::Engine cbe(codebook_master(cfg, tr));
    std::vector<int> cb(static_cast<std::size_t>(M) * n);
    for (auto& c : cb) c = cbe.categorical(strategy_pmf.probs());

    const int w = env.uniform_int(static_cast<int>(M));
    const int* crow = cb.data() + static_cast<std::size_t>(w) * n;
    std::vector<int> yv(n);
    for (int i = 0; i < n; ++i) {
      int s = env.categorical(ch.state_pmf().probs());
      int x = st[crow[i]](s);
      yv[i] = env.categorical(row_span(ch.kernel(), (static_cast<std::size_t>(x) * ns + s) * ny, ny));
    }

    TrialStats& out = slots[tr];
    if (!typ) {
      long long best = 0;
      double bs = -1e308;
      for (long long wc = 0; wc < M; ++wc) {
        const int* row = cb.data() + static_cast<std::size_t>(wc) * n;
        double sc = 0.0;
        for (int i = 0; i < n; ++i) sc += ll[static_cast<std::size_t>(row[i]) * ny + yv[i]];
        if (sc > bs) {
          bs = sc;
          best = wc;
        }
      }
      out.err = best != w;
      out.ev[0] = out.err;  // confusion
    } else {
      TypChecker chk(pty);
      auto check = [&](long long wc) {
        const int* row = cb.data() + static_cast<std::size_t>(wc) * n;
        return chk.run(n, cfg.epsilon, [&](int i) { return row[i] * ny + yv[i]; });
      };
      bool miss = !check(w);
      bool confusion = false;
      for (long long wc = 0; wc < M && !confusion; ++wc) {
        if (wc != w && check(wc)) confusion = true;
      }
      out.err = miss || confusion;
      out.ev[0] = confusion;
      out.ev[1] = miss;
    }
  });

  SimReport rep;
  rep.config = cfg;
  rep.messages1 = M;
  rep.effective_rate1 = std::log2(static_cast<double>(M)) / n;
  long long errs = 0, conf = 0, miss = 0;
  for (const auto& s : slots) {
    errs += s.err;
    conf += s.ev[0];
    miss += s.ev[1];
  }
  rep.estimates.push_back({"overall", errs, cfg.trials});
  if (typ) rep.events.push_back({"miss", miss, cfg.trials});
  rep.events.push_back({"confusion", conf, cfg.trials});
  return rep;
}

// ---------------------------------------------------------------------------
// Degraded broadcast

SimReport simulate_bc(const channel::BroadcastStateChannel& ch, const prob::Pmf& cloud_pmf,
                      const std::vector<double>& satellite_rows, const SimConfig& cfg) {
  validate_common(cfg);
  auto st = channel::enumerate_strategies(ch.x_size(), ch.s_size());
  channel::BcDmc bc = channel::induced_bc_strategy_channel(ch);
  const int nt = bc.input_size, ny1 = bc.y1_size, ny2 = bc.y2_size;
  const int ns = ch.s_size(), n = cfg.n;
  const int nu2 = cloud_pmf.size();
  if (static_cast<int>(satellite_rows.size()) != nu2 * nt) {
    throw ValidationError("simulate_bc: satellite rows must be cloud_size x strategy_count");
  }
  for (int u = 0; u < nu2; ++u) {
    double mass = 0.0;
    for (int t = 0; t < nt; ++t) {
      double v = satellite_rows[static_cast<std::size_t>(u) * nt + t];
      if (v < 0.0) throw ValidationError("simulate_bc: negative satellite probability");
      mass += v;
    }
    if (std::abs(mass - 1.0) > prob::kMassTol) {
      throw ValidationError("simulate_bc: satellite rows must each sum to 1");
    }
  }

  const std::vector<double> k1 = bc.marginal1().kernel;  // [t][y1]
  const std::vector<double> k2 = bc.marginal2().kernel;  // [t][y2]
  std::vector<double> py1_u2(static_cast<std::size_t>(nu2) * ny1, 0.0);
  std::vector<double> py2_u2(static_cast<std::size_t>(nu2) * ny2, 0.0);
  for (int u = 0; u < nu2; ++u) {
    for (int t = 0; t < nt; ++t) {
      double qv = satellite_rows[static_cast<std::size_t>(u) * nt + t];
      if (qv == 0.0) continue;
      for (int y = 0; y < ny1; ++y) {
        py1_u2[static_cast<std::size_t>(u) * ny1 + y] += qv * k1[static_cast<std::size_t>(t) * ny1 + y];
      }
      for (int y = 0; y < ny2; ++y) {
        py2_u2[static_cast<std::size_t>(u) * ny2 + y] += qv * k2[static_cast<std::size_t>(t) * ny2 + y];
      }
    }
  }
  const std::vector<double> L1t = log_or_neginf(k1);
  const std::vector<double> L1u = log_or_neginf(py1_u2);
  const std::vector<double> L2u = log_or_neginf(py2_u2);

  // Typicality targets: (U2,Y2), (U2,Y1) and the full (U2,T,Y1) triple.
  std::vector<double> j2(static_cast<std::size_t>(nu2) * ny2);
  std::vector<double> j1c(static_cast<std::size_t>(nu2) * ny1);
  std::vector<double> j1s(static_cast<std::size_t>(nu2) * nt * ny1);
  for (int u = 0; u < nu2; ++u) {
    for (int y = 0; y < ny2; ++y) j2[static_cast<std::size_t>(u) * ny2 + y] = cloud_pmf[u] * py2_u2[static_cast<std::size_t>(u) * ny2 + y];
    for (int y = 0; y < ny1; ++y) j1c[static_cast<std::size_t>(u) * ny1 + y] = cloud_pmf[u] * py1_u2[static_cast<std::size_t>(u) * ny1 + y];
    for (int t = 0; t < nt; ++t) {
      double base = cloud_pmf[u] * satellite_rows[static_cast<std::size_t>(u) * nt + t];
      for (int y = 0; y < ny1; ++y) {
        j1s[(static_cast<std::size_t>(u) * nt + t) * ny1 + y] = base * k1[static_cast<std::size_t>(t) * ny1 + y];
      }
    }
  }

  const long long M1 = checked_count(n, cfg.rate1, cfg.codebook_cap, "simulate_bc satellite");
  const long long M2 = checked_count(n, cfg.rate2, cfg.codebook_cap, "simulate_bc cloud");
  const bool typ = cfg.decoder == Decoder::kTypicality;

  std::vector<TrialStats> slots(cfg.trials);
  detail::parallel_for(cfg.trials, cfg.workers, [&](int tr) {
    rng::Engine env(rng::derive_seed(cfg.seed, "trial", tr));
    const std::uint64_t cbm = codebook_master(cfg, tr);
    rng::Engine ce(rng::derive_seed(cbm, "bc_cloud"));
    std::vector<int> U2(static_cast<std::size_t>(M2) * n);
    for (auto& c : U2) c = ce.categorical(cloud_pmf.probs());

    // Satellite codebooks materialize per cloud index on first use; the
    // per-index seed makes lazy and eager generation identical.
    std::unordered_map<long long, std::vector<int>> satcache;
    auto satcol = [&](long long c) -> const std::vector<int>& {
      auto it = satcache.find(c);
      if (it != satcache.end()) return it->second;
      rng::Engine se(rng::derive_seed(cbm, "bc_satellite", static_cast<std::uint64_t>(c)));
      std::vector<int> col(static_cast<std::size_t>(M1) * n);
      const int* urow = U2.data() + static_cast<std::size_t>(c) * n;
      for (long long wc = 0; wc < M1; ++wc) {
        for (int i = 0; i < n; ++i) {
          col[static_cast<std::size_t>(wc) * n + i] = se.categorical(
              row_span(satellite_rows, static_cast<std::size_t>(urow[i]) * nt, nt));
        }
      }
      return satcache.emplace(c, std::move(col)).first->second;
    };

    const int w2 = env.uniform_int(static_cast<int>(M2));
    const int w1 = env.uniform_int(static_cast<int>(M1));
    const int* urow = U2.data() + static_cast<std::size_t>(w2) * n;
    const int* trow = satcol(w2).data() + static_cast<std::size_t>(w1) * n;
    std::vector<int> y1v(n), y2v(n);
    for (int i = 0; i < n; ++i) {
      int s = env.categorical(ch.state_pmf().probs());
      int x = st[trow[i]](s);
      int joint = env.categorical(
          row_span(ch.kernel(), (static_cast<std::size_t>(x) * ns + s) * ny1 * ny2, ny1 * ny2));
      y1v[i] = joint / ny2;
      y2v[i] = joint % ny2;
    }

    TrialStats& out = slots[tr];
    auto ml_cloud = [&](const std::vector<double>& L, const std::vector<int>& yv, int nyv) {
      long long best = 0;
      double bs = -1e308;
      for (long long c = 0; c < M2; ++c) {
        const int* row = U2.data() + static_cast<std::size_t>(c) * n;
        double sc = 0.0;
        for (int i = 0; i < n; ++i) sc += L[static_cast<std::size_t>(row[i]) * nyv + yv[i]];
        if (sc > bs) {
          bs = sc;
          best = c;
        }
      }
      return best;
    };

    bool err1 = false, err2 = false;
    bool rx1_cloud_bad = false, rx1_sat_bad = false;

    if (!typ) {
      err2 = ml_cloud(L2u, y2v, ny2) != w2;
      long long c1 = ml_cloud(L1u, y1v, ny1);
      rx1_cloud_bad = c1 != w2;
      const std::vector<int>& col = satcol(c1);
      long long best = 0;
      double bs = -1e308;
      for (long long wc = 0; wc < M1; ++wc) {
        const int* row = col.data() + static_cast<std::size_t>(wc) * n;
        double sc = 0.0;
        for (int i = 0; i < n; ++i) sc += L1t[static_cast<std::size_t>(row[i]) * ny1 + y1v[i]];
        if (sc > bs) {
          bs = sc;
          best = wc;
        }
      }
      err1 = best != w1;
      rx1_sat_bad = !rx1_cloud_bad && err1;
    } else {
      TypChecker c2(j2), c1(j1c), c3(j1s);
      auto cloud_typical = [&](TypChecker& chk, long long c, const std::vector<int>& yv, int nyv) {
        const int* row = U2.data() + static_cast<std::size_t>(c) * n;
        return chk.run(n, cfg.epsilon, [&](int i) { return row[i] * nyv + yv[i]; });
      };
      // Receiver 2: unique typical cloud index.
      long long hit2 = -1;
      int hits2 = 0;
      for (long long c = 0; c < M2 && hits2 < 2; ++c) {
        if (cloud_typical(c2, c, y2v, ny2)) {
          ++hits2;
          hit2 = c;
        }
      }
      err2 = !(hits2 == 1 && hit2 == w2);
      out.ev[4] = !cloud_typical(c2, w2, y2v, ny2);  // rx2_miss
      // Receiver 1, cloud stage.
      long long hit1 = -1;
      int hits1 = 0;
      for (long long c = 0; c < M2 && hits1 < 2; ++c) {
        if (cloud_typical(c1, c, y1v, ny1)) {
          ++hits1;
          hit1 = c;
        }
      }
      rx1_cloud_bad = !(hits1 == 1 && hit1 == w2);
      // Receiver 1, satellite stage, on its decoded cloud (fall back to the
      // true cloud when the cloud stage produced nothing usable).
      long long cdec = hits1 == 1 ? hit1 : w2;
      const std::vector<int>& col = satcol(cdec);
      const int* urow_dec = U2.data() + static_cast<std::size_t>(cdec) * n;
      auto sat_typical = [&](long long wc) {
        const int* row = col.data() + static_cast<std::size_t>(wc) * n;
        return c3.run(n, cfg.epsilon,
                      [&](int i) { return (urow_dec[i] * nt + row[i]) * ny1 + y1v[i]; });
      };
      long long hs = -1;
      int nhs = 0;
      for (long long wc = 0; wc < M1 && nhs < 2; ++wc) {
        if (sat_typical(wc)) {
          ++nhs;
          hs = wc;
        }
      }
      err1 = rx1_cloud_bad || !(nhs == 1 && hs == w1);
      rx1_sat_bad = !rx1_cloud_bad && err1;
      // rx1_miss: true triple not typical.
      TypChecker cm(j1s);
      out.ev[3] = !cm.run(n, cfg.epsilon,
                          [&](int i) { return (urow[i] * nt + trow[i]) * ny1 + y1v[i]; });
    }

    out.err1 = err1;
    out.err2 = err2;
    out.err = err1 || err2;
    out.ev[0] = err2;           // rx2_cloud
    out.ev[1] = rx1_cloud_bad;  // rx1_cloud
    out.ev[2] = rx1_sat_bad;    // rx1_satellite
  });

  SimReport rep;
  rep.config = cfg;
  rep.messages1 = M1;
  rep.messages2 = M2;
  rep.effective_rate1 = std::log2(static_cast<double>(M1)) / n;
  rep.effective_rate2 = std::log2(static_cast<double>(M2)) / n;
  long long errs = 0, e1 = 0, e2 = 0;
  std::array<long long, 5> ev{};
  for (const auto& s : slots) {
    errs += s.err;
    e1 += s.err1;
    e2 += s.err2;
    for (int k = 0; k < 5; ++k) ev[k] += s.ev[k];
  }
  rep.estimates.push_back({"overall", errs, cfg.trials});
  rep.estimates.push_back({"rx1", e1, cfg.trials});
  rep.estimates.push_back({"rx2", e2, cfg.trials});
  rep.events.push_back({"rx2_cloud", ev[0], cfg.trials});
  rep.events.push_back({"rx1_cloud", ev[1], cfg.trials});
  rep.events.push_back({"rx1_satellite", ev[2], cfg.trials});
  if (typ) {
    rep.events.push_back({"rx1_miss", ev[3], cfg.trials});
    rep.events.push_back({"rx2_miss", ev[4], cfg.trials});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Degraded relay

SimReport simulate_relay(const channel::RelayStateChannel& ch, const std::vector<double>& q,
                         const SimConfig& cfg) {
  validate_common(cfg);
  if (cfg.blocks < 2) throw ValidationError("simulate_relay: at least 2 blocks are required");
  auto st = channel::enumerate_strategies(ch.x_size(), ch.s_size());
  auto st1 = channel::enumerate_strategies(ch.x1_size(), ch.s_size());
  const int nt = static_cast<int>(st.size()), nt1 = static_cast<int>(st1.size());
  const int ns = ch.s_size(), ny = ch.y_size(), ny1 = ch.y1_size(), n = cfg.n;
  if (static_cast<long long>(nt) * nt1 > channel::kStrategyCap) {
    throw CapExceededError("simulate_relay: |T|*|T1| exceeds the strategy cap");
  }
  prob::Pmf qp(q);  // validates shape-free mass; size checked next
  if (qp.size() != nt * nt1) {
    throw ValidationError("simulate_relay: joint strategy pmf has the wrong size");
  }

  std::vector<double> q1(nt1, 0.0);
  for (int t = 0; t < nt; ++t)
    for (int t1 = 0; t1 < nt1; ++t1) q1[t1] += q[static_cast<std::size_t>(t) * nt1 + t1];
  std::vector<double> pt_t1(static_cast<std::size_t>(nt1) * nt, 1.0 / nt);
  for (int t1 = 0; t1 < nt1; ++t1) {
    if (q1[t1] <= 0.0) continue;  // never drawn; row left uniform and unused
    for (int t = 0; t < nt; ++t) {
      pt_t1[static_cast<std::size_t>(t1) * nt + t] = q[static_cast<std::size_t>(t) * nt1 + t1] / q1[t1];
    }
  }

  const std::span<const double> ps = ch.state_pmf().probs();
  std::vector<double> py_tt1(static_cast<std::size_t>(nt) * nt1 * ny, 0.0);
  std::vector<double> py1_tt1s(static_cast<std::size_t>(nt) * nt1 * ns * ny1, 0.0);
  for (int t = 0; t < nt; ++t) {
    for (int t1 = 0; t1 < nt1; ++t1) {
      for (int s = 0; s < ns; ++s) {
        if (ps[s] == 0.0) continue;
        int x = st[t](s), x1 = st1[t1](s);
        for (int y = 0; y < ny; ++y) {
          for (int yr = 0; yr < ny1; ++yr) {
            double pv = ch.p(y, yr, x, x1, s);
            py_tt1[(static_cast<std::size_t>(t) * nt1 + t1) * ny + y] += ps[s] * pv;
            py1_tt1s[((static_cast<std::size_t>(t) * nt1 + t1) * ns + s) * ny1 + yr] += pv;
          }
        }
      }
    }
  }
  std::vector<double> pt1y(static_cast<std::size_t>(nt1) * ny, 0.0);
  for (int t1 = 0; t1 < nt1; ++t1) {
    if (q1[t1] <= 0.0) continue;
    for (int t = 0; t < nt; ++t) {
      double pv = pt_t1[static_cast<std::size_t>(t1) * nt + t];
      if (pv == 0.0) continue;
      for (int y = 0; y < ny; ++y) {
        pt1y[static_cast<std::size_t>(t1) * ny + y] += pv * py_tt1[(static_cast<std::size_t>(t) * nt1 + t1) * ny + y];
      }
    }
  }
  const std::vector<double> Ly = log_or_neginf(py_tt1);
  const std::vector<double> Ly1 = log_or_neginf(py1_tt1s);
  const std::vector<double> Lt1y = log_or_neginf(pt1y);

  // Typicality targets for the three decoding stages.
  std::vector<double> J1(py1_tt1s.size());  // (T,T1,S,Y1)
  std::vector<double> J3(py_tt1.size());    // (T,T1,Y)
  std::vector<double> J2(pt1y.size());      // (T1,Y)
  for (int t = 0; t < nt; ++t) {
    for (int t1 = 0; t1 < nt1; ++t1) {
      double qv = q[static_cast<std::size_t>(t) * nt1 + t1];
      for (int y = 0; y < ny; ++y) {
        J3[(static_cast<std::size_t>(t) * nt1 + t1) * ny + y] = qv * py_tt1[(static_cast<std::size_t>(t) * nt1 + t1) * ny + y];
      }
      for (int s = 0; s < ns; ++s) {
        for (int yr = 0; yr < ny1; ++yr) {
          std::size_t idx = ((static_cast<std::size_t>(t) * nt1 + t1) * ns + s) * ny1 + yr;
          J1[idx] = qv * ps[s] * py1_tt1s[idx];
        }
      }
    }
  }
  for (int t1 = 0; t1 < nt1; ++t1) {
    for (int y = 0; y < ny; ++y) {
      J2[static_cast<std::size_t>(t1) * ny + y] = q1[t1] * pt1y[static_cast<std::size_t>(t1) * ny + y];
    }
  }

  const long long M = checked_count(n, cfg.rate1, cfg.codebook_cap, "simulate_relay messages");
  const long long M0 = checked_count(n, cfg.bin_rate, cfg.codebook_cap, "simulate_relay bins");
  const int B = cfg.blocks;
  const bool typ = cfg.decoder == Decoder::kTypicality;

  std::vector<TrialStats> slots(cfg.trials);
  detail::parallel_for(cfg.trials, cfg.workers, [&](int tr) {
    rng::Engine env(rng::derive_seed(cfg.seed, "trial", tr));
    const std::uint64_t cbm = codebook_master(cfg, tr);
    rng::Engine re(rng::derive_seed(cbm, "relay_cb"));
    std::vector<int> t1cb(static_cast<std::size_t>(M0) * n);
    for (auto& c : t1cb) c = re.categorical(q1);

    // Source codebooks are superimposed on one relay sequence per bin and
    // materialize lazily; per-bin seeds keep lazy identical to eager.
    std::unordered_map<long long, std::vector<int>> srccache;
    auto srccb = [&](long long j) -> const std::vector<int>& {
      auto it = srccache.find(j);
      if (it != srccache.end()) return it->second;
      rng::Engine se(rng::derive_seed(cbm, "relay_src", static_cast<std::uint64_t>(j)));
      std::vector<int> cbv(static_cast<std::size_t>(M) * n);
      const int* t1row = t1cb.data() + static_cast<std::size_t>(j) * n;
      for (long long wc = 0; wc < M; ++wc) {
        for (int i = 0; i < n; ++i) {
          cbv[static_cast<std::size_t>(wc) * n + i] =
              se.categorical(row_span(pt_t1, static_cast<std::size_t>(t1row[i]) * nt, nt));
        }
      }
      return srccache.emplace(j, std::move(cbv)).first->second;
    };

    // Messages: fresh in blocks 1..B-1; block B resolves the last one.
    std::vector<int> w(B + 1, 0);
    for (int b = 1; b < B; ++b) w[b] = env.uniform_int(static_cast<int>(M));
    std::vector<long long> jb(B + 1, 0);
    std::vector<std::vector<int>> sv(B + 1), yv(B + 1), y1v(B + 1);
    for (int b = 1; b <= B; ++b) {
      jb[b] = w[b - 1] % M0;
      const int* t1row = t1cb.data() + static_cast<std::size_t>(jb[b]) * n;
      const int* trow = srccb(jb[b]).data() + static_cast<std::size_t>(w[b]) * n;
      sv[b].resize(n);
      yv[b].resize(n);
      y1v[b].resize(n);
      for (int i = 0; i < n; ++i) {
        int s = env.categorical(ps);
        sv[b][i] = s;
        int x = st[trow[i]](s), x1 = st1[t1row[i]](s);
        int joint = env.categorical(row_span(
            ch.kernel(), ((static_cast<std::size_t>(x) * ch.x1_size() + x1) * ns + s) * ny * ny1,
            ny * ny1));
        yv[b][i] = joint / ny1;
        y1v[b][i] = joint % ny1;
      }
    }

    std::vector<int> e1(B + 1, 0), e2(B + 1, 0), e3(B + 1, 0);
    std::vector<long long> jdec(B + 1, 0);
    std::vector<int> base(n);

    // Stage 1: the relay decodes the fresh message from (y1, s), knowing its
    // own sequence for the block.
    for (int b = 1; b < B; ++b) {
      const int* t1row = t1cb.data() + static_cast<std::size_t>(jb[b]) * n;
      const std::vector<int>& scb = srccb(jb[b]);
      if (!typ) {
        for (int i = 0; i < n; ++i) {
          base[i] = (t1row[i] * ns + sv[b][i]) * ny1 + y1v[b][i];
        }
        const int stride = nt1 * ns * ny1;
        long long best = 0;
        double bs = -1e308;
        for (long long wc = 0; wc < M; ++wc) {
          const int* row = scb.data() + static_cast<std::size_t>(wc) * n;
          double sc = 0.0;
          for (int i = 0; i < n; ++i) sc += Ly1[static_cast<std::size_t>(row[i]) * stride + base[i]];
          if (sc > bs) {
            bs = sc;
            best = wc;
          }
        }
        e1[b] = best != w[b];
      } else {
        TypChecker chk(J1);
        long long hit = -1;
        int hits = 0;
        for (long long wc = 0; wc < M && hits < 2; ++wc) {
          const int* row = scb.data() + static_cast<std::size_t>(wc) * n;
          if (chk.run(n, cfg.epsilon, [&](int i) {
                return ((row[i] * nt1 + t1row[i]) * ns + sv[b][i]) * ny1 + y1v[b][i];
              })) {
            ++hits;
            hit = wc;
          }
        }
        e1[b] = !(hits == 1 && hit == w[b]);
      }
    }

    // Stage 2: the destination decodes each block's bin index. When M < M0
    // only bins 0..M-1 can occur (w % M0 = w), and a decoder that knows the
    // binning rule never outputs an unoccupied bin.
    const long long m0eff = std::min(M0, M);
    for (int b = 2; b <= B; ++b) {
      if (!typ) {
        long long best = 0;
        double bs = -1e308;
        for (long long j = 0; j < m0eff; ++j) {
          const int* row = t1cb.data() + static_cast<std::size_t>(j) * n;
          double sc = 0.0;
          for (int i = 0; i < n; ++i) sc += Lt1y[static_cast<std::size_t>(row[i]) * ny + yv[b][i]];
          if (sc > bs) {
            bs = sc;
            best = j;
          }
        }
        jdec[b] = best;
      } else {
        TypChecker chk(J2);
        long long hit = -1;
        int hits = 0;
        for (long long j = 0; j < m0eff && hits < 2; ++j) {
          const int* row = t1cb.data() + static_cast<std::size_t>(j) * n;
          if (chk.run(n, cfg.epsilon, [&](int i) { return row[i] * ny + yv[b][i]; })) {
            ++hits;
            hit = j;
          }
        }
        // A failed bin decode still lets stage 3 report a meaningful stat:
        // fall back to the true bin and keep the stage-2 flag.
        jdec[b] = hits == 1 ? hit : jb[b];
        if (hits != 1) e2[b] = 1;
      }
      if (jdec[b] != jb[b]) e2[b] = 1;
    }

    // Stage 3: disambiguation of w(b) inside the decoded bin, from block b's
    // own destination output.
    for (int b = 1; b < B; ++b) {
      const long long bin = jdec[b + 1];
      const int* t1row = t1cb.data() + static_cast<std::size_t>(jb[b]) * n;
      const std::vector<int>& scb = srccb(jb[b]);
      long long best = -1;
      if (!typ) {
        for (int i = 0; i < n; ++i) base[i] = t1row[i] * ny + yv[b][i];
        const int stride = nt1 * ny;
        double bs = -1e308;
        for (long long wc = bin; wc < M; wc += M0) {
          const int* row = scb.data() + static_cast<std::size_t>(wc) * n;
          double sc = 0.0;
          for (int i = 0; i < n; ++i) sc += Ly[static_cast<std::size_t>(row[i]) * stride + base[i]];
          if (sc > bs) {
            bs = sc;
            best = wc;
          }
        }
      } else {
        TypChecker chk(J3);
        int hits = 0;
        long long hit = -1;
        for (long long wc = bin; wc < M && hits < 2; wc += M0) {
          const int* row = scb.data() + static_cast<std::size_t>(wc) * n;
          if (chk.run(n, cfg.epsilon,
                      [&](int i) { return (row[i] * nt1 + t1row[i]) * ny + yv[b][i]; })) {
            ++hits;
            hit = wc;
          }
        }
        best = hits == 1 ? hit : -1;
      }
      e3[b] = best != w[b];
    }

    TrialStats& out = slots[tr];
    for (int b = 1; b < B; ++b) {
      out.err += (e1[b] || e2[b + 1] || e3[b]) ? 1 : 0;
      out.ev[0] += e1[b];
      out.ev[1] += e2[b + 1];
      out.ev[2] += e3[b];
    }
  });

  SimReport rep;
  rep.config = cfg;
  rep.messages1 = M;
  rep.bins = M0;
  rep.effective_rate1 =
      std::log2(static_cast<double>(M)) * (B - 1) / (static_cast<double>(n) * B);
  rep.effective_rate2 = std::log2(static_cast<double>(M0)) / n;
  const long long denom = static_cast<long long>(cfg.trials) * (B - 1);
  long long errs = 0;
  std::array<long long, 3> ev{};
  for (const auto& s : slots) {
    errs += s.err;
    for (int k = 0; k < 3; ++k) ev[k] += s.ev[k];
  }
  rep.estimates.push_back({"overall", errs, denom});
  rep.events.push_back({"stage1_relay_decode", ev[0], denom});
  rep.events.push_back({"stage2_bin_decode", ev[1], denom});
  rep.events.push_back({"stage3_disambiguation", ev[2], denom});
  return rep;
}

// ---------------------------------------------------------------------------
// Two-sender

SimReport simulate_mac(const channel::MacStateChannel& ch, const prob::Pmf& pmf1,
                       const prob::Pmf& pmf2, const SimConfig& cfg) {
  validate_common(cfg);
  auto st1 = channel::enumerate_strategies(ch.x1_size(), ch.s_size());
  auto st2 = channel::enumerate_strategies(ch.x2_size(), ch.s_size());
  const int n1 = static_cast<int>(st1.size()), n2 = static_cast<int>(st2.size());
  const int ns = ch.s_size(), ny = ch.y_size(), n = cfg.n;
  if (pmf1.size() != n1 || pmf2.size() != n2) {
    throw ValidationError("simulate_mac: strategy pmf sizes do not match the channel");
  }
  if (static_cast<long long>(n1) * n2 > channel::kStrategyCap) {
    throw CapExceededError("simulate_mac: |T1|*|T2| exceeds the strategy cap");
  }

  const std::span<const double> ps = ch.state_pmf().probs();
  std::vector<double> ind(static_cast<std::size_t>(n1) * n2 * ny, 0.0);
  for (int a = 0; a < n1; ++a) {
    for (int b = 0; b < n2; ++b) {
      for (int s = 0; s < ns; ++s) {
        if (ps[s] == 0.0) continue;
        int x1 = st1[a](s), x2 = st2[b](s);
        for (int y = 0; y < ny; ++y) {
          ind[(static_cast<std::size_t>(a) * n2 + b) * ny + y] += ps[s] * ch.p(y, x1, x2, s);
        }
      }
    }
  }
  const std::vector<double> L = log_or_neginf(ind);
  std::vector<double> j3(ind.size());
  for (int a = 0; a < n1; ++a) {
    for (int b = 0; b < n2; ++b) {
      double base = pmf1[a] * pmf2[b];
      for (int y = 0; y < ny; ++y) {
        j3[(static_cast<std::size_t>(a) * n2 + b) * ny + y] = base * ind[(static_cast<std::size_t>(a) * n2 + b) * ny + y];
      }
    }
  }

  const long long M1 = checked_count(n, cfg.rate1, cfg.codebook_cap, "simulate_mac sender 1");
  const long long M2 = checked_count(n, cfg.rate2, cfg.codebook_cap, "simulate_mac sender 2");
  if (M1 > cfg.codebook_cap / M2) {
    throw CapExceededError("simulate_mac: the joint decoding set exceeds the cap");
  }
  const bool typ = cfg.decoder == Decoder::kTypicality;

  std::vector<TrialStats> slots(cfg.trials);
  detail::parallel_for(cfg.trials, cfg.workers, [&](int tr) {
    rng::Engine env(rng::derive_seed(cfg.seed, "trial", tr));
    const std::uint64_t cbm = codebook_master(cfg, tr);
    rng::Engine ca(rng::derive_seed(cbm, "mac_cb1"));
    rng::Engine cb(rng::derive_seed(cbm, "mac_cb2"));
    std::vector<int> A(static_cast<std::size_t>(M1) * n), Bc(static_cast<std::size_t>(M2) * n);
    for (auto& c : A) c = ca.categorical(pmf1.probs());
    for (auto& c : Bc) c = cb.categorical(pmf2.probs());

    const int w1 = env.uniform_int(static_cast<int>(M1));
    const int w2 = env.uniform_int(static_cast<int>(M2));
    const int* arow = A.data() + static_cast<std::size_t>(w1) * n;
    const int* brow = Bc.data() + static_cast<std::size_t>(w2) * n;
    std::vector<int> yv(n);
    for (int i = 0; i < n; ++i) {
      int s = env.categorical(ps);
      int x1 = st1[arow[i]](s), x2 = st2[brow[i]](s);
      yv[i] = env.categorical(
          row_span(ch.kernel(), ((static_cast<std::size_t>(x1) * ch.x2_size() + x2) * ns + s) * ny, ny));
    }

    long long d1 = -1, d2 = -1;
    TrialStats& out = slots[tr];
    if (!typ) {
      double bs = -1e308;
      std::vector<int> apre(n);
      for (long long wa = 0; wa < M1; ++wa) {
        const int* ra = A.data() + static_cast<std::size_t>(wa) * n;
        for (int i = 0; i < n; ++i) apre[i] = ra[i] * n2;
        for (long long wb = 0; wb < M2; ++wb) {
          const int* rb = Bc.data() + static_cast<std::size_t>(wb) * n;
          double sc = 0.0;
          for (int i = 0; i < n; ++i) {
            sc += L[static_cast<std::size_t>(apre[i] + rb[i]) * ny + yv[i]];
          }
          if (sc > bs) {
            bs = sc;
            d1 = wa;
            d2 = wb;
          }
        }
      }
    } else {
      TypChecker chk(j3);
      auto pair_typical = [&](long long wa, long long wb) {
        const int* ra = A.data() + static_cast<std::size_t>(wa) * n;
        const int* rb = Bc.data() + static_cast<std::size_t>(wb) * n;
        return chk.run(n, cfg.epsilon,
                       [&](int i) { return (ra[i] * n2 + rb[i]) * ny + yv[i]; });
      };
      out.ev[3] = !pair_typical(w1, w2);  // miss
      int hits = 0;
      for (long long wa = 0; wa < M1 && hits < 2; ++wa) {
        for (long long wb = 0; wb < M2 && hits < 2; ++wb) {
          if (pair_typical(wa, wb)) {
            ++hits;
            d1 = wa;
            d2 = wb;
          }
        }
      }
      if (hits != 1) {
        d1 = -1;
        d2 = -1;
      }
    }

    out.err1 = d1 != w1;
    out.err2 = d2 != w2;
    out.err = out.err1 || out.err2;
    if (d1 >= 0) {
      out.ev[0] = d1 != w1 && d2 == w2;
      out.ev[1] = d1 == w1 && d2 != w2;
      out.ev[2] = d1 != w1 && d2 != w2;
    } else {
      out.ev[2] = 1;  // no decision counts as both wrong
    }
  });

  SimReport rep;
  rep.config = cfg;
  rep.messages1 = M1;
  rep.messages2 = M2;
  rep.effective_rate1 = std::log2(static_cast<double>(M1)) / n;
  rep.effective_rate2 = std::log2(static_cast<double>(M2)) / n;
  long long errs = 0, e1 = 0, e2 = 0;
  std::array<long long, 4> ev{};
  for (const auto& s : slots) {
    errs += s.err;
    e1 += s.err1;
    e2 += s.err2;
    for (int k = 0; k < 4; ++k) ev[k] += s.ev[k];
  }
  rep.estimates.push_back({"overall", errs, cfg.trials});
  rep.estimates.push_back({"sender1", e1, cfg.trials});
  rep.estimates.push_back({"sender2", e2, cfg.trials});
  rep.events.push_back({"wrong_w1", ev[0], cfg.trials});
  rep.events.push_back({"wrong_w2", ev[1], cfg.trials});
  rep.events.push_back({"wrong_both", ev[2], cfg.trials});
  if (typ) rep.events.push_back({"miss", ev[3], cfg.trials});
  return rep;
}

}  // namespace statecap::sim
