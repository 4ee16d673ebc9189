#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "channel_file.hpp"
#include "manifest.hpp"
#include "statecap/channel.hpp"
#include "statecap/prob.hpp"
#include "statecap/rng.hpp"
#include "statecap/sim.hpp"
#include "statecap/solve.hpp"
#include "statecap/version.hpp"

namespace statecap::cli {

namespace {

std::string g9(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.9g", v);
  return b;
}

std::string f6(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.6f", v);
  return b;
}

double now_s() {
  using clk = std::chrono::steady_clock;
  return std::chrono::duration<double>(clk::now().time_since_epoch()).count();
}

struct Opts {
  std::string channel;
  std::string model;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool tol_given = false;
  int workers = 1;
  bool dump = false;

  double tol = 1e-9;
  int restarts = 32;
  int oracle = 0;
  int lambda_points = 33;
  int samples = 512;
  int u2_size = 0;

  std::vector<double> rate1, rate2, rate0;
  std::vector<int> blocklengths{16};
  int blocks = 5;
  int trials = 500;
  std::string decoder = "ml";
  double epsilon = 0.1;
  std::vector<double> pmf1, pmf2, joint_pmf;
};

ChannelFile load_checked(const Opts& o) {
  ChannelFile f = load_channel_file(o.channel);
  if (!o.model.empty() && o.model != to_string(f.model)) {
    throw ValidationError(o.channel + ": file declares model '" +
                          std::string(to_string(f.model)) + "' but --model says '" + o.model +
                          "'");
  }
  return f;
}

void warn_default_seed(const Opts& o) {
  if (!o.seed_given) {
    std::cerr << "warning: no --seed given; using seed 0\n";
  }
}

/// Writes manifest block + body to --out (or stdout) and returns an exit code.
int emit(const Opts& o, RunManifest man, const std::string& body, double t0, int code) {
  man.duration_s = now_s() - t0;
  if (o.out.empty()) {
    write_manifest(std::cout, man);
    std::cout << body;
    return code;
  }
  std::ofstream f(o.out);
  if (!f) {
    std::cerr << "error: cannot open output file " << o.out << "\n";
    return kExitUsage;
  }
  write_manifest(f, man);
  f << body;
  f.flush();
  if (!f) {
    std::cerr << "error: failed writing output file " << o.out << "\n";
    return kExitUsage;
  }
  return code;
}

std::string sizes_line(const ChannelFile& f) {
  std::ostringstream os;
  switch (f.model) {
    case Model::kSingle: {
      const auto& c = f.single();
      os << "x=" << c.x_size() << " s=" << c.s_size() << " y=" << c.y_size();
      break;
    }
    case Model::kBc: {
      const auto& c = f.bc();
      os << "x=" << c.x_size() << " s=" << c.s_size() << " y1=" << c.y1_size()
         << " y2=" << c.y2_size();
      break;
    }
    case Model::kRelay: {
      const auto& c = f.relay();
      os << "x=" << c.x_size() << " x1=" << c.x1_size() << " s=" << c.s_size()
         << " y=" << c.y_size() << " y1=" << c.y1_size();
      break;
    }
    case Model::kMac: {
      const auto& c = f.mac();
      os << "x1=" << c.x1_size() << " x2=" << c.x2_size() << " s=" << c.s_size()
         << " y=" << c.y_size();
      break;
    }
  }
  return os.str();
}

/// Validates a flag-provided pmf the same way channel file rows are treated.
std::vector<double> checked_pmf(std::vector<double> p, size_t want, const std::string& what) {
  if (p.size() != want) {
    throw ValidationError(what + ": expected " + std::to_string(want) + " entries, got " +
                          std::to_string(p.size()));
  }
  double sum = 0.0;
  for (double v : p) {
    if (v < 0.0) throw ValidationError(what + ": negative probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError(what + ": entries sum to " + g9(sum) + ", expected 1");
  }
  if (std::abs(sum - 1.0) > 1e-14) {
    for (double& v : p) v /= sum;
  }
  return p;
}

int strategy_count(int x_size, int s_size) {
  return static_cast<int>(channel::enumerate_strategies(x_size, s_size).size());
}

double dmc_mi(const channel::Dmc& d, std::span<const double> p) {
  std::vector<double> j(static_cast<size_t>(d.input_size) * d.output_size);
  for (int t = 0; t < d.input_size; ++t) {
    for (int y = 0; y < d.output_size; ++y) {
      j[static_cast<size_t>(t) * d.output_size + y] = p[t] * d.p(y, t);
    }
  }
  prob::JointPmf jp({{"T", d.input_size}, {"Y", d.output_size}}, std::move(j));
  return prob::mutual_information(jp, {"T"}, {"Y"});
}

double relay_min_mi(const channel::RelayStateChannel& ch, std::span<const double> q) {
  prob::JointPmf j =
      channel::induced_relay_joint(ch, std::vector<double>(q.begin(), q.end()));
  double i1 = prob::mutual_information(j, {"T", "T1"}, {"Y"});
  double i2 = prob::mutual_information(j, {"T"}, {"Y1"}, {"T1", "S"});
  return std::min(i1, i2);
}

void print_argmax(std::ostringstream& body, const std::vector<double>& p) {
  body << "argmax =";
  for (double v : p) body << " " << g9(v);
  body << "\n";
}

// ---------------------------------------------------------------- validate

int cmd_validate(const Opts& o, const std::vector<std::string>& argv) {
  double t0 = now_s();
  RunManifest man{kVersion, o.dump ? "channel/v1" : "validate/v1", argv, 0,
                  "channel=" + o.channel, 0.0};
  std::ostringstream body;
  std::optional<ChannelFile> f;
  try {
    f = load_checked(o);
  } catch (const ParseError& e) {
    body << "FAIL parse: " << e.what() << "\n";
    return emit(o, man, body.str(), t0, kExitParse);
  } catch (const ValidationError& e) {
    body << "FAIL " << e.what() << "\n";
    return emit(o, man, body.str(), t0, kExitValidation);
  }

  body << "PASS parse: model=" << to_string(f->model) << " " << sizes_line(*f);
  if (!f->name.empty()) body << " name=" << f->name;
  body << "\n";
  body << "PASS stochastic: state_pmf and all kernel rows sum to 1 within 1e-9\n";

  int code = kExitOk;
  if (f->model == Model::kBc) {
    auto v = channel::check_bc_degraded(f->bc());
    if (v.pass) {
      body << "PASS degraded: p(y1,y2|x,s) factors through p(y2|y1), max residual "
           << g9(v.residual) << "\n";
    } else {
      body << "FAIL degraded: largest violation at cell (x=" << v.witness.x
           << ", s=" << v.witness.s << ", y1=" << v.witness.y1 << ", y2=" << v.witness.y2
           << "), residual " << g9(v.residual) << "\n";
      code = kExitValidation;
    }
  } else if (f->model == Model::kRelay) {
    auto v = channel::check_relay_degraded(f->relay());
    if (v.pass) {
      body << "PASS degraded: p(y,y1|x,x1,s) factors through p(y|y1,x1,s), max residual "
           << g9(v.residual) << "\n";
    } else {
      body << "FAIL degraded: largest violation at cell (x=" << v.witness.x
           << ", x1=" << v.witness.x1 << ", s=" << v.witness.s << ", y1=" << v.witness.y1
           << ", y=" << v.witness.y << "), residual " << g9(v.residual) << "\n";
      code = kExitValidation;
    }
  }

  if (o.dump && code == kExitOk) {
    std::ostringstream dump;
    dump_canonical(dump, *f);
    return emit(o, man, dump.str(), t0, kExitOk);
  }
  return emit(o, man, body.str(), t0, code);
}

// ---------------------------------------------------------------- capacity

int cmd_capacity(const Opts& o, const std::vector<std::string>& argv) {
  double t0 = now_s();
  ChannelFile f = load_checked(o);
  RunManifest man{kVersion, "capacity/v1", argv, o.seed,
                  "channel=" + o.channel + " model=" + to_string(f.model) +
                      " tol=" + g9(o.tol) + " restarts=" + std::to_string(o.restarts) +
                      " oracle=" + std::to_string(o.oracle),
                  0.0};
  std::ostringstream body;

  if (f.model == Model::kSingle) {
    const auto& ch = f.single();
    solve::BaOptions bo;
    bo.tol = o.tol;
    auto rep = solve::single_user_capacity(ch, bo);
    body << "model = single\n";
    body << "C = " << f6(rep.value) << " (" << rep.label << ")\n";
    body << "status = " << solve::to_string(rep.status) << "\n";
    body << "iterations = " << rep.iterations << "\n";
    print_argmax(body, rep.argmax);
    if (o.oracle > 0) {
      auto dmc = channel::induced_strategy_channel(ch);
      auto orc = solve::grid_oracle_maximize(
          [&](std::span<const double> p) { return dmc_mi(dmc, p); }, dmc.input_size,
          o.oracle);
      body << "oracle = " << f6(orc.value) << " (resolution " << o.oracle << ", "
           << orc.evaluations << " evaluations)\n";
      body << "oracle_gap = " << g9(rep.value - orc.value) << "\n";
    }
  } else if (f.model == Model::kRelay) {
    warn_default_seed(o);
    const auto& ch = f.relay();
    solve::RelayOptions ro;
    ro.restarts = o.restarts;
    ro.seed = o.seed;
    if (o.tol_given) ro.tol = o.tol;
    ro.workers = o.workers;
    auto rep = solve::relay_capacity(ch, ro);
    body << "model = relay\n";
    body << "C >= " << f6(rep.value) << " (" << rep.label << ")\n";
    for (const auto& [k, v] : rep.terms) body << k << " = " << f6(v) << "\n";
    body << "status = " << solve::to_string(rep.status) << "\n";
    body << "restarts = " << rep.restarts_used << "\n";
    print_argmax(body, rep.argmax);
    if (o.oracle > 0) {
      int nt = strategy_count(ch.x_size(), ch.s_size());
      int nt1 = strategy_count(ch.x1_size(), ch.s_size());
      auto orc = solve::grid_oracle_maximize(
          [&](std::span<const double> q) { return relay_min_mi(ch, q); }, nt * nt1,
          o.oracle);
      body << "oracle = " << f6(orc.value) << " (resolution " << o.oracle << ", "
           << orc.evaluations << " evaluations)\n";
      body << "oracle_gap = " << g9(rep.value - orc.value) << "\n";
    }
  } else {
    throw ValidationError(std::string("capacity requires model single or relay; file has ") +
                          to_string(f.model));
  }
  return emit(o, man, body.str(), t0, kExitOk);
}

// ------------------------------------------------------------------ region

int cmd_region(const Opts& o, const std::vector<std::string>& argv) {
  double t0 = now_s();
  ChannelFile f = load_checked(o);
  RunManifest man{kVersion, "region/v1", argv, o.seed,
                  "channel=" + o.channel + " model=" + to_string(f.model) +
                      " lambda_points=" + std::to_string(o.lambda_points) +
                      " restarts=" + std::to_string(o.restarts) +
                      " samples=" + std::to_string(o.samples) +
                      " u2_size=" + std::to_string(o.u2_size),
                  0.0};
  warn_default_seed(o);
  std::ostringstream body;
  body << "set,r1_bits,r2_bits,provenance\n";

  auto rows = [&](const char* set, const solve::RateRegion& r) {
    for (size_t i = 0; i < r.vertices().size(); ++i) {
      body << set << "," << g9(r.vertices()[i].r1) << "," << g9(r.vertices()[i].r2) << ","
           << r.provenance()[i] << "\n";
    }
  };

  if (f.model == Model::kBc) {
    solve::BcRegionOptions bo;
    bo.lambda_points = o.lambda_points;
    bo.restarts = o.restarts;
    bo.seed = o.seed;
    bo.u2_size = o.u2_size;
    if (o.tol_given) bo.tol = o.tol;
    bo.workers = o.workers;
    auto res = solve::bc_region(f.bc(), bo);
    rows("region", res.region);
  } else if (f.model == Model::kMac) {
    solve::MacRegionOptions mo;
    mo.samples = o.samples;
    mo.seed = o.seed;
    auto inner = solve::mac_inner_region(f.mac(), mo);
    auto outer = solve::mac_outer_region(f.mac(), mo);
    rows("inner", inner.region);
    rows("outer", outer.region);
  } else {
    throw ValidationError(std::string("region requires model bc or mac; file has ") +
                          to_string(f.model));
  }
  return emit(o, man, body.str(), t0, kExitOk);
}

// ---------------------------------------------------------------- simulate

sim::Decoder parse_decoder(const std::string& s) {
  return s == "typicality" ? sim::Decoder::kTypicality : sim::Decoder::kMaxLikelihood;
}

long long event_count(const sim::SimReport& rep, const std::string& name) {
  for (const auto& e : rep.events) {
    if (e.name == name) return e.count;
  }
  return 0;
}

const sim::ErrorEstimate& estimate(const sim::SimReport& rep, const std::string& name) {
  for (const auto& e : rep.estimates) {
    if (e.name == name) return e;
  }
  throw ValidationError("internal: missing estimate " + name);
}

/// Pairs a secondary rate list with the rate1 list: empty stays empty,
/// length 1 broadcasts, otherwise lengths must match.
std::vector<double> paired(const std::vector<double>& secondary, size_t n,
                           const std::string& what) {
  if (secondary.empty()) return {};
  if (secondary.size() == 1) return std::vector<double>(n, secondary[0]);
  if (secondary.size() != n) {
    throw ValidationError(what + ": expected 1 or " + std::to_string(n) +
                          " values to pair with --rate1, got " +
                          std::to_string(secondary.size()));
  }
  return secondary;
}

void reject_flags(bool bad, const std::string& msg) {
  if (bad) throw ValidationError(msg);
}

int cmd_simulate(const Opts& o, const std::vector<std::string>& argv) {
  double t0 = now_s();
  ChannelFile f = load_checked(o);
  warn_default_seed(o);

  const char* schema = "";
  std::ostringstream body;
  std::vector<double> r2list = paired(o.rate2, o.rate1.size(), "--rate2");
  std::vector<double> r0list = paired(o.rate0, o.rate1.size(), "--rate0");

  // One sweep point per (rate index, blocklength), blocklengths fastest.
  // Each point runs on its own derived seed so points are independent.
  auto point_cfg = [&](int idx, int n) {
    sim::SimConfig cfg;
    cfg.n = n;
    cfg.trials = o.trials;
    cfg.seed = rng::derive_seed(o.seed, "sweep", static_cast<std::uint64_t>(idx));
    cfg.decoder = parse_decoder(o.decoder);
    cfg.epsilon = o.epsilon;
    cfg.workers = o.workers;
    return cfg;
  };

  switch (f.model) {
    case Model::kSingle: {
      reject_flags(!o.rate2.empty() || !o.rate0.empty() || !o.pmf2.empty() ||
                       !o.joint_pmf.empty(),
                   "single-user simulate takes --rate1 and optionally --pmf1 only");
      const auto& ch = f.single();
      int nt = strategy_count(ch.x_size(), ch.s_size());
      std::vector<double> p = o.pmf1.empty()
                                  ? solve::single_user_capacity(ch).argmax
                                  : checked_pmf(o.pmf1, static_cast<size_t>(nt), "--pmf1");
      schema = "simulate/single/v1";
      body << "scheme,n,rate1,trials,seed,decoder,epsilon,messages1,effective_rate1,"
              "error,halfwidth,ev_miss,ev_confusion\n";
      int idx = 0;
      for (double r1 : o.rate1) {
        for (int n : o.blocklengths) {
          sim::SimConfig cfg = point_cfg(idx++, n);
          cfg.rate1 = r1;
          auto rep = sim::simulate_single_user(ch, prob::Pmf(p), cfg);
          body << "single," << n << "," << g9(r1) << "," << o.trials << "," << o.seed << ","
               << o.decoder << "," << g9(o.epsilon) << "," << rep.messages1 << ","
               << g9(rep.effective_rate1) << "," << g9(rep.overall().rate()) << ","
               << g9(rep.overall().halfwidth()) << "," << event_count(rep, "miss") << ","
               << event_count(rep, "confusion") << "\n";
        }
      }
      break;
    }
    case Model::kBc: {
      reject_flags(!o.rate0.empty() || !o.pmf1.empty() || !o.pmf2.empty(),
                   "bc simulate takes --rate1, --rate2 and optionally --joint-pmf");
      reject_flags(r2list.empty(), "bc simulate requires --rate2");
      const auto& ch = f.bc();
      int nt = strategy_count(ch.x_size(), ch.s_size());

      std::vector<double> cloud;
      std::vector<double> rows;
      int nu2 = 0;
      if (!o.joint_pmf.empty()) {
        reject_flags(o.u2_size < 1, "--joint-pmf for bc requires --u2-size");
        nu2 = o.u2_size;
        auto jp = checked_pmf(o.joint_pmf, static_cast<size_t>(nu2) * nt, "--joint-pmf");
        cloud.assign(nu2, 0.0);
        rows.assign(jp.size(), 0.0);
        for (int u = 0; u < nu2; ++u) {
          double w = 0.0;
          for (int t = 0; t < nt; ++t) w += jp[static_cast<size_t>(u) * nt + t];
          cloud[u] = w;
          for (int t = 0; t < nt; ++t) {
            rows[static_cast<size_t>(u) * nt + t] =
                w > 0.0 ? jp[static_cast<size_t>(u) * nt + t] / w : 1.0 / nt;
          }
        }
      } else {
        // Default code distribution: the computed boundary point that
        // balances the two receivers' rates against their single-user caps.
        solve::BcRegionOptions bo;
        bo.seed = o.seed;
        bo.u2_size = o.u2_size;
        bo.workers = o.workers;
        auto res = solve::bc_region(ch, bo);
        double c1 = res.region.r1_max();
        double c2 = res.region.r2_max();
        const solve::SolveReport* best = nullptr;
        double best_bal = -1.0;
        for (const auto& rep : res.per_lambda) {
          double rr1 = 0.0, rr2 = 0.0;
          for (const auto& [k, v] : rep.terms) {
            if (k == "R1") rr1 = v;
            if (k == "R2") rr2 = v;
          }
          double bal = std::min(c1 > 1e-12 ? rr1 / c1 : 1.0, c2 > 1e-12 ? rr2 / c2 : 1.0);
          if (bal > best_bal) {
            best_bal = bal;
            best = &rep;
          }
        }
        reject_flags(best == nullptr, "bc simulate: no boundary point available");
        nu2 = static_cast<int>(best->argmax.size()) / nt;
        cloud.assign(nu2, 0.0);
        rows.assign(best->argmax.size(), 0.0);
        for (int u = 0; u < nu2; ++u) {
          double w = 0.0;
          for (int t = 0; t < nt; ++t) w += best->argmax[static_cast<size_t>(u) * nt + t];
          cloud[u] = w;
          for (int t = 0; t < nt; ++t) {
            rows[static_cast<size_t>(u) * nt + t] =
                w > 0.0 ? best->argmax[static_cast<size_t>(u) * nt + t] / w : 1.0 / nt;
          }
        }
      }

      schema = "simulate/bc/v1";
      body << "scheme,n,rate1,rate2,trials,seed,decoder,epsilon,messages1,messages2,"
              "effective_rate1,effective_rate2,error,halfwidth,error_rx1,halfwidth_rx1,"
              "error_rx2,halfwidth_rx2,ev_rx1_cloud,ev_rx1_satellite,ev_rx1_miss,"
              "ev_rx2_cloud,ev_rx2_miss\n";
      int idx = 0;
      for (size_t ri = 0; ri < o.rate1.size(); ++ri) {
        for (int n : o.blocklengths) {
          sim::SimConfig cfg = point_cfg(idx++, n);
          cfg.rate1 = o.rate1[ri];
          cfg.rate2 = r2list[ri];
          auto rep = sim::simulate_bc(ch, prob::Pmf(cloud), rows, cfg);
          const auto& rx1 = estimate(rep, "rx1");
          const auto& rx2 = estimate(rep, "rx2");
          body << "bc," << n << "," << g9(cfg.rate1) << "," << g9(cfg.rate2) << ","
               << o.trials << "," << o.seed << "," << o.decoder << "," << g9(o.epsilon)
               << "," << rep.messages1 << "," << rep.messages2 << ","
               << g9(rep.effective_rate1) << "," << g9(rep.effective_rate2) << ","
               << g9(rep.overall().rate()) << "," << g9(rep.overall().halfwidth()) << ","
               << g9(rx1.rate()) << "," << g9(rx1.halfwidth()) << "," << g9(rx2.rate())
               << "," << g9(rx2.halfwidth()) << "," << event_count(rep, "rx1_cloud") << ","
               << event_count(rep, "rx1_satellite") << "," << event_count(rep, "rx1_miss")
               << "," << event_count(rep, "rx2_cloud") << ","
               << event_count(rep, "rx2_miss") << "\n";
        }
      }
      break;
    }
    case Model::kRelay: {
      reject_flags(!o.rate2.empty() || !o.pmf1.empty() || !o.pmf2.empty(),
                   "relay simulate takes --rate1, --rate0 and optionally --joint-pmf");
      const auto& ch = f.relay();
      int nt = strategy_count(ch.x_size(), ch.s_size());
      int nt1 = strategy_count(ch.x1_size(), ch.s_size());
      std::vector<double> q;
      if (!o.joint_pmf.empty()) {
        q = checked_pmf(o.joint_pmf, static_cast<size_t>(nt) * nt1, "--joint-pmf");
      } else {
        solve::RelayOptions ro;
        ro.seed = o.seed;
        ro.workers = o.workers;
        q = solve::relay_capacity(ch, ro).argmax;
      }
      // Feasible bin rates R0 lie in [R - I(T;Y|T1), I(T1;Y)]; default to the
      // midpoint of that interval, clamped below at 0.
      prob::JointPmf j = channel::induced_relay_joint(ch, q);
      double i_t1_y = prob::mutual_information(j, {"T1"}, {"Y"});
      double i_t_y_g1 = prob::mutual_information(j, {"T"}, {"Y"}, {"T1"});

      schema = "simulate/relay/v1";
      body << "scheme,n,blocks,rate1,rate0,trials,seed,decoder,epsilon,messages1,bins,"
              "effective_rate1,effective_rate2,error,halfwidth,ev_stage1_relay_decode,"
              "ev_stage2_bin_decode,ev_stage3_disambiguation\n";
      int idx = 0;
      for (size_t ri = 0; ri < o.rate1.size(); ++ri) {
        for (int n : o.blocklengths) {
          sim::SimConfig cfg = point_cfg(idx++, n);
          cfg.rate1 = o.rate1[ri];
          cfg.bin_rate = r0list.empty()
                             ? 0.5 * (std::max(cfg.rate1 - i_t_y_g1, 0.0) + i_t1_y)
                             : r0list[ri];
          cfg.blocks = o.blocks;
          auto rep = sim::simulate_relay(ch, q, cfg);
          body << "relay," << n << "," << o.blocks << "," << g9(cfg.rate1) << ","
               << g9(cfg.bin_rate) << "," << o.trials << "," << o.seed << "," << o.decoder
               << "," << g9(o.epsilon) << "," << rep.messages1 << "," << rep.bins << ","
               << g9(rep.effective_rate1) << "," << g9(rep.effective_rate2) << ","
               << g9(rep.overall().rate()) << "," << g9(rep.overall().halfwidth()) << ","
               << event_count(rep, "stage1_relay_decode") << ","
               << event_count(rep, "stage2_bin_decode") << ","
               << event_count(rep, "stage3_disambiguation") << "\n";
        }
      }
      break;
    }
    case Model::kMac: {
      reject_flags(!o.rate0.empty() || !o.joint_pmf.empty(),
                   "mac simulate takes --rate1, --rate2 and optionally --pmf1/--pmf2");
      reject_flags(r2list.empty(), "mac simulate requires --rate2");
      const auto& ch = f.mac();
      int nt1 = strategy_count(ch.x1_size(), ch.s_size());
      int nt2 = strategy_count(ch.x2_size(), ch.s_size());
      std::vector<double> p1, p2;
      if (!o.pmf1.empty() || !o.pmf2.empty()) {
        reject_flags(o.pmf1.empty() || o.pmf2.empty(),
                     "mac simulate needs both --pmf1 and --pmf2 when either is given");
        p1 = checked_pmf(o.pmf1, static_cast<size_t>(nt1), "--pmf1");
        p2 = checked_pmf(o.pmf2, static_cast<size_t>(nt2), "--pmf2");
      } else {
        // Default: marginals of the sampled product pmf with the best sum
        // rate. Candidates are products, so the marginals recover it.
        solve::MacRegionOptions mo;
        mo.samples = o.samples;
        mo.seed = o.seed;
        auto inner = solve::mac_inner_region(ch, mo);
        p1.assign(nt1, 0.0);
        p2.assign(nt2, 0.0);
        for (int a = 0; a < nt1; ++a) {
          for (int b = 0; b < nt2; ++b) {
            double v = inner.report.argmax[static_cast<size_t>(a) * nt2 + b];
            p1[a] += v;
            p2[b] += v;
          }
        }
      }
      schema = "simulate/mac/v1";
      body << "scheme,n,rate1,rate2,trials,seed,decoder,epsilon,messages1,messages2,"
              "effective_rate1,effective_rate2,error,halfwidth,error_sender1,"
              "halfwidth_sender1,error_sender2,halfwidth_sender2,ev_wrong_w1,ev_wrong_w2,"
              "ev_wrong_both,ev_miss\n";
      int idx = 0;
      for (size_t ri = 0; ri < o.rate1.size(); ++ri) {
        for (int n : o.blocklengths) {
          sim::SimConfig cfg = point_cfg(idx++, n);
          cfg.rate1 = o.rate1[ri];
          cfg.rate2 = r2list[ri];
          auto rep = sim::simulate_mac(ch, prob::Pmf(p1), prob::Pmf(p2), cfg);
          const auto& s1 = estimate(rep, "sender1");
          const auto& s2 = estimate(rep, "sender2");
          body << "mac," << n << "," << g9(cfg.rate1) << "," << g9(cfg.rate2) << ","
               << o.trials << "," << o.seed << "," << o.decoder << "," << g9(o.epsilon)
               << "," << rep.messages1 << "," << rep.messages2 << ","
               << g9(rep.effective_rate1) << "," << g9(rep.effective_rate2) << ","
               << g9(rep.overall().rate()) << "," << g9(rep.overall().halfwidth()) << ","
               << g9(s1.rate()) << "," << g9(s1.halfwidth()) << "," << g9(s2.rate()) << ","
               << g9(s2.halfwidth()) << "," << event_count(rep, "wrong_w1") << ","
               << event_count(rep, "wrong_w2") << "," << event_count(rep, "wrong_both")
               << "," << event_count(rep, "miss") << "\n";
        }
      }
      break;
    }
  }

  RunManifest man{kVersion, schema, argv, o.seed,
                  "channel=" + o.channel + " model=" + to_string(f.model) +
                      " trials=" + std::to_string(o.trials) + " decoder=" + o.decoder +
                      " blocks=" + std::to_string(o.blocks) +
                      " epsilon=" + g9(o.epsilon) + " workers=" + std::to_string(o.workers),
                  0.0};
  return emit(o, man, body.str(), t0, kExitOk);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{
      "statecap: capacities, rate regions, and random-coding simulations for\n"
      "finite channels whose i.i.d. state is known causally at the transmitters"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 success, 2 channel file parse error, 3 validation error,\n"
      "4 configured cap exceeded, 5 usage error.");

  Opts vo, co, ro, so;

  auto add_common = [](CLI::App* sc, Opts& o) {
    sc->add_option("--channel", o.channel, "channel specification file")->required();
    sc->add_option("--model", o.model, "assert the file's model tag")
        ->check(CLI::IsMember({"single", "bc", "relay", "mac"}));
    sc->add_option("--out", o.out, "write the output document here instead of stdout");
    sc->add_option("--workers", o.workers, "worker threads (results are identical for any count)")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* scv = app.add_subcommand("validate", "parse a channel file and check every invariant");
  add_common(scv, vo);
  scv->add_flag("--dump-canonical", vo.dump,
                "emit the canonical serialization instead of the report");

  CLI::App* scc =
      app.add_subcommand("capacity", "capacity of a single-user or degraded relay channel");
  add_common(scc, co);
  scc->add_option("--tol", co.tol, "solver convergence tolerance");
  scc->add_option("--restarts", co.restarts, "random restarts (relay)")
      ->check(CLI::PositiveNumber);
  auto* cseed = scc->add_option("--seed", co.seed, "rng seed for randomized solvers");
  scc->add_option("--oracle", co.oracle,
                  "cross-check against an exhaustive simplex grid at this resolution");

  CLI::App* scr =
      app.add_subcommand("region", "rate region of a degraded broadcast or multiple-access channel");
  add_common(scr, ro);
  scr->add_option("--lambda-points", ro.lambda_points, "boundary scalarization grid size (bc)")
      ->check(CLI::PositiveNumber);
  scr->add_option("--restarts", ro.restarts, "random restarts per scalarization (bc)")
      ->check(CLI::PositiveNumber);
  scr->add_option("--samples", ro.samples, "random candidate pmfs (mac)")
      ->check(CLI::NonNegativeNumber);
  scr->add_option("--u2-size", ro.u2_size, "cloud alphabet size (bc; 0 = strategies + 1)");
  scr->add_option("--tol", ro.tol, "solver convergence tolerance");
  auto* rseed = scr->add_option("--seed", ro.seed, "rng seed");

  CLI::App* scs = app.add_subcommand(
      "simulate", "Monte Carlo simulation of the random-coding scheme for the file's model");
  add_common(scs, so);
  scs->add_option("--rate1,--rate", so.rate1, "message rate(s) in bits per letter")
      ->required()
      ->delimiter(',');
  scs->add_option("--rate2", so.rate2, "second message rate(s) (bc, mac)")->delimiter(',');
  scs->add_option("--rate0", so.rate0, "relay bin rate(s); default: feasibility midpoint")
      ->delimiter(',');
  scs->add_option("--blocklength", so.blocklengths, "blocklength(s) n")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  scs->add_option("--blocks", so.blocks, "block-Markov blocks B (relay)")
      ->check(CLI::Range(2, 1 << 20));
  scs->add_option("--trials", so.trials, "Monte Carlo trials per sweep point")
      ->check(CLI::PositiveNumber);
  auto* sseed = scs->add_option("--seed", so.seed, "rng seed");
  scs->add_option("--decoder", so.decoder, "ml or typicality")
      ->check(CLI::IsMember({"ml", "typicality"}));
  scs->add_option("--epsilon", so.epsilon, "typicality tolerance");
  scs->add_option("--pmf1", so.pmf1, "strategy pmf override (single: codebook; mac: sender 1)")
      ->delimiter(',');
  scs->add_option("--pmf2", so.pmf2, "strategy pmf override (mac: sender 2)")->delimiter(',');
  scs->add_option("--joint-pmf", so.joint_pmf,
                  "joint pmf override (bc: cloud x strategy, needs --u2-size; relay: (t,t1))")
      ->delimiter(',');
  scs->add_option("--u2-size", so.u2_size, "cloud alphabet size (bc)");
  scs->add_option("--tol", so.tol, "solver tolerance for default code distributions");

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  co.seed_given = cseed->count() > 0;
  ro.seed_given = rseed->count() > 0;
  so.seed_given = sseed->count() > 0;
  co.tol_given = scc->count("--tol") > 0;
  ro.tol_given = scr->count("--tol") > 0;
  so.tol_given = scs->count("--tol") > 0;

  std::vector<std::string> echo;
  echo.reserve(static_cast<size_t>(argc));
  echo.emplace_back("statecap");
  for (int i = 1; i < argc; ++i) echo.emplace_back(argv[i]);

  try {
    if (app.got_subcommand(scv)) return cmd_validate(vo, echo);
    if (app.got_subcommand(scc)) return cmd_capacity(co, echo);
    if (app.got_subcommand(scr)) return cmd_region(ro, echo);
    if (app.got_subcommand(scs)) return cmd_simulate(so, echo);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const CapExceededError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCap;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}

}  // namespace statecap::cli
