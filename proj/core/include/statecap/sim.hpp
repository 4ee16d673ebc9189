#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "statecap/channel.hpp"
#include "statecap/prob.hpp"

namespace statecap::sim {

/// Upper bound on any single codebook's message count, and on the candidate
/// set a joint decoder enumerates.
inline constexpr long long kCodebookCap = 1LL << 20;

enum class Decoder { kMaxLikelihood, kTypicality };

/// Fresh codebooks every trial estimate the random-coding average; a cached
/// codebook (one draw reused across trials) estimates a single code's error.
enum class CodebookMode { kFreshPerTrial, kCached };

struct SimConfig {
  int n = 16;               // blocklength (per block, for the relay scheme)
  double rate1 = 0.0;       // bits/letter: the message rate (single, relay),
                            // satellite rate (broadcast), sender 1 (two-sender)
  double rate2 = 0.0;       // cloud rate (broadcast), sender 2 (two-sender)
  double bin_rate = 0.0;    // relay partition rate R0
  int trials = 500;
  std::uint64_t seed = 1;
  Decoder decoder = Decoder::kMaxLikelihood;
  double epsilon = 0.1;     // typicality tolerance (relative)
  int blocks = 5;           // relay scheme: B blocks carry B-1 messages
  CodebookMode codebook = CodebookMode::kFreshPerTrial;
  int workers = 1;
  long long codebook_cap = kCodebookCap;
};

/// Binomial error estimate with a Wilson 95% interval.
struct ErrorEstimate {
  std::string name;
  long long errors = 0;
  long long trials = 0;
  double rate() const { return trials > 0 ? static_cast<double>(errors) / trials : 0.0; }
  double halfwidth() const;
};

/// Raw count of one decoder event (a stage failing, a miss, a confusion).
struct EventCount {
  std::string name;
  long long count = 0;
  long long denom = 0;
};

struct SimReport {
  /// estimates[0] is always the overall message error; the broadcast and
  /// two-sender schemes append per-receiver / per-sender estimates.
  std::vector<ErrorEstimate> estimates;
  std::vector<EventCount> events;
  SimConfig config;
  long long messages1 = 0;      // actual codebook sizes after rounding
  long long messages2 = 0;
  long long bins = 0;           // relay partition cells
  double effective_rate1 = 0.0; // log2(messages)/n, relay scaled by (B-1)/B
  double effective_rate2 = 0.0;
  const ErrorEstimate& overall() const { return estimates.front(); }
};

/// ceil(2^{n*rate}) with protection against floating-point values that sit
/// a hair below an exact power of two. Throws CapExceededError beyond the
/// integer-exact range.
long long message_count(int n, double rate);

/// Half-width of the 95% Wilson score interval for `errors` out of `trials`.
double wilson_halfwidth(long long errors, long long trials);

/// Strong joint typicality: every cell of the empirical type of the sequence
/// tuple is within a relative eps of the target joint, and cells of zero
/// probability never occur. `seqs` holds one equal-length sequence per axis
/// of `joint`, in axis order.
bool joint_typicality(const std::vector<std::vector<int>>& seqs,
                      const prob::JointPmf& joint, double eps);

/// Point-to-point scheme: a codebook of strategy sequences drawn i.i.d. from
/// `strategy_pmf`; the encoder plays x_i = t_i(s_i). Uses rate1.
SimReport simulate_single_user(const channel::StateChannel& ch,
                               const prob::Pmf& strategy_pmf, const SimConfig& cfg);

/// Degraded broadcast scheme: superposition coding with cloud sequences
/// drawn from `cloud_pmf` (alphabet size = cloud_pmf.size()) and satellite
/// strategy letters drawn from `satellite_rows` (row-major [cloud][t],
/// rows stochastic). Receiver 1 decodes cloud then satellite from y1;
/// receiver 2 decodes the cloud from y2. rate1 = satellite, rate2 = cloud.
SimReport simulate_bc(const channel::BroadcastStateChannel& ch, const prob::Pmf& cloud_pmf,
                      const std::vector<double>& satellite_rows, const SimConfig& cfg);

/// Degraded relay scheme: block-Markov superposition with a partition of the
/// message set into bins. `q` is the joint strategy pmf, row-major [t][t1].
/// Per block the relay sends the bin of the previous message, the relay
/// decodes the fresh message from (y1, s), and the destination decodes the
/// bin from the next block before disambiguating inside it. Stage errors are
/// counted against genie-corrected inputs, and a message counts as wrong if
/// any of its three stages failed. rate1 = message rate, bin_rate = R0.
SimReport simulate_relay(const channel::RelayStateChannel& ch, const std::vector<double>& q,
                         const SimConfig& cfg);

/// Two-sender scheme: independent codebooks from `pmf1`, `pmf2`; the decoder
/// resolves the message pair jointly. rate1, rate2.
SimReport simulate_mac(const channel::MacStateChannel& ch, const prob::Pmf& pmf1,
                       const prob::Pmf& pmf2, const SimConfig& cfg);

}  // namespace statecap::sim
