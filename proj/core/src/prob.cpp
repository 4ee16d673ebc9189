#include "statecap/prob.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>

#include "statecap/error.hpp"

namespace statecap::prob {

namespace {

double checked_mass(std::span<const double> p, const char* what) {
  double total = 0.0;
  for (double x : p) {
    if (x < 0.0) {
      throw ValidationError(std::string(what) + ": negative entry");
    }
    total += x;
  }
  if (std::abs(total - 1.0) > kMassTol) {
    std::ostringstream os;
    os << what << ": mass " << total << " not 1 within " << kMassTol;
    throw ValidationError(os.str());
  }
  return total;
}

double neg_sum_plogp_bits(std::span<const double> p) {
  double acc = 0.0;
  for (double x : p) {
    if (x > 0.0) acc -= x * std::log2(x);
  }
  return acc;
}

}  // namespace

Pmf::Pmf(std::vector<double> probs) : p_(std::move(probs)) {
  if (p_.empty()) throw ValidationError("Pmf: empty support");
  checked_mass(p_, "Pmf");
}

Pmf Pmf::uniform(int n) {
  if (n < 1) throw ValidationError("Pmf::uniform: n < 1");
  return Pmf(std::vector<double>(n, 1.0 / n));
}

Pmf Pmf::point_mass(int n, int at) {
  if (n < 1 || at < 0 || at >= n) throw ValidationError("Pmf::point_mass: bad index");
  std::vector<double> v(n, 0.0);
  v[at] = 1.0;
  return Pmf(std::move(v));
}

JointPmf::JointPmf(std::vector<Axis> axes, std::vector<double> probs)
    : axes_(std::move(axes)), p_(std::move(probs)) {
  std::int64_t cells = 1;
  for (const auto& a : axes_) {
    if (a.size < 1) throw ValidationError("JointPmf: axis '" + a.name + "' has size < 1");
    if (a.name.empty()) throw ValidationError("JointPmf: empty axis name");
    cells *= a.size;
  }
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    for (std::size_t k = i + 1; k < axes_.size(); ++k) {
      if (axes_[i].name == axes_[k].name) {
        throw ValidationError("JointPmf: duplicate axis name '" + axes_[i].name + "'");
      }
    }
  }
  if (cells != static_cast<std::int64_t>(p_.size())) {
    throw ValidationError("JointPmf: tensor size does not match axis sizes");
  }
  checked_mass(p_, "JointPmf");
}

int JointPmf::axis_index(const std::string& name) const {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (axes_[i].name == name) return static_cast<int>(i);
  }
  throw ValidationError("JointPmf: unknown axis '" + name + "'");
}

JointPmf JointPmf::marginal(const std::vector<std::string>& keep) const {
  std::vector<char> keep_mask(axes_.size(), 0);
  for (const auto& name : keep) {
    int idx = axis_index(name);
    if (keep_mask[idx]) throw ValidationError("marginal: axis '" + name + "' listed twice");
    keep_mask[idx] = 1;
  }

  std::vector<Axis> out_axes;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (keep_mask[i]) out_axes.push_back(axes_[i]);
  }

  // Strides of the kept axes inside the reduced tensor.
  std::vector<std::int64_t> out_stride(axes_.size(), 0);
  std::int64_t block = 1;
  for (int i = static_cast<int>(axes_.size()) - 1; i >= 0; --i) {
    if (keep_mask[i]) {
      out_stride[i] = block;
      block *= axes_[i].size;
    }
  }

  std::vector<double> out(block > 0 ? block : 1, 0.0);
  std::vector<int> digit(axes_.size(), 0);
  std::int64_t out_idx = 0;
  for (double cell : p_) {
    out[out_idx] += cell;
    // Odometer over the full tensor, maintaining the reduced index.
    for (int i = static_cast<int>(axes_.size()) - 1; i >= 0; --i) {
      if (++digit[i] < axes_[i].size) {
        if (keep_mask[i]) out_idx += out_stride[i];
        break;
      }
      digit[i] = 0;
      if (keep_mask[i]) out_idx -= out_stride[i] * (axes_[i].size - 1);
    }
  }
  return JointPmf(std::move(out_axes), std::move(out));
}

namespace {

void check_disjoint(const std::vector<std::string>& a, const std::vector<std::string>& b,
                    const char* what) {
  for (const auto& x : a) {
    for (const auto& y : b) {
      if (x == y) throw ValidationError(std::string(what) + ": sets overlap on '" + x + "'");
    }
  }
}

std::vector<std::string> join(const std::vector<std::string>& a,
                              const std::vector<std::string>& b) {
  std::vector<std::string> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

double entropy_of_marginal(const JointPmf& j, const std::vector<std::string>& axes) {
  if (axes.empty()) return 0.0;
  return neg_sum_plogp_bits(j.marginal(axes).probs());
}

}  // namespace

double entropy(const JointPmf& j, const std::vector<std::string>& target,
               const std::vector<std::string>& given) {
  if (target.empty()) throw ValidationError("entropy: empty target set");
  check_disjoint(target, given, "entropy");
  // Single pass over one marginal that contains both sets.
  JointPmf sub = j.marginal(join(target, given));
  double h_joint = neg_sum_plogp_bits(sub.probs());
  if (given.empty()) return h_joint;
  double h_given = neg_sum_plogp_bits(sub.marginal(given).probs());
  return h_joint - h_given;
}

double mutual_information(const JointPmf& j, const std::vector<std::string>& a,
                          const std::vector<std::string>& b,
                          const std::vector<std::string>& given) {
  if (a.empty() || b.empty()) throw ValidationError("mutual_information: empty axis set");
  check_disjoint(a, b, "mutual_information");
  check_disjoint(a, given, "mutual_information");
  check_disjoint(b, given, "mutual_information");

  JointPmf sub = j.marginal(join(join(a, b), given));
  double h_ag = entropy_of_marginal(sub, join(a, given));
  double h_bg = entropy_of_marginal(sub, join(b, given));
  double h_abg = neg_sum_plogp_bits(sub.probs());
  double h_g = entropy_of_marginal(sub, given);
  double mi = h_ag + h_bg - h_abg - h_g;
  if (mi < 0.0) {
    if (mi < -1e-10) {
      std::ostringstream os;
      os << "mutual_information: value " << mi << " below rounding tolerance";
      throw Error(os.str());
    }
    mi = 0.0;
  }
  return mi;
}

Factor factor_from_pmf(const std::string& axis_name, const Pmf& pmf) {
  Factor f;
  f.children = {Axis{axis_name, pmf.size()}};
  f.kernel.assign(pmf.probs().begin(), pmf.probs().end());
  return f;
}

Factor factor_deterministic(std::vector<std::string> parents,
                            std::vector<int> parent_sizes, Axis child,
                            const std::vector<int>& table) {
  if (parents.size() != parent_sizes.size()) {
    throw ValidationError("factor_deterministic: parents/sizes length mismatch");
  }
  std::int64_t rows = 1;
  for (int s : parent_sizes) rows *= s;
  if (static_cast<std::int64_t>(table.size()) != rows) {
    throw ValidationError("factor_deterministic: table length mismatch");
  }
  Factor f;
  f.parents = std::move(parents);
  f.children = {child};
  f.kernel.assign(rows * child.size, 0.0);
  for (std::int64_t r = 0; r < rows; ++r) {
    int v = table[r];
    if (v < 0 || v >= child.size) throw ValidationError("factor_deterministic: value out of range");
    f.kernel[r * child.size + v] = 1.0;
  }
  return f;
}

JointPmf assemble_joint(const std::vector<Factor>& factors) {
  if (factors.empty()) throw ValidationError("assemble_joint: no factors");

  // Duplicate production check up front.
  {
    std::vector<std::string> produced;
    for (const auto& f : factors) {
      if (f.children.empty()) throw ValidationError("assemble_joint: factor with no children");
      for (const auto& c : f.children) {
        if (std::find(produced.begin(), produced.end(), c.name) != produced.end()) {
          throw ValidationError("assemble_joint: axis '" + c.name + "' produced twice");
        }
        produced.push_back(c.name);
      }
    }
  }

  std::vector<Axis> axes;
  std::vector<double> joint = {1.0};
  std::vector<char> done(factors.size(), 0);

  auto axis_pos = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < axes.size(); ++i) {
      if (axes[i].name == name) return static_cast<int>(i);
    }
    return -1;
  };

  std::size_t remaining = factors.size();
  while (remaining > 0) {
    bool progressed = false;
    for (std::size_t fi = 0; fi < factors.size(); ++fi) {
      if (done[fi]) continue;
      const Factor& f = factors[fi];
      std::vector<int> parent_pos(f.parents.size());
      bool ready = true;
      for (std::size_t k = 0; k < f.parents.size(); ++k) {
        parent_pos[k] = axis_pos(f.parents[k]);
        if (parent_pos[k] < 0) {
          ready = false;
          break;
        }
      }
      if (!ready) continue;

      std::int64_t parent_card = 1;
      for (int pp : parent_pos) parent_card *= axes[pp].size;
      std::int64_t child_card = 1;
      for (const auto& c : f.children) {
        if (c.size < 1) throw ValidationError("assemble_joint: child axis '" + c.name + "' size < 1");
        child_card *= c.size;
      }
      if (static_cast<std::int64_t>(f.kernel.size()) != parent_card * child_card) {
        throw ValidationError("assemble_joint: kernel shape mismatch for child '" +
                              f.children.front().name + "'");
      }
      for (std::int64_t r = 0; r < parent_card; ++r) {
        double row_sum = 0.0;
        for (std::int64_t c = 0; c < child_card; ++c) {
          double v = f.kernel[r * child_card + c];
          if (v < 0.0) throw ValidationError("assemble_joint: negative kernel entry");
          row_sum += v;
        }
        if (std::abs(row_sum - 1.0) > kMassTol) {
          std::ostringstream os;
          os << "assemble_joint: non-stochastic kernel row " << r << " (sum " << row_sum << ")";
          throw ValidationError(os.str());
        }
      }

      // Expand the joint: p'(prev, children) = p(prev) * k(parents(prev), children).
      std::int64_t old_cells = static_cast<std::int64_t>(joint.size());
      std::vector<double> grown(old_cells * child_card);
      std::vector<std::int64_t> stride(axes.size());
      {
        std::int64_t s = 1;
        for (int i = static_cast<int>(axes.size()) - 1; i >= 0; --i) {
          stride[i] = s;
          s *= axes[i].size;
        }
      }
      for (std::int64_t idx = 0; idx < old_cells; ++idx) {
        std::int64_t row = 0;
        for (std::size_t k = 0; k < parent_pos.size(); ++k) {
          int pp = parent_pos[k];
          int digit = static_cast<int>((idx / stride[pp]) % axes[pp].size);
          row = row * axes[pp].size + digit;
        }
        const double base = joint[idx];
        const double* krow = f.kernel.data() + row * child_card;
        double* out = grown.data() + idx * child_card;
        for (std::int64_t c = 0; c < child_card; ++c) out[c] = base * krow[c];
      }
      joint = std::move(grown);
      for (const auto& c : f.children) axes.push_back(c);
      done[fi] = 1;
      --remaining;
      progressed = true;
    }
    if (!progressed) {
      throw ValidationError(
          "assemble_joint: cyclic or unsatisfiable parent dependencies among factors");
    }
  }

  return JointPmf(std::move(axes), std::move(joint));
}

}  // namespace statecap::prob
