#pragma once

#include <span>
#include <string>
#include <vector>

namespace statecap::prob {

inline constexpr double kMassTol = 1e-12;

/// A finite probability mass function. Entries are validated to be
/// nonnegative and to sum to 1 within kMassTol at construction.
class Pmf {
 public:
  explicit Pmf(std::vector<double> probs);

  static Pmf uniform(int n);
  static Pmf point_mass(int n, int at);

  int size() const { return static_cast<int>(p_.size()); }
  double operator[](int i) const { return p_[i]; }
  std::span<const double> probs() const { return p_; }

 private:
  std::vector<double> p_;
};

/// One named dimension of a joint distribution.
struct Axis {
  std::string name;
  int size = 0;
};

/// Dense joint distribution over a list of named axes. Storage is row-major
/// with the last axis fastest. All information measures are in bits
/// (log base 2) with the 0 log 0 = 0 convention.
class JointPmf {
 public:
  JointPmf(std::vector<Axis> axes, std::vector<double> probs);

  const std::vector<Axis>& axes() const { return axes_; }
  std::span<const double> probs() const { return p_; }
  int cell_count() const { return static_cast<int>(p_.size()); }

  /// Position of a named axis; throws ValidationError if unknown.
  int axis_index(const std::string& name) const;

  /// Marginal over a subset of axes, kept in their original relative order.
  JointPmf marginal(const std::vector<std::string>& keep) const;

 private:
  std::vector<Axis> axes_;
  std::vector<double> p_;
};

/// Shannon entropy H(target | given) in bits. The two sets must be disjoint
/// and name existing axes.
double entropy(const JointPmf& j, const std::vector<std::string>& target,
               const std::vector<std::string>& given = {});

/// Mutual information I(a ; b | given) in bits. The three sets must be
/// pairwise disjoint. Rounding may produce slightly negative values; results
/// in (-1e-10, 0) are clamped to 0, anything more negative indicates an
/// internal inconsistency and throws.
double mutual_information(const JointPmf& j, const std::vector<std::string>& a,
                          const std::vector<std::string>& b,
                          const std::vector<std::string>& given = {});

/// One conditional factor of a product-form joint law: a stochastic kernel
/// from the (possibly empty) tuple of parent axes to a tuple of new child
/// axes. Kernel layout: row index ranges over parent tuples (row-major in
/// the order listed in `parents`), column index over child tuples.
struct Factor {
  std::vector<std::string> parents;
  std::vector<Axis> children;
  std::vector<double> kernel;
};

Factor factor_from_pmf(const std::string& axis_name, const Pmf& pmf);

/// Deterministic factor: child = table[parent tuple]. Rows are point masses.
Factor factor_deterministic(std::vector<std::string> parents,
                            std::vector<int> parent_sizes, Axis child,
                            const std::vector<int>& table);

/// Builds the joint law defined by a list of conditional factors. Factors
/// may be given in any order; they are processed once all their parents have
/// been produced. Throws ValidationError on cyclic dependencies, axes
/// produced twice, unknown parents, shape mismatches, or non-stochastic
/// kernel rows (tolerance kMassTol). Axis order of the result is production
/// order.
JointPmf assemble_joint(const std::vector<Factor>& factors);

}  // namespace statecap::prob
