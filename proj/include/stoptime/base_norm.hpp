#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "stoptime/tree.hpp"

namespace stoptime {

// The base space E.  Values are always handed over as the list of
// coefficients in index order; by 1-spreading the positions themselves are
// irrelevant, only the order is.  Custom rules are sample-verified by
// check_subsymmetry, never trusted: the dynamic-programming shortcuts in the
// norm engines stay gated on the lp kind.
class BaseNorm {
 public:
  enum class Kind { Lp, Custom };

  static BaseNorm lp(double p);
  static BaseNorm custom(std::string name, std::function<double(const std::vector<double>&)> fn);

  Kind kind() const { return kind_; }
  double p() const { return p_; }
  const std::string& name() const { return name_; }

  bool is_lp() const { return kind_ == Kind::Lp; }
  bool is_l1() const { return kind_ == Kind::Lp && p_ == 1.0; }
  bool is_linf() const { return kind_ == Kind::Lp && std::isinf(p_); }

  double eval(const std::vector<double>& values) const;

  // conjugate exponent p' with 1/p + 1/p' = 1
  double conjugate_p() const;

 private:
  BaseNorm() = default;

  Kind kind_ = Kind::Lp;
  double p_ = 1.0;
  std::string name_;
  std::function<double(const std::vector<double>&)> fn_;
};

double lp_combine(double p, const std::vector<double>& norms);

struct SubsymmetryReport {
  double max_unconditional_violation = 0.0;
  double max_spreading_violation = 0.0;
  double normalisation_violation = 0.0;
  bool pass = false;
};

// Samples random coefficient lists, random sign flips, and random increasing
// re-indexings (zero insertions); reports the largest relative violation.
SubsymmetryReport check_subsymmetry(const BaseNorm& norm, int trials, std::uint64_t seed);

// A tree vector given by its support (sorted by standard order) and values.
struct SupportedVector {
  std::vector<Node> support;
  std::vector<double> values;
};

// E-norm of a sum of tree vectors: merge all entries in standard order.
double eval_merged(const BaseNorm& norm, const std::vector<SupportedVector>& parts);

struct LowerREstimateReport {
  double worst_ratio = std::numeric_limits<double>::infinity();
  std::size_t families_checked = 0;
  bool pass = false;
};

// Over families of vectors with pairwise incomparable supports, reports
// inf ||sum z_j|| / (sum ||z_j||^r)^{1/r}; pass iff >= c_r - 1e-12.
LowerREstimateReport check_lower_r_estimate(const BaseNorm& norm, double r,
                                            const std::vector<std::vector<SupportedVector>>& families,
                                            double declared_c_r);

// Random families with pairwise incomparable supports inside a truncation.
std::vector<std::vector<SupportedVector>> generate_incomparable_families(int depth, int count,
                                                                         std::uint64_t seed);

// For N = 1..N_max, the inner supremum of the vanishing-infimum condition with
// a_j = 1/N over a canonical incomparable family; decay toward 0 is the
// evidence reported.
std::vector<double> estimate_incomparably_non_c0(const BaseNorm& norm, int n_max);

}  // namespace stoptime
