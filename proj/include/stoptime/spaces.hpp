#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "stoptime/base_norm.hpp"
#include "stoptime/tree.hpp"

namespace stoptime {

// A finitely supported scalar family over a truncation, stored densely in
// standard linear order.
struct CoeffVector {
  int depth = 0;
  std::vector<double> entries;

  CoeffVector() = default;
  explicit CoeffVector(int d) : depth(d), entries(Truncation(d).node_count(), 0.0) {}

  Truncation truncation() const { return Truncation(depth); }

  double at(const Node& t) const { return entries[static_cast<std::size_t>(order_index(t) - 1)]; }
  void set(const Node& t, double v) { entries[static_cast<std::size_t>(order_index(t) - 1)] = v; }

  static CoeffVector basis(int depth, const Node& t) {
    CoeffVector x(depth);
    x.set(t, 1.0);
    return x;
  }
};

struct SpaceTag {
  enum class Family { S, B, D, LpSum };

  Family family = Family::S;
  BaseNorm base = BaseNorm::lp(1.0);
  double sum_p = 1.0;                 // LpSum only
  std::shared_ptr<SpaceTag> inner;    // LpSum only

  static SpaceTag S(BaseNorm b);
  static SpaceTag B(BaseNorm b);
  static SpaceTag D(BaseNorm b);
  static SpaceTag lp_sum(double p, SpaceTag inner_tag);

  std::string describe() const;
};

struct NormResult {
  double value = 0.0;
  std::vector<Node> witness;  // optimal antichain or branch, lexicographically least
  bool exact = true;
};

// sup over antichains of the base norm of the restriction.  For lp bases this
// is the tree recursion best(t) = max(|a_t|^p, best(t0) + best(t1)); other
// bases fall back to antichain enumeration under the configured depth cap.
NormResult norm_S(const CoeffVector& x, const BaseNorm& base);

// max over maximal root-to-leaf chains of the base norm of the restriction.
NormResult norm_B(const CoeffVector& x, const BaseNorm& base);

struct DualNormResult {
  double value = 0.0;        // on convergence, the dual norm
  double lower_bound = 0.0;  // value certified by the feasible maximizer
  bool converged = false;
  bool exact = true;
  int iterations = 0;
  CoeffVector maximizer;          // element of the predual unit ball attaining value
  std::vector<Node> witness;      // optimal branch (l1 base)
};

// Norm of the dual of the antichain space.  l1 base: column generation over
// antichain constraints, separated by the norm_S recursion on the current
// iterate.  linf base: the predual is plain sup-norm, so the dual is the l1
// sum.  Other bases: coordinate-ascent oracle at tiny depth.
DualNormResult dual_norm_D(const CoeffVector& xstar, const BaseNorm& base, int max_rounds = 200);

// Independent oracle: one LP over the fully enumerated maximal antichains.
DualNormResult dual_norm_D_enumerated(const CoeffVector& xstar, const BaseNorm& base);

// Norm of the dual of the branch space: finitely many branches, direct LP.
DualNormResult dual_norm_B_star(const CoeffVector& y, const BaseNorm& base);

double pairing(const CoeffVector& x, const CoeffVector& y);

double norm_lp_sum(const std::vector<CoeffVector>& xs, double p, const SpaceTag& inner);

// Norm dispatch by space tag for single vectors.  D over l1 uses the branch
// formula: on a truncation the dual of the antichain-l1 norm is the maximal
// branch l1 sum (checked against the column-generation LP in the tests).
NormResult norm_space(const SpaceTag& tag, const CoeffVector& x);

// The polyhedral norms are all "max over a support family of restricted l1
// sums"; the kind picks the family.
enum class PolyhedralKind {
  AntichainL1,  // S over l1, and the dual of B over l1
  BranchL1,     // B over l1, and the dual of S over l1
  SupNorm,      // S or B over linf
  FullL1,       // dual of the sup-norm spaces
  None,
};

PolyhedralKind polyhedral_kind(const SpaceTag& tag);

// dual kind within the same four-element family
PolyhedralKind polyhedral_dual(PolyhedralKind kind);

NormResult polyhedral_norm(PolyhedralKind kind, const CoeffVector& x);

// u with ||u||_kind = 1 and <u, v> = ||v||_{dual kind}; zero vector maps to zero
CoeffVector polyhedral_dual_maximizer(PolyhedralKind kind, const CoeffVector& v);

// support families for LP formulations (dense 0-based index sets)
std::vector<std::vector<std::size_t>> polyhedral_supports(PolyhedralKind kind, int depth);

}  // namespace stoptime
