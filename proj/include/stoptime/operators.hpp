#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "stoptime/spaces.hpp"
#include "stoptime/tree.hpp"

namespace stoptime {

// Dense linear map between truncations in the standard basis; entry (i, j) is
// the coefficient of output basis vector i in the image of input basis
// vector j.
struct OperatorMatrix {
  int depth = 0;
  SpaceTag space = SpaceTag::S(BaseNorm::lp(1.0));
  std::vector<double> entries;  // row-major n x n

  OperatorMatrix() = default;
  OperatorMatrix(int d, SpaceTag tag)
      : depth(d), space(std::move(tag)), entries(Truncation(d).node_count() * Truncation(d).node_count(), 0.0) {}

  std::size_t dim() const { return Truncation(depth).node_count(); }

  double& at(std::size_t row, std::size_t col) { return entries[row * dim() + col]; }
  double at(std::size_t row, std::size_t col) const { return entries[row * dim() + col]; }

  static OperatorMatrix identity(int depth, SpaceTag tag);
  static OperatorMatrix scaled_identity(int depth, SpaceTag tag, double c);

  CoeffVector apply(const CoeffVector& x) const;

  // this * other
  OperatorMatrix compose(const OperatorMatrix& other) const;

  OperatorMatrix plus(const OperatorMatrix& other, double scale = 1.0) const;
};

// The embedding pair of a verified subtree embedding into a host truncation:
// B carries basis vector t to basis vector s_t, Q collapses back, QB is the
// identity on the source truncation and both are norm-one on S, B and their
// duals.
std::pair<OperatorMatrix, OperatorMatrix> build_B_Q(const SubtreeEmbedding& e, const Truncation& host,
                                                    const SpaceTag& space);

OperatorMatrix adjoint(const OperatorMatrix& m);

// certified lower bound on the operator norm via probe vectors: basis
// vectors, random sparse and dense probes, signed antichain and branch
// indicators, and alternating support-alignment refinements
double op_norm_lower(const OperatorMatrix& m, int trials, std::uint64_t seed);

// exact operator norm on the polyhedral spaces (l1 and sup-norm bases) at
// tiny depth, by enumerating the extreme points of the input unit ball
double op_norm_exact_tiny(const OperatorMatrix& m);

// extreme points of {x : sum_{t in C} |x_t| <= 1 for every support C},
// derived per instance from the constraint system
std::vector<std::vector<double>> unit_ball_vertices(const std::vector<std::vector<std::size_t>>& supports,
                                                    std::size_t dim);

struct DistanceResult {
  double value = 0.0;
  CoeffVector witness;  // the nearest annihilating vector
  bool exact = true;
};

// min ||x - w|| over w with <w, v> = 0 for all v in V, in the tagged norm.
// Exact for the polyhedral spaces via an epigraph LP over the enumerated
// support family (or a closed form when V is a single functional); otherwise
// an upper bound via the correction supported where every v vanishes.
DistanceResult distance_to_annihilator(const CoeffVector& x, const std::vector<CoeffVector>& v,
                                       const SpaceTag& space);

// same solver against an explicit polyhedral ambient norm; used for the dual
// sides where the tag vocabulary has no name of its own
DistanceResult distance_to_annihilator_kind(const CoeffVector& x, const std::vector<CoeffVector>& v,
                                            PolyhedralKind kind);

}  // namespace stoptime
