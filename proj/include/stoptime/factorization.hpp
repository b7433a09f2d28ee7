#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "stoptime/operators.hpp"

namespace stoptime {

// T with the diagonal made positive by a one-sided +-1 flip, which the basis
// unconditionality turns into an isometric move; the record undoes it.
std::pair<OperatorMatrix, std::vector<int>> sign_normalize(const OperatorMatrix& t);

struct SpliceResult {
  std::vector<Node> roots;  // refined family, pairwise incomparable
  double achieved = 0.0;    // bound on sup_{||x|| <= 1} |<row, x restricted to the union>|
  bool exact = true;
  bool shallow = false;     // some member had no room left to descend
  std::uint64_t evaluations = 0;
};

// Finite splicing step: descend each subtree of the family toward descendants
// whose restriction decouples the given row, and report the achieved bound
// (the norm of the restricted row; exact for lp bases).  No guarantee the
// target is met; the caller reads `achieved`.
SpliceResult splice_subtrees(const OperatorMatrix& t, const Node& row_node,
                             const std::vector<Node>& family, double target, std::uint64_t budget,
                             const std::vector<int>& max_root_depths = {});

struct PickResult {
  Node node;
  double achieved = 0.0;  // max over priors of |<e_s, T b_u>|
  bool met = false;
  bool valid = false;  // false when no admissible node exists at all
};

// Walks a branch of the candidate subtree, taking the first admissible node
// whose couplings against all prior blocks clear the threshold; falls back to
// a breadth-first scan and then to the admissible argmin.
PickResult pick_small_node(const OperatorMatrix& t, const std::vector<std::size_t>& prior_indices,
                           const Node& subtree_root, double threshold, std::uint64_t min_order_index,
                           int max_depth, std::uint64_t budget);

struct SelectionLogEntry {
  Node source;        // output node
  Node chosen;        // its image
  double pick_target = 0.0;      // eta0 * 4^{-order(t)}
  double pick_achieved_max = 0.0;
  double coupling_sum = 0.0;     // sum over prior blocks at the chosen node
  bool pick_met = false;
  double splice_target = 0.0;
  double splice_achieved = 0.0;
  bool splice_met = false;
  bool splice_exact = true;
};

struct FactorisationCertificate {
  OperatorMatrix a, b;  // host-square; rows (resp. columns) active on the output truncation
  double residual = 0.0;
  bool residual_exact = false;
  double norm_product_bound = 0.0;
  bool norm_bound_exact = false;
  double delta = 0.0;
  double delta_selected = 0.0;  // min diagonal over the selected nodes
  double eta = 0.0;
  double eta0 = 0.0;
  double rho = 0.0;  // measured norm of UTJ - I on the block space
  bool rho_exact = false;
  bool neumann_ok = false;        // rho within eta0 / (3 delta)
  bool neumann_violated = false;  // measured rho >= 1; inversion not attempted
  bool invertible = false;
  int output_depth = -1;
  int requested_output_depth = 0;
  bool truncation_exhausted = false;
  std::vector<int> diagonal_signs;
  SubtreeEmbedding embedding;
  std::vector<SelectionLogEntry> selection_log;
};

// The diagonalisation pipeline: sign-normalize, choose block nodes turn by
// turn in standard order (small couplings against prior blocks, then splice
// the remaining family), assemble the embedding operators, invert the block
// compression, and certify A T B = I on the output truncation together with
// a norm-product bound.
FactorisationCertificate diagonalize_D(const OperatorMatrix& t, double delta, double eta,
                                       int output_depth, std::uint64_t budget = 1000000);

}  // namespace stoptime
