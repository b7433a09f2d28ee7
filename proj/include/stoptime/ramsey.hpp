#pragma once

#include <cstdint>
#include <vector>

#include "stoptime/tree.hpp"

namespace stoptime {

// A total 2-coloring of a truncation, stored densely in standard order.
struct Coloring {
  int depth = 0;
  std::vector<std::uint8_t> colors;  // values 1 or 2

  Coloring() = default;
  explicit Coloring(int d) : depth(d), colors(Truncation(d).node_count(), 1) {}

  Truncation truncation() const { return Truncation(depth); }

  int color(const Node& t) const { return colors[static_cast<std::size_t>(order_index(t) - 1)]; }
  void set(const Node& t, int c) { colors[static_cast<std::size_t>(order_index(t) - 1)] = static_cast<std::uint8_t>(c); }

  // node-determined pseudo-random coloring, stable across host depths
  static Coloring seeded_random(int depth, std::uint64_t seed);
};

struct SubtreeSearchResult {
  int color = 1;
  int achieved_depth = -1;  // -1 when not even a single node of either color exists
  SubtreeEmbedding embedding;
  bool budget_exhausted = false;
  std::uint64_t candidates_tried = 0;
};

// Backtracking search for a monochromatic order-isomorphic copy of
// 2^{<=target_depth}. Candidates grow level by level, preferring shallower
// hosts and the standard linear order; linear-order violations are repaired
// by advancing to deeper conforming successors, which the candidate order
// performs implicitly.  Best-effort: if the target depth is unreachable in
// both colors the deepest complete embedding found is returned.
SubtreeSearchResult find_monochromatic_subtree(const Coloring& coloring, int target_depth,
                                               std::uint64_t budget = 1000000);

// same search, reported as a partition split: returns the side whose class
// hosts the deeper (first, on ties) embedding
SubtreeSearchResult split_partition(const Coloring& partition, int target_depth,
                                    std::uint64_t budget = 1000000);

struct IndexFamilySplit {
  std::vector<int> chosen_indices;              // 1-based, majority side
  bool chose_admitting_side = true;             // true: slices admitting depth-k color-1 subtrees
  std::vector<SubtreeSearchResult> per_index;   // results for the chosen indices
};

// Splits index slices 1..K by whether their coloring admits a depth-k subtree
// in color 1, and returns the majority side with per-index embeddings.
IndexFamilySplit split_index_family(const std::vector<Coloring>& slices, int target_depth,
                                    std::uint64_t budget = 1000000);

}  // namespace stoptime
