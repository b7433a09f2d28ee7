#include "stoptime/ramsey.hpp"

#include <algorithm>
#include <functional>
#include <optional>

#include "stoptime/errors.hpp"
#include "stoptime/rng.hpp"

namespace stoptime {

Coloring Coloring::seeded_random(int depth, std::uint64_t seed) {
  Coloring c(depth);
  for (const Node& t : Truncation(depth).nodes()) {
    std::uint64_t key = (static_cast<std::uint64_t>(t.len) << 32) | t.bits;
    c.set(t, 1 + static_cast<int>(mix_u64(seed, key) & 1));
  }
  return c;
}

namespace {

struct Searcher {
  const Coloring& coloring;
  int color;
  int target;
  std::uint64_t budget;
  std::uint64_t tried = 0;
  bool exhausted = false;
  // host[i]: the deepest copy (prefix order and orientation, linear order
  // ignored) rooted exactly at node i inside its class; best[i]: the deepest
  // copy rooted anywhere in the subtree of i.  Both are -1 when none exists.
  std::vector<int> host, best;

  Searcher(const Coloring& c, int col, int tgt, std::uint64_t b)
      : coloring(c), color(col), target(tgt), budget(b) {
    const std::size_t n = coloring.colors.size();
    host.assign(n, -1);
    best.assign(n, -1);
    for (std::size_t i = n; i-- > 0;) {
      bool mine = coloring.colors[i] == color;
      if (2 * i + 2 >= n) {
        host[i] = mine ? 0 : -1;
        best[i] = host[i];
      } else {
        int below = std::min(best[2 * i + 1], best[2 * i + 2]);
        host[i] = mine ? (below >= 0 ? below + 1 : 0) : -1;
        best[i] = std::max(host[i], std::max(best[2 * i + 1], best[2 * i + 2]));
      }
    }
  }

  bool admissible(const Node& s, int source_level, std::uint64_t min_index) const {
    if (order_index(s) <= min_index) return false;
    int levels_left = target - source_level;
    if (s.len + levels_left > coloring.depth) return false;
    return host[static_cast<std::size_t>(order_index(s) - 1)] >= levels_left;
  }

  // candidates below `from` (inclusive) in breadth-first order
  bool extend(std::vector<Node>& images, std::size_t pos, const std::vector<Node>& sources) {
    if (pos == sources.size()) return true;
    const Node& t = sources[pos];
    std::uint64_t min_index = pos == 0 ? 0 : order_index(images[pos - 1]);
    Node from = Node::root();
    if (!t.is_root()) {
      const Node& parent_image = images[static_cast<std::size_t>(order_index(t.parent()) - 1)];
      from = parent_image.child(t.last_bit());
      if (from.len > coloring.depth) return false;
    }
    for (int len = from.len; len <= coloring.depth; ++len) {
      std::uint32_t span = std::uint32_t{1} << (len - from.len);
      for (std::uint32_t suffix = 0; suffix < span; ++suffix) {
        if (tried >= budget) {
          exhausted = true;
          return false;
        }
        ++tried;
        Node cand(len, (from.bits << (len - from.len)) | suffix);
        if (!admissible(cand, t.len, min_index)) continue;
        images[pos] = cand;
        if (extend(images, pos + 1, sources)) return true;
        if (exhausted) return false;
      }
    }
    return false;
  }

  std::optional<SubtreeEmbedding> run() {
    auto sources = Truncation(target).nodes();
    std::vector<Node> images(sources.size());
    if (!extend(images, 0, sources)) return std::nullopt;
    SubtreeEmbedding e;
    e.source_depth = target;
    e.images = std::move(images);
    return e;
  }
};

}  // namespace

SubtreeSearchResult find_monochromatic_subtree(const Coloring& coloring, int target_depth,
                                               std::uint64_t budget) {
  if (target_depth > coloring.depth) {
    throw PreconditionError("find_monochromatic_subtree: target depth exceeds truncation depth");
  }
  SubtreeSearchResult res;
  for (int d = target_depth; d >= 0; --d) {
    for (int color : {1, 2}) {
      Searcher searcher(coloring, color, d, budget);
      auto found = searcher.run();
      res.candidates_tried += searcher.tried;
      if (searcher.exhausted) res.budget_exhausted = true;
      if (found) {
        res.color = color;
        res.achieved_depth = d;
        res.embedding = *found;
        return res;
      }
    }
  }
  return res;
}

SubtreeSearchResult split_partition(const Coloring& partition, int target_depth, std::uint64_t budget) {
  return find_monochromatic_subtree(partition, target_depth, budget);
}

IndexFamilySplit split_index_family(const std::vector<Coloring>& slices, int target_depth,
                                    std::uint64_t budget) {
  if (slices.size() < 2) {
    throw PreconditionError("split_index_family: need at least two index slices");
  }
  IndexFamilySplit out;
  std::vector<int> admitting, rest;
  std::vector<SubtreeSearchResult> admitting_res, rest_res;
  for (std::size_t j = 0; j < slices.size(); ++j) {
    Searcher searcher(slices[j], 1, target_depth, budget);
    auto found = searcher.run();
    if (found) {
      admitting.push_back(static_cast<int>(j + 1));
      SubtreeSearchResult r;
      r.color = 1;
      r.achieved_depth = target_depth;
      r.embedding = *found;
      r.candidates_tried = searcher.tried;
      admitting_res.push_back(std::move(r));
    } else {
      rest.push_back(static_cast<int>(j + 1));
      // by the partition dichotomy the complement class carries the subtree
      rest_res.push_back(find_monochromatic_subtree(slices[j], target_depth, budget));
    }
  }
  std::size_t half = (slices.size() + 1) / 2;
  if (admitting.size() >= half) {
    out.chosen_indices = std::move(admitting);
    out.chose_admitting_side = true;
    out.per_index = std::move(admitting_res);
  } else {
    out.chosen_indices = std::move(rest);
    out.chose_admitting_side = false;
    out.per_index = std::move(rest_res);
  }
  return out;
}

}  // namespace stoptime
