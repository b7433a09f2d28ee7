#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "stoptime/errors.hpp"
#include "stoptime/ramsey.hpp"
#include "stoptime/rng.hpp"

using namespace stoptime;

namespace {

Coloring constant_coloring(int depth, int color) {
  Coloring c(depth);
  for (auto& v : c.colors) v = static_cast<std::uint8_t>(color);
  return c;
}

Coloring even_length_coloring(int depth) {
  Coloring c(depth);
  for (const Node& t : Truncation(depth).nodes()) c.set(t, t.len % 2 == 0 ? 1 : 2);
  return c;
}

Coloring first_bit_coloring(int depth) {
  Coloring c(depth);
  for (const Node& t : Truncation(depth).nodes()) {
    c.set(t, t.is_root() ? 1 : 1 + static_cast<int>((t.bits >> (t.len - 1)) & 1));
  }
  return c;
}

bool monochromatic(const Coloring& c, const SubtreeEmbedding& e, int color) {
  for (const Node& s : e.images) {
    if (c.color(s) != color) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("constant coloring yields the identity embedding at full depth") {
  for (int depth : {2, 4}) {
    auto res = find_monochromatic_subtree(constant_coloring(depth, 1), depth);
    CHECK(res.color == 1);
    CHECK(res.achieved_depth == depth);
    CHECK(res.embedding.images == SubtreeEmbedding::identity(depth).images);
    auto res2 = find_monochromatic_subtree(constant_coloring(depth, 2), depth);
    CHECK(res2.color == 2);
    CHECK(res2.achieved_depth == depth);
  }
}

TEST_CASE("even-length coloring admits a depth-2 copy in the even class") {
  auto res = find_monochromatic_subtree(even_length_coloring(8), 2);
  CHECK(res.achieved_depth == 2);
  CHECK(res.color == 1);
  CHECK(verify_embedding(res.embedding).ok);
  CHECK(monochromatic(even_length_coloring(8), res.embedding, res.color));
}

TEST_CASE("first-bit coloring achieves one level less than the truncation") {
  for (int depth : {3, 5}) {
    auto res = find_monochromatic_subtree(first_bit_coloring(depth), depth - 1);
    CHECK(res.achieved_depth == depth - 1);
    CHECK(verify_embedding(res.embedding).ok);
    CHECK(monochromatic(first_bit_coloring(depth), res.embedding, res.color));
  }
}

TEST_CASE("a class containing a full shifted copy achieves one level less") {
  // color 1 holds the root and everything below (0)
  for (int depth : {4, 6}) {
    Coloring c(depth);
    for (const Node& t : Truncation(depth).nodes()) {
      bool in_left = t.is_root() || ((t.bits >> (t.len - 1)) & 1) == 0;
      c.set(t, in_left ? 1 : 2);
    }
    auto res = find_monochromatic_subtree(c, depth - 1);
    CHECK(res.achieved_depth >= depth - 1);
  }
}

TEST_CASE("returned embeddings always verify and recheck monochromatic") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    Coloring c = Coloring::seeded_random(7, seed);
    auto res = find_monochromatic_subtree(c, 2);
    REQUIRE(res.achieved_depth >= 0);
    CHECK(verify_embedding(res.embedding).ok);
    CHECK(monochromatic(c, res.embedding, res.color));
  }
}

TEST_CASE("achieved depth is monotone in the host depth on fixed seeds") {
  for (std::uint64_t seed = 11; seed <= 18; ++seed) {
    int prev = -1;
    for (int host : {4, 5, 6}) {
      auto res = find_monochromatic_subtree(Coloring::seeded_random(host, seed), 3);
      CHECK(res.achieved_depth >= prev);
      prev = res.achieved_depth;
    }
  }
}

TEST_CASE("seeded colorings restrict consistently across depths") {
  Coloring deep = Coloring::seeded_random(8, 5);
  Coloring shallow = Coloring::seeded_random(5, 5);
  for (const Node& t : Truncation(5).nodes()) CHECK(deep.color(t) == shallow.color(t));
}

TEST_CASE("split_partition mirrors the finder") {
  Coloring c = even_length_coloring(6);
  auto res = split_partition(c, 2);
  CHECK(res.achieved_depth == 2);
  CHECK(monochromatic(c, res.embedding, res.color));
}

TEST_CASE("split_index_family returns the majority side with embeddings") {
  // all slices fully colored 1
  std::vector<Coloring> all_ones(4, constant_coloring(5, 1));
  auto res = split_index_family(all_ones, 2);
  CHECK(res.chose_admitting_side);
  CHECK(res.chosen_indices == std::vector<int>{1, 2, 3, 4});
  for (const auto& r : res.per_index) CHECK(r.achieved_depth == 2);

  // alternating slices: color-1 admitting and color-2-only
  std::vector<Coloring> mixed = {constant_coloring(5, 1), constant_coloring(5, 2),
                                 constant_coloring(5, 1), constant_coloring(5, 2)};
  auto res2 = split_index_family(mixed, 2);
  CHECK(res2.chosen_indices.size() == 2);
  for (const auto& r : res2.per_index) {
    CHECK(r.achieved_depth == 2);
    CHECK(verify_embedding(r.embedding).ok);
  }

  // one degenerate slice: the non-degenerate side wins the majority
  std::vector<Coloring> pair = {constant_coloring(5, 1), constant_coloring(5, 2)};
  auto res3 = split_index_family(pair, 2);
  CHECK(res3.chosen_indices.size() == 1);
  CHECK_THROWS_AS(split_index_family({constant_coloring(3, 1)}, 1), PreconditionError);
}

TEST_CASE("budget exhaustion is flagged") {
  auto res = find_monochromatic_subtree(Coloring::seeded_random(6, 3), 3, 5);
  CHECK(res.budget_exhausted);
}

TEST_CASE("index-family splits on random slices return verified embeddings") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    std::vector<Coloring> slices;
    for (int j = 0; j < 5; ++j) {
      slices.push_back(Coloring::seeded_random(6, mix_u64(seed, static_cast<std::uint64_t>(j))));
    }
    auto split = split_index_family(slices, 2);
    CHECK(split.chosen_indices.size() >= 3);
    REQUIRE(split.per_index.size() == split.chosen_indices.size());
    for (std::size_t i = 0; i < split.per_index.size(); ++i) {
      const auto& r = split.per_index[i];
      const Coloring& slice = slices[static_cast<std::size_t>(split.chosen_indices[i] - 1)];
      CHECK(r.achieved_depth >= 0);
      CHECK(verify_embedding(r.embedding).ok);
      int expected_color = split.chose_admitting_side ? 1 : r.color;
      for (const Node& s : r.embedding.images) CHECK(slice.color(s) == expected_color);
    }
  }
}
