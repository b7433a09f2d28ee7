#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stoptime {

// A node of the rooted dyadic tree, encoded as (length, path bits).  The path
// is stored MSB-first: appending a child bit shifts left.  With that encoding
// the breadth-first order index is simply 2^length + bits, and children of
// order index o are 2o and 2o+1.
struct Node {
  static constexpr int kMaxLen = 32;

  std::uint8_t len = 0;
  std::uint32_t bits = 0;

  constexpr Node() = default;
  constexpr Node(int length, std::uint32_t path) : len(static_cast<std::uint8_t>(length)), bits(path) {}

  static constexpr Node root() { return Node(); }

  bool is_root() const { return len == 0; }

  Node child(int bit) const { return Node(len + 1, (bits << 1) | static_cast<std::uint32_t>(bit & 1)); }

  // predecessor; defined only for len >= 1
  Node parent() const { return Node(len - 1, bits >> 1); }

  int last_bit() const { return static_cast<int>(bits & 1u); }

  // t|_m, the prefix of length m
  Node prefix(int m) const { return Node(m, bits >> (len - m)); }

  friend bool operator==(const Node& a, const Node& b) { return a.len == b.len && a.bits == b.bits; }
  friend bool operator!=(const Node& a, const Node& b) { return !(a == b); }

  std::string to_string() const;
  static Node from_string(const std::string& s);
};

// 1-based breadth-first index: shorter nodes first, then left to right.
inline std::uint64_t order_index(const Node& t) {
  return (std::uint64_t{1} << t.len) + t.bits;
}

// s < t in the standard linear order
inline bool standard_less(const Node& s, const Node& t) {
  return order_index(s) < order_index(t);
}

enum class Relation {
  Equal,
  SPrefixOfT,
  TPrefixOfS,
  SLeftOfT,
  SRightOfT,
};

Relation relate(const Node& s, const Node& t);

inline bool is_prefix(const Node& s, const Node& t) {
  Relation r = relate(s, t);
  return r == Relation::Equal || r == Relation::SPrefixOfT;
}

inline bool comparable(const Node& s, const Node& t) {
  Relation r = relate(s, t);
  return r != Relation::SLeftOfT && r != Relation::SRightOfT;
}

// concatenation t^s
Node concat(const Node& t, const Node& s);

const char* relation_name(Relation r);

// The finite tree 2^{<=n}.
struct Truncation {
  int depth = 0;

  explicit Truncation(int n) : depth(n) {}

  std::size_t node_count() const { return (std::size_t{1} << (depth + 1)) - 1; }

  bool contains(const Node& t) const { return t.len <= depth; }

  // dense 0-based position in the standard linear order
  std::size_t index_of(const Node& t) const { return static_cast<std::size_t>(order_index(t) - 1); }

  Node node_at(std::size_t idx) const;

  std::vector<Node> nodes() const;

  std::vector<Node> leaves() const;
};

// Antichain and branch enumeration.  Antichains of a subtree are either the
// root alone or a union of (possibly empty) antichains of the two child
// subtrees; the census satisfies A(n) = A(n-1)^2 + 1 with A(0) = 2, counting
// the empty antichain.
using NodeSetSink = std::function<void(const std::vector<Node>&)>;

void for_each_antichain(const Truncation& trunc, const NodeSetSink& sink, std::optional<int> cap_override = std::nullopt);

std::uint64_t count_antichains_recursion(int depth);

// all antichains materialized; intended for small depths only
std::vector<std::vector<Node>> all_antichains(const Truncation& trunc, std::optional<int> cap_override = std::nullopt);

// maximal antichains only: M(n) = M(n-1)^2 + 1 with M(0) = 1
std::vector<std::vector<Node>> maximal_antichains(const Truncation& trunc);

void for_each_branch(const Truncation& trunc, const NodeSetSink& sink);

std::vector<std::vector<Node>> all_branches(const Truncation& trunc);

// An order-and-orientation-preserving injection of 2^{<=source_depth},
// written t -> s_t.  Images are stored densely in standard linear order.
struct SubtreeEmbedding {
  int source_depth = 0;
  std::vector<Node> images;

  static SubtreeEmbedding identity(int depth);

  // t -> prefix^t, the translation into the subtree below `prefix`
  static SubtreeEmbedding shift(int depth, const Node& prefix);

  Node map(const Node& t) const { return images[static_cast<std::size_t>(order_index(t) - 1)]; }

  Truncation source() const { return Truncation(source_depth); }

  // host must contain every image
  bool fits_in(const Truncation& host) const;
};

struct EmbeddingCheck {
  bool ok = true;
  Node witness_a, witness_b;     // first violated source pair, in scan order
  std::string violation;         // which invariant failed

  explicit operator bool() const { return ok; }
};

// Checks prefix relations, incomparability with left/right orientation, and
// monotonicity in the standard linear order, over every source pair.
EmbeddingCheck verify_embedding(const SubtreeEmbedding& e);

// e2 after e1: requires e1's images to lie inside e2's source truncation
SubtreeEmbedding compose(const SubtreeEmbedding& e2, const SubtreeEmbedding& e1);

}  // namespace stoptime
