#include "stoptime/tree.hpp"

#include <algorithm>

#include "stoptime/config.hpp"
#include "stoptime/errors.hpp"

namespace stoptime {

std::string Node::to_string() const {
  std::string out;
  out.reserve(len);
  for (int k = 0; k < len; ++k) {
    out.push_back(((bits >> (len - 1 - k)) & 1u) ? '1' : '0');
  }
  return out;
}

Node Node::from_string(const std::string& s) {
  if (s.size() > static_cast<std::size_t>(kMaxLen)) {
    throw UnsupportedError("node address longer than " + std::to_string(kMaxLen) + " bits: " + s);
  }
  Node t;
  for (char c : s) {
    if (c != '0' && c != '1') {
      throw UnsupportedError("node address must be a 0/1 string, got: " + s);
    }
    t = t.child(c == '1' ? 1 : 0);
  }
  return t;
}

Relation relate(const Node& s, const Node& t) {
  int m = std::min<int>(s.len, t.len);
  std::uint32_t sp = m > 0 ? (s.bits >> (s.len - m)) : 0;
  std::uint32_t tp = m > 0 ? (t.bits >> (t.len - m)) : 0;
  if (sp == tp) {
    if (s.len == t.len) return Relation::Equal;
    return s.len < t.len ? Relation::SPrefixOfT : Relation::TPrefixOfS;
  }
  // first differing bit after the common prefix decides left/right
  return sp < tp ? Relation::SLeftOfT : Relation::SRightOfT;
}

Node concat(const Node& t, const Node& s) {
  return Node(t.len + s.len, (t.bits << s.len) | s.bits);
}

const char* relation_name(Relation r) {
  switch (r) {
    case Relation::Equal: return "equal";
    case Relation::SPrefixOfT: return "s-prefix-of-t";
    case Relation::TPrefixOfS: return "t-prefix-of-s";
    case Relation::SLeftOfT: return "s-left-of-t";
    case Relation::SRightOfT: return "s-right-of-t";
  }
  return "?";
}

Node Truncation::node_at(std::size_t idx) const {
  std::uint64_t o = idx + 1;
  int level = 0;
  while ((std::uint64_t{2} << level) <= o) ++level;
  return Node(level, static_cast<std::uint32_t>(o - (std::uint64_t{1} << level)));
}

std::vector<Node> Truncation::nodes() const {
  std::vector<Node> out;
  out.reserve(node_count());
  for (int level = 0; level <= depth; ++level) {
    for (std::uint32_t b = 0; b < (std::uint32_t{1} << level); ++b) {
      out.emplace_back(level, b);
    }
  }
  return out;
}

std::vector<Node> Truncation::leaves() const {
  std::vector<Node> out;
  out.reserve(std::size_t{1} << depth);
  for (std::uint32_t b = 0; b < (std::uint32_t{1} << depth); ++b) {
    out.emplace_back(depth, b);
  }
  return out;
}

namespace {

// Antichains of the depth-d shape, as node sets relative to the subtree root.
std::vector<std::vector<Node>> antichain_shapes(int d) {
  if (d == 0) {
    return {{}, {Node::root()}};
  }
  auto sub = antichain_shapes(d - 1);
  std::vector<std::vector<Node>> out;
  out.reserve(sub.size() * sub.size() + 1);
  out.push_back({Node::root()});
  for (const auto& left : sub) {
    for (const auto& right : sub) {
      std::vector<Node> merged;
      merged.reserve(left.size() + right.size());
      for (const Node& r : left) merged.push_back(concat(Node(1, 0), r));
      for (const Node& r : right) merged.push_back(concat(Node(1, 1), r));
      out.push_back(std::move(merged));
    }
  }
  return out;
}

std::vector<std::vector<Node>> maximal_antichain_shapes(int d) {
  if (d == 0) {
    return {{Node::root()}};
  }
  auto sub = maximal_antichain_shapes(d - 1);
  std::vector<std::vector<Node>> out;
  out.reserve(sub.size() * sub.size() + 1);
  out.push_back({Node::root()});
  for (const auto& left : sub) {
    for (const auto& right : sub) {
      std::vector<Node> merged;
      merged.reserve(left.size() + right.size());
      for (const Node& r : left) merged.push_back(concat(Node(1, 0), r));
      for (const Node& r : right) merged.push_back(concat(Node(1, 1), r));
      out.push_back(std::move(merged));
    }
  }
  return out;
}

}  // namespace

void for_each_antichain(const Truncation& trunc, const NodeSetSink& sink, std::optional<int> cap_override) {
  int cap = cap_override.value_or(config().tree_enum_cap);
  if (trunc.depth > cap) {
    throw UnsupportedError("antichain enumeration too large: depth " + std::to_string(trunc.depth) +
                           " exceeds cap " + std::to_string(cap));
  }
  if (trunc.depth == 0) {
    sink({});
    sink({Node::root()});
    return;
  }
  // Materializing the child lists keeps top-level memory at one depth less
  // while the product streams.
  auto sub = antichain_shapes(trunc.depth - 1);
  std::vector<Node> buf;
  for (const auto& left : sub) {
    for (const auto& right : sub) {
      buf.clear();
      for (const Node& r : left) buf.push_back(concat(Node(1, 0), r));
      for (const Node& r : right) buf.push_back(concat(Node(1, 1), r));
      sink(buf);
    }
  }
  sink({Node::root()});
}

std::uint64_t count_antichains_recursion(int depth) {
  std::uint64_t a = 2;
  for (int d = 1; d <= depth; ++d) a = a * a + 1;
  return a;
}

std::vector<std::vector<Node>> all_antichains(const Truncation& trunc, std::optional<int> cap_override) {
  std::vector<std::vector<Node>> out;
  for_each_antichain(trunc, [&](const std::vector<Node>& a) { out.push_back(a); }, cap_override);
  return out;
}

std::vector<std::vector<Node>> maximal_antichains(const Truncation& trunc) {
  return maximal_antichain_shapes(trunc.depth);
}

void for_each_branch(const Truncation& trunc, const NodeSetSink& sink) {
  std::vector<Node> chain(static_cast<std::size_t>(trunc.depth) + 1);
  for (std::uint32_t leaf = 0; leaf < (std::uint32_t{1} << trunc.depth); ++leaf) {
    Node t(trunc.depth, leaf);
    for (int m = trunc.depth; m >= 0; --m) {
      chain[static_cast<std::size_t>(m)] = t.prefix(m);
    }
    sink(chain);
  }
}

std::vector<std::vector<Node>> all_branches(const Truncation& trunc) {
  std::vector<std::vector<Node>> out;
  for_each_branch(trunc, [&](const std::vector<Node>& b) { out.push_back(b); });
  return out;
}

SubtreeEmbedding SubtreeEmbedding::identity(int depth) {
  SubtreeEmbedding e;
  e.source_depth = depth;
  e.images = Truncation(depth).nodes();
  return e;
}

SubtreeEmbedding SubtreeEmbedding::shift(int depth, const Node& prefix) {
  SubtreeEmbedding e;
  e.source_depth = depth;
  e.images.reserve(Truncation(depth).node_count());
  for (const Node& t : Truncation(depth).nodes()) {
    e.images.push_back(concat(prefix, t));
  }
  return e;
}

bool SubtreeEmbedding::fits_in(const Truncation& host) const {
  return std::all_of(images.begin(), images.end(), [&](const Node& s) { return host.contains(s); });
}

EmbeddingCheck verify_embedding(const SubtreeEmbedding& e) {
  EmbeddingCheck res;
  const auto src = Truncation(e.source_depth).nodes();
  if (e.images.size() != src.size()) {
    res.ok = false;
    res.violation = "image table size mismatch";
    return res;
  }
  for (std::size_t i = 0; i < src.size(); ++i) {
    for (std::size_t j = i + 1; j < src.size(); ++j) {
      const Node &t1 = src[i], &t2 = src[j];
      const Node &s1 = e.map(t1), &s2 = e.map(t2);
      Relation want = relate(t1, t2);
      Relation got = relate(s1, s2);
      if (got != want) {
        res.ok = false;
        res.witness_a = t1;
        res.witness_b = t2;
        res.violation = std::string("relation not preserved: source ") + relation_name(want) +
                        ", image " + relation_name(got);
        return res;
      }
      // i < j means t1 < t2 in the standard linear order
      if (!standard_less(s1, s2)) {
        res.ok = false;
        res.witness_a = t1;
        res.witness_b = t2;
        res.violation = "standard linear order not preserved";
        return res;
      }
    }
  }
  return res;
}

SubtreeEmbedding compose(const SubtreeEmbedding& e2, const SubtreeEmbedding& e1) {
  if (!e1.fits_in(Truncation(e2.source_depth))) {
    throw PreconditionError("compose: inner embedding does not land in outer source truncation");
  }
  SubtreeEmbedding out;
  out.source_depth = e1.source_depth;
  out.images.reserve(e1.images.size());
  for (const Node& s : e1.images) out.images.push_back(e2.map(s));
  return out;
}

}  // namespace stoptime
