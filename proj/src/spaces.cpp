#include "stoptime/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "stoptime/config.hpp"
#include "stoptime/errors.hpp"
#include "stoptime/simplex.hpp"

namespace stoptime {

SpaceTag SpaceTag::S(BaseNorm b) {
  SpaceTag t;
  t.family = Family::S;
  t.base = std::move(b);
  return t;
}

SpaceTag SpaceTag::B(BaseNorm b) {
  SpaceTag t;
  t.family = Family::B;
  t.base = std::move(b);
  return t;
}

SpaceTag SpaceTag::D(BaseNorm b) {
  SpaceTag t;
  t.family = Family::D;
  t.base = std::move(b);
  return t;
}

SpaceTag SpaceTag::lp_sum(double p, SpaceTag inner_tag) {
  SpaceTag t;
  t.family = Family::LpSum;
  t.sum_p = p;
  t.inner = std::make_shared<SpaceTag>(std::move(inner_tag));
  return t;
}

std::string SpaceTag::describe() const {
  switch (family) {
    case Family::S: return "S[" + base.name() + "]";
    case Family::B: return "B[" + base.name() + "]";
    case Family::D: return "D[" + base.name() + "]";
    case Family::LpSum: return "lpsum[" + std::to_string(sum_p) + ", " + inner->describe() + "]";
  }
  return "?";
}

namespace {

std::vector<std::uint64_t> witness_key(const std::vector<Node>& w) {
  std::vector<std::uint64_t> key;
  key.reserve(w.size());
  for (const Node& t : w) key.push_back(order_index(t));
  std::sort(key.begin(), key.end());
  return key;
}

bool witness_less(const std::vector<Node>& a, const std::vector<Node>& b) {
  return witness_key(a) < witness_key(b);
}

void sort_nodes(std::vector<Node>& nodes) {
  std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return standard_less(a, b); });
}

NormResult norm_S_lp(const CoeffVector& x, double p) {
  const std::size_t n = x.entries.size();
  NormResult res;
  if (std::isinf(p)) {
    double best = 0.0;
    std::size_t arg = n;
    for (std::size_t i = 0; i < n; ++i) {
      double v = std::abs(x.entries[i]);
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    res.value = best;
    if (arg < n) res.witness = {x.truncation().node_at(arg)};
    return res;
  }
  std::vector<double> pw(n), best(n);
  std::vector<std::uint8_t> choice(n);  // 0 empty, 1 singleton, 2 children
  for (std::size_t i = 0; i < n; ++i) {
    pw[i] = p == 1.0 ? std::abs(x.entries[i]) : std::pow(std::abs(x.entries[i]), p);
  }
  for (std::size_t ri = n; ri-- > 0;) {
    std::size_t l = 2 * ri + 1, r = 2 * ri + 2;
    double child_sum = (l < n) ? best[l] + best[r] : 0.0;
    if (pw[ri] <= 0.0 && child_sum <= 0.0) {
      best[ri] = 0.0;
      choice[ri] = 0;
    } else if (pw[ri] >= child_sum) {
      // on ties the singleton {t} precedes any set of strict descendants
      best[ri] = pw[ri];
      choice[ri] = 1;
    } else {
      best[ri] = child_sum;
      choice[ri] = 2;
    }
  }
  res.value = p == 1.0 ? best[0] : std::pow(best[0], 1.0 / p);
  std::vector<std::size_t> stack = {0};
  while (!stack.empty()) {
    std::size_t i = stack.back();
    stack.pop_back();
    if (choice[i] == 1) {
      res.witness.push_back(x.truncation().node_at(i));
    } else if (choice[i] == 2) {
      stack.push_back(2 * i + 2);
      stack.push_back(2 * i + 1);
    }
  }
  sort_nodes(res.witness);
  return res;
}

NormResult norm_S_enumerated(const CoeffVector& x, const BaseNorm& base) {
  if (x.depth > config().antichain_cap) {
    throw UnsupportedError("norm_S: base '" + base.name() + "' requires antichain enumeration, depth " +
                           std::to_string(x.depth) + " exceeds cap " +
                           std::to_string(config().antichain_cap));
  }
  NormResult res;
  res.witness = {};
  for_each_antichain(x.truncation(), [&](const std::vector<Node>& a) {
    std::vector<Node> sorted = a;
    sort_nodes(sorted);
    std::vector<double> values;
    values.reserve(sorted.size());
    for (const Node& t : sorted) values.push_back(x.at(t));
    double v = base.eval(values);
    if (v > res.value + 1e-15) {
      res.value = v;
      res.witness = sorted;
    } else if (std::abs(v - res.value) <= 1e-15 && witness_less(sorted, res.witness)) {
      res.witness = sorted;
    }
  });
  // drop zero entries so the reported optimum is the least one
  std::vector<Node> trimmed;
  for (const Node& t : res.witness) {
    if (x.at(t) != 0.0) trimmed.push_back(t);
  }
  res.witness = trimmed;
  return res;
}

}  // namespace

NormResult norm_S(const CoeffVector& x, const BaseNorm& base) {
  if (base.is_lp()) return norm_S_lp(x, base.p());
  return norm_S_enumerated(x, base);
}

NormResult norm_B(const CoeffVector& x, const BaseNorm& base) {
  const std::size_t n = x.entries.size();
  NormResult res;
  if (base.is_lp()) {
    const double p = base.p();
    const bool inf = std::isinf(p);
    std::vector<double> down(n);
    for (std::size_t ri = n; ri-- > 0;) {
      double own = inf ? std::abs(x.entries[ri])
                       : (p == 1.0 ? std::abs(x.entries[ri]) : std::pow(std::abs(x.entries[ri]), p));
      std::size_t l = 2 * ri + 1, r = 2 * ri + 2;
      double sub = 0.0;
      if (l < n) sub = std::max(down[l], down[r]);
      down[ri] = inf ? std::max(own, sub) : own + sub;
    }
    res.value = inf || p == 1.0 ? down[0] : std::pow(down[0], 1.0 / p);
    // leftmost optimal leaf: ties descend left
    std::size_t i = 0;
    res.witness.push_back(x.truncation().node_at(0));
    while (2 * i + 1 < n) {
      std::size_t l = 2 * i + 1, r = 2 * i + 2;
      i = (down[l] >= down[r]) ? l : r;
      res.witness.push_back(x.truncation().node_at(i));
    }
    return res;
  }
  bool first = true;
  for_each_branch(x.truncation(), [&](const std::vector<Node>& branch) {
    std::vector<double> values;
    values.reserve(branch.size());
    for (const Node& t : branch) values.push_back(x.at(t));
    double v = base.eval(values);
    if (first || v > res.value + 1e-15) {
      res.value = v;
      res.witness = branch;
      first = false;
    }
  });
  return res;
}

namespace {

DualNormResult dual_norm_full_l1(const CoeffVector& xstar) {
  DualNormResult res;
  res.maximizer = CoeffVector(xstar.depth);
  for (std::size_t i = 0; i < xstar.entries.size(); ++i) {
    res.value += std::abs(xstar.entries[i]);
    res.maximizer.entries[i] = xstar.entries[i] > 0 ? 1.0 : (xstar.entries[i] < 0 ? -1.0 : 0.0);
    if (xstar.entries[i] != 0.0) res.witness.push_back(xstar.truncation().node_at(i));
  }
  res.lower_bound = res.value;
  res.converged = true;
  res.exact = true;
  return res;
}

// max <a, xstar> over the predual unit ball approximated by the given
// antichain constraints, with a split into nonnegative halves
LpResult solve_antichain_lp(const CoeffVector& xstar, const std::vector<std::vector<std::size_t>>& sets) {
  const std::size_t n = xstar.entries.size();
  LpProblem lp;
  lp.num_vars = static_cast<int>(2 * n);
  lp.maximize = true;
  lp.objective.assign(2 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    lp.objective[i] = xstar.entries[i];
    lp.objective[n + i] = -xstar.entries[i];
  }
  for (const auto& set : sets) {
    std::vector<double> row(2 * n, 0.0);
    for (std::size_t i : set) {
      row[i] = 1.0;
      row[n + i] = 1.0;
    }
    lp.add_row(std::move(row), RowType::LE, 1.0);
  }
  return solve_lp(lp);
}

CoeffVector extract_split(const LpResult& lr, int depth) {
  CoeffVector a(depth);
  std::size_t n = a.entries.size();
  for (std::size_t i = 0; i < n; ++i) a.entries[i] = lr.x[i] - lr.x[n + i];
  return a;
}

// deterministic coordinate-ascent oracle for non-polyhedral bases:
// maximize <a, xstar> / predual_norm(a)
DualNormResult dual_norm_ascent(const CoeffVector& xstar, const BaseNorm& base,
                                NormResult (*predual)(const CoeffVector&, const BaseNorm&)) {
  if (xstar.depth > config().dual_oracle_cap) {
    throw UnsupportedError("dual norm for base '" + base.name() + "' only available up to depth " +
                           std::to_string(config().dual_oracle_cap));
  }
  DualNormResult res;
  res.exact = false;
  const std::size_t n = xstar.entries.size();
  CoeffVector a(xstar.depth);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    a.entries[i] = xstar.entries[i] > 0 ? 1.0 : (xstar.entries[i] < 0 ? -1.0 : 0.0);
    if (a.entries[i] != 0.0) any = true;
  }
  if (!any) {
    res.converged = true;
    res.maximizer = a;
    return res;
  }
  auto ratio = [&](const CoeffVector& cand) {
    double nn = predual(cand, base).value;
    if (nn <= 1e-15) return 0.0;
    return pairing(cand, xstar) / nn;
  };
  double best = ratio(a);
  double step = 0.5;
  for (int round = 0; round < 200 && step > 1e-10; ++round) {
    bool improved = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (double delta : {step, -step}) {
        CoeffVector cand = a;
        cand.entries[i] += delta;
        double v = ratio(cand);
        if (v > best + 1e-14) {
          best = v;
          a = cand;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  double nn = predual(a, base).value;
  for (double& v : a.entries) v /= nn;
  res.value = best;
  res.lower_bound = best;
  res.converged = true;
  res.maximizer = a;
  return res;
}

}  // namespace

DualNormResult dual_norm_D(const CoeffVector& xstar, const BaseNorm& base, int max_rounds) {
  if (base.is_linf()) return dual_norm_full_l1(xstar);
  if (!base.is_l1()) return dual_norm_ascent(xstar, base, &norm_S);
  if (xstar.depth > 6) {
    // a dense tableau over all singleton rows stops being desk scale here
    throw UnsupportedError("dual_norm_D: column generation capped at depth 6, got depth " +
                           std::to_string(xstar.depth));
  }

  const std::size_t n = xstar.entries.size();
  std::vector<std::vector<std::size_t>> working;
  working.reserve(n + 32);
  for (std::size_t i = 0; i < n; ++i) working.push_back({i});
  std::set<std::vector<std::size_t>> added(working.begin(), working.end());

  DualNormResult res;
  BaseNorm l1 = BaseNorm::lp(1.0);
  for (int round = 0; round < max_rounds; ++round) {
    ++res.iterations;
    LpResult lr = solve_antichain_lp(xstar, working);
    if (lr.status != LpStatus::Optimal) {
      throw UnsupportedError("dual_norm_D: working LP did not solve");
    }
    CoeffVector a = extract_split(lr, xstar.depth);
    NormResult sep = norm_S(a, l1);
    res.maximizer = a;
    res.value = lr.objective;
    if (sep.value <= 1.0 + 1e-9) {
      res.converged = true;
      res.lower_bound = lr.objective;
      break;
    }
    res.lower_bound = pairing(a, xstar) / sep.value;
    std::vector<std::size_t> constraint;
    constraint.reserve(sep.witness.size());
    for (const Node& t : sep.witness) constraint.push_back(xstar.truncation().index_of(t));
    std::sort(constraint.begin(), constraint.end());
    if (!added.insert(constraint).second) break;  // numerical stall
    working.push_back(std::move(constraint));
  }
  res.witness = norm_B(xstar, l1).witness;
  return res;
}

DualNormResult dual_norm_D_enumerated(const CoeffVector& xstar, const BaseNorm& base) {
  if (base.is_linf()) return dual_norm_full_l1(xstar);
  if (!base.is_l1()) return dual_norm_ascent(xstar, base, &norm_S);
  if (xstar.depth > 4) {
    throw UnsupportedError("dual_norm_D_enumerated: depth must be <= 4");
  }
  std::vector<std::vector<std::size_t>> sets;
  for (const auto& a : maximal_antichains(xstar.truncation())) {
    std::vector<std::size_t> idx;
    idx.reserve(a.size());
    for (const Node& t : a) idx.push_back(xstar.truncation().index_of(t));
    sets.push_back(std::move(idx));
  }
  LpResult lr = solve_antichain_lp(xstar, sets);
  if (lr.status != LpStatus::Optimal) {
    throw UnsupportedError("dual_norm_D_enumerated: LP did not solve");
  }
  DualNormResult res;
  res.value = lr.objective;
  res.lower_bound = lr.objective;
  res.converged = true;
  res.exact = true;
  res.iterations = 1;
  res.maximizer = extract_split(lr, xstar.depth);
  res.witness = norm_B(xstar, BaseNorm::lp(1.0)).witness;
  return res;
}

DualNormResult dual_norm_B_star(const CoeffVector& y, const BaseNorm& base) {
  if (base.is_linf()) return dual_norm_full_l1(y);
  if (!base.is_l1()) return dual_norm_ascent(y, base, &norm_B);
  if (y.depth > 8) {
    throw UnsupportedError("dual_norm_B_star: depth must be <= 8");
  }
  std::vector<std::vector<std::size_t>> sets;
  for (const auto& b : all_branches(y.truncation())) {
    std::vector<std::size_t> idx;
    idx.reserve(b.size());
    for (const Node& t : b) idx.push_back(y.truncation().index_of(t));
    sets.push_back(std::move(idx));
  }
  LpResult lr = solve_antichain_lp(y, sets);
  if (lr.status != LpStatus::Optimal) {
    throw UnsupportedError("dual_norm_B_star: LP did not solve");
  }
  DualNormResult res;
  res.value = lr.objective;
  res.lower_bound = lr.objective;
  res.converged = true;
  res.exact = true;
  res.iterations = 1;
  res.maximizer = extract_split(lr, y.depth);
  res.witness = norm_S(y, BaseNorm::lp(1.0)).witness;
  return res;
}

double pairing(const CoeffVector& x, const CoeffVector& y) {
  if (x.depth != y.depth) {
    throw PreconditionError("pairing: truncation mismatch (" + std::to_string(x.depth) + " vs " +
                            std::to_string(y.depth) + ")");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < x.entries.size(); ++i) s += x.entries[i] * y.entries[i];
  return s;
}

double norm_lp_sum(const std::vector<CoeffVector>& xs, double p, const SpaceTag& inner) {
  std::vector<double> norms;
  norms.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].depth != xs[0].depth) {
      throw PreconditionError("norm_lp_sum: members live on different truncations");
    }
    norms.push_back(norm_space(inner, xs[i]).value);
  }
  return lp_combine(p, norms);
}

NormResult norm_space(const SpaceTag& tag, const CoeffVector& x) {
  switch (tag.family) {
    case SpaceTag::Family::S:
      return norm_S(x, tag.base);
    case SpaceTag::Family::B:
      return norm_B(x, tag.base);
    case SpaceTag::Family::D: {
      if (tag.base.is_l1()) {
        // dual of the antichain-l1 norm on a truncation: max branch l1 sum
        return norm_B(x, tag.base);
      }
      if (tag.base.is_linf()) {
        NormResult res;
        for (std::size_t i = 0; i < x.entries.size(); ++i) {
          res.value += std::abs(x.entries[i]);
          if (x.entries[i] != 0.0) res.witness.push_back(x.truncation().node_at(i));
        }
        return res;
      }
      DualNormResult d = dual_norm_D(x, tag.base);
      NormResult res;
      res.value = d.value;
      res.witness = d.witness;
      res.exact = d.exact;
      return res;
    }
    case SpaceTag::Family::LpSum:
      throw UnsupportedError("lp-sum norms apply to vector lists, use norm_lp_sum");
  }
  throw UnsupportedError("norm_space: unknown space tag");
}

PolyhedralKind polyhedral_kind(const SpaceTag& tag) {
  switch (tag.family) {
    case SpaceTag::Family::S:
      if (tag.base.is_l1()) return PolyhedralKind::AntichainL1;
      if (tag.base.is_linf()) return PolyhedralKind::SupNorm;
      return PolyhedralKind::None;
    case SpaceTag::Family::B:
      if (tag.base.is_l1()) return PolyhedralKind::BranchL1;
      if (tag.base.is_linf()) return PolyhedralKind::SupNorm;
      return PolyhedralKind::None;
    case SpaceTag::Family::D:
      if (tag.base.is_l1()) return PolyhedralKind::BranchL1;
      if (tag.base.is_linf()) return PolyhedralKind::FullL1;
      return PolyhedralKind::None;
    case SpaceTag::Family::LpSum:
      return PolyhedralKind::None;
  }
  return PolyhedralKind::None;
}

PolyhedralKind polyhedral_dual(PolyhedralKind kind) {
  switch (kind) {
    case PolyhedralKind::AntichainL1: return PolyhedralKind::BranchL1;
    case PolyhedralKind::BranchL1: return PolyhedralKind::AntichainL1;
    case PolyhedralKind::SupNorm: return PolyhedralKind::FullL1;
    case PolyhedralKind::FullL1: return PolyhedralKind::SupNorm;
    case PolyhedralKind::None: return PolyhedralKind::None;
  }
  return PolyhedralKind::None;
}

NormResult polyhedral_norm(PolyhedralKind kind, const CoeffVector& x) {
  BaseNorm l1 = BaseNorm::lp(1.0);
  switch (kind) {
    case PolyhedralKind::AntichainL1:
      return norm_S(x, l1);
    case PolyhedralKind::BranchL1:
      return norm_B(x, l1);
    case PolyhedralKind::SupNorm:
      return norm_S(x, BaseNorm::lp(std::numeric_limits<double>::infinity()));
    case PolyhedralKind::FullL1: {
      NormResult res;
      for (std::size_t i = 0; i < x.entries.size(); ++i) {
        res.value += std::abs(x.entries[i]);
        if (x.entries[i] != 0.0) res.witness.push_back(x.truncation().node_at(i));
      }
      return res;
    }
    case PolyhedralKind::None:
      break;
  }
  throw UnsupportedError("polyhedral_norm: not a polyhedral space");
}

CoeffVector polyhedral_dual_maximizer(PolyhedralKind kind, const CoeffVector& v) {
  CoeffVector u(v.depth);
  NormResult dual = polyhedral_norm(polyhedral_dual(kind), v);
  switch (kind) {
    case PolyhedralKind::AntichainL1:
    case PolyhedralKind::BranchL1:
    case PolyhedralKind::SupNorm:
      // sign pattern on the dual witness set attains the dual norm at unit norm
      for (const Node& t : dual.witness) {
        double val = v.at(t);
        if (val != 0.0) u.set(t, val > 0 ? 1.0 : -1.0);
      }
      return u;
    case PolyhedralKind::FullL1: {
      if (!dual.witness.empty()) {
        const Node& t = dual.witness.front();
        u.set(t, v.at(t) > 0 ? 1.0 : -1.0);
      }
      return u;
    }
    case PolyhedralKind::None:
      break;
  }
  throw UnsupportedError("polyhedral_dual_maximizer: not a polyhedral space");
}

std::vector<std::vector<std::size_t>> polyhedral_supports(PolyhedralKind kind, int depth) {
  Truncation trunc(depth);
  std::vector<std::vector<std::size_t>> out;
  auto to_indices = [&](const std::vector<Node>& nodes) {
    std::vector<std::size_t> idx;
    idx.reserve(nodes.size());
    for (const Node& t : nodes) idx.push_back(trunc.index_of(t));
    return idx;
  };
  switch (kind) {
    case PolyhedralKind::AntichainL1: {
      if (depth > config().antichain_cap) {
        throw UnsupportedError("antichain supports: depth exceeds cap " +
                               std::to_string(config().antichain_cap));
      }
      for (const auto& a : maximal_antichains(trunc)) out.push_back(to_indices(a));
      return out;
    }
    case PolyhedralKind::BranchL1: {
      if (depth > config().branch_cap) {
        throw UnsupportedError("branch supports: depth exceeds cap " +
                               std::to_string(config().branch_cap));
      }
      for (const auto& b : all_branches(trunc)) out.push_back(to_indices(b));
      return out;
    }
    case PolyhedralKind::SupNorm: {
      if (depth > 6) throw UnsupportedError("sup-norm supports: depth must be <= 6");
      for (std::size_t i = 0; i < trunc.node_count(); ++i) out.push_back({i});
      return out;
    }
    case PolyhedralKind::FullL1: {
      if (depth > 6) throw UnsupportedError("full-l1 supports: depth must be <= 6");
      std::vector<std::size_t> all(trunc.node_count());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      out.push_back(std::move(all));
      return out;
    }
    case PolyhedralKind::None:
      break;
  }
  throw UnsupportedError("polyhedral_supports: not a polyhedral space");
}

}  // namespace stoptime
