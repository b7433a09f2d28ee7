#include "stoptime/base_norm.hpp"

#include <algorithm>
#include <cmath>

#include "stoptime/errors.hpp"
#include "stoptime/rng.hpp"

namespace stoptime {

BaseNorm BaseNorm::lp(double p) {
  if (!(p >= 1.0)) {
    throw PreconditionError("lp base norm requires p >= 1");
  }
  BaseNorm n;
  n.kind_ = Kind::Lp;
  n.p_ = p;
  n.name_ = std::isinf(p) ? "lp:inf" : "lp:" + std::to_string(p);
  return n;
}

BaseNorm BaseNorm::custom(std::string name, std::function<double(const std::vector<double>&)> fn) {
  BaseNorm n;
  n.kind_ = Kind::Custom;
  n.p_ = 0.0;
  n.name_ = std::move(name);
  n.fn_ = std::move(fn);
  if (std::abs(n.fn_({1.0}) - 1.0) > 1e-12) {
    throw PreconditionError("custom base norm is not normalised: |[1]| != 1");
  }
  return n;
}

double BaseNorm::eval(const std::vector<double>& values) const {
  if (kind_ == Kind::Custom) return fn_(values);
  if (std::isinf(p_)) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  if (p_ == 1.0) {
    double s = 0.0;
    for (double v : values) s += std::abs(v);
    return s;
  }
  if (p_ == 2.0) {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
  }
  double s = 0.0;
  for (double v : values) s += std::pow(std::abs(v), p_);
  return std::pow(s, 1.0 / p_);
}

double BaseNorm::conjugate_p() const {
  if (!is_lp()) throw UnsupportedError("conjugate exponent only defined for lp bases");
  if (std::isinf(p_)) return 1.0;
  if (p_ == 1.0) return std::numeric_limits<double>::infinity();
  return p_ / (p_ - 1.0);
}

double lp_combine(double p, const std::vector<double>& norms) {
  return BaseNorm::lp(p).eval(norms);
}

SubsymmetryReport check_subsymmetry(const BaseNorm& norm, int trials, std::uint64_t seed) {
  if (trials < 1) throw PreconditionError("check_subsymmetry requires trials >= 1");
  Rng rng(seed);
  SubsymmetryReport rep;
  rep.normalisation_violation = std::abs(norm.eval({1.0}) - 1.0);
  for (int trial = 0; trial < trials; ++trial) {
    int len = rng.uniform_int(1, 8);
    std::vector<double> v(static_cast<std::size_t>(len));
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    if (rng.coin()) v[static_cast<std::size_t>(rng.uniform_int(0, len - 1))] = 0.0;
    double base = norm.eval(v);
    double scale = std::max(base, 1e-9);

    std::vector<double> flipped = v;
    for (double& x : flipped) x *= rng.sign();
    rep.max_unconditional_violation =
        std::max(rep.max_unconditional_violation, std::abs(norm.eval(flipped) - base) / scale);

    // an increasing re-indexing is the same list with zero gaps inserted
    std::vector<double> spread;
    for (int pad = rng.uniform_int(0, 2); pad > 0; --pad) spread.push_back(0.0);
    for (double x : v) {
      spread.push_back(x);
      for (int pad = rng.uniform_int(0, 2); pad > 0; --pad) spread.push_back(0.0);
    }
    rep.max_spreading_violation =
        std::max(rep.max_spreading_violation, std::abs(norm.eval(spread) - base) / scale);
  }
  rep.pass = rep.max_unconditional_violation <= 1e-12 && rep.max_spreading_violation <= 1e-12 &&
             rep.normalisation_violation <= 1e-12;
  return rep;
}

double eval_merged(const BaseNorm& norm, const std::vector<SupportedVector>& parts) {
  std::vector<std::pair<std::uint64_t, double>> entries;
  for (const auto& part : parts) {
    for (std::size_t i = 0; i < part.support.size(); ++i) {
      entries.emplace_back(order_index(part.support[i]), part.values[i]);
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> values;
  values.reserve(entries.size());
  for (const auto& [idx, v] : entries) values.push_back(v);
  return norm.eval(values);
}

LowerREstimateReport check_lower_r_estimate(const BaseNorm& norm, double r,
                                            const std::vector<std::vector<SupportedVector>>& families,
                                            double declared_c_r) {
  LowerREstimateReport rep;
  for (const auto& family : families) {
    std::vector<double> part_norms;
    part_norms.reserve(family.size());
    for (const auto& part : family) part_norms.push_back(eval_merged(norm, {part}));
    double denom = lp_combine(r, part_norms);
    if (denom <= 1e-15) continue;
    double ratio = eval_merged(norm, family) / denom;
    rep.worst_ratio = std::min(rep.worst_ratio, ratio);
    ++rep.families_checked;
  }
  rep.pass = rep.families_checked > 0 && rep.worst_ratio >= declared_c_r - 1e-12;
  return rep;
}

std::vector<std::vector<SupportedVector>> generate_incomparable_families(int depth, int count,
                                                                         std::uint64_t seed) {
  Rng rng(seed);
  Truncation trunc(depth);
  std::vector<std::vector<SupportedVector>> families;
  families.reserve(static_cast<std::size_t>(count));
  for (int f = 0; f < count; ++f) {
    // roots at a common level are pairwise incomparable
    int level = rng.uniform_int(1, depth);
    int max_members = 1 << level;
    int members = rng.uniform_int(2, std::min(max_members, 6));
    std::vector<int> slots;
    for (int i = 0; i < max_members; ++i) slots.push_back(i);
    for (int i = max_members - 1; i > 0; --i) std::swap(slots[static_cast<std::size_t>(i)],
                                                        slots[static_cast<std::size_t>(rng.uniform_int(0, i))]);
    std::vector<SupportedVector> family;
    for (int m = 0; m < members; ++m) {
      Node root(level, static_cast<std::uint32_t>(slots[static_cast<std::size_t>(m)]));
      SupportedVector part;
      // a short chain or single node below the root, inside the truncation
      int extra = rng.uniform_int(0, depth - level);
      Node t = root;
      part.support.push_back(t);
      part.values.push_back(rng.uniform(-1.0, 1.0));
      for (int k = 0; k < extra; ++k) {
        t = t.child(rng.uniform_int(0, 1));
        part.support.push_back(t);
        part.values.push_back(rng.uniform(-1.0, 1.0));
      }
      family.push_back(std::move(part));
    }
    families.push_back(std::move(family));
  }
  return families;
}

namespace {

// maximize (1/N) sum beta_j * ||ones(m_j)|| subject to ||pattern(beta)|| = 1
// by deterministic coordinate ascent on the scale-invariant ratio.
double inner_supremum(const BaseNorm& norm, const std::vector<std::vector<Node>>& supports) {
  std::size_t n = supports.size();
  std::vector<double> beta(n, 1.0);
  auto objective = [&](const std::vector<double>& b) {
    std::vector<SupportedVector> parts(n);
    double gain = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      parts[j].support = supports[j];
      parts[j].values.assign(supports[j].size(), b[j]);
      gain += norm.eval(std::vector<double>(supports[j].size(), b[j]));
    }
    double combined = eval_merged(norm, parts);
    if (combined <= 1e-15) return 0.0;
    return gain / (static_cast<double>(n) * combined);
  };
  double best = objective(beta);
  double step = 0.5;
  for (int round = 0; round < 60; ++round) {
    bool improved = false;
    for (std::size_t j = 0; j < n; ++j) {
      for (double factor : {1.0 + step, 1.0 / (1.0 + step)}) {
        std::vector<double> cand = beta;
        cand[j] *= factor;
        double val = objective(cand);
        if (val > best + 1e-15) {
          best = val;
          beta = cand;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
    if (step < 1e-9) break;
  }
  return best;
}

}  // namespace

std::vector<double> estimate_incomparably_non_c0(const BaseNorm& norm, int n_max) {
  if (n_max > 12) throw PreconditionError("estimate_incomparably_non_c0: N_max must be <= 12");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) {
    int level = 0;
    while ((1 << level) < n) ++level;
    double best = 0.0;
    // brute force over per-member antichain sizes 1, 2, 4 below level nodes
    for (int size_exp = 0; size_exp <= 2; ++size_exp) {
      int m = 1 << size_exp;
      std::vector<std::vector<Node>> supports;
      supports.reserve(static_cast<std::size_t>(n));
      for (int j = 0; j < n; ++j) {
        Node root(level, static_cast<std::uint32_t>(j));
        std::vector<Node> nodes;
        for (int b = 0; b < m; ++b) {
          nodes.push_back(concat(root, Node(size_exp, static_cast<std::uint32_t>(b))));
        }
        supports.push_back(std::move(nodes));
      }
      best = std::max(best, inner_supremum(norm, supports));
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace stoptime
