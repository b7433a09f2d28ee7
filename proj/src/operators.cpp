#include "stoptime/operators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "stoptime/config.hpp"
#include "stoptime/errors.hpp"
#include "stoptime/rng.hpp"
#include "stoptime/simplex.hpp"

namespace stoptime {

OperatorMatrix OperatorMatrix::identity(int depth, SpaceTag tag) {
  return scaled_identity(depth, std::move(tag), 1.0);
}

OperatorMatrix OperatorMatrix::scaled_identity(int depth, SpaceTag tag, double c) {
  OperatorMatrix m(depth, std::move(tag));
  for (std::size_t i = 0; i < m.dim(); ++i) m.at(i, i) = c;
  return m;
}

CoeffVector OperatorMatrix::apply(const CoeffVector& x) const {
  if (x.depth != depth) throw PreconditionError("apply: truncation mismatch");
  CoeffVector y(depth);
  const std::size_t n = dim();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    const double* row = entries.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) s += row[j] * x.entries[j];
    y.entries[i] = s;
  }
  return y;
}

OperatorMatrix OperatorMatrix::compose(const OperatorMatrix& other) const {
  if (other.depth != depth) throw PreconditionError("compose: truncation mismatch");
  OperatorMatrix out(depth, space);
  const std::size_t n = dim();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      double a = at(i, k);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out.at(i, j) += a * other.at(k, j);
    }
  }
  return out;
}

OperatorMatrix OperatorMatrix::plus(const OperatorMatrix& other, double scale) const {
  if (other.depth != depth) throw PreconditionError("plus: truncation mismatch");
  OperatorMatrix out = *this;
  for (std::size_t i = 0; i < entries.size(); ++i) out.entries[i] += scale * other.entries[i];
  return out;
}

std::pair<OperatorMatrix, OperatorMatrix> build_B_Q(const SubtreeEmbedding& e, const Truncation& host,
                                                    const SpaceTag& space) {
  auto check = verify_embedding(e);
  if (!check.ok) {
    throw PreconditionError("build_B_Q: embedding rejected: " + check.violation);
  }
  if (!e.fits_in(host)) {
    throw PreconditionError("build_B_Q: embedding image leaves the host truncation");
  }
  OperatorMatrix b(host.depth, space), q(host.depth, space);
  for (const Node& t : Truncation(e.source_depth).nodes()) {
    std::size_t src = host.index_of(t);
    std::size_t img = host.index_of(e.map(t));
    b.at(img, src) = 1.0;
    q.at(src, img) = 1.0;
  }
  return {b, q};
}

OperatorMatrix adjoint(const OperatorMatrix& m) {
  OperatorMatrix out(m.depth, m.space);
  const std::size_t n = m.dim();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.at(j, i) = m.at(i, j);
  }
  return out;
}

namespace {

CoeffVector sample_antichain_probe(int depth, Rng& rng) {
  CoeffVector x(depth);
  std::vector<Node> stack = {Node::root()};
  while (!stack.empty()) {
    Node t = stack.back();
    stack.pop_back();
    double r = rng.uniform();
    if (t.len == depth || r < 0.45) {
      x.set(t, static_cast<double>(rng.sign()));
    } else if (r < 0.6) {
      // skip the subtree
    } else {
      stack.push_back(t.child(0));
      stack.push_back(t.child(1));
    }
  }
  return x;
}

CoeffVector sample_branch_probe(int depth, Rng& rng) {
  CoeffVector x(depth);
  Node t = Node::root();
  x.set(t, static_cast<double>(rng.sign()));
  while (t.len < depth) {
    t = t.child(rng.uniform_int(0, 1));
    x.set(t, static_cast<double>(rng.sign()));
  }
  return x;
}

}  // namespace

double op_norm_lower(const OperatorMatrix& m, int trials, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = m.dim();
  const SpaceTag& tag = m.space;
  PolyhedralKind kind = polyhedral_kind(tag);
  double best = 0.0;
  CoeffVector best_probe(m.depth);

  auto consider = [&](const CoeffVector& x) {
    double nx = norm_space(tag, x).value;
    if (nx <= 1e-14) return;
    double r = norm_space(tag, m.apply(x)).value / nx;
    if (r > best) {
      best = r;
      best_probe = x;
    }
  };

  for (std::size_t j = 0; j < n; ++j) {
    CoeffVector e(m.depth);
    e.entries[j] = 1.0;
    consider(e);
  }
  for (int t = 0; t < trials; ++t) {
    CoeffVector sparse(m.depth);
    int nz = rng.uniform_int(1, 4);
    for (int k = 0; k < nz; ++k) {
      sparse.entries[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(n) - 1))] =
          static_cast<double>(rng.sign());
    }
    consider(sparse);

    CoeffVector dense(m.depth);
    for (double& v : dense.entries) v = rng.normal();
    consider(dense);

    consider(sample_antichain_probe(m.depth, rng));
    consider(sample_branch_probe(m.depth, rng));
  }

  // alternating support-alignment refinement on the polyhedral spaces
  if (kind != PolyhedralKind::None && best > 0.0) {
    CoeffVector x = best_probe;
    OperatorMatrix mt = adjoint(m);
    for (int round = 0; round < 6; ++round) {
      CoeffVector y = m.apply(x);
      NormResult ny = polyhedral_norm(kind, y);
      if (ny.value <= 1e-14) break;
      CoeffVector sigma(m.depth);
      for (const Node& t : ny.witness) {
        double v = y.at(t);
        if (v != 0.0) sigma.set(t, v > 0 ? 1.0 : -1.0);
      }
      CoeffVector next = polyhedral_dual_maximizer(kind, mt.apply(sigma));
      if (polyhedral_norm(kind, next).value <= 1e-14) break;
      consider(next);
      x = next;
    }
  }
  return best;
}

std::vector<std::vector<double>> unit_ball_vertices(const std::vector<std::vector<std::size_t>>& supports,
                                                    std::size_t dim) {
  const std::size_t m = supports.size();
  std::vector<std::vector<double>> nonneg;

  auto try_system = [&](const std::vector<std::size_t>& active, const std::vector<bool>& zero) {
    std::size_t k = active.size();
    std::vector<std::size_t> free_coords;
    for (std::size_t t = 0; t < dim; ++t) {
      if (!zero[t]) free_coords.push_back(t);
    }
    if (free_coords.size() != k) return;
    std::vector<double> a(k * k, 0.0), b(k, 1.0);
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t t : supports[active[r]]) {
        for (std::size_t c = 0; c < k; ++c) {
          if (free_coords[c] == t) a[r * k + c] = 1.0;
        }
      }
    }
    // gauss-jordan with partial pivoting
    for (std::size_t col = 0; col < k; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < k; ++r) {
        if (std::abs(a[r * k + col]) > std::abs(a[piv * k + col])) piv = r;
      }
      if (std::abs(a[piv * k + col]) < 1e-12) return;  // singular active set
      if (piv != col) {
        for (std::size_t c = 0; c < k; ++c) std::swap(a[piv * k + c], a[col * k + c]);
        std::swap(b[piv], b[col]);
      }
      for (std::size_t r = 0; r < k; ++r) {
        if (r == col) continue;
        double f = a[r * k + col] / a[col * k + col];
        if (f == 0.0) continue;
        for (std::size_t c = col; c < k; ++c) a[r * k + c] -= f * a[col * k + c];
        b[r] -= f * b[col];
      }
    }
    std::vector<double> x(dim, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
      double v = b[c] / a[c * k + c];
      if (v < -1e-9) return;
      x[free_coords[c]] = std::max(v, 0.0);
    }
    std::vector<bool> tight(m, false);
    for (std::size_t r = 0; r < m; ++r) {
      double s = 0.0;
      for (std::size_t t : supports[r]) s += x[t];
      if (s > 1.0 + 1e-9) return;
      tight[r] = s > 1.0 - 1e-9;
    }
    // vertex iff the active signed-constraint normals span the whole space
    std::vector<std::vector<double>> normals;
    for (std::size_t r = 0; r < m; ++r) {
      if (!tight[r]) continue;
      std::vector<double> base_row(dim, 0.0);
      for (std::size_t t : supports[r]) {
        if (x[t] > 1e-9) {
          base_row[t] = 1.0;
        } else {
          std::vector<double> unit(dim, 0.0);
          unit[t] = 1.0;
          normals.push_back(std::move(unit));
        }
      }
      normals.push_back(std::move(base_row));
    }
    std::size_t rank = 0;
    std::vector<std::vector<double>> basis;
    for (auto row : normals) {
      for (const auto& pivot_row : basis) {
        std::size_t lead = 0;
        while (lead < dim && std::abs(pivot_row[lead]) < 1e-9) ++lead;
        if (lead == dim) continue;
        double f = row[lead] / pivot_row[lead];
        if (f != 0.0) {
          for (std::size_t c = 0; c < dim; ++c) row[c] -= f * pivot_row[c];
        }
      }
      bool nonzero = false;
      for (double v : row) {
        if (std::abs(v) > 1e-9) nonzero = true;
      }
      if (nonzero) {
        basis.push_back(std::move(row));
        ++rank;
      }
    }
    if (rank == dim) nonneg.push_back(std::move(x));
  };

  std::vector<std::size_t> active;
  std::function<void(std::size_t)> choose_active = [&](std::size_t from) {
    if (!active.empty() && active.size() <= dim) {
      std::vector<bool> zero(dim, false);
      std::size_t need_zero = dim - active.size();
      std::function<void(std::size_t, std::size_t)> choose_zero = [&](std::size_t zfrom, std::size_t left) {
        if (left == 0) {
          try_system(active, zero);
          return;
        }
        for (std::size_t t = zfrom; t + left <= dim; ++t) {
          zero[t] = true;
          choose_zero(t + 1, left - 1);
          zero[t] = false;
        }
      };
      choose_zero(0, need_zero);
    }
    for (std::size_t r = from; r < m; ++r) {
      if (active.size() == std::min(m, dim)) break;
      active.push_back(r);
      choose_active(r + 1);
      active.pop_back();
    }
  };
  choose_active(0);

  std::set<std::vector<long long>> seen;
  std::vector<std::vector<double>> out;
  auto emit = [&](const std::vector<double>& x) {
    std::vector<long long> key(dim);
    for (std::size_t t = 0; t < dim; ++t) key[t] = llround(x[t] * 1e7);
    if (seen.insert(key).second) out.push_back(x);
  };
  for (const auto& x : nonneg) {
    std::vector<std::size_t> supp;
    for (std::size_t t = 0; t < dim; ++t) {
      if (x[t] > 1e-9) supp.push_back(t);
    }
    for (std::size_t mask = 0; mask < (std::size_t{1} << supp.size()); ++mask) {
      std::vector<double> y = x;
      for (std::size_t b = 0; b < supp.size(); ++b) {
        if (mask >> b & 1) y[supp[b]] = -y[supp[b]];
      }
      emit(y);
    }
  }
  return out;
}

double op_norm_exact_tiny(const OperatorMatrix& m) {
  PolyhedralKind kind = polyhedral_kind(m.space);
  if (kind == PolyhedralKind::None) {
    throw UnsupportedError("op_norm_exact_tiny: space " + m.space.describe() + " is not polyhedral");
  }
  if (m.depth > config().exact_norm_cap) {
    throw UnsupportedError("op_norm_exact_tiny: depth " + std::to_string(m.depth) + " exceeds cap " +
                           std::to_string(config().exact_norm_cap));
  }
  auto supports = polyhedral_supports(kind, m.depth);
  auto vertices = unit_ball_vertices(supports, m.dim());
  double best = 0.0;
  for (const auto& v : vertices) {
    CoeffVector x(m.depth);
    x.entries = v;
    best = std::max(best, polyhedral_norm(kind, m.apply(x)).value);
  }
  return best;
}

namespace {

DistanceResult distance_lp(const CoeffVector& x, const std::vector<CoeffVector>& v, PolyhedralKind kind) {
  const std::size_t n = x.entries.size();
  auto supports = polyhedral_supports(kind, x.depth);
  // variables: w+ (n), w- (n), g (n), mu; g majorizes |x - w|
  LpProblem lp;
  lp.num_vars = static_cast<int>(3 * n + 1);
  lp.objective.assign(3 * n + 1, 0.0);
  lp.objective[3 * n] = 1.0;
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<double> row1(3 * n + 1, 0.0), row2(3 * n + 1, 0.0);
    row1[2 * n + t] = 1.0;
    row1[t] = 1.0;
    row1[n + t] = -1.0;
    lp.add_row(std::move(row1), RowType::GE, x.entries[t]);
    row2[2 * n + t] = 1.0;
    row2[t] = -1.0;
    row2[n + t] = 1.0;
    lp.add_row(std::move(row2), RowType::GE, -x.entries[t]);
  }
  for (const auto& set : supports) {
    std::vector<double> row(3 * n + 1, 0.0);
    for (std::size_t t : set) row[2 * n + t] = 1.0;
    row[3 * n] = -1.0;
    lp.add_row(std::move(row), RowType::LE, 0.0);
  }
  for (const auto& func : v) {
    if (func.depth != x.depth) throw PreconditionError("distance: functional truncation mismatch");
    std::vector<double> row(3 * n + 1, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      row[t] = func.entries[t];
      row[n + t] = -func.entries[t];
    }
    lp.add_row(std::move(row), RowType::EQ, 0.0);
  }
  auto sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal) {
    throw UnsupportedError("distance_to_annihilator: LP did not solve");
  }
  DistanceResult res;
  res.value = sol.objective;
  res.witness = CoeffVector(x.depth);
  for (std::size_t t = 0; t < n; ++t) res.witness.entries[t] = sol.x[t] - sol.x[n + t];
  res.exact = true;
  return res;
}

DistanceResult distance_zero_coordinate_bound(const CoeffVector& x, const std::vector<CoeffVector>& v,
                                              const std::function<double(const CoeffVector&)>& ambient) {
  DistanceResult res;
  res.exact = false;
  res.witness = CoeffVector(x.depth);
  CoeffVector removed(x.depth);
  for (std::size_t t = 0; t < x.entries.size(); ++t) {
    bool free_coord = true;
    for (const auto& func : v) {
      if (func.entries[t] != 0.0) free_coord = false;
    }
    if (free_coord) {
      res.witness.entries[t] = x.entries[t];
    } else {
      removed.entries[t] = x.entries[t];
    }
  }
  res.value = ambient(removed);
  return res;
}

}  // namespace

DistanceResult distance_to_annihilator_kind(const CoeffVector& x, const std::vector<CoeffVector>& v,
                                            PolyhedralKind kind) {
  bool all_zero = true;
  std::vector<double> c;
  c.reserve(v.size());
  for (const auto& func : v) {
    c.push_back(pairing(x, func));
    if (std::abs(c.back()) > 1e-14) all_zero = false;
  }
  if (all_zero) return {0.0, x, true};
  if (v.size() == 1) {
    // one homogeneous constraint: distance is |<x,v>| over the dual norm of v
    CoeffVector u = polyhedral_dual_maximizer(kind, v[0]);
    double denom = pairing(u, v[0]);
    DistanceResult res;
    res.value = std::abs(c[0]) / denom;
    res.witness = x;
    double scale = c[0] / denom;
    for (std::size_t t = 0; t < x.entries.size(); ++t) res.witness.entries[t] -= scale * u.entries[t];
    res.exact = true;
    return res;
  }
  bool caps_ok = true;
  try {
    polyhedral_supports(kind, x.depth);
  } catch (const UnsupportedError&) {
    caps_ok = false;
  }
  if (caps_ok) return distance_lp(x, v, kind);
  return distance_zero_coordinate_bound(
      x, v, [&](const CoeffVector& r) { return polyhedral_norm(kind, r).value; });
}

DistanceResult distance_to_annihilator(const CoeffVector& x, const std::vector<CoeffVector>& v,
                                       const SpaceTag& space) {
  PolyhedralKind kind = polyhedral_kind(space);
  if (kind != PolyhedralKind::None) {
    return distance_to_annihilator_kind(x, v, kind);
  }
  bool all_zero = true;
  for (const auto& func : v) {
    if (std::abs(pairing(x, func)) > 1e-14) all_zero = false;
  }
  if (all_zero) return {0.0, x, true};
  return distance_zero_coordinate_bound(x, v,
                                        [&](const CoeffVector& r) { return norm_space(space, r).value; });
}

}  // namespace stoptime
