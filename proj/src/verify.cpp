#include "stoptime/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "stoptime/errors.hpp"
#include "stoptime/factorization.hpp"
#include "stoptime/game.hpp"
#include "stoptime/operators.hpp"
#include "stoptime/ramsey.hpp"
#include "stoptime/rng.hpp"
#include "stoptime/spaces.hpp"

namespace stoptime {

namespace {

const double kInf = std::numeric_limits<double>::infinity();

CoeffVector random_vector(int depth, Rng& rng, double lo = -1.0, double hi = 1.0) {
  CoeffVector x(depth);
  for (double& v : x.entries) v = rng.uniform(lo, hi);
  return x;
}

SubtreeEmbedding random_embedding(int source_depth, int host_depth, Rng& rng) {
  while (true) {
    SubtreeEmbedding e;
    e.source_depth = source_depth;
    auto sources = Truncation(source_depth).nodes();
    e.images.resize(sources.size());
    bool ok = true;
    for (std::size_t i = 0; i < sources.size() && ok; ++i) {
      const Node& t = sources[i];
      Node from = Node::root();
      if (!t.is_root()) from = e.images[order_index(t.parent()) - 1].child(t.last_bit());
      std::uint64_t min_index = i == 0 ? 0 : order_index(e.images[i - 1]);
      std::vector<Node> candidates;
      for (int len = from.len; len + (source_depth - t.len) <= host_depth; ++len) {
        std::uint32_t span = 1u << (len - from.len);
        for (std::uint32_t suffix = 0; suffix < span; ++suffix) {
          Node cand(len, (from.bits << (len - from.len)) | suffix);
          if (order_index(cand) > min_index) candidates.push_back(cand);
        }
      }
      if (candidates.empty()) {
        ok = false;
        break;
      }
      e.images[i] =
          candidates[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(candidates.size()) - 1))];
    }
    if (ok && verify_embedding(e).ok) return e;
  }
}

struct Failure {
  bool failed = false;
  std::string reason;

  void operator()(bool ok, const std::string& what) {
    if (!ok && !failed) {
      failed = true;
      reason = what;
    }
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

// 1. DP antichain norm against exhaustive enumeration, four bases.
CriterionResult criterion_norm_engines(std::uint64_t seed) {
  CriterionResult res{1, "norm-engine-equivalence", false, 0, ""};
  Rng rng(mix_u64(seed, 1));
  Failure fail;
  Truncation trunc(3);
  auto antichains = all_antichains(trunc);
  for (auto& a : antichains) {
    std::sort(a.begin(), a.end(), [](const Node& s, const Node& t) { return standard_less(s, t); });
  }
  double worst = 0.0;
  for (double p : {1.0, 1.5, 2.0, kInf}) {
    BaseNorm base = BaseNorm::lp(p);
    for (int trial = 0; trial < 500; ++trial) {
      CoeffVector x = random_vector(3, rng);
      double dp = norm_S(x, base).value;
      double oracle = 0.0;
      std::vector<double> values;
      for (const auto& a : antichains) {
        values.clear();
        for (const Node& t : a) values.push_back(x.at(t));
        oracle = std::max(oracle, base.eval(values));
      }
      double dev = std::abs(dp - oracle) / std::max(oracle, 1e-300);
      worst = std::max(worst, dev);
      fail(dev <= 1e-12, "DP and enumeration disagree by " + fmt(dev));
    }
  }
  res.pass = !fail.failed;
  res.detail = fail.failed ? fail.reason : "max relative deviation " + fmt(worst) + " over 2000 vectors";
  return res;
}

// 2. Antichain census against the square-plus-one recursion up to depth 4.
CriterionResult criterion_antichain_census(std::uint64_t) {
  CriterionResult res{2, "antichain-census", false, 0, ""};
  Failure fail;
  for (int n = 0; n <= 4; ++n) {
    std::uint64_t count = 0;
    for_each_antichain(Truncation(n), [&](const std::vector<Node>&) { ++count; });
    fail(count == count_antichains_recursion(n),
         "depth " + std::to_string(n) + ": counted " + std::to_string(count));
  }
  res.pass = !fail.failed;
  res.detail = fail.failed ? fail.reason : "counts 2, 5, 26, 677, 458330";
  return res;
}

// 3. Embedding operator certificates over three bases.
CriterionResult criterion_embedding_operators(std::uint64_t seed) {
  CriterionResult res{3, "embedding-operator-certificates", false, 0, ""};
  Rng rng(mix_u64(seed, 3));
  Failure fail;
  for (int trial = 0; trial < 20; ++trial) {
    int k = rng.uniform_int(1, 2);
    auto e = random_embedding(k, 4, rng);
    auto [bop, qop] = build_B_Q(e, Truncation(4), SpaceTag::S(BaseNorm::lp(1.0)));
    auto qb = qop.compose(bop);
    std::size_t src_count = Truncation(k).node_count();
    for (std::size_t i = 0; i < qb.dim(); ++i) {
      for (std::size_t j = 0; j < qb.dim(); ++j) {
        fail(qb.at(i, j) == ((i == j && i < src_count) ? 1.0 : 0.0), "QB is not the identity");
      }
    }
    for (double p : {1.0, 2.0, kInf}) {
      BaseNorm base = BaseNorm::lp(p);
      for (int probe = 0; probe < 1000; ++probe) {
        CoeffVector x(4);
        for (std::size_t i = 0; i < src_count; ++i) x.entries[i] = rng.uniform(-1, 1);
        CoeffVector bx = bop.apply(x);
        double nx = norm_S(x, base).value;
        fail(std::abs(norm_S(bx, base).value - nx) <= 1e-12 * std::max(1.0, nx),
             "B is not an isometry on the antichain norm");
        double bx_b = norm_B(bx, base).value, x_b = norm_B(x, base).value;
        fail(std::abs(bx_b - x_b) <= 1e-12 * std::max(1.0, x_b),
             "B is not an isometry on the branch norm");

        CoeffVector y = random_vector(4, rng);
        CoeffVector qy = qop.apply(y);
        fail(norm_S(qy, base).value <= norm_S(y, base).value * (1 + 1e-12) + 1e-15,
             "Q expands the antichain norm");
        fail(norm_B(qy, base).value <= norm_B(y, base).value * (1 + 1e-12) + 1e-15,
             "Q expands the branch norm");
      }
    }
  }
  res.pass = !fail.failed;
  res.detail = fail.failed ? fail.reason : "20 embeddings, 3 bases, 1000 vectors each";
  return res;
}

// 4. Column generation against the fully enumerated dual LP, with witnesses.
CriterionResult criterion_duality(std::uint64_t seed) {
  CriterionResult res{4, "dual-norm-duality", false, 0, ""};
  Rng rng(mix_u64(seed, 4));
  Failure fail;
  BaseNorm l1 = BaseNorm::lp(1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    CoeffVector xstar = random_vector(3, rng);
    auto cg = dual_norm_D(xstar, l1);
    auto lp = dual_norm_D_enumerated(xstar, l1);
    fail(cg.converged, "column generation did not converge");
    double dev = std::abs(cg.value - lp.value);
    worst = std::max(worst, dev);
    fail(dev <= 1e-9, "column generation off the enumerated LP by " + fmt(dev));
    // sandwich with an equality witness
    fail(norm_S(cg.maximizer, l1).value <= 1.0 + 1e-9, "maximizer leaves the unit ball");
    fail(std::abs(pairing(cg.maximizer, xstar) - cg.value) <= 1e-9, "maximizer misses the value");
    CoeffVector x = random_vector(3, rng);
    fail(pairing(x, xstar) <= norm_S(x, l1).value * cg.value + 1e-9, "duality sandwich violated");
  }
  res.pass = !fail.failed;
  res.detail = fail.failed ? fail.reason : "200 functionals, worst gap " + fmt(worst);
  return res;
}

// 5. Branch summability of dual-unit functionals, and its antichain mirror.
CriterionResult criterion_summability(std::uint64_t seed) {
  CriterionResult res{5, "dual-unit-summability", false, 0, ""};
  Rng rng(mix_u64(seed, 5));
  Failure fail;
  BaseNorm l1 = BaseNorm::lp(1.0);
  for (int trial = 0; trial < 200; ++trial) {
    CoeffVector xstar = random_vector(4, rng);
    auto nd = dual_norm_D(xstar, l1);
    fail(nd.converged, "column generation did not converge");
    if (nd.value < 1e-9) continue;
    for (double& v : xstar.entries) v /= nd.value;
    double max_branch = norm_B(xstar, l1).value;
    fail(max_branch <= 1.0 + 1e-9, "branch sum " + fmt(max_branch) + " above one");

    CoeffVector y = random_vector(4, rng);
    auto nb = dual_norm_B_star(y, l1);
    if (nb.value < 1e-9) continue;
    for (double& v : y.entries) v /= nb.value;
    double max_antichain = norm_S(y, l1).value;
    fail(max_antichain <= 1.0 + 1e-9, "antichain sum " + fmt(max_antichain) + " above one");
  }
  res.pass = !fail.failed;
  res.detail = fail.failed ? fail.reason : "200 dual-unit functionals per side at depth 4";
  return res;
}

// 6. Monochromatic subtree searches: verified results, depth monotone in the
// host, structured colorings reach depth 2.
CriterionResult criterion_ramsey(std::uint64_t seed) {
  CriterionResult res{6, "ramsey-subtree-search", false, 0, ""};
  Failure fail;
  int worst_depth = 100;
  for (int i = 0; i < 100; ++i) {
    std::uint64_t coloring_seed = mix_u64(seed, 600 + static_cast<std::uint64_t>(i));
    int prev = -1;
    for (int host : {6, 8, 10}) {
      Coloring c = Coloring::seeded_random(host, coloring_seed);
      auto found = find_monochromatic_subtree(c, 3);
      fail(found.achieved_depth >= 0, "no embedding found at all");
      fail(verify_embedding(found.embedding).ok, "returned embedding does not verify");
      for (const Node& s : found.embedding.images) {
        fail(c.color(s) == found.color, "embedding is not monochromatic");
      }
      fail(found.achieved_depth >= prev, "achieved depth dropped when the host grew");
      prev = found.achieved_depth;
    }
    worst_depth = std::min(worst_depth, prev);
  }
  Coloring parity(8);
  for (const Node& t : Truncation(8).nodes()) parity.set(t, t.len % 2 == 0 ? 1 : 2);
  auto structured = find_monochromatic_subtree(parity, 2);
  fail(structured.achieved_depth >= 2, "even-length coloring missed depth 2");
  res.pass = !fail.failed;
  res.detail =
      fail.failed ? fail.reason : "100 colorings, min achieved depth at host 10: " + std::to_string(worst_depth);
  return res;
}

// 7. Reproducibility games against the seeded-random adversary.
CriterionResult criterion_game(std::uint64_t seed) {
  CriterionResult res{7, "reproducibility-game", false, 0, ""};
  Failure fail;
  for (int g = 0; g < 20; ++g) {
    std::uint64_t game_seed = mix_u64(seed, 700 + static_cast<std::uint64_t>(g));
    SeededRandomAdversary adversary(game_seed, 0.1, 10);
    auto tr = run_rep_game(adversary, 2, 10, SpaceTag::S(BaseNorm::lp(1.0)));
    fail(tr.all_succeeded(), "a turn failed in game " + std::to_string(g));
    auto check = verify_transcript(tr, 1.0, 0.1, 200, game_seed);
    fail(check.primal_distances && check.dual_distances, "re-solved distances exceed 0.1");
    fail(check.primal_equivalence && check.dual_equivalence,
         "block sequences are not isometric copies");
    fail(check.embedding_verified, "game images do not form a verified embedding");
  }
  res.pass = !fail.failed;
  res.detail = fail.failed ? fail.reason : "20 games, play depth 2 in host depth 10";
  return res;
}

// 8. Sign selection: both modes beat the average, and exhaustive checks for
// small blocks.
CriterionResult criterion_signs(std::uint64_t seed) {
  CriterionResult res{8, "sign-derandomization", false, 0, ""};
  Rng rng(mix_u64(seed, 8));
  Failure fail;
  Truncation host(3);
  auto nodes = host.nodes();
  for (int trial = 0; trial < 200; ++trial) {
    OperatorMatrix t(3, SpaceTag::D(BaseNorm::lp(1.0)));
    for (double& v : t.entries) v = rng.uniform(-1, 1);
    int m = rng.uniform_int(2, 8);
    std::vector<Node> block;
    std::vector<double> lambda, mu;
    for (int j = 0; j < m; ++j) {
      block.push_back(nodes[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(nodes.size()) - 1))]);
      lambda.push_back(rng.uniform(0, 2));
      mu.push_back(rng.uniform(0, 2));
    }
    auto hi = select_signs(t, block, lambda, mu, SignMode::AtLeastAverage);
    auto lo = select_signs(t, block, lambda, mu, SignMode::AtMostAverage);
    fail(hi.value >= hi.average - 1e-12, "at-least mode fell below the average");
    fail(lo.value <= lo.average + 1e-12, "at-most mode rose above the average");
    if (m <= 4) {
      // exhaustive evaluation over all sign patterns
      auto value_of = [&](const std::vector<int>& signs) {
        double v = 0;
        for (int j = 0; j < m; ++j) {
          for (int l = 0; l < m; ++l) {
            v += signs[static_cast<std::size_t>(j)] * signs[static_cast<std::size_t>(l)] *
                 lambda[static_cast<std::size_t>(j)] * mu[static_cast<std::size_t>(l)] *
                 t.at(host.index_of(block[static_cast<std::size_t>(l)]),
                      host.index_of(block[static_cast<std::size_t>(j)]));
          }
        }
        return v;
      };
      double brute_max = -1e300, brute_min = 1e300, brute_avg = 0;
      std::vector<int> signs(static_cast<std::size_t>(m));
      for (int mask = 0; mask < (1 << m); ++mask) {
        for (int b = 0; b < m; ++b) signs[static_cast<std::size_t>(b)] = (mask >> b & 1) ? 1 : -1;
        double v = value_of(signs);
        brute_max = std::max(brute_max, v);
        brute_min = std::min(brute_min, v);
        brute_avg += v;
      }
      brute_avg /= static_cast<double>(1 << m);
      fail(std::abs(brute_avg - hi.average) <= 1e-12, "closed-form average off the exhaustive one");
      fail(std::abs(value_of(hi.signs) - hi.value) <= 1e-12, "reported value off its own pattern");
      fail(hi.value <= brute_max + 1e-12 && lo.value >= brute_min - 1e-12,
           "greedy left the exhaustive range");
      if (m == 2) {
        fail(std::abs(hi.value - brute_max) <= 1e-12, "two-node block missed the exhaustive maximum");
        fail(std::abs(lo.value - brute_min) <= 1e-12, "two-node block missed the exhaustive minimum");
      }
    }
  }
  res.pass = !fail.failed;
  res.detail = fail.failed ? fail.reason : "200 blocks, exhaustive agreement up to four nodes";
  return res;
}

// 9. The diagonalisation pipeline at desk scale.
CriterionResult criterion_factorization(std::uint64_t seed) {
  CriterionResult res{9, "identity-factorisation", false, 0, ""};
  Failure fail;
  const double delta = 0.5, eta = 0.5;
  auto d1 = SpaceTag::D(BaseNorm::lp(1.0));

  // (a) diagonal operators
  for (int trial = 0; trial < 5; ++trial) {
    Rng rng(mix_u64(seed, 900 + static_cast<std::uint64_t>(trial)));
    OperatorMatrix t(4, d1);
    for (std::size_t i = 0; i < t.dim(); ++i) t.at(i, i) = rng.uniform(delta, 2.0);
    auto cert = diagonalize_D(t, delta, eta, 2);
    fail(cert.output_depth == 2, "diagonal run fell short of output depth 2");
    fail(cert.residual <= 1e-10, "diagonal residual " + fmt(cert.residual));
    fail(cert.norm_product_bound <= 1.0 / delta + 1e-6,
         "diagonal norm product " + fmt(cert.norm_product_bound));
  }

  // (b) perturbed diagonals over three host depths
  std::vector<std::vector<double>> residuals(3);
  for (int s = 0; s < 20; ++s) {
    for (int hi = 0; hi < 3; ++hi) {
      int host = 4 + hi;
      Rng rng(mix_u64(seed, 950 + static_cast<std::uint64_t>(s)));
      OperatorMatrix t(host, d1);
      for (std::size_t i = 0; i < t.dim(); ++i) t.at(i, i) = rng.uniform(delta, 2.0);
      double eps = delta / (100.0 * static_cast<double>(t.dim()));
      for (std::size_t i = 0; i < t.dim(); ++i) {
        for (std::size_t j = 0; j < t.dim(); ++j) t.at(i, j) += eps * rng.uniform(-1, 1);
      }
      auto cert = diagonalize_D(t, delta * (1.0 - 2.0 * eps), eta, 2);
      fail(cert.invertible, "perturbed run is not invertible");
      residuals[static_cast<std::size_t>(hi)].push_back(cert.residual);
      fail(cert.residual <= 0.05,
           "perturbed residual " + fmt(cert.residual) + " at host depth " + std::to_string(host));
      fail(cert.norm_product_bound <= (1.0 + eta) / delta + 1e-9,
           "perturbed norm product " + fmt(cert.norm_product_bound));
    }
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  double m4 = median(residuals[0]), m5 = median(residuals[1]), m6 = median(residuals[2]);
  fail(m5 <= m4 + 1e-12 && m6 <= m5 + 1e-12,
       "median residuals not non-increasing: " + fmt(m4) + ", " + fmt(m5) + ", " + fmt(m6));
  res.pass = !fail.failed;
  res.detail = fail.failed
                   ? fail.reason
                   : "medians across hosts 4/5/6: " + fmt(m4) + ", " + fmt(m5) + ", " + fmt(m6);
  return res;
}

// 10. The diagonal dichotomy harness on random operators.
CriterionResult criterion_maxideal(std::uint64_t seed) {
  CriterionResult res{10, "diagonal-dichotomy", false, 0, ""};
  Failure fail;
  auto d1 = SpaceTag::D(BaseNorm::lp(1.0));
  for (int i = 0; i < 50; ++i) {
    Rng rng(mix_u64(seed, 1000 + static_cast<std::uint64_t>(i)));
    OperatorMatrix t(6, d1);
    for (std::size_t r = 0; r < t.dim(); ++r) {
      t.at(r, r) = rng.uniform(0.0, 1.0);
      for (int k = 0; k < 4; ++k) {
        t.at(static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(t.dim()) - 1)), r) +=
            0.02 * rng.uniform(-1, 1);
      }
    }
    auto rep = check_maxideal_hypotheses(t, 0.5, 2, mix_u64(seed, 2000 + static_cast<std::uint64_t>(i)));
    fail(rep.side == 1 || rep.side == 2, "no dichotomy side chosen");
    fail(rep.achieved_depth >= 0, "no blocks built");
    fail(rep.inequality_ok, "side " + std::to_string(rep.side) + " inequality failed");
  }
  res.pass = !fail.failed;
  res.detail = fail.failed ? fail.reason : "50 operators at depth 6, eta 0.5";
  return res;
}

using CriterionFn = CriterionResult (*)(std::uint64_t);

struct SuiteEntry {
  const char* suite;
  CriterionFn fn;
};

constexpr SuiteEntry kSuites[] = {
    {"norms", criterion_norm_engines},    {"norms", criterion_antichain_census},
    {"operators", criterion_embedding_operators}, {"norms", criterion_duality},
    {"norms", criterion_summability},     {"ramsey", criterion_ramsey},
    {"game", criterion_game},             {"game", criterion_signs},
    {"factorization", criterion_factorization},   {"game", criterion_maxideal},
};

}  // namespace

std::vector<CriterionResult> run_verify_suite(const std::string& suite, std::uint64_t seed) {
  bool all = suite == "all";
  bool known = all;
  for (const auto& entry : kSuites) {
    if (suite == entry.suite) known = true;
  }
  if (!known) {
    throw UnsupportedError("unknown suite: " + suite +
                           " (expected norms|operators|ramsey|game|factorization|all)");
  }
  std::vector<CriterionResult> results;
  for (const auto& entry : kSuites) {
    if (!all && suite != entry.suite) continue;
    auto start = std::chrono::steady_clock::now();
    CriterionResult r = entry.fn(seed);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    results.push_back(std::move(r));
  }
  return results;
}

bool all_passed(const std::vector<CriterionResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.pass; });
}

}  // namespace stoptime
