#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "stoptime/errors.hpp"
#include "stoptime/factorization.hpp"
#include "stoptime/rng.hpp"

using namespace stoptime;

namespace {

SpaceTag d1() { return SpaceTag::D(BaseNorm::lp(1.0)); }

OperatorMatrix random_diagonal(int depth, double lo, double hi, Rng& rng) {
  OperatorMatrix t(depth, d1());
  for (std::size_t i = 0; i < t.dim(); ++i) t.at(i, i) = rng.uniform(lo, hi);
  return t;
}

OperatorMatrix perturbed(const OperatorMatrix& diag, double eps, Rng& rng) {
  OperatorMatrix t = diag;
  for (std::size_t i = 0; i < t.dim(); ++i) {
    for (std::size_t j = 0; j < t.dim(); ++j) {
      t.at(i, j) += eps * rng.uniform(-1.0, 1.0);
    }
  }
  return t;
}

// entrywise check of A T B against the identity on the output block
double residual_by_dense_multiplication(const FactorisationCertificate& cert,
                                        const OperatorMatrix& t) {
  OperatorMatrix atb = cert.a.compose(t.compose(cert.b));
  std::size_t m = Truncation(cert.output_depth).node_count();
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      worst = std::max(worst, std::abs(atb.at(i, j) - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("sign_normalize worked examples") {
  auto id = OperatorMatrix::identity(2, d1());
  auto [same, signs_id] = sign_normalize(id);
  CHECK(same.entries == id.entries);
  CHECK(std::all_of(signs_id.begin(), signs_id.end(), [](int s) { return s == 1; }));

  auto neg = OperatorMatrix::scaled_identity(2, d1(), -1.0);
  auto [flipped, signs_neg] = sign_normalize(neg);
  CHECK(flipped.entries == id.entries);
  CHECK(std::all_of(signs_neg.begin(), signs_neg.end(), [](int s) { return s == -1; }));

  Rng rng(51);
  OperatorMatrix t(2, d1());
  for (double& v : t.entries) v = rng.uniform(-1, 1);
  for (std::size_t i = 0; i < t.dim(); ++i) t.at(i, i) = rng.uniform(0.2, 1.0) * rng.sign();
  auto [tn, signs] = sign_normalize(t);
  for (std::size_t i = 0; i < t.dim(); ++i) {
    CHECK(tn.at(i, i) == std::abs(t.at(i, i)));
  }
  (void)signs;

  OperatorMatrix zero_diag(1, d1());
  CHECK_THROWS_AS(sign_normalize(zero_diag), PreconditionError);
}

TEST_CASE("splice: diagonal operators decouple immediately") {
  Rng rng(52);
  auto t = random_diagonal(4, 0.5, 2.0, rng);
  auto res = splice_subtrees(t, Node::root(), {Node::from_string("0"), Node::from_string("1")}, 0.01,
                             100000);
  CHECK(res.achieved == 0.0);
  CHECK(res.exact);
  CHECK(res.roots[0] == Node::from_string("0"));
  CHECK(res.roots[1] == Node::from_string("1"));
}

TEST_CASE("splice: a rank-one noise row is dodged by descending") {
  // identity plus weight on the root row over the left subtree top
  auto t = OperatorMatrix::identity(3, d1());
  std::size_t root_row = 0;
  t.at(root_row, Truncation(3).index_of(Node::from_string("0"))) = 0.8;
  t.at(root_row, Truncation(3).index_of(Node::from_string("00"))) = 0.4;
  auto res = splice_subtrees(t, Node::root(), {Node::from_string("0"), Node::from_string("1")}, 0.05,
                             100000);
  // descending below depth 2 on the left escapes both noise entries
  CHECK(res.achieved <= 0.05);
  CHECK(is_prefix(Node::from_string("0"), res.roots[0]));
  CHECK(res.roots[0].len >= 2);
}

TEST_CASE("splice bounds decrease over repeated rounds on fixed seeds") {
  Rng rng(53);
  OperatorMatrix t(5, d1());
  for (double& v : t.entries) v = 0.05 * rng.uniform(-1, 1);
  for (std::size_t i = 0; i < t.dim(); ++i) t.at(i, i) = 1.0;
  std::vector<Node> family = {Node::from_string("0"), Node::from_string("1")};
  double prev = std::numeric_limits<double>::infinity();
  for (int round = 0; round < 3; ++round) {
    auto res = splice_subtrees(t, Node::root(), family, 0.0, 100000);
    CHECK(res.achieved <= prev + 1e-15);
    prev = res.achieved;
    family = res.roots;
  }
}

TEST_CASE("splice rejects comparable families") {
  auto t = OperatorMatrix::identity(2, d1());
  CHECK_THROWS_AS(
      splice_subtrees(t, Node::root(), {Node::from_string("0"), Node::from_string("00")}, 0.1, 1000),
      PreconditionError);
}

TEST_CASE("pick_small_node: diagonal operators yield the first admissible node") {
  Rng rng(54);
  auto t = random_diagonal(4, 0.5, 2.0, rng);
  std::vector<std::size_t> priors = {0};  // the root block
  auto res = pick_small_node(t, priors, Node::from_string("0"), 0.0, 1, 4, 100000);
  CHECK(res.valid);
  CHECK(res.met);
  CHECK(res.achieved == 0.0);
  CHECK(res.node == Node::from_string("0"));
}

TEST_CASE("pick_small_node dodges a single coupled row") {
  auto t = OperatorMatrix::identity(3, d1());
  Truncation host(3);
  // couple node (0) against the root block
  t.at(host.index_of(Node::from_string("0")), host.index_of(Node::root())) = 1.0;
  auto res = pick_small_node(t, {host.index_of(Node::root())}, Node::from_string("0"), 0.0, 1, 3,
                             100000);
  CHECK(res.valid);
  CHECK(res.met);
  CHECK(res.achieved == 0.0);
  CHECK(res.node != Node::from_string("0"));
  CHECK(is_prefix(Node::from_string("0"), res.node));
}

TEST_CASE("pick_small_node falls back to the argmin with a flag") {
  OperatorMatrix t(2, d1());
  Truncation host(2);
  for (std::size_t i = 0; i < t.dim(); ++i) {
    t.at(i, i) = 1.0;
    t.at(i, host.index_of(Node::root())) = 0.5 + 0.01 * static_cast<double>(i);
  }
  auto res = pick_small_node(t, {host.index_of(Node::root())}, Node::from_string("1"), 0.1, 1, 2,
                             100000);
  CHECK(res.valid);
  CHECK(!res.met);
  CHECK(res.achieved >= 0.5);
  CHECK(is_prefix(Node::from_string("1"), res.node));
}

TEST_CASE("scaled identity factors exactly with norm product one over the scale") {
  for (double c : {1.0, 2.0, 0.75}) {
    auto t = OperatorMatrix::scaled_identity(3, d1(), c);
    auto cert = diagonalize_D(t, std::min(c, 0.5), 0.5, 2);
    CHECK(cert.output_depth == 2);
    CHECK(cert.invertible);
    CHECK(cert.neumann_ok);
    CHECK(cert.rho == 0.0);
    CHECK(cert.residual <= 1e-12);
    CHECK(cert.residual_exact);
    CHECK(cert.norm_product_bound == doctest::Approx(1.0 / c).epsilon(1e-12));
    CHECK(residual_by_dense_multiplication(cert, t) <= 1e-12);
    CHECK(verify_embedding(cert.embedding).ok);
  }
}

TEST_CASE("diagonal operators in [delta, 2] factor with tiny residual") {
  Rng rng(55);
  const double delta = 0.5;
  for (int trial = 0; trial < 5; ++trial) {
    auto t = random_diagonal(4, delta, 2.0, rng);
    auto cert = diagonalize_D(t, delta, 0.5, 2);
    CHECK(cert.output_depth == 2);
    CHECK(cert.residual <= 1e-10);
    CHECK(cert.norm_product_bound <= 1.0 / delta + 1e-6);
    CHECK(residual_by_dense_multiplication(cert, t) <= 1e-10);
    // the compression of a diagonal operator is exactly the identity
    CHECK(cert.rho == 0.0);
  }
}

TEST_CASE("perturbed diagonals factor within the acceptance envelope") {
  Rng rng(56);
  const double delta = 0.5, eta = 0.5;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng local(seed);
    auto diag = random_diagonal(5, delta, 2.0, local);
    double eps = delta / (100.0 * static_cast<double>(diag.dim()));
    auto t = perturbed(diag, eps, local);
    auto cert = diagonalize_D(t, delta * (1.0 - 0.2), eta, 2);
    CHECK(cert.output_depth == 2);
    CHECK(cert.invertible);
    CHECK(cert.residual <= 0.05);
    CHECK(cert.norm_product_bound <= (1.0 + eta) / (delta * 0.8));
    CHECK(verify_embedding(cert.embedding).ok);
    // logged couplings agree with a recomputation over the chosen nodes
    Truncation host(t.depth);
    auto [tn, signs] = sign_normalize(t);
    (void)signs;
    for (std::size_t i = 1; i < cert.selection_log.size(); ++i) {
      const auto& log = cert.selection_log[i];
      double sum = 0.0;
      for (std::size_t u = 0; u < i; ++u) {
        sum += std::abs(tn.at(host.index_of(cert.selection_log[i].chosen),
                              host.index_of(cert.selection_log[u].chosen)));
      }
      CHECK(sum == doctest::Approx(log.coupling_sum).epsilon(1e-12));
    }
  }
  (void)rng;
}

TEST_CASE("sign normalisation commutes with the whole pipeline, exactly") {
  Rng rng(57);
  auto diag = random_diagonal(4, 0.5, 2.0, rng);
  for (std::size_t i = 0; i < diag.dim(); ++i) diag.at(i, i) *= rng.sign();
  double eps = 0.4 / (100.0 * static_cast<double>(diag.dim()));
  auto t = perturbed(diag, eps, rng);
  auto [tn, signs] = sign_normalize(t);
  (void)signs;
  auto cert1 = diagonalize_D(t, 0.4, 0.5, 2);
  auto cert2 = diagonalize_D(tn, 0.4, 0.5, 2);
  CHECK(cert1.residual == cert2.residual);
  CHECK(cert1.embedding.images == cert2.embedding.images);
}

TEST_CASE("preconditions: small diagonals and bad depths are rejected") {
  auto t = OperatorMatrix::scaled_identity(3, d1(), 0.1);
  CHECK_THROWS_AS(diagonalize_D(t, 0.5, 0.5, 2), PreconditionError);
  CHECK_THROWS_AS(diagonalize_D(OperatorMatrix::identity(2, d1()), 0.5, 0.5, 3), PreconditionError);
  CHECK_THROWS_AS(diagonalize_D(OperatorMatrix::identity(2, SpaceTag::S(BaseNorm::lp(1.0))), 0.5, 0.5, 1),
                  PreconditionError);
}

TEST_CASE("depth-zero output factors through the root alone") {
  auto t = OperatorMatrix::scaled_identity(2, d1(), 1.5);
  auto cert = diagonalize_D(t, 1.0, 0.5, 0);
  CHECK(cert.output_depth == 0);
  CHECK(cert.residual <= 1e-15);
  CHECK(cert.norm_product_bound == doctest::Approx(1.0 / 1.5));
}

TEST_CASE("overwhelming coupling marks the certificate non-invertible") {
  // every pair coupled at full strength: no node selection can decouple, the
  // measured deviation reaches one, and inversion is not attempted
  OperatorMatrix t(3, d1());
  for (double& v : t.entries) v = 1.0;
  auto cert = diagonalize_D(t, 0.5, 0.5, 2);
  CHECK(cert.neumann_violated);
  CHECK(!cert.invertible);
  CHECK(std::isinf(cert.residual));
  CHECK(!cert.neumann_ok);
}
