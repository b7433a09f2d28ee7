#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "stoptime/errors.hpp"
#include "stoptime/game.hpp"
#include "stoptime/rng.hpp"

using namespace stoptime;

namespace {

SpaceTag s1() { return SpaceTag::S(BaseNorm::lp(1.0)); }

// plays the coordinate functionals of all previously used nodes
class UsedFunctionalsAdversary final : public Adversary {
 public:
  explicit UsedFunctionalsAdversary(int host_depth) : host_depth_(host_depth) {}
  AdversaryMove move(std::size_t, const GameTranscript& so_far) override {
    AdversaryMove m;
    m.eta = 0.05;
    for (const GameTurn& turn : so_far.turns) {
      for (const Node& s : turn.response.nodes) {
        m.primal_functionals.push_back(CoeffVector::basis(host_depth_, s));
        m.dual_vectors.push_back(CoeffVector::basis(host_depth_, s));
      }
    }
    return m;
  }
  std::vector<int> signs(std::size_t, const PlayerIIMove& response) override {
    return std::vector<int>(response.nodes.size(), -1);
  }

 private:
  int host_depth_;
};

}  // namespace

TEST_CASE("empty adversary: all distances zero, transcript verifies at C = 1") {
  EmptyAdversary adversary(0.1);
  for (auto space : {s1(), SpaceTag::B(BaseNorm::lp(1.0))}) {
    auto tr = run_rep_game(adversary, 2, 6, space);
    CHECK(tr.all_succeeded());
    for (const auto& turn : tr.turns) {
      CHECK(turn.dist_primal == 0.0);
      CHECK(turn.dist_dual == 0.0);
    }
    auto check = verify_transcript(tr, 1.0, 0.1, 100, 3);
    CHECK(check.pass());
    CHECK(check.embedding_verified);
    CHECK(check.max_primal_ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(check.min_primal_ratio == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("used-functionals adversary is annihilated exactly") {
  UsedFunctionalsAdversary adversary(7);
  auto tr = run_rep_game(adversary, 2, 7, s1());
  CHECK(tr.all_succeeded());
  for (const auto& turn : tr.turns) {
    CHECK(turn.dist_primal == 0.0);
    CHECK(turn.dist_dual == 0.0);
  }
  auto check = verify_transcript(tr, 1.0, 0.05, 100, 5);
  CHECK(check.pass());
}

TEST_CASE("random adversary at eta 0.1: turns succeed and distances re-solve") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SeededRandomAdversary adversary(seed, 0.1, 10);
    auto tr = run_rep_game(adversary, 2, 10, s1());
    CHECK(tr.all_succeeded());
    auto check = verify_transcript(tr, 1.0, 0.1, 50, seed);
    CHECK(check.pass());
    CHECK(check.worst_primal_distance <= 0.1 + 1e-9);
    CHECK(check.worst_dual_distance <= 0.1 + 1e-9);
  }
}

TEST_CASE("images are strictly increasing and branch-compatible") {
  SeededRandomAdversary adversary(42, 0.1, 9);
  auto tr = run_rep_game(adversary, 2, 9, s1());
  std::uint64_t prev = 0;
  for (const auto& turn : tr.turns) {
    std::uint64_t idx = order_index(turn.response.nodes[0]);
    CHECK(idx > prev);
    prev = idx;
    if (!turn.source.is_root()) {
      const auto& parent_image = tr.turns[order_index(turn.source.parent()) - 1].response.nodes[0];
      CHECK(is_prefix(parent_image.child(turn.source.last_bit()), turn.response.nodes[0]));
    }
  }
  CHECK(verify_embedding(tr.embedding()).ok);
}

TEST_CASE("a fabricated non-monotone node breaks the equivalence check") {
  EmptyAdversary adversary(0.1);
  auto tr = run_rep_game(adversary, 1, 4, s1());
  REQUIRE(tr.turns.size() == 3);
  // swap the two level-one images: left child image moves right of the other
  std::swap(tr.turns[1].response.nodes[0], tr.turns[2].response.nodes[0]);
  auto check = verify_transcript(tr, 1.0, 0.1, 100, 3);
  CHECK(!check.embedding_verified);
  CHECK(!check.primal_equivalence);
}

TEST_CASE("replay adversary reproduces the transcript") {
  SeededRandomAdversary original(11, 0.1, 8);
  auto tr = run_rep_game(original, 2, 8, s1());
  ReplayAdversary replay(tr);
  auto tr2 = run_rep_game(replay, 2, 8, s1());
  REQUIRE(tr2.turns.size() == tr.turns.size());
  for (std::size_t i = 0; i < tr.turns.size(); ++i) {
    CHECK(tr.turns[i].response.nodes[0] == tr2.turns[i].response.nodes[0]);
    CHECK(tr.turns[i].signs == tr2.turns[i].signs);
  }
}

TEST_CASE("game preconditions") {
  EmptyAdversary adversary;
  CHECK_THROWS_AS(run_rep_game(adversary, 3, 2, s1()), PreconditionError);
  CHECK_THROWS_AS(run_rep_game(adversary, 1, 3, SpaceTag::D(BaseNorm::lp(1.0))), PreconditionError);
  CHECK_THROWS_AS(run_rep_game(adversary, 1, 3, SpaceTag::S(BaseNorm::lp(2.0))), UnsupportedError);
}

TEST_CASE("supporting blocks: identity partition gives identity blocks") {
  Coloring everything(4);  // all nodes in class 1
  auto blocks = build_supporting_blocks(everything, 4, 2, nullptr);
  CHECK(blocks.side == 1);
  CHECK(blocks.achieved_depth == 2);
  CHECK(blocks.embedding.images == SubtreeEmbedding::identity(2).images);
  for (std::size_t k = 0; k < blocks.x.size(); ++k) {
    CHECK(pairing(blocks.x[k], blocks.y[k]) == 1.0);
  }
}

TEST_CASE("supporting blocks on the even/odd partition with adversarial signs") {
  Coloring parity(8);
  for (const Node& t : Truncation(8).nodes()) parity.set(t, t.len % 2 == 0 ? 1 : 2);
  Rng rng(5);
  auto blocks = build_supporting_blocks(parity, 8, 2, [&rng](std::size_t) { return rng.sign(); });
  CHECK(blocks.achieved_depth == 2);
  CHECK(verify_embedding(blocks.embedding).ok);
  for (std::size_t k = 0; k < blocks.x.size(); ++k) {
    // signs cancel in the pairing
    CHECK(pairing(blocks.x[k], blocks.y[k]) == 1.0);
    CHECK(norm_S(blocks.x[k], BaseNorm::lp(1.0)).value == 1.0);
  }
}

TEST_CASE("select_signs: diagonal operators give the average for any signs") {
  Rng rng(17);
  OperatorMatrix diag(3, SpaceTag::D(BaseNorm::lp(1.0)));
  for (std::size_t i = 0; i < diag.dim(); ++i) diag.at(i, i) = rng.uniform(-1, 1);
  std::vector<Node> block = {Node::from_string("0"), Node::from_string("10"), Node::from_string("11")};
  std::vector<double> lambda = {1.0, 0.5, 2.0}, mu = {1.0, 2.0, 0.5};
  auto sel = select_signs(diag, block, lambda, mu, SignMode::AtLeastAverage);
  CHECK(sel.value == doctest::Approx(sel.average).epsilon(1e-14));
}

TEST_CASE("select_signs: two-node blocks match exhaustive search") {
  OperatorMatrix t(1, SpaceTag::D(BaseNorm::lp(1.0)));
  t.at(0, 0) = 0.3;
  t.at(1, 1) = -0.2;
  t.at(1, 0) = 0.7;  // one off-diagonal coupling
  std::vector<Node> block = {Node::root(), Node::from_string("0")};
  std::vector<double> lambda = {1.0, 1.0}, mu = {1.0, 1.0};
  auto evaluate = [&](int e0, int e1) {
    double v = 0;
    std::vector<int> signs = {e0, e1};
    for (int j = 0; j < 2; ++j) {
      for (int l = 0; l < 2; ++l) {
        std::size_t col = Truncation(1).index_of(block[static_cast<std::size_t>(j)]);
        std::size_t row = Truncation(1).index_of(block[static_cast<std::size_t>(l)]);
        v += signs[static_cast<std::size_t>(j)] * signs[static_cast<std::size_t>(l)] * t.at(row, col);
      }
    }
    return v;
  };
  double best = -1e18, worst = 1e18;
  for (int e0 : {-1, 1}) {
    for (int e1 : {-1, 1}) {
      best = std::max(best, evaluate(e0, e1));
      worst = std::min(worst, evaluate(e0, e1));
    }
  }
  auto hi = select_signs(t, block, lambda, mu, SignMode::AtLeastAverage);
  auto lo = select_signs(t, block, lambda, mu, SignMode::AtMostAverage);
  CHECK(hi.value == doctest::Approx(best).epsilon(1e-14));
  CHECK(lo.value == doctest::Approx(worst).epsilon(1e-14));
}

TEST_CASE("select_signs beats the average on random instances in both modes") {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    int depth = rng.uniform_int(2, 3);
    OperatorMatrix t(depth, SpaceTag::D(BaseNorm::lp(1.0)));
    for (double& v : t.entries) v = rng.uniform(-1, 1);
    auto nodes = Truncation(depth).nodes();
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
    CHECK(hi.value >= hi.average - 1e-12);
    CHECK(lo.value <= lo.average + 1e-12);
  }
}

TEST_CASE("greedy partial values match brute-force conditional averages") {
  Rng rng(29);
  OperatorMatrix t(2, SpaceTag::D(BaseNorm::lp(1.0)));
  for (double& v : t.entries) v = rng.uniform(-1, 1);
  std::vector<Node> block = {Node::root(), Node::from_string("0"), Node::from_string("11"),
                             Node::from_string("01")};
  std::vector<double> lambda = {1, 0.7, 1.3, 0.2}, mu = {0.4, 1, 0.9, 1.5};
  auto sel = select_signs(t, block, lambda, mu, SignMode::AtLeastAverage);
  const std::size_t m = block.size();
  Truncation host(2);
  auto value_of = [&](const std::vector<int>& signs) {
    double v = 0;
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t l = 0; l < m; ++l) {
        v += signs[j] * signs[l] * lambda[j] * mu[l] * t.at(host.index_of(block[l]), host.index_of(block[j]));
      }
    }
    return v;
  };
  // conditioning on the first r greedy signs, averaging over the rest
  for (std::size_t r = 1; r <= m; ++r) {
    double brute = 0;
    int count = 0;
    std::vector<int> signs(m, 1);
    for (std::size_t j = 0; j < r; ++j) signs[j] = sel.signs[j];
    std::size_t rest = m - r;
    for (std::size_t mask = 0; mask < (std::size_t{1} << rest); ++mask) {
      for (std::size_t b = 0; b < rest; ++b) signs[r + b] = (mask >> b & 1) ? 1 : -1;
      brute += value_of(signs);
      ++count;
    }
    brute /= count;
    // closed form: average + contributions of the pairs fixed so far
    double closed = sel.average;
    for (std::size_t rr = 1; rr < r; ++rr) {
      double kappa = 0;
      for (std::size_t j = 0; j < rr; ++j) {
        kappa += sel.signs[j] * (lambda[j] * mu[rr] * t.at(host.index_of(block[rr]), host.index_of(block[j])) +
                                 lambda[rr] * mu[j] * t.at(host.index_of(block[j]), host.index_of(block[rr])));
      }
      closed += sel.signs[rr] * kappa;
    }
    CHECK(brute == doctest::Approx(closed).epsilon(1e-12));
  }
}

TEST_CASE("maximal-ideal dichotomy harness on identity, zero, and random operators") {
  auto tag = SpaceTag::D(BaseNorm::lp(1.0));
  auto id_report = check_maxideal_hypotheses(OperatorMatrix::identity(6, tag), 0.5, 2, 1);
  CHECK(id_report.side == 2);
  CHECK(id_report.inequality_ok);
  for (double v : id_report.block_values) CHECK(v >= 0.5 / 1.5 - 1e-12);

  auto zero_report = check_maxideal_hypotheses(OperatorMatrix(6, tag), 0.5, 2, 1);
  CHECK(zero_report.side == 1);
  CHECK(zero_report.inequality_ok);
  for (double v : zero_report.block_values) CHECK(std::abs(v) <= 0.5 + 1e-12);

  Rng rng(31);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    OperatorMatrix t(6, tag);
    for (std::size_t i = 0; i < t.dim(); ++i) {
      t.at(i, i) = rng.uniform(0.0, 1.0);
      for (int k = 0; k < 3; ++k) {
        t.at(static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(t.dim()) - 1)), i) +=
            0.01 * rng.uniform(-1, 1);
      }
    }
    auto rep = check_maxideal_hypotheses(t, 0.4, 2, seed);
    CHECK((rep.side == 1 || rep.side == 2));
    CHECK(rep.inequality_ok);
    CHECK(rep.achieved_depth >= 0);
  }
}

TEST_CASE("the game also runs on the branch space and on sup-norm bases") {
  for (auto space : {SpaceTag::B(BaseNorm::lp(1.0)),
                     SpaceTag::S(BaseNorm::lp(std::numeric_limits<double>::infinity()))}) {
    SeededRandomAdversary adversary(3, 0.2, 8);
    auto tr = run_rep_game(adversary, 1, 8, space);
    auto check = verify_transcript(tr, 1.0, 0.2, 100, 3);
    for (const auto& turn : tr.turns) {
      if (turn.success) {
        CHECK(std::max(turn.dist_primal, turn.dist_dual) <= 0.2 + 1e-9);
      }
    }
    CHECK(check.embedding_verified);
    CHECK(check.primal_equivalence);
    CHECK(check.dual_equivalence);
  }
}

TEST_CASE("incomplete transcripts are rejected by the verifier") {
  EmptyAdversary adversary(0.1);
  auto tr = run_rep_game(adversary, 1, 4, s1());
  tr.turns.pop_back();
  CHECK_THROWS_AS(verify_transcript(tr, 1.0, 0.1, 10, 1), PreconditionError);
  CHECK_THROWS_AS(tr.embedding(), PreconditionError);
}
