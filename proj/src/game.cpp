#include "stoptime/game.hpp"

#include <algorithm>
#include <cmath>

#include "stoptime/errors.hpp"
#include "stoptime/rng.hpp"

namespace stoptime {

bool GameTranscript::all_succeeded() const {
  return std::all_of(turns.begin(), turns.end(), [](const GameTurn& t) { return t.success; });
}

bool GameTranscript::singleton_unit_blocks() const {
  return std::all_of(turns.begin(), turns.end(), [](const GameTurn& t) {
    return t.response.nodes.size() == 1 && t.response.lambda.size() == 1 &&
           t.response.lambda[0] == 1.0 && t.response.mu[0] == 1.0;
  });
}

SubtreeEmbedding GameTranscript::embedding() const {
  if (turns.size() != Truncation(play_depth).node_count()) {
    throw PreconditionError("transcript turn count does not match the played truncation");
  }
  SubtreeEmbedding e;
  e.source_depth = play_depth;
  e.images.reserve(turns.size());
  for (const GameTurn& t : turns) {
    if (t.response.nodes.size() != 1) {
      throw PreconditionError("transcript does not consist of singleton blocks");
    }
    e.images.push_back(t.response.nodes[0]);
  }
  return e;
}

AdversaryMove EmptyAdversary::move(std::size_t, const GameTranscript&) {
  AdversaryMove m;
  m.eta = eta_;
  return m;
}

std::vector<int> EmptyAdversary::signs(std::size_t, const PlayerIIMove& response) {
  return std::vector<int>(response.nodes.size(), 1);
}

AdversaryMove SeededRandomAdversary::move(std::size_t turn_index, const GameTranscript&) {
  Rng rng(mix_u64(seed_, 2 * turn_index));
  AdversaryMove m;
  m.eta = eta_;
  CoeffVector v(host_depth_), f(host_depth_);
  for (double& e : v.entries) e = rng.normal();
  for (double& e : f.entries) e = rng.normal();
  m.primal_functionals.push_back(std::move(v));
  m.dual_vectors.push_back(std::move(f));
  return m;
}

std::vector<int> SeededRandomAdversary::signs(std::size_t turn_index, const PlayerIIMove& response) {
  Rng rng(mix_u64(seed_, 2 * turn_index + 1));
  std::vector<int> out(response.nodes.size());
  for (int& s : out) s = rng.sign();
  return out;
}

AdversaryMove ReplayAdversary::move(std::size_t turn_index, const GameTranscript&) {
  if (turn_index >= source_.turns.size()) {
    throw PreconditionError("replay adversary ran out of recorded turns");
  }
  return source_.turns[turn_index].adversary;
}

std::vector<int> ReplayAdversary::signs(std::size_t turn_index, const PlayerIIMove& response) {
  const auto& recorded = source_.turns[turn_index].signs;
  if (recorded.size() == response.nodes.size()) return recorded;
  return std::vector<int>(response.nodes.size(), 1);
}

namespace {

struct GameKinds {
  PolyhedralKind primal;
  PolyhedralKind dual;
};

GameKinds game_kinds(const SpaceTag& space) {
  if (space.family != SpaceTag::Family::S && space.family != SpaceTag::Family::B) {
    throw PreconditionError("run_rep_game: space must be an antichain or branch space");
  }
  PolyhedralKind primal = polyhedral_kind(space);
  if (primal == PolyhedralKind::None) {
    throw UnsupportedError("run_rep_game: no distance engine for base '" + space.base.name() + "'");
  }
  return {primal, polyhedral_dual(primal)};
}

}  // namespace

GameTranscript run_rep_game(Adversary& adversary, int play_depth, int host_depth, const SpaceTag& space) {
  if (host_depth < play_depth) {
    throw PreconditionError("run_rep_game: host depth must be at least the play depth");
  }
  GameKinds kinds = game_kinds(space);
  GameTranscript tr;
  tr.host_depth = host_depth;
  tr.play_depth = play_depth;
  tr.space = space;

  const auto sources = Truncation(play_depth).nodes();
  std::uint64_t prior_max = 0;

  for (std::size_t i = 0; i < sources.size(); ++i) {
    const Node& t = sources[i];
    GameTurn turn;
    turn.source = t;
    turn.adversary = adversary.move(i, tr);
    const double eta = turn.adversary.eta;

    auto score_of = [&](const Node& s, double& d1, double& d2) {
      d1 = distance_to_annihilator_kind(CoeffVector::basis(host_depth, s),
                                        turn.adversary.primal_functionals, kinds.primal)
               .value;
      d2 = distance_to_annihilator_kind(CoeffVector::basis(host_depth, s),
                                        turn.adversary.dual_vectors, kinds.dual)
               .value;
      return std::max(d1, d2);
    };

    Node cur = Node::root();
    if (!t.is_root()) {
      const Node& parent_image =
          tr.turns[static_cast<std::size_t>(order_index(t.parent()) - 1)].response.nodes[0];
      cur = parent_image.child(t.last_bit());
    }

    bool found = false;
    Node chosen = cur;
    double chosen_d1 = 0.0, chosen_d2 = 0.0;
    double best_score = std::numeric_limits<double>::infinity();
    double d1 = 0.0, d2 = 0.0;
    double cur_score = score_of(cur, d1, d2);
    while (true) {
      if (order_index(cur) > prior_max) {
        if (cur_score <= eta) {
          chosen = cur;
          chosen_d1 = d1;
          chosen_d2 = d2;
          found = true;
          break;
        }
        if (cur_score < best_score) {
          best_score = cur_score;
          chosen = cur;
          chosen_d1 = d1;
          chosen_d2 = d2;
        }
      }
      if (cur.len >= host_depth) break;
      double l1v = 0.0, l2v = 0.0, r1v = 0.0, r2v = 0.0;
      double left = score_of(cur.child(0), l1v, l2v);
      double right = score_of(cur.child(1), r1v, r2v);
      if (left <= right) {
        cur = cur.child(0);
        cur_score = left;
        d1 = l1v;
        d2 = l2v;
      } else {
        cur = cur.child(1);
        cur_score = right;
        d1 = r1v;
        d2 = r2v;
      }
    }
    if (!found && best_score == std::numeric_limits<double>::infinity()) {
      // nothing admissible on the walked branch; record the endpoint honestly
      chosen = cur;
      chosen_d1 = d1;
      chosen_d2 = d2;
    }

    turn.success = found;
    turn.response.nodes = {chosen};
    turn.response.lambda = {1.0};
    turn.response.mu = {1.0};
    turn.dist_primal = chosen_d1;
    turn.dist_dual = chosen_d2;
    turn.signs = adversary.signs(i, turn.response);
    prior_max = std::max(prior_max, order_index(chosen));
    tr.turns.push_back(std::move(turn));
  }
  return tr;
}

namespace {

CoeffVector block_vector(const GameTurn& turn, int host_depth, bool dual_side) {
  CoeffVector out(host_depth);
  const auto& weights = dual_side ? turn.response.mu : turn.response.lambda;
  for (std::size_t j = 0; j < turn.response.nodes.size(); ++j) {
    double sign = j < turn.signs.size() ? static_cast<double>(turn.signs[j]) : 1.0;
    out.set(turn.response.nodes[j], sign * weights[j]);
  }
  return out;
}

}  // namespace

TranscriptCheck verify_transcript(const GameTranscript& transcript, double c_target,
                                  double eta_overall, int random_vectors, std::uint64_t seed) {
  GameKinds kinds = game_kinds(transcript.space);
  if (transcript.turns.size() != Truncation(transcript.play_depth).node_count()) {
    throw PreconditionError("verify_transcript: transcript is not complete");
  }
  TranscriptCheck check;

  // distances re-solved per turn against the recorded families
  check.primal_distances = true;
  check.dual_distances = true;
  for (const GameTurn& turn : transcript.turns) {
    double eta = std::min(turn.adversary.eta, eta_overall);
    CoeffVector b = block_vector(turn, transcript.host_depth, false);
    CoeffVector bstar = block_vector(turn, transcript.host_depth, true);
    double dp = distance_to_annihilator_kind(b, turn.adversary.primal_functionals, kinds.primal).value;
    double dd = distance_to_annihilator_kind(bstar, turn.adversary.dual_vectors, kinds.dual).value;
    check.worst_primal_distance = std::max(check.worst_primal_distance, dp);
    check.worst_dual_distance = std::max(check.worst_dual_distance, dd);
    if (dp > eta + 1e-9) check.primal_distances = false;
    if (dd > eta + 1e-9) check.dual_distances = false;
  }

  // block sequences against the standard basis on random coefficient vectors
  bool structural = transcript.singleton_unit_blocks();
  if (structural) {
    check.embedding_verified = verify_embedding(transcript.embedding()).ok;
  }
  Rng rng(seed);
  const std::size_t play_count = Truncation(transcript.play_depth).node_count();
  for (int probe = 0; probe < random_vectors; ++probe) {
    CoeffVector play(transcript.play_depth);
    for (double& v : play.entries) v = rng.uniform(-1.0, 1.0);
    CoeffVector host_primal(transcript.host_depth), host_dual(transcript.host_depth);
    for (std::size_t i = 0; i < play_count; ++i) {
      const GameTurn& turn = transcript.turns[i];
      for (std::size_t j = 0; j < turn.response.nodes.size(); ++j) {
        double sign = j < turn.signs.size() ? static_cast<double>(turn.signs[j]) : 1.0;
        const Node& s = turn.response.nodes[j];
        host_primal.set(s, host_primal.at(s) + play.entries[i] * sign * turn.response.lambda[j]);
        host_dual.set(s, host_dual.at(s) + play.entries[i] * sign * turn.response.mu[j]);
      }
    }
    double ref_primal = polyhedral_norm(kinds.primal, play).value;
    double ref_dual = polyhedral_norm(kinds.dual, play).value;
    if (ref_primal > 1e-12) {
      double r = polyhedral_norm(kinds.primal, host_primal).value / ref_primal;
      check.max_primal_ratio = std::max(check.max_primal_ratio, r);
      check.min_primal_ratio = std::min(check.min_primal_ratio, r);
    }
    if (ref_dual > 1e-12) {
      double r = polyhedral_norm(kinds.dual, host_dual).value / ref_dual;
      check.max_dual_ratio = std::max(check.max_dual_ratio, r);
      check.min_dual_ratio = std::min(check.min_dual_ratio, r);
    }
  }
  double hi = std::sqrt(c_target) * (1.0 + 1e-12) + 1e-12;
  double lo = (1.0 / std::sqrt(c_target)) * (1.0 - 1e-12) - 1e-12;
  check.primal_equivalence = check.max_primal_ratio <= hi && check.min_primal_ratio >= lo;
  check.dual_equivalence = check.max_dual_ratio <= hi && check.min_dual_ratio >= lo;
  if (structural && !check.embedding_verified) {
    check.primal_equivalence = false;
    check.dual_equivalence = false;
  }
  return check;
}

SupportingBlocks build_supporting_blocks(const Coloring& partition, int host_depth, int target_depth,
                                         const std::function<int(std::size_t)>& sign_source) {
  if (partition.depth != host_depth) {
    throw PreconditionError("build_supporting_blocks: partition lives on the wrong truncation");
  }
  auto split = split_partition(partition, target_depth);
  SupportingBlocks out;
  out.side = split.color;
  out.achieved_depth = split.achieved_depth;
  out.embedding = split.embedding;
  const std::size_t m = split.embedding.images.size();
  out.signs.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    int sign = sign_source ? sign_source(j) : 1;
    const Node& s = split.embedding.images[j];
    CoeffVector xk(host_depth), yk(host_depth);
    xk.set(s, static_cast<double>(sign));
    yk.set(s, static_cast<double>(sign));
    out.signs.push_back(sign);
    out.x.push_back(std::move(xk));
    out.y.push_back(std::move(yk));
  }
  return out;
}

SignSelection select_signs(const OperatorMatrix& t, const std::vector<Node>& block_nodes,
                           const std::vector<double>& lambda, const std::vector<double>& mu,
                           SignMode mode) {
  const std::size_t m = block_nodes.size();
  if (lambda.size() != m || mu.size() != m) {
    throw PreconditionError("select_signs: weight lists must match the block support");
  }
  Truncation host(t.depth);
  std::vector<std::size_t> idx(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (!host.contains(block_nodes[j])) {
      throw PreconditionError("select_signs: block node outside the truncation");
    }
    idx[j] = host.index_of(block_nodes[j]);
  }
  // c[j][l] = lambda_j mu_l <T e_j, f_l>
  std::vector<double> c(m * m);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t l = 0; l < m; ++l) c[j * m + l] = lambda[j] * mu[l] * t.at(idx[l], idx[j]);
  }
  SignSelection sel;
  sel.signs.assign(m, 1);
  for (std::size_t j = 0; j < m; ++j) sel.average += c[j * m + j];
  for (std::size_t r = 1; r < m; ++r) {
    double kappa = 0.0;
    for (std::size_t j = 0; j < r; ++j) {
      kappa += sel.signs[j] * (c[j * m + r] + c[r * m + j]);
    }
    bool positive = kappa >= 0.0;
    sel.signs[r] = (mode == SignMode::AtLeastAverage) == positive ? 1 : -1;
  }
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t l = 0; l < m; ++l) {
      sel.value += sel.signs[j] * sel.signs[l] * c[j * m + l];
    }
  }
  return sel;
}

MaxIdealReport check_maxideal_hypotheses(const OperatorMatrix& t, double eta, int target_depth,
                                         std::uint64_t seed) {
  MaxIdealReport report;
  report.eta = eta;
  report.threshold = eta / (1.0 + eta);
  Coloring partition(t.depth);
  Truncation host(t.depth);
  for (const Node& node : host.nodes()) {
    std::size_t i = host.index_of(node);
    partition.set(node, t.at(i, i) <= report.threshold ? 1 : 2);
  }
  Rng rng(seed);
  auto blocks = build_supporting_blocks(partition, t.depth, target_depth,
                                        [&rng](std::size_t) { return rng.sign(); });
  report.side = blocks.side;
  report.achieved_depth = blocks.achieved_depth;

  SignMode mode = blocks.side == 2 ? SignMode::AtLeastAverage : SignMode::AtMostAverage;
  report.inequality_ok = true;
  for (std::size_t k = 0; k < blocks.x.size(); ++k) {
    const Node& s = blocks.embedding.images[k];
    auto sel = select_signs(t, {s}, {1.0}, {1.0}, mode);
    double value = sel.value;
    double pair = pairing(blocks.x[k], blocks.y[k]);
    report.block_values.push_back(value);
    report.block_pairings.push_back(pair);
    if (blocks.side == 2) {
      if (!(value >= report.threshold - 1e-12)) report.inequality_ok = false;
    } else {
      if (!(value <= report.threshold * pair + 1e-12 && value <= eta + 1e-12)) {
        report.inequality_ok = false;
      }
    }
  }
  return report;
}

}  // namespace stoptime
