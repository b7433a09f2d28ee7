#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "stoptime/operators.hpp"
#include "stoptime/ramsey.hpp"
#include "stoptime/spaces.hpp"

namespace stoptime {

// One adversary turn: a tolerance and the finite families whose annihilators
// play the cofinite-dimensional subspaces on the primal and dual sides.
struct AdversaryMove {
  double eta = 0.1;
  std::vector<CoeffVector> primal_functionals;  // V_t, cutting W_t out of the primal
  std::vector<CoeffVector> dual_vectors;        // F_t, cutting G_t out of the dual
};

struct PlayerIIMove {
  std::vector<Node> nodes;  // E_t
  std::vector<double> lambda, mu;
};

struct GameTurn {
  Node source;  // the turn's node in the played truncation
  AdversaryMove adversary;
  PlayerIIMove response;
  std::vector<int> signs;
  bool success = true;
  double dist_primal = 0.0;
  double dist_dual = 0.0;
};

struct GameTranscript {
  int host_depth = 0;
  int play_depth = 0;
  SpaceTag space = SpaceTag::S(BaseNorm::lp(1.0));
  std::vector<GameTurn> turns;

  bool all_succeeded() const;
  bool singleton_unit_blocks() const;
  SubtreeEmbedding embedding() const;  // defined for singleton transcripts
};

class Adversary {
 public:
  virtual ~Adversary() = default;
  virtual AdversaryMove move(std::size_t turn_index, const GameTranscript& so_far) = 0;
  virtual std::vector<int> signs(std::size_t turn_index, const PlayerIIMove& response) = 0;
};

class EmptyAdversary final : public Adversary {
 public:
  explicit EmptyAdversary(double eta = 0.1) : eta_(eta) {}
  AdversaryMove move(std::size_t, const GameTranscript&) override;
  std::vector<int> signs(std::size_t, const PlayerIIMove& response) override;

 private:
  double eta_;
};

// one dense gaussian functional per side per turn, random signs
class SeededRandomAdversary final : public Adversary {
 public:
  SeededRandomAdversary(std::uint64_t seed, double eta, int host_depth)
      : seed_(seed), eta_(eta), host_depth_(host_depth) {}
  AdversaryMove move(std::size_t turn_index, const GameTranscript& so_far) override;
  std::vector<int> signs(std::size_t turn_index, const PlayerIIMove& response) override;

 private:
  std::uint64_t seed_;
  double eta_;
  int host_depth_;
};

class ReplayAdversary final : public Adversary {
 public:
  explicit ReplayAdversary(GameTranscript source) : source_(std::move(source)) {}
  AdversaryMove move(std::size_t turn_index, const GameTranscript&) override;
  std::vector<int> signs(std::size_t turn_index, const PlayerIIMove&) override;

 private:
  GameTranscript source_;
};

// Plays the responder strategy: walk down the branch through the mandated
// direction bit, accepting the first node beyond all previous images whose
// basis vector and coordinate functional are within eta of the adversary's
// annihilators.  Exhausting the truncation marks the turn failed (non-fatal).
GameTranscript run_rep_game(Adversary& adversary, int play_depth, int host_depth, const SpaceTag& space);

struct TranscriptCheck {
  bool primal_equivalence = false;  // blocks against the standard basis
  bool dual_equivalence = false;
  bool primal_distances = false;
  bool dual_distances = false;
  bool embedding_verified = false;
  double max_primal_ratio = 1.0, min_primal_ratio = 1.0;
  double max_dual_ratio = 1.0, min_dual_ratio = 1.0;
  double worst_primal_distance = 0.0, worst_dual_distance = 0.0;

  bool pass() const {
    return primal_equivalence && dual_equivalence && primal_distances && dual_distances;
  }
};

TranscriptCheck verify_transcript(const GameTranscript& transcript, double c_target,
                                  double eta_overall, int random_vectors = 200,
                                  std::uint64_t seed = 1);

struct SupportingBlocks {
  int side = 1;
  int achieved_depth = -1;
  SubtreeEmbedding embedding;
  std::vector<int> signs;
  std::vector<CoeffVector> x, y;  // biorthogonal blocks on the host truncation
};

// From a partition of the truncation, picks the side carrying a deep
// order-isomorphic copy and emits the signed biorthogonal basis blocks on it.
SupportingBlocks build_supporting_blocks(const Coloring& partition, int host_depth, int target_depth,
                                         const std::function<int(std::size_t)>& sign_source);

enum class SignMode { AtLeastAverage, AtMostAverage };

struct SignSelection {
  std::vector<int> signs;
  double value = 0.0;    // <Tx, y> under the chosen signs
  double average = 0.0;  // sign-average: sum_j lambda_j mu_j <T e_j, f_j>
};

// Greedy sign fixing by conditional averages, computable in closed form from
// the matrix entries; guarantees value >= average (or <=, by mode) exactly.
SignSelection select_signs(const OperatorMatrix& t, const std::vector<Node>& block_nodes,
                           const std::vector<double>& lambda, const std::vector<double>& mu,
                           SignMode mode);

struct MaxIdealReport {
  double eta = 0.0;
  double threshold = 0.0;  // eta / (1 + eta)
  int side = 1;
  int achieved_depth = -1;
  std::vector<double> block_values;    // <T x_k, y_k>
  std::vector<double> block_pairings;  // <x_k, y_k>
  bool inequality_ok = false;
};

// Walks the diagonal dichotomy: split nodes by whether the diagonal entry
// clears eta/(1+eta), build supporting blocks on the side the splitter
// returns, select signs in the mode that side dictates, and report the
// resulting inequality values.
MaxIdealReport check_maxideal_hypotheses(const OperatorMatrix& t, double eta, int target_depth,
                                         std::uint64_t seed);

}  // namespace stoptime
