#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "stoptime/errors.hpp"
#include "stoptime/json_io.hpp"
#include "stoptime/verify.hpp"

namespace {

using nlohmann::json;
using namespace stoptime;

constexpr const char* kVersion = "0.1.0";

// exit codes: 0 success, 2 input error, 3 precondition error, 4 suite failure
constexpr int kOk = 0;
constexpr int kInputError = 2;
constexpr int kPreconditionError = 3;
constexpr int kSuiteFailure = 4;

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

std::string digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnsupportedError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a_hex(buf.str());
}

struct ReportClock {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
};

json base_report(const std::string& command, const std::string& digest, std::uint64_t seed) {
  return json{{"command", command},
              {"version", kVersion},
              {"seed", seed},
              {"inputs_digest", digest},
              {"outputs", json::object()}};
}

void emit_report(json report, const ReportClock& clock) {
  report["timing_ms"] = clock.ms();
  std::cout << "report: " << report.dump() << "\n";
}

json nodes_to_json(const std::vector<Node>& nodes) {
  json arr = json::array();
  for (const Node& t : nodes) arr.push_back(t.to_string());
  return arr;
}

int cmd_norm(const std::string& file, const std::string& space, const std::string& base_text,
             bool with_witness) {
  ReportClock clock;
  json payload = load_json_file(file);
  CoeffVector x = coeff_from_json(payload);
  BaseNorm base = base_norm_from_cli(base_text);
  json report = base_report("norm", digest_file(file), 0);
  double value = 0.0;
  std::vector<Node> witness;
  if (space == "S") {
    auto res = norm_S(x, base);
    value = res.value;
    witness = res.witness;
  } else if (space == "B") {
    auto res = norm_B(x, base);
    value = res.value;
    witness = res.witness;
  } else if (space == "D") {
    auto res = dual_norm_D(x, base);
    if (!res.converged) {
      report["outputs"]["gap"] = res.value - res.lower_bound;
      report["outputs"]["iterations"] = res.iterations;
      std::cerr << "column generation did not converge; gap " << res.value - res.lower_bound << "\n";
      emit_report(report, clock);
      return kSuiteFailure;
    }
    value = res.value;
    witness = res.witness;
  } else {
    throw UnsupportedError("space must be one of S, B, D; got: " + space);
  }
  std::cout << "value " << value << "\n";
  report["outputs"]["value"] = value;
  if (with_witness) {
    std::cout << "witness";
    for (const Node& t : witness) std::cout << " \"" << t.to_string() << "\"";
    std::cout << "\n";
    report["outputs"]["witness"] = nodes_to_json(witness);
  }
  emit_report(report, clock);
  return kOk;
}

int cmd_factorize(const std::string& file, double delta, double eta, int out_depth,
                  const std::string& out_path, double residual_tol) {
  ReportClock clock;
  OperatorMatrix t = operator_from_json(load_json_file(file));
  auto cert = diagonalize_D(t, delta, eta, out_depth);
  write_json_file(out_path, certificate_to_json(cert));
  json report = base_report("factorize", digest_file(file), 0);
  report["outputs"] = {{"residual", cert.residual},
                       {"residual_exact", cert.residual_exact},
                       {"norm_product_bound", cert.norm_product_bound},
                       {"output_depth", cert.output_depth},
                       {"invertible", cert.invertible},
                       {"neumann_ok", cert.neumann_ok},
                       {"certificate", out_path}};
  std::cout << "residual " << cert.residual << "\n";
  std::cout << "norm_product_bound " << cert.norm_product_bound << "\n";
  std::cout << "certificate written to " << out_path << "\n";
  emit_report(report, clock);
  return cert.invertible && cert.residual <= residual_tol ? kOk : kSuiteFailure;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, const std::string& json_path) {
  ReportClock clock;
  auto results = run_verify_suite(suite, seed);
  json rows = json::array();
  for (const auto& r : results) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << " " << r.name << " (" << r.seconds
              << "s) " << r.detail << "\n";
    rows.push_back(json{{"id", r.id},
                        {"name", r.name},
                        {"pass", r.pass},
                        {"seconds", r.seconds},
                        {"detail", r.detail}});
  }
  bool ok = all_passed(results);
  json report = base_report("verify", "-", seed);
  report["outputs"] = {{"suite", suite}, {"pass", ok}, {"criteria", rows}};
  if (!json_path.empty()) write_json_file(json_path, report);
  std::cout << (ok ? "VERIFY PASS" : "VERIFY FAIL") << " (" << results.size() << " criteria)\n";
  emit_report(report, clock);
  return ok ? kOk : kSuiteFailure;
}

int cmd_game(std::uint64_t seed, int host_depth, int play_depth, double eta,
             const std::string& adversary_kind, const std::string& replay_path,
             const std::string& out_path) {
  ReportClock clock;
  SpaceTag space = SpaceTag::S(BaseNorm::lp(1.0));
  GameTranscript tr;
  if (adversary_kind == "random") {
    SeededRandomAdversary adversary(seed, eta, host_depth);
    tr = run_rep_game(adversary, play_depth, host_depth, space);
  } else if (adversary_kind == "empty") {
    EmptyAdversary adversary(eta);
    tr = run_rep_game(adversary, play_depth, host_depth, space);
  } else if (adversary_kind == "replay") {
    if (replay_path.empty()) throw UnsupportedError("--replay <transcript.json> required");
    ReplayAdversary adversary(transcript_from_json(load_json_file(replay_path)));
    tr = run_rep_game(adversary, play_depth, host_depth, space);
  } else {
    throw UnsupportedError("adversary must be random, empty, or replay");
  }
  auto check = verify_transcript(tr, 1.0, eta, 200, seed);
  if (!out_path.empty()) write_json_file(out_path, transcript_to_json(tr));
  json report = base_report("game", replay_path.empty() ? "-" : digest_file(replay_path), seed);
  report["outputs"] = {{"all_turns_succeeded", tr.all_succeeded()},
                       {"verified", check.pass()},
                       {"worst_primal_distance", check.worst_primal_distance},
                       {"worst_dual_distance", check.worst_dual_distance},
                       {"transcript", out_path}};
  std::cout << (tr.all_succeeded() ? "all turns succeeded" : "some turns failed") << "\n";
  std::cout << (check.pass() ? "transcript verified" : "transcript verification failed") << "\n";
  emit_report(report, clock);
  return tr.all_succeeded() && check.pass() ? kOk : kSuiteFailure;
}

int cmd_ramsey(const std::string& file, int target_depth, const std::string& out_path) {
  ReportClock clock;
  Coloring coloring = coloring_from_json(load_json_file(file));
  auto res = find_monochromatic_subtree(coloring, target_depth);
  json out = {{"color", res.color},
              {"achieved_depth", res.achieved_depth},
              {"budget_exhausted", res.budget_exhausted},
              {"embedding", embedding_to_json(res.embedding)}};
  if (!out_path.empty()) write_json_file(out_path, out);
  json report = base_report("ramsey", digest_file(file), 0);
  report["outputs"] = {{"color", res.color}, {"achieved_depth", res.achieved_depth}};
  std::cout << "color " << res.color << "\n";
  std::cout << "achieved_depth " << res.achieved_depth << "\n";
  emit_report(report, clock);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stopping-time space laboratory"};
  app.require_subcommand(1);

  std::string norm_file, norm_space = "S", norm_base = "lp:1";
  bool norm_witness = false;
  auto* norm_cmd = app.add_subcommand("norm", "evaluate a norm from a coefficient vector file");
  norm_cmd->add_option("file", norm_file, "CoeffVector JSON")->required();
  norm_cmd->add_option("--space", norm_space, "S, B, or D")->required();
  norm_cmd->add_option("--base", norm_base, "base norm, e.g. lp:1, lp:2, lp:inf");
  norm_cmd->add_flag("--witness", norm_witness, "print the optimal antichain/branch");

  std::string fact_file, fact_out = "certificate.json";
  double fact_delta = 0.0, fact_eta = 0.5, fact_tol = 0.05;
  int fact_depth = 2;
  auto* fact_cmd = app.add_subcommand("factorize", "factor the identity through an operator");
  fact_cmd->add_option("file", fact_file, "OperatorMatrix JSON")->required();
  fact_cmd->add_option("--delta", fact_delta, "diagonal lower bound")->required();
  fact_cmd->add_option("--eta", fact_eta, "norm-product slack")->required();
  fact_cmd->add_option("--out-depth", fact_depth, "output truncation depth")->required();
  fact_cmd->add_option("--out", fact_out, "certificate path");
  fact_cmd->add_option("--residual-tol", fact_tol, "success threshold on the residual");

  std::string verify_suite = "all", verify_json;
  std::uint64_t verify_seed = 0;
  auto* verify_cmd = app.add_subcommand("verify", "run the verification suites");
  verify_cmd->add_option("--suite", verify_suite, "norms|operators|ramsey|game|factorization|all");
  verify_cmd->add_option("--seed", verify_seed, "suite seed")->required();
  verify_cmd->add_option("--json", verify_json, "write the machine-readable summary here");

  std::uint64_t game_seed = 0;
  int game_host = 10, game_play = 2;
  double game_eta = 0.1;
  std::string game_adversary = "random", game_replay, game_out;
  auto* game_cmd = app.add_subcommand("game", "run a reproducibility game");
  game_cmd->add_option("--seed", game_seed, "game seed")->required();
  game_cmd->add_option("--host-depth", game_host, "host truncation depth");
  game_cmd->add_option("--play-depth", game_play, "played truncation depth");
  game_cmd->add_option("--eta", game_eta, "per-turn tolerance");
  game_cmd->add_option("--adversary", game_adversary, "random|empty|replay");
  game_cmd->add_option("--replay", game_replay, "transcript to replay");
  game_cmd->add_option("--out", game_out, "write the transcript here");

  std::string ramsey_file, ramsey_out;
  int ramsey_target = 2;
  auto* ramsey_cmd = app.add_subcommand("ramsey", "search a coloring for a monochromatic subtree");
  ramsey_cmd->add_option("file", ramsey_file, "Coloring JSON")->required();
  ramsey_cmd->add_option("--target-depth", ramsey_target, "requested copy depth")->required();
  ramsey_cmd->add_option("--out", ramsey_out, "write the search result here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*norm_cmd) return cmd_norm(norm_file, norm_space, norm_base, norm_witness);
    if (*fact_cmd) return cmd_factorize(fact_file, fact_delta, fact_eta, fact_depth, fact_out, fact_tol);
    if (*verify_cmd) return cmd_verify(verify_suite, verify_seed, verify_json);
    if (*game_cmd)
      return cmd_game(game_seed, game_host, game_play, game_eta, game_adversary, game_replay, game_out);
    if (*ramsey_cmd) return cmd_ramsey(ramsey_file, ramsey_target, ramsey_out);
  } catch (const PreconditionError& e) {
    std::cerr << "precondition error: " << e.what() << "\n";
    return kPreconditionError;
  } catch (const UnsupportedError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
