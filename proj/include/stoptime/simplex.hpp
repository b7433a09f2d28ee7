#pragma once

#include <vector>

namespace stoptime {

// Small dense two-phase primal simplex with Bland's rule.  Every LP in this
// project has at most a few hundred rows, so a plain tableau is enough and
// keeps the solver dependency-free and reproducible.

enum class RowType { LE, GE, EQ };

struct LpProblem {
  int num_vars = 0;                            // all variables >= 0
  std::vector<std::vector<double>> row_coeffs; // dense, one vector per row
  std::vector<RowType> row_types;
  std::vector<double> row_rhs;
  std::vector<double> objective;
  bool maximize = false;

  void add_row(std::vector<double> coeffs, RowType type, double rhs) {
    row_coeffs.push_back(std::move(coeffs));
    row_types.push_back(type);
    row_rhs.push_back(rhs);
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit };

struct LpResult {
  LpStatus status = LpStatus::Optimal;
  double objective = 0.0;
  std::vector<double> x;
  int iterations = 0;
};

LpResult solve_lp(const LpProblem& problem, int max_iters = 50000, double eps = 1e-9);

}  // namespace stoptime
