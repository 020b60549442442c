#ifndef SEPSTEIN_CONIC_HPP
#define SEPSTEIN_CONIC_HPP

#include "sepstein/matrix.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <vector>

namespace sepstein {

// Real conic program in standard primal form:
//   minimize    sum_k <C_k, X_k> + c_o . x_o
//   subject to  sum_k <A_ik, X_k> + a_io . x_o = b_i   (i = 1..m)
//               X_k symmetric PSD,  x_o >= 0.
// Complex Hermitian variables are real-embedded one layer above (builder.hpp).
struct ConicProblem {
  std::vector<int> psd_dims;          // one entry per PSD block
  int orthant = 0;                    // number of nonnegative scalars

  std::vector<RMat> obj_psd;          // C_k, symmetric, same order as psd_dims
  RVec obj_orth;                      // c_o (size orthant)

  // Row i of the constraint matrix: sparse over blocks.
  struct Row {
    std::vector<std::pair<int, RMat>> psd;      // (block index, symmetric coeff)
    std::vector<std::pair<int, double>> orth;   // (orthant index, coeff)
  };
  std::vector<Row> rows;
  std::vector<double> rhs;

  void validate() const;
};

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, IterLimit, Numerical };

const char* to_string(SolveStatus s);

struct SolverOptions {
  double gap_tol = 1e-8;
  double feas_tol = 1e-9;
  int max_iter = 200;
  bool record_stats = true;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Numerical;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;             // |p - d| / (1 + |p| + |d|)
  double primal_res = 0.0;
  double dual_res = 0.0;
  int iterations = 0;

  std::vector<RMat> psd_vars;   // X_k / tau
  RVec orth_vars;               // x_o / tau
  RVec dual_y;                  // y / tau
  std::vector<RMat> dual_slacks;

  // Improving-ray certificates, populated for the infeasible statuses.
  // PrimalInfeasible: y-ray with b'y = 1 and -sum y_i A_i in the dual cone.
  // DualInfeasible: cone ray with <C, ray> = -1 and A(ray) = 0.
  RVec cert_y;
  std::vector<RMat> cert_psd;
  RVec cert_orth;
  double cert_residual = 0.0;

  std::string message;

  bool ok() const { return status == SolveStatus::Optimal; }
};

SolveResult solve(const ConicProblem& p, const SolverOptions& opts = {});

// Process-wide monitoring of every solve: counts, worst certified gap and
// worst weak-duality violation. Thread-safe; used by the self-test and the
// acceptance gate. Purely observational, never read by the solver.
struct SolveStats {
  long solves = 0;
  double max_gap = 0.0;
  double max_duality_violation = 0.0;   // max(dual - primal, 0) on Optimal
  long failures = 0;                    // Numerical / IterLimit outcomes
};
SolveStats solve_stats_snapshot();
void solve_stats_reset();

nlohmann::json dump_problem(const ConicProblem& p);

}  // namespace sepstein

#endif
