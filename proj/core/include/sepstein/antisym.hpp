#ifndef SEPSTEIN_ANTISYM_HPP
#define SEPSTEIN_ANTISYM_HPP

#include "sepstein/protocols.hpp"

#include <cmath>
#include <vector>

namespace sepstein {

// Reference constant the gap is measured against: half a bit of log2(4/3).
inline double csw_bits() { return 0.5 * std::log2(4.0 / 3.0); }

struct AntisymRow {
  int d = 0;
  double lower_bits = 0.0;   // measured two-outcome lower bound
  double upper_bits = 0.0;   // modified-kappa upper bound
  double csw_bits = 0.0;
  bool gap_certified = false;   // upper < csw - 1e-9
  bool analytic = false;        // closed-form row beyond the solver cap

  nlohmann::json to_json() const;
  std::string csv_row() const;
  static std::string csv_header();
};

struct AntisymTable {
  std::vector<AntisymRow> rows;
  bool complete = true;
  std::string error;   // first failure, when complete is false
};

// Rows for d in [d_min, d_max]: lower via the diagonal two-outcome test
// against the exchange-symmetric family, upper via the modified kappa
// measure on the same family; both cross-checked against their closed
// forms. Dimensions past the solver cap use the closed forms directly.
AntisymTable antisym_table(int d_min, int d_max, const SolverOptions& opts = {});

struct SteinCheckRow {
  double delta = 0.0;
  double smoothed_bits = 0.0;
  double slack_lo = 0.0;   // smoothed - (exact - log2(1/(1-delta)))
  double slack_hi = 0.0;   // exact - smoothed
};

struct SteinReport {
  int d = 0, n = 0;
  double exact_bits = 0.0;
  std::vector<SteinCheckRow> rows;
  std::string note;

  nlohmann::json to_json() const;
};

// Trace-ball smoothing of the max divergence of the n-fold antisymmetric
// state against the PPT cone on the regrouped A^n : B^n split, compared to
// its unsmoothed value on a delta grid.
SteinReport stein_smoothing_check(int d, int n, const std::vector<double>& delta_grid,
                                  const SolverOptions& opts = {});

// Distribution over subsets of the n factors; the corresponding fixed-point
// states place the antisymmetric state on the subset and the symmetric
// state elsewhere.
struct WernerFixedPoint {
  int n = 0;
  std::vector<double> weights;   // size 2^n, indexed by subset bitmask
};

BipartiteState fixed_point_state(int d, const WernerFixedPoint& fp);

}  // namespace sepstein

#endif
