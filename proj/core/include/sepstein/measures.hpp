#ifndef SEPSTEIN_MEASURES_HPP
#define SEPSTEIN_MEASURES_HPP

#include "sepstein/divergences.hpp"

#include <functional>

namespace sepstein {

// Common result record for the entanglement quantifiers. direction says how
// value_bits relates to the quantity defined with the true separable cone:
// minimizing over an outer relaxation gives "lower-bound-for-S", etc.
struct MeasureResult {
  std::string measure;
  double value_bits = 0.0;
  bool capped = false;
  std::string model;
  std::string direction;   // "exact" | "lower-bound-for-S" | "upper-bound-for-S"
  double gap = 0.0;
  int iterations = 0;
  nlohmann::json extra;

  nlohmann::json to_json() const;
};

struct RobustnessResult {
  double r = 0.0;        // generalized robustness against the model slice
  Mat sigma;             // cone state with rho <= (1+r) sigma
  Mat omega_tilde;       // mixing state of the decomposition (empty if r ~ 0)
  double gap = 0.0;
  int iterations = 0;
  std::string direction;
};

RobustnessResult gen_robustness(const BipartiteState& rho, const SeparabilityModel& model,
                                const SolverOptions& opts = {});
MeasureResult gen_robustness_result(const BipartiteState& rho, const SeparabilityModel& model,
                                    const SolverOptions& opts = {});

// log2(1 + gen_robustness) = max-relative entropy against the model slice.
MeasureResult dmax_ent(const BipartiteState& rho, const SeparabilityModel& model,
                       const SolverOptions& opts = {});
MeasureResult dmax_ent_smoothed(const BipartiteState& rho, const SeparabilityModel& model,
                                const SmoothBall& ball, const SolverOptions& opts = {});

// Witness for the kappa-type measures: -S <= rho^G <= S (and S in the model
// cone for the modified variant).
struct KappaWitness {
  Mat s;
  double trace = 0.0;
  double max_violation = 0.0;   // most negative eigenvalue of S -+ rho^G

  bool feasible(double tol = 1e-8) const { return max_violation <= tol; }
};

// log2 min tr S over -S^G <= rho^G <= S^G, S >= 0 (no separability model).
MeasureResult e_kappa(const BipartiteState& rho, KappaWitness* witness = nullptr,
                      const SolverOptions& opts = {});

// log2 min tr S over -S <= rho^G <= S with S in the model cone. Exact
// families require invariant rho; S then ranges over the partial-transpose
// conjugate family, which is where the symmetrized optimum lives.
MeasureResult e_kappa_tilde(const BipartiteState& rho, const SeparabilityModel& model,
                            KappaWitness* witness = nullptr, const SolverOptions& opts = {});

// Class-restricted hypothesis-testing measure against the model slice.
MeasureResult dh_ent(const BipartiteState& rho, double eps, const MeasClass& cls,
                     const SeparabilityModel& model, const SolverOptions& opts = {});

// Lower bound from a fixed two-outcome separable test (e, 1-e): the binary
// KL divergence minimized over the reachable q = tr[e sigma] interval of the
// family slice. e must be certifiably separable together with its complement.
MeasureResult measured_lower_bound(const BipartiteState& rho, const Mat& e,
                                   const SeparabilityModel& family,
                                   const SolverOptions& opts = {});

// Relative entropy of entanglement computed over the PPT slice (hence a
// lower bound for the separable-cone quantity), by conditional-gradient
// iteration with exact line search.
MeasureResult ree_lower_ppt(const BipartiteState& rho, int max_iter = 500,
                            double gap_tol = 1e-6, const SolverOptions& opts = {});

// Golden-section minimizer for strictly unimodal f on [lo, hi].
double golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                          double tol = 1e-10);

}  // namespace sepstein

#endif
