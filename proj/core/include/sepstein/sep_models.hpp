#ifndef SEPSTEIN_SEP_MODELS_HPP
#define SEPSTEIN_SEP_MODELS_HPP

#include "sepstein/builder.hpp"
#include "sepstein/verdict.hpp"

#include <optional>
#include <string>

namespace sepstein {

// Tractable stand-in for the separable cone. PPT and DPSOuter(k) are outer
// relaxations; WernerExact/IsotropicExact are exact on twirl-invariant data.
struct SeparabilityModel {
  enum class Kind { PPT, DPSOuter, WernerExact, IsotropicExact };
  Kind kind = Kind::PPT;
  int dps_level = 2;   // k, only for DPSOuter; capped at 3

  bool outer() const { return kind == Kind::PPT || kind == Kind::DPSOuter; }
  bool exact_family() const { return !outer(); }
  // Exact both ways: PPT decides separability on 2x2 and 2x3.
  bool exact_for(int dimA, int dimB) const;
  std::string str() const;
  static SeparabilityModel parse(const std::string& s);   // "ppt"|"dps:k"|"werner"|"isotropic"

  static SeparabilityModel ppt() { return {}; }
  static SeparabilityModel dps(int k) { return {Kind::DPSOuter, k}; }
  static SeparabilityModel werner_exact() { return {Kind::WernerExact, 2}; }
  static SeparabilityModel isotropic_exact() { return {Kind::IsotropicExact, 2}; }
};

// A variable constrained to the model's cone, usable inside any program.
// For PPT it is a Hermitian variable with a partial-transpose PSD slack;
// for DPSOuter(k) a Bose-symmetric extension with PPT cuts, viewed through
// its reduction to A:B; for exact families two nonnegative weights on the
// extremal family states.
class ConeVar {
public:
  static ConeVar create(Builder& b, const SeparabilityModel& model, int dimA, int dimB,
                        bool real_mode);
  void coeff(Builder& b, int row, const Mat& a) const;   // adds <a, Y> to a row
  void obj(Builder& b, const Mat& a) const;
  void trace_coeff(Builder& b, int row, double c) const; // adds c * tr(Y)
  void trace_obj(Builder& b, double c) const;
  Mat value(const Builder& b, const SolveResult& r) const;

  int dimA = 0, dimB = 0;

private:
  SeparabilityModel model_;
  HermVar var_;                  // PPT: Y itself; DPS: the extension
  int w1_ = -1, w2_ = -1;        // exact families
  Mat fam1_, fam2_;              // extremal family states
  std::function<Mat(const Mat&)> reduce_adj_;   // DPS: adjoint of ext -> Y
};

bool is_twirl_invariant(const Mat& x, int d, double tol = 1e-9);
bool is_werner_invariant(const Mat& x, int d, double tol = 1e-9);

// X in model cone? Outer models: Out conclusive, In conclusive only where
// the model is exact; exact families require twirl-invariant X.
MembershipVerdict cone_membership(const Mat& x, int dimA, int dimB,
                                  const SeparabilityModel& model);

MembershipVerdict separability_test(const BipartiteState& rho, const SeparabilityModel& model);

struct OverlapResult {
  double value = 0.0;
  Mat sigma;          // achieving model state
  double gap = 0.0;
  int iterations = 0;
};

// max (or min) tr[E sigma] over the model's trace-1 slice.
OverlapResult max_overlap(const Mat& e, int dimA, int dimB, const SeparabilityModel& model,
                          const SolverOptions& opts = {});
OverlapResult min_overlap(const Mat& e, int dimA, int dimB, const SeparabilityModel& model,
                          const SolverOptions& opts = {});

// max t such that w - t*1 = P + Q^G with P, Q PSD and ^G the partial
// transpose; t >= 0 certifies w is nonnegative on all PPT states (and hence
// on all separable ones). Equals min tr[w sigma] over PPT states by duality.
struct DecomposableResult {
  double margin = 0.0;
  Mat p, q;           // decomposition of w - margin * 1
  Mat minimizer;      // PPT state achieving the margin
};
DecomposableResult decomposable_margin(const Mat& w, int dimA, int dimB,
                                       const SolverOptions& opts = {});

// min tr(Y) with Y >= x and Y in the model cone; equals 1 + R_g(x) for a
// state x. The achieving Y yields the robustness decomposition.
struct DominatingResult {
  double trace = 0.0;
  Mat y;
  double gap = 0.0;
  int iterations = 0;
};
DominatingResult min_trace_dominating(const Mat& x, int dimA, int dimB,
                                      const SeparabilityModel& model,
                                      const SolverOptions& opts = {});

// Membership checks for the canonical distillation map Theta_{2^m;E}.
MembershipVerdict theta_ne_check(int m, const Mat& e, int dimA, int dimB, double delta,
                                 const SeparabilityModel& model);
MembershipVerdict theta_dne_check(int m, const Mat& e, int dimA, int dimB,
                                  const SeparabilityModel& model);

// Membership checks for the canonical dilution map Lambda_{d;rho,omega}.
MembershipVerdict lambda_ne_check(int d, const Mat& rho_tilde, const Mat& omega, int dimA,
                                  int dimB, double delta, const SeparabilityModel& model);
MembershipVerdict lambda_dne_check(int d, const Mat& rho_tilde, const Mat& omega, int dimA,
                                   int dimB, double delta, const SeparabilityModel& model);

}  // namespace sepstein

#endif
