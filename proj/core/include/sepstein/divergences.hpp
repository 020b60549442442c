#ifndef SEPSTEIN_DIVERGENCES_HPP
#define SEPSTEIN_DIVERGENCES_HPP

#include "sepstein/sep_models.hpp"

#include <nlohmann/json.hpp>
#include <string>

namespace sepstein {

// Values are reported in bits. True infinities are capped at +-kBitsCap
// and marked inexact so downstream arithmetic stays finite.
inline constexpr double kBitsCap = 60.0;

struct BitsValue {
  double bits = 0.0;
  bool capped = false;   // true: the exact value lies beyond +-kBitsCap

  static BitsValue finite(double b) { return {b, false}; }
  static BitsValue pos_inf() { return {kBitsCap, true}; }
  static BitsValue neg_inf() { return {-kBitsCap, true}; }
  nlohmann::json to_json() const;
};

// Measurement class for hypothesis-testing quantities: unrestricted
// two-outcome tests, PPT tests, or tests whose both effects lie in the
// separable cone as certified by a model.
struct MeasClass {
  enum class Kind { All, Ppt, Sep };
  Kind kind = Kind::All;
  SeparabilityModel model;   // only for Sep

  static MeasClass all() { return {Kind::All, {}}; }
  static MeasClass ppt() { return {Kind::Ppt, {}}; }
  static MeasClass sep(const SeparabilityModel& m) { return {Kind::Sep, m}; }
  std::string str() const;
};

struct SmoothBall {
  enum class Kind { Trace, Purified };
  Kind kind = Kind::Trace;
  double eps = 0.0;

  static SmoothBall trace(double eps);      // eps in [0, 1)
  static SmoothBall purified(double eps);   // eps in [0, 1)
  std::string str() const;
};

// KL divergence of (p, 1-p) from (q, 1-q) in bits, with the usual
// conventions 0 log(0/q) = 0 and p log(p/0) = +inf (capped).
double binary_kl_bits(double p, double q);

// Umegaki relative entropy D(rho || sigma) in bits; +inf (capped) when the
// support of rho is not contained in that of sigma.
BitsValue umegaki(const Mat& rho, const Mat& sigma);

// Max-relative entropy log2 min { t : x <= t sigma }.
BitsValue dmax(const Mat& x, const Mat& sigma);

struct DhResult {
  BitsValue value;
  Mat e;                // optimal test effect
  double gap = 0.0;
  int iterations = 0;
};

// Hypothesis-testing divergence against a fixed alternative:
//   -log2 min { tr[E sigma] : 0 <= E <= 1, tr[E rho] >= 1 - eps, E in cls }.
DhResult dh_eps(const Mat& rho, const Mat& sigma, double eps, const MeasClass& cls,
                const SolverOptions& opts = {});

// Same, with the alternative ranging over the model's trace-one slice:
//   -log2 min_E max_{sigma in model} tr[E sigma].
// Exact-family models require rho invariant under the family twirl.
DhResult dh_eps_vs_set(const Mat& rho, int dimA, int dimB, double eps,
                       const MeasClass& cls, const SeparabilityModel& model,
                       const SolverOptions& opts = {});

struct SmoothedResult {
  BitsValue value;
  Mat rho_smoothed;     // achieving operator inside the ball
  double gap = 0.0;
  int iterations = 0;
};

// Smoothed max-relative entropy min over the ball around rho.
SmoothedResult dmax_smoothed(const Mat& rho, const Mat& sigma, const SmoothBall& ball,
                             const SolverOptions& opts = {});
SmoothedResult dmax_smoothed_vs_model(const Mat& rho, int dimA, int dimB,
                                      const SeparabilityModel& model, const SmoothBall& ball,
                                      const SolverOptions& opts = {});

// Fuchs-van de Graaf style bridge between trace-ball and purified-ball
// smoothing, evaluated on a fixed pair:
//   D_max^{sqrt(eps(2-eps)), P} <= D_max^{eps, T} <= D_max^{eps, P}
//                                                     + log2(1/(1-eps)).
struct SmoothingBridgeReport {
  double t_bits = 0.0;        // D_max^{eps, T}
  double p_lo_bits = 0.0;     // D_max^{sqrt(eps(2-eps)), P}
  double p_hi_bits = 0.0;     // D_max^{eps, P} + log2(1/(1-eps))
  double slack_lo = 0.0;      // t_bits - p_lo_bits
  double slack_hi = 0.0;      // p_hi_bits - t_bits
};
SmoothingBridgeReport check_smoothing_bridge(const Mat& rho, const Mat& sigma, double eps,
                                             const SolverOptions& opts = {});

// Chain linking hypothesis testing and purified-ball smoothed D_max:
//   D_H^{1-eps} >= D_max^{sqrt(eps), P} - log2(1/(1-eps))
//               >= D_H^{1-eps-delta} - log2(4/delta^2),
// for eps in (0,1) and delta in (0, 1-eps^2). When 1-eps-delta <= 0 the lower
// hypothesis-testing term is vacuous and is reported at the -cap value.
struct AnshuChainReport {
  double dh_hi_bits = 0.0;     // D_H^{1-eps}
  double dmax_p_bits = 0.0;    // D_max^{sqrt(eps), P} - log2(1/(1-eps))
  double dh_lo_bits = 0.0;     // D_H^{1-eps-delta} - log2(4/delta^2)
  double slack1 = 0.0;         // dh_hi_bits - dmax_p_bits
  double slack2 = 0.0;         // dmax_p_bits - dh_lo_bits
};
AnshuChainReport check_anshu_chain(const Mat& rho, const Mat& sigma, double eps, double delta,
                                   const SolverOptions& opts = {});

}  // namespace sepstein

#endif
