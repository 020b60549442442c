#ifndef SEPSTEIN_PROTOCOLS_HPP
#define SEPSTEIN_PROTOCOLS_HPP

#include "sepstein/measures.hpp"

#include <utility>

namespace sepstein {

// Two-sided one-shot bound. lower_ref/upper_ref carry the defining formula
// of each side so sweep tables stay self-describing.
struct ProtocolBound {
  double lower_bits = 0.0;
  double upper_bits = 0.0;
  bool has_upper = true;
  bool capped = false;
  std::string lower_ref, upper_ref;
  double eps = 0.0, delta = 0.0;
  std::string model;
  std::string direction;
  nlohmann::json artifacts;

  nlohmann::json to_json() const;
  std::string csv_row() const;   // lower,upper,eps,delta,model
};

// floor(DH) <= one-shot distillable <= DH + log2(1+delta) + 1, with
// DH the separable-class hypothesis-testing measure against the model slice.
ProtocolBound distill_bounds(const BipartiteState& rho, double eps, double delta,
                             const SeparabilityModel& model, const SolverOptions& opts = {});

// Dmax^{eps,T} - log2(1+delta) <= one-shot cost
//   <= ceil(log2((2/(1+delta)) 2^{Dmax^{eps,T}} + 1/delta)); the upper side
// needs delta > 0 and is reported unavailable otherwise.
ProtocolBound cost_bounds(const BipartiteState& rho, double eps, double delta,
                          const SeparabilityModel& model, const SolverOptions& opts = {});

enum class DilutionVariant { NE, DNE, Doubling };
const char* to_string(DilutionVariant v);

// Smallest output dimension at which the explicit construction reaches
// deviation delta, given robustness r.
int dilution_dim(double delta, double r, DilutionVariant variant);

// The construction's best deviation at a fixed dimension (piecewise in d
// against r); dilution_dim is its integer inverse.
double dilution_delta_bound(int d, double r, DilutionVariant variant);

struct DilutionConstruction {
  double r = 0.0;       // robustness of the target
  double delta = 0.0;
  double q = 0.0;       // mixing weight of the constructed garbage state
  int d = 0;            // output dimension
  Mat rho_tilde, omega;
  DilutionVariant variant = DilutionVariant::NE;
  MembershipVerdict check;

  nlohmann::json to_json() const;
};

// Builds omega = q rho + (1-q) omega~ from the robustness decomposition and
// verifies the dilution map's membership at the computed dimension.
DilutionConstruction construct_dilution(const BipartiteState& rho_tilde, double delta,
                                        DilutionVariant variant, const SeparabilityModel& model,
                                        const SolverOptions& opts = {});

// Doubling step: from an NE-feasible (d, rho, omega) to the DNE-feasible
// (2d, omega') with omega' = rho/(2d) + (2d-1)/(2d) omega.
std::pair<int, Mat> dne_doubling(int d, const Mat& rho_tilde, const Mat& omega);

// Permutes (AB)^n tensor factors into the A^n : B^n bipartition.
Mat regroup_composite(const Mat& x, int dA, int dB, int n);
BipartiteState regroup_tensor_power(const BipartiteState& rho, int n);

}  // namespace sepstein

#endif
