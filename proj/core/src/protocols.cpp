#include "sepstein/protocols.hpp"

#include "sepstein/serialize.hpp"
#include "sepstein/states.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sepstein {

nlohmann::json ProtocolBound::to_json() const {
  nlohmann::json j{{"lower_bits", lower_bits}, {"upper_bits", upper_bits},
                   {"has_upper", has_upper},   {"capped", capped},
                   {"lower_ref", lower_ref},   {"upper_ref", upper_ref},
                   {"eps", eps},               {"delta", delta},
                   {"model", model},           {"direction", direction}};
  if (!artifacts.is_null()) j["artifacts"] = artifacts;
  return j;
}

std::string ProtocolBound::csv_row() const {
  std::ostringstream os;
  os << lower_bits << ',';
  if (has_upper)
    os << upper_bits;
  else
    os << "n/a";
  os << ',' << eps << ',' << delta << ',' << model;
  return os.str();
}

const char* to_string(DilutionVariant v) {
  switch (v) {
    case DilutionVariant::NE: return "NE";
    case DilutionVariant::DNE: return "DNE";
    case DilutionVariant::Doubling: return "Doubling";
  }
  return "?";
}

ProtocolBound distill_bounds(const BipartiteState& rho, double eps, double delta,
                             const SeparabilityModel& model, const SolverOptions& opts) {
  if (eps < 0.0 || eps > 1.0 || delta < 0.0)
    throw std::invalid_argument("distill_bounds: need eps in [0,1], delta >= 0");
  MeasureResult dh = dh_ent(rho, eps, MeasClass::sep(model), model, opts);
  ProtocolBound b;
  b.eps = eps;
  b.delta = delta;
  b.model = model.str();
  b.direction = dh.direction;
  b.capped = dh.capped;
  b.lower_bits = std::max(std::floor(dh.value_bits + 1e-9), 0.0);
  b.upper_bits = dh.value_bits + std::log2(1.0 + delta) + 1.0;
  b.lower_ref = "floor(DH^eps vs separable tests)";
  b.upper_ref = "DH^eps + log2(1+delta) + 1";
  b.artifacts = {{"dh_bits", dh.value_bits}, {"dh_gap", dh.gap}};
  return b;
}

ProtocolBound cost_bounds(const BipartiteState& rho, double eps, double delta,
                          const SeparabilityModel& model, const SolverOptions& opts) {
  if (eps < 0.0 || eps >= 1.0 || delta < 0.0)
    throw std::invalid_argument("cost_bounds: need eps in [0,1), delta >= 0");
  MeasureResult dm = dmax_ent_smoothed(rho, model, SmoothBall::trace(eps), opts);
  ProtocolBound b;
  b.eps = eps;
  b.delta = delta;
  b.model = model.str();
  b.direction = dm.direction;
  b.capped = dm.capped;
  b.lower_bits = std::max(dm.value_bits - std::log2(1.0 + delta), 0.0);
  b.lower_ref = "Dmax^{eps,T} - log2(1+delta)";
  if (delta > 0.0) {
    double x = std::log2((2.0 / (1.0 + delta)) * std::exp2(dm.value_bits) + 1.0 / delta);
    b.upper_bits = std::ceil(x - 1e-9);
    b.upper_ref = "ceil(log2((2/(1+delta)) 2^{Dmax^{eps,T}} + 1/delta))";
  } else {
    b.has_upper = false;
    b.upper_bits = 0.0;
    b.upper_ref = "unavailable at delta = 0";
  }
  b.artifacts = {{"dmax_smoothed_bits", dm.value_bits}, {"gap", dm.gap}};
  return b;
}

namespace {

double effective_r(double r, DilutionVariant variant) {
  if (variant == DilutionVariant::NE) return r;
  if (variant == DilutionVariant::DNE) return 1.0 + 2.0 * r;
  throw std::invalid_argument("dilution formulas: NE or DNE only");
}

}  // namespace

int dilution_dim(double delta, double r, DilutionVariant variant) {
  if (delta <= 0.0 || r <= 0.0)
    throw std::invalid_argument("dilution_dim: need delta > 0 and r > 0");
  double s = effective_r(r, variant);
  double x = (1.0 + std::max(s, 1.0 / delta)) / (1.0 + std::max(1.0 / s, delta));
  return int(std::ceil(x - 1e-9));
}

double dilution_delta_bound(int d, double r, DilutionVariant variant) {
  if (d < 1 || r <= 0.0)
    throw std::invalid_argument("dilution_delta_bound: need d >= 1 and r > 0");
  // Exact inverse of dilution_dim in the effective rate s, so that
  // dilution_dim(dilution_delta_bound(d, r, v), r, v) == d whenever d is
  // attainable for this r.
  double s = effective_r(r, variant);
  if (d <= s) return (1.0 + s) / d - 1.0;
  return s / ((d - 1.0) * s + d);
}

nlohmann::json DilutionConstruction::to_json() const {
  return {{"r", r},       {"delta", delta},
          {"q", q},       {"d", d},
          {"variant", to_string(variant)},
          {"check", check.to_json()},
          {"omega", matrix_to_json(omega)}};
}

DilutionConstruction construct_dilution(const BipartiteState& rho_tilde, double delta,
                                        DilutionVariant variant, const SeparabilityModel& model,
                                        const SolverOptions& opts) {
  if (variant == DilutionVariant::Doubling)
    throw std::invalid_argument("construct_dilution: use dne_doubling for the doubling step");
  RobustnessResult rb = gen_robustness(rho_tilde, model, opts);
  // Robustness values of a few 1e-9 are solver noise on separable inputs, so
  // the refusal threshold sits well above the optimizer's certified gap.
  if (rb.r <= 1e-7)
    throw std::invalid_argument("construct_dilution: positive robustness required");
  if (rb.omega_tilde.size() == 0)
    throw NumericalError("construct_dilution: no robustness decomposition available");

  DilutionConstruction out;
  out.r = rb.r;
  out.delta = delta;
  out.variant = variant;
  out.rho_tilde = rho_tilde.mat();
  out.d = dilution_dim(delta, rb.r, variant);

  // Mixing weight where the construction's two deviation lines meet, or the
  // boundary of the admissible q-range when the meeting point falls outside.
  double q0 = (out.d - rb.r) / ((out.d - 1.0) * rb.r + out.d);
  if (variant == DilutionVariant::NE)
    out.q = out.d < rb.r ? 0.0 : q0;
  else
    out.q = out.d >= 2.0 * rb.r ? q0 : 1.0 / (out.d + 1.0);
  out.q = std::clamp(out.q, 0.0, 1.0);

  out.omega = out.q * rho_tilde.mat() + (1.0 - out.q) * rb.omega_tilde;
  out.check = (variant == DilutionVariant::NE)
                  ? lambda_ne_check(out.d, out.rho_tilde, out.omega, rho_tilde.dimA(),
                                    rho_tilde.dimB(), delta, model)
                  : lambda_dne_check(out.d, out.rho_tilde, out.omega, rho_tilde.dimA(),
                                     rho_tilde.dimB(), delta, model);
  if (out.check.status == Verdict::Out)
    throw ConsistencyError("construct_dilution: construction failed its membership check");
  if (out.check.status == Verdict::Unknown && model.exact_for(rho_tilde.dimA(), rho_tilde.dimB()))
    throw ConsistencyError("construct_dilution: inconclusive check under an exact model");
  return out;
}

std::pair<int, Mat> dne_doubling(int d, const Mat& rho_tilde, const Mat& omega) {
  if (d < 1) throw std::invalid_argument("dne_doubling: d >= 1 required");
  if (rho_tilde.rows() != omega.rows() || rho_tilde.cols() != omega.cols())
    throw std::invalid_argument("dne_doubling: shape mismatch");
  int d2 = 2 * d;
  Mat omega2 = (1.0 / d2) * rho_tilde + ((d2 - 1.0) / d2) * omega;
  return {d2, omega2};
}

Mat regroup_composite(const Mat& x, int dA, int dB, int n) {
  if (n < 1) throw std::invalid_argument("regroup_composite: n >= 1 required");
  double total = std::pow(double(dA) * dB, n);
  if (total > double(kDimCap))
    throw std::invalid_argument("regroup_composite: dimension cap exceeded");
  int big = int(std::lround(total));
  if (x.rows() != big || x.cols() != big)
    throw std::invalid_argument("regroup_composite: shape mismatch");
  int bn = int(std::lround(std::pow(double(dB), n)));

  // Composite index (a1 b1 a2 b2 ... an bn) -> (a1 ... an, b1 ... bn).
  std::vector<int> perm(big);
  std::vector<int> as(n), bs(n);
  for (int i = 0; i < big; ++i) {
    int rest = i, aidx = 0, bidx = 0;
    for (int k = n - 1; k >= 0; --k) {
      bs[k] = rest % dB;
      rest /= dB;
      as[k] = rest % dA;
      rest /= dA;
    }
    for (int k = 0; k < n; ++k) aidx = aidx * dA + as[k];
    for (int k = 0; k < n; ++k) bidx = bidx * dB + bs[k];
    perm[i] = aidx * bn + bidx;
  }
  Mat out = Mat::Zero(big, big);
  for (int i = 0; i < big; ++i)
    for (int j = 0; j < big; ++j) out(perm[i], perm[j]) = x(i, j);
  return out;
}

BipartiteState regroup_tensor_power(const BipartiteState& rho, int n) {
  int dA = rho.dimA(), dB = rho.dimB();
  Mat power = rho.mat();
  if (std::pow(double(rho.dim()), n) > double(kDimCap))
    throw std::invalid_argument("regroup_tensor_power: dimension cap exceeded");
  for (int k = 1; k < n; ++k) power = tensor(power, rho.mat());
  Mat out = regroup_composite(power, dA, dB, n);
  int an = int(std::lround(std::pow(double(dA), n)));
  int bn = int(std::lround(std::pow(double(dB), n)));
  return BipartiteState(out, an, bn);
}

}  // namespace sepstein
