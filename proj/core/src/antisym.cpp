#include "sepstein/antisym.hpp"

#include "sepstein/states.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sepstein {

nlohmann::json AntisymRow::to_json() const {
  return {{"d", d},
          {"lower_bits", lower_bits},
          {"upper_bits", upper_bits},
          {"csw_bits", csw_bits},
          {"gap_certified", gap_certified},
          {"analytic", analytic}};
}

std::string AntisymRow::csv_header() { return "d,lower_bits,upper_bits,csw_bits,gap_certified"; }

std::string AntisymRow::csv_row() const {
  std::ostringstream os;
  os.precision(12);
  os << d << ',' << lower_bits << ',' << upper_bits << ',' << csw_bits << ','
     << (gap_certified ? "true" : "false");
  return os.str();
}

AntisymTable antisym_table(int d_min, int d_max, const SolverOptions& opts) {
  if (d_min < 2 || d_max < d_min)
    throw std::invalid_argument("antisym_table: need 2 <= d_min <= d_max");
  const double csw = csw_bits();
  AntisymTable table;
  for (int d = d_min; d <= d_max; ++d) {
    AntisymRow row;
    row.d = d;
    row.csw_bits = csw;
    double lower_closed = std::log2(1.0 + 1.0 / d);
    double upper_closed = std::log2(1.0 + 2.0 / d);
    if (Eigen::Index(d) * d > kDimCap) {
      row.analytic = true;
      row.lower_bits = lower_closed;
      row.upper_bits = upper_closed;
    } else {
      try {
        BipartiteState alpha(antisym_state(d), d, d);
        MeasureResult lo = measured_lower_bound(alpha, diag_projector(d),
                                                SeparabilityModel::werner_exact(), opts);
        MeasureResult up =
            e_kappa_tilde(alpha, SeparabilityModel::werner_exact(), nullptr, opts);
        row.lower_bits = lo.value_bits;
        row.upper_bits = up.value_bits;
      } catch (const NumericalError& err) {
        table.complete = false;
        table.error = "d=" + std::to_string(d) + ": " + err.what();
        return table;
      }
      if (std::abs(row.lower_bits - lower_closed) > 1e-6 ||
          std::abs(row.upper_bits - upper_closed) > 1e-6) {
        table.complete = false;
        table.error = "d=" + std::to_string(d) + ": solve deviates from the closed form";
        table.rows.push_back(row);
        return table;
      }
    }
    row.gap_certified = row.upper_bits < csw - 1e-9;
    table.rows.push_back(row);
  }
  return table;
}

nlohmann::json SteinReport::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows)
    rs.push_back({{"delta", r.delta},
                  {"smoothed_bits", r.smoothed_bits},
                  {"slack_lo", r.slack_lo},
                  {"slack_hi", r.slack_hi}});
  return {{"d", d}, {"n", n}, {"exact_bits", exact_bits}, {"rows", rs}, {"note", note}};
}

SteinReport stein_smoothing_check(int d, int n, const std::vector<double>& delta_grid,
                                  const SolverOptions& opts) {
  if (n < 1 || n > 2) throw std::invalid_argument("stein_smoothing_check: n must be 1 or 2");
  BipartiteState alpha(antisym_state(d), d, d);
  BipartiteState rho_n = regroup_tensor_power(alpha, n);

  SeparabilityModel ppt = SeparabilityModel::ppt();
  SteinReport rep;
  rep.d = d;
  rep.n = n;
  rep.note =
      "worst case taken over the PPT cone on the regrouped split; the fixed-point "
      "argument only needs a twirl-closed convex superset of the separable states";
  rep.exact_bits = dmax_ent(rho_n, ppt, opts).value_bits;
  for (double delta : delta_grid) {
    if (delta < 0.0 || delta >= 1.0)
      throw std::invalid_argument("stein_smoothing_check: deltas must be in [0,1)");
    SteinCheckRow row;
    row.delta = delta;
    row.smoothed_bits =
        dmax_ent_smoothed(rho_n, ppt, SmoothBall::trace(delta), opts).value_bits;
    row.slack_lo = row.smoothed_bits - (rep.exact_bits - std::log2(1.0 / (1.0 - delta)));
    row.slack_hi = rep.exact_bits - row.smoothed_bits;
    rep.rows.push_back(row);
  }
  return rep;
}

BipartiteState fixed_point_state(int d, const WernerFixedPoint& fp) {
  if (fp.n < 1) throw std::invalid_argument("fixed_point_state: n >= 1 required");
  size_t count = size_t(1) << fp.n;
  if (fp.weights.size() != count)
    throw std::invalid_argument("fixed_point_state: need 2^n weights");
  double sum = 0.0;
  for (double w : fp.weights) {
    if (w < -1e-12) throw std::invalid_argument("fixed_point_state: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("fixed_point_state: weights must sum to one");
  if (std::pow(double(d) * d, fp.n) > double(kDimCap))
    throw std::invalid_argument("fixed_point_state: dimension cap exceeded");

  Mat alpha = antisym_state(d);
  Mat sigma = sym_state(d);
  int big = int(std::lround(std::pow(double(d) * d, fp.n)));
  Mat acc = Mat::Zero(big, big);
  for (size_t mask = 0; mask < count; ++mask) {
    if (fp.weights[mask] == 0.0) continue;
    Mat term = (mask & 1u) ? alpha : sigma;
    for (int k = 1; k < fp.n; ++k) term = tensor(term, (mask >> k) & 1u ? alpha : sigma);
    acc += fp.weights[mask] * term;
  }
  int dn = int(std::lround(std::pow(double(d), fp.n)));
  return BipartiteState(regroup_composite(acc, d, d, fp.n), dn, dn);
}

}  // namespace sepstein
