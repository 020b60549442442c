#include "sepstein/divergences.hpp"

#include "sepstein/builder.hpp"
#include "sepstein/states.hpp"
#include "cone_rows.hpp"
#include "family_algebra.hpp"

#include <algorithm>
#include <cmath>

namespace sepstein {

nlohmann::json BitsValue::to_json() const {
  return {{"bits", bits}, {"capped", capped}};
}

std::string MeasClass::str() const {
  switch (kind) {
    case Kind::All: return "all";
    case Kind::Ppt: return "ppt-meas";
    case Kind::Sep: return "sep-meas(" + model.str() + ")";
  }
  return "?";
}

SmoothBall SmoothBall::trace(double eps) {
  if (eps < 0.0 || eps >= 1.0) throw std::invalid_argument("trace ball: eps must be in [0,1)");
  return {Kind::Trace, eps};
}

SmoothBall SmoothBall::purified(double eps) {
  if (eps < 0.0 || eps >= 1.0)
    throw std::invalid_argument("purified ball: eps must be in [0,1)");
  return {Kind::Purified, eps};
}

std::string SmoothBall::str() const {
  return (kind == Kind::Trace ? "trace:" : "purified:") + std::to_string(eps);
}

double binary_kl_bits(double p, double q) {
  p = std::clamp(p, 0.0, 1.0);
  q = std::clamp(q, 0.0, 1.0);
  auto term = [](double a, double b) {
    if (a <= 0.0) return 0.0;
    if (b <= 0.0) return 2.0 * kBitsCap;
    return a * std::log2(a / b);
  };
  return std::min(term(p, q) + term(1.0 - p, 1.0 - q), kBitsCap);
}

namespace {

constexpr double kTinyPow = 8.673617379884035e-19;   // 2^-60

// -log2(t) for a solver objective t >= 0. Below the feasibility tolerance
// the optimum cannot be certified away from zero, and zero means +inf, so
// such values are reported as capped rather than as a noise-driven number.
BitsValue bits_of_ratio(double t) {
  t = std::max(t, 0.0);
  if (t < 1e-9) return BitsValue::pos_inf();
  return BitsValue::finite(-std::log2(t));
}

BitsValue bits_of(double t) {   // log2(t)
  if (t < kTinyPow) return BitsValue::neg_inf();
  return BitsValue::finite(std::log2(t));
}

void require_solved(const SolveResult& r, const char* what) {
  if (!r.ok())
    throw NumericalError(std::string(what) + ": solve ended with status " +
                         to_string(r.status) +
                         (r.message.empty() ? "" : " (" + r.message + ")"));
}

int square_side(Eigen::Index n, const char* what) {
  int d = int(std::lround(std::sqrt(double(n))));
  if (Eigen::Index(d) * d != n)
    throw std::invalid_argument(std::string(what) +
                                ": equal local dimensions required, got side " +
                                std::to_string(n));
  return d;
}

void check_pair(const Mat& a, const Mat& b, const char* what) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  check_dim_cap(a.rows());
}

// Reduced hypothesis-testing program over an exact family's invariant
// algebra: the test is e1 b1 + e2 b2, everything becomes a small LP.
// If sigma is given the objective is tr[E sigma]; otherwise the worst-case
// overlap with the family slice is minimized.
DhResult family_dh(const FamilyAlgebra& fa, const Mat& rho, double eps,
                   const MeasClass& cls, const Mat* sigma, const SolverOptions& opts) {
  bool restricted;
  switch (cls.kind) {
    case MeasClass::Kind::All:
      restricted = false;
      break;
    case MeasClass::Kind::Ppt:
      restricted = true;
      break;
    case MeasClass::Kind::Sep:
      if (cls.model.kind == SeparabilityModel::Kind::DPSOuter)
        throw std::invalid_argument("family-reduced test program: DPS class unsupported");
      if (cls.model.exact_family() && cls.model.kind != fa.model.kind)
        throw std::invalid_argument("family-reduced test program: class/model family mismatch");
      restricted = true;
      break;
    default:
      throw std::logic_error("family_dh: bad class");
  }

  double p1 = (fa.b1 * rho).trace().real();
  double p2 = (fa.b2 * rho).trace().real();

  Builder b;
  int e1 = b.add_nonneg();
  int e2 = b.add_nonneg();
  auto upper_one = [&](int v) {   // v <= 1
    int u = b.add_nonneg();
    int row = b.new_row(1.0);
    b.coeff(row, v, 1.0);
    b.coeff(row, u, 1.0);
  };
  upper_one(e1);
  upper_one(e2);

  {
    int s = b.add_nonneg();
    int row = b.new_row(1.0 - eps);
    b.coeff(row, e1, p1);
    b.coeff(row, e2, p2);
    b.coeff(row, s, -1.0);
  }

  if (restricted) {
    // Both effects separable; for invariant operators that is exactly
    // nonnegativity plus positivity of the partial transpose.
    for (const auto& l : family_pt_conditions(fa)) {
      int s = b.add_nonneg();
      int row = b.new_row(0.0);
      b.coeff(row, e1, l[0]);
      b.coeff(row, e2, l[1]);
      b.coeff(row, s, -1.0);
      int s2 = b.add_nonneg();
      int row2 = b.new_row(l[0] + l[1]);   // same condition on 1 - E
      b.coeff(row2, e1, l[0]);
      b.coeff(row2, e2, l[1]);
      b.coeff(row2, s2, 1.0);
    }
  }

  if (sigma) {
    b.obj(e1, (fa.b1 * *sigma).trace().real());
    b.obj(e2, (fa.b2 * *sigma).trace().real());
  } else {
    int t = b.add_nonneg();
    for (const Mat* w : {&fa.w1, &fa.w2}) {
      int s = b.add_nonneg();
      int row = b.new_row(0.0);
      b.coeff(row, e1, (fa.b1 * *w).trace().real());
      b.coeff(row, e2, (fa.b2 * *w).trace().real());
      b.coeff(row, t, -1.0);
      b.coeff(row, s, 1.0);
    }
    b.obj(t, 1.0);
  }

  SolveResult r = solve(b.problem(), opts);
  require_solved(r, "hypothesis-testing program");
  DhResult out;
  out.value = bits_of_ratio(r.primal_value);
  out.e = b.extract(r, e1) * fa.b1 + b.extract(r, e2) * fa.b2;
  out.gap = r.gap;
  out.iterations = r.iterations;
  return out;
}

bool class_needs_pt(const MeasClass& cls) {
  if (cls.kind == MeasClass::Kind::Ppt) return true;
  if (cls.kind == MeasClass::Kind::Sep) {
    if (cls.model.kind == SeparabilityModel::Kind::PPT) return true;
    if (cls.model.exact_family())
      throw std::invalid_argument(
          "separable test class with an exact-family model needs family-invariant data");
  }
  return false;
}

}  // namespace

BitsValue umegaki(const Mat& rho, const Mat& sigma) {
  check_pair(rho, sigma, "umegaki");
  EigH er = eig_h(rho);
  EigH es = eig_h(sigma);
  double tol_s = 1e-10 * std::max(1.0, es.values.cwiseAbs().maxCoeff());
  double tol_r = 1e-10 * std::max(1.0, er.values.cwiseAbs().maxCoeff());

  double outside = 0.0;
  for (Eigen::Index j = 0; j < es.values.size(); ++j) {
    if (es.values(j) > tol_s) continue;
    outside += (es.vectors.col(j).adjoint() * rho * es.vectors.col(j))(0).real();
  }
  if (outside > 1e-9) return BitsValue::pos_inf();

  double h = 0.0;   // tr[rho log2 rho]
  for (Eigen::Index i = 0; i < er.values.size(); ++i)
    if (er.values(i) > tol_r) h += er.values(i) * std::log2(er.values(i));
  double cross = 0.0;   // tr[rho log2 sigma]
  for (Eigen::Index j = 0; j < es.values.size(); ++j) {
    if (es.values(j) <= tol_s) continue;
    double w = (es.vectors.col(j).adjoint() * rho * es.vectors.col(j))(0).real();
    cross += w * std::log2(es.values(j));
  }
  return BitsValue::finite(h - cross);
}

BitsValue dmax(const Mat& x, const Mat& sigma) {
  check_pair(x, sigma, "dmax");
  EigH es = eig_h(sigma);
  double tol_s = 1e-10 * std::max(1.0, es.values.cwiseAbs().maxCoeff());
  Mat proj = Mat::Zero(sigma.rows(), sigma.cols());
  for (Eigen::Index j = 0; j < es.values.size(); ++j)
    if (es.values(j) > tol_s) proj += es.vectors.col(j) * es.vectors.col(j).adjoint();
  if ((x - proj * x * proj).norm() > 1e-9 * std::max(1.0, x.norm()))
    return BitsValue::pos_inf();
  Mat isq = psd_inv_sqrt(sigma);
  EigH em = eig_h(isq * x * isq);
  return bits_of(em.values.maxCoeff());
}

DhResult dh_eps(const Mat& rho, const Mat& sigma, double eps, const MeasClass& cls,
                const SolverOptions& opts) {
  check_pair(rho, sigma, "dh_eps");
  if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("dh_eps: eps must be in [0,1]");
  int n = int(rho.rows());

  if (cls.kind == MeasClass::Kind::Sep && cls.model.exact_family()) {
    int d = square_side(n, "dh_eps");
    FamilyAlgebra fa = family_algebra(cls.model, d);
    if (!family_invariant(rho, fa) || !family_invariant(sigma, fa))
      throw std::invalid_argument("dh_eps: exact-family class needs invariant rho and sigma");
    return family_dh(fa, rho, eps, cls, &sigma, opts);
  }

  Builder b;
  b.note_data(rho);
  b.note_data(sigma);
  bool rm = b.real_data();
  DhResult out;
  SolveResult r;

  if (cls.kind == MeasClass::Kind::Sep &&
      cls.model.kind == SeparabilityModel::Kind::DPSOuter) {
    int d = square_side(n, "dh_eps");
    ConeVar y1 = ConeVar::create(b, cls.model, d, d, rm);
    ConeVar y2 = ConeVar::create(b, cls.model, d, d, rm);
    matrix_eq_rows(b, n, {}, {}, {{&y1, 1.0}, {&y2, 1.0}}, Mat::Identity(n, n));
    int s = b.add_nonneg();
    int row = b.new_row(1.0 - eps);
    y1.coeff(b, row, rho);
    b.coeff(row, s, -1.0);
    y1.obj(b, sigma);
    r = solve(b.problem(), opts);
    require_solved(r, "dh_eps");
    out.e = y1.value(b, r);
  } else {
    HermVar e = b.add_herm(n, rm);
    add_psd_of(b, n, rm, {{e, -1.0, nullptr}}, {}, Mat::Identity(n, n));
    if (class_needs_pt(cls)) {
      int d = square_side(n, "dh_eps");
      auto pt = adj_partial_transpose(d, d);
      add_psd_of(b, n, rm, {{e, 1.0, pt}}, {}, Mat::Zero(n, n));
      add_psd_of(b, n, rm, {{e, -1.0, pt}}, {}, Mat::Identity(n, n));
    }
    int s = b.add_nonneg();
    int row = b.new_row(1.0 - eps);
    b.coeff(row, e, rho);
    b.coeff(row, s, -1.0);
    b.obj(e, sigma);
    r = solve(b.problem(), opts);
    require_solved(r, "dh_eps");
    out.e = b.extract(r, e);
  }

  out.value = bits_of_ratio(r.primal_value);
  out.gap = r.gap;
  out.iterations = r.iterations;
  return out;
}

DhResult dh_eps_vs_set(const Mat& rho, int dimA, int dimB, double eps,
                       const MeasClass& cls, const SeparabilityModel& model,
                       const SolverOptions& opts) {
  int n = dimA * dimB;
  if (rho.rows() != n || rho.cols() != n)
    throw std::invalid_argument("dh_eps_vs_set: shape mismatch");
  check_dim_cap(n);
  if (eps < 0.0 || eps > 1.0)
    throw std::invalid_argument("dh_eps_vs_set: eps must be in [0,1]");

  if (model.exact_family()) {
    if (dimA != dimB)
      throw std::invalid_argument("dh_eps_vs_set: family models need equal local dims");
    FamilyAlgebra fa = family_algebra(model, dimA);
    if (!family_invariant(rho, fa))
      throw std::invalid_argument("dh_eps_vs_set: rho not invariant under the family twirl");
    return family_dh(fa, rho, eps, cls, nullptr, opts);
  }
  if (model.kind == SeparabilityModel::Kind::DPSOuter)
    throw std::invalid_argument(
        "dh_eps_vs_set: worst-case alternative over a DPS cone is not supported");

  // Worst case over the PPT slice dualized: max_{sigma PPT} tr[E sigma]
  // <= t iff t 1 - E - Q^G >= 0 for some Q >= 0.
  Builder b;
  b.note_data(rho);
  bool rm = b.real_data();
  HermVar e = b.add_herm(n, rm);
  add_psd_of(b, n, rm, {{e, -1.0, nullptr}}, {}, Mat::Identity(n, n));
  if (class_needs_pt(cls)) {
    auto pt = adj_partial_transpose(dimA, dimB);
    add_psd_of(b, n, rm, {{e, 1.0, pt}}, {}, Mat::Zero(n, n));
    add_psd_of(b, n, rm, {{e, -1.0, pt}}, {}, Mat::Identity(n, n));
  }
  int t = b.add_nonneg();
  HermVar q = b.add_herm(n, rm);
  add_psd_of(b, n, rm, {{e, -1.0, nullptr}, {q, -1.0, adj_partial_transpose(dimA, dimB)}},
             {{t, Mat::Identity(n, n)}}, Mat::Zero(n, n));
  int s = b.add_nonneg();
  int row = b.new_row(1.0 - eps);
  b.coeff(row, e, rho);
  b.coeff(row, s, -1.0);
  b.obj(t, 1.0);

  SolveResult r = solve(b.problem(), opts);
  require_solved(r, "dh_eps_vs_set");
  DhResult out;
  out.value = bits_of_ratio(r.primal_value);
  out.e = b.extract(r, e);
  out.gap = r.gap;
  out.iterations = r.iterations;
  return out;
}

namespace {

// Shared smoothed-D_max builder. The dominating side is either lambda*sigma
// (fixed alternative) or a cone variable Y (worst case over a model); the
// smoothed operator lives in a trace ball or a purified-distance ball.
SmoothedResult dmax_smoothed_impl(const Mat& rho, const Mat* sigma, int dimA, int dimB,
                                  const SeparabilityModel* model, const SmoothBall& ball,
                                  const SolverOptions& opts) {
  int n = int(rho.rows());

  // A large optimal lambda starves the homogeneous model (tau shrinks with
  // the solution norm and the endgame stalls). The unsmoothed value bounds
  // the smoothed one from above, so scaling sigma by it puts the optimum in
  // (0, 1]; the shift is added back to the reported bits.
  double shift_bits = 0.0;
  Mat sigma_scaled;
  if (sigma) {
    BitsValue ub = dmax(rho, *sigma);
    if (!ub.capped) shift_bits = std::max(0.0, ub.bits);
    sigma_scaled = *sigma * std::pow(2.0, shift_bits);
    sigma = &sigma_scaled;
  }

  Builder b;
  b.note_data(rho);
  if (sigma) b.note_data(*sigma);
  bool rm = b.real_data();

  int lam = -1;
  ConeVar y;
  if (sigma) {
    lam = b.add_nonneg();
  } else {
    y = ConeVar::create(b, *model, dimA, dimB, rm);
  }

  // Builds the dominating slack: (lambda sigma | Y) - expr >= 0, where expr
  // is given by variable terms plus a constant.
  auto dominate = [&](std::vector<MatTerm> terms, const Mat& cst) {
    if (sigma) {
      for (auto& t : terms) t.c = -t.c;
      add_psd_of(b, n, rm, terms, {{lam, *sigma}}, Mat(-cst));
    } else {
      // Z = Y - expr, i.e. Z + expr - Y = 0.
      HermVar z = b.add_herm(n, rm);
      terms.push_back({z, 1.0, nullptr});
      matrix_eq_rows(b, n, terms, {}, {{&y, -1.0}}, Mat(-cst));
    }
  };

  if (ball.kind == SmoothBall::Kind::Trace) {
    HermVar p = b.add_herm(n, rm);
    HermVar nn = b.add_herm(n, rm);
    Mat id = Mat::Identity(n, n);
    {
      int row = b.new_row(0.0);   // trace preserved
      b.coeff(row, p, id);
      b.coeff(row, nn, Mat(-id));
    }
    {
      int s = b.add_nonneg();
      int row = b.new_row(ball.eps);   // (tr P + tr N)/2 <= eps
      b.coeff(row, p, Mat(0.5 * id));
      b.coeff(row, nn, Mat(0.5 * id));
      b.coeff(row, s, 1.0);
    }
    add_psd_of(b, n, rm, {{p, 1.0, nullptr}, {nn, -1.0, nullptr}}, {}, rho);
    dominate({{p, 1.0, nullptr}, {nn, -1.0, nullptr}}, rho);
    if (sigma)
      b.obj(lam, 1.0);
    else
      y.trace_obj(b, 1.0);

    SolveResult r = solve(b.problem(), opts);
    require_solved(r, "dmax_smoothed");
    SmoothedResult out;
    out.value = bits_of(std::max(r.primal_value, 0.0));
    if (!out.value.capped) out.value.bits += shift_bits;
    out.rho_smoothed = rho + b.extract(r, p) - b.extract(r, nn);
    out.gap = r.gap;
    out.iterations = r.iterations;
    return out;
  }

  // Purified ball: H = [[rho, Z], [Z^dag, rho']] >= 0 with
  // Re tr Z + g >= sqrt(1 - eps^2) and g <= sqrt((1 - tr rho)(1 - tr rho'))
  // via a 2x2 geometric-mean block; rho' is the smoothed operator.
  HermVar h = b.add_herm(2 * n, rm);
  add_matrix_equality(b, n, {{h, 1.0, adj_corner(2 * n, 0, n)}}, {}, rho);

  Mat pad = Mat::Zero(2 * n, 2 * n);   // tr of the rho' corner
  pad.block(n, n, n, n) = Mat::Identity(n, n);
  Mat off = Mat::Zero(2 * n, 2 * n);   // Re tr Z
  off.block(0, n, n, n) = 0.5 * Mat::Identity(n, n);
  off.block(n, 0, n, n) = 0.5 * Mat::Identity(n, n);

  double tr_rho = rho.trace().real();
  double slack_rho = 1.0 - tr_rho;
  int fid_row = b.new_row(std::sqrt(std::max(0.0, 1.0 - ball.eps * ball.eps)));
  b.coeff(fid_row, h, off);
  {
    int s = b.add_nonneg();
    b.coeff(fid_row, s, -1.0);
  }
  if (slack_rho <= 1e-12) {
    // For a normalized rho the cross-term sqrt((1-tr rho)(1-tr rho')) is
    // identically zero, and pinning a PSD diagonal entry to exactly zero
    // starves the interior-point iterates, so the 2x2 block below is skipped.
    // Subnormalization of rho' still has to be enforced directly.
    int s = b.add_nonneg();
    int row = b.new_row(1.0);
    b.coeff(row, h, pad);
    b.coeff(row, s, 1.0);
  } else {
    // Geometric-mean hypograph for the subnormalization cross-term: the 2x2
    // block [[1 - tr rho, g], [g, 1 - tr rho']] >= 0 gives g <= sqrt(...),
    // and its second diagonal row doubles as the tr rho' <= 1 constraint.
    HermVar g2 = b.add_herm(2, true);
    Mat e00 = Mat::Zero(2, 2), e11 = Mat::Zero(2, 2), goff = Mat::Zero(2, 2);
    e00(0, 0) = 1.0;
    e11(1, 1) = 1.0;
    goff(0, 1) = 0.5;
    goff(1, 0) = 0.5;
    {
      int row = b.new_row(slack_rho);
      b.coeff(row, g2, e00);
    }
    {
      int row = b.new_row(1.0);
      b.coeff(row, g2, e11);
      b.coeff(row, h, pad);
    }
    b.coeff(fid_row, g2, goff);
  }
  dominate({{h, 1.0, adj_corner(2 * n, n, n)}}, Mat::Zero(n, n));
  if (sigma)
    b.obj(lam, 1.0);
  else
    y.trace_obj(b, 1.0);

  SolveResult r = solve(b.problem(), opts);
  require_solved(r, "dmax_smoothed");
  SmoothedResult out;
  out.value = bits_of(std::max(r.primal_value, 0.0));
  if (!out.value.capped) out.value.bits += shift_bits;
  Mat hv = b.extract(r, h);
  out.rho_smoothed = hv.block(n, n, n, n);
  out.gap = r.gap;
  out.iterations = r.iterations;
  return out;
}

}  // namespace

SmoothedResult dmax_smoothed(const Mat& rho, const Mat& sigma, const SmoothBall& ball,
                             const SolverOptions& opts) {
  check_pair(rho, sigma, "dmax_smoothed");
  if (ball.eps == 0.0) {
    SmoothedResult out;
    out.value = dmax(rho, sigma);
    out.rho_smoothed = rho;
    return out;
  }
  return dmax_smoothed_impl(rho, &sigma, 0, 0, nullptr, ball, opts);
}

SmoothedResult dmax_smoothed_vs_model(const Mat& rho, int dimA, int dimB,
                                      const SeparabilityModel& model, const SmoothBall& ball,
                                      const SolverOptions& opts) {
  int n = dimA * dimB;
  if (rho.rows() != n || rho.cols() != n)
    throw std::invalid_argument("dmax_smoothed_vs_model: shape mismatch");
  check_dim_cap(n);
  if (ball.eps == 0.0) {
    // Degenerate ball; avoid pinning the smoothing blocks to the boundary.
    DominatingResult dom = min_trace_dominating(rho, dimA, dimB, model, opts);
    SmoothedResult out;
    out.value = bits_of(std::max(dom.trace, 0.0));
    out.rho_smoothed = rho;
    out.gap = dom.gap;
    out.iterations = dom.iterations;
    return out;
  }
  return dmax_smoothed_impl(rho, nullptr, dimA, dimB, &model, ball, opts);
}

SmoothingBridgeReport check_smoothing_bridge(const Mat& rho, const Mat& sigma, double eps,
                                             const SolverOptions& opts) {
  if (eps < 0.0 || eps >= 1.0)
    throw std::invalid_argument("check_smoothing_bridge: eps must be in [0,1)");
  SmoothingBridgeReport rep;
  rep.t_bits = dmax_smoothed(rho, sigma, SmoothBall::trace(eps), opts).value.bits;
  double p_lo_eps = std::sqrt(eps * (2.0 - eps));
  rep.p_lo_bits = dmax_smoothed(rho, sigma, SmoothBall::purified(p_lo_eps), opts).value.bits;
  double p_hi = dmax_smoothed(rho, sigma, SmoothBall::purified(eps), opts).value.bits;
  rep.p_hi_bits = p_hi + std::log2(1.0 / (1.0 - eps));
  rep.slack_lo = rep.t_bits - rep.p_lo_bits;
  rep.slack_hi = rep.p_hi_bits - rep.t_bits;
  return rep;
}

AnshuChainReport check_anshu_chain(const Mat& rho, const Mat& sigma, double eps, double delta,
                                   const SolverOptions& opts) {
  if (eps <= 0.0 || eps >= 1.0)
    throw std::invalid_argument("check_anshu_chain: eps must be in (0,1)");
  if (delta <= 0.0 || delta >= 1.0 - eps * eps)
    throw std::invalid_argument("check_anshu_chain: need 0 < delta < 1 - eps^2");
  AnshuChainReport rep;
  rep.dh_hi_bits = dh_eps(rho, sigma, 1.0 - eps, MeasClass::all(), opts).value.bits;
  double p = dmax_smoothed(rho, sigma, SmoothBall::purified(std::sqrt(eps)), opts).value.bits;
  rep.dmax_p_bits = p - std::log2(1.0 / (1.0 - eps));
  // The lower step keeps tolerance 1 - eps - delta; once that crosses zero the
  // hypothesis-testing term is vacuous and the bound degenerates to -cap.
  double dh_lo = 1.0 - eps - delta > 0.0
                     ? dh_eps(rho, sigma, 1.0 - eps - delta, MeasClass::all(), opts).value.bits
                     : -kBitsCap;
  rep.dh_lo_bits = dh_lo - std::log2(4.0 / (delta * delta));
  rep.slack1 = rep.dh_hi_bits - rep.dmax_p_bits;
  rep.slack2 = rep.dmax_p_bits - rep.dh_lo_bits;
  return rep;
}

}  // namespace sepstein
