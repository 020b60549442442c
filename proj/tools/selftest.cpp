#include "selftest.hpp"

#include "sepstein/antisym.hpp"
#include "sepstein/random.hpp"
#include "sepstein/states.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace sepstein::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Suite {
  std::string name;
  bool pass = true;
  int checks = 0;
  double min_slack = kInf;
  double max_slack = -kInf;
  std::vector<std::string> failures;

  // Inequality check: passes when slack >= -tol. Slack extrema are recorded
  // raw so the summary shows how close the suite came to its tolerances.
  void slack(const std::string& what, double s, double tol) {
    ++checks;
    min_slack = std::min(min_slack, s);
    max_slack = std::max(max_slack, s);
    if (!(s >= -tol)) {
      pass = false;
      std::ostringstream os;
      os.precision(12);
      os << what << ": slack " << s << " below -" << tol;
      failures.push_back(os.str());
    }
  }

  // |a - b| <= tol, recorded as the slack tol - |a - b|.
  void close(const std::string& what, double a, double b, double tol) {
    slack(what + " [|" + std::to_string(a) + " - " + std::to_string(b) + "|]",
          tol - std::abs(a - b), 0.0);
  }

  void require(const std::string& what, bool ok) {
    ++checks;
    if (!ok) {
      pass = false;
      failures.push_back(what);
    }
  }

  nlohmann::json to_json() const {
    return {{"name", name},
            {"pass", pass},
            {"checks", checks},
            {"min_slack", checks && min_slack != kInf ? min_slack : 0.0},
            {"max_slack", checks && max_slack != -kInf ? max_slack : 0.0},
            {"failures", failures}};
  }
};

Mat random_herm(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat x(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) x(i, j) = Complex(g(rng), g(rng));
  return 0.5 * (x + Mat(x.adjoint()));
}

Mat random_separable(int dA, int dB, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat acc = Mat::Zero(dA * dB, dA * dB);
  double total = 0.0;
  for (int k = 0; k < 4; ++k) {
    double w = u(rng) + 1e-3;
    acc += w * tensor(random_density(dA, rng, 1), random_density(dB, rng, 1));
    total += w;
  }
  return acc / total;
}

Suite suite_mat_core(std::mt19937_64& rng, int trials) {
  Suite s{"mat-core"};
  std::normal_distribution<double> g;
  for (int t = 0; t < trials; ++t) {
    int dA = 2 + int(t % 2), dB = 2;
    int n = dA * dB;
    Mat x(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) x(i, j) = Complex(g(rng), g(rng));

    Mat ptpt = partial_transpose(partial_transpose(x, dA, dB), dA, dB);
    s.slack("partial transpose involution", 1e-12 - (ptpt - x).norm(), 0.0);

    Mat sym_then_pt = partial_transpose(Mat(0.5 * (x + Mat(x.adjoint()))), dA, dB);
    Mat pt = partial_transpose(x, dA, dB);
    Mat pt_then_sym = 0.5 * (pt + Mat(pt.adjoint()));
    s.slack("pt commutes with symmetrization", 1e-12 - (sym_then_pt - pt_then_sym).norm(), 0.0);

    BipartiteState rho = random_state(dA, dB, rng);
    BipartiteState sig = random_state(dA, dB, rng);
    double td = gen_trace_distance(rho.mat(), sig.mat());
    double pd = purified_distance(rho.mat(), sig.mat());
    s.slack("T <= P", pd - td, 1e-8);
    s.slack("P <= sqrt(T(2-T))", std::sqrt(td * (2.0 - td)) - pd, 1e-8);

    Mat h = random_herm(n, rng);
    EigH e = eig_h(h);
    Mat recon = e.vectors * e.values.asDiagonal() * e.vectors.adjoint();
    s.slack("eig reconstruction", 1e-9 * n - (h - recon).norm(), 0.0);

    Mat a = random_herm(dA, rng);
    double lhs = (tensor(a, Mat::Identity(dB, dB)) * rho.mat()).trace().real();
    double rhs = (a * partial_trace_b(rho.mat(), dA, dB)).trace().real();
    s.close("partial trace adjointness", lhs, rhs, 1e-10);
  }
  return s;
}

Suite suite_states_channels(std::mt19937_64& rng, int trials) {
  Suite s{"states-channels"};
  for (int t = 0; t < trials; ++t) {
    int d = 3;
    Mat x = random_herm(d * d, rng);
    Mat tw = twirl(x, d);
    s.slack("twirl idempotent", 1e-10 - (twirl(tw, d) - tw).norm(), 0.0);
    s.close("twirl trace preserving", tw.trace().real(), x.trace().real(), 1e-10);
    Mat ww = werner_twirl(x, d);
    s.slack("werner twirl idempotent", 1e-10 - (werner_twirl(ww, d) - ww).norm(), 0.0);
    s.close("werner twirl trace preserving", ww.trace().real(), x.trace().real(), 1e-10);
  }

  // Twirling a preparation channel yields the two-outcome threshold form
  // with test operator equal to the channel adjoint applied to Phi.
  for (int t = 0; t < 4; ++t) {
    ChannelSpec lam =
        ChannelSpec::make_lambda(2, random_state(2, 2, rng).mat(), random_state(2, 2, rng).mat());
    Mat e = adjoint_channel(lam, max_entangled(2));
    ChannelSpec theta = ChannelSpec::make_theta(2, e);
    Mat x = random_herm(4, rng);
    Mat lhs = twirl(apply_channel(lam, x), 2);
    Mat rhs = apply_channel(theta, x);
    s.slack("twirled channel has threshold form", 1e-9 - (lhs - rhs).norm(), 0.0);
  }

  // The NE verdict of the threshold map flips exactly where the deviation
  // budget crosses d * (separable max overlap) - 1.
  {
    Mat phi = max_entangled(2);
    Mat e = 0.9 * phi + 0.2 * (Mat::Identity(4, 4) - phi);
    double maxov = max_overlap(e, 2, 2, SeparabilityModel::ppt()).value;
    double thresh = 2.0 * maxov - 1.0;
    MembershipVerdict in = theta_ne_check(1, e, 2, 2, thresh + 1e-3, SeparabilityModel::ppt());
    MembershipVerdict out = theta_ne_check(1, e, 2, 2, thresh - 1e-3, SeparabilityModel::ppt());
    s.require("theta check In above threshold", in.status == Verdict::In);
    s.require("theta check Out below threshold", out.status == Verdict::Out);
  }
  return s;
}

Suite suite_sep_models(std::mt19937_64& rng, int trials) {
  Suite s{"sep-models"};
  for (int t = 0; t < trials; ++t) {
    Mat e = random_herm(4, rng);
    double dps = max_overlap(e, 2, 2, SeparabilityModel::dps(2)).value;
    double ppt = max_overlap(e, 2, 2, SeparabilityModel::ppt()).value;
    s.slack("dps(2) overlap <= ppt overlap", ppt - dps, 1e-7);
  }

  for (int t = 0; t < trials; ++t) {
    BipartiteState rho =
        (t % 2 == 0) ? BipartiteState(random_separable(2, 2, rng), 2, 2)
                     : random_entangled_state(2, 2, rng);
    MembershipVerdict v = separability_test(rho, SeparabilityModel::ppt());
    s.require("2x2 verdict conclusive", v.status != Verdict::Unknown);
    bool ptpsd = min_eig(partial_transpose(rho.mat(), 2, 2)) >= -1e-9;
    s.require("2x2 verdict matches pt spectrum",
              (v.status == Verdict::In) == ptpsd);
  }

  // Exact-family verdicts flip at the known mixing thresholds.
  for (int k = 0; k <= 10; ++k) {
    double p = 0.1 * k;
    int d = 3;
    MembershipVerdict iso =
        separability_test(BipartiteState(isotropic(d, p), d, d),
                          SeparabilityModel::isotropic_exact());
    bool want_in = p <= 1.0 / d + 1e-9;
    s.require("isotropic threshold at p=" + std::to_string(p),
              (iso.status == Verdict::In) == want_in);
    MembershipVerdict wer = separability_test(BipartiteState(werner(d, p), d, d),
                                              SeparabilityModel::werner_exact());
    bool want_in_w = p <= 0.5 + 1e-9;
    s.require("werner threshold at p=" + std::to_string(p),
              (wer.status == Verdict::In) == want_in_w);
  }
  return s;
}

Suite suite_conic(std::mt19937_64& rng, int trials) {
  Suite s{"conic-solver"};
  std::uniform_int_distribution<int> dim(4, 16);
  for (int t = 0; t < trials; ++t) {
    int n = dim(rng);
    Mat a = random_herm(n, rng);
    Builder b;
    b.note_data(a);
    HermVar x = b.add_herm(n, b.real_data());
    int row = b.new_row(1.0);
    b.coeff(row, x, Mat::Identity(n, n));
    b.obj(x, Mat(-a));   // maximize <a, x> over density matrices
    SolveResult r = solve(b.problem());
    s.require("density sdp solved (n=" + std::to_string(n) + ")", r.ok());
    if (r.ok()) {
      double lmax = eig_h(a).values.maxCoeff();
      s.close("max overlap equals top eigenvalue", -r.primal_value, lmax, 1e-7);
    }
  }

  {
    // x >= 0 with x = -1 has no solution; the solver must certify that.
    Builder b;
    int x = b.add_nonneg();
    int row = b.new_row(-1.0);
    b.coeff(row, x, 1.0);
    b.obj(x, 1.0);
    SolveResult r = solve(b.problem());
    s.require("infeasible lp flagged", r.status == SolveStatus::PrimalInfeasible);
    s.require("infeasibility certificate tight", r.cert_residual <= 1e-7);
  }
  return s;
}

Suite suite_divergences(std::mt19937_64& rng, int trials) {
  Suite s{"divergences"};
  for (int t = 0; t < trials; ++t) {
    Mat rho = random_density(4, rng);
    Mat sig = random_density(4, rng);
    EigH diff = eig_h(Mat(rho - sig));
    Mat e = Mat::Zero(4, 4);
    for (Eigen::Index i = 0; i < 4; ++i)
      if (diff.values(i) > 0)
        e += diff.vectors.col(i) * diff.vectors.col(i).adjoint();
    double measured =
        binary_kl_bits((e * rho).trace().real(), (e * sig).trace().real());
    double d_um = umegaki(rho, sig).bits;
    double d_mx = dmax(rho, sig).bits;
    s.slack("measured <= umegaki", d_um - measured, 1e-7);
    s.slack("umegaki <= dmax", d_mx - d_um, 1e-7);
  }

  for (int t = 0; t < std::max(trials / 2, 2); ++t) {
    Mat rho = random_state(3, 3, rng).mat();
    Mat sig = random_state(3, 3, rng).mat();
    double before = dmax(rho, sig).bits;
    double after = dmax(twirl(rho, 3), twirl(sig, 3)).bits;
    s.slack("dmax data processing under twirl", before - after, 1e-7);
  }

  for (int t = 0; t < std::max(trials / 2, 2); ++t) {
    Mat rho = random_entangled_state(2, 2, rng).mat();
    Mat sig = random_state(2, 2, rng).mat();
    double all = dh_eps(rho, sig, 0.1, MeasClass::all()).value.bits;
    double ppt = dh_eps(rho, sig, 0.1, MeasClass::ppt()).value.bits;
    double sep =
        dh_eps(rho, sig, 0.1, MeasClass::sep(SeparabilityModel::ppt())).value.bits;
    s.slack("dh shrinks: all >= ppt tests", all - ppt, 1e-7);
    s.slack("dh shrinks: ppt >= separable tests", ppt - sep, 1e-7);
  }
  return s;
}

Suite suite_ent_measures(std::mt19937_64& rng, int batch) {
  Suite s{"ent-measures"};

  {
    BipartiteState a3(antisym_state(3), 3, 3);
    MeasureResult m =
        measured_lower_bound(a3, diag_projector(3), SeparabilityModel::werner_exact());
    MeasureResult r = ree_lower_ppt(a3, 120, 1e-4);
    MeasureResult d = dmax_ent(a3, SeparabilityModel::ppt());
    // The conditional-gradient value sits above the true minimum by at most
    // its own duality gap, so both links are checked gap-aware.
    s.slack("measured lower <= ree value", r.value_bits - m.value_bits, 1e-5);
    s.slack("ree value <= dmax (gap-aware)",
            d.value_bits + r.gap - r.value_bits, 1e-5);
  }

  for (int t = 0; t < batch; ++t) {
    BipartiteState rho = (t % 2 == 0) ? BipartiteState(random_separable(2, 2, rng), 2, 2)
                                      : random_entangled_state(2, 2, rng);
    MeasureResult v = e_kappa_tilde(rho, SeparabilityModel::ppt());
    s.slack("modified kappa nonnegative", v.value_bits, 1e-7);
    MembershipVerdict verdict = separability_test(rho, SeparabilityModel::ppt());
    if (verdict.status == Verdict::In) {
      s.slack("modified kappa zero on separable", 1e-6 - v.value_bits, 0.0);
    } else {
      EigH pt = eig_h(partial_transpose(rho.mat(), 2, 2));
      double neg = 0.0;
      for (Eigen::Index i = 0; i < pt.values.size(); ++i)
        if (pt.values(i) < 0) neg -= pt.values(i);
      s.slack("modified kappa above negativity floor",
              v.value_bits - std::log2(1.0 + 2.0 * neg), 1e-6);
    }
  }

  for (int t = 0; t < 5; ++t) {
    int d = (t < 3) ? 2 : 3;
    BipartiteState rho = random_state(d, d, rng);
    double before = e_kappa_tilde(rho, SeparabilityModel::ppt()).value_bits;
    double after =
        e_kappa_tilde(BipartiteState(twirl(rho.mat(), d), d, d), SeparabilityModel::ppt())
            .value_bits;
    s.slack("modified kappa monotone under twirl", before - after, 1e-6);
  }

  for (int d : {3, 4, 5}) {
    BipartiteState ad(antisym_state(d), d, d);
    double dh = dh_ent(ad, 0.0, MeasClass::sep(SeparabilityModel::werner_exact()),
                       SeparabilityModel::werner_exact())
                    .value_bits;
    double ek = e_kappa_tilde(ad, SeparabilityModel::werner_exact()).value_bits;
    s.slack("dh(sep tests) <= modified kappa, d=" + std::to_string(d), ek - dh, 1e-5);
  }

  {
    // Super-additivity consistency on a product with independent family
    // alternatives: the four-outcome product statistic, minimized over
    // per-factor alternative overlaps, must dominate the sum of the parts.
    BipartiteState a3(antisym_state(3), 3, 3);
    BipartiteState a4(antisym_state(4), 4, 4);
    MeasureResult m3 =
        measured_lower_bound(a3, diag_projector(3), SeparabilityModel::werner_exact());
    MeasureResult m4 =
        measured_lower_bound(a4, diag_projector(4), SeparabilityModel::werner_exact());
    double p3 = m3.extra.at("p").get<double>();
    double p4 = m4.extra.at("p").get<double>();
    auto inner = [&](double q3) {
      auto f = [&](double q4) { return binary_kl_bits(p3, q3) + binary_kl_bits(p4, q4); };
      double q4s = golden_section_min(f, m4.extra.at("q_min").get<double>(),
                                      m4.extra.at("q_max").get<double>());
      return f(q4s);
    };
    double q3s = golden_section_min(inner, m3.extra.at("q_min").get<double>(),
                                    m3.extra.at("q_max").get<double>());
    double product_value = inner(q3s);
    s.slack("super-additivity on product tests",
            product_value - (m3.value_bits + m4.value_bits), 1e-5);
  }
  return s;
}

Suite suite_protocols(std::mt19937_64& rng, int trials) {
  Suite s{"protocols"};
  for (int t = 0; t < trials; ++t) {
    BipartiteState rho = random_entangled_state(2, 2, rng, 0.02);
    double delta = 0.3;

    ProtocolBound db = distill_bounds(rho, 0.1, 0.5, SeparabilityModel::ppt());
    s.slack("distill lower <= upper", db.upper_bits - db.lower_bits, 1e-9);
    s.slack("distill gap bounded", std::log2(1.5) + 2.0 + 1e-9 -
                                       (db.upper_bits - db.lower_bits), 0.0);

    try {
      DilutionConstruction ne =
          construct_dilution(rho, delta, DilutionVariant::NE, SeparabilityModel::ppt());
      s.require("ne construction passes", ne.check.status == Verdict::In);
      s.slack("ne deviation bound met at d",
              delta - dilution_delta_bound(ne.d, ne.r, DilutionVariant::NE), 1e-9);
      if (ne.d > 1)
        s.slack("d-1 misses the deviation target",
                dilution_delta_bound(ne.d - 1, ne.r, DilutionVariant::NE) - delta, 1e-9);

      auto [d2, omega2] = dne_doubling(ne.d, ne.rho_tilde, ne.omega);
      MembershipVerdict up =
          lambda_dne_check(d2, ne.rho_tilde, omega2, 2, 2, delta, SeparabilityModel::ppt());
      s.require("doubling upgrades ne to dne", up.status == Verdict::In);

      DilutionConstruction dne =
          construct_dilution(rho, delta, DilutionVariant::DNE, SeparabilityModel::ppt());
      s.require("dne construction passes", dne.check.status == Verdict::In);
      s.slack("dne deviation bound met at d",
              delta - dilution_delta_bound(dne.d, dne.r, DilutionVariant::DNE), 1e-9);
    } catch (const std::exception& e) {
      s.require(std::string("dilution construction: ") + e.what(), false);
    }
  }
  return s;
}

Suite suite_antisym(std::mt19937_64& rng, int d_max) {
  Suite s{"antisym-bench"};
  AntisymTable table = antisym_table(2, d_max);
  s.require("table completes", table.complete);
  double prev_upper = kInf;
  for (const AntisymRow& row : table.rows) {
    s.close("lower closed form d=" + std::to_string(row.d), row.lower_bits,
            std::log2(1.0 + 1.0 / row.d), 1e-6);
    s.close("upper closed form d=" + std::to_string(row.d), row.upper_bits,
            std::log2(1.0 + 2.0 / row.d), 1e-6);
    s.slack("upper strictly decreasing d=" + std::to_string(row.d),
            prev_upper - row.upper_bits, -1e-12);
    prev_upper = row.upper_bits;
    s.require("gap certified exactly from d=13 (d=" + std::to_string(row.d) + ")",
              row.gap_certified == (row.d >= 13));
  }

  {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    WernerFixedPoint fp;
    fp.n = 2;
    fp.weights.resize(4);
    double sum = 0.0;
    for (double& w : fp.weights) sum += (w = u(rng) + 1e-3);
    for (double& w : fp.weights) w /= sum;
    BipartiteState fps = fixed_point_state(2, fp);
    BipartiteState a2 = regroup_tensor_power(BipartiteState(antisym_state(2), 2, 2), 2);
    double dist = 0.5 * trace_norm(Mat(a2.mat() - fps.mat()));
    s.close("fixed-point trace distance bookkeeping", dist, 1.0 - fp.weights[3], 1e-9);
  }
  return s;
}

Suite suite_solver_certification() {
  Suite s{"solver-certification"};
  SolveStats stats = solve_stats_snapshot();
  s.require("solves were recorded", stats.solves > 0);
  s.require("no solver failures", stats.failures == 0);
  s.slack("worst certified gap", 1e-7 - stats.max_gap, 0.0);
  s.slack("worst weak-duality violation", 1e-7 - stats.max_duality_violation, 0.0);
  return s;
}

}  // namespace

nlohmann::json run_selftest(std::uint64_t seed, const std::string& level, bool* all_pass) {
  bool quick = level == "quick";
  std::mt19937_64 rng(seed);
  solve_stats_reset();

  std::vector<Suite> suites;
  suites.push_back(suite_mat_core(rng, quick ? 8 : 20));
  suites.push_back(suite_states_channels(rng, quick ? 4 : 10));
  suites.push_back(suite_sep_models(rng, quick ? 4 : 10));
  suites.push_back(suite_conic(rng, quick ? 10 : 30));
  suites.push_back(suite_divergences(rng, quick ? 4 : 10));
  suites.push_back(suite_ent_measures(rng, quick ? 20 : 100));
  suites.push_back(suite_protocols(rng, quick ? 1 : 3));
  suites.push_back(suite_antisym(rng, quick ? 13 : 16));
  suites.push_back(suite_solver_certification());

  bool pass = true;
  nlohmann::json rows = nlohmann::json::array();
  for (const Suite& s : suites) {
    pass = pass && s.pass;
    rows.push_back(s.to_json());
  }
  if (all_pass) *all_pass = pass;
  SolveStats stats = solve_stats_snapshot();
  return {{"seed", seed},
          {"level", quick ? "quick" : "full"},
          {"pass", pass},
          {"suites", rows},
          {"solves", stats.solves},
          {"max_gap", stats.max_gap}};
}

}  // namespace sepstein::cli
