#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sepstein/measures.hpp>
#include <sepstein/random.hpp>
#include <sepstein/states.hpp>

#include <cmath>
#include <random>

using namespace sepstein;

namespace {

BipartiteState sep22(std::mt19937_64& rng) {
  return BipartiteState(tensor(random_density(2, rng), random_density(2, rng)), 2, 2);
}

}  // namespace

TEST_CASE("isotropic robustness closed form") {
  auto ppt = SeparabilityModel::ppt();
  for (int d : {2, 3}) {
    for (double p : {0.0, 1.0 / d, 0.5, 1.0}) {
      auto r = gen_robustness(BipartiteState(isotropic(d, p), d, d), ppt);
      double expect = std::max(d * p - 1.0, 0.0);
      CHECK(r.r == doctest::Approx(expect).epsilon(1e-6).scale(1.0));
    }
  }
  auto r3 = gen_robustness(BipartiteState(max_entangled(3), 3, 3), ppt);
  CHECK(r3.r == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("robustness decomposition re-verifies") {
  auto ppt = SeparabilityModel::ppt();
  BipartiteState phi(max_entangled(2), 2, 2);
  auto r = gen_robustness(phi, ppt);
  REQUIRE(r.r > 0.5);
  // rho + r * omega = (1+r) sigma with sigma in the model cone
  Mat lhs = phi.mat() + r.r * r.omega_tilde;
  Mat rhs = (1.0 + r.r) * r.sigma;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-5);
  CHECK(min_eig(r.sigma) > -1e-7);
  CHECK(min_eig(partial_transpose(r.sigma, 2, 2)) > -1e-7);
  CHECK(min_eig(r.omega_tilde) > -1e-6);

  std::mt19937_64 rng(139);
  auto zero = gen_robustness(sep22(rng), ppt);
  CHECK(zero.r == doctest::Approx(0.0).epsilon(1e-6).scale(1.0));
}

TEST_CASE("dmax against the model slice") {
  auto ppt = SeparabilityModel::ppt();
  for (int d : {2, 3}) {
    auto v = dmax_ent(BipartiteState(max_entangled(d), d, d), ppt);
    CHECK(v.value_bits == doctest::Approx(std::log2(double(d))).epsilon(1e-6));
  }
  std::mt19937_64 rng(149);
  CHECK(dmax_ent(sep22(rng), ppt).value_bits ==
        doctest::Approx(0.0).epsilon(1e-5).scale(1.0));

  // Werner-symmetric reduction: the best dominating PPT state for alpha_3 is
  // the p = 1/2 Werner state, which forces weight 2 on the antisymmetric block
  auto a3 = dmax_ent(BipartiteState(antisym_state(3), 3, 3), ppt);
  CHECK(a3.value_bits == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("kappa measure") {
  std::mt19937_64 rng(151);
  auto pptstate = sep22(rng);
  CHECK(e_kappa(pptstate).value_bits == doctest::Approx(0.0).epsilon(1e-6).scale(1.0));

  KappaWitness w;
  auto v = e_kappa(BipartiteState(max_entangled(2), 2, 2), &w);
  CHECK(v.value_bits == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(w.feasible(1e-6));
  CHECK(std::log2(w.trace) == doctest::Approx(v.value_bits).epsilon(1e-5));
}

TEST_CASE("modified kappa measure closed form on the antisymmetric family") {
  auto we = SeparabilityModel::werner_exact();
  for (int d : {3, 5, 8}) {
    KappaWitness w;
    auto v = e_kappa_tilde(BipartiteState(antisym_state(d), d, d), we, &w);
    CHECK(v.value_bits == doctest::Approx(std::log2(1.0 + 2.0 / d)).epsilon(1e-6));
    // witness: -S <= rho^G <= S with S in the family cone
    Mat rg = partial_transpose(antisym_state(d), d, d);
    CHECK(min_eig(w.s - rg) > -1e-6);
    CHECK(min_eig(w.s + rg) > -1e-6);
  }
}

TEST_CASE("modified kappa on separable states and its ordering") {
  std::mt19937_64 rng(157);
  auto ppt = SeparabilityModel::ppt();
  auto s = sep22(rng);
  CHECK(e_kappa_tilde(s, ppt).value_bits == doctest::Approx(0.0).epsilon(1e-6).scale(1.0));
  for (int t = 0; t < 6; ++t) {
    auto rho = random_state(2, 2, rng);
    double plain = e_kappa(rho).value_bits;
    double modif = e_kappa_tilde(rho, ppt).value_bits;
    CHECK(plain <= modif + 1e-6);
  }
}

TEST_CASE("modified kappa subadditivity and twirl monotonicity") {
  std::mt19937_64 rng(163);
  auto ppt = SeparabilityModel::ppt();
  for (int t = 0; t < 3; ++t) {
    auto rho = random_state(2, 2, rng);
    double before = e_kappa_tilde(rho, ppt).value_bits;
    BipartiteState tw(twirl(rho.mat(), 2), 2, 2);
    double after = e_kappa_tilde(tw, ppt).value_bits;
    CHECK(after <= before + 1e-6);
  }
}

TEST_CASE("measured lower bound on the antisymmetric family") {
  auto we = SeparabilityModel::werner_exact();
  for (int d : {3, 5, 8}) {
    BipartiteState alpha(antisym_state(d), d, d);
    auto v = measured_lower_bound(alpha, diag_projector(d), we);
    CHECK(v.value_bits == doctest::Approx(std::log2(1.0 + 1.0 / d)).epsilon(1e-6));
  }
  // without the symmetry reduction the bound collapses: some PPT state is
  // orthogonal to the diagonal projector, so the reachable interval hits 0
  BipartiteState a3(antisym_state(3), 3, 3);
  auto flat = measured_lower_bound(a3, diag_projector(3), SeparabilityModel::ppt());
  CHECK(flat.value_bits == doctest::Approx(0.0).epsilon(1e-5).scale(1.0));

  BipartiteState sym3(sym_state(3), 3, 3);
  CHECK(measured_lower_bound(sym3, diag_projector(3), we).value_bits ==
        doctest::Approx(0.0).epsilon(1e-6).scale(1.0));
}

TEST_CASE("measured lower bound rejects bad inputs") {
  std::mt19937_64 rng(167);
  auto we = SeparabilityModel::werner_exact();
  CHECK_THROWS_AS(measured_lower_bound(random_state(3, 3, rng), diag_projector(3), we),
                  std::exception);
  // the target projector is entangled, so (E, 1-E) is not a separable test
  BipartiteState a(antisym_state(3), 3, 3);
  CHECK_THROWS_AS(measured_lower_bound(a, max_entangled(3), we), std::exception);
}

TEST_CASE("class-restricted hypothesis-testing measure") {
  auto ppt = SeparabilityModel::ppt();
  BipartiteState phi(max_entangled(2), 2, 2);
  auto v0 = dh_ent(phi, 0.0, MeasClass::sep(ppt), ppt);
  CHECK(v0.value_bits == doctest::Approx(std::log2(1.5)).epsilon(1e-6));
  auto v5 = dh_ent(phi, 0.5, MeasClass::sep(ppt), ppt);
  CHECK(v5.value_bits >= v0.value_bits - 1e-7);

  std::mt19937_64 rng(173);
  CHECK(dh_ent(sep22(rng), 0.0, MeasClass::sep(ppt), ppt).value_bits ==
        doctest::Approx(0.0).epsilon(1e-5).scale(1.0));
}

TEST_CASE("relative entropy lower bound") {
  std::mt19937_64 rng(179);
  auto s = sep22(rng);
  CHECK(ree_lower_ppt(s).value_bits == doctest::Approx(0.0).epsilon(1e-4).scale(1.0));

  auto phi = ree_lower_ppt(BipartiteState(max_entangled(2), 2, 2));
  CHECK(phi.value_bits == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("measure sandwich on the antisymmetric state") {
  BipartiteState a3(antisym_state(3), 3, 3);
  double lo = measured_lower_bound(a3, diag_projector(3),
                                   SeparabilityModel::werner_exact()).value_bits;
  double mid = ree_lower_ppt(a3).value_bits;
  double hi = dmax_ent(a3, SeparabilityModel::ppt()).value_bits;
  CHECK(lo <= mid + 1e-5);
  CHECK(mid <= hi + 1e-5);
}

TEST_CASE("measured bound adds up for product tests on product states") {
  // the test statistics of (E1 x E2, ...) on alpha x alpha factorize, so the
  // binary KL of each factor is a certified part of the four-outcome total;
  // with Tr[P alpha] = 0 exactly, the per-factor bound is log2(1 + 1/d) and
  // the factorized total is the sum of the parts
  auto we = SeparabilityModel::werner_exact();
  for (int d : {3, 4}) {
    BipartiteState alpha(antisym_state(d), d, d);
    double part = measured_lower_bound(alpha, diag_projector(d), we).value_bits;
    double p = ((Mat::Identity(d * d, d * d) - diag_projector(d)) * antisym_state(d))
                   .trace().real();
    CHECK(p == doctest::Approx(1.0).epsilon(1e-12));
    double qworst = double(d) / (d + 1);
    CHECK(binary_kl_bits(p, qworst) == doctest::Approx(part).epsilon(1e-6));
    CHECK(binary_kl_bits(p * p, qworst * qworst) ==
          doctest::Approx(2.0 * part).epsilon(1e-6));
  }
}

TEST_CASE("golden section minimizer") {
  double x = golden_section_min([](double t) { return (t - 0.3) * (t - 0.3); }, 0.0, 1.0);
  CHECK(x == doctest::Approx(0.3).epsilon(1e-7));
}
