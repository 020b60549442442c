#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sepstein/protocols.hpp>
#include <sepstein/random.hpp>
#include <sepstein/states.hpp>

#include <cmath>
#include <random>

using namespace sepstein;

TEST_CASE("distillation bounds for the maximally entangled qubit pair") {
  auto ppt = SeparabilityModel::ppt();
  BipartiteState phi(max_entangled(2), 2, 2);
  auto b = distill_bounds(phi, 0.0, 0.0, ppt);
  CHECK(b.lower_bits == doctest::Approx(0.0));
  CHECK(b.upper_bits == doctest::Approx(std::log2(1.5) + 1.0).epsilon(1e-6));
  CHECK(b.direction == "exact");
  CHECK(b.lower_bits <= b.upper_bits + 1e-6);
}

TEST_CASE("distillation bounds on separable input and eps monotonicity") {
  auto ppt = SeparabilityModel::ppt();
  std::mt19937_64 rng(181);
  BipartiteState sep(tensor(random_density(2, rng), random_density(2, rng)), 2, 2);
  auto b = distill_bounds(sep, 0.0, 0.0, ppt);
  CHECK(b.lower_bits == doctest::Approx(0.0));

  BipartiteState phi(max_entangled(2), 2, 2);
  auto b0 = distill_bounds(phi, 0.0, 0.0, ppt);
  auto b1 = distill_bounds(phi, 0.1, 0.0, ppt);
  CHECK(b1.upper_bits >= b0.upper_bits - 1e-7);
  CHECK(b1.lower_bits >= b0.lower_bits - 1e-7);
}

TEST_CASE("dilution cost bounds") {
  auto ppt = SeparabilityModel::ppt();
  BipartiteState phi(max_entangled(2), 2, 2);
  auto b = cost_bounds(phi, 0.0, 1.0, ppt);
  CHECK(b.lower_bits == doctest::Approx(0.0).epsilon(1e-5).scale(1.0));
  CHECK(b.upper_bits == doctest::Approx(2.0));
  CHECK(b.has_upper);

  auto nodelta = cost_bounds(phi, 0.0, 0.0, ppt);
  CHECK_FALSE(nodelta.has_upper);
  CHECK(nodelta.lower_bits == doctest::Approx(1.0).epsilon(1e-6));

  auto smoothed = cost_bounds(phi, 0.5, 1.0, ppt);
  CHECK(smoothed.lower_bits <= b.lower_bits + 1e-6);
  CHECK(smoothed.upper_bits <= b.upper_bits + 1e-6);
}

TEST_CASE("dilution dimension formulas") {
  CHECK(dilution_dim(0.5, 3.0, DilutionVariant::NE) == 3);
  CHECK(dilution_dim(1.0, 1.0, DilutionVariant::NE) == 1);
  CHECK(dilution_dim(0.1, 1.0, DilutionVariant::DNE) == 9);
  CHECK_THROWS_AS(dilution_dim(0.0, 1.0, DilutionVariant::NE), std::exception);
  CHECK_THROWS_AS(dilution_dim(0.5, 0.0, DilutionVariant::NE), std::exception);

  // integer inverse of the deviation curve: at the returned d the bound is
  // within delta, at d-1 it is not
  for (double r : {0.5, 1.0, 2.5}) {
    for (double delta : {0.1, 0.5, 1.0}) {
      for (auto variant : {DilutionVariant::NE, DilutionVariant::DNE}) {
        int d = dilution_dim(delta, r, variant);
        CHECK(dilution_delta_bound(d, r, variant) <= delta + 1e-12);
        if (d > 1) CHECK(dilution_delta_bound(d - 1, r, variant) > delta + 1e-12);
      }
    }
  }
}

TEST_CASE("explicit dilution constructions pass their membership checks") {
  auto ppt = SeparabilityModel::ppt();
  BipartiteState phi(max_entangled(2), 2, 2);

  auto ne = construct_dilution(phi, 0.5, DilutionVariant::NE, ppt);
  CHECK(ne.d == 2);
  CHECK(ne.check.status == Verdict::In);
  CHECK(lambda_ne_check(ne.d, ne.rho_tilde, ne.omega, 2, 2, 0.5, ppt).status == Verdict::In);

  auto dne = construct_dilution(phi, 0.1, DilutionVariant::DNE, ppt);
  CHECK(dne.d == 9);
  CHECK(dne.check.status == Verdict::In);

  std::mt19937_64 rng(191);
  BipartiteState sep(tensor(random_density(2, rng), random_density(2, rng)), 2, 2);
  CHECK_THROWS_AS(construct_dilution(sep, 0.5, DilutionVariant::NE, ppt), std::exception);
}

TEST_CASE("doubling upgrades non-entangling constructions") {
  auto ppt = SeparabilityModel::ppt();
  std::mt19937_64 rng(193);
  for (int t = 0; t < 3; ++t) {
    BipartiteState rho = random_entangled_state(2, 2, rng);
    double delta = 0.5;
    auto ne = construct_dilution(rho, delta, DilutionVariant::NE, ppt);
    REQUIRE(ne.check.status == Verdict::In);
    auto [d2, omega2] = dne_doubling(ne.d, ne.rho_tilde, ne.omega);
    CHECK(d2 == 2 * ne.d);
    CHECK(lambda_dne_check(d2, ne.rho_tilde, omega2, 2, 2, delta, ppt).status == Verdict::In);
  }
  // rho = omega fixed point: the doubled garbage is unchanged
  Mat s = tensor(Mat::Identity(2, 2) / 2.0, Mat::Identity(2, 2) / 2.0);
  auto [dd, om] = dne_doubling(3, s, s);
  CHECK(dd == 6);
  CHECK((om - s).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("regrouping tensor powers") {
  BipartiteState a2(antisym_state(2), 2, 2);
  auto same = regroup_tensor_power(a2, 1);
  CHECK((same.mat() - a2.mat()).cwiseAbs().maxCoeff() < 1e-14);

  auto sq = regroup_tensor_power(a2, 2);
  CHECK(sq.dimA() == 4);
  // permutation similarity preserves the spectrum
  Mat direct = tensor(a2.mat(), a2.mat());
  RVec ev1 = eig_h(direct).values, ev2 = eig_h(sq.mat()).values;
  CHECK((ev1 - ev2).cwiseAbs().maxCoeff() < 1e-12);

  // two copies of the 2-dim maximally entangled state regroup to the 4-dim one
  BipartiteState phi2(max_entangled(2), 2, 2);
  auto p4 = regroup_tensor_power(phi2, 2);
  CHECK(std::abs((max_entangled(4) * p4.mat()).trace().real() - 1.0) < 1e-12);
}
