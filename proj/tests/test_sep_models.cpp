#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sepstein/random.hpp>
#include <sepstein/sep_models.hpp>
#include <sepstein/states.hpp>

#include <cmath>
#include <random>

using namespace sepstein;

TEST_CASE("model parsing and direction flags") {
  CHECK(SeparabilityModel::parse("ppt").kind == SeparabilityModel::Kind::PPT);
  CHECK(SeparabilityModel::parse("dps:3").dps_level == 3);
  CHECK(SeparabilityModel::parse("werner").kind == SeparabilityModel::Kind::WernerExact);
  CHECK(SeparabilityModel::parse("isotropic").kind == SeparabilityModel::Kind::IsotropicExact);
  CHECK_THROWS_AS(SeparabilityModel::parse("nope"), std::exception);

  CHECK(SeparabilityModel::ppt().outer());
  CHECK(SeparabilityModel::werner_exact().exact_family());
  CHECK(SeparabilityModel::ppt().exact_for(2, 2));
  CHECK(SeparabilityModel::ppt().exact_for(2, 3));
  CHECK_FALSE(SeparabilityModel::ppt().exact_for(3, 3));
}

TEST_CASE("separability of named states") {
  auto ppt = SeparabilityModel::ppt();
  for (int d : {2, 3}) {
    // boundary of the isotropic family
    BipartiteState boundary(isotropic(d, 1.0 / d), d, d);
    CHECK(separability_test(boundary, ppt).status != Verdict::Out);
    BipartiteState past(isotropic(d, 1.0 / d + 0.05), d, d);
    CHECK(separability_test(past, ppt).status == Verdict::Out);
  }
  BipartiteState phi(max_entangled(2), 2, 2);
  CHECK(separability_test(phi, ppt).status == Verdict::Out);

  auto we = SeparabilityModel::werner_exact();
  BipartiteState mid(0.5 * (antisym_state(3) + sym_state(3)), 3, 3);
  CHECK(separability_test(mid, we).status == Verdict::In);
  BipartiteState alpha(antisym_state(3), 3, 3);
  CHECK(separability_test(alpha, we).status == Verdict::Out);
}

TEST_CASE("exact families reject non-invariant input") {
  std::mt19937_64 rng(59);
  BipartiteState rho = random_state(3, 3, rng);
  CHECK_THROWS_AS(separability_test(rho, SeparabilityModel::werner_exact()), std::exception);
}

TEST_CASE("werner family threshold on a p grid") {
  auto we = SeparabilityModel::werner_exact();
  for (int i = 0; i <= 10; ++i) {
    double p = i / 10.0;
    BipartiteState w(werner(3, p), 3, 3);
    auto v = separability_test(w, we);
    if (p <= 0.5 + 1e-12)
      CHECK(v.status == Verdict::In);
    else
      CHECK(v.status == Verdict::Out);
  }
}

TEST_CASE("isotropic family threshold on a p grid") {
  auto ie = SeparabilityModel::isotropic_exact();
  int d = 3;
  for (int i = 0; i <= 10; ++i) {
    double p = i / 10.0;
    BipartiteState s(isotropic(d, p), d, d);
    auto v = separability_test(s, ie);
    if (p <= 1.0 / d + 1e-12)
      CHECK(v.status == Verdict::In);
    else
      CHECK(v.status == Verdict::Out);
  }
}

TEST_CASE("max overlap values") {
  auto ppt = SeparabilityModel::ppt();
  for (int d : {2, 3}) {
    auto r = max_overlap(max_entangled(d), d, d, ppt);
    CHECK(r.value == doctest::Approx(1.0 / d).epsilon(1e-7));
    CHECK(r.gap <= 1e-7);
  }
  auto full = max_overlap(Mat::Identity(4, 4), 2, 2, ppt);
  CHECK(full.value == doctest::Approx(1.0).epsilon(1e-7));

  // diagonal complement against the exchange-symmetric family peaks at d/(d+1)
  int d = 3;
  Mat e = Mat::Identity(d * d, d * d) - diag_projector(d);
  auto we = max_overlap(e, d, d, SeparabilityModel::werner_exact());
  CHECK(we.value == doctest::Approx(double(d) / (d + 1)).epsilon(1e-7));
}

TEST_CASE("overlap optimizer is a valid model state") {
  auto ppt = SeparabilityModel::ppt();
  auto r = max_overlap(max_entangled(3), 3, 3, ppt);
  CHECK(std::abs(r.sigma.trace().real() - 1.0) < 1e-7);
  CHECK(min_eig(r.sigma) > -1e-7);
  CHECK(min_eig(partial_transpose(r.sigma, 3, 3)) > -1e-7);
  CHECK((max_entangled(3) * r.sigma).trace().real() == doctest::Approx(r.value).epsilon(1e-6));
}

TEST_CASE("dps tightens ppt, never loosens") {
  std::mt19937_64 rng(61);
  auto ppt = SeparabilityModel::ppt();
  auto dps2 = SeparabilityModel::dps(2);
  for (int t = 0; t < 6; ++t) {
    Mat e = random_density(4, rng);
    double vp = max_overlap(e, 2, 2, ppt).value;
    double vd = max_overlap(e, 2, 2, dps2).value;
    CHECK(vd <= vp + 1e-7);
  }
}

TEST_CASE("min overlap and decomposable margin") {
  auto ppt = SeparabilityModel::ppt();
  // swap is block-positive: nonnegative on every product state, margin 0
  auto dec = decomposable_margin(swap_operator(2), 2, 2);
  CHECK(dec.margin == doctest::Approx(0.0).epsilon(1e-7));
  // the decomposition certificate reassembles the witness
  Mat recon = dec.p + partial_transpose(dec.q, 2, 2);
  CHECK((recon - (swap_operator(2) - dec.margin * Mat::Identity(4, 4))).cwiseAbs().maxCoeff() <
        1e-6);
  CHECK(min_eig(dec.p) > -1e-7);
  CHECK(min_eig(dec.q) > -1e-7);

  auto mo = min_overlap(swap_operator(2), 2, 2, ppt);
  CHECK(mo.value == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("min trace dominating equals one plus robustness") {
  auto ppt = SeparabilityModel::ppt();
  auto r = min_trace_dominating(max_entangled(2), 2, 2, ppt);
  CHECK(r.trace == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(min_eig(r.y - max_entangled(2)) > -1e-7);
  CHECK(min_eig(partial_transpose(r.y, 2, 2)) > -1e-7);
}

TEST_CASE("cone membership on non-state operators") {
  auto ppt = SeparabilityModel::ppt();
  CHECK(cone_membership(Mat::Identity(4, 4), 2, 2, ppt).status == Verdict::In);
  CHECK(cone_membership(2.0 * max_entangled(2), 2, 2, ppt).status == Verdict::Out);
  CHECK(cone_membership(Mat::Zero(4, 4), 2, 2, ppt).status == Verdict::In);
}

TEST_CASE("twirl invariance detection") {
  CHECK(is_twirl_invariant(isotropic(3, 0.4), 3));
  CHECK_FALSE(is_twirl_invariant(swap_operator(3) / 9.0, 3));
  CHECK(is_werner_invariant(werner(3, 0.7), 3));
  std::mt19937_64 rng(67);
  CHECK_FALSE(is_werner_invariant(random_density(9, rng), 3));
}
