#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sepstein/divergences.hpp>
#include <sepstein/random.hpp>
#include <sepstein/states.hpp>

#include <cmath>
#include <random>

using namespace sepstein;

TEST_CASE("binary kl conventions") {
  CHECK(binary_kl_bits(0.5, 0.5) == doctest::Approx(0.0));
  CHECK(binary_kl_bits(0.0, 0.3) == doctest::Approx(std::log2(1.0 / 0.7)));
  CHECK(binary_kl_bits(1.0, 0.5) == doctest::Approx(1.0));
  CHECK(binary_kl_bits(1.0, 0.0) >= kBitsCap);
}

TEST_CASE("umegaki relative entropy") {
  std::mt19937_64 rng(89);
  Mat rho = random_density(4, rng);
  CHECK(umegaki(rho, rho).bits == doctest::Approx(0.0).epsilon(1e-9));

  auto v = umegaki(max_entangled(2), Mat::Identity(4, 4) / 4.0);
  CHECK_FALSE(v.capped);
  CHECK(v.bits == doctest::Approx(2.0).epsilon(1e-9));

  Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2);
  p0(0, 0) = 1;
  p1(1, 1) = 1;
  auto inf = umegaki(p0, p1);
  CHECK(inf.capped);
  CHECK(inf.bits == kBitsCap);
}

TEST_CASE("max relative entropy") {
  std::mt19937_64 rng(97);
  Mat rho = random_density(4, rng);
  CHECK(dmax(rho, rho).bits == doctest::Approx(0.0).epsilon(1e-9));

  // on the maximally entangled line the ratio is 1 / (p at the target)
  int d = 3;
  Mat sigma = isotropic(d, 1.0 / d);
  auto v = dmax(max_entangled(d), sigma);
  CHECK(v.bits == doctest::Approx(std::log2(double(d))).epsilon(1e-9));

  auto zero = dmax(Mat::Zero(4, 4), rho);
  CHECK(zero.capped);
  CHECK(zero.bits == -kBitsCap);

  Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2);
  p0(0, 0) = 1;
  p1(1, 1) = 1;
  CHECK(dmax(p0, p1).capped);
}

TEST_CASE("hypothesis testing divergence against a fixed alternative") {
  std::mt19937_64 rng(101);
  Mat rho = random_density(4, rng);
  CHECK(dh_eps(rho, rho, 0.0, MeasClass::all()).value.bits ==
        doctest::Approx(0.0).epsilon(1e-6));

  // orthogonal pure states are perfectly distinguishable
  Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2);
  p0(0, 0) = 1;
  p1(1, 1) = 1;
  auto orth = dh_eps(p0, p1, 0.0, MeasClass::all());
  CHECK(orth.value.bits >= kBitsCap - 1e-6);

  // the projector onto the maximally entangled state is the optimal test
  auto v = dh_eps(max_entangled(2), tau_complement(2), 0.0,
                  MeasClass::sep(SeparabilityModel::ppt()));
  CHECK(v.value.bits == doctest::Approx(std::log2(3.0)).epsilon(1e-6));
  // its optimizer re-verifies
  CHECK((v.e * max_entangled(2)).trace().real() >= 1.0 - 1e-6);
  CHECK((v.e * tau_complement(2)).trace().real() ==
        doctest::Approx(std::pow(2.0, -v.value.bits)).epsilon(1e-5));
}

TEST_CASE("dh is monotone in eps and in the measurement class") {
  std::mt19937_64 rng(103);
  Mat rho = random_density(4, rng), sigma = random_density(4, rng);
  auto ppt = SeparabilityModel::ppt();
  double prev = -1.0;
  for (double eps : {0.0, 0.1, 0.3, 0.6}) {
    double v = dh_eps(rho, sigma, eps, MeasClass::all()).value.bits;
    CHECK(v >= prev - 1e-7);
    prev = v;
  }
  for (double eps : {0.0, 0.25}) {
    double va = dh_eps(rho, sigma, eps, MeasClass::all()).value.bits;
    double vp = dh_eps(rho, sigma, eps, MeasClass::ppt()).value.bits;
    double vs = dh_eps(rho, sigma, eps, MeasClass::sep(ppt)).value.bits;
    CHECK(vp <= va + 1e-6);
    CHECK(vs <= vp + 1e-6);
  }
}

TEST_CASE("dh against the model slice") {
  auto ppt = SeparabilityModel::ppt();
  auto v = dh_eps_vs_set(max_entangled(2), 2, 2, 0.0, MeasClass::sep(ppt), ppt);
  // one-parameter twirled family: E = Phi + x(1-Phi) needs x >= 1/3, value (1+x)/2
  CHECK(v.value.bits == doctest::Approx(std::log2(1.5)).epsilon(1e-6));

  std::mt19937_64 rng(107);
  Mat sep = tensor(random_density(2, rng), random_density(2, rng));
  auto z = dh_eps_vs_set(sep, 2, 2, 0.0, MeasClass::sep(ppt), ppt);
  CHECK(z.value.bits == doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("single-measurement values never exceed umegaki or dmax") {
  std::mt19937_64 rng(109);
  for (int t = 0; t < 8; ++t) {
    Mat rho = random_density(4, rng), sigma = random_density(4, rng);
    Mat e = random_density(4, rng);   // arbitrary effect scaled into [0,1]
    e /= (eig_h(e).values.maxCoeff() + 1e-12);
    double meas = binary_kl_bits((e * rho).trace().real(), (e * sigma).trace().real());
    double um = umegaki(rho, sigma).bits;
    double dm = dmax(rho, sigma).bits;
    CHECK(meas <= um + 1e-7);
    CHECK(um <= dm + 1e-7);
  }
}

TEST_CASE("twirling never increases dmax") {
  std::mt19937_64 rng(113);
  for (int t = 0; t < 6; ++t) {
    Mat rho = random_density(9, rng), sigma = random_density(9, rng);
    double before = dmax(rho, sigma).bits;
    double after = dmax(twirl(rho, 3), twirl(sigma, 3)).bits;
    CHECK(after <= before + 1e-7);
  }
}

TEST_CASE("smoothed dmax reduces to dmax at radius zero and decreases in eps") {
  std::mt19937_64 rng(127);
  Mat rho = random_density(4, rng), sigma = random_density(4, rng);
  double exact = dmax(rho, sigma).bits;
  auto z = dmax_smoothed(rho, sigma, SmoothBall::trace(0.0));
  CHECK(z.value.bits == doctest::Approx(exact).epsilon(1e-6));

  double prev = exact + 1e-7;
  for (double eps : {0.05, 0.15, 0.3}) {
    double v = dmax_smoothed(rho, sigma, SmoothBall::trace(eps)).value.bits;
    CHECK(v <= prev + 1e-6);
    prev = v;
  }
  double pprev = dmax_smoothed(rho, sigma, SmoothBall::purified(0.0)).value.bits;
  CHECK(pprev == doctest::Approx(exact).epsilon(1e-5));
  for (double eps : {0.1, 0.3}) {
    double v = dmax_smoothed(rho, sigma, SmoothBall::purified(eps)).value.bits;
    CHECK(v <= pprev + 1e-6);
    pprev = v;
  }
  CHECK_THROWS_AS(SmoothBall::trace(1.0), std::exception);
}

TEST_CASE("trace and purified smoothing bridge") {
  std::mt19937_64 rng(131);
  for (int t = 0; t < 4; ++t) {
    Mat rho = random_density(4, rng), sigma = random_density(4, rng);
    auto rep = check_smoothing_bridge(rho, sigma, 0.2);
    CHECK(rep.slack_lo >= -1e-6);
    CHECK(rep.slack_hi >= -1e-6);
  }
}

TEST_CASE("hypothesis-testing versus smoothed-dmax chain") {
  std::mt19937_64 rng(137);
  for (int t = 0; t < 3; ++t) {
    Mat rho = random_density(4, rng), sigma = random_density(4, rng);
    auto rep = check_anshu_chain(rho, sigma, 0.25, 0.3);
    CHECK(rep.slack1 >= -1e-6);
    CHECK(rep.slack2 >= -1e-6);
  }
  Mat rho = random_density(4, rng);
  auto same = check_anshu_chain(rho, rho, 0.25, 0.3);
  CHECK(same.slack1 >= -1e-6);
  CHECK(same.slack2 >= -1e-6);
  // near the upper end of the admissible range the run still completes,
  // even when 1 - eps - delta has crossed zero
  Mat sigma = random_density(4, rng);
  CHECK_NOTHROW(check_anshu_chain(rho, sigma, 0.9, 0.1));
  CHECK_THROWS_AS(check_anshu_chain(rho, sigma, 0.9, 0.25), std::exception);
}
