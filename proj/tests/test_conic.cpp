#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sepstein/builder.hpp>
#include <sepstein/conic.hpp>
#include <sepstein/measures.hpp>
#include <sepstein/random.hpp>
#include <sepstein/states.hpp>

#include <random>

using namespace sepstein;

TEST_CASE("orthant minimum") {
  // min x s.t. x - s = 3, s >= 0
  ConicProblem p;
  p.orthant = 2;
  p.obj_orth = RVec::Zero(2);
  p.obj_orth(0) = 1.0;
  ConicProblem::Row row;
  row.orth = {{0, 1.0}, {1, -1.0}};
  p.rows.push_back(row);
  p.rhs.push_back(3.0);
  auto r = solve(p);
  REQUIRE(r.ok());
  CHECK(r.primal_value == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(r.gap <= 1e-7);
}

TEST_CASE("largest eigenvalue as an sdp") {
  Mat a = Mat::Zero(3, 3);
  a(0, 0) = 1;
  a(1, 1) = 2;
  a(2, 2) = 5;
  Builder b;
  int t = b.add_nonneg();
  HermVar slack = b.add_herm(3, true);
  // t I - A = slack
  add_matrix_equality(b, 3, {{slack, -1.0, nullptr}},
                      {{t, Mat::Identity(3, 3)}}, a);
  b.obj(t, 1.0);
  auto r = solve(b.problem());
  REQUIRE(r.ok());
  CHECK(r.primal_value == doctest::Approx(5.0).epsilon(1e-7));
}

TEST_CASE("random sdp round trip against the top eigenvalue") {
  std::mt19937_64 rng(71);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    int n = 2 + int(rng() % 15);   // dims up to 16
    Mat a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
    a = 0.5 * (a + a.adjoint()).eval();

    Builder b;
    b.note_data(a);
    HermVar x = b.add_herm(n, false);
    int row = b.new_row(1.0);
    b.coeff(row, x, Mat::Identity(n, n));
    b.obj(x, -a);   // maximize tr[a x]
    auto r = solve(b.problem());
    REQUIRE(r.ok());
    double lmax = eig_h(a).values.maxCoeff();
    CHECK(-r.primal_value == doctest::Approx(lmax).epsilon(1e-7));
    CHECK(r.dual_value <= r.primal_value + 1e-7);
  }
}

TEST_CASE("robustness of the maximally entangled qubit pair") {
  auto r = gen_robustness(BipartiteState(isotropic(2, 1.0), 2, 2),
                          SeparabilityModel::ppt());
  CHECK(r.r == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("primal infeasibility carries a verifiable ray") {
  // x >= 0 with x = -1 has no solution
  ConicProblem p;
  p.orthant = 1;
  p.obj_orth = RVec::Ones(1);
  ConicProblem::Row row;
  row.orth = {{0, 1.0}};
  p.rows.push_back(row);
  p.rhs.push_back(-1.0);
  auto r = solve(p);
  REQUIRE(r.status == SolveStatus::PrimalInfeasible);
  REQUIRE(r.cert_y.size() == 1);
  // b'y = 1 and -A'y in the dual cone (here: -y >= 0)
  CHECK(-1.0 * r.cert_y(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(-r.cert_y(0) >= -1e-7);
}

TEST_CASE("dual infeasibility carries an improving cone ray") {
  // min -x with only x >= 0: unbounded below
  ConicProblem p;
  p.orthant = 1;
  p.obj_orth = -RVec::Ones(1);
  auto r = solve(p);
  REQUIRE(r.status == SolveStatus::DualInfeasible);
  REQUIRE(r.cert_orth.size() == 1);
  CHECK(r.cert_orth(0) >= -1e-9);
  CHECK(-r.cert_orth(0) == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("solves are deterministic") {
  std::mt19937_64 rng(73);
  Mat a = random_density(4, rng);
  Builder b1, b2;
  for (Builder* b : {&b1, &b2}) {
    HermVar x = b->add_herm(4, false);
    int row = b->new_row(1.0);
    b->coeff(row, x, Mat::Identity(4, 4));
    b->obj(x, a);
  }
  auto r1 = solve(b1.problem());
  auto r2 = solve(b2.problem());
  REQUIRE(r1.ok());
  CHECK(r1.primal_value == r2.primal_value);
  CHECK(r1.iterations == r2.iterations);
}

TEST_CASE("solve statistics accumulate") {
  solve_stats_reset();
  std::mt19937_64 rng(79);
  for (int t = 0; t < 3; ++t) {
    Mat a = random_density(3, rng);
    Builder b;
    HermVar x = b.add_herm(3, false);
    int row = b.new_row(1.0);
    b.coeff(row, x, Mat::Identity(3, 3));
    b.obj(x, a);
    REQUIRE(solve(b.problem()).ok());
  }
  auto st = solve_stats_snapshot();
  CHECK(st.solves >= 3);
  CHECK(st.failures == 0);
  CHECK(st.max_gap <= 1e-7);
  CHECK(st.max_duality_violation <= 1e-7);
}

TEST_CASE("builder extraction matches the embedded solution") {
  std::mt19937_64 rng(83);
  Mat a = random_density(4, rng);   // complex, forces the real embedding
  Builder b;
  b.note_data(a);
  HermVar x = b.add_herm(4, false);
  int row = b.new_row(1.0);
  b.coeff(row, x, Mat::Identity(4, 4));
  b.obj(x, -a);
  auto r = solve(b.problem());
  REQUIRE(r.ok());
  Mat xv = b.extract(r, x);
  CHECK(std::abs(xv.trace().real() - 1.0) < 1e-7);
  CHECK(min_eig(xv) > -1e-7);
  CHECK((a * xv).trace().real() == doctest::Approx(-r.primal_value).epsilon(1e-6));
}

TEST_CASE("problem validation rejects malformed input") {
  ConicProblem p;   // no blocks at all
  CHECK_THROWS_AS(p.validate(), std::exception);
}
