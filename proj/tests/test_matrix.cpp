#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sepstein/matrix.hpp>
#include <sepstein/random.hpp>
#include <sepstein/serialize.hpp>
#include <sepstein/states.hpp>

#include <random>

using namespace sepstein;

namespace {

Mat rand_herm(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat x(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) x(i, j) = Complex(g(rng), g(rng));
  return 0.5 * (x + x.adjoint()).eval();
}

}  // namespace

TEST_CASE("hermitian construction symmetrizes and rejects") {
  Mat x(2, 2);
  x << 1.0, Complex(0.5, 0.25), Complex(0.5, -0.25), 2.0;
  HermitianMatrix h(x);
  CHECK((h.mat() - h.mat().adjoint()).norm() == doctest::Approx(0.0).epsilon(1e-14));

  Mat bad(2, 2);
  bad << 1.0, 1.0, -1.0, 1.0;   // anti-Hermitian off-diagonal part
  CHECK_THROWS_AS(HermitianMatrix{bad}, std::exception);
}

TEST_CASE("dimension cap enforced") {
  CHECK_THROWS_AS(check_dim_cap(kDimCap + 1), std::exception);
  CHECK_NOTHROW(check_dim_cap(kDimCap));
}

TEST_CASE("tensor basics") {
  Mat i2 = Mat::Identity(2, 2);
  CHECK((tensor(i2, i2) - Mat::Identity(4, 4)).norm() == doctest::Approx(0.0));

  Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2);
  p0(0, 0) = 1;
  p1(1, 1) = 1;
  Mat t = tensor(p0, p1);
  Mat expect = Mat::Zero(4, 4);
  expect(1, 1) = 1;   // |01><01|
  CHECK((t - expect).norm() == doctest::Approx(0.0));
}

TEST_CASE("tensor then partial transpose equals transposing the second factor") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 5; ++t) {
    Mat x = rand_herm(2, rng), y = rand_herm(3, rng);
    Mat lhs = partial_transpose(tensor(x, y), 2, 3);
    Mat rhs = tensor(x, y.transpose().eval());
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("partial transpose of the maximally entangled state is the scaled swap") {
  for (int d : {2, 3}) {
    Mat lhs = partial_transpose(max_entangled(d), d, d);
    Mat rhs = swap_operator(d) / double(d);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("partial transpose is an involution and fixes the identity") {
  Mat i9 = Mat::Identity(9, 9);
  CHECK((partial_transpose(i9, 3, 3) - i9).norm() == doctest::Approx(0.0));

  std::mt19937_64 rng(7);
  for (int t = 0; t < 5; ++t) {
    Mat rho = random_density(9, rng);
    Mat back = partial_transpose(partial_transpose(rho, 3, 3), 3, 3);
    CHECK((back - rho).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("partial traces") {
  for (int d : {2, 3}) {
    Mat mb = partial_trace_b(max_entangled(d), d, d);
    CHECK((mb - Mat::Identity(d, d) / double(d)).cwiseAbs().maxCoeff() < 1e-13);
  }

  std::mt19937_64 rng(13);
  Mat a = random_density(2, rng), b = random_density(3, rng);
  Mat ta = partial_trace_a(tensor(2.0 * a, b), 2, 3);
  CHECK((ta - 2.0 * b).cwiseAbs().maxCoeff() < 1e-13);

  // PSD preserved
  Mat rho = random_density(6, rng);
  CHECK(min_eig(partial_trace_a(rho, 2, 3)) > -1e-12);
  CHECK(min_eig(partial_trace_b(rho, 2, 3)) > -1e-12);
}

TEST_CASE("tensor and partial trace are adjoint") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 5; ++t) {
    Mat a = rand_herm(2, rng);
    Mat x = rand_herm(6, rng);
    Complex lhs = (tensor(a, Mat::Identity(3, 3)) * x).trace();
    Complex rhs = (a * partial_trace_b(x, 2, 3)).trace();
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("trace norm and eigendecomposition") {
  CHECK(trace_norm(Mat::Identity(5, 5)) == doctest::Approx(5.0));
  std::mt19937_64 rng(19);
  Mat rho = random_density(4, rng);
  CHECK(trace_norm(rho - rho) == doctest::Approx(0.0));
  CHECK(trace_norm(max_entangled(2) - tau_complement(2)) == doctest::Approx(2.0).epsilon(1e-10));

  Mat x = rand_herm(6, rng);
  EigH e = eig_h(x);
  Mat recon = e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
  CHECK((x - recon).norm() < 1e-9 * 6);
  for (int i = 1; i < 6; ++i) CHECK(e.values(i) >= e.values(i - 1));
}

TEST_CASE("fidelity of normalized and degenerate inputs") {
  std::mt19937_64 rng(23);
  Mat rho = random_density(4, rng);
  CHECK(fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-9));

  Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2);
  p0(0, 0) = 1;
  p1(1, 1) = 1;
  CHECK(fidelity(p0, p1) == doctest::Approx(0.0).epsilon(1e-12));

  Mat z = Mat::Zero(2, 2);
  CHECK(fidelity(z, z) == doctest::Approx(1.0));
}

TEST_CASE("distances on subnormalized inputs") {
  std::mt19937_64 rng(29);
  Mat rho = random_density(4, rng);
  CHECK(purified_distance(rho, rho) == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(gen_trace_distance(rho, 0.5 * rho) >= 0.25 - 1e-12);
}

TEST_CASE("trace distance vs purified distance ordering on random pairs") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 200; ++t) {
    Mat rho = random_density(4, rng), sigma = random_density(4, rng);
    double T = gen_trace_distance(rho, sigma);
    double P = purified_distance(rho, sigma);
    CHECK(T <= P + 1e-8);
    CHECK(P <= std::sqrt(T * (2.0 - T)) + 1e-8);
  }
}

TEST_CASE("state validation") {
  Mat bad = Mat::Identity(4, 4);   // trace 4
  CHECK_THROWS_AS(BipartiteState(bad, 2, 2), std::exception);
  CHECK_NOTHROW(BipartiteState(bad / 4.0, 2, 2));
  CHECK_NOTHROW(SubnormalizedState(bad / 8.0, 2, 2));
  CHECK_THROWS_AS(SubnormalizedState(bad / 2.0, 2, 2), std::exception);
}

TEST_CASE("json round-trip is bit-exact") {
  std::mt19937_64 rng(37);
  Mat rho = random_density(4, rng);
  Mat back = matrix_from_json(matrix_to_json(rho));
  CHECK(back.rows() == 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      CHECK(back(i, j).real() == rho(i, j).real());
      CHECK(back(i, j).imag() == rho(i, j).imag());
    }

  BipartiteState st = state_from_json(state_to_json(rho, 2, 2));
  CHECK(st.dimA() == 2);
  CHECK(st.dimB() == 2);
  CHECK((st.mat() - rho).norm() == 0.0);
}
