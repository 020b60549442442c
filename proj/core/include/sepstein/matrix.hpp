#ifndef SEPSTEIN_MATRIX_HPP
#define SEPSTEIN_MATRIX_HPP

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace sepstein {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Hard limit on matrix side length; programs beyond this are refused
// rather than silently ground through the dense solver.
inline constexpr int kDimCap = 256;

// Hermiticity deviation accepted at construction, measured in operator
// norm of (X - X^dag)/2 relative to max(1, ||X||).
inline constexpr double kHermTol = 1e-10;

// Eigenvalues above -kPsdTol count as nonnegative; tiny negative
// eigenvalues are clipped where a PSD factor is required.
inline constexpr double kPsdTol = 1e-10;

class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// A produced artifact contradicts its own certificate (should not happen
// under exact models); distinct from solver trouble so callers can map it
// to a separate failure mode.
class ConsistencyError : public std::runtime_error {
public:
  explicit ConsistencyError(const std::string& what) : std::runtime_error(what) {}
};

void check_dim_cap(Eigen::Index n);

// Validated Hermitian matrix. Construction symmetrizes (X + X^dag)/2 and
// rejects inputs whose anti-Hermitian part exceeds kHermTol.
class HermitianMatrix {
public:
  explicit HermitianMatrix(const Mat& x);
  int dim() const { return static_cast<int>(m_.rows()); }
  const Mat& mat() const { return m_; }

  static HermitianMatrix zero(int n) { return HermitianMatrix(Mat::Zero(n, n)); }
  static HermitianMatrix identity(int n) { return HermitianMatrix(Mat::Identity(n, n)); }

private:
  Mat m_;
};

// Bipartite density operator on C^dA (x) C^dB: Hermitian, PSD up to
// kPsdTol, unit trace up to 1e-10.
class BipartiteState {
public:
  BipartiteState(const Mat& rho, int dimA, int dimB);
  int dimA() const { return dimA_; }
  int dimB() const { return dimB_; }
  int dim() const { return dimA_ * dimB_; }
  const Mat& mat() const { return rho_; }

private:
  Mat rho_;
  int dimA_, dimB_;
};

// Like BipartiteState but trace in (0, 1 + 1e-10].
class SubnormalizedState {
public:
  SubnormalizedState(const Mat& rho, int dimA, int dimB);
  int dimA() const { return dimA_; }
  int dimB() const { return dimB_; }
  int dim() const { return dimA_ * dimB_; }
  const Mat& mat() const { return rho_; }

private:
  Mat rho_;
  int dimA_, dimB_;
};

Mat tensor(const Mat& a, const Mat& b);

// Transpose on the B factor (dimA x dimB split, row-major composite index).
Mat partial_transpose(const Mat& x, int dimA, int dimB);

Mat partial_trace_a(const Mat& x, int dimA, int dimB);
Mat partial_trace_b(const Mat& x, int dimA, int dimB);

// Eigendecomposition of a Hermitian matrix; ascending eigenvalues.
struct EigH {
  RVec values;
  Mat vectors;
};
EigH eig_h(const Mat& x);

double trace_norm(const Mat& x);
double min_eig(const Mat& x);
bool is_psd(const Mat& x, double tol = kPsdTol);

// PSD square root with tiny negative eigenvalues clipped to zero;
// eigenvalues below -kPsdTol * scale raise NumericalError.
Mat psd_sqrt(const Mat& x);

// Moore-Penrose-style inverse square root on the support of x.
Mat psd_inv_sqrt(const Mat& x, double support_tol = 1e-12);

// Uhlmann fidelity for subnormalized operators:
// F = (||sqrt(rho) sqrt(sigma)||_1 + sqrt((1-tr rho)(1-tr sigma)))^2.
double fidelity(const Mat& rho, const Mat& sigma);

// P = sqrt(1 - F).
double purified_distance(const Mat& rho, const Mat& sigma);

// T = ||rho - sigma||_1 / 2 + |tr rho - tr sigma| / 2.
double gen_trace_distance(const Mat& rho, const Mat& sigma);

}  // namespace sepstein

#endif
