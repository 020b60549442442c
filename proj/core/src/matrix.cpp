#include "sepstein/matrix.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>

namespace sepstein {

void check_dim_cap(Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("matrix dimension must be positive");
  if (n > kDimCap)
    throw std::invalid_argument("matrix dimension " + std::to_string(n) +
                                " exceeds cap " + std::to_string(kDimCap));
}

namespace {

Mat symmetrize_checked(const Mat& x, const char* what) {
  if (x.rows() != x.cols()) throw std::invalid_argument(std::string(what) + ": not square");
  check_dim_cap(x.rows());
  Mat herm = 0.5 * (x + x.adjoint());
  double dev = (x - herm).norm();
  double scale = std::max(1.0, x.norm());
  if (dev > kHermTol * scale)
    throw std::invalid_argument(std::string(what) + ": anti-Hermitian part too large (" +
                                std::to_string(dev) + ")");
  return herm;
}

}  // namespace

HermitianMatrix::HermitianMatrix(const Mat& x) : m_(symmetrize_checked(x, "HermitianMatrix")) {}

BipartiteState::BipartiteState(const Mat& rho, int dimA, int dimB)
    : rho_(symmetrize_checked(rho, "BipartiteState")), dimA_(dimA), dimB_(dimB) {
  if (dimA < 1 || dimB < 1 || rho_.rows() != Eigen::Index(dimA) * dimB)
    throw std::invalid_argument("BipartiteState: dimension mismatch");
  if (std::abs(rho_.trace().real() - 1.0) > 1e-10)
    throw std::invalid_argument("BipartiteState: trace must be 1");
  if (!is_psd(rho_)) throw std::invalid_argument("BipartiteState: not PSD");
}

SubnormalizedState::SubnormalizedState(const Mat& rho, int dimA, int dimB)
    : rho_(symmetrize_checked(rho, "SubnormalizedState")), dimA_(dimA), dimB_(dimB) {
  if (dimA < 1 || dimB < 1 || rho_.rows() != Eigen::Index(dimA) * dimB)
    throw std::invalid_argument("SubnormalizedState: dimension mismatch");
  double tr = rho_.trace().real();
  if (tr <= 0.0 || tr > 1.0 + 1e-10)
    throw std::invalid_argument("SubnormalizedState: trace must be in (0, 1]");
  if (!is_psd(rho_)) throw std::invalid_argument("SubnormalizedState: not PSD");
}

Mat tensor(const Mat& a, const Mat& b) {
  check_dim_cap(a.rows() * b.rows());
  return Eigen::kroneckerProduct(a, b).eval();
}

Mat partial_transpose(const Mat& x, int dimA, int dimB) {
  if (x.rows() != Eigen::Index(dimA) * dimB || x.rows() != x.cols())
    throw std::invalid_argument("partial_transpose: dimension mismatch");
  Mat out(x.rows(), x.cols());
  for (int i = 0; i < dimA; ++i)
    for (int j = 0; j < dimA; ++j)
      out.block(i * dimB, j * dimB, dimB, dimB) =
          x.block(i * dimB, j * dimB, dimB, dimB).transpose();
  return out;
}

Mat partial_trace_a(const Mat& x, int dimA, int dimB) {
  if (x.rows() != Eigen::Index(dimA) * dimB || x.rows() != x.cols())
    throw std::invalid_argument("partial_trace_a: dimension mismatch");
  Mat out = Mat::Zero(dimB, dimB);
  for (int i = 0; i < dimA; ++i) out += x.block(i * dimB, i * dimB, dimB, dimB);
  return out;
}

Mat partial_trace_b(const Mat& x, int dimA, int dimB) {
  if (x.rows() != Eigen::Index(dimA) * dimB || x.rows() != x.cols())
    throw std::invalid_argument("partial_trace_b: dimension mismatch");
  Mat out = Mat::Zero(dimA, dimA);
  for (int i = 0; i < dimA; ++i)
    for (int j = 0; j < dimA; ++j) {
      Complex t = 0;
      for (int k = 0; k < dimB; ++k) t += x(i * dimB + k, j * dimB + k);
      out(i, j) = t;
    }
  return out;
}

EigH eig_h(const Mat& x) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (x + x.adjoint()));
  if (es.info() != Eigen::Success) throw NumericalError("eig_h: eigensolver failed");
  return EigH{es.eigenvalues(), es.eigenvectors()};
}

double trace_norm(const Mat& x) {
  if (x.rows() == x.cols() && (x - x.adjoint()).norm() < 1e-12 * std::max(1.0, x.norm()))
    return eig_h(x).values.cwiseAbs().sum();
  Eigen::JacobiSVD<Mat> svd(x);
  return svd.singularValues().sum();
}

double min_eig(const Mat& x) { return eig_h(x).values.minCoeff(); }

bool is_psd(const Mat& x, double tol) {
  double scale = std::max(1.0, x.norm());
  return min_eig(x) >= -tol * scale;
}

Mat psd_sqrt(const Mat& x) {
  EigH e = eig_h(x);
  double scale = std::max(1.0, e.values.cwiseAbs().maxCoeff());
  RVec v = e.values;
  for (int i = 0; i < v.size(); ++i) {
    if (v(i) < -kPsdTol * scale)
      throw NumericalError("psd_sqrt: matrix has eigenvalue " + std::to_string(v(i)));
    v(i) = std::sqrt(std::max(0.0, v(i)));
  }
  return e.vectors * v.asDiagonal() * e.vectors.adjoint();
}

Mat psd_inv_sqrt(const Mat& x, double support_tol) {
  EigH e = eig_h(x);
  double scale = std::max(1.0, e.values.cwiseAbs().maxCoeff());
  RVec v = e.values;
  for (int i = 0; i < v.size(); ++i) {
    if (v(i) < -kPsdTol * scale)
      throw NumericalError("psd_inv_sqrt: matrix has eigenvalue " + std::to_string(v(i)));
    v(i) = (v(i) > support_tol * scale) ? 1.0 / std::sqrt(v(i)) : 0.0;
  }
  return e.vectors * v.asDiagonal() * e.vectors.adjoint();
}

double fidelity(const Mat& rho, const Mat& sigma) {
  Mat sr = psd_sqrt(rho);
  Mat ss = psd_sqrt(sigma);
  double root = trace_norm(sr * ss);
  double ta = std::max(0.0, 1.0 - rho.trace().real());
  double tb = std::max(0.0, 1.0 - sigma.trace().real());
  double f = root + std::sqrt(ta * tb);
  return f * f;
}

double purified_distance(const Mat& rho, const Mat& sigma) {
  return std::sqrt(std::max(0.0, 1.0 - fidelity(rho, sigma)));
}

double gen_trace_distance(const Mat& rho, const Mat& sigma) {
  return 0.5 * trace_norm(rho - sigma) +
         0.5 * std::abs(rho.trace().real() - sigma.trace().real());
}

}  // namespace sepstein
