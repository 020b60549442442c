#include "sepstein/builder.hpp"

namespace sepstein {

bool is_real_mat(const Mat& a, double tol) {
  return a.imag().cwiseAbs().maxCoeff() <= tol * std::max(1.0, a.norm());
}

void Builder::note_data(const Mat& a) {
  if (real_data_ && a.size() > 0 && !is_real_mat(a)) real_data_ = false;
}

HermVar Builder::add_herm(int n, bool real_mode) {
  if (finalized_) throw std::logic_error("Builder: already finalized");
  check_dim_cap(n);
  HermVar v{static_cast<int>(prob_.psd_dims.size()), n, real_mode};
  int side = real_mode ? n : 2 * n;
  prob_.psd_dims.push_back(side);
  prob_.obj_psd.push_back(RMat::Zero(side, side));
  return v;
}

int Builder::add_nonneg() {
  if (finalized_) throw std::logic_error("Builder: already finalized");
  int idx = prob_.orthant++;
  RVec c = RVec::Zero(prob_.orthant);
  c.head(idx) = prob_.obj_orth;
  prob_.obj_orth = c;
  return idx;
}

int Builder::new_row(double rhs) {
  prob_.rows.emplace_back();
  prob_.rhs.push_back(rhs);
  return static_cast<int>(prob_.rows.size()) - 1;
}

RMat Builder::embed_coeff(const HermVar& v, const Mat& a) const {
  if (a.rows() != v.n || a.cols() != v.n)
    throw std::invalid_argument("Builder: coefficient shape mismatch");
  if (v.real_mode) {
    RMat g = a.real();
    return 0.5 * (g + g.transpose());
  }
  RMat g(2 * v.n, 2 * v.n);
  RMat re = 0.5 * (a.real() + a.real().transpose());
  RMat im = 0.5 * (a.imag() - a.imag().transpose());
  g << re, -im, im, re;
  return 0.5 * g;
}

void Builder::coeff(int row, const HermVar& v, const Mat& a) {
  RMat g = embed_coeff(v, a);
  for (auto& [k, m] : prob_.rows[row].psd)
    if (k == v.block) {
      m += g;
      return;
    }
  prob_.rows[row].psd.emplace_back(v.block, std::move(g));
}

void Builder::coeff(int row, int orth_idx, double c) {
  for (auto& [j, x] : prob_.rows[row].orth)
    if (j == orth_idx) {
      x += c;
      return;
    }
  prob_.rows[row].orth.emplace_back(orth_idx, c);
}

void Builder::obj(const HermVar& v, const Mat& a) {
  prob_.obj_psd[v.block] += embed_coeff(v, a);
}

void Builder::obj(int orth_idx, double c) { prob_.obj_orth(orth_idx) += c; }

const ConicProblem& Builder::problem() {
  if (!finalized_) {
    // Drop rows that vanished (e.g. imaginary-part equalities of real data);
    // they would make the Schur complement singular.
    std::vector<ConicProblem::Row> rows;
    std::vector<double> rhs;
    for (size_t i = 0; i < prob_.rows.size(); ++i) {
      double norm = std::abs(prob_.rhs[i]);
      for (const auto& [k, m] : prob_.rows[i].psd) norm += m.cwiseAbs().maxCoeff();
      for (const auto& [j, c] : prob_.rows[i].orth) norm += std::abs(c);
      if (norm > 1e-14) {
        rows.push_back(std::move(prob_.rows[i]));
        rhs.push_back(prob_.rhs[i]);
      }
    }
    prob_.rows = std::move(rows);
    prob_.rhs = std::move(rhs);
    finalized_ = true;
  }
  return prob_;
}

Mat Builder::extract(const SolveResult& r, const HermVar& v) const {
  const RMat& y = r.psd_vars.at(v.block);
  if (v.real_mode) return y.cast<Complex>();
  int n = v.n;
  RMat re = 0.5 * (y.topLeftCorner(n, n) + y.bottomRightCorner(n, n));
  RMat im = 0.5 * (y.bottomLeftCorner(n, n) - y.topRightCorner(n, n));
  Mat out = re.cast<Complex>() + Complex(0, 1) * im.cast<Complex>();
  return 0.5 * (out + out.adjoint());
}

namespace {

// Hermitian basis of the n x n output space; calls fn(B, is_imag).
template <typename F>
void for_each_herm_basis(int n, F&& fn) {
  for (int p = 0; p < n; ++p)
    for (int q = p; q < n; ++q) {
      Mat b = Mat::Zero(n, n);
      if (p == q) {
        b(p, p) = 1.0;
        fn(b, false);
      } else {
        b(p, q) = 1.0;
        b(q, p) = 1.0;
        fn(b, false);
        b(p, q) = Complex(0, 1);
        b(q, p) = Complex(0, -1);
        fn(b, true);
      }
    }
}

}  // namespace

void add_matrix_equality(Builder& b, int n, const std::vector<MatTerm>& terms,
                         const std::vector<ScalarMatTerm>& scalar_terms,
                         const Mat& constant) {
  for_each_herm_basis(n, [&](const Mat& basis, bool) {
    double rhs = constant.size() ? std::real((basis.adjoint() * constant).trace()) : 0.0;
    int row = b.new_row(rhs);
    for (const auto& t : terms) {
      Mat a = t.adj ? t.adj(basis) : basis;
      b.coeff(row, t.v, t.c * a);
    }
    for (const auto& s : scalar_terms)
      b.coeff(row, s.idx, std::real((basis.adjoint() * s.m).trace()));
  });
}

HermVar add_psd_of(Builder& b, int n, bool real_mode, const std::vector<MatTerm>& terms,
                   const std::vector<ScalarMatTerm>& scalar_terms, const Mat& constant) {
  HermVar slack = b.add_herm(n, real_mode);
  std::vector<MatTerm> all = terms;
  all.push_back({slack, -1.0, nullptr});
  add_matrix_equality(b, n, all, scalar_terms, constant.size() ? Mat(-constant) : Mat());
  return slack;
}

std::function<Mat(const Mat&)> adj_identity() {
  return [](const Mat& x) { return x; };
}

std::function<Mat(const Mat&)> adj_partial_transpose(int dimA, int dimB) {
  return [dimA, dimB](const Mat& x) { return partial_transpose(x, dimA, dimB); };
}

std::function<Mat(const Mat&)> adj_corner(int bigN, int off, int n) {
  return [bigN, off, n](const Mat& x) {
    Mat out = Mat::Zero(bigN, bigN);
    out.block(off, off, n, n) = x;
    return out;
  };
}

}  // namespace sepstein
