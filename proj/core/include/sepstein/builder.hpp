#ifndef SEPSTEIN_BUILDER_HPP
#define SEPSTEIN_BUILDER_HPP

#include "sepstein/conic.hpp"
#include "sepstein/matrix.hpp"

#include <functional>
#include <vector>

namespace sepstein {

// Hermitian n x n variable hosted in the real kernel. In real mode the
// block is n x n symmetric; otherwise it is the 2n x 2n embedding
// [[Re, -Im], [Im, Re]] and coefficients carry the 1/2 correction so
// kernel inner products equal the complex ones.
struct HermVar {
  int block = -1;
  int n = 0;
  bool real_mode = true;
};

class Builder {
public:
  HermVar add_herm(int n, bool real_mode);
  int add_nonneg();                       // returns orthant variable index

  int new_row(double rhs);
  void coeff(int row, const HermVar& v, const Mat& a);   // adds <a, v> to the row
  void coeff(int row, int orth_idx, double c);

  void obj(const HermVar& v, const Mat& a);
  void obj(int orth_idx, double c);

  const ConicProblem& problem();          // finalized: drops all-zero rows
  Mat extract(const SolveResult& r, const HermVar& v) const;
  double extract(const SolveResult& r, int orth_idx) const { return r.orth_vars(orth_idx); }

  bool real_data() const { return real_data_; }
  void note_data(const Mat& a);           // feeds the real-mode heuristic

private:
  RMat embed_coeff(const HermVar& v, const Mat& a) const;
  ConicProblem prob_;
  bool finalized_ = false;
  bool real_data_ = true;
};

bool is_real_mat(const Mat& a, double tol = 1e-14);

// One term of a Hermitian-matrix equality: coeff * op(v), where adj is the
// adjoint of the linear op (identity, partial transpose, corner padding, ...).
struct MatTerm {
  HermVar v;
  double c = 1.0;
  std::function<Mat(const Mat&)> adj;   // nullptr means identity
};

// One term (scalar orthant variable) * M.
struct ScalarMatTerm {
  int idx = -1;
  Mat m;
};

// Emits entrywise rows for: sum_j terms + sum_k scalar terms = constant,
// over Hermitian n x n expressions. All-zero rows are dropped later.
void add_matrix_equality(Builder& b, int n, const std::vector<MatTerm>& terms,
                         const std::vector<ScalarMatTerm>& scalar_terms,
                         const Mat& constant);

// Fresh PSD slack v with v = expression; returns the slack.
HermVar add_psd_of(Builder& b, int n, bool real_mode, const std::vector<MatTerm>& terms,
                   const std::vector<ScalarMatTerm>& scalar_terms, const Mat& constant);

// Adjoint helpers for MatTerm.
std::function<Mat(const Mat&)> adj_identity();
std::function<Mat(const Mat&)> adj_partial_transpose(int dimA, int dimB);
// Adjoint of extracting the n x n corner at (off, off) from an N x N variable.
std::function<Mat(const Mat&)> adj_corner(int bigN, int off, int n);

}  // namespace sepstein

#endif
