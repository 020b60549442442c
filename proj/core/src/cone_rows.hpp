#ifndef SEPSTEIN_CONE_ROWS_HPP
#define SEPSTEIN_CONE_ROWS_HPP

#include "sepstein/builder.hpp"
#include "sepstein/sep_models.hpp"

#include <vector>

namespace sepstein {

// Entrywise Hermitian-matrix equality whose terms may include cone
// variables; mirrors builder's add_matrix_equality but lives here because
// only the upper layers mix ConeVar into matrix rows.
struct ConeTerm {
  const ConeVar* y;
  double c;
};

inline void matrix_eq_rows(Builder& b, int n, const std::vector<MatTerm>& terms,
                           const std::vector<ScalarMatTerm>& sterms,
                           const std::vector<ConeTerm>& cterms, const Mat& constant) {
  bool want_imag = !b.real_data();
  auto emit = [&](const Mat& bas) {
    double rhs = constant.size() ? (bas.adjoint() * constant).trace().real() : 0.0;
    int row = b.new_row(rhs);
    for (const auto& t : terms) {
      Mat a = t.adj ? t.adj(bas) : bas;
      b.coeff(row, t.v, Mat(t.c * a));
    }
    for (const auto& st : sterms)
      b.coeff(row, st.idx, (bas.adjoint() * st.m).trace().real());
    for (const auto& ct : cterms) ct.y->coeff(b, row, Mat(ct.c * bas));
  };
  Mat bas = Mat::Zero(n, n);
  for (int p = 0; p < n; ++p)
    for (int q = p; q < n; ++q) {
      bas.setZero();
      if (p == q) {
        bas(p, p) = 1.0;
        emit(bas);
      } else {
        bas(p, q) = 1.0;
        bas(q, p) = 1.0;
        emit(bas);
        if (want_imag) {
          bas(p, q) = Complex(0.0, 1.0);
          bas(q, p) = Complex(0.0, -1.0);
          emit(bas);
        }
      }
    }
}

}  // namespace sepstein

#endif
