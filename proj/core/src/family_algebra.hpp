#ifndef SEPSTEIN_FAMILY_ALGEBRA_HPP
#define SEPSTEIN_FAMILY_ALGEBRA_HPP

#include "sepstein/sep_models.hpp"
#include "sepstein/states.hpp"

#include <array>
#include <utility>
#include <vector>

namespace sepstein {

// Two-dimensional commutative algebra attached to an exact family model:
// the span of two orthogonal projectors b1, b2. Every invariant operator
// is e1 b1 + e2 b2 with eigenvalues e1, e2, which turns the programs over
// invariant data into tiny linear programs. w1, w2 are the extreme points
// of the family's trace-one separable slice.
struct FamilyAlgebra {
  SeparabilityModel model;
  int d = 0;
  Mat b1, b2;
  Mat w1, w2;
  double m1 = 0, m2 = 0;   // ranks of b1, b2
};

inline FamilyAlgebra family_algebra(const SeparabilityModel& model, int d) {
  FamilyAlgebra fa;
  fa.model = model;
  fa.d = d;
  Mat id = Mat::Identity(Eigen::Index(d) * d, Eigen::Index(d) * d);
  if (model.kind == SeparabilityModel::Kind::WernerExact) {
    Mat f = swap_operator(d);
    fa.b1 = 0.5 * (id - f);
    fa.b2 = 0.5 * (id + f);
    fa.w1 = sym_state(d);
    fa.w2 = 0.5 * (antisym_state(d) + sym_state(d));
  } else if (model.kind == SeparabilityModel::Kind::IsotropicExact) {
    fa.b1 = max_entangled(d);
    fa.b2 = id - fa.b1;
    fa.w1 = tau_complement(d);
    fa.w2 = (1.0 / d) * fa.b1 + ((d - 1.0) / d) * tau_complement(d);
  } else {
    throw std::invalid_argument("family_algebra: model is not an exact family");
  }
  fa.m1 = fa.b1.trace().real();
  fa.m2 = fa.b2.trace().real();
  return fa;
}

// Eigenvalue coordinates of the algebra projection of x.
inline std::pair<double, double> family_coords(const Mat& x, const FamilyAlgebra& fa) {
  return {(fa.b1 * x).trace().real() / fa.m1, (fa.b2 * x).trace().real() / fa.m2};
}

inline bool family_invariant(const Mat& x, const FamilyAlgebra& fa, double tol = 1e-9) {
  auto [e1, e2] = family_coords(x, fa);
  Mat proj = e1 * fa.b1 + e2 * fa.b2;
  return (x - proj).norm() <= tol * std::max(1.0, x.norm());
}

// Linear forms L with (e1 b1 + e2 b2)^G >= 0  iff  L[0] e1 + L[1] e2 >= 0
// for every returned L. Both families: an invariant operator is PPT iff it
// is separable, so these double as separable-cone conditions (given e >= 0).
inline std::vector<std::array<double, 2>> family_pt_conditions(const FamilyAlgebra& fa) {
  auto eg1 = span3_eigs(span3_pt(span3(fa.b1, fa.d), fa.d));
  auto eg2 = span3_eigs(span3_pt(span3(fa.b2, fa.d), fa.d));
  std::vector<std::array<double, 2>> out;
  for (int k = 0; k < 3; ++k) out.push_back({eg1[k], eg2[k]});
  return out;
}

}  // namespace sepstein

#endif
