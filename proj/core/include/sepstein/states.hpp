#ifndef SEPSTEIN_STATES_HPP
#define SEPSTEIN_STATES_HPP

#include "sepstein/matrix.hpp"

#include <array>

namespace sepstein {

// Named d x d bipartite states.
Mat max_entangled(int d);                 // |Phi><Phi|
Mat tau_complement(int d);                // (1 - Phi) / (d^2 - 1)
Mat isotropic(int d, double p);           // p Phi + (1-p) tau
Mat swap_operator(int d);                 // F |ij> = |ji>
Mat antisym_state(int d);                 // (1 - F) / (d(d-1)), d >= 2
Mat sym_state(int d);                     // (1 + F) / (d(d+1))
Mat werner(int d, double p);              // p alpha + (1-p) sigma
Mat diag_projector(int d);                // sum_i |ii><ii|

// Isotropic twirl T(X) = Phi tr[X Phi] + tau tr[X (1-Phi)].
Mat twirl(const Mat& x, int d);

// Werner twirl T_W(X) = alpha tr[X (1-F)/2] + sigma tr[X (1+F)/2].
Mat werner_twirl(const Mat& x, int d);

struct ChannelSpec {
  enum class Kind { Twirl, WernerTwirl, Theta, Lambda } kind;
  int d = 0;        // twirls: local dim; Theta: output local dim; Lambda: input local dim
  Mat e;            // Theta test operator, 0 <= e <= 1
  Mat rho_tilde;    // Lambda target state
  Mat omega;        // Lambda garbage state

  static ChannelSpec make_twirl(int d);
  static ChannelSpec make_werner_twirl(int d);
  // Theta_{d;E}(X) = Phi_d tr[E X] + tau_d tr[(1-E) X].
  static ChannelSpec make_theta(int d_out, const Mat& e);
  // Lambda_{d;rho,omega}(X) = rho tr[X Phi_d] + omega tr[X (1-Phi_d)].
  static ChannelSpec make_lambda(int d_in, const Mat& rho_tilde, const Mat& omega);
};

Mat apply_channel(const ChannelSpec& spec, const Mat& x);
Mat adjoint_channel(const ChannelSpec& spec, const Mat& y);

// Coordinates of x in span{1, F, Phi}. The span is a commutative algebra
// whose common eigenspaces are: antisymmetric (value a - b), symmetric
// orthogonal to Phi (a + b), and Phi itself (a + b + c). Closed under
// partial transpose: (a 1 + b F + c Phi)^G = a 1 + (c/d) F + (b d) Phi.
struct Span3 {
  double a = 0, b = 0, c = 0;   // x ~ a 1 + b F + c Phi
  double residual = 0;          // Frobenius norm of the remainder
};
Span3 span3(const Mat& x, int d);
Mat span3_mat(const Span3& s, int d);
Span3 span3_pt(const Span3& s, int d);
// Eigenvalues on the three common eigenspaces, in the order above.
std::array<double, 3> span3_eigs(const Span3& s);

}  // namespace sepstein

#endif
