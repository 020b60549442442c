#include "sepstein/states.hpp"

namespace sepstein {

namespace {

void require_d(int d, int min) {
  if (d < min) throw std::invalid_argument("local dimension too small");
  check_dim_cap(Eigen::Index(d) * d);
}

}  // namespace

Mat max_entangled(int d) {
  require_d(d, 2);
  Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(d * d);
  for (int i = 0; i < d; ++i) phi(i * d + i) = 1.0 / std::sqrt(double(d));
  return phi * phi.adjoint();
}

Mat tau_complement(int d) {
  require_d(d, 2);
  return (Mat::Identity(d * d, d * d) - max_entangled(d)) / double(d * d - 1);
}

Mat isotropic(int d, double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("isotropic: p must be in [0,1]");
  return p * max_entangled(d) + (1.0 - p) * tau_complement(d);
}

Mat swap_operator(int d) {
  require_d(d, 2);
  Mat f = Mat::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) f(i * d + j, j * d + i) = 1.0;
  return f;
}

Mat antisym_state(int d) {
  require_d(d, 2);
  return (Mat::Identity(d * d, d * d) - swap_operator(d)) / double(d) / double(d - 1);
}

Mat sym_state(int d) {
  require_d(d, 2);
  return (Mat::Identity(d * d, d * d) + swap_operator(d)) / double(d) / double(d + 1);
}

Mat werner(int d, double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("werner: p must be in [0,1]");
  return p * antisym_state(d) + (1.0 - p) * sym_state(d);
}

Mat diag_projector(int d) {
  require_d(d, 2);
  Mat p = Mat::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i) p(i * d + i, i * d + i) = 1.0;
  return p;
}

Mat twirl(const Mat& x, int d) {
  if (x.rows() != Eigen::Index(d) * d || x.rows() != x.cols())
    throw std::invalid_argument("twirl: shape mismatch");
  Mat phi = max_entangled(d);
  Complex overlap = (phi * x).trace();
  Complex rest = x.trace() - overlap;
  return overlap * phi + rest * tau_complement(d);
}

Mat werner_twirl(const Mat& x, int d) {
  if (x.rows() != Eigen::Index(d) * d || x.rows() != x.cols())
    throw std::invalid_argument("werner_twirl: shape mismatch");
  Mat f = swap_operator(d);
  Complex anti = 0.5 * (x.trace() - (f * x).trace());
  Complex sym = x.trace() - anti;
  return anti * antisym_state(d) + sym * sym_state(d);
}

ChannelSpec ChannelSpec::make_twirl(int d) {
  require_d(d, 2);
  return ChannelSpec{Kind::Twirl, d, {}, {}, {}};
}

ChannelSpec ChannelSpec::make_werner_twirl(int d) {
  require_d(d, 2);
  return ChannelSpec{Kind::WernerTwirl, d, {}, {}, {}};
}

ChannelSpec ChannelSpec::make_theta(int d_out, const Mat& e) {
  require_d(d_out, 2);
  Mat eh = 0.5 * (e + e.adjoint());
  double lo = min_eig(eh);
  double hi = min_eig(Mat(Mat::Identity(e.rows(), e.cols()) - eh));
  if (lo < -1e-9 || hi < -1e-9)
    throw std::invalid_argument("make_theta: E must satisfy 0 <= E <= 1");
  return ChannelSpec{Kind::Theta, d_out, eh, {}, {}};
}

ChannelSpec ChannelSpec::make_lambda(int d_in, const Mat& rho_tilde, const Mat& omega) {
  require_d(d_in, 2);
  if (rho_tilde.rows() != omega.rows())
    throw std::invalid_argument("make_lambda: output dims differ");
  if (!is_psd(rho_tilde) || !is_psd(omega) ||
      std::abs(rho_tilde.trace().real() - 1.0) > 1e-9 ||
      std::abs(omega.trace().real() - 1.0) > 1e-9)
    throw std::invalid_argument("make_lambda: rho/omega must be states");
  return ChannelSpec{Kind::Lambda, d_in, {}, rho_tilde, omega};
}

Mat apply_channel(const ChannelSpec& spec, const Mat& x) {
  switch (spec.kind) {
    case ChannelSpec::Kind::Twirl:
      return twirl(x, spec.d);
    case ChannelSpec::Kind::WernerTwirl:
      return werner_twirl(x, spec.d);
    case ChannelSpec::Kind::Theta: {
      if (x.rows() != spec.e.rows()) throw std::invalid_argument("Theta: shape mismatch");
      Complex w = (spec.e * x).trace();
      return w * max_entangled(spec.d) + (x.trace() - w) * tau_complement(spec.d);
    }
    case ChannelSpec::Kind::Lambda: {
      int dd = spec.d * spec.d;
      if (x.rows() != dd) throw std::invalid_argument("Lambda: shape mismatch");
      Complex w = (max_entangled(spec.d) * x).trace();
      return w * spec.rho_tilde + (x.trace() - w) * spec.omega;
    }
  }
  throw std::logic_error("apply_channel: bad kind");
}

Mat adjoint_channel(const ChannelSpec& spec, const Mat& y) {
  switch (spec.kind) {
    case ChannelSpec::Kind::Twirl:
      return twirl(y, spec.d);
    case ChannelSpec::Kind::WernerTwirl:
      return werner_twirl(y, spec.d);
    case ChannelSpec::Kind::Theta: {
      int dd = spec.d * spec.d;
      if (y.rows() != dd) throw std::invalid_argument("Theta adjoint: shape mismatch");
      Complex a = (max_entangled(spec.d) * y).trace();
      Complex b = (tau_complement(spec.d) * y).trace();
      int n = static_cast<int>(spec.e.rows());
      return a * spec.e + b * (Mat::Identity(n, n) - spec.e);
    }
    case ChannelSpec::Kind::Lambda: {
      if (y.rows() != spec.rho_tilde.rows())
        throw std::invalid_argument("Lambda adjoint: shape mismatch");
      Complex a = (spec.rho_tilde * y).trace();
      Complex b = (spec.omega * y).trace();
      int dd = spec.d * spec.d;
      Mat phi = max_entangled(spec.d);
      return a * phi + b * (Mat::Identity(dd, dd) - phi);
    }
  }
  throw std::logic_error("adjoint_channel: bad kind");
}

Span3 span3(const Mat& x, int d) {
  if (x.rows() != Eigen::Index(d) * d || x.rows() != x.cols())
    throw std::invalid_argument("span3: shape mismatch");
  Mat f = swap_operator(d);
  Mat phi = max_entangled(d);
  // Gram matrix of {1, F, Phi} under <A,B> = tr[A B].
  Eigen::Matrix3d g;
  double dd = double(d) * d;
  g << dd, d, 1, d, dd, 1, 1, 1, 1;
  Eigen::Vector3d rhs;
  rhs << x.trace().real(), (f * x).trace().real(), (phi * x).trace().real();
  Eigen::Vector3d co = g.ldlt().solve(rhs);
  Span3 s{co(0), co(1), co(2), 0.0};
  s.residual = (x - span3_mat(s, d)).norm();
  return s;
}

Mat span3_mat(const Span3& s, int d) {
  return s.a * Mat::Identity(d * d, d * d) + s.b * swap_operator(d) +
         s.c * max_entangled(d);
}

Span3 span3_pt(const Span3& s, int d) {
  return Span3{s.a, s.c / double(d), s.b * double(d), s.residual};
}

std::array<double, 3> span3_eigs(const Span3& s) {
  return {s.a - s.b, s.a + s.b, s.a + s.b + s.c};
}

}  // namespace sepstein
