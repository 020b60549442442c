#include "sepstein/conic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <mutex>

namespace sepstein {

namespace {

std::mutex g_stats_mutex;
SolveStats g_stats;

void record_solve(const SolveResult& r) {
  std::lock_guard<std::mutex> lock(g_stats_mutex);
  ++g_stats.solves;
  if (r.status == SolveStatus::Optimal) {
    g_stats.max_gap = std::max(g_stats.max_gap, r.gap);
    g_stats.max_duality_violation =
        std::max(g_stats.max_duality_violation, r.dual_value - r.primal_value);
  } else if (r.status == SolveStatus::IterLimit || r.status == SolveStatus::Numerical) {
    ++g_stats.failures;
  }
}

double frob_dot(const RMat& a, const RMat& b) { return (a.array() * b.array()).sum(); }

// Smallest eigenvalue of the symmetric matrix L^{-1} D L^{-T} given the
// Cholesky factor L of the current block; used for step-to-boundary.
double min_gen_eig(const Eigen::LLT<RMat>& llt, const RMat& d) {
  RMat t = llt.matrixL().solve(d);
  t = llt.matrixL().solve(t.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (t + t.transpose()),
                                         Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

struct Scaling {
  // PSD blocks: lambda = scaled spectrum, R / Rinv the NT scaling factors,
  // G = R R^T so that the scaled point is Rinv X Rinv^T = R^T S R = diag(lambda).
  std::vector<RVec> lambda;
  std::vector<RMat> R, Rinv, G;
  RVec w2;     // orthant x/s
};

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::PrimalInfeasible: return "primal_infeasible";
    case SolveStatus::DualInfeasible: return "dual_infeasible";
    case SolveStatus::IterLimit: return "iteration_limit";
    case SolveStatus::Numerical: return "numerical";
  }
  return "unknown";
}

void ConicProblem::validate() const {
  if (psd_dims.empty() && orthant == 0)
    throw std::invalid_argument("ConicProblem: at least one block required");
  if (obj_psd.size() != psd_dims.size())
    throw std::invalid_argument("ConicProblem: objective/block count mismatch");
  for (size_t k = 0; k < psd_dims.size(); ++k) {
    if (psd_dims[k] < 1) throw std::invalid_argument("ConicProblem: bad block dim");
    if (obj_psd[k].rows() != psd_dims[k] || obj_psd[k].cols() != psd_dims[k])
      throw std::invalid_argument("ConicProblem: objective block shape mismatch");
  }
  if (obj_orth.size() != orthant)
    throw std::invalid_argument("ConicProblem: orthant objective size mismatch");
  if (rows.size() != rhs.size())
    throw std::invalid_argument("ConicProblem: rows/rhs size mismatch");
  for (const auto& row : rows) {
    for (const auto& [k, a] : row.psd) {
      if (k < 0 || k >= static_cast<int>(psd_dims.size()))
        throw std::invalid_argument("ConicProblem: row references unknown block");
      if (a.rows() != psd_dims[k] || a.cols() != psd_dims[k])
        throw std::invalid_argument("ConicProblem: row coefficient shape mismatch");
    }
    for (const auto& [j, c] : row.orth) {
      (void)c;
      if (j < 0 || j >= orthant)
        throw std::invalid_argument("ConicProblem: row references unknown orthant var");
    }
  }
}

SolveStats solve_stats_snapshot() {
  std::lock_guard<std::mutex> lock(g_stats_mutex);
  return g_stats;
}

void solve_stats_reset() {
  std::lock_guard<std::mutex> lock(g_stats_mutex);
  g_stats = SolveStats{};
}

nlohmann::json dump_problem(const ConicProblem& p) {
  nlohmann::json j;
  j["psd_dims"] = p.psd_dims;
  j["orthant"] = p.orthant;
  j["rhs"] = p.rhs;
  auto mat = [](const RMat& m) {
    std::vector<double> v(m.data(), m.data() + m.size());
    return nlohmann::json{{"rows", m.rows()}, {"data", v}};
  };
  for (const auto& c : p.obj_psd) j["obj_psd"].push_back(mat(c));
  j["obj_orth"] = std::vector<double>(p.obj_orth.data(), p.obj_orth.data() + p.obj_orth.size());
  j["rows"] = nlohmann::json::array();
  for (const auto& row : p.rows) {
    nlohmann::json r;
    for (const auto& [k, a] : row.psd) r["psd"].push_back({{"block", k}, {"coeff", mat(a)}});
    for (const auto& [i, c] : row.orth) r["orth"].push_back({{"var", i}, {"coeff", c}});
    j["rows"].push_back(r);
  }
  return j;
}

namespace {

using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

class Ipm {
public:
  Ipm(const ConicProblem& p, const SolverOptions& opts) : p_(p), opts_(opts) {
    m_ = static_cast<int>(p.rows.size());
    K_ = static_cast<int>(p.psd_dims.size());
    no_ = p.orthant;
    nu_ = no_;
    for (int d : p.psd_dims) nu_ += d;
    b_ = RVec::Zero(m_);
    for (int i = 0; i < m_; ++i) b_(i) = p.rhs[i];
    bnorm_ = (m_ > 0) ? b_.lpNorm<Eigen::Infinity>() : 0.0;
    cnorm_ = (no_ > 0) ? p.obj_orth.lpNorm<Eigen::Infinity>() : 0.0;
    for (const auto& c : p.obj_psd)
      if (c.size() > 0)
        cnorm_ = std::max(cnorm_, c.cwiseAbs().maxCoeff());
    // Rows that touch each block, for Schur assembly.
    touch_.resize(K_);
    for (int i = 0; i < m_; ++i)
      for (size_t t = 0; t < p.rows[i].psd.size(); ++t)
        touch_[p.rows[i].psd[t].first].push_back({i, static_cast<int>(t)});
  }

  SolveResult run() {
    init_point();
    SolveResult res;
    int stalls = 0;
    bool trace = std::getenv("SEPSTEIN_IPM_TRACE") != nullptr;
    for (int it = 0; it <= opts_.max_iter; ++it) {
      compute_residuals();
      if (trace)
        std::fprintf(stderr, "it=%3d pres=%.3e dres=%.3e gap=%.3e mu=%.3e tau=%.3e kappa=%.3e\n",
                     it, (m_ > 0 ? rp_.lpNorm<Eigen::Infinity>() : 0.0) / tau_ / (1.0 + bnorm_),
                     rd_norm_ / tau_ / (1.0 + cnorm_),
                     std::abs(cx_ - by_) / tau_ / (1.0 + std::abs(cx_ / tau_) + std::abs(by_ / tau_)),
                     duality_mu(), tau_, kappa_);
      if (check_termination(res, it)) return finish(res);
      if (it == opts_.max_iter) break;
      if (!compute_scaling()) {
        res.message = "scaling breakdown (cone boundary)";
        return fail(res, SolveStatus::Numerical, it);
      }
      if (!assemble_schur()) {
        res.message = "Schur factorization failed";
        return fail(res, SolveStatus::Numerical, it);
      }

      // Predictor.
      Dir aff;
      std::vector<RVec> dh_aff(K_);
      std::vector<RMat> Dhat(K_);
      for (int k = 0; k < K_; ++k) {
        Dhat[k] = RMat::Zero(p_.psd_dims[k], p_.psd_dims[k]);
        Dhat[k].diagonal() = -scal_.lambda[k].array().square();
      }
      RVec dorth = -(xo_.array() * so_.array()).matrix();
      solve_direction(1.0, Dhat, dorth, -tau_ * kappa_, aff);
      double a_aff = std::min(1.0, max_step(aff));
      double mu = duality_mu();
      double mu_aff = predicted_mu(aff, a_aff);
      double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);

      // Corrector.
      for (int k = 0; k < K_; ++k) {
        RMat dxh = scal_.Rinv[k] * aff.dX[k] * scal_.Rinv[k].transpose();
        RMat dsh = scal_.R[k].transpose() * aff.dS[k] * scal_.R[k];
        RMat cross = dxh * dsh;
        Dhat[k] = -0.5 * (cross + cross.transpose());
        Dhat[k].diagonal() -= scal_.lambda[k].array().square().matrix();
        Dhat[k].diagonal().array() += sigma * mu;
      }
      dorth = (sigma * mu - (xo_.array() * so_.array()) -
               (aff.dxo.array() * aff.dso.array())).matrix();
      Dir dir;
      solve_direction(1.0 - sigma, Dhat, dorth,
                      sigma * mu - tau_ * kappa_ - aff.dtau * aff.dkappa, dir);
      double alpha = 0.99 * max_step(dir);
      alpha = std::min(1.0, alpha);
      if (alpha < 1e-8) {
        // The corrector direction can point almost straight out of the cone
        // when the iterate has drifted off center; a pure centering step
        // (residuals untouched, complementarity pushed back to mu) restores
        // a usable interior point before another combined step is tried.
        Dir cen;
        for (int k = 0; k < K_; ++k) {
          Dhat[k].setZero();
          Dhat[k].diagonal() = (mu - scal_.lambda[k].array().square()).matrix();
        }
        dorth = (mu - (xo_.array() * so_.array())).matrix();
        solve_direction(0.0, Dhat, dorth, mu - tau_ * kappa_, cen);
        double a_cen = std::min(1.0, 0.9 * max_step(cen));
        if (a_cen > alpha) {
          dir = std::move(cen);
          alpha = a_cen;
        }
        if (alpha < 1e-8 && ++stalls >= 3) {
          res.message = "step size collapsed";
          return fail(res, SolveStatus::Numerical, it);
        }
      } else {
        stalls = 0;
      }
      take_step(dir, alpha);
      iters_ = it + 1;
    }
    compute_residuals();
    res.message = "iteration limit reached";
    return fail(res, SolveStatus::IterLimit, iters_);
  }

private:
  struct Dir {
    std::vector<RMat> dX, dS;
    RVec dxo, dso, dy;
    double dtau = 0, dkappa = 0;
  };

  void init_point() {
    X_.clear();
    S_.clear();
    for (int d : p_.psd_dims) {
      X_.push_back(RMat::Identity(d, d));
      S_.push_back(RMat::Identity(d, d));
    }
    xo_ = RVec::Ones(no_);
    so_ = RVec::Ones(no_);
    y_ = RVec::Zero(m_);
    tau_ = 1.0;
    kappa_ = 1.0;
    iters_ = 0;
  }

  double row_dot(int i, const std::vector<RMat>& Xs, const RVec& xo) const {
    double v = 0;
    for (const auto& [k, a] : p_.rows[i].psd) v += frob_dot(a, Xs[k]);
    for (const auto& [j, c] : p_.rows[i].orth) v += c * xo(j);
    return v;
  }

  // sum_i y_i A_ik per block, and orthant part.
  void adjoint(const RVec& y, std::vector<RMat>& out, RVec& out_o) const {
    out.resize(K_);
    for (int k = 0; k < K_; ++k) out[k] = RMat::Zero(p_.psd_dims[k], p_.psd_dims[k]);
    out_o = RVec::Zero(no_);
    for (int i = 0; i < m_; ++i) {
      if (y(i) == 0.0) continue;
      for (const auto& [k, a] : p_.rows[i].psd) out[k] += y(i) * a;
      for (const auto& [j, c] : p_.rows[i].orth) out_o(j) += y(i) * c;
    }
  }

  double cdot(const std::vector<RMat>& Xs, const RVec& xo) const {
    double v = p_.obj_orth.dot(xo);
    for (int k = 0; k < K_; ++k) v += frob_dot(p_.obj_psd[k], Xs[k]);
    return v;
  }

  void compute_residuals() {
    rp_ = RVec::Zero(m_);
    for (int i = 0; i < m_; ++i) rp_(i) = row_dot(i, X_, xo_) - b_(i) * tau_;
    adjoint(y_, Aty_, aty_o_);
    Rd_.resize(K_);
    rd_norm_ = 0;
    for (int k = 0; k < K_; ++k) {
      Rd_[k] = p_.obj_psd[k] * tau_ - S_[k] - Aty_[k];
      if (Rd_[k].size() > 0)
        rd_norm_ = std::max(rd_norm_, Rd_[k].cwiseAbs().maxCoeff());
    }
    rd_o_ = p_.obj_orth * tau_ - so_ - aty_o_;
    if (no_ > 0) rd_norm_ = std::max(rd_norm_, rd_o_.lpNorm<Eigen::Infinity>());
    cx_ = cdot(X_, xo_);
    by_ = b_.dot(y_);
    rg_ = by_ - cx_ - kappa_;
  }

  double duality_mu() const {
    double g = tau_ * kappa_ + xo_.dot(so_);
    for (int k = 0; k < K_; ++k) g += frob_dot(X_[k], S_[k]);
    return g / (nu_ + 1);
  }

  bool check_termination(SolveResult& res, int it) {
    double pres = (m_ > 0 ? rp_.lpNorm<Eigen::Infinity>() : 0.0) / tau_ / (1.0 + bnorm_);
    double dres = rd_norm_ / tau_ / (1.0 + cnorm_);
    double pobj = cx_ / tau_;
    double dobj = by_ / tau_;
    double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    // The achievable primal residual floors out near cond(M)*eps while the
    // gap and dual side are already inside tolerance; a min-norm projection
    // of the iterate onto the affine constraints closes the remaining gap
    // whenever it does not push a block outside the cone.
    if (pres > opts_.feas_tol && pres <= 1e4 * opts_.feas_tol &&
        dres <= opts_.feas_tol && gap <= opts_.gap_tol) {
      std::vector<RMat> x_save = X_;
      RVec xo_save = xo_;
      if (primal_polish()) {
        compute_residuals();
        double pres2 = (m_ > 0 ? rp_.lpNorm<Eigen::Infinity>() : 0.0) / tau_ / (1.0 + bnorm_);
        double pobj2 = cx_ / tau_;
        double dobj2 = by_ / tau_;
        double gap2 = std::abs(pobj2 - dobj2) / (1.0 + std::abs(pobj2) + std::abs(dobj2));
        if (pres2 <= opts_.feas_tol && gap2 <= opts_.gap_tol) {
          pres = pres2;
          pobj = pobj2;
          dobj = dobj2;
          gap = gap2;
        } else {
          // The projection nudged the objective out of tolerance; the
          // polished point may also sit slightly outside the cone, so the
          // iteration must resume from the unpolished iterate.
          X_ = std::move(x_save);
          xo_ = std::move(xo_save);
          compute_residuals();
        }
      }
    }
    if (pres <= opts_.feas_tol && dres <= opts_.feas_tol && gap <= opts_.gap_tol) {
      res.status = SolveStatus::Optimal;
      res.primal_value = pobj;
      res.dual_value = dobj;
      res.gap = gap;
      res.primal_res = pres;
      res.dual_res = dres;
      res.iterations = it;
      extract_solution(res);
      return true;
    }
    // Homogeneous-model infeasibility signal: tau collapsing against kappa.
    if (tau_ <= 1e-8 * std::max(1.0, kappa_) || duality_mu() < 1e-14) {
      if (by_ > 0 && primal_infeas_certificate(res)) {
        res.status = SolveStatus::PrimalInfeasible;
        res.iterations = it;
        return true;
      }
      if (cx_ < 0 && dual_infeas_certificate(res)) {
        res.status = SolveStatus::DualInfeasible;
        res.iterations = it;
        return true;
      }
    }
    return false;
  }

  // Min-norm dx with A dx = rp, subtracted from the primal iterate. Applied
  // only when every block stays inside the cone up to termination slack.
  bool primal_polish() {
    if (m_ == 0) return false;
    if (gram_.size() == 0) {
      RMat G = RMat::Zero(m_, m_);
      for (int k = 0; k < K_; ++k) {
        const auto& rows_k = touch_[k];
        for (size_t ii = 0; ii < rows_k.size(); ++ii) {
          auto [i, ti] = rows_k[ii];
          for (size_t jj = ii; jj < rows_k.size(); ++jj) {
            auto [j, tj] = rows_k[jj];
            double v = frob_dot(p_.rows[i].psd[ti].second, p_.rows[j].psd[tj].second);
            G(i, j) += v;
            if (i != j) G(j, i) += v;
          }
        }
      }
      for (int i = 0; i < m_; ++i)
        for (const auto& [ji, ci] : p_.rows[i].orth)
          for (int j = 0; j <= i; ++j)
            for (const auto& [jj, cj] : p_.rows[j].orth)
              if (ji == jj) {
                double v = ci * cj;
                G(i, j) += v;
                if (i != j) G(j, i) += v;
              }
      gram_ = G.cast<long double>();
      // rows may be linearly dependent; a tiny ridge keeps the factor alive
      gram_.diagonal().array() += 1e-24L * (1.0L + gram_.diagonal().maxCoeff());
      gram_ldlt_.compute(gram_);
      if (gram_ldlt_.info() != Eigen::Success) return false;
    }
    LVec r = rp_.cast<LVec::Scalar>();
    LVec w = gram_ldlt_.solve(r);
    for (int pass = 0; pass < 6; ++pass) {
      LVec resid = r - gram_ * w;
      if (resid.norm() <= 1e-20L * (1.0L + r.norm())) break;
      w += gram_ldlt_.solve(resid);
    }
    RVec wd = w.cast<double>();
    std::vector<RMat> dX;
    RVec dxo;
    adjoint(wd, dX, dxo);
    // Boundary eigenvalues of X are mu-sized here, smaller than the
    // correction itself, so the cone check has to tolerate a dip comparable
    // to the residual being repaired; the objective error stays gap-sized.
    double slack = 100.0 * opts_.feas_tol * tau_;
    std::vector<RMat> Xn(K_);
    for (int k = 0; k < K_; ++k) {
      Xn[k] = X_[k] - dX[k];
      Eigen::SelfAdjointEigenSolver<RMat> es(Xn[k], Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -slack) return false;
    }
    RVec xon = xo_ - dxo;
    if (no_ > 0 && xon.minCoeff() < -slack) return false;
    X_ = std::move(Xn);
    xo_ = std::move(xon);
    return true;
  }

  bool primal_infeas_certificate(SolveResult& res) {
    RVec yhat = y_ / by_;
    std::vector<RMat> s;
    RVec s_o;
    adjoint(yhat, s, s_o);
    double scale = 1.0;
    double viol = 0.0;
    for (int k = 0; k < K_; ++k) {
      s[k] = (-s[k]).eval();
      scale = std::max(scale, s[k].norm());
      Eigen::SelfAdjointEigenSolver<RMat> es(s[k], Eigen::EigenvaluesOnly);
      viol = std::max(viol, -es.eigenvalues().minCoeff());
    }
    s_o = -s_o;
    if (no_ > 0) viol = std::max(viol, -s_o.minCoeff());
    if (viol > 1e-9 * scale) return false;
    res.cert_y = yhat;
    res.cert_psd = std::move(s);
    res.cert_orth = std::move(s_o);
    res.cert_residual = viol;
    res.message = "dual improving ray found";
    return true;
  }

  bool dual_infeas_certificate(SolveResult& res) {
    double scale = -cx_;
    std::vector<RMat> xr(K_);
    for (int k = 0; k < K_; ++k) xr[k] = X_[k] / scale;
    RVec xo = xo_ / scale;
    double viol = 0.0, xnorm = 1.0;
    for (int k = 0; k < K_; ++k) xnorm = std::max(xnorm, xr[k].norm());
    for (int i = 0; i < m_; ++i) viol = std::max(viol, std::abs(row_dot(i, xr, xo)));
    if (viol > 1e-9 * xnorm) return false;
    res.cert_psd = std::move(xr);
    res.cert_orth = std::move(xo);
    res.cert_y = RVec::Zero(m_);
    res.cert_residual = viol;
    res.message = "primal improving ray found";
    return true;
  }

  void extract_solution(SolveResult& res) const {
    res.psd_vars.resize(K_);
    res.dual_slacks.resize(K_);
    for (int k = 0; k < K_; ++k) {
      res.psd_vars[k] = X_[k] / tau_;
      res.dual_slacks[k] = S_[k] / tau_;
    }
    res.orth_vars = xo_ / tau_;
    res.dual_y = y_ / tau_;
  }

  bool compute_scaling() {
    scal_.lambda.assign(K_, RVec());
    scal_.R.assign(K_, RMat());
    scal_.Rinv.assign(K_, RMat());
    scal_.G.assign(K_, RMat());
    lltX_.clear();
    lltS_.clear();
    lltX_.reserve(K_);
    lltS_.reserve(K_);
    for (int k = 0; k < K_; ++k) {
      // A block that drifts onto the cone boundary at the endgame kills the
      // Cholesky factors; nudging the iterate back inside is legitimate since
      // every residual and termination check is recomputed from the nudged
      // point on the next pass.
      double jit = 0.0;
      for (int attempt = 0; attempt < 5; ++attempt) {
        if (attempt > 0) {
          jit = (jit == 0.0)
                    ? 1e-14 * (1.0 + std::max(X_[k].diagonal().maxCoeff(),
                                              S_[k].diagonal().maxCoeff()))
                    : jit * 100;
          X_[k].diagonal().array() += jit;
          S_[k].diagonal().array() += jit;
        }
        lltX_.emplace_back(X_[k]);
        lltS_.emplace_back(S_[k]);
        if (lltX_.back().info() == Eigen::Success && lltS_.back().info() == Eigen::Success)
          break;
        lltX_.pop_back();
        lltS_.pop_back();
      }
      if (lltX_.size() != size_t(k) + 1) return false;
      RMat Lx = lltX_.back().matrixL();
      RMat Ls = lltS_.back().matrixL();
      Eigen::JacobiSVD<RMat> svd(Ls.transpose() * Lx,
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
      RVec sig = svd.singularValues();
      if (sig.minCoeff() <= 0) return false;
      RVec isq = sig.cwiseSqrt().cwiseInverse();
      scal_.lambda[k] = sig;
      scal_.R[k] = Lx * svd.matrixV() * isq.asDiagonal();
      scal_.Rinv[k] = isq.asDiagonal() * svd.matrixU().transpose() * Ls.transpose();
      scal_.G[k] = scal_.R[k] * scal_.R[k].transpose();
    }
    if ((so_.array() <= 0).any() || (xo_.array() <= 0).any()) return false;
    scal_.w2 = xo_.array() / so_.array();
    return true;
  }

  bool assemble_schur() {
    // GA[i] aligned with p_.rows[i].psd: G_k A_ik G_k.
    ga_.assign(m_, {});
    for (int i = 0; i < m_; ++i) {
      ga_[i].reserve(p_.rows[i].psd.size());
      for (const auto& [k, a] : p_.rows[i].psd)
        ga_[i].push_back(scal_.G[k] * a * scal_.G[k]);
    }
    RMat M = RMat::Zero(m_, m_);
    for (int k = 0; k < K_; ++k) {
      const auto& rows_k = touch_[k];
      for (size_t ii = 0; ii < rows_k.size(); ++ii) {
        auto [i, ti] = rows_k[ii];
        for (size_t jj = ii; jj < rows_k.size(); ++jj) {
          auto [j, tj] = rows_k[jj];
          double v = frob_dot(ga_[i][ti], p_.rows[j].psd[tj].second);
          M(i, j) += v;
          if (i != j) M(j, i) += v;
        }
      }
    }
    for (int i = 0; i < m_; ++i)
      for (const auto& [ji, ci] : p_.rows[i].orth)
        for (int j = 0; j <= i; ++j)
          for (const auto& [jj, cj] : p_.rows[j].orth)
            if (ji == jj) {
              double v = ci * cj * scal_.w2(ji);
              M(i, j) += v;
              if (i != j) M(j, i) += v;
            }

    vc_ = RVec::Zero(m_);
    for (int i = 0; i < m_; ++i) {
      double v = 0;
      const auto& row = p_.rows[i];
      for (size_t t = 0; t < row.psd.size(); ++t)
        v += frob_dot(ga_[i][t], p_.obj_psd[row.psd[t].first]);
      for (const auto& [j, c] : row.orth) v += c * scal_.w2(j) * p_.obj_orth(j);
      vc_(i) = v;
    }
    cgc_ = (p_.obj_orth.array().square() * scal_.w2.array()).sum();
    for (int k = 0; k < K_; ++k)
      cgc_ += frob_dot(scal_.G[k] * p_.obj_psd[k] * scal_.G[k], p_.obj_psd[k]);

    crd_ = (p_.obj_orth.array() * scal_.w2.array() * rd_o_.array()).sum();
    for (int k = 0; k < K_; ++k)
      crd_ += frob_dot(scal_.G[k] * p_.obj_psd[k] * scal_.G[k], Rd_[k]);

    prd_ = RVec::Zero(m_);
    for (int i = 0; i < m_; ++i) {
      double v = 0;
      const auto& row = p_.rows[i];
      for (size_t t = 0; t < row.psd.size(); ++t)
        v += frob_dot(ga_[i][t], Rd_[row.psd[t].first]);
      for (const auto& [j, c] : row.orth) v += c * scal_.w2(j) * rd_o_(j);
      prd_(i) = v;
    }

    if (m_ == 0) {
      z2_ = RVec();
      return true;
    }
    // The Schur system's conditioning grows like a power of 1/mu, which
    // outruns double precision before the residual tolerances are met.
    // Factoring in extended precision keeps the directions accurate through
    // the endgame; refinement below mops up the remainder.
    double reg = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
      LMat Mr = M.cast<long double>();
      if (reg > 0) Mr.diagonal().array() += static_cast<long double>(reg);
      ldlt_.compute(Mr);
      if (ldlt_.info() == Eigen::Success && (ldlt_.vectorD().array() > 0).all()) {
        M_ = std::move(Mr);
        zc_ = schur_solve(vc_);
        zb_ = schur_solve(b_);
        z2_ = zc_ + zb_;
        return true;
      }
      reg = (reg == 0.0) ? 1e-12 * (1.0 + M.diagonal().maxCoeff()) : reg * 100;
    }
    return false;
  }

  RVec schur_solve(const RVec& rhs) const {
    LVec rhl = rhs.cast<long double>();
    LVec x = ldlt_.solve(rhl);
    LVec r = rhl - M_ * x;
    long double best = r.norm();
    LVec xbest = x;
    for (int pass = 0; pass < 8 && best > 1e-18 * (1.0 + rhl.norm()); ++pass) {
      x += ldlt_.solve(r);
      r = rhl - M_ * x;
      long double n = r.norm();
      if (n >= best) break;
      best = n;
      xbest = x;
    }
    return xbest.cast<double>();
  }

  // Core Newton solve with explicit residual right-hand sides:
  //   A dx - b dtau          = -rpv
  //   c dtau - A'dy - dS     = -rds / -rdo   (rds/rdo carry the sign so that
  //                                           dS = c dtau - A'dy + rds)
  //   b'dy - c'dx - dkappa   = -rgv
  // plus scaled complementarity targets Dhat/dorth and the tau-kappa row.
  // The dS, dX, dxo, dkappa equations hold by construction; inaccuracy from
  // the Schur solve lands entirely in the first and third groups.
  void solve_newton(const RVec& rpv, const std::vector<RMat>& rds, const RVec& rdo,
                    double rgv, const std::vector<RMat>& Dhat, const RVec& dorth,
                    double dtaukappa, Dir& dir) {
    std::vector<RMat> U(K_);
    for (int k = 0; k < K_; ++k) {
      const RVec& lam = scal_.lambda[k];
      RMat t = Dhat[k];
      for (int i = 0; i < t.rows(); ++i)
        for (int j = 0; j < t.cols(); ++j) t(i, j) *= 2.0 / (lam(i) + lam(j));
      U[k] = scal_.R[k] * t * scal_.R[k].transpose();
    }
    RVec u_o = (dorth.array() / so_.array()).matrix();

    double crd = (p_.obj_orth.array() * scal_.w2.array() * rdo.array()).sum();
    for (int k = 0; k < K_; ++k)
      crd += frob_dot(scal_.G[k] * p_.obj_psd[k] * scal_.G[k], rds[k]);

    RVec rhs1(m_);
    for (int i = 0; i < m_; ++i) {
      double au = 0, pr = 0;
      const auto& row = p_.rows[i];
      for (size_t t = 0; t < row.psd.size(); ++t) {
        au += frob_dot(row.psd[t].second, U[row.psd[t].first]);
        pr += frob_dot(ga_[i][t], rds[row.psd[t].first]);
      }
      for (const auto& [j, c] : row.orth) {
        au += c * u_o(j);
        pr += c * scal_.w2(j) * rdo(j);
      }
      rhs1(i) = -rpv(i) - au + pr;
    }
    RVec z1 = (m_ > 0) ? schur_solve(rhs1) : RVec();

    double cu = p_.obj_orth.dot(u_o);
    for (int k = 0; k < K_; ++k) cu += frob_dot(p_.obj_psd[k], U[k]);
    // (b - vc) . z2 expands to b'M^-1 b - vc'M^-1 vc; both that difference
    // and the cgc_ term cancel catastrophically near the optimum, where the
    // whole denominator can be dominated by kappa/tau. Assemble it from the
    // individually nonnegative pieces instead of the raw difference.
    double denom = kappa_ / tau_;
    double rhs2 = -rgv + cu - crd + dtaukappa / tau_;
    if (m_ > 0) {
      denom += std::max(cgc_ - vc_.dot(zc_), 0.0) + std::max(b_.dot(zb_), 0.0);
      rhs2 -= (b_ - vc_).dot(z1);
    } else {
      denom += cgc_;
    }
    dir.dtau = rhs2 / denom;
    dir.dy = (m_ > 0) ? RVec(z1 + dir.dtau * z2_) : RVec();

    std::vector<RMat> aty;
    RVec aty_o;
    adjoint(dir.dy.size() ? dir.dy : RVec::Zero(m_), aty, aty_o);
    dir.dS.resize(K_);
    dir.dX.resize(K_);
    for (int k = 0; k < K_; ++k) {
      dir.dS[k] = p_.obj_psd[k] * dir.dtau - aty[k] + rds[k];
      dir.dS[k] = 0.5 * (dir.dS[k] + dir.dS[k].transpose()).eval();
      dir.dX[k] = U[k] - scal_.G[k] * dir.dS[k] * scal_.G[k];
      dir.dX[k] = 0.5 * (dir.dX[k] + dir.dX[k].transpose()).eval();
    }
    dir.dso = p_.obj_orth * dir.dtau - aty_o + rdo;
    dir.dxo = u_o - (scal_.w2.array() * dir.dso.array()).matrix();
    dir.dkappa = (dtaukappa - kappa_ * dir.dtau) / tau_;
  }

  // Solve the Newton system for residual weight eta and complementarity
  // targets, then apply full-system iterative refinement. Near the optimum
  // the Schur system is ill conditioned (cond ~ 1/mu), so a single solve
  // floors the achievable primal residual well above feas_tol; refining
  // against the original well-scaled data recovers it.
  void solve_direction(double eta, const std::vector<RMat>& Dhat, const RVec& dorth,
                       double dtaukappa, Dir& dir) {
    std::vector<RMat> rds(K_);
    for (int k = 0; k < K_; ++k) rds[k] = eta * Rd_[k];
    solve_newton(eta * rp_, rds, eta * rd_o_, eta * rg_, Dhat, dorth, dtaukappa, dir);

    std::vector<RMat> zero_m(K_);
    for (int k = 0; k < K_; ++k)
      zero_m[k] = RMat::Zero(p_.psd_dims[k], p_.psd_dims[k]);
    RVec zero_o = RVec::Zero(no_);
    auto residual = [&](const Dir& d, RVec& e1, double& e3) {
      e1.resize(m_);
      for (int i = 0; i < m_; ++i)
        e1(i) = row_dot(i, d.dX, d.dxo) - b_(i) * d.dtau + eta * rp_(i);
      e3 = (m_ > 0 ? b_.dot(d.dy) : 0.0) - cdot(d.dX, d.dxo) - d.dkappa +
           eta * rg_;
    };
    RVec e1;
    double e3;
    residual(dir, e1, e3);
    for (int pass = 0; pass < 10; ++pass) {
      double before = e1.norm() + std::abs(e3);
      double scale = std::abs(dir.dtau) + std::abs(dir.dkappa);
      for (int k = 0; k < K_; ++k) scale += dir.dX[k].norm();
      if (before <= 1e-13 * (1.0 + scale)) break;
      Dir corr;
      solve_newton(e1, zero_m, zero_o, e3, zero_m, zero_o, 0.0, corr);
      Dir trial = dir;
      for (int k = 0; k < K_; ++k) {
        trial.dX[k] += corr.dX[k];
        trial.dS[k] += corr.dS[k];
      }
      trial.dxo += corr.dxo;
      trial.dso += corr.dso;
      if (m_ > 0) trial.dy += corr.dy;
      trial.dtau += corr.dtau;
      trial.dkappa += corr.dkappa;
      RVec te1;
      double te3;
      residual(trial, te1, te3);
      if (te1.norm() + std::abs(te3) >= before) break;  // refinement diverging
      dir = std::move(trial);
      e1 = std::move(te1);
      e3 = te3;
    }
  }

  double max_step(const Dir& dir) const {
    double alpha = std::numeric_limits<double>::infinity();
    auto bound = [&alpha](double v, double dv) {
      if (dv < 0) alpha = std::min(alpha, -v / dv);
    };
    for (int k = 0; k < K_; ++k) {
      double ex = min_gen_eig(lltX_[k], dir.dX[k]);
      if (ex < 0) alpha = std::min(alpha, -1.0 / ex);
      double es = min_gen_eig(lltS_[k], dir.dS[k]);
      if (es < 0) alpha = std::min(alpha, -1.0 / es);
    }
    for (int j = 0; j < no_; ++j) {
      bound(xo_(j), dir.dxo(j));
      bound(so_(j), dir.dso(j));
    }
    bound(tau_, dir.dtau);
    bound(kappa_, dir.dkappa);
    return alpha;
  }

  double predicted_mu(const Dir& dir, double a) const {
    double g = (tau_ + a * dir.dtau) * (kappa_ + a * dir.dkappa);
    g += (xo_ + a * dir.dxo).dot(so_ + a * dir.dso);
    for (int k = 0; k < K_; ++k)
      g += frob_dot(X_[k] + a * dir.dX[k], S_[k] + a * dir.dS[k]);
    return g / (nu_ + 1);
  }

  void take_step(const Dir& dir, double a) {
    for (int k = 0; k < K_; ++k) {
      X_[k] += a * dir.dX[k];
      S_[k] += a * dir.dS[k];
    }
    xo_ += a * dir.dxo;
    so_ += a * dir.dso;
    if (m_ > 0) y_ += a * dir.dy;
    tau_ += a * dir.dtau;
    kappa_ += a * dir.dkappa;
    snap_dual_slack();
  }

  // The dual slack is determined by (y, tau) up to the dual residual, and the
  // Newton step keeps it aligned to rounding level once the residual is small.
  // Replacing it with the exact value c*tau - A'y zeroes the dual residual so
  // that termination only has to chase the primal side; skipped whenever the
  // exact slack would leave the cone (early iterations).
  void snap_dual_slack() {
    std::vector<RMat> aty;
    RVec aty_o;
    adjoint(y_, aty, aty_o);
    std::vector<RMat> snap(K_);
    for (int k = 0; k < K_; ++k) {
      snap[k] = p_.obj_psd[k] * tau_ - aty[k];
      snap[k] = 0.5 * (snap[k] + snap[k].transpose()).eval();
      if (Eigen::LLT<RMat>(snap[k]).info() != Eigen::Success) return;
    }
    RVec snap_o = p_.obj_orth * tau_ - aty_o;
    if (no_ > 0 && (snap_o.array() <= 0).any()) return;
    S_ = std::move(snap);
    so_ = std::move(snap_o);
  }

  SolveResult finish(SolveResult res) {
    if (opts_.record_stats) record_solve(res);
    return res;
  }

  SolveResult fail(SolveResult res, SolveStatus st, int it) {
    res.status = st;
    res.iterations = it;
    res.primal_value = cx_ / tau_;
    res.dual_value = by_ / tau_;
    res.gap = std::abs(res.primal_value - res.dual_value) /
              (1.0 + std::abs(res.primal_value) + std::abs(res.dual_value));
    res.primal_res = (m_ > 0 ? rp_.lpNorm<Eigen::Infinity>() : 0.0) / tau_ / (1.0 + bnorm_);
    res.dual_res = rd_norm_ / tau_ / (1.0 + cnorm_);
    res.message += " pres=" + std::to_string(res.primal_res) +
                   " dres=" + std::to_string(res.dual_res) +
                   " gap=" + std::to_string(res.gap) + " tau=" + std::to_string(tau_);
    extract_solution(res);
    if (opts_.record_stats) record_solve(res);
    return res;
  }

  const ConicProblem& p_;
  SolverOptions opts_;
  int m_, K_, no_, nu_, iters_ = 0;
  RVec b_;
  double bnorm_ = 0, cnorm_ = 0;
  std::vector<std::vector<std::pair<int, int>>> touch_;

  std::vector<RMat> X_, S_;
  RVec xo_, so_, y_;
  double tau_ = 1, kappa_ = 1;

  RVec rp_, rd_o_, aty_o_;
  std::vector<RMat> Rd_, Aty_;
  double rd_norm_ = 0, cx_ = 0, by_ = 0, rg_ = 0;

  Scaling scal_;
  std::vector<Eigen::LLT<RMat>> lltX_, lltS_;
  std::vector<std::vector<RMat>> ga_;
  LMat M_, gram_;
  Eigen::LDLT<LMat> ldlt_, gram_ldlt_;
  RVec vc_, prd_, z2_, zc_, zb_;
  double cgc_ = 0, crd_ = 0;
};

}  // namespace

SolveResult solve(const ConicProblem& p, const SolverOptions& opts) {
  p.validate();
  Ipm ipm(p, opts);
  return ipm.run();
}

}  // namespace sepstein
