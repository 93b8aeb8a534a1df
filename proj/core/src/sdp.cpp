#include "qumode/sdp.hpp"

#include <cmath>

#include "qumode/errors.hpp"

namespace qumode {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double symmetric_min_eig(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

namespace {

// vech indexing for symmetric n x n
struct SymBasis {
  int n;
  int dim() const { return n * (n + 1) / 2; }
  MatrixXd unit(int k) const {
    MatrixXd e = MatrixXd::Zero(n, n);
    int idx = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j, ++idx)
        if (idx == k) {
          e(i, j) = e(j, i) = 1.0;
          return e;
        }
    return e;
  }
  VectorXd vec(const MatrixXd& m) const {
    VectorXd v(dim());
    int idx = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j, ++idx) v(idx) = m(i, j);
    return v;
  }
  MatrixXd mat(const VectorXd& v) const {
    MatrixXd m(n, n);
    int idx = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j, ++idx) m(i, j) = m(j, i) = v(idx);
    return m;
  }
};

bool chol_pd(const MatrixXd& m) {
  Eigen::LLT<MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

}  // namespace

TraceProblemResult minimize_trace_pair(const MatrixXd& a, const MatrixXd& b, double tol,
                                       int max_newton) {
  const int n = int(a.rows());
  const SymBasis sb{n};
  const MatrixXd eye = MatrixXd::Identity(n, n);
  MatrixXd x = 2.0 * eye;
  TraceProblemResult res;

  double mu = 1.0;
  const double mu_floor = tol / (10.0 * n + 10.0);
  while (true) {
    for (int it = 0; it < 40; ++it) {
      const MatrixXd xinv = x.inverse();
      const MatrixXd xmi_inv = (x - eye).inverse();
      const MatrixXd grad_m = a - xinv * b * xinv - mu * xmi_inv;
      const VectorXd grad = sb.vec(grad_m);

      // Hessian in the vech basis
      const int d = sb.dim();
      MatrixXd hess(d, d);
      std::vector<MatrixXd> units(d);
      for (int k = 0; k < d; ++k) units[k] = sb.unit(k);
      for (int k = 0; k < d; ++k) {
        const MatrixXd hs = xinv * units[k] * xinv * b * xinv +
                            xinv * b * xinv * units[k] * xinv +
                            mu * xmi_inv * units[k] * xmi_inv;
        hess.col(k) = sb.vec((hs + hs.transpose()) / 2.0);
      }
      hess += 1e-14 * MatrixXd::Identity(d, d);

      const VectorXd step_v = hess.ldlt().solve(-grad);
      MatrixXd step = sb.mat(step_v);
      ++res.newton_steps;
      if (res.newton_steps > max_newton)
        throw SolverFailure("minimize_trace_pair: Newton budget exhausted");

      // keep X - I positive definite
      double alpha = 1.0;
      while (alpha > 1e-14 && !chol_pd(x + alpha * step - eye)) alpha /= 2;
      x += alpha * step;

      const double decrement = std::sqrt(std::max(0.0, -step_v.dot(grad)));
      if (decrement < std::max(1e-12, 0.01 * mu)) break;
    }
    if (mu < mu_floor) break;
    mu *= 0.2;
  }

  res.x = x;
  res.objective = (a * x).trace() + (b * x.inverse()).trace();
  res.gap_estimate = mu * n;
  return res;
}

std::optional<MatrixXd> solve_gram_feasibility(int dim,
                                               const std::vector<GramConstraint>& cons,
                                               double psd_tol, const MatrixXd* objective) {
  const SymBasis sb{dim};
  const int d = sb.dim();
  const int m = int(cons.size());

  // Affine slice: vec(G) = g0 + N y with A vec = c.
  MatrixXd amat(m, d);
  VectorXd c(m);
  for (int i = 0; i < m; ++i) {
    // tr(Ai G) in vech coordinates: off-diagonal entries count twice
    VectorXd row(d);
    int idx = 0;
    for (int r = 0; r < dim; ++r)
      for (int s = r; s < dim; ++s, ++idx)
        row(idx) = (r == s) ? cons[i].a(r, r) : 2.0 * cons[i].a(r, s);
    amat.row(i) = row;
    c(i) = cons[i].c;
  }

  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(amat);
  if ((amat * cod.solve(c) - c).norm() > 1e-9 * (1 + c.norm())) return std::nullopt;
  const VectorXd g0 = cod.solve(c);

  // Null-space basis of A.
  Eigen::JacobiSVD<MatrixXd> svd(amat, Eigen::ComputeFullV);
  const int rank = int(svd.rank());
  const MatrixXd nullb = svd.matrixV().rightCols(d - rank);
  const int k = int(nullb.cols());

  VectorXd y = VectorXd::Zero(k);
  auto gmat = [&](const VectorXd& yy) { return sb.mat(g0 + nullb * yy); };
  std::vector<MatrixXd> dirs(k);
  for (int j = 0; j < k; ++j) dirs[j] = sb.mat(nullb.col(j));

  // Phase 1: analytic centering of G + tI with t pushed down towards 0; the
  // invariant is G(y) + tI > 0 at the start of every round.
  auto center = [&](double t, double mu) {
    // Newton steps on  mu * tr(C G) - logdet(G + tI)  along the slice
    const MatrixXd target_eye = t * MatrixXd::Identity(dim, dim);
    for (int it = 0; it < 50; ++it) {
      const MatrixXd g = gmat(y) + target_eye;
      Eigen::LLT<MatrixXd> llt(g);
      if (llt.info() != Eigen::Success) break;
      const MatrixXd ginv = g.inverse();
      VectorXd grad(k);
      MatrixXd hess(k, k);
      for (int j = 0; j < k; ++j) {
        grad(j) = -(ginv * dirs[j]).trace();
        if (objective && mu > 0) grad(j) += mu * (*objective * dirs[j]).trace();
      }
      for (int j = 0; j < k; ++j)
        for (int l = j; l < k; ++l)
          hess(j, l) = hess(l, j) = (ginv * dirs[j] * ginv * dirs[l]).trace();
      hess += 1e-13 * MatrixXd::Identity(k, k);
      const VectorXd step = hess.ldlt().solve(-grad);
      double alpha = 1.0;
      while (alpha > 1e-14 && !chol_pd(gmat(y + alpha * step) + target_eye)) alpha /= 2;
      y += alpha * step;
      if (step.norm() * alpha < 1e-12) break;
    }
  };

  double t = std::max(0.0, -symmetric_min_eig(gmat(y))) + 1.0;
  int stalls = 0;
  bool feasible = false;
  for (int round = 0; round < 200 && stalls < 4; ++round) {
    center(t, 0.0);
    const double lmin = symmetric_min_eig(gmat(y));
    if (lmin > psd_tol) {
      feasible = true;
      break;
    }
    if (t < 1e-13) break;
    // shrink while keeping G + tI comfortably positive definite
    double t_next = std::max(t / 3.0, lmin < 0 ? -1.25 * lmin : 0.0);
    if (t_next > 0.99 * t) {
      ++stalls;
      t_next = 0.9 * t;
    }
    t = std::max(t_next, 1e-14);
  }
  {
    const double scale = 1 + gmat(y).cwiseAbs().maxCoeff();
    if (!feasible && symmetric_min_eig(gmat(y)) <= -1e-9 * scale) return std::nullopt;
  }

  // Phase 2 (optional): follow the barrier path for the linear objective,
  // keeping a tiny ridge so boundary-only feasible slices stay reachable.
  if (objective) {
    const double ridge = feasible ? 0.0 : 1e-11;
    for (double mu = 1.0; mu < 3e9; mu *= 4) center(ridge, mu);
  }
  const double scale = 1 + gmat(y).cwiseAbs().maxCoeff();
  if (symmetric_min_eig(gmat(y)) > -1e-9 * scale) return gmat(y);
  return std::nullopt;
}

}  // namespace qumode
