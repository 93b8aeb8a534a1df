#include "qumode/reductions.hpp"

#include <unsupported/Eigen/IterativeSolvers>
#include <unsupported/Eigen/MatrixFunctions>

#include <Eigen/SparseLU>
#include <cmath>

#include "qumode/errors.hpp"

namespace qumode {

namespace {

double operator_norm(const Mat& m) {
  if (m.rows() == 0) return 0;
  return Eigen::JacobiSVD<Mat>(m).singularValues().maxCoeff();
}

struct StepPlan {
  std::vector<Mat> gen;        // Omega M_i, one entry per time step
  std::vector<Vec> drive;      // Omega d_i
  std::vector<double> dt;      // per-step duration
  std::vector<double> abs_time;
};

StepPlan plan_steps(const GaussianCircuit& c, double h) {
  StepPlan plan;
  const Mat omega = symplectic_form(c.n_modes);
  double t = 0;
  for (const auto& g : c.gates) {
    const int m = std::max(1, int(std::ceil(g.t / h)));
    const double dt = g.t / m;
    const Mat gen = omega * g.h.M;
    const Vec drive = omega * g.h.d;
    for (int s = 0; s < m; ++s) {
      t += dt;
      plan.gen.push_back(gen);
      plan.drive.push_back(drive);
      plan.dt.push_back(dt);
      plan.abs_time.push_back(t);
    }
  }
  return plan;
}

}  // namespace

OdeParameters choose_parameters(const GaussianCircuit& c, double eps) {
  if (!(eps > 0)) throw std::invalid_argument("choose_parameters: eps must be > 0");
  c.validate();
  double max_m = 0, max_d = 0;
  for (const auto& g : c.gates) {
    max_m = std::max(max_m, operator_norm(g.h.M));
    max_d = std::max(max_d, g.h.d.norm());
  }
  OdeParameters p;
  p.h = std::min(1.0, max_m > 0 ? 1.0 / max_m : 1.0);

  const double tau = std::max(c.total_time(), 1e-12);
  const double estar = energy_bound(c, 32);
  const double e3 = std::exp(3.0), e2 = std::exp(2.0);
  const double rhs = tau * e3 / (p.h * eps) * (estar + tau * e2 * max_d);
  const double log_rhs = std::log(std::max(rhs, 1.0));
  int k = 1;
  while (std::lgamma(double(k) + 2.0) < log_rhs && k < 500) ++k;
  p.k = k;
  return p;
}

OdeLinearSystem encode_linear_system(const GaussianCircuit& c, const OdeParameters& p,
                                     size_t max_unknowns) {
  c.validate();
  if (!(p.h > 0) || p.k < 1) throw std::invalid_argument("encode_linear_system: bad parameters");

  const StepPlan plan = plan_steps(c, p.h);
  OdeLinearSystem sys;
  sys.n_modes = c.n_modes;
  sys.steps = int(plan.gen.size());
  sys.taylor_order = p.k;
  sys.h = p.h;
  sys.step_times.push_back(0.0);
  for (double t : plan.abs_time) sys.step_times.push_back(t);

  const int dim = sys.block_dim();
  const size_t unknowns = size_t(sys.steps + 1) * size_t(p.k + 1) * size_t(dim);
  if (unknowns > max_unknowns)
    throw BudgetExceeded("encode_linear_system: system size " + std::to_string(unknowns) +
                         " exceeds cap " + std::to_string(max_unknowns));

  std::vector<Eigen::Triplet<double>> trip;
  sys.b = Eigen::VectorXd::Zero(long(unknowns));

  auto unit_diag = [&](int step, int level) {
    for (int q = 0; q < dim; ++q) {
      const int r = sys.index(step, level, q);
      trip.emplace_back(r, r, 1.0);
    }
  };

  // x_{0,0} = mu(0) = 0 (vacuum start); unused tail levels pinned to zero.
  unit_diag(0, 0);
  for (int l = 1; l <= p.k; ++l) unit_diag(sys.steps, l);

  for (int j = 0; j < sys.steps; ++j) {
    const Mat gh = plan.gen[j] * plan.dt[j];
    // Taylor ladder within the step: x_{j,l} = (gh/l) x_{j,l-1} (+ drive at l=1)
    for (int l = 1; l <= p.k; ++l) {
      unit_diag(j, l);
      for (int q = 0; q < dim; ++q) {
        const int r = sys.index(j, l, q);
        for (int q2 = 0; q2 < dim; ++q2) {
          const double v = gh(q, q2) / double(l);
          if (v != 0.0) trip.emplace_back(r, sys.index(j, l - 1, q2), -v);
        }
        if (l == 1) sys.b(r) = plan.dt[j] * plan.drive[j](q);
      }
    }
    // Step sum: x_{j+1,0} = sum_l x_{j,l}
    unit_diag(j + 1, 0);
    for (int q = 0; q < dim; ++q) {
      const int r = sys.index(j + 1, 0, q);
      for (int l = 0; l <= p.k; ++l) trip.emplace_back(r, sys.index(j, l, q), -1.0);
    }
  }

  sys.A.resize(long(unknowns), long(unknowns));
  sys.A.setFromTriplets(trip.begin(), trip.end());

  const double estar = energy_bound(c, 32);
  sys.kappa_bound = 2.0 * std::max(estar, 0.5) * std::max(c.total_time(), 1.0) * sys.steps;
  return sys;
}

std::vector<Vec> decode_trajectory(const OdeLinearSystem& sys) {
  Eigen::VectorXd x;
  if (sys.A.rows() <= 20000) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(sys.A);
    if (lu.info() != Eigen::Success) throw SolverFailure("decode_trajectory: LU failed");
    x = lu.solve(sys.b);
  } else {
    Eigen::GMRES<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> gmres(sys.A);
    gmres.setTolerance(1e-12);
    gmres.setMaxIterations(2000);
    x = gmres.solve(sys.b);
    if (gmres.info() != Eigen::Success)
      throw SolverFailure("decode_trajectory: GMRES did not converge");
  }
  std::vector<Vec> out;
  const int dim = sys.block_dim();
  for (int j = 0; j <= sys.steps; ++j) {
    Vec mu(dim);
    for (int q = 0; q < dim; ++q) mu(q) = x(sys.index(j, 0, q));
    out.push_back(std::move(mu));
  }
  return out;
}

double condition_estimate(const OdeLinearSystem& sys) {
  const long n = sys.A.rows();
  if (n <= 4000) {
    Eigen::JacobiSVD<Mat> svd((Mat(sys.A)));
    const auto& s = svd.singularValues();
    return s.maxCoeff() / s.minCoeff();
  }
  // Power iteration for s_max, inverse iteration through a sparse LU for s_min.
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(sys.A);
  if (lu.info() != Eigen::Success) throw SolverFailure("condition_estimate: LU failed");
  Eigen::SparseMatrix<double> at = sys.A.transpose();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lut(at);
  if (lut.info() != Eigen::Success) throw SolverFailure("condition_estimate: LU failed");
  Eigen::VectorXd v = Eigen::VectorXd::Random(n);
  v.normalize();
  double smax2 = 0;
  for (int it = 0; it < 300; ++it) {
    Eigen::VectorXd w = sys.A.transpose() * (sys.A * v);
    double nrm = w.norm();
    if (nrm == 0) break;
    w /= nrm;
    const bool done = std::abs(nrm - smax2) < 1e-10 * nrm;
    smax2 = nrm;
    v = w;
    if (done) break;
  }
  Eigen::VectorXd u = Eigen::VectorXd::Random(n);
  u.normalize();
  double invmin2 = 0;
  for (int it = 0; it < 300; ++it) {
    Eigen::VectorXd w = lut.solve(Eigen::VectorXd(lu.solve(u)));
    double nrm = w.norm();
    if (nrm == 0) throw SolverFailure("condition_estimate: inverse iteration stalled");
    w /= nrm;
    const bool done = std::abs(nrm - invmin2) < 1e-10 * nrm;
    invmin2 = nrm;
    u = w;
    if (done) break;
  }
  return std::sqrt(smax2 * invmin2);
}

Mat taylor_ladder_inverse_block(const Mat& omega_m_h, int k, int l_from, int l_to) {
  const int dim = int(omega_m_h.rows());
  if (l_from > l_to || l_from < 0 || l_to > k) return Mat::Zero(dim, dim);
  Mat r = Mat::Identity(dim, dim);
  // l_from! (Omega M h)^{l_to - l_from} / l_to!
  for (int l = l_from + 1; l <= l_to; ++l) r = r * omega_m_h / double(l);
  return r;
}

namespace {

Mat antisym_embedding(const Mat& a) {
  const long n = a.rows();
  Mat e = Mat::Zero(2 * n, 2 * n);
  e.topRightCorner(n, n) = a;
  e.bottomLeftCorner(n, n) = -a.transpose();
  return e;
}

}  // namespace

double averaged_propagator_norm(const Mat& antisym, double eps, int chunks) {
  const long n = antisym.rows();
  const Mat step = (antisym * eps).exp();
  Mat power = Mat::Identity(n, n);
  Mat acc = Mat::Zero(n, n);
  for (int k = 0; k < chunks; ++k) {
    acc += power;
    power = power * step;
  }
  return operator_norm(acc / double(chunks));
}

InversionResult invert_via_gaussian(const InversionJob& job) {
  if (!(job.delta > 0)) throw std::invalid_argument("invert_via_gaussian: delta must be > 0");
  if (job.a.rows() != job.a.cols())
    throw std::invalid_argument("invert_via_gaussian: square A required");
  const long n = job.a.rows();
  if (job.i < 0 || job.j < 0 || job.i >= n || job.j >= n)
    throw std::invalid_argument("invert_via_gaussian: index out of range");

  Eigen::JacobiSVD<Mat> svd(job.a);
  const double smax = svd.singularValues().maxCoeff();
  const double smin = svd.singularValues().minCoeff();
  if (smin <= 0) throw SolverFailure("invert_via_gaussian: singular matrix");
  const double kappa = smax / smin;
  if (kappa > job.kappa_cap)
    throw SolverFailure("invert_via_gaussian: condition number above configured cap");

  InversionResult res;
  res.kappa = kappa;
  res.epsilon = 1.0 / smax;
  res.chunks = int(std::ceil(4.0 * kappa / job.delta));

  // Phase-space dynamics of the embedded generator: the X block of the mean
  // obeys mu_x' = Ahat mu_x + e_j, so chunk l holds Ahat^{-1}(exp(Ahat l eps)-I) e_j.
  const Mat ahat = antisym_embedding(job.a);
  const Mat s1 = (ahat * res.epsilon).exp();
  Vec ej = Vec::Zero(2 * n);
  ej(job.j) = 1.0;
  const Vec v1 = ahat.fullPivLu().solve(Vec((s1 - Mat::Identity(2 * n, 2 * n)) * ej));

  Vec v = Vec::Zero(2 * n);  // chunk 0
  Vec sum = Vec::Zero(2 * n);
  double max_mu2 = 0;
  for (int l = 0; l < res.chunks; ++l) {
    sum += v;
    max_mu2 = std::max(max_mu2, v.squaredNorm());
    v = s1 * v + v1;
  }
  const Vec avg = sum / double(res.chunks);

  // avg ~ -Ahat^{-1} e_j and (Ahat^{-1})_{n+i, j} = (A^{-1})_{ij}.
  res.estimate = -avg(n + job.i);
  res.max_energy = 0.5 * max_mu2;  // covariance stays at vacuum (orthogonal flow)
  res.energy_bound = 2.0 / (smin * smin);
  return res;
}

EnergyEnvelopeReport verify_energy_envelope(const InversionJob& job) {
  InversionResult r = invert_via_gaussian(job);
  EnergyEnvelopeReport rep;
  rep.max_observed = r.max_energy;
  rep.bound = r.energy_bound;
  rep.within_bound = rep.max_observed <= rep.bound * (1 + 1e-9);
  return rep;
}

}  // namespace qumode
