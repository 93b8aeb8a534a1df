#include "qumode/gaussian.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

namespace qumode {

Mat symplectic_form(int n) {
  Mat omega = Mat::Zero(2 * n, 2 * n);
  omega.topRightCorner(n, n) = -Mat::Identity(n, n);
  omega.bottomLeftCorner(n, n) = Mat::Identity(n, n);
  return omega;
}

void QuadHamPhase::validate() const {
  if (M.rows() != M.cols() || M.rows() != d.size())
    throw std::invalid_argument("QuadHamPhase: inconsistent dimensions");
  if (d.size() % 2) throw std::invalid_argument("QuadHamPhase: odd quadrature count");
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1 + M.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("QuadHamPhase: M must be symmetric");
}

QuadHamPhase QuadHamPhase::zero(int n) {
  return {Mat::Zero(2 * n, 2 * n), Vec::Zero(2 * n)};
}

double GaussianCircuit::total_time() const {
  double t = 0;
  for (const auto& g : gates) t += g.t;
  return t;
}

void GaussianCircuit::validate() const {
  for (const auto& g : gates) {
    g.h.validate();
    if (g.h.n_modes() != n_modes)
      throw std::invalid_argument("GaussianCircuit: gate mode count mismatch");
    if (!(g.t > 0)) throw std::invalid_argument("GaussianCircuit: gate times must be > 0");
  }
}

GaussianState GaussianState::vacuum(int n) {
  return {0.5 * Mat::Identity(2 * n, 2 * n), Vec::Zero(2 * n)};
}

double GaussianState::uncertainty_defect() const {
  const int n = n_modes();
  Eigen::MatrixXcd h = sigma.cast<std::complex<double>>() +
                       std::complex<double>(0, 0.5) * symplectic_form(n).cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  return lmin < 0 ? -lmin : 0.0;
}

Mat symplectic_exp(const QuadHamPhase& h, double t) {
  h.validate();
  if (!std::isfinite(t)) throw std::invalid_argument("symplectic_exp: non-finite time");
  Mat a = symplectic_form(h.n_modes()) * h.M * t;
  return a.exp();
}

GaussianState evolve(const GaussianState& state, const QuadHamPhase& h, double t) {
  const int n = h.n_modes();
  const Mat omega = symplectic_form(n);
  const Mat gen = omega * h.M;  // d mu/dt = gen mu + omega d
  const Mat s = (gen * t).exp();

  GaussianState out;
  out.sigma = s * state.sigma * s.transpose();
  out.mu = s * state.mu;

  const Vec od = omega * h.d;
  if (od.cwiseAbs().maxCoeff() == 0.0) return out;

  Eigen::JacobiSVD<Mat> svd(gen);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin > 1e-8 * std::max(smax, 1.0)) {
    out.mu += gen.fullPivLu().solve((s - Mat::Identity(2 * n, 2 * n)) * od);
  } else {
    // integral of exp(gen u) du over [0, t] as a convergent series:
    // sum_{l>=1} (gen t)^{l-1} t / l!
    Mat term = t * Mat::Identity(2 * n, 2 * n);
    Mat acc = term;
    for (int l = 2; l <= 120; ++l) {
      term = term * gen * (t / l);
      acc += term;
      if (term.cwiseAbs().maxCoeff() < 1e-18 * std::max(1.0, acc.cwiseAbs().maxCoeff()))
        break;
    }
    out.mu += acc * od;
  }
  return out;
}

GaussianState run_circuit(const GaussianCircuit& c) {
  c.validate();
  GaussianState st = GaussianState::vacuum(c.n_modes);
  for (const auto& g : c.gates) st = evolve(st, g.h, g.t);
  return st;
}

double energy(const GaussianState& state) {
  const int n = state.n_modes();
  return 0.5 * (state.sigma.trace() + state.mu.squaredNorm()) - 0.5 * n;
}

double energy_bound(const GaussianCircuit& c, int grid_points) {
  c.validate();
  if (grid_points < 2) throw std::invalid_argument("energy_bound: need >= 2 grid points");
  GaussianState st = GaussianState::vacuum(c.n_modes);
  double best = energy(st);
  for (const auto& g : c.gates) {
    const double dt = g.t / grid_points;
    for (int k = 0; k < grid_points; ++k) {
      st = evolve(st, g.h, dt);
      best = std::max(best, energy(st));
    }
  }
  return best;
}

OutputDistribution output_distribution(const GaussianState& state) {
  return {state.mu(0), state.sigma(0, 0)};
}

GausSimAnswer decide_gausim(const GaussianCircuit& c, double a, double b) {
  if (!(b > a)) throw std::invalid_argument("decide_gausim: need a < b");
  const double mean = output_distribution(run_circuit(c)).mean;
  if (mean >= b) return GausSimAnswer::Yes;
  if (mean <= a) return GausSimAnswer::No;
  throw PromiseViolated("decide_gausim: mean inside (a, b)");
}

GaussianGate beam_splitter_gate(int n_modes, int i, int j) {
  if (i == j || i >= n_modes || j >= n_modes || i < 0 || j < 0)
    throw std::invalid_argument("beam_splitter_gate: bad mode pair");
  QuadHamPhase h = QuadHamPhase::zero(n_modes);
  const int xi = i, xj = j, pi = n_modes + i, pj = n_modes + j;
  h.M(xi, pj) = h.M(pj, xi) = 1.0;
  h.M(xj, pi) = h.M(pi, xj) = -1.0;
  return {h, M_PI / 4};
}

GaussianCircuit sample_mean_combine(const std::vector<GaussianCircuit>& circuits) {
  const size_t count = circuits.size();
  if (count == 0 || (count & (count - 1)))
    throw std::invalid_argument("sample_mean_combine: need a power-of-two circuit count");
  const int m = circuits[0].n_modes;
  for (const auto& c : circuits) {
    c.validate();
    if (c.n_modes != m)
      throw std::invalid_argument("sample_mean_combine: equal mode counts required");
  }
  if (count == 1) return circuits[0];

  const int n = int(count) * m;
  GaussianCircuit out;
  out.n_modes = n;

  // Each component circuit acts on its own block of modes.
  for (size_t b = 0; b < count; ++b) {
    const int off = int(b) * m;
    for (const auto& g : circuits[b].gates) {
      QuadHamPhase h = QuadHamPhase::zero(n);
      for (int r = 0; r < 2 * m; ++r) {
        const int rr = (r < m) ? off + r : n + off + (r - m);
        h.d(rr) = g.h.d(r);
        for (int c2 = 0; c2 < 2 * m; ++c2) {
          const int cc = (c2 < m) ? off + c2 : n + off + (c2 - m);
          h.M(rr, cc) = g.h.M(r, c2);
        }
      }
      out.gates.push_back({std::move(h), g.t});
    }
  }

  // Pairwise 50:50 beam splitters; the running sum accumulates on mode 0.
  for (size_t stride = 1; stride < count; stride *= 2)
    for (size_t b = 0; b + stride < count; b += 2 * stride)
      out.gates.push_back(beam_splitter_gate(n, int(b) * m, int(b + stride) * m));
  return out;
}

double sample(const GaussianState& state, uint64_t seed) {
  const auto dist = output_distribution(state);
  // Box-Muller over mt19937_64 keeps samples bit-stable across platforms.
  std::mt19937_64 rng(seed);
  const double u1 = (double(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  const double u2 = (double(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  return dist.mean + std::sqrt(dist.variance) * z;
}

}  // namespace qumode
