#include "qumode/ground.hpp"

#include <cmath>

#include "qumode/bigint.hpp"
#include "qumode/errors.hpp"
#include "qumode/polyham.hpp"

namespace qumode {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

void QuadLadderHam::validate() const {
  const int n = n_modes();
  if (h1.rows() != n || h1.cols() != n || h2.rows() != n || h2.cols() != n)
    throw std::invalid_argument("QuadLadderHam: inconsistent dimensions");
  if ((h1 - h1.adjoint()).norm() > 1e-10 * (1 + h1.norm()))
    throw std::invalid_argument("QuadLadderHam: h1 must be Hermitian");
  if ((h2 - h2.transpose()).norm() > 1e-10 * (1 + h2.norm()))
    throw std::invalid_argument("QuadLadderHam: h2 must be symmetric");
}

namespace {

CoeffExact exact_from_cplx(cplx z) {
  return CoeffExact(Root2Rat(BigRat(z.real())), Root2Rat(BigRat(z.imag())));
}

}  // namespace

PolyExact QuadLadderHam::to_poly() const {
  validate();
  const size_t n = size_t(n_modes());
  PolyExact p(Basis::Ladder, n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      // a_i adag_j, creation-left: adag_j a_i + delta_ij
      TermKey k{MultiIndex::unit(n, i), MultiIndex::unit(n, j)};
      p.add_term(k, exact_from_cplx(h1(i, j)));
      if (i == j) p.add_term({MultiIndex(n), MultiIndex(n)}, exact_from_cplx(h1(i, j)));
      // a_i a_j and adag_i adag_j
      MultiIndex two(n);
      two[i] += 1;
      two[j] += 1;
      p.add_term({two, MultiIndex(n)}, exact_from_cplx(h2(i, j)));
      p.add_term({MultiIndex(n), two}, exact_from_cplx(std::conj(h2(i, j))));
    }
    p.add_term({MultiIndex::unit(n, i), MultiIndex(n)}, exact_from_cplx(h3(i)));
    p.add_term({MultiIndex(n), MultiIndex::unit(n, i)}, exact_from_cplx(std::conj(h3(i))));
  }
  return p;
}

SingleModeGround single_mode_ground(cplx alpha, double beta) {
  SingleModeGround g;
  const double aa = std::abs(alpha);
  if (!(beta > 2 * aa)) {
    g.bounded = false;
    return g;
  }
  g.bounded = true;
  g.energy = 0.5 * (std::sqrt(beta * beta - 4 * aa * aa) - beta);
  const double theta = std::arg(alpha);
  g.a_star = std::exp(cplx(0, -theta)) * std::tanh(0.5 * std::atanh(2 * aa / beta));
  return g;
}

namespace {

// Real stacking c~ = (Re c, Im c); the realified quadratic form of
// 2 Re(c^T h2 c) + c^T h1 conj(c) is  M = 2 J h2~ + J h1~ J.
MatrixXd realified_form(const QuadLadderHam& h) {
  const int n = h.n_modes();
  MatrixXd m(2 * n, 2 * n);
  const MatrixXd re1 = h.h1.real(), im1 = h.h1.imag();
  const MatrixXd re2 = h.h2.real(), im2 = h.h2.imag();
  m.topLeftCorner(n, n) = re1 + 2 * re2;
  m.topRightCorner(n, n) = im1 - 2 * im2;
  m.bottomLeftCorner(n, n) = -im1 - 2 * im2;
  m.bottomRightCorner(n, n) = re1 - 2 * re2;
  return (m + m.transpose()) / 2;
}

VectorXd realified_linear(const QuadLadderHam& h) {
  // gradient vector 2 J h3~ of the linear part 2 Re(c . h3)
  const int n = h.n_modes();
  VectorXd v(2 * n);
  v.head(n) = 2 * h.h3.real();
  v.tail(n) = -2 * h.h3.imag();
  return v;
}

}  // namespace

BoundednessReport boundedness_check(const QuadLadderHam& h) {
  h.validate();
  const int n = h.n_modes();
  BoundednessReport rep;
  rep.certificate = realified_form(h);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(rep.certificate);
  rep.min_eig = es.eigenvalues().minCoeff();

  const double scale = 1 + rep.certificate.cwiseAbs().maxCoeff();
  rep.bounded = rep.min_eig > 1e-11 * scale;
  if (!rep.bounded) {
    // coherent ray: the most negative eigenvector, oriented so the linear
    // part does not fight the descent
    VectorXd dir = es.eigenvectors().col(0);
    if (realified_linear(h).dot(dir) > 0) dir = -dir;
    rep.coherent_ray = VectorXcd(n);
    for (int i = 0; i < n; ++i) rep.coherent_ray(i) = cplx(dir(i), dir(n + i));
  }
  return rep;
}

RealifiedPair realified_pair(const QuadLadderHam& h) {
  h.validate();
  const int n = h.n_modes();
  // h2~ J = [[Re h2, Im h2], [Im h2, -Re h2]], h1~ = [[Re h1, -Im h1], [Im h1, Re h1]]
  MatrixXd h2j(2 * n, 2 * n), h1r(2 * n, 2 * n);
  h2j.topLeftCorner(n, n) = h.h2.real();
  h2j.topRightCorner(n, n) = h.h2.imag();
  h2j.bottomLeftCorner(n, n) = h.h2.imag();
  h2j.bottomRightCorner(n, n) = -h.h2.real();
  h1r.topLeftCorner(n, n) = h.h1.real();
  h1r.topRightCorner(n, n) = -h.h1.imag();
  h1r.bottomLeftCorner(n, n) = h.h1.imag();
  h1r.bottomRightCorner(n, n) = h.h1.real();

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(h2j);
  const VectorXd& lam = es.eigenvalues();  // ascending; spectrum is +/- paired
  const MatrixXd& vec = es.eigenvectors();
  const double tol = 1e-10 * (1 + h2j.cwiseAbs().maxCoeff());

  // K = [[0,-I],[I,0]]; eigenvectors pair as w <-> Kw with eigenvalues -q, q.
  auto apply_k = [&](const VectorXd& w) {
    VectorXd kw(2 * n);
    kw.head(n) = -w.tail(n);
    kw.tail(n) = w.head(n);
    return kw;
  };

  MatrixXd w = MatrixXd::Zero(2 * n, n);
  VectorXd q = VectorXd::Zero(n);
  int col = 0;
  for (int i = 0; i < 2 * n && col < n; ++i) {
    if (lam(i) < -tol) {
      w.col(col) = vec.col(i);
      q(col) = -lam(i);
      ++col;
    }
  }
  // kernel: pick K-paired representatives
  std::vector<VectorXd> kernel;
  for (int i = 0; i < 2 * n; ++i)
    if (std::abs(lam(i)) <= tol) kernel.push_back(vec.col(i));
  while (col < n && !kernel.empty()) {
    VectorXd v0 = kernel.front();
    // re-orthogonalize against already chosen pairs
    for (int cdone = 0; cdone < col; ++cdone) {
      if (q(cdone) > 0) continue;
      v0 -= w.col(cdone).dot(v0) * w.col(cdone);
      VectorXd kw = apply_k(w.col(cdone));
      v0 -= kw.dot(v0) * kw;
    }
    if (v0.norm() < 1e-8) {
      kernel.erase(kernel.begin());
      continue;
    }
    v0.normalize();
    w.col(col) = v0;
    q(col) = 0;
    ++col;
    // rebuild remaining kernel candidates orthogonal to span(v0, K v0)
    VectorXd kv0 = apply_k(v0);
    std::vector<VectorXd> rest;
    for (auto& u : kernel) {
      VectorXd r = u - v0.dot(u) * v0 - kv0.dot(u) * kv0;
      if (r.norm() > 1e-8) rest.push_back(r.normalized());
    }
    kernel = std::move(rest);
  }
  if (col != n) throw SolverFailure("realified_pair: eigen-pairing failed");

  RealifiedPair out;
  out.q = q.asDiagonal();
  out.p = w.transpose() * h1r * w;
  out.p = (out.p + out.p.transpose()) / 2;
  return out;
}

GaussianGroundResult gaussian_ground_energy(const QuadLadderHam& h, double tol) {
  BoundednessReport bd = boundedness_check(h);
  if (!bd.bounded)
    throw std::invalid_argument("gaussian_ground_energy: Hamiltonian is not bounded below");

  RealifiedPair pq = realified_pair(h);
  const MatrixXd a = pq.p - 2 * pq.q;
  const MatrixXd b = pq.p + 2 * pq.q;
  TraceProblemResult sdp = minimize_trace_pair(a, b, tol);

  GaussianGroundResult out;
  out.x_opt = sdp.x;
  out.gap_estimate = sdp.gap_estimate;
  out.energy = 0.25 * sdp.objective + 0.5 * pq.p.trace();

  const int n = h.n_modes();
  out.c_opt = VectorXcd::Zero(n);
  if (h.h3.norm() > 0) {
    const MatrixXd mc = realified_form(h);
    const VectorXd lin = realified_linear(h);
    // f(x) = x^T M x + lin.x  =>  x* = -M^{-1} lin / 2
    const VectorXd xs = mc.ldlt().solve(-0.5 * lin);
    out.energy += xs.dot(mc * xs) + lin.dot(xs);
    for (int i = 0; i < n; ++i) out.c_opt(i) = cplx(xs(i), xs(n + i));
  }
  return out;
}

TakagiFactors takagi(const MatrixXcd& a) {
  const int n = int(a.rows());
  if ((a - a.transpose()).norm() > 1e-10 * (1 + a.norm()))
    throw std::invalid_argument("takagi: symmetric input required");

  // Con-eigenvalue problem A conj(z) = s z realified: T (u;v) = s (u;v) with
  // T = [[Re A, Im A], [Im A, -Re A]]; K-pairing links the +/- s spaces.
  MatrixXd t(2 * n, 2 * n);
  t.topLeftCorner(n, n) = a.real();
  t.topRightCorner(n, n) = a.imag();
  t.bottomLeftCorner(n, n) = a.imag();
  t.bottomRightCorner(n, n) = -a.real();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es((t + t.transpose()) / 2);
  const VectorXd& lam = es.eigenvalues();
  const MatrixXd& vec = es.eigenvectors();
  const double tol = 1e-12 * (1 + a.norm());

  MatrixXcd z(n, n);
  VectorXd d(n);
  int col = 0;
  for (int i = 2 * n - 1; i >= 0 && col < n; --i) {  // descending
    if (lam(i) > tol) {
      for (int r = 0; r < n; ++r) z(r, col) = cplx(vec(r, i), vec(n + r, i));
      d(col) = lam(i);
      ++col;
    }
  }
  // zero con-eigenvalues: K-paired kernel representatives
  std::vector<VectorXd> kernel;
  for (int i = 0; i < 2 * n; ++i)
    if (std::abs(lam(i)) <= tol) kernel.push_back(vec.col(i));
  auto apply_k = [&](const VectorXd& w) {
    VectorXd kw(2 * n);
    kw.head(n) = -w.tail(n);
    kw.tail(n) = w.head(n);
    return kw;
  };
  while (col < n && !kernel.empty()) {
    VectorXd v0 = kernel.front();
    kernel.erase(kernel.begin());
    if (v0.norm() < 1e-8) continue;
    v0.normalize();
    for (int r = 0; r < n; ++r) z(r, col) = cplx(v0(r), v0(n + r));
    d(col) = 0;
    ++col;
    VectorXd kv0 = apply_k(v0);
    std::vector<VectorXd> rest;
    for (auto& u : kernel) {
      VectorXd r = u - v0.dot(u) * v0 - kv0.dot(u) * kv0;
      if (r.norm() > 1e-8) rest.push_back(r.normalized());
    }
    kernel = std::move(rest);
  }
  if (col != n) throw SolverFailure("takagi: con-eigen pairing failed");

  // unit real eigenvectors already give |z| = 1; renormalize for safety
  for (int c = 0; c < n; ++c) z.col(c).normalize();
  TakagiFactors f;
  f.u = z.transpose();  // A = U^T D U convention
  f.d = d;
  if ((a - f.u.transpose() * d.asDiagonal() * f.u).norm() > 1e-8 * (1 + a.norm()))
    throw SolverFailure("takagi: reconstruction check failed");
  return f;
}

VectorXcd stellar_c(const GaussianStellarParams& params) {
  TakagiFactors f = takagi(params.a);
  const int n = params.n_modes();
  VectorXd denom(n);
  for (int i = 0; i < n; ++i) {
    if (f.d(i) >= 1.0)
      throw std::invalid_argument("stellar_c: |A| < I required for a normalizable state");
    denom(i) = 1.0 / (1.0 - f.d(i) * f.d(i));
  }
  return f.u.transpose() * denom.asDiagonal() *
         (f.u.conjugate() * params.b - f.d.asDiagonal() * (f.u * params.b.conjugate()));
}

namespace {

// Anti-normal moment engine: variables are (t_i = a_i) and (s_i = adag_i);
// the generating function exp(-1/2 xi^T Sigma xi + mean . xi) yields
// pair(a,b) = -Sigma_ab and the Isserlis-with-means recursion.
struct MomentEngine {
  MatrixXcd sigma;   // 2n x 2n over (s block, t block)
  VectorXcd mean;    // (conj c, c)

  cplx moment(std::vector<int> vars) const {
    if (vars.empty()) return 1.0;
    const int v0 = vars.back();
    vars.pop_back();
    cplx acc = mean(v0) * moment(vars);
    for (size_t j = 0; j < vars.size(); ++j) {
      std::vector<int> rest = vars;
      rest.erase(rest.begin() + long(j));
      acc += -sigma(v0, vars[j]) * moment(rest);
    }
    return acc;
  }
};

MomentEngine build_engine(const GaussianStellarParams& params) {
  TakagiFactors f = takagi(params.a);
  const int n = params.n_modes();
  VectorXd lam(n), dl(n);
  for (int i = 0; i < n; ++i) {
    lam(i) = 1.0 / (1.0 - f.d(i) * f.d(i));
    dl(i) = f.d(i) * lam(i);
  }
  MomentEngine eng;
  eng.sigma.resize(2 * n, 2 * n);
  const MatrixXcd u = f.u;
  eng.sigma.topLeftCorner(n, n) = u.adjoint() * dl.asDiagonal() * u.conjugate();
  eng.sigma.topRightCorner(n, n) = -(u.adjoint() * lam.asDiagonal() * u);
  eng.sigma.bottomLeftCorner(n, n) = -(u.transpose() * lam.asDiagonal() * u.conjugate());
  eng.sigma.bottomRightCorner(n, n) = u.transpose() * dl.asDiagonal() * u;

  const VectorXcd c = u.transpose() * lam.asDiagonal() *
                      (u.conjugate() * params.b - f.d.asDiagonal() * (u * params.b.conjugate()));
  eng.mean.resize(2 * n);
  eng.mean.head(n) = c.conjugate();
  eng.mean.tail(n) = c;
  return eng;
}

}  // namespace

double gaussian_expectation(const PolyExact& ladder_h, const GaussianStellarParams& params) {
  if (ladder_h.basis() != Basis::Ladder)
    throw std::invalid_argument("gaussian_expectation: ladder input required");
  if (ladder_h.degree() > 4)
    throw std::invalid_argument("gaussian_expectation: degree <= 4 supported");
  const size_t n = size_t(params.n_modes());
  if (ladder_h.modes() != n)
    throw std::invalid_argument("gaussian_expectation: mode count mismatch");

  const MomentEngine eng = build_engine(params);
  cplx total = 0;
  for (const auto& [k, co] : ladder_h.terms()) {
    // reorder creation-left adag^nu a^mu into anti-normal a^{mu-l} adag^{nu-l}
    // per mode: adag^v a^u = sum_l (-1)^l l! C(u,l) C(v,l) a^{u-l} adag^{v-l}
    std::vector<std::pair<double, TermKey>> anti{{1.0, k}};
    for (size_t i = 0; i < n; ++i) {
      std::vector<std::pair<double, TermKey>> next;
      for (auto& [w, key] : anti) {
        const unsigned u = key.mu[i], v = key.nu[i];
        for (unsigned l = 0; l <= std::min(u, v); ++l) {
          TermKey k2 = key;
          k2.mu[i] = u - l;
          k2.nu[i] = v - l;
          double wl = w *
                      (factorial(l) * binomial(u, l) * binomial(v, l)).convert_to<double>();
          if (l % 2) wl = -wl;
          next.push_back({wl, k2});
        }
      }
      anti = std::move(next);
    }
    cplx term = 0;
    for (const auto& [w, key] : anti) {
      std::vector<int> vars;
      for (size_t i = 0; i < n; ++i) {
        for (unsigned r = 0; r < key.nu[i]; ++r) vars.push_back(int(i));            // s block
        for (unsigned r = 0; r < key.mu[i]; ++r) vars.push_back(int(n + i));        // t block
      }
      term += w * eng.moment(vars);
    }
    total += to_cd(co) * term;
  }
  if (std::abs(total.imag()) > 1e-8 * (1 + std::abs(total.real())))
    throw SolverFailure("gaussian_expectation: non-real value for a Hermitian input");
  return total.real();
}

CoeffExact coherent_expectation(const PolyExact& ladder_h, const std::vector<CoeffExact>& z) {
  if (ladder_h.basis() != Basis::Ladder)
    throw std::invalid_argument("coherent_expectation: ladder input required");
  if (z.size() != ladder_h.modes())
    throw std::invalid_argument("coherent_expectation: mode count mismatch");
  CoeffExact total;
  for (const auto& [k, co] : ladder_h.terms()) {
    CoeffExact term = co;
    for (size_t i = 0; i < z.size(); ++i) {
      for (unsigned r = 0; r < k.nu[i]; ++r) term *= z[i].conj();
      for (unsigned r = 0; r < k.mu[i]; ++r) term *= z[i];
    }
    total += term;
  }
  return total;
}

double coherent_expectation_d(const PolyExact& ladder_h, const VectorXcd& z) {
  std::vector<CoeffExact> ze;
  for (int i = 0; i < z.size(); ++i) ze.push_back(exact_from_cplx(z(i)));
  return to_cd(coherent_expectation(ladder_h, ze)).real();
}

namespace {

// commutative monomial over (x_1..x_n, p_1..p_n)
struct CommMono {
  MultiIndex x, p;
  friend auto operator<=>(const CommMono&, const CommMono&) = default;
  CommMono operator*(const CommMono& o) const { return {x + o.x, p + o.p}; }
  uint32_t degree() const { return x.total() + p.total(); }
};

// operator version of a monomial: (1/2){X^sigma, P^rho}
PolyExact monomial_operator(size_t n, const CommMono& m) {
  PolyExact anti(Basis::Anti, n);
  anti.add_term({m.x, m.p}, CoeffExact(1));
  return from_anticommutator(anti);
}

std::optional<BigRat> rationalize(double v, long max_den = 1 << 20) {
  // continued fractions; boundary dust snaps to zero and the exact affine
  // re-projection downstream repairs the constraints
  if (!std::isfinite(v)) return std::nullopt;
  if (std::abs(v) < 5e-7) return BigRat(0);
  double x = v;
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  for (int it = 0; it < 64; ++it) {
    const double fl = std::floor(x);
    if (std::abs(fl) > 9e17) return std::nullopt;
    const long a = long(fl);
    long p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > max_den || q2 < 0) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double err = std::abs(v - double(p1) / double(q1));
    if (err < 1e-9 * (1 + std::abs(v))) return BigRat(p1, q1);
    const double frac = x - fl;
    if (frac < 1e-15) break;
    x = 1.0 / frac;
  }
  if (q1 > 0 && std::abs(v - double(p1) / double(q1)) < 1e-7 * (1 + std::abs(v)))
    return BigRat(p1, q1);
  return std::nullopt;
}

// Solve the square rational system m x = rhs by Gaussian elimination; the
// system may be singular, in which case free variables are pinned to zero
// and inconsistent rows report failure.
std::optional<std::vector<BigRat>> rational_solve(std::vector<std::vector<BigRat>> m,
                                                  std::vector<BigRat> rhs) {
  const size_t n = m.size();
  std::vector<size_t> colof(n, size_t(-1));
  size_t row = 0;
  for (size_t col = 0; col < n && row < n; ++col) {
    size_t piv = row;
    while (piv < n && m[piv][col] == 0) ++piv;
    if (piv == n) continue;
    std::swap(m[piv], m[row]);
    std::swap(rhs[piv], rhs[row]);
    for (size_t r = 0; r < n; ++r) {
      if (r == row || m[r][col] == 0) continue;
      const BigRat f = m[r][col] / m[row][col];
      for (size_t c2 = col; c2 < n; ++c2) m[r][c2] -= f * m[row][c2];
      rhs[r] -= f * rhs[row];
    }
    colof[row] = col;
    ++row;
  }
  for (size_t r = row; r < n; ++r)
    if (rhs[r] != 0) return std::nullopt;
  std::vector<BigRat> x(n, BigRat(0));
  for (size_t r = 0; r < row; ++r) x[colof[r]] = rhs[r] / m[r][colof[r]];
  return x;
}

// exact PSD test via LDL^T with diagonal pivoting in rational arithmetic
bool rational_psd(const std::vector<std::vector<BigRat>>& g) {
  const size_t n = g.size();
  std::vector<std::vector<BigRat>> m = g;
  std::vector<size_t> active(n);
  for (size_t i = 0; i < n; ++i) active[i] = i;
  while (!active.empty()) {
    // pick the largest diagonal
    size_t best = 0;
    for (size_t i = 1; i < active.size(); ++i)
      if (m[active[i]][active[i]] > m[active[best]][active[best]]) best = i;
    const size_t piv = active[best];
    const BigRat d = m[piv][piv];
    if (d < 0) return false;
    if (d == 0) {
      for (size_t j : active)
        if (m[piv][j] != 0) return false;  // zero diagonal forces a zero row
      active.erase(active.begin() + long(best));
      continue;
    }
    active.erase(active.begin() + long(best));
    for (size_t i : active)
      for (size_t j : active) m[i][j] -= m[i][piv] * m[piv][j] / d;
  }
  return true;
}

}  // namespace

std::optional<SosWitness> sos_witness(const PolyExact& h_xp) {
  if (h_xp.basis() != Basis::XP)
    throw std::invalid_argument("sos_witness: XP input required");
  if (h_xp.degree() > 4)
    throw std::invalid_argument("sos_witness: degree <= 4 supported");
  const size_t n = h_xp.modes();

  // p_H coefficients: image of H = sum h (1/2){X^mu, P^nu} under -> x^mu p^nu
  PolyExact anti = to_anticommutator(h_xp);  // throws for non-Hermitian input
  std::map<CommMono, double> ph;
  bool rational_input = true;
  for (const auto& [k, c] : anti.terms()) {
    ph[{k.mu, k.nu}] = to_cd(c).real();
    if (!c.re.is_rational()) rational_input = false;
  }

  // monomial basis of degree <= 2 over (x, p)
  std::vector<CommMono> basis;
  basis.push_back({MultiIndex(n), MultiIndex(n)});
  for (size_t i = 0; i < n; ++i) {
    basis.push_back({MultiIndex::unit(n, i), MultiIndex(n)});
    basis.push_back({MultiIndex(n), MultiIndex::unit(n, i)});
  }
  std::vector<CommMono> deg1 = basis;
  for (size_t a = 1; a < deg1.size(); ++a)
    for (size_t b = a; b < deg1.size(); ++b) basis.push_back(deg1[a] * deg1[b]);
  const int dim = int(basis.size());

  // constraints: sum_{(a,b): m_a m_b = w} G_ab = p_H(w)
  std::map<CommMono, MatrixXd> rows;
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) {
      const CommMono w = basis[size_t(a)] * basis[size_t(b)];
      auto it = rows.find(w);
      if (it == rows.end()) it = rows.emplace(w, MatrixXd::Zero(dim, dim)).first;
      it->second(a, b) += 0.5;
      it->second(b, a) += 0.5;
    }
  std::vector<GramConstraint> cons;
  for (auto& [w, mat] : rows) {
    const auto itc = ph.find(w);
    cons.push_back({mat, itc == ph.end() ? 0.0 : itc->second});
  }
  // any p_H monomial outside the reachable set makes the problem infeasible
  for (const auto& [w, v] : ph)
    if (!rows.count(w) && v != 0) return std::nullopt;

  // The certified shift is linear in the Gram matrix (it collects the
  // identity coefficients of the operator products), so push the solver
  // towards the best-possible shift.
  std::vector<PolyExact> ops;
  for (int a = 0; a < dim; ++a) ops.push_back(monomial_operator(n, basis[size_t(a)]));
  MatrixXd objective = MatrixXd::Zero(dim, dim);
  const TermKey id_key{MultiIndex(n), MultiIndex(n)};
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) {
      const CoeffExact idc = normal_order_mul(ops[size_t(a)], ops[size_t(b)]).coeff(id_key);
      objective(a, b) = to_cd(idc).real();
    }
  objective = ((objective + objective.transpose()) / 2).eval();

  auto gram = solve_gram_feasibility(dim, cons, 1e-9, &objective);
  if (!gram) return std::nullopt;

  SosWitness out;
  out.gram = *gram;

  // squares from the spectral factorization
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(out.gram);
  for (int k = 0; k < dim; ++k) {
    const double lam = es.eigenvalues()(k);
    if (lam < 1e-10) continue;
    PolyExact g(Basis::XP, n);
    for (int a = 0; a < dim; ++a) {
      const double coeff = std::sqrt(lam) * es.eigenvectors()(a, k);
      if (std::abs(coeff) < 1e-12) continue;
      g += monomial_operator(n, basis[size_t(a)]) * exact_from_cplx(coeff);
    }
    if (!g.empty()) out.squares.push_back(std::move(g));
  }

  // exact path: rationalize the Gram, re-project it exactly onto the affine
  // constraints, then verify PSD and the remainder in rational arithmetic
  if (rational_input) {
    std::vector<std::vector<BigRat>> grat{size_t(dim), std::vector<BigRat>(size_t(dim))};
    bool ok = true;
    for (int a = 0; a < dim && ok; ++a)
      for (int b = a; b < dim && ok; ++b) {
        auto r = rationalize(out.gram(a, b));
        if (!r) {
          ok = false;
          break;
        }
        grat[size_t(a)][size_t(b)] = grat[size_t(b)][size_t(a)] = *r;
      }
    if (ok) {
      // integer constraint rows over vech(G): count of ordered pairs per
      // product monomial; rhs is the exact p_H coefficient
      std::vector<std::pair<CommMono, CoeffExact>> anti_terms;
      for (const auto& [k, c] : anti.terms()) anti_terms.push_back({{k.mu, k.nu}, c});
      auto vech_index = [&](int a, int b) {
        if (a > b) std::swap(a, b);
        return a * (2 * dim - a - 1) / 2 + b;  // upper-triangular row-major
      };
      const int vd = dim * (dim + 1) / 2;
      std::map<CommMono, std::vector<BigRat>> rrows;
      for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) {
          const CommMono w = basis[size_t(a)] * basis[size_t(b)];
          auto it = rrows.find(w);
          if (it == rrows.end())
            it = rrows.emplace(w, std::vector<BigRat>(size_t(vd), BigRat(0))).first;
          it->second[size_t(vech_index(a, b))] += 1;
        }
      std::vector<std::vector<BigRat>> rmat;
      std::vector<BigRat> crhs;
      for (auto& [w, rowv] : rrows) {
        rmat.push_back(rowv);
        BigRat cv(0);
        for (auto& [wm, cc] : anti_terms)
          if (wm == w) cv = cc.re.a;
        crhs.push_back(cv);
      }
      // normal equations R R^T lambda = R g - c; g' = g - R^T lambda
      const size_t mrows = rmat.size();
      std::vector<BigRat> gv(static_cast<size_t>(vd));
      for (int a = 0; a < dim; ++a)
        for (int b = a; b < dim; ++b) gv[size_t(vech_index(a, b))] = grat[size_t(a)][size_t(b)];
      std::vector<BigRat> resid(mrows, BigRat(0));
      for (size_t r = 0; r < mrows; ++r) {
        for (int v = 0; v < vd; ++v) resid[r] += rmat[r][size_t(v)] * gv[size_t(v)];
        resid[r] -= crhs[r];
      }
      std::vector<std::vector<BigRat>> rrt{mrows, std::vector<BigRat>(mrows, BigRat(0))};
      for (size_t r = 0; r < mrows; ++r)
        for (size_t s = r; s < mrows; ++s) {
          BigRat acc(0);
          for (int v = 0; v < vd; ++v) acc += rmat[r][size_t(v)] * rmat[s][size_t(v)];
          rrt[r][s] = rrt[s][r] = acc;
        }
      auto lambda = rational_solve(rrt, resid);
      if (lambda) {
        for (int v = 0; v < vd; ++v) {
          BigRat adj(0);
          for (size_t r = 0; r < mrows; ++r) adj += rmat[r][size_t(v)] * (*lambda)[r];
          gv[size_t(v)] -= adj;
        }
        for (int a = 0; a < dim; ++a)
          for (int b = a; b < dim; ++b)
            grat[size_t(a)][size_t(b)] = grat[size_t(b)][size_t(a)] =
                gv[size_t(vech_index(a, b))];
      } else {
        ok = false;
      }
    }
    if (ok && rational_psd(grat)) {
      // remainder sum_ab G_ab M_a M_b - H must be an exact multiple of I
      PolyExact sum(Basis::XP, n);
      for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) {
          if (grat[size_t(a)][size_t(b)] == 0) continue;
          sum += normal_order_mul(ops[size_t(a)], ops[size_t(b)]) *
                 CoeffOps<CoeffExact>::from_rat(grat[size_t(a)][size_t(b)]);
        }
      PolyExact rem = sum - h_xp;
      const TermKey id{MultiIndex(n), MultiIndex(n)};
      CoeffExact rho = rem.coeff(id);
      rem.add_term(id, -rho);
      if (rem.empty() && rho.is_real() && rho.re.is_rational()) {
        out.exact = true;
        out.exact_shift = -rho.re.a;
        out.shift = -rho.re.a.convert_to<double>();
        return out;
      }
    }
  }

  // float path: expand with the float Gram, require the remainder to be a
  // multiple of the identity up to round-off
  PolyFloat sum(Basis::XP, n);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) {
      if (out.gram(a, b) == 0) continue;
      PolyFloat pa = to_float_poly(monomial_operator(n, basis[size_t(a)]));
      PolyFloat pb = to_float_poly(monomial_operator(n, basis[size_t(b)]));
      sum += normal_order_mul(pa, pb) * CoeffFloat(MpFloat(out.gram(a, b)));
    }
  PolyFloat remf = sum;
  for (const auto& [k, c] : h_xp.terms()) remf.add_term(k, -to_float_coeff(c));
  const TermKey id{MultiIndex(n), MultiIndex(n)};
  CoeffFloat rho = remf.coeff(id);
  remf.add_term(id, CoeffFloat(-rho.re, -rho.im));
  double residue = 0;
  for (const auto& [k, c] : remf.terms())
    residue = std::max(residue, std::abs(to_cd(c)));
  if (residue > 1e-6) throw SolverFailure("sos_witness: remainder is not a multiple of I");
  out.shift = -rho.re.convert_to<double>();
  return out;
}

PolyExact copositivity_gadget(const MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("copositivity_gadget: square input");
  const size_t n = size_t(m.rows());
  PolyExact h(Basis::Ladder, n);
  std::vector<PolyExact> number_ops;
  for (size_t i = 0; i < n; ++i) {
    PolyExact num(Basis::Ladder, n);
    num.add_term({MultiIndex::unit(n, i), MultiIndex::unit(n, i)}, CoeffExact(1));
    number_ops.push_back(std::move(num));
  }
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (m(i, j) == 0) continue;
      h += normal_order_mul(number_ops[i], number_ops[j]) *
           exact_from_cplx(cplx(m(i, j), 0));
    }
  return h;
}

BigRat fock_box_min(const PolyExact& h_ladder, int box) {
  if (h_ladder.basis() != Basis::Ladder)
    throw std::invalid_argument("fock_box_min: ladder input required");
  for (const auto& [k, c] : h_ladder.terms())
    if (k.mu != k.nu)
      throw std::invalid_argument("fock_box_min: number-diagonal Hamiltonian required");
  const size_t n = h_ladder.modes();
  MultiIndex m(n);
  std::optional<BigRat> best;
  for (;;) {
    CoeffExact v = fock_diagonal_expectation(h_ladder, m);
    if (!v.is_real() || !v.re.is_rational())
      throw SolverFailure("fock_box_min: non-rational diagonal value");
    if (!best || v.re.a < *best) best = v.re.a;
    size_t i = 0;
    for (; i < n; ++i) {
      if (int(m[i]) < box) {
        ++m[i];
        break;
      }
      m[i] = 0;
    }
    if (i == n) break;
  }
  return *best;
}

BigInt IntPoly::eval(const std::vector<BigInt>& x) const {
  BigInt total = 0;
  for (const auto& [e, c] : terms) {
    BigInt t = c;
    for (size_t i = 0; i < n_vars; ++i)
      for (uint32_t r = 0; r < e[i]; ++r) t *= x[i];
    total += t;
  }
  return total;
}

IntPoly IntPoly::squared() const {
  IntPoly out;
  out.n_vars = n_vars;
  for (const auto& [e1, c1] : terms)
    for (const auto& [e2, c2] : terms) {
      std::vector<uint32_t> e(n_vars);
      for (size_t i = 0; i < n_vars; ++i) e[i] = e1[i] + e2[i];
      out.terms[e] += c1 * c2;
    }
  std::erase_if(out.terms, [](const auto& kv) { return kv.second == 0; });
  return out;
}

PolyExact hilbert_gadget(const IntPoly& p) {
  const size_t n = p.n_vars;
  const IntPoly q = p.squared();
  PolyExact h(Basis::Ladder, n);
  std::vector<PolyExact> number_ops;
  for (size_t i = 0; i < n; ++i) {
    PolyExact num(Basis::Ladder, n);
    num.add_term({MultiIndex::unit(n, i), MultiIndex::unit(n, i)}, CoeffExact(1));
    number_ops.push_back(std::move(num));
  }
  for (const auto& [e, c] : q.terms) {
    PolyExact term = PolyExact::identity(Basis::Ladder, n);
    for (size_t i = 0; i < n; ++i)
      for (uint32_t r = 0; r < e[i]; ++r) term = normal_order_mul(term, number_ops[i]);
    h += term * CoeffOps<CoeffExact>::from_int(c);
  }
  return h;
}

BoxSpectrum spectrum_box(const IntPoly& p, int box) {
  const IntPoly q = p.squared();
  BoxSpectrum out;
  std::vector<uint32_t> m(p.n_vars, 0);
  bool first = true;
  for (;;) {
    std::vector<BigInt> x;
    for (auto v : m) x.push_back(BigInt(v));
    BigInt val = q.eval(x);
    if (first || val < out.min_value) {
      out.min_value = val;
      out.argmin = m;
      first = false;
    }
    size_t i = 0;
    for (; i < p.n_vars; ++i) {
      if (int(m[i]) < box) {
        ++m[i];
        break;
      }
      m[i] = 0;
    }
    if (i == p.n_vars) break;
  }
  return out;
}

}  // namespace qumode
