#include "qumode/fock.hpp"

#include <algorithm>
#include <cstring>
#include <functional>
#include <boost/math/constants/constants.hpp>
#include <cmath>
#include <iostream>
#include <mutex>

#include "qumode/airy.hpp"
#include "qumode/bigint.hpp"
#include "qumode/errors.hpp"
#include "qumode/polyham.hpp"

namespace qumode {

namespace {

void enumerate_states(int n_modes, int cutoff, MultiIndex& cur, int mode, int used,
                      std::vector<MultiIndex>& out) {
  if (mode == n_modes) {
    out.push_back(cur);
    return;
  }
  for (int v = 0; v + used <= cutoff; ++v) {
    cur[mode] = v;
    enumerate_states(n_modes, cutoff, cur, mode + 1, used + v, out);
  }
  cur[mode] = 0;
}

}  // namespace

FockBasis::FockBasis(int n_modes, int cutoff) : n_modes_(n_modes), cutoff_(cutoff) {
  if (n_modes < 1 || cutoff < 0) throw std::invalid_argument("FockBasis: bad shape");
  MultiIndex cur(n_modes);
  enumerate_states(n_modes, cutoff, cur, 0, 0, states_);
  for (int i = 0; i < int(states_.size()); ++i) lookup_[states_[i].e] = i;
}

int FockBasis::index(const MultiIndex& m) const {
  auto it = lookup_.find(m.e);
  return it == lookup_.end() ? -1 : it->second;
}

std::shared_ptr<const FockBasis> shared_basis(int n_modes, int cutoff) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::weak_ptr<const FockBasis>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{n_modes, cutoff}];
  if (auto b = slot.lock()) return b;
  auto b = std::make_shared<const FockBasis>(n_modes, cutoff);
  slot = b;
  return b;
}

bool BosonGate::is_gaussian() const {
  switch (kind) {
    case Kind::Cubic: return param == 0;
    case Kind::SigmaX:
    case Kind::SigmaZ:
    case Kind::SigmaZZ: return false;
    case Kind::PolyHam: return ham && ham->degree() <= 2;
    default: return true;
  }
}

BosonGate BosonGate::rotation(double theta, int mode) {
  BosonGate g;
  g.kind = Kind::Rotation;
  g.param = theta;
  g.mode = mode;
  return g;
}
BosonGate BosonGate::displacement(cd alpha, int mode) {
  BosonGate g;
  g.kind = Kind::Displacement;
  g.alpha = alpha;
  g.mode = mode;
  return g;
}
BosonGate BosonGate::squeezing(double r, int mode) {
  BosonGate g;
  g.kind = Kind::Squeezing;
  g.param = r;
  g.mode = mode;
  return g;
}
BosonGate BosonGate::shear(double t, int mode) {
  BosonGate g;
  g.kind = Kind::Shear;
  g.param = t;
  g.mode = mode;
  return g;
}
BosonGate BosonGate::linear_phase(double t, int mode) {
  BosonGate g;
  g.kind = Kind::LinearPhase;
  g.param = t;
  g.mode = mode;
  return g;
}
BosonGate BosonGate::fourier(int mode) {
  BosonGate g;
  g.kind = Kind::Fourier;
  g.mode = mode;
  return g;
}
BosonGate BosonGate::sum(int j, int k) {
  BosonGate g;
  g.kind = Kind::Sum;
  g.mode = j;
  g.mode2 = k;
  return g;
}
BosonGate BosonGate::cubic(double s, int mode) {
  BosonGate g;
  g.kind = Kind::Cubic;
  g.param = s;
  g.mode = mode;
  return g;
}
BosonGate BosonGate::poly_ham(PolyExact h, double t) {
  BosonGate g;
  g.kind = Kind::PolyHam;
  g.ham = std::make_shared<const PolyExact>(std::move(h));
  g.time = t;
  return g;
}
BosonGate BosonGate::sigma_x(double theta, int mode) {
  BosonGate g;
  g.kind = Kind::SigmaX;
  g.param = theta;
  g.mode = mode;
  return g;
}
BosonGate BosonGate::sigma_z(double theta, int mode) {
  BosonGate g;
  g.kind = Kind::SigmaZ;
  g.param = theta;
  g.mode = mode;
  return g;
}
BosonGate BosonGate::sigma_zz(double theta, int j, int k) {
  BosonGate g;
  g.kind = Kind::SigmaZZ;
  g.param = theta;
  g.mode = j;
  g.mode2 = k;
  return g;
}

void BosonCircuit::validate() const {
  if (n_modes < 1) throw std::invalid_argument("BosonCircuit: need >= 1 mode");
  if (!input_bits.empty() && int(input_bits.size()) != n_modes)
    throw std::invalid_argument("BosonCircuit: input bit-string length mismatch");
  for (const auto& g : gates) {
    if (g.mode < 0 || g.mode >= n_modes)
      throw std::invalid_argument("BosonCircuit: gate mode out of range");
    const bool two_mode = g.kind == BosonGate::Kind::Sum || g.kind == BosonGate::Kind::SigmaZZ;
    if (two_mode && (g.mode2 < 0 || g.mode2 >= n_modes || g.mode2 == g.mode))
      throw std::invalid_argument("BosonCircuit: bad two-mode target");
    if (g.kind == BosonGate::Kind::PolyHam) {
      if (!g.ham) throw std::invalid_argument("BosonCircuit: PolyHam gate without Hamiltonian");
      if (int(g.ham->modes()) != n_modes)
        throw std::invalid_argument("BosonCircuit: PolyHam mode count mismatch");
      if (!std::isfinite(g.time)) throw std::invalid_argument("BosonCircuit: bad gate time");
    }
    if (!std::isfinite(g.param)) throw std::invalid_argument("BosonCircuit: non-finite parameter");
  }
}

size_t BosonCircuit::cubic_count() const {
  size_t c = 0;
  for (const auto& g : gates) c += g.is_cubic();
  return c;
}

FockVector FockVector::vacuum(int n_modes, int cutoff) {
  FockVector v;
  v.basis = shared_basis(n_modes, cutoff);
  v.amp = CVec::Zero(v.basis->dim());
  MultiIndex zero(n_modes);
  v.amp(v.basis->index(zero)) = 1.0;
  return v;
}

double FockVector::mean_particle_number() const {
  double num = 0, den = 0;
  for (int i = 0; i < basis->dim(); ++i) {
    const double w = std::norm(amp(i));
    num += w * basis->state(i).total();
    den += w;
  }
  return den > 0 ? num / den : 0.0;
}

cd FockVector::amplitude(const MultiIndex& m) const {
  const int i = basis->index(m);
  return i < 0 ? cd(0) : amp(i);
}

namespace {

double column_leak(const CMat& u, int lower_half) {
  double worst = 0;
  for (int n = 0; n <= lower_half && n < u.cols(); ++n) {
    const double defect = 1.0 - u.col(n).squaredNorm();
    worst = std::max(worst, defect > 0 ? std::sqrt(defect) : 0.0);
  }
  return worst + 1e-12;
}

// exp(i scale G) of a Hermitian dense generator via eigendecomposition.
CMat hermitian_phase_exp(const CMat& g, double scale) {
  Eigen::SelfAdjointEigenSolver<CMat> es(g);
  CVec phases(g.rows());
  for (int i = 0; i < g.rows(); ++i)
    phases(i) = std::exp(cd(0, scale * es.eigenvalues()(i)));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

CMat single_mode_x(int dim) {
  CMat x = CMat::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) x(n - 1, n) = x(n, n - 1) = std::sqrt(0.5 * n);
  return x;
}

MpFloat mp_sqrt_factorial(unsigned n) { return sqrt(MpFloat(factorial(n))); }

}  // namespace

GateMatrix rotation_matrix(double theta, int cutoff) {
  CMat u = CMat::Zero(cutoff + 1, cutoff + 1);
  for (int n = 0; n <= cutoff; ++n) u(n, n) = std::exp(cd(0, theta * n));
  return {u, 1e-12};
}

GateMatrix fourier_matrix(int cutoff) {
  CMat u = CMat::Zero(cutoff + 1, cutoff + 1);
  const cd w = std::exp(cd(0, M_PI / 4));
  cd in(1, 0);
  for (int n = 0; n <= cutoff; ++n) {
    u(n, n) = w * in;
    in *= cd(0, 1);
  }
  return {u, 1e-12};
}

GateMatrix displacement_matrix(cd alpha, int cutoff) {
  const double a2 = std::norm(alpha);
  if (a2 > cutoff / 4.0)
    std::cerr << "qumode: displacement |alpha|^2 = " << a2 << " above cutoff/4 = "
              << cutoff / 4.0 << "; heavy truncation expected\n";

  PrecisionGuard guard(192);
  const int dim = cutoff + 1;
  CMat u(dim, dim);
  const MpFloat x(a2);
  const MpFloat pref = exp(-x / 2);
  const Cx<MpFloat> al(MpFloat(alpha.real()), MpFloat(alpha.imag()));

  // upper triangle rows m >= n via <n+d|D(alpha)|n> = e^{-|a|^2/2}
  // sqrt(n!/(n+d)!) alpha^d L_n^d(|a|^2); the m < n entries follow from
  // <m|D(alpha)|n> = conj(<n|D(-alpha)|m>).
  for (int n = 0; n < dim; ++n)
    for (int m = 0; m < dim; ++m) {
      const int d = std::abs(m - n);
      const int lo = std::min(m, n);
      // L_lo^d(x) = sum_i (-1)^i C(lo+d, lo-i) x^i / i!
      MpFloat lag = 0, xp = 1;
      for (int i = 0; i <= lo; ++i) {
        MpFloat term = MpFloat(binomial(lo + d, lo - i)) * xp / MpFloat(factorial(i));
        lag += (i % 2) ? -term : term;
        xp *= x;
      }
      Cx<MpFloat> ad(MpFloat(1));
      const Cx<MpFloat> base = (m >= n) ? al : -al.conj();
      for (int i = 0; i < d; ++i) ad *= base;
      Cx<MpFloat> val = ad;
      val *= pref * lag * mp_sqrt_factorial(lo) / mp_sqrt_factorial(lo + d);
      u(m, n) = to_cd(CoeffFloat(val.re, val.im));
    }
  return {u, column_leak(u, cutoff / 2)};
}

GateMatrix squeezing_matrix(double r, int cutoff) {
  if (std::abs(r) > std::log(4.0 * std::max(cutoff, 1)))
    std::cerr << "qumode: squeezing r = " << r << " above ln(4E); heavy truncation expected\n";

  // S(r) = exp(r (a^2 - adag^2)/2). From the Zassenhaus split of
  // (cosh r adag + sinh r a)^n applied to the squeezed vacuum:
  //   <m|S|n> = sqrt(n!/m!) / sqrt(cosh r) *
  //     sum_{k+l+2p=n, 2q:=m+k-l>=0} (-1)^p sinh^{k+p} cosh^{l+p}
  //       (m+k)! (-tanh r)^q / (k! l! p! 2^p 2^q q!).
  PrecisionGuard guard(256);
  const int dim = cutoff + 1;
  const MpFloat sh = sinh(MpFloat(r)), ch = cosh(MpFloat(r)), th = tanh(MpFloat(r));

  const int pmax = 2 * dim + 2;
  std::vector<MpFloat> shp(pmax, 1), chp(pmax, 1), thp(pmax, 1), half(pmax, 1),
      invfact(pmax, 1), fact(pmax, 1), sqfact(pmax, 1);
  for (int i = 1; i < pmax; ++i) {
    shp[i] = shp[i - 1] * sh;
    chp[i] = chp[i - 1] * ch;
    thp[i] = thp[i - 1] * -th;
    half[i] = half[i - 1] / 2;
    fact[i] = fact[i - 1] * i;
    invfact[i] = 1 / fact[i];
    sqfact[i] = sqrt(fact[i]);
  }

  CMat u = CMat::Zero(dim, dim);
  for (int n = 0; n < dim; ++n)
    for (int m = n % 2; m < dim; m += 2) {
      MpFloat sum = 0;
      for (int k = 0; k <= n; ++k) {
        for (int l = 0; l + k <= n; ++l) {
          if ((n - k - l) % 2) continue;
          const int p = (n - k - l) / 2;
          if ((m + k - l) % 2 || m + k - l < 0) continue;
          const int q = (m + k - l) / 2;
          MpFloat term = shp[k + p] * chp[l + p] * fact[m + k] * thp[q] * invfact[k] *
                         invfact[l] * invfact[p] * half[p + q] * invfact[q];
          if (p % 2) term = -term;
          sum += term;
        }
      }
      MpFloat val = sum * sqfact[n] / (sqfact[m] * sqrt(ch));
      u(m, n) = cd(val.convert_to<double>(), 0.0);
    }
  return {u, column_leak(u, cutoff / 2)};
}

GateMatrix shear_matrix(double t, int cutoff, int pad) {
  const int big = cutoff + 1 + pad;
  CMat x = single_mode_x(big);
  CMat u_big = hermitian_phase_exp(x * x, t);
  CMat u = u_big.topLeftCorner(cutoff + 1, cutoff + 1);
  return {u, column_leak(u, cutoff / 2)};
}

CubicMatrix cubic_matrix(double s, int cutoff, unsigned precision_bits) {
  if (s == 0) throw std::invalid_argument("cubic_matrix: s must be nonzero");
  const double as = std::abs(s);
  const double x = std::pow(as, -4.0 / 3.0);
  if (std::abs(std::log(as)) > 6.0 + cutoff)
    throw std::invalid_argument("cubic_matrix: |log s| out of the formula's range");

  if (as < 0.02) {
    // The closed form needs ~ 2/(3 s^2) bits to survive its prefactor, which
    // is hopeless for tiny s; a padded generator exponential is benign there.
    const int big = 2 * cutoff + 24;
    CMat x3 = single_mode_x(big);
    x3 = x3 * x3 * x3;
    CMat u_pad = hermitian_phase_exp(x3, s / 3.0);
    CMat x3b = single_mode_x(big + 8);
    x3b = x3b * x3b * x3b;
    CMat u_pad2 = hermitian_phase_exp(x3b, s / 3.0);
    CubicMatrix out;
    out.u = u_pad.topLeftCorner(cutoff + 1, cutoff + 1);
    out.entry_error = (out.u - u_pad2.topLeftCorner(cutoff + 1, cutoff + 1))
                          .cwiseAbs()
                          .maxCoeff();
    out.leak_bound = column_leak(out.u, cutoff / 2);
    return out;
  }

  // Working precision must beat the exp(2/(3 s^2)) prefactor and the interior
  // cancellation of the Airy series (~ exp(x^{3/2})).
  unsigned bits = precision_bits;
  if (bits == 0)
    bits = unsigned(128 + 1.5 * (2.0 / (3.0 * s * s)) + 3.0 * std::pow(x, 1.5) +
                    8.0 * cutoff);
  PrecisionGuard guard(bits);

  const int dim = cutoff + 1;
  const unsigned lmax = unsigned(2 * cutoff);

  std::vector<AiryValue> ai(lmax + 1);
  for (unsigned l = 0; l <= lmax; ++l) ai[l] = airy_derivative_auto(l, MpFloat(x), bits);

  // Physicists' Hermite values H_k(-i/|s|); s < 0 is handled by conjugation.
  std::vector<Cx<MpFloat>> herm(dim);
  const Cx<MpFloat> arg(MpFloat(0), MpFloat(-1) / MpFloat(as));
  herm[0] = Cx<MpFloat>(MpFloat(1));
  if (dim > 1) herm[1] = arg * Cx<MpFloat>(MpFloat(2));
  for (int k = 2; k < dim; ++k)
    herm[k] = arg * Cx<MpFloat>(MpFloat(2)) * herm[k - 1] -
              Cx<MpFloat>(MpFloat(2 * (k - 1))) * herm[k - 2];

  const MpFloat s13 = pow(MpFloat(as), MpFloat(1) / 3);
  const Cx<MpFloat> minus2i_over_s13(MpFloat(0), MpFloat(-2) / s13);
  const MpFloat pref_scalar = 2 * sqrt(boost::math::constants::pi<MpFloat>()) / s13 *
                              exp(MpFloat(2) / (3 * MpFloat(as) * MpFloat(as)));

  // Tables: powers of (-2i/s^{1/3}), binomials, sqrt factorials, 2^{k/2}.
  std::vector<Cx<MpFloat>> zpow(lmax + 1);
  zpow[0] = Cx<MpFloat>(MpFloat(1));
  for (unsigned d = 1; d <= lmax; ++d) zpow[d] = zpow[d - 1] * minus2i_over_s13;
  std::vector<std::vector<MpFloat>> binom(dim);
  for (int m = 0; m < dim; ++m) {
    binom[m].resize(m + 1);
    for (int k = 0; k <= m; ++k) binom[m][k] = MpFloat(binomial(m, k));
  }
  std::vector<MpFloat> sqf(dim), pow2h(2 * dim);
  for (int m = 0; m < dim; ++m) sqf[m] = mp_sqrt_factorial(m);
  const MpFloat sqrt2 = sqrt(MpFloat(2));
  pow2h[0] = 1;
  for (int d = 1; d < 2 * dim; ++d) pow2h[d] = pow2h[d - 1] * sqrt2;

  CubicMatrix out;
  out.u = CMat::Zero(dim, dim);
  double max_err = 0;
  Cx<MpFloat> w, tmp;
  for (int m = 0; m < dim; ++m)
    for (int n = m; n < dim; ++n) {
      Cx<MpFloat> sum{MpFloat(0)};
      MpFloat err = 0;
      for (int k = 0; k <= m; ++k)
        for (int l = 0; l <= n; ++l) {
          const unsigned d = unsigned(m + n - k - l);
          w = herm[k] * herm[l] * zpow[d];
          w.re *= binom[m][k] * binom[n][l];
          w.im *= binom[m][k] * binom[n][l];
          err += sqrt(w.norm2()) * ai[d].error_bound;
          w.re *= ai[d].value;
          w.im *= ai[d].value;
          sum += w;
        }
      const MpFloat norm = pref_scalar / (pow2h[m + n] * sqf[m] * sqf[n]);
      Cx<MpFloat> val = sum;
      val *= norm;
      const cd entry = to_cd(CoeffFloat(val.re, val.im));
      out.u(m, n) = entry;
      out.u(n, m) = entry;  // X^3 is symmetric in the Fock basis
      max_err = std::max(max_err, (err * norm).convert_to<double>());
    }
  // s < 0 is the complex conjugate gate.
  if (s < 0) out.u = out.u.conjugate();
  out.entry_error = max_err;
  out.leak_bound = column_leak(out.u, cutoff / 2);
  return out;
}

GateMatrix sum_gate_matrix(int cutoff, int pad) {
  // In truncated bases the Fourier diagonal F satisfies F X F^dag = P
  // exactly, so X (x) P = (I (x) F)(X (x) X)(I (x) F)^dag and the product
  // structure of X (x) X reduces everything to one single-mode eigensolve:
  //   exp(-i X (x) P) = sum_q v_q v_q^T (x) [F V diag_r exp(-i l_q l_r) V^T F^dag].
  const int big = cutoff + 1 + pad;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(big, big);
  for (int n = 1; n < big; ++n) x(n - 1, n) = x(n, n - 1) = std::sqrt(0.5 * n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x);
  const Eigen::MatrixXd& v = es.eigenvectors();
  const Eigen::VectorXd& lam = es.eigenvalues();

  CVec fock_phase(big);
  const cd w8 = std::exp(cd(0, M_PI / 4));
  cd in(1, 0);
  for (int n = 0; n < big; ++n) {
    fock_phase(n) = w8 * in;
    in *= cd(0, 1);
  }

  const int dim = cutoff + 1;
  CMat u = CMat::Zero(dim * dim, dim * dim);
  CMat gq(big, big), hq(dim, dim);
  for (int q = 0; q < big; ++q) {
    CVec phase(big);
    for (int r = 0; r < big; ++r) phase(r) = std::exp(cd(0, -lam(q) * lam(r)));
    gq = v.cast<cd>() * phase.asDiagonal() * v.transpose().cast<cd>();
    for (int b = 0; b < dim; ++b)
      for (int b2 = 0; b2 < dim; ++b2)
        hq(b, b2) = fock_phase(b) * gq(b, b2) * std::conj(fock_phase(b2));
    for (int a = 0; a < dim; ++a) {
      if (v(a, q) == 0) continue;
      for (int a2 = 0; a2 < dim; ++a2) {
        const double vv = v(a, q) * v(a2, q);
        if (vv == 0) continue;
        u.block(a * dim, a2 * dim, dim, dim) += vv * hq;
      }
    }
  }
  return {u, column_leak(u, (cutoff / 2) * dim)};
}

namespace {

// sigma_x_bar = (I - adag a) a + h.c.: tridiagonal with (n, n+1) entry
// (1 - n) sqrt(n+1); the {0,1} block decouples exactly.
CMat sigma_x_generator(int dim) {
  CMat g = CMat::Zero(dim, dim);
  for (int n = 0; n + 1 < dim; ++n) g(n, n + 1) = g(n + 1, n) = (1.0 - n) * std::sqrt(n + 1.0);
  return g;
}

CVec apply_single_mode(const FockBasis& basis, const CVec& in, const CMat& u, int mode) {
  CVec out = CVec::Zero(basis.dim());
  for (int i = 0; i < basis.dim(); ++i) {
    MultiIndex m = basis.state(i);
    const int mi = m[mode];
    const int rest = int(m.total()) - mi;
    cd acc = 0;
    for (int v = 0; v + rest <= basis.cutoff(); ++v) {
      const cd w = u(mi, v);
      if (w == cd(0)) continue;
      m[mode] = v;
      acc += w * in(basis.index(m));
    }
    out(i) = acc;
  }
  return out;
}

CVec apply_two_mode(const FockBasis& basis, const CVec& in, const CMat& u, int mj, int mk) {
  const int dim1 = basis.cutoff() + 1;
  CVec out = CVec::Zero(basis.dim());
  for (int i = 0; i < basis.dim(); ++i) {
    MultiIndex m = basis.state(i);
    const int a = m[mj], b = m[mk];
    const int rest = int(m.total()) - a - b;
    cd acc = 0;
    for (int a2 = 0; a2 + rest <= basis.cutoff(); ++a2)
      for (int b2 = 0; a2 + b2 + rest <= basis.cutoff(); ++b2) {
        const cd w = u(a * dim1 + b, a2 * dim1 + b2);
        if (w == cd(0)) continue;
        m[mj] = a2;
        m[mk] = b2;
        acc += w * in(basis.index(m));
      }
    out(i) = acc;
  }
  return out;
}

CMat poly_ham_matrix(const FockBasis& basis, const PolyExact& h) {
  PolyExact lad = h.basis() == Basis::Ladder
                      ? h
                      : xp_to_ladder(h.basis() == Basis::XP ? h : from_anticommutator(h));
  CMat m = CMat::Zero(basis.dim(), basis.dim());
  for (const auto& [k, c] : lad.terms()) {
    const cd coeff = to_cd(c);
    for (int i = 0; i < basis.dim(); ++i) {
      const MultiIndex& st = basis.state(i);
      double w = 1;
      bool dead = false;
      MultiIndex dst = st;
      for (size_t q = 0; q < st.modes() && !dead; ++q) {
        if (k.mu[q] > st[q]) {
          dead = true;
          break;
        }
        const unsigned after_a = st[q] - k.mu[q];
        w *= std::sqrt(double(falling_factorial(st[q], k.mu[q]).convert_to<double>()));
        w *= std::sqrt(double(falling_factorial(after_a + k.nu[q], k.nu[q]).convert_to<double>()));
        dst[q] = after_a + k.nu[q];
      }
      if (dead) continue;
      const int j = basis.index(dst);
      if (j >= 0) m(j, i) += coeff * w;
    }
  }
  return m;
}

}  // namespace

namespace {

// Builds are expensive (MPFR series, eigensolves); memoize by gate identity.
const GateMatrix& cached_gate(int tag, double p1, double p2, int cutoff,
                              const std::function<GateMatrix()>& build) {
  struct Key {
    int tag;
    uint64_t p1, p2;
    int cutoff;
    auto operator<=>(const Key&) const = default;
  };
  static std::mutex mu;
  static std::map<Key, GateMatrix> cache;
  uint64_t b1, b2;
  std::memcpy(&b1, &p1, 8);
  std::memcpy(&b2, &p2, 8);
  const Key key{tag, b1, b2, cutoff};
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) {
    if (cache.size() > 256) cache.clear();
    it = cache.emplace(key, build()).first;
  }
  return it->second;
}

}  // namespace

FockVector apply_gate(const FockVector& psi, const BosonGate& g) {
  const FockBasis& basis = *psi.basis;
  const int cutoff = basis.cutoff();
  FockVector out = psi;
  const double e_before = psi.mean_particle_number();
  double leak = 0;

  using K = BosonGate::Kind;
  switch (g.kind) {
    case K::Rotation: {
      auto gm = rotation_matrix(g.param, cutoff);
      out.amp = apply_single_mode(basis, psi.amp, gm.u, g.mode);
      break;
    }
    case K::Displacement: {
      const auto& gm = cached_gate(0, g.alpha.real(), g.alpha.imag(), cutoff, [&] {
        return displacement_matrix(g.alpha, cutoff);
      });
      out.amp = apply_single_mode(basis, psi.amp, gm.u, g.mode);
      leak = gm.leak_bound;
      break;
    }
    case K::Squeezing: {
      const auto& gm = cached_gate(1, g.param, 0, cutoff,
                                   [&] { return squeezing_matrix(g.param, cutoff); });
      out.amp = apply_single_mode(basis, psi.amp, gm.u, g.mode);
      leak = gm.leak_bound;
      break;
    }
    case K::Shear: {
      const auto& gm =
          cached_gate(2, g.param, 0, cutoff, [&] { return shear_matrix(g.param, cutoff); });
      out.amp = apply_single_mode(basis, psi.amp, gm.u, g.mode);
      leak = gm.leak_bound;
      break;
    }
    case K::LinearPhase: {
      // exp(i t X) = D(i t / sqrt(2))
      const cd al(0, g.param / std::sqrt(2.0));
      const auto& gm =
          cached_gate(0, al.real(), al.imag(), cutoff, [&] { return displacement_matrix(al, cutoff); });
      out.amp = apply_single_mode(basis, psi.amp, gm.u, g.mode);
      leak = gm.leak_bound;
      break;
    }
    case K::Fourier: {
      auto gm = fourier_matrix(cutoff);
      out.amp = apply_single_mode(basis, psi.amp, gm.u, g.mode);
      break;
    }
    case K::Cubic: {
      if (g.param == 0) break;
      const auto& gm = cached_gate(3, g.param, 0, cutoff, [&] {
        CubicMatrix cm = cubic_matrix(g.param, cutoff);
        return GateMatrix{cm.u, cm.leak_bound};
      });
      out.amp = apply_single_mode(basis, psi.amp, gm.u, g.mode);
      leak = gm.leak_bound;
      break;
    }
    case K::Sum: {
      const auto& gm = cached_gate(4, 0, 0, cutoff, [&] { return sum_gate_matrix(cutoff); });
      out.amp = apply_two_mode(basis, psi.amp, gm.u, g.mode, g.mode2);
      leak = gm.leak_bound;
      break;
    }
    case K::PolyHam: {
      CMat hm = poly_ham_matrix(basis, *g.ham);
      if ((hm - hm.adjoint()).norm() > 1e-9 * (1 + hm.norm()))
        throw std::invalid_argument("apply_gate: PolyHam must be Hermitian");
      CMat u = hermitian_phase_exp((hm + hm.adjoint()) / 2.0, g.time);
      out.amp = u * psi.amp;
      leak = 1e-12;
      break;
    }
    case K::SigmaX: {
      CMat u = hermitian_phase_exp(sigma_x_generator(cutoff + 1), g.param);
      out.amp = apply_single_mode(basis, psi.amp, u, g.mode);
      break;
    }
    case K::SigmaZ: {
      CMat u = CMat::Zero(cutoff + 1, cutoff + 1);
      for (int n = 0; n <= cutoff; ++n) u(n, n) = std::exp(cd(0, g.param * (1.0 - 2.0 * n)));
      out.amp = apply_single_mode(basis, psi.amp, u, g.mode);
      break;
    }
    case K::SigmaZZ: {
      // diagonal in the joint number basis: phase exp(i theta (1-2a)(1-2b))
      out.amp = psi.amp;
      for (int i = 0; i < basis.dim(); ++i) {
        const MultiIndex& m = basis.state(i);
        const double z = (1.0 - 2.0 * m[g.mode]) * (1.0 - 2.0 * m[g.mode2]);
        out.amp(i) *= std::exp(cd(0, g.param * z));
      }
      break;
    }
  }

  using KK = BosonGate::Kind;
  const bool number_conserving = g.kind == KK::Rotation || g.kind == KK::Fourier ||
                                 g.kind == KK::SigmaZ || g.kind == KK::SigmaZZ;
  if (number_conserving) {
    out.err_bound = psi.err_bound + 1e-15;  // exact restriction, no truncation loss
  } else {
    const double e_after = out.mean_particle_number();
    const double step = std::sqrt(2.0 * std::max(e_before, e_after) / std::max(cutoff, 1));
    out.err_bound = psi.err_bound + std::max(step, leak);
  }
  return out;
}

RunResult run_circuit_fock(const BosonCircuit& c, int cutoff) {
  c.validate();
  RunResult r;
  r.state = FockVector::vacuum(c.n_modes, cutoff);
  if (!c.input_bits.empty())
    for (int i = 0; i < c.n_modes; ++i)
      if (c.input_bits[i]) r.state = apply_gate(r.state, BosonGate::displacement(1.0, i));
  r.step_energies.push_back(r.state.mean_particle_number());
  for (const auto& g : c.gates) {
    r.state = apply_gate(r.state, g);
    r.step_energies.push_back(r.state.mean_particle_number());
  }
  r.max_energy = *std::max_element(r.step_energies.begin(), r.step_energies.end());
  return r;
}

double cutoff_error(int gate_count, double energy_star, int cutoff) {
  if (cutoff <= 0) throw std::invalid_argument("cutoff_error: cutoff must be positive");
  return gate_count * std::sqrt(2.0 * energy_star / cutoff);
}

CutoffChoice choose_cutoff(const BosonCircuit& c, double eps, int max_cutoff) {
  if (!(eps > 0) || eps >= 1) throw std::invalid_argument("choose_cutoff: eps in (0,1)");
  const int gate_count = int(c.gates.size()) + int(c.input_bits.size());
  for (int e = 8; e <= max_cutoff; e *= 2) {
    RunResult big = run_circuit_fock(c, 2 * e);
    const double estar = big.max_energy;
    const double certified = cutoff_error(gate_count, estar, e);
    if (certified > eps) continue;
    RunResult small = run_circuit_fock(c, e);
    auto pb = number_distribution(big.state, 0);
    auto ps = number_distribution(small.state, 0);
    double tv = 0;
    for (size_t v = 0; v < pb.size(); ++v)
      tv += std::abs(pb[v] - (v < ps.size() ? ps[v] : 0.0));
    tv /= 2;
    if (tv < eps / 4) return {e, certified, estar};
  }
  throw BudgetExceeded("choose_cutoff: cutoff cap exceeded");
}

namespace {

CMat gate_sector_matrix(const FockBasis& basis, const BosonGate& g) {
  CMat u(basis.dim(), basis.dim());
  FockVector probe;
  probe.basis = shared_basis(basis.n_modes(), basis.cutoff());
  for (int j = 0; j < basis.dim(); ++j) {
    probe.amp = CVec::Zero(basis.dim());
    probe.amp(j) = 1.0;
    probe.err_bound = 0;
    u.col(j) = apply_gate(probe, g).amp;
  }
  return u;
}

}  // namespace

cd amplitude_feynman(const BosonCircuit& c, const MultiIndex& out, const MultiIndex& in,
                     int cutoff, size_t path_budget) {
  c.validate();
  auto basis = shared_basis(c.n_modes, cutoff);
  const int t_count = int(c.gates.size());
  if (t_count == 0) return out == in ? cd(1) : cd(0);

  double paths = 1;
  for (int t = 1; t < t_count; ++t) paths *= basis->dim();
  if (paths > double(path_budget))
    throw BudgetExceeded("amplitude_feynman: path count above the work budget");

  std::vector<CMat> us;
  us.reserve(t_count);
  for (const auto& g : c.gates) us.push_back(gate_sector_matrix(*basis, g));

  const int i0 = basis->index(in), i1 = basis->index(out);
  if (i0 < 0 || i1 < 0) throw std::invalid_argument("amplitude_feynman: state outside sector");

  // Explicit sum over intermediate configurations n_1..n_{T-1}.
  std::vector<int> path(t_count + 1);
  path[0] = i0;
  path[t_count] = i1;
  cd total = 0;
  std::vector<int> idx(std::max(t_count - 1, 0), 0);
  for (;;) {
    for (int t = 1; t < t_count; ++t) path[t] = idx[t - 1];
    cd w = 1;
    for (int t = 0; t < t_count && w != cd(0); ++t) w *= us[t](path[t + 1], path[t]);
    total += w;
    int t = 0;
    for (; t < t_count - 1; ++t) {
      if (++idx[t] < basis->dim()) break;
      idx[t] = 0;
    }
    if (t_count == 1 || t == t_count - 1) break;
  }
  return total;
}

std::vector<double> number_distribution(const FockVector& psi, int mode) {
  const FockBasis& basis = *psi.basis;
  std::vector<double> p(basis.cutoff() + 1, 0.0);
  for (int i = 0; i < basis.dim(); ++i) p[basis.state(i)[mode]] += std::norm(psi.amp(i));
  return p;
}

CvbqpAnswer decide_cvbqp(const FockVector& psi, double a, double b, double window, int mode) {
  const auto p = number_distribution(psi, mode);
  double accept_mass = 0, reject_mass = 0;
  for (size_t v = 0; v < p.size(); ++v) {
    const double outcome = double(v);
    if (outcome >= b && outcome <= b + window) accept_mass += p[v];
    if (outcome >= a - window && outcome <= a) reject_mass += p[v];
  }
  if (accept_mass > 2.0 / 3.0) return CvbqpAnswer::Accept;
  if (reject_mass > 2.0 / 3.0) return CvbqpAnswer::Reject;
  throw PromiseViolated("decide_cvbqp: neither acceptance mass reaches 2/3");
}

QubitExtraction extract_qubit_sector(const FockVector& psi) {
  const FockBasis& basis = *psi.basis;
  const int n = basis.n_modes();
  QubitExtraction q;
  q.qubit_amplitudes = CVec::Zero(1 << n);
  double sector = 0;
  for (int i = 0; i < basis.dim(); ++i) {
    const MultiIndex& m = basis.state(i);
    bool binary = true;
    int code = 0;
    for (int j = 0; j < n; ++j) {
      if (m[j] > 1) {
        binary = false;
        break;
      }
      code |= int(m[j]) << j;
    }
    if (binary) {
      q.qubit_amplitudes(code) = psi.amp(i);
      sector += std::norm(psi.amp(i));
    }
  }
  const double total = psi.amp.squaredNorm();
  q.sector_leak = std::max(0.0, total - sector);
  return q;
}

}  // namespace qumode
