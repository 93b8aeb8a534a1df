#include "doctest.h"

#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "oracles.hpp"
#include "qumode/airy.hpp"
#include "qumode/fock.hpp"

using namespace qumode;
using oracle::Mat;

namespace {

std::mt19937 rng(0xf0c5);

// exp(i scale G) by exponentiating a double-cutoff generator and restricting.
CMat generator_exp_oracle(const Mat& gen_big, double scale, int keep) {
  Mat g = cd(0, scale) * gen_big;
  Mat u = g.exp();
  return u.topLeftCorner(keep, keep);
}

double restricted_diff(const CMat& a, const CMat& b, int keep) {
  return (a.topLeftCorner(keep, keep) - b.topLeftCorner(keep, keep)).cwiseAbs().maxCoeff();
}

BosonCircuit random_small_circuit(int n_modes, int gate_count, int max_cubic) {
  std::uniform_real_distribution<double> par(-0.6, 0.6);
  std::uniform_int_distribution<int> kind(0, 5);
  std::uniform_int_distribution<int> mode(0, n_modes - 1);
  BosonCircuit c;
  c.n_modes = n_modes;
  int cubics = 0;
  while (int(c.gates.size()) < gate_count) {
    switch (kind(rng)) {
      case 0: c.gates.push_back(BosonGate::rotation(par(rng), mode(rng))); break;
      case 1: c.gates.push_back(BosonGate::displacement(cd(par(rng), par(rng)), mode(rng))); break;
      case 2: c.gates.push_back(BosonGate::squeezing(0.5 * par(rng), mode(rng))); break;
      case 3: c.gates.push_back(BosonGate::shear(par(rng), mode(rng))); break;
      case 4: c.gates.push_back(BosonGate::fourier(mode(rng))); break;
      default:
        if (cubics < max_cubic) {
          c.gates.push_back(BosonGate::cubic(0.3 + 0.3 * std::abs(par(rng)), mode(rng)));
          ++cubics;
        }
        break;
    }
  }
  return c;
}

}  // namespace

TEST_CASE("airy series values") {
  const unsigned bits = 128;
  CHECK(airy_at_zero(bits).convert_to<double>() == doctest::Approx(0.3550280538878172).epsilon(1e-12));
  CHECK(airy_prime_at_zero(bits).convert_to<double>() ==
        doctest::Approx(-0.2588194037928068).epsilon(1e-12));

  // Ai at x = 1 against an independent ODE oracle (y'' = x y integrated by RK4).
  auto ode_airy = [](double target) {
    double y = 0.3550280538878172, yp = -0.2588194037928068;
    const int steps = 200000;
    const double h = target / steps;
    double x = 0;
    for (int i = 0; i < steps; ++i) {
      auto f = [](double xx, double yy, double) { return yy * xx; };
      double k1y = yp, k1p = f(x, y, yp);
      double k2y = yp + h / 2 * k1p, k2p = f(x + h / 2, y + h / 2 * k1y, 0);
      double k3y = yp + h / 2 * k2p, k3p = f(x + h / 2, y + h / 2 * k2y, 0);
      double k4y = yp + h * k3p, k4p = f(x + h, y + h * k3y, 0);
      y += h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y);
      yp += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
      x += h;
    }
    return y;
  };
  AiryValue a1 = airy_derivative(0, MpFloat(1), airy_valid_degree(0, 1.0), bits);
  const double ref = ode_airy(1.0);
  CHECK(std::abs(a1.value.convert_to<double>() - ref) <=
        std::max(1e-9, a1.error_bound.convert_to<double>()));

  // derivative identity Ai''(x) = x Ai(x)
  for (double x : {0.5, 2.0}) {
    AiryValue v0 = airy_derivative(0, MpFloat(x), airy_valid_degree(2, x), bits);
    AiryValue v2 = airy_derivative(2, MpFloat(x), airy_valid_degree(2, x), bits);
    CHECK(v2.value.convert_to<double>() ==
          doctest::Approx(x * v0.value.convert_to<double>()).epsilon(1e-10));
  }

  CHECK_THROWS_AS(airy_derivative(0, MpFloat(2), 10, bits), std::invalid_argument);
}

TEST_CASE("rotation matrix") {
  auto gm = rotation_matrix(0, 6);
  CHECK(gm.u.isIdentity(1e-15));
  auto pi_gate = rotation_matrix(M_PI, 6);
  CHECK(pi_gate.u(1, 1).real() == doctest::Approx(-1.0));
  auto quarter = rotation_matrix(M_PI / 2, 6);
  CHECK(quarter.u(0, 0) == cd(1, 0));
  CHECK(std::abs(quarter.u(1, 1) - cd(0, 1)) < 1e-14);
  CHECK(std::abs(quarter.u(2, 2) - cd(-1, 0)) < 1e-14);
}

TEST_CASE("displacement matrix closed form and oracle") {
  const cd alpha(0.4, -0.25);
  const int e = 14;
  auto gm = displacement_matrix(alpha, e);
  // <1|D|0> = alpha e^{-|a|^2/2}, <0|D|0> = e^{-|a|^2/2}
  const double damp = std::exp(-0.5 * std::norm(alpha));
  CHECK(std::abs(gm.u(1, 0) - alpha * damp) < 1e-12);
  CHECK(std::abs(gm.u(0, 0) - cd(damp, 0)) < 1e-13);

  // generator exponential at double cutoff
  const int big = 2 * e;
  Mat gen = cd(0, -1) * (alpha * oracle::ladder_adag(big) -
                         std::conj(alpha) * oracle::ladder_a(big));
  CMat ref = generator_exp_oracle(gen, 1.0, e + 1);
  CHECK(restricted_diff(gm.u, ref, e - 3) < 1e-8);
}

TEST_CASE("squeezing matrix closed form and oracle") {
  const double r = 0.35;
  const int e = 16;
  auto gm = squeezing_matrix(r, e);
  // <0|S|0> = 1/sqrt(cosh r), <1|S|0> = 0, <2|S|0> = -tanh(r) sqrt(2)/2 / sqrt(cosh r)
  CHECK(gm.u(0, 0).real() == doctest::Approx(1.0 / std::sqrt(std::cosh(r))));
  CHECK(std::abs(gm.u(1, 0)) < 1e-14);
  CHECK(gm.u(2, 0).real() ==
        doctest::Approx(-std::tanh(r) * std::sqrt(2.0) / 2.0 / std::sqrt(std::cosh(r))));

  const int big = 2 * e;
  Mat a = oracle::ladder_a(big), ad = oracle::ladder_adag(big);
  Mat gen = cd(0, -1) * 0.5 * r * (a * a - ad * ad);  // exp(r(a^2-ad^2)/2) = exp(i * (-i G))
  CMat ref = generator_exp_oracle(gen, 1.0, e + 1);
  CHECK(restricted_diff(gm.u, ref, e - 4) < 1e-8);
}

TEST_CASE("shear and fourier matrices vs generator oracle") {
  const int e = 12;
  auto sh = shear_matrix(0.4, e);
  Mat x = oracle::quad_x(3 * e);
  CMat ref = generator_exp_oracle(Mat(x * x), 0.4, e + 1);
  CHECK(restricted_diff(sh.u, ref, e - 4) < 1e-8);

  auto f = fourier_matrix(e);
  Mat n2 = oracle::quad_x(3 * e) * oracle::quad_x(3 * e) +
           oracle::quad_p(3 * e) * oracle::quad_p(3 * e);
  CMat ref_f = generator_exp_oracle(n2, M_PI / 4, e + 1);
  CHECK(restricted_diff(f.u, ref_f, e + 1) < 1e-10);
}

TEST_CASE("cubic matrix: vacuum amplitude matches the Airy closed form") {
  for (double s : {0.3, 1.0}) {
    auto cm = cubic_matrix(s, 6);
    // alpha_1(s) = 2 sqrt(pi) |y| e^{2 y^6/3} Ai(y^4), y = s^{-1/3}
    const double y = std::pow(s, -1.0 / 3.0);
    PrecisionGuard guard(512);
    MpFloat ys(y);
    MpFloat pref = 2 * sqrt(boost::math::constants::pi<MpFloat>()) * ys *
                   exp(2 * pow(ys, 6) / 3);
    AiryValue ai = airy_derivative(0, pow(ys, 4), airy_valid_degree(0, y * y * y * y), 512);
    const double expect = (pref * ai.value).convert_to<double>();
    CHECK(std::abs(cm.u(0, 0).real() - expect) < 1e-8);
    CHECK(std::abs(cm.u(0, 0).imag()) < 1e-8);
  }
}

TEST_CASE("cubic matrix vs exponentiated truncated generator") {
  const double s = 0.3;
  const int e = 10;
  auto cm = cubic_matrix(s, e);
  Mat x = oracle::quad_x(48);
  CMat ref = generator_exp_oracle(Mat(x * x * x), s / 3.0, e + 1);
  CHECK(restricted_diff(cm.u, ref, e - 4) < 1e-5);
  CHECK(cm.entry_error < 1e-10);

  // s -> 0 limit approaches the identity on the low sector
  auto tiny = cubic_matrix(1e-3, 4);
  CHECK(restricted_diff(tiny.u, CMat::Identity(5, 5), 3) < 5e-3);
}

TEST_CASE("sum gate matrix annihilates nothing it should not") {
  const int e = 6;
  auto gm = sum_gate_matrix(e);
  // oracle: dense generator exponential on the product space at cutoff 4e
  const int big = 4 * e;
  Mat x1 = oracle::quad_x(big), p1 = oracle::quad_p(big);
  Mat gen(big * big, big * big);
  for (int a = 0; a < big; ++a)
    for (int b = 0; b < big; ++b)
      for (int a2 = 0; a2 < big; ++a2)
        for (int b2 = 0; b2 < big; ++b2)
          gen(a * big + b, a2 * big + b2) = x1(a, a2) * p1(b, b2);
  Mat u_big = (cd(0, -1) * gen).exp();
  const int dim = e + 1;
  double worst = 0;
  for (int a = 0; a < dim - 2; ++a)
    for (int b = 0; b < dim - 2; ++b)
      for (int a2 = 0; a2 < dim - 2; ++a2)
        for (int b2 = 0; b2 < dim - 2; ++b2)
          worst = std::max(worst, std::abs(gm.u(a * dim + b, a2 * dim + b2) -
                                           u_big(a * big + b, a2 * big + b2)));
  CHECK(worst < 1e-6);
}

TEST_CASE("apply_gate basics") {
  FockVector vac = FockVector::vacuum(1, 12);
  // displacement then inverse returns to vacuum
  FockVector d1 = apply_gate(vac, BosonGate::displacement(cd(0.5, 0.2)));
  FockVector d2 = apply_gate(d1, BosonGate::displacement(cd(-0.5, -0.2)));
  MultiIndex zero{0};
  CHECK(std::abs(d2.amplitude(zero) - cd(1, 0)) < 1e-8);
  CHECK(d2.err_bound > 0);

  // identity-ish gate leaves the state alone
  FockVector r = apply_gate(vac, BosonGate::rotation(0.7));
  CHECK((r.amp - vac.amp).norm() < 1e-14);

  // SUM on vacuum: agree with the generator-exponential oracle applied to |00>
  FockVector vac2 = FockVector::vacuum(2, 8);
  FockVector summed = apply_gate(vac2, BosonGate::sum(0, 1));
  const int big = 16;
  Mat x1 = oracle::quad_x(big), p1 = oracle::quad_p(big);
  Mat gen(big * big, big * big);
  for (int a = 0; a < big; ++a)
    for (int b = 0; b < big; ++b)
      for (int a2 = 0; a2 < big; ++a2)
        for (int b2 = 0; b2 < big; ++b2)
          gen(a * big + b, a2 * big + b2) = x1(a, a2) * p1(b, b2);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(big * big);
  v(0) = 1;
  Eigen::VectorXcd ref = (cd(0, -1) * gen).exp() * v;
  for (uint32_t a = 0; a <= 4; ++a)
    for (uint32_t b = 0; a + b <= 4; ++b) {
      MultiIndex m{a, b};
      CHECK(std::abs(summed.amplitude(m) - ref(a * big + b)) < 1e-6);
    }
}

TEST_CASE("error certificate: cutoff doubling never beats the bound") {
  int violations = 0;
  for (int trial = 0; trial < 25; ++trial) {
    BosonCircuit c = random_small_circuit(trial % 2 ? 2 : 1, 4, 2);
    const int e = 12;
    RunResult lo = run_circuit_fock(c, e);
    RunResult hi = run_circuit_fock(c, 2 * e);
    // restrict the double-cutoff state and compare
    double diff2 = 0;
    for (int i = 0; i < lo.state.basis->dim(); ++i) {
      const cd a_lo = lo.state.amp(i);
      const cd a_hi = hi.state.amplitude(lo.state.basis->state(i));
      diff2 += std::norm(a_lo - a_hi);
    }
    // plus the weight the small run could not represent
    for (int i = 0; i < hi.state.basis->dim(); ++i)
      if (hi.state.basis->state(i).total() > uint32_t(e)) diff2 += std::norm(hi.state.amp(i));
    const double bound =
        cutoff_error(int(c.gates.size()), hi.max_energy, e);
    if (std::sqrt(diff2) > bound) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("cutoff_error closed form") {
  CHECK(cutoff_error(1, 2.0, 8) == doctest::Approx(std::sqrt(0.5)));
  CHECK(cutoff_error(3, 2.0, 16) == doctest::Approx(3 * std::sqrt(0.25)));
  CHECK(cutoff_error(3, 2.0, 32) ==
        doctest::Approx(cutoff_error(3, 2.0, 16) / std::sqrt(2.0)));
}

TEST_CASE("choose_cutoff finds a stable certified cutoff") {
  BosonCircuit c;
  c.n_modes = 1;
  c.gates.push_back(BosonGate::displacement(cd(0.7, 0)));
  c.gates.push_back(BosonGate::cubic(0.25));
  CutoffChoice choice = choose_cutoff(c, 0.7);
  CHECK(choice.certified_error <= 0.7);
  CHECK(choice.cutoff >= 8);

  BosonCircuit id;
  id.n_modes = 1;
  id.gates.push_back(BosonGate::rotation(0.3));
  CHECK(choose_cutoff(id, 0.2).cutoff == 8);

  CHECK_THROWS_AS(choose_cutoff(c, 1e-9, /*max_cutoff=*/16), BudgetExceeded);
}

TEST_CASE("feynman path amplitude equals the matrix product") {
  BosonCircuit c;
  c.n_modes = 1;
  c.gates.push_back(BosonGate::squeezing(0.3));
  c.gates.push_back(BosonGate::displacement(cd(0.4, 0.1)));
  const int e = 6;

  RunResult r = run_circuit_fock(c, e);
  for (uint32_t m = 0; m <= 3; ++m) {
    MultiIndex out{m}, in{0};
    const cd path_amp = amplitude_feynman(c, out, in, e);
    CHECK(std::abs(path_amp - r.state.amplitude(out)) < 1e-12);
  }

  // T = 1: single factor
  BosonCircuit one;
  one.n_modes = 1;
  one.gates.push_back(BosonGate::displacement(cd(0.3, 0)));
  auto gm = displacement_matrix(cd(0.3, 0), e);
  CHECK(std::abs(amplitude_feynman(one, MultiIndex{2}, MultiIndex{0}, e) - gm.u(2, 0)) <
        1e-13);

  // vacuum-to-vacuum identity
  BosonCircuit id;
  id.n_modes = 1;
  id.gates.push_back(BosonGate::rotation(0.0));
  CHECK(std::abs(amplitude_feynman(id, MultiIndex{0}, MultiIndex{0}, e) - cd(1, 0)) < 1e-14);

  CHECK_THROWS_AS(amplitude_feynman(c, MultiIndex{0}, MultiIndex{0}, e, /*budget=*/2),
                  BudgetExceeded);
}

TEST_CASE("number distribution and CVBQP decision") {
  FockVector vac = FockVector::vacuum(1, 10);
  auto p = number_distribution(vac, 0);
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(decide_cvbqp(vac, 0.0, 3.0, 1.0) == CvbqpAnswer::Reject);

  // coherent state |alpha|^2 = 4: Poisson-shaped marginal with mean 4
  FockVector coh = apply_gate(FockVector::vacuum(1, 40), BosonGate::displacement(cd(2, 0)));
  auto pc = number_distribution(coh, 0);
  double mean = 0;
  for (size_t v = 0; v < pc.size(); ++v) mean += double(v) * pc[v];
  CHECK(mean == doctest::Approx(4.0).epsilon(1e-6));
  const double poisson1 = std::exp(-4.0) * 4.0;
  CHECK(pc[1] == doctest::Approx(poisson1).epsilon(1e-6));

  CHECK_THROWS_AS(decide_cvbqp(coh, 0.0, 20.0, 0.5), PromiseViolated);
}

TEST_CASE("bqp embedding gates act on the qubit sector") {
  // e^{i pi/2 sigma_x_bar} |0> = i |1>
  FockVector v = apply_gate(FockVector::vacuum(1, 8), BosonGate::sigma_x(M_PI / 2));
  MultiIndex one{1};
  CHECK(std::abs(v.amplitude(one) - cd(0, 1)) < 1e-8);
  QubitExtraction q = extract_qubit_sector(v);
  CHECK(q.sector_leak < 1e-10);

  // e^{i theta sigma_z_bar} |0> is a pure phase
  FockVector z = apply_gate(FockVector::vacuum(1, 8), BosonGate::sigma_z(0.77));
  CHECK(std::abs(z.amplitude(MultiIndex{0}) - std::exp(cd(0, 0.77))) < 1e-12);

  // two-mode e^{i theta zz} on |00> gives phase e^{i theta}
  FockVector zz = apply_gate(FockVector::vacuum(2, 6), BosonGate::sigma_zz(0.31, 0, 1));
  CHECK(std::abs(zz.amplitude(MultiIndex{0, 0}) - std::exp(cd(0, 0.31))) < 1e-12);
}

TEST_CASE("bqp embedding matches a qubit reference simulator") {
  // 2-qubit circuit: X rotation, ZZ coupling, X rotation on the other mode.
  const double t1 = 0.6, t2 = 0.9, t3 = -0.4;
  BosonCircuit c;
  c.n_modes = 2;
  c.gates.push_back(BosonGate::sigma_x(t1, 0));
  c.gates.push_back(BosonGate::sigma_zz(t2, 0, 1));
  c.gates.push_back(BosonGate::sigma_x(t3, 1));
  RunResult r = run_circuit_fock(c, 10);
  QubitExtraction q = extract_qubit_sector(r.state);
  CHECK(q.sector_leak < 1e-6);

  // reference: 4x4 qubit simulation
  Eigen::Matrix2cd sx, sz, id2;
  sx << 0, 1, 1, 0;
  sz << 1, 0, 0, -1;
  id2.setIdentity();
  auto kron4 = [](const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    Eigen::Matrix4cd k;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return k;
  };
  // mode 0 is bit 0 (fast index in the extraction code ordering)
  Eigen::Matrix4cd u1 = (cd(0, t1) * kron4(id2, sx)).exp();
  Eigen::Matrix4cd u2 = (cd(0, t2) * kron4(sz, sz)).exp();
  Eigen::Matrix4cd u3 = (cd(0, t3) * kron4(sx, id2)).exp();
  Eigen::Vector4cd psi = Eigen::Vector4cd::Zero();
  psi(0) = 1;
  psi = u3 * u2 * u1 * psi;
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(std::norm(q.qubit_amplitudes(i)) - std::norm(psi(i))) < 1e-5);
  }
}
