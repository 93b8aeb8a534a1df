#include "doctest.h"

#include <random>

#include "qumode/reductions.hpp"

using namespace qumode;

namespace {

std::mt19937 rng(0xbead);

GaussianCircuit random_circuit(int n_modes, int gate_count, double coeff_cap = 1.0) {
  std::uniform_real_distribution<double> coeff(-coeff_cap, coeff_cap);
  std::uniform_real_distribution<double> time(0.2, 1.2);
  GaussianCircuit c;
  c.n_modes = n_modes;
  for (int g = 0; g < gate_count; ++g) {
    QuadHamPhase h = QuadHamPhase::zero(n_modes);
    for (int i = 0; i < 2 * n_modes; ++i) {
      h.d(i) = coeff(rng);
      for (int j = i; j < 2 * n_modes; ++j) h.M(i, j) = h.M(j, i) = coeff(rng);
    }
    c.gates.push_back({h, time(rng)});
  }
  return c;
}

// Reference trajectory from the phase-space simulator at the system's grid.
std::vector<Vec> reference_trajectory(const GaussianCircuit& c,
                                      const std::vector<double>& times) {
  std::vector<Vec> out;
  GaussianState st = GaussianState::vacuum(c.n_modes);
  size_t ti = 0;
  double now = 0;
  out.push_back(st.mu);  // t = 0
  for (const auto& g : c.gates) {
    double seg_end = now + g.t;
    ++ti;
    while (ti < times.size() && times[ti] <= seg_end + 1e-9) {
      st = evolve(st, g.h, times[ti] - now);
      now = times[ti];
      out.push_back(st.mu);
      ++ti;
    }
    --ti;
    if (std::abs(now - seg_end) > 1e-9) {
      st = evolve(st, g.h, seg_end - now);
      now = seg_end;
    }
  }
  return out;
}

Mat random_antisym(int n) {
  std::uniform_real_distribution<double> coeff(-1, 1);
  Mat a = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      a(i, j) = coeff(rng);
      a(j, i) = -a(i, j);
    }
  return a;
}

// Random matrix with controlled condition number.
Mat random_conditioned(int n, double kappa_max) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat q1 = Mat::Random(n, n), q2 = Mat::Random(n, n);
  Mat orth1 = Eigen::HouseholderQR<Mat>(q1).householderQ();
  Mat orth2 = Eigen::HouseholderQR<Mat>(q2).householderQ();
  Vec s(n);
  for (int i = 0; i < n; ++i) s(i) = 1.0 + (kappa_max - 1.0) * u(rng);
  s(0) = 1.0;
  return orth1 * s.asDiagonal() * orth2.transpose();
}

}  // namespace

TEST_CASE("choose_parameters satisfies its contracts") {
  GaussianCircuit c = random_circuit(2, 3);
  OdeParameters p = choose_parameters(c, 1e-3);
  double max_m = 0, max_d = 0;
  for (const auto& g : c.gates) {
    max_m = std::max(max_m, Eigen::JacobiSVD<Mat>(g.h.M).singularValues().maxCoeff());
    max_d = std::max(max_d, g.h.d.norm());
  }
  CHECK(p.h * max_m <= 1.0 + 1e-12);
  // factorial condition
  const double tau = c.total_time();
  const double estar = energy_bound(c, 32);
  const double rhs = tau * std::exp(3.0) / (p.h * 1e-3) * (estar + tau * std::exp(2.0) * max_d);
  CHECK(std::lgamma(p.k + 2.0) >= std::log(rhs) - 1e-9);

  // single segment with |M| = 1 -> h <= 1
  GaussianCircuit simple;
  simple.n_modes = 1;
  QuadHamPhase h = QuadHamPhase::zero(1);
  h.M(0, 0) = 1.0;
  simple.gates.push_back({h, 1.0});
  CHECK(choose_parameters(simple, 1e-3).h <= 1.0);

  CHECK_THROWS_AS(choose_parameters(c, 0.0), std::invalid_argument);
}

TEST_CASE("taylor ladder inverse closed form") {
  Mat g = Mat::Random(4, 4);
  // (I - N1)^{-1} block (l+l', l) = l! g^{l'} / (l+l')!
  Mat b = taylor_ladder_inverse_block(g, 6, 2, 5);
  Mat expect = g * g * g / (3.0 * 4.0 * 5.0);
  CHECK((b - expect).norm() < 1e-12);
  CHECK(taylor_ladder_inverse_block(g, 6, 3, 2).norm() == 0.0);
}

TEST_CASE("encode/decode: pure displacement is exact") {
  GaussianCircuit c;
  c.n_modes = 1;
  QuadHamPhase h = QuadHamPhase::zero(1);
  h.d << 0.4, -0.3;
  c.gates.push_back({h, 2.0});
  OdeParameters p = choose_parameters(c, 1e-9);
  OdeLinearSystem sys = encode_linear_system(c, p);
  auto traj = decode_trajectory(sys);
  const Mat omega = symplectic_form(1);
  for (size_t j = 0; j < traj.size(); ++j) {
    Vec expect = sys.step_times[j] * (omega * h.d);
    CHECK((traj[j] - expect).norm() < 1e-12);
  }
}

TEST_CASE("encode/decode: harmonic oscillator matches the closed-form rotation") {
  GaussianCircuit c;
  c.n_modes = 1;
  QuadHamPhase h{Mat::Identity(2, 2), Vec::Zero(2)};
  h.d << 1.0, 0.0;
  c.gates.push_back({h, M_PI / 2});
  OdeParameters p = choose_parameters(c, 1e-6);
  OdeLinearSystem sys = encode_linear_system(c, p);
  auto traj = decode_trajectory(sys);
  auto ref = reference_trajectory(c, sys.step_times);
  REQUIRE(traj.size() == ref.size());
  for (size_t j = 0; j < traj.size(); ++j) CHECK((traj[j] - ref[j]).norm() < 1e-6);
}

TEST_CASE("round trip: decode matches evolve within requested eps") {
  for (int trial = 0; trial < 5; ++trial) {
    GaussianCircuit c = random_circuit(2, 2);
    const double eps = 1e-4;
    OdeParameters p = choose_parameters(c, eps);
    OdeLinearSystem sys = encode_linear_system(c, p);
    auto traj = decode_trajectory(sys);
    auto ref = reference_trajectory(c, sys.step_times);
    REQUIRE(traj.size() == ref.size());
    for (size_t j = 0; j < traj.size(); ++j) CHECK((traj[j] - ref[j]).norm() < eps);
  }
}

TEST_CASE("condition estimate stays under the declared bound") {
  for (int trial = 0; trial < 3; ++trial) {
    GaussianCircuit c = random_circuit(1, 2);
    OdeParameters p = choose_parameters(c, 1e-3);
    OdeLinearSystem sys = encode_linear_system(c, p);
    double kappa = condition_estimate(sys);
    CHECK(kappa >= 1.0);
    CHECK(kappa <= 50 * sys.kappa_bound);
  }
}

TEST_CASE("condition number grows with evolution time on displacement ramps") {
  std::vector<double> kappas;
  for (double tau : {1.0, 4.0, 8.0}) {
    GaussianCircuit c;
    c.n_modes = 1;
    QuadHamPhase h = QuadHamPhase::zero(1);
    h.M(0, 0) = 0.8;
    h.d << 0.0, 0.7;
    c.gates.push_back({h, tau});
    OdeParameters p = choose_parameters(c, 1e-3);
    kappas.push_back(condition_estimate(encode_linear_system(c, p)));
  }
  CHECK(kappas[1] > kappas[0]);
  CHECK(kappas[2] > kappas[1]);
}

TEST_CASE("size cap guard") {
  GaussianCircuit c = random_circuit(3, 3);
  OdeParameters p = choose_parameters(c, 1e-6);
  CHECK_THROWS_AS(encode_linear_system(c, p, /*max_unknowns=*/64), BudgetExceeded);
}

TEST_CASE("averaging lemma bound holds for random antisymmetric generators") {
  const double delta = 0.1;
  int trials_checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Mat a = random_antisym(6);
    Eigen::JacobiSVD<Mat> svd(a);
    const double smax = svd.singularValues().maxCoeff();
    const double smin = svd.singularValues().minCoeff();
    if (smin < 0.1) continue;
    const double eps = 1.0 / smax;
    const int chunks = int(std::ceil(4.0 * (smax / smin) / delta));
    CHECK(averaged_propagator_norm(a, eps, chunks) <= delta);
    ++trials_checked;
  }
  CHECK(trials_checked > 50);
}

TEST_CASE("invert_via_gaussian: rotation matrix") {
  Mat a(2, 2);
  a << 0, 1, -1, 0;
  // A^{-1} = [[0,-1],[1,0]]
  InversionJob job{a, 0, 1, 0.05, 1e6};
  InversionResult r = invert_via_gaussian(job);
  CHECK(std::abs(r.estimate - (-1.0)) <= 0.05);
  job.i = 1;
  job.j = 0;
  CHECK(std::abs(invert_via_gaussian(job).estimate - 1.0) <= 0.05);
}

TEST_CASE("invert_via_gaussian: diagonal matrix entries") {
  Mat b(2, 2);
  b << 2, 0, 0, 3;
  for (int i = 0; i < 2; ++i) {
    InversionJob job{b, i, i, 0.02, 1e6};
    InversionResult r = invert_via_gaussian(job);
    CHECK(std::abs(r.estimate - 1.0 / b(i, i)) <= 0.02 / b.inverse().norm() + 0.02);
  }
}

TEST_CASE("invert_via_gaussian: random well-conditioned matrices") {
  for (int trial = 0; trial < 5; ++trial) {
    Mat a = random_conditioned(4, 10.0);
    Mat ainv = a.inverse();
    const double delta = 0.02;
    const double scale = Eigen::JacobiSVD<Mat>(a).singularValues().minCoeff();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        InversionJob job{a, i, j, delta, 1e6};
        InversionResult r = invert_via_gaussian(job);
        CHECK(std::abs(r.estimate - ainv(i, j)) <= delta / scale + 1e-9);
      }
  }
}

TEST_CASE("invert_via_gaussian guards") {
  Mat a = Mat::Identity(2, 2);
  CHECK_THROWS_AS(invert_via_gaussian({a, 0, 0, -1.0, 1e6}), std::invalid_argument);
  InversionJob tight{random_conditioned(3, 40.0), 0, 0, 0.05, /*kappa_cap=*/2.0};
  CHECK_THROWS_AS(invert_via_gaussian(tight), SolverFailure);
}

TEST_CASE("energy envelope") {
  // d = 0 would give zero energy; with the unit drive the envelope holds.
  Mat rot(2, 2);
  rot << 0, 1, -1, 0;
  EnergyEnvelopeReport rep = verify_energy_envelope({rot, 0, 1, 0.05, 1e6});
  CHECK(rep.within_bound);
  CHECK(rep.max_observed <= rep.bound);

  // shrinking s_min grows the envelope roughly like 1/s_min^2
  Mat small = 0.25 * rot;
  EnergyEnvelopeReport rep2 = verify_energy_envelope({small, 0, 1, 0.05, 1e6});
  CHECK(rep2.max_observed > rep.max_observed);
  CHECK(rep2.within_bound);
}
