#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace qumode {

/// Barrier-Newton minimizer for  tr(A X) + tr(B X^{-1})  over symmetric
/// X > I (A, B symmetric PSD). Log-barrier on X - I, Newton steps in the
/// vectorized symmetric space, initial X = 2I.
struct TraceProblemResult {
  Eigen::MatrixXd x;
  double objective = 0;
  double gap_estimate = 0;  // barrier mu * n at termination
  int newton_steps = 0;
};

TraceProblemResult minimize_trace_pair(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                       double tol = 1e-9, int max_newton = 400);

/// Feasibility / linear-objective SDP: find G >= 0 with tr(Ai G) = ci,
/// optionally minimizing tr(C G). Solved by barrier path-following on the
/// affine slice (null-space parametrization + logdet barrier). Returns
/// nullopt when the slice stays outside the cone.
struct GramConstraint {
  Eigen::MatrixXd a;  // symmetric coefficient matrix
  double c = 0;
};

std::optional<Eigen::MatrixXd> solve_gram_feasibility(
    int dim, const std::vector<GramConstraint>& cons, double psd_tol = 1e-9,
    const Eigen::MatrixXd* objective = nullptr);

/// Smallest eigenvalue of a dense symmetric matrix (convenience).
double symmetric_min_eig(const Eigen::MatrixXd& m);

}  // namespace qumode
