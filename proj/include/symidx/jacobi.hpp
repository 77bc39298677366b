#pragma once

// Linear Hamiltonian flows of LQ-type problems: building the Jacobi system
// from LQ data, integrating the fundamental solution with a symplectic
// Magnus scheme, and locating conjugate instants.

#include "symidx/core.hpp"

#include <functional>

namespace symidx {

/// Matrix-valued polynomial sum_k C_k s^k.
struct PolyMat {
  std::vector<Mat> coeffs;  // at least one term

  Mat eval(double s) const;
  Index rows() const { return coeffs.at(0).rows(); }
  Index cols() const { return coeffs.at(0).cols(); }
  PolyMat scaled(double a) const;
};

/// Piecewise-polynomial matrix on [t0, t1]; pieces are polynomials in the
/// local variable s = t - breakpoints[i], right-continuous at breakpoints.
struct PiecewiseMat {
  std::vector<double> breakpoints;  // strictly increasing, spans the domain
  std::vector<PolyMat> pieces;      // breakpoints.size() - 1 entries

  static PiecewiseMat constant(const Mat& M, double t0 = 0.0, double t1 = 1.0);
  Mat eval(double t) const;
  Index rows() const { return pieces.at(0).rows(); }
  Index cols() const { return pieces.at(0).cols(); }
  PiecewiseMat scaled(double a) const;
  void validate(const std::string& module) const;
};

/// Time-varying LQ data on [0, 1]: dynamics x' = A x + B u, cost integrand
/// (1/2)(x^T W x + 2 x^T S u + u^T R u), with R symmetric positive definite.
struct LQEdgeData {
  Index n = 0;  // state dimension
  Index m = 0;  // control dimension
  PiecewiseMat A, B, W, S, R;

  void validate() const;
  /// Edge-length reparametrization to unit time: every matrix scaled by l.
  LQEdgeData scaled(double l) const;
};

/// z' = J H(t) z with H(t) symmetric, on [t0, t1], coordinates z = (p, x).
struct LinearHamiltonianSystem {
  Index n = 0;
  double t0 = 0.0, t1 = 1.0;
  std::vector<double> breakpoints;  // smoothness breakpoints, incl. endpoints
  std::function<Mat(double)> H;
};

/// Hessian of the maximized Hamiltonian of an LQ problem:
///   H_pp = B R^{-1} B^T,  H_px = A - B R^{-1} S^T,
///   H_xx = -(W - S R^{-1} S^T).
/// Throws precondition_error if R fails the Legendre condition at sample
/// points of every smooth piece.
LinearHamiltonianSystem jacobi_from_lq(const LQEdgeData& lq);

struct FlowResult {
  Mat Theta;                                    // fundamental solution at t1
  std::vector<std::pair<double, Mat>> checkpoints;
  double symplectic_defect = 0.0;
};

/// Integrate the fundamental solution with a 4th-order Magnus scheme (exactly
/// symplectic steps); step counts per smooth piece are doubled until the
/// step-doubling error estimate meets `tol`.
FlowResult integrate_flow(const LinearHamiltonianSystem& sys,
                          const std::vector<double>& checkpoint_times = {},
                          double tol = 1e-12,
                          const Tolerances& tols = default_tols());

struct ConjugatePoint {
  double t = 0.0;
  Index multiplicity = 0;
  bool marginal = false;  // detection sat near the rank-decision threshold
};

/// Conjugate instants in (t0, t1]: times where Theta_t(Pi) meets Pi, located
/// by a sign-change / singular-value scan with bisection refinement.
std::vector<ConjugatePoint> conjugate_times(const LinearHamiltonianSystem& sys,
                                            double t_tol = 1e-9, int scan_points = 256,
                                            const Tolerances& tols = default_tols());

/// Fixed-endpoint Morse index: total multiplicity of conjugate instants in
/// the open interval (t0, t1). Optionally reports degeneracy at t1.
int conjugate_point_index(const LinearHamiltonianSystem& sys,
                          bool* final_degenerate = nullptr,
                          const Tolerances& tols = default_tols());

/// dim { eta in span(L_start) : Theta eta in span(L_end) }.
Index bvp_solution_dim(const Mat& Theta, const Mat& L_start, const Mat& L_end,
                       const Tolerances& tols = default_tols());

}  // namespace symidx
