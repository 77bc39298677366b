#pragma once

// Index theorems: boundary-comparison difference, interval splitting and
// discretization bounds, iteration formulas for periodic extremals, the
// circle index function, and vertex-by-vertex filtration on graphs.

#include "symidx/core.hpp"
#include "symidx/graph.hpp"
#include "symidx/jacobi.hpp"
#include "symidx/maslov.hpp"

namespace symidx {

// ---------------------------------------------------------------------------
// Comparison of two boundary conditions along a common flow.

struct ComparisonInput {
  SymplecticSpace space;  // signed double space of the edge product
  Frame AN, ANt, Gamma;   // annihilators of N, N-tilde and the flow graph
  Mat TN, TNt;            // boundary frames in the base product (dimensions)
};

struct ComparisonResult {
  int difference = 0;   // index(Q_{N-tilde}) - index(Q_N)
  int maslov_index = 0; // i(A(N), Gamma, A(N-tilde))
  Index k0 = 0;         // dim(A(N) ∩ Gamma) - dim(A(N) ∩ Gamma ∩ A(N-tilde))
  Index dim_TN = 0;
  Index dim_common = 0; // dim(TN ∩ TN-tilde)
  MaslovResult maslov;
};

ComparisonResult comparison_index_difference(const ComparisonInput& in,
                                             const Tolerances& tol = default_tols());

/// Assemble the comparison input from graph data and evaluate it.
ComparisonResult graph_comparison(const MetricGraph& g, Index n,
                                  const std::vector<Mat>& theta_per_edge,
                                  const BoundaryCondition& N, const BoundaryCondition& Nt,
                                  const Tolerances& tol = default_tols());

// ---------------------------------------------------------------------------
// Splitting a fixed-endpoint problem at an interior instant:
//   index(Q) = index(Q_1) + index(Q_2) + maslov_index + k.

struct SplitCorrection {
  int maslov_index = 0;  // i(Theta_2^{-1} Pi, Pi, Theta_1 Pi)
  Index k = 0;           // kernel bookkeeping of the junction
};

SplitCorrection split_index_correction(Index n, const Mat& Theta1, const Mat& Theta2,
                                       const Tolerances& tol = default_tols());

// ---------------------------------------------------------------------------
// Discretization: a lower bound for the fixed-endpoint index from a partition.

struct DiscretizationResult {
  int lower_bound = 0;
  bool exact = false;  // conservative certificate, sufficient but not necessary
  std::vector<int> terms;               // junction triple indices (j = 1..N-1)
  std::vector<Index> kernel_corrections;  // junction corrections (count_kernel)
  bool count_kernel = false;
};

/// Sum of junction triple indices over the partition. With `count_kernel` the
/// junction kernel corrections are added, which tolerates partition points
/// that are conjugate instants.
DiscretizationResult discretization_index(const LinearHamiltonianSystem& sys,
                                          const std::vector<double>& partition,
                                          bool count_kernel = false,
                                          const Tolerances& tol = default_tols());

// ---------------------------------------------------------------------------
// Iteration of a periodic extremal with monodromy Theta:
// both forms compute index(Q_{gamma^k}) - k * index(Q_gamma).

struct IterationResult {
  long long total = 0;
  std::vector<long long> terms;
};

/// Real form: sum over j = 2..k of
///   i(Gamma(Theta^{j-1}), A(Delta), Gamma(Theta^j)) - n + dim ker(Theta^{j-1} - 1).
IterationResult iteration_index_I(const Mat& Theta, int k,
                                  const Tolerances& tol = default_tols());

/// Hermitian form: sum over j = 1..k-1 of
///   n - dim_C ker(Theta - omega^j) - i_C(Gamma(Theta), A(Delta), Gamma(omega^j Theta)).
/// omega defaults to exp(2 pi i / k); any unit-modulus primitive value with
/// omega^j != 1 for 0 < j < k is accepted.
IterationResult iteration_index_II(const Mat& Theta, int k, cplx omega = cplx(0, 0),
                                   const Tolerances& tol = default_tols());

// ---------------------------------------------------------------------------
// Circle index function z -> i(Gamma(Theta), A(Delta), Gamma(z Theta)).

/// The Hermitian matrix M_z = J ((conj(z) + 1) I - conj(z) Theta - Theta^{-1})
/// / (1 - conj(z)); its negative inertia is the circle index.
CMat circle_matrix(const Mat& Theta, cplx z, const Tolerances& tol = default_tols());

int circle_index(const Mat& Theta, cplx z, const Tolerances& tol = default_tols());

struct CircleSample {
  double angle = 0.0;  // z = exp(i angle), angle in (0, 2 pi)
  int index = 0;
};

std::vector<CircleSample> circle_sweep(const Mat& Theta, int samples = 1024,
                                       const Tolerances& tol = default_tols());

struct CircleJump {
  double angle = 0.0;  // located to ~1e-9
  int before = 0, after = 0;
};

/// Jump locations of the circle index inside (0, 2 pi), refined by bisection.
std::vector<CircleJump> circle_jumps(const Mat& Theta, int samples = 1024,
                                     const Tolerances& tol = default_tols());

// ---------------------------------------------------------------------------
// Filtration: activate vertices one at a time, reducing by the part of the
// annihilator supported away from the active star; contributions sum to the
// comparison difference between the all-fixed and the full boundary problem.

struct FiltrationStep {
  Index vertex = 0;
  int contribution = 0;
  Index reduced_dim = 0;  // ambient dimension after reduction
};

struct FiltrationResult {
  std::vector<FiltrationStep> steps;
  int total = 0;
};

FiltrationResult filtration_contributions(const MetricGraph& g, Index n,
                                          const std::vector<Mat>& theta_per_edge,
                                          const std::vector<Mat>& vertex_frames,
                                          const std::vector<Index>& order,
                                          const Tolerances& tol = default_tols());

}  // namespace symidx
