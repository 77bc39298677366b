#pragma once

// Brute-force reference computation of Morse indices: restrict the quadratic
// cost of an LQ problem to piecewise-constant controls with exactly propagated
// states, project onto the boundary constraints and count negative
// eigenvalues. Restriction to a subspace cannot create negative directions,
// so counts are certified lower bounds that increase monotonically under mesh
// refinement; stabilized counts are the reference index.

#include "symidx/graph.hpp"
#include "symidx/jacobi.hpp"

namespace symidx {

/// Per-edge LQ problems (each on [0, 1], already length-scaled) together with
/// separated boundary data: the admissible subspaces of the start and end
/// state products, as spanning columns (0 columns = fully fixed).
struct SeparatedLQProblem {
  std::vector<LQEdgeData> edges;
  Mat N0, N1;  // (sum of n_e) rows each

  Index state_rows() const;
  void validate() const;
};

struct OracleOptions {
  Index initial_mesh = 16;
  Index max_mesh = 1024;
  double gap = 1e-8;        // relative kernel band around zero
  Index min_substeps = 8;   // RK4 substeps per mesh cell (lower bound)
  Index min_fine_steps = 2048;  // RK4 substeps per edge (lower bound)
};

struct DiscretizedHessian {
  Index mesh = 0;
  Index variables = 0;   // boundary parameters + control coefficients
  Mat Q;                 // quadratic form restricted to the feasible subspace
  Vec eigenvalues;       // ascending
  int index_neg = 0;     // eigenvalues below -gap * spectral_radius
  Index kernel_dim = 0;  // |eigenvalue| within the band
  bool band_clean = true;  // no eigenvalue in the ambiguous (-gap*r, -0) band
};

DiscretizedHessian assemble_hessian(const SeparatedLQProblem& problem, Index mesh,
                                    const OracleOptions& opts = {},
                                    const Tolerances& tol = default_tols());

struct OracleResult {
  int index = 0;
  Index kernel_dim = 0;
  Index mesh = 0;             // mesh that stabilized the count
  std::vector<int> history;   // negative count at each mesh tried
};

/// Doubles the mesh until two consecutive meshes agree on the negative count
/// (and the kernel count) with a clean classification band; throws
/// stabilization_error when the cap is reached without agreement.
OracleResult oracle_index(const SeparatedLQProblem& problem,
                          const OracleOptions& opts = {},
                          const Tolerances& tol = default_tols());

/// True if every vertex is incident only to edge sources or only to edge
/// targets (loops make their vertex both, hence non-separable).
bool is_separable(const MetricGraph& g);

/// Separated formulation of a graph problem whose vertices are all pure
/// sources or pure targets. `edge_data[e]` is the LQ problem of edge e
/// reparametrized to unit time.
SeparatedLQProblem direct_separated_problem(const MetricGraph& g, Index n,
                                            const std::vector<LQEdgeData>& edge_data,
                                            const BoundaryCondition& bc);

/// Separated formulation of an arbitrary graph problem: each edge state is
/// doubled with a frozen copy (q, x) with q' = 0, the start condition ties
/// q(0) = x(0), and the original vertex identifications become conditions on
/// (q(1), x(1)) = (x(0), x(1)) alone.
SeparatedLQProblem doubled_problem(const MetricGraph& g, Index n,
                                   const std::vector<LQEdgeData>& edge_data,
                                   const BoundaryCondition& bc);

/// Reference Morse index of a graph problem (doubling route).
OracleResult graph_oracle_index(const MetricGraph& g, Index n,
                                const std::vector<LQEdgeData>& edge_data,
                                const BoundaryCondition& bc,
                                const OracleOptions& opts = {},
                                const Tolerances& tol = default_tols());

}  // namespace symidx
