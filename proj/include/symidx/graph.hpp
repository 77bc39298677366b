#pragma once

// Metric graphs, boundary conditions for products of edge problems, and the
// associated Lagrangian subspaces (annihilators, product flow graphs) of the
// signed double phase space.

#include "symidx/core.hpp"

namespace symidx {

struct MetricGraph {
  struct Edge {
    Index src = 0, tgt = 0;
    double length = 1.0;
  };
  Index num_vertices = 0;
  std::vector<Edge> edges;

  Index num_edges() const { return static_cast<Index>(edges.size()); }
  void validate() const;

  /// Copies of the boundary product owned by vertex v. Copy indexing: edge e
  /// contributes the source copy 2e and the target copy 2e + 1.
  std::vector<Index> copies_of_vertex(Index v) const;
  /// Edges incident to v (loops count once).
  std::vector<Index> edges_of_vertex(Index v) const;
};

struct BoundaryCondition {
  enum class Mode { per_vertex, general };
  Mode mode = Mode::per_vertex;
  std::vector<Mat> vertex_frames;  // per-vertex: n x d_v (d_v = 0 means fixed)
  Mat general_frame;               // general: (n * 2E) x d in copy order

  static BoundaryCondition per_vertex(std::vector<Mat> frames) {
    return BoundaryCondition{Mode::per_vertex, std::move(frames), Mat()};
  }
  static BoundaryCondition general(Mat frame) {
    return BoundaryCondition{Mode::general, {}, std::move(frame)};
  }
  /// All vertices fixed (d_v = 0 everywhere).
  static BoundaryCondition all_fixed(const MetricGraph& g, Index n);
  /// All vertices free (d_v = n everywhere).
  static BoundaryCondition all_free(const MetricGraph& g, Index n);
};

/// Signed double phase space of the edge product: one 2n-dimensional copy per
/// edge endpoint in copy order, source copies carrying -J and target copies
/// +J. Within a copy the covector block precedes the base block.
SymplecticSpace signed_double_space(Index n, Index num_edges);

/// Boundary subspace of the base product (R^n)^{2E} selected by the boundary
/// condition. Per-vertex data places each vertex basis vector simultaneously
/// into every copy owned by that vertex.
Mat pullback_boundary(const MetricGraph& g, Index n, const BoundaryCondition& bc);

/// Annihilator A(N) of a base-product subspace: base directions paired with
/// conormal covectors, source-copy covector components sign-flipped so the
/// result is Lagrangian for the signed form.
Frame annihilator(Index n, Index num_edges, const Mat& base_frame,
                  const Tolerances& tol = default_tols());

/// Graph of the product flow: span of (delta_j, Theta_e delta_j) over all
/// edges e and basis vectors delta_j of the edge phase space.
Frame product_flow_graph(Index n, const std::vector<Mat>& theta_per_edge,
                         const Tolerances& tol = default_tols());

// Coordinate bookkeeping for the copy layout.
inline Index signed_copy_offset(Index n, Index copy) { return 2 * n * copy; }
inline Index base_copy_offset(Index n, Index copy) { return n * copy; }

}  // namespace symidx
