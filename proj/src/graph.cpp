#include "symidx/graph.hpp"

#include <cmath>

namespace symidx {

void MetricGraph::validate() const {
  if (num_vertices <= 0) throw schema_error("graph", "graph needs at least one vertex");
  if (edges.empty()) throw schema_error("graph", "graph needs at least one edge");
  std::vector<bool> touched(static_cast<size_t>(num_vertices), false);
  for (const Edge& e : edges) {
    if (e.src < 0 || e.src >= num_vertices || e.tgt < 0 || e.tgt >= num_vertices)
      throw schema_error("graph", "edge endpoint out of range");
    if (!(e.length > 0.0) || !std::isfinite(e.length))
      throw schema_error("graph", "edge length must be finite and positive");
    touched[static_cast<size_t>(e.src)] = true;
    touched[static_cast<size_t>(e.tgt)] = true;
  }
  for (Index v = 0; v < num_vertices; ++v)
    if (!touched[static_cast<size_t>(v)])
      throw schema_error("graph", "isolated vertex " + std::to_string(v));
}

std::vector<Index> MetricGraph::copies_of_vertex(Index v) const {
  std::vector<Index> out;
  for (Index e = 0; e < num_edges(); ++e) {
    if (edges[static_cast<size_t>(e)].src == v) out.push_back(2 * e);
    if (edges[static_cast<size_t>(e)].tgt == v) out.push_back(2 * e + 1);
  }
  return out;
}

std::vector<Index> MetricGraph::edges_of_vertex(Index v) const {
  std::vector<Index> out;
  for (Index e = 0; e < num_edges(); ++e) {
    const Edge& ed = edges[static_cast<size_t>(e)];
    if (ed.src == v || ed.tgt == v) out.push_back(e);
  }
  return out;
}

BoundaryCondition BoundaryCondition::all_fixed(const MetricGraph& g, Index n) {
  return per_vertex(std::vector<Mat>(static_cast<size_t>(g.num_vertices), Mat(n, 0)));
}

BoundaryCondition BoundaryCondition::all_free(const MetricGraph& g, Index n) {
  return per_vertex(
      std::vector<Mat>(static_cast<size_t>(g.num_vertices), Mat::Identity(n, n)));
}

SymplecticSpace signed_double_space(Index n, Index num_edges) {
  if (n <= 0 || num_edges <= 0)
    throw schema_error("graph", "signed double space needs positive dimensions");
  const Index copies = 2 * num_edges;
  const Mat J = SymplecticSpace::standard(2 * n).form;
  Mat form = Mat::Zero(2 * n * copies, 2 * n * copies);
  for (Index c = 0; c < copies; ++c) {
    const double sign = (c % 2 == 0) ? -1.0 : 1.0;  // source copies carry -J
    form.block(2 * n * c, 2 * n * c, 2 * n, 2 * n) = sign * J;
  }
  return SymplecticSpace{std::move(form), false};
}

Mat pullback_boundary(const MetricGraph& g, Index n, const BoundaryCondition& bc) {
  g.validate();
  const Index rows = n * 2 * g.num_edges();
  if (bc.mode == BoundaryCondition::Mode::general) {
    if (bc.general_frame.rows() != rows)
      throw schema_error("graph", "general boundary frame has wrong row count");
    if (!bc.general_frame.allFinite())
      throw schema_error("graph", "boundary frame has non-finite entries");
    return bc.general_frame;
  }
  if (static_cast<Index>(bc.vertex_frames.size()) != g.num_vertices)
    throw schema_error("graph", "per-vertex boundary needs one frame per vertex");
  Index total = 0;
  for (const Mat& F : bc.vertex_frames) {
    if (F.rows() != n && F.cols() > 0)
      throw schema_error("graph", "vertex frame has wrong row count");
    if (!F.allFinite()) throw schema_error("graph", "vertex frame has non-finite entries");
    total += F.cols();
  }
  Mat out = Mat::Zero(rows, total);
  Index col = 0;
  for (Index v = 0; v < g.num_vertices; ++v) {
    const Mat& F = bc.vertex_frames[static_cast<size_t>(v)];
    const std::vector<Index> copies = g.copies_of_vertex(v);
    for (Index j = 0; j < F.cols(); ++j, ++col)
      for (Index c : copies) out.block(base_copy_offset(n, c), col, n, 1) = F.col(j);
  }
  return out;
}

Frame annihilator(Index n, Index num_edges, const Mat& base_frame, const Tolerances& tol) {
  const Index copies = 2 * num_edges;
  const Index base_dim = n * copies;
  if (base_frame.cols() > 0 && base_frame.rows() != base_dim)
    throw schema_error("graph", "annihilator input must live in the base product");
  SymplecticSpace sp = signed_double_space(n, num_edges);

  Mat X = orthonormal_span<double>(base_frame, tol);
  Mat Nu = orthogonal_complement<double>(X, base_dim, tol);

  Mat cols = Mat::Zero(sp.dim(), X.cols() + Nu.cols());
  // Tangent directions lifted to base slots.
  for (Index j = 0; j < X.cols(); ++j)
    for (Index c = 0; c < copies; ++c)
      cols.block(signed_copy_offset(n, c) + n, j, n, 1) =
          X.block(base_copy_offset(n, c), j, n, 1);
  // Conormal directions in covector slots; flipped on source copies so the
  // frame is isotropic for the signed form.
  for (Index j = 0; j < Nu.cols(); ++j)
    for (Index c = 0; c < copies; ++c) {
      const double flip = (c % 2 == 0) ? -1.0 : 1.0;
      cols.block(signed_copy_offset(n, c), X.cols() + j, n, 1) =
          flip * Nu.block(base_copy_offset(n, c), j, n, 1);
    }

  Frame out = make_frame(sp, cols, tol);
  if (out.dim() != sp.dim() / 2 || !is_lagrangian(out, tol.symplectic_defect))
    throw precondition_error("graph", "annihilator construction is not Lagrangian");
  return out;
}

Frame product_flow_graph(Index n, const std::vector<Mat>& theta_per_edge,
                         const Tolerances& tol) {
  const Index E = static_cast<Index>(theta_per_edge.size());
  SymplecticSpace sp = signed_double_space(n, E);
  SymplecticSpace edge_sp = SymplecticSpace::standard(2 * n);
  Mat cols = Mat::Zero(sp.dim(), 2 * n * E);
  for (Index e = 0; e < E; ++e) {
    const Mat& Th = theta_per_edge[static_cast<size_t>(e)];
    require_symplectic(edge_sp, Th, "graph", tol);
    cols.block(signed_copy_offset(n, 2 * e), 2 * n * e, 2 * n, 2 * n) =
        Mat::Identity(2 * n, 2 * n);
    cols.block(signed_copy_offset(n, 2 * e + 1), 2 * n * e, 2 * n, 2 * n) = Th;
  }
  Frame out = make_frame(sp, cols, tol);
  if (!is_lagrangian(out, tol.symplectic_defect))
    throw precondition_error("graph", "product flow graph is not Lagrangian");
  return out;
}

}  // namespace symidx
