#include "symidx/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace symidx {

namespace {

// --- piecewise-polynomial bookkeeping ---------------------------------------

Index piece_of(const PiecewiseMat& pm, double t) {
  const auto& bp = pm.breakpoints;
  auto it = std::upper_bound(bp.begin(), bp.end(), t);
  Index i = static_cast<Index>(it - bp.begin()) - 1;
  const Index last = static_cast<Index>(pm.pieces.size()) - 1;
  return std::clamp<Index>(i, 0, last);
}

/// Coefficient evaluation pinned to one smooth piece per matrix, so RK4
/// stages never straddle a breakpoint discontinuity.
struct SegmentEval {
  const LQEdgeData* lq = nullptr;
  Index pa = 0, pb = 0, pw = 0, ps = 0, pr = 0;

  void select(double t_mid) {
    pa = piece_of(lq->A, t_mid);
    pb = piece_of(lq->B, t_mid);
    pw = piece_of(lq->W, t_mid);
    ps = piece_of(lq->S, t_mid);
    pr = piece_of(lq->R, t_mid);
  }
  Mat A(double t) const { return lq->A.pieces[pa].eval(t - lq->A.breakpoints[pa]); }
  Mat B(double t) const { return lq->B.pieces[pb].eval(t - lq->B.breakpoints[pb]); }
  Mat W(double t) const { return lq->W.pieces[pw].eval(t - lq->W.breakpoints[pw]); }
  Mat S(double t) const { return lq->S.pieces[ps].eval(t - lq->S.breakpoints[ps]); }
  Mat R(double t) const { return lq->R.pieces[pr].eval(t - lq->R.breakpoints[pr]); }
};

// --- exact-propagation integrals per mesh cell -------------------------------
//
// With Phi the state transition of x' = A x and y = Phi^{-1} x, a control that
// is constant on a cell gives, on that cell, y(t) = y_j + Y(t) u_j with
// Y(t) = int_{cell start}^t Phi^{-1} B. The cost integrals below express the
// quadratic cost of the cell in terms of (y_j, u_j):
//   int x^T W x      -> y^T a y + 2 y^T b u + u^T c u   (W-hat = Phi^T W Phi)
//   2 int x^T S u    -> 2 y^T d u + 2 u^T e u           (S-hat = Phi^T S)
//   int u^T R u      -> u^T r u
struct AugState {
  Mat Phi, Y, a, b, c, d, e, r;
};

AugState lin(const AugState& s, double h, const AugState& k) {
  return {s.Phi + h * k.Phi, s.Y + h * k.Y, s.a + h * k.a, s.b + h * k.b,
          s.c + h * k.c,     s.d + h * k.d, s.e + h * k.e, s.r + h * k.r};
}

AugState deriv(const SegmentEval& ev, double t, const AugState& s) {
  const Mat At = ev.A(t);
  const Mat Bt = ev.B(t);
  const Mat Wt = ev.W(t);
  const Mat St = ev.S(t);
  const Mat Rt = ev.R(t);
  const Mat Z = s.Phi.partialPivLu().solve(Bt);
  const Mat Wh = s.Phi.transpose() * Wt * s.Phi;
  const Mat Sh = s.Phi.transpose() * St;
  AugState d;
  d.Phi = At * s.Phi;
  d.Y = Z;
  d.a = Wh;
  d.b = Wh * s.Y;
  d.c = s.Y.transpose() * Wh * s.Y;
  d.d = Sh;
  d.e = s.Y.transpose() * Sh;
  d.r = Rt;
  return d;
}

AugState rk4_step(const SegmentEval& ev, double t, double h, const AugState& s) {
  const AugState k1 = deriv(ev, t, s);
  const AugState k2 = deriv(ev, t + 0.5 * h, lin(s, 0.5 * h, k1));
  const AugState k3 = deriv(ev, t + 0.5 * h, lin(s, 0.5 * h, k2));
  const AugState k4 = deriv(ev, t + h, lin(s, h, k3));
  AugState out = s;
  out.Phi += (h / 6.0) * (k1.Phi + 2.0 * k2.Phi + 2.0 * k3.Phi + k4.Phi);
  out.Y += (h / 6.0) * (k1.Y + 2.0 * k2.Y + 2.0 * k3.Y + k4.Y);
  out.a += (h / 6.0) * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
  out.b += (h / 6.0) * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
  out.c += (h / 6.0) * (k1.c + 2.0 * k2.c + 2.0 * k3.c + k4.c);
  out.d += (h / 6.0) * (k1.d + 2.0 * k2.d + 2.0 * k3.d + k4.d);
  out.e += (h / 6.0) * (k1.e + 2.0 * k2.e + 2.0 * k3.e + k4.e);
  out.r += (h / 6.0) * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r);
  return out;
}

struct CellIntegrals {
  Mat G;  // int over the cell of Phi^{-1} B
  Mat a, b, c, d, e, r;
};

struct EdgeDiscretization {
  Mat Phi1;
  std::vector<CellIntegrals> cells;
};

std::vector<double> interior_breaks(const LQEdgeData& lq) {
  std::vector<double> out;
  for (const PiecewiseMat* pm : {&lq.A, &lq.B, &lq.W, &lq.S, &lq.R}) {
    for (double b : pm->breakpoints)
      if (b > 1e-12 && b < 1.0 - 1e-12) out.push_back(b);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double x, double y) { return std::abs(x - y) < 1e-12; }),
            out.end());
  return out;
}

EdgeDiscretization discretize_edge(const LQEdgeData& lq, Index mesh,
                                   const OracleOptions& opts) {
  const Index n = lq.n, m = lq.m;
  const std::vector<double> breaks = interior_breaks(lq);
  const double h_target =
      1.0 / static_cast<double>(std::max(opts.min_fine_steps, mesh * opts.min_substeps));

  SegmentEval ev;
  ev.lq = &lq;

  EdgeDiscretization out;
  out.cells.reserve(static_cast<size_t>(mesh));

  AugState s;
  s.Phi = Mat::Identity(n, n);
  auto reset_cell = [&]() {
    s.Y = Mat::Zero(n, m);
    s.a = Mat::Zero(n, n);
    s.b = Mat::Zero(n, m);
    s.c = Mat::Zero(m, m);
    s.d = Mat::Zero(n, m);
    s.e = Mat::Zero(m, m);
    s.r = Mat::Zero(m, m);
  };

  auto brk = breaks.begin();
  for (Index j = 0; j < mesh; ++j) {
    const double t0 = static_cast<double>(j) / static_cast<double>(mesh);
    const double t1 = static_cast<double>(j + 1) / static_cast<double>(mesh);
    reset_cell();
    double seg0 = t0;
    while (true) {
      double seg1 = t1;
      while (brk != breaks.end() && *brk <= seg0 + 1e-13) ++brk;
      const bool cut = (brk != breaks.end() && *brk < t1 - 1e-13);
      if (cut) seg1 = *brk;
      ev.select(0.5 * (seg0 + seg1));
      const Index nsteps =
          std::max<Index>(1, static_cast<Index>(std::ceil((seg1 - seg0) / h_target)));
      const double h = (seg1 - seg0) / static_cast<double>(nsteps);
      for (Index k = 0; k < nsteps; ++k) s = rk4_step(ev, seg0 + k * h, h, s);
      if (!cut) break;
      seg0 = seg1;
      ++brk;
    }
    out.cells.push_back({s.Y, s.a, s.b, s.c, s.d, s.e, s.r});
  }
  out.Phi1 = s.Phi;
  return out;
}

}  // namespace

// --- problem data ------------------------------------------------------------

Index SeparatedLQProblem::state_rows() const {
  Index total = 0;
  for (const auto& e : edges) total += e.n;
  return total;
}

void SeparatedLQProblem::validate() const {
  if (edges.empty()) throw schema_error("oracle", "problem has no edges");
  for (const auto& e : edges) e.validate();
  const Index rows = state_rows();
  auto check = [&](const Mat& N, const char* name) {
    if (N.cols() > 0 && N.rows() != rows) {
      std::ostringstream os;
      os << name << " has " << N.rows() << " rows, expected " << rows;
      throw schema_error("oracle", os.str());
    }
    if (N.cols() > 0 && !N.allFinite())
      throw schema_error("oracle", std::string(name) + " contains non-finite entries");
  };
  check(N0, "start boundary frame");
  check(N1, "end boundary frame");
}

// --- Hessian assembly --------------------------------------------------------

DiscretizedHessian assemble_hessian(const SeparatedLQProblem& problem, Index mesh,
                                    const OracleOptions& opts, const Tolerances& tol) {
  problem.validate();
  if (mesh < 1) throw schema_error("oracle", "mesh must be positive");
  const Index E = static_cast<Index>(problem.edges.size());
  const Index NT = problem.state_rows();

  // Row offset of each edge inside the state product.
  std::vector<Index> roff(static_cast<size_t>(E) + 1, 0);
  for (Index e = 0; e < E; ++e) roff[e + 1] = roff[e] + problem.edges[e].n;

  const Mat N0o = problem.N0.cols() > 0 ? orthonormal_span(problem.N0, tol) : Mat(NT, 0);
  const Index d0 = N0o.cols();

  // Variable layout: boundary parameters first, then per-edge control blocks.
  std::vector<Index> uoff(static_cast<size_t>(E) + 1, d0);
  for (Index e = 0; e < E; ++e) uoff[e + 1] = uoff[e] + problem.edges[e].m * mesh;
  const Index V = uoff[E];

  Mat Q = Mat::Zero(V, V);
  Mat T1 = Mat::Zero(NT, V);  // end state as a linear map of the variables

  for (Index e = 0; e < E; ++e) {
    const LQEdgeData& lq = problem.edges[e];
    const Index n = lq.n, m = lq.m;
    const EdgeDiscretization disc = discretize_edge(lq, mesh, opts);

    // Suffix sums of the pulled-back W integrals: suf[j] = sum_{i >= j} a_i.
    std::vector<Mat> suf(static_cast<size_t>(mesh) + 1);
    suf[mesh] = Mat::Zero(n, n);
    for (Index j = mesh - 1; j >= 0; --j) suf[j] = suf[j + 1] + disc.cells[j].a;

    std::vector<Mat> P(static_cast<size_t>(mesh));
    for (Index j = 0; j < mesh; ++j)
      P[j] = suf[j + 1] * disc.cells[j].G + disc.cells[j].b + disc.cells[j].d;

    const Mat N0e = N0o.middleRows(roff[e], n);  // n x d0

    if (d0 > 0) Q.topLeftCorner(d0, d0) += N0e.transpose() * suf[0] * N0e;
    for (Index k = 0; k < mesh; ++k) {
      const CellIntegrals& ck = disc.cells[k];
      const Index ok = uoff[e] + k * m;
      if (d0 > 0) {
        const Mat blk = N0e.transpose() * P[k];
        Q.block(0, ok, d0, m) += blk;
        Q.block(ok, 0, m, d0) += blk.transpose();
      }
      Q.block(ok, ok, m, m) += ck.G.transpose() * suf[k + 1] * ck.G + ck.c +
                               ck.e + ck.e.transpose() + ck.r;
      for (Index l = k + 1; l < mesh; ++l) {
        const Mat blk = ck.G.transpose() * P[l];
        const Index ol = uoff[e] + l * m;
        Q.block(ok, ol, m, m) += blk;
        Q.block(ol, ok, m, m) += blk.transpose();
      }
    }

    if (d0 > 0) T1.block(roff[e], 0, n, d0) = disc.Phi1 * N0e;
    for (Index k = 0; k < mesh; ++k)
      T1.block(roff[e], uoff[e] + k * m, n, m) = disc.Phi1 * disc.cells[k].G;
  }

  // Feasibility: the end state must lie in span(N1).
  const Mat N1perp = orthogonal_complement(problem.N1, NT, tol);
  const Mat C = N1perp.transpose() * T1;
  const Mat K = C.rows() > 0 ? kernel_basis(C, tol) : Mat(Mat::Identity(V, V));

  DiscretizedHessian out;
  out.mesh = mesh;
  out.variables = V;
  out.Q = K.transpose() * (0.5 * (Q + Q.transpose())) * K;

  if (out.Q.rows() == 0) {
    out.eigenvalues = Vec(0);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(out.Q, Eigen::EigenvaluesOnly);
  out.eigenvalues = es.eigenvalues();
  const double rho = std::max(std::abs(out.eigenvalues(0)),
                              std::abs(out.eigenvalues(out.eigenvalues.size() - 1)));
  const double band = opts.gap * rho;
  const double noise = 64.0 * static_cast<double>(out.Q.rows()) *
                       std::numeric_limits<double>::epsilon() * rho;
  for (Index i = 0; i < out.eigenvalues.size(); ++i) {
    const double lam = out.eigenvalues(i);
    if (lam < -band) ++out.index_neg;
    else if (std::abs(lam) <= band) ++out.kernel_dim;
    if (lam < -noise && lam >= -band) out.band_clean = false;
  }
  return out;
}

// --- stabilization loop ------------------------------------------------------

OracleResult oracle_index(const SeparatedLQProblem& problem, const OracleOptions& opts,
                          const Tolerances& tol) {
  if (opts.initial_mesh < 1 || opts.max_mesh < opts.initial_mesh)
    throw schema_error("oracle", "invalid mesh bounds");
  OracleResult res;
  bool have_prev = false;
  DiscretizedHessian prev;
  for (Index mesh = opts.initial_mesh; mesh <= opts.max_mesh; mesh *= 2) {
    DiscretizedHessian cur = assemble_hessian(problem, mesh, opts, tol);
    res.history.push_back(cur.index_neg);
    if (have_prev && prev.index_neg == cur.index_neg &&
        prev.kernel_dim == cur.kernel_dim && prev.band_clean && cur.band_clean) {
      res.index = cur.index_neg;
      res.kernel_dim = cur.kernel_dim;
      res.mesh = mesh;
      return res;
    }
    prev = std::move(cur);
    have_prev = true;
  }
  std::ostringstream os;
  os << "negative count did not stabilize by mesh " << opts.max_mesh << " (history:";
  for (int h : res.history) os << ' ' << h;
  os << ")";
  throw stabilization_error("oracle", os.str());
}

// --- graph problems ----------------------------------------------------------

bool is_separable(const MetricGraph& g) {
  for (Index v = 0; v < g.num_vertices; ++v) {
    bool src = false, tgt = false;
    for (const auto& e : g.edges) {
      if (e.src == v) src = true;
      if (e.tgt == v) tgt = true;
    }
    if (src && tgt) return false;
  }
  return true;
}

namespace {

void check_graph_data(const MetricGraph& g, Index n,
                      const std::vector<LQEdgeData>& edge_data,
                      const BoundaryCondition& bc) {
  g.validate();
  if (static_cast<Index>(edge_data.size()) != g.num_edges())
    throw schema_error("oracle", "edge data count does not match the graph");
  for (const auto& d : edge_data) {
    d.validate();
    if (d.n != n) throw schema_error("oracle", "edge state dimension mismatch");
  }
  if (bc.mode == BoundaryCondition::Mode::per_vertex) {
    if (static_cast<Index>(bc.vertex_frames.size()) != g.num_vertices)
      throw schema_error("oracle", "vertex frame count does not match the graph");
    for (const auto& f : bc.vertex_frames)
      if (f.cols() > 0 && f.rows() != n)
        throw schema_error("oracle", "vertex frame row count must equal n");
  } else if (bc.general_frame.cols() > 0 &&
             bc.general_frame.rows() != n * 2 * g.num_edges()) {
    throw schema_error("oracle", "general boundary frame rows must equal n * 2E");
  }
}

PiecewiseMat lift_bottom_square(const PiecewiseMat& pm, Index n) {
  PiecewiseMat out;
  out.breakpoints = pm.breakpoints;
  for (const PolyMat& p : pm.pieces) {
    PolyMat q;
    for (const Mat& c : p.coeffs) {
      Mat lifted = Mat::Zero(2 * n, 2 * n);
      lifted.bottomRightCorner(n, n) = c;
      q.coeffs.push_back(std::move(lifted));
    }
    out.pieces.push_back(std::move(q));
  }
  return out;
}

PiecewiseMat lift_bottom_tall(const PiecewiseMat& pm, Index n, Index m) {
  PiecewiseMat out;
  out.breakpoints = pm.breakpoints;
  for (const PolyMat& p : pm.pieces) {
    PolyMat q;
    for (const Mat& c : p.coeffs) {
      Mat lifted = Mat::Zero(2 * n, m);
      lifted.bottomRows(n) = c;
      q.coeffs.push_back(std::move(lifted));
    }
    out.pieces.push_back(std::move(q));
  }
  return out;
}

}  // namespace

SeparatedLQProblem direct_separated_problem(const MetricGraph& g, Index n,
                                            const std::vector<LQEdgeData>& edge_data,
                                            const BoundaryCondition& bc) {
  check_graph_data(g, n, edge_data, bc);
  if (bc.mode != BoundaryCondition::Mode::per_vertex)
    throw precondition_error("oracle",
                             "direct separated assembly needs per-vertex boundary data");
  if (!is_separable(g))
    throw precondition_error(
        "oracle", "graph has a vertex meeting both edge sources and edge targets");

  const Index E = g.num_edges();
  const Index NT = n * E;
  Index d_src = 0, d_tgt = 0;
  for (Index v = 0; v < g.num_vertices; ++v) {
    bool src = false;
    for (const auto& e : g.edges) src = src || (e.src == v);
    (src ? d_src : d_tgt) += bc.vertex_frames[v].cols();
  }

  SeparatedLQProblem p;
  p.edges = edge_data;
  p.N0 = Mat::Zero(NT, d_src);
  p.N1 = Mat::Zero(NT, d_tgt);
  Index c0 = 0, c1 = 0;
  for (Index v = 0; v < g.num_vertices; ++v) {
    const Mat& F = bc.vertex_frames[v];
    if (F.cols() == 0) continue;
    bool src = false;
    for (const auto& e : g.edges) src = src || (e.src == v);
    Mat& N = src ? p.N0 : p.N1;
    Index& col = src ? c0 : c1;
    for (Index e = 0; e < E; ++e) {
      if ((src ? g.edges[e].src : g.edges[e].tgt) == v)
        N.block(n * e, col, n, F.cols()) = F;
    }
    col += F.cols();
  }
  return p;
}

SeparatedLQProblem doubled_problem(const MetricGraph& g, Index n,
                                   const std::vector<LQEdgeData>& edge_data,
                                   const BoundaryCondition& bc) {
  check_graph_data(g, n, edge_data, bc);
  const Index E = g.num_edges();

  SeparatedLQProblem p;
  p.edges.reserve(static_cast<size_t>(E));
  for (const LQEdgeData& d : edge_data) {
    // Doubled state (q, x): q is frozen at x(0), x evolves as before, and the
    // cost only sees x. The end pair (q(1), x(1)) = (x(0), x(1)) then carries
    // both endpoint values of the original edge.
    LQEdgeData dd;
    dd.n = 2 * n;
    dd.m = d.m;
    dd.A = lift_bottom_square(d.A, n);
    dd.B = lift_bottom_tall(d.B, n, d.m);
    dd.W = lift_bottom_square(d.W, n);
    dd.S = lift_bottom_tall(d.S, n, d.m);
    dd.R = d.R;
    p.edges.push_back(std::move(dd));
  }

  p.N0 = Mat::Zero(2 * n * E, n * E);
  for (Index e = 0; e < E; ++e)
    for (Index i = 0; i < n; ++i) {
      p.N0(2 * n * e + i, n * e + i) = 1.0;      // q slot
      p.N0(2 * n * e + n + i, n * e + i) = 1.0;  // x slot
    }

  // End product rows (q_e, x_e) coincide with the base-product copy layout
  // (source copy 2e, target copy 2e + 1), so the boundary pullback applies
  // verbatim.
  p.N1 = pullback_boundary(g, n, bc);
  return p;
}

OracleResult graph_oracle_index(const MetricGraph& g, Index n,
                                const std::vector<LQEdgeData>& edge_data,
                                const BoundaryCondition& bc, const OracleOptions& opts,
                                const Tolerances& tol) {
  return oracle_index(doubled_problem(g, n, edge_data, bc), opts, tol);
}

}  // namespace symidx
