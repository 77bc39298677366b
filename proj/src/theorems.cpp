#include "symidx/theorems.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

namespace symidx {

namespace {

/// Inverse of a symplectic matrix through the structure identity
/// Theta^{-1} = -J Theta^T J (exact up to the symplecticity defect).
Mat symplectic_inverse(const SymplecticSpace& sp, const Mat& Theta) {
  return -sp.form * Theta.transpose() * sp.form;
}

Mat graph_columns(const Mat& T) {
  const Index d = T.rows();
  Mat cols(2 * d, d);
  cols.topRows(d) = Mat::Identity(d, d);
  cols.bottomRows(d) = T;
  return cols;
}

CMat graph_columns(const CMat& T) {
  const Index d = T.rows();
  CMat cols(2 * d, d);
  cols.topRows(d) = CMat::Identity(d, d);
  cols.bottomRows(d) = T;
  return cols;
}

}  // namespace

// ---------------------------------------------------------------------------
// Comparison.

ComparisonResult comparison_index_difference(const ComparisonInput& in, const Tolerances& tol) {
  const Index d = in.space.dim();
  if (in.AN.ambient_dim() != d || in.ANt.ambient_dim() != d || in.Gamma.ambient_dim() != d)
    throw schema_error("comparison", "frames do not match the stated space");
  if (in.TN.cols() > 0 && in.TNt.cols() > 0 && in.TN.rows() != in.TNt.rows())
    throw schema_error("comparison", "boundary frames live in different base products");

  ComparisonResult res;
  res.maslov = triple_index(in.AN, in.Gamma, in.ANt, tol);
  res.maslov_index = res.maslov.index_neg;

  res.k0 = intersect(in.AN, in.Gamma, tol).dim() -
           intersect(in.AN, in.Gamma, in.ANt, tol).dim();

  res.dim_TN = matrix_rank<double>(in.TN, tol);
  res.dim_common = static_cast<Index>(
      intersect_spans<double>(orthonormal_span<double>(in.TN, tol),
                              orthonormal_span<double>(in.TNt, tol), tol)
          .cols());

  res.difference = res.maslov_index + static_cast<int>(res.dim_common - res.dim_TN) +
                   static_cast<int>(res.k0);
  return res;
}

ComparisonResult graph_comparison(const MetricGraph& g, Index n,
                                  const std::vector<Mat>& theta_per_edge,
                                  const BoundaryCondition& N, const BoundaryCondition& Nt,
                                  const Tolerances& tol) {
  g.validate();
  if (static_cast<Index>(theta_per_edge.size()) != g.num_edges())
    throw schema_error("comparison", "need one flow matrix per edge");

  ComparisonInput in{signed_double_space(n, g.num_edges()),
                     Frame{},
                     Frame{},
                     Frame{},
                     pullback_boundary(g, n, N),
                     pullback_boundary(g, n, Nt)};
  in.AN = annihilator(n, g.num_edges(), in.TN, tol);
  in.ANt = annihilator(n, g.num_edges(), in.TNt, tol);
  in.Gamma = product_flow_graph(n, theta_per_edge, tol);
  return comparison_index_difference(in, tol);
}

// ---------------------------------------------------------------------------
// Splitting.

SplitCorrection split_index_correction(Index n, const Mat& Theta1, const Mat& Theta2,
                                       const Tolerances& tol) {
  const SymplecticSpace sp = SymplecticSpace::standard(2 * n);
  require_symplectic(sp, Theta1, "split", tol);
  require_symplectic(sp, Theta2, "split", tol);

  const Frame Pi = vertical_frame(sp);
  const Frame L0 = apply<double>(symplectic_inverse(sp, Theta2), Pi, tol);
  const Frame L2 = apply<double>(Theta1, Pi, tol);

  SplitCorrection out;
  out.maslov_index = triple_index(L0, Pi, L2, tol).index_neg;
  out.k = intersect(L0, Pi, tol).dim() + intersect(L2, Pi, tol).dim() -
          intersect(L0, Pi, L2, tol).dim();
  return out;
}

// ---------------------------------------------------------------------------
// Discretization.

namespace {

LinearHamiltonianSystem subsystem(const LinearHamiltonianSystem& sys, double a, double b) {
  LinearHamiltonianSystem sub;
  sub.n = sys.n;
  sub.t0 = a;
  sub.t1 = b;
  sub.breakpoints.push_back(a);
  for (double bp : sys.breakpoints)
    if (bp > a && bp < b) sub.breakpoints.push_back(bp);
  sub.breakpoints.push_back(b);
  std::sort(sub.breakpoints.begin(), sub.breakpoints.end());
  sub.H = sys.H;
  return sub;
}

}  // namespace

DiscretizationResult discretization_index(const LinearHamiltonianSystem& sys,
                                          const std::vector<double>& partition,
                                          bool count_kernel, const Tolerances& tol) {
  const double span = sys.t1 - sys.t0;
  if (partition.size() < 2)
    throw schema_error("discretization", "partition needs at least two points");
  if (std::abs(partition.front() - sys.t0) > 1e-9 * std::max(1.0, std::abs(span)) ||
      std::abs(partition.back() - sys.t1) > 1e-9 * std::max(1.0, std::abs(span)))
    throw schema_error("discretization", "partition must span the problem interval");
  for (std::size_t i = 0; i + 1 < partition.size(); ++i)
    if (!(partition[i] < partition[i + 1]))
      throw schema_error("discretization", "partition must be strictly increasing");

  const Index N = static_cast<Index>(partition.size()) - 1;
  const SymplecticSpace sp = SymplecticSpace::standard(2 * sys.n);
  const Frame Pi = vertical_frame(sp);

  std::vector<Mat> seg(N);   // flow across segment i
  std::vector<Mat> cum(N + 1);  // flow from t0 to partition[i]
  cum[0] = Mat::Identity(2 * sys.n, 2 * sys.n);
  std::vector<LinearHamiltonianSystem> subs;
  subs.reserve(N);
  for (Index i = 0; i < N; ++i) {
    subs.push_back(subsystem(sys, partition[i], partition[i + 1]));
    seg[i] = integrate_flow(subs.back()).Theta;
    cum[i + 1] = seg[i] * cum[i];
  }

  DiscretizationResult res;
  res.count_kernel = count_kernel;
  for (Index i = 1; i < N; ++i) {
    const Frame L0 = apply<double>(symplectic_inverse(sp, seg[i]), Pi, tol);
    const Frame L2 = apply<double>(cum[i], Pi, tol);
    res.terms.push_back(triple_index(L0, Pi, L2, tol).index_neg);
    if (count_kernel) {
      const Index ki = intersect(L0, Pi, tol).dim() + intersect(L2, Pi, tol).dim() -
                       intersect(L0, Pi, L2, tol).dim();
      res.kernel_corrections.push_back(ki);
    }
  }
  res.lower_bound = std::accumulate(res.terms.begin(), res.terms.end(), 0);
  if (count_kernel)
    res.lower_bound += static_cast<int>(std::accumulate(res.kernel_corrections.begin(),
                                                        res.kernel_corrections.end(), Index(0)));

  // Exactness certificate (sufficient, conservative). Always required: no
  // conjugate instant in the open interior of any segment. Without kernel
  // counting additionally require that no partition point is conjugate for
  // the accumulated flow and that no segment ends at a conjugate instant of
  // its own flow.
  bool exact = true;
  for (Index i = 0; i < N && exact; ++i) {
    const double len = partition[i + 1] - partition[i];
    const double win = std::max(1e-7 * len, 1e-8);
    for (const ConjugatePoint& p : conjugate_times(subs[i], 1e-9, 256, tol))
      if (p.t < partition[i + 1] - win) {
        exact = false;
        break;
      }
  }
  if (!count_kernel) {
    for (Index i = 1; i < N && exact; ++i)
      if (intersect(apply<double>(cum[i], Pi, tol), Pi, tol).dim() > 0) exact = false;
    for (Index i = 0; i < N && exact; ++i)
      if (intersect(apply<double>(seg[i], Pi, tol), Pi, tol).dim() > 0) exact = false;
  }
  res.exact = exact;
  return res;
}

// ---------------------------------------------------------------------------
// Iteration.

IterationResult iteration_index_I(const Mat& Theta, int k, const Tolerances& tol) {
  if (k < 1) throw schema_error("iteration", "iteration count must be positive");
  if (Theta.rows() != Theta.cols() || Theta.rows() % 2 != 0)
    throw schema_error("iteration", "monodromy must be square of even size");
  const Index n = Theta.rows() / 2;
  const SymplecticSpace sp = SymplecticSpace::standard(2 * n);
  require_symplectic(sp, Theta, "iteration", tol);

  const SymplecticSpace dsp = signed_double_space(n, 1);
  const Mat I = Mat::Identity(2 * n, 2 * n);
  const Frame Adelta = make_frame(dsp, graph_columns(I), tol);

  IterationResult res;
  Mat P = Theta;  // Theta^{j-1}
  for (int j = 2; j <= k; ++j) {
    const Mat Pj = P * Theta;
    const Frame G1 = make_frame(dsp, graph_columns(P), tol);
    const Frame G2 = make_frame(dsp, graph_columns(Pj), tol);
    // The junction form of the two consecutive powers, oriented so that the
    // double-cover boundary condition is the *finer* one; with the pairing
    // conventions fixed by the comparison machinery this is the triple with
    // the later graph first.
    const int idx = triple_index(G2, Adelta, G1, tol).index_neg;
    const Index ker = 2 * n - matrix_rank<double>(P - I, tol);
    res.terms.push_back(static_cast<long long>(idx) - static_cast<long long>(n) +
                        static_cast<long long>(ker));
    P = Pj;
  }
  res.total = std::accumulate(res.terms.begin(), res.terms.end(), 0LL);
  return res;
}

IterationResult iteration_index_II(const Mat& Theta, int k, cplx omega, const Tolerances& tol) {
  if (k < 1) throw schema_error("iteration", "iteration count must be positive");
  if (Theta.rows() != Theta.cols() || Theta.rows() % 2 != 0)
    throw schema_error("iteration", "monodromy must be square of even size");
  const Index n = Theta.rows() / 2;
  const SymplecticSpace sp = SymplecticSpace::standard(2 * n);
  require_symplectic(sp, Theta, "iteration", tol);

  if (omega == cplx(0, 0)) {
    const double a = 2.0 * M_PI / static_cast<double>(k);
    omega = cplx(std::cos(a), std::sin(a));
  }
  if (std::abs(std::abs(omega) - 1.0) > 1e-12)
    throw precondition_error("iteration", "omega must have unit modulus");

  const SymplecticSpace cdsp = signed_double_space(n, 1).complexified();
  const CMat Tc = Theta.cast<cplx>();
  const CMat Ic = CMat::Identity(2 * n, 2 * n);
  const CFrame Adelta = make_frame<cplx>(cdsp, graph_columns(Ic), tol);
  const CFrame GT = make_frame<cplx>(cdsp, graph_columns(Tc), tol);

  IterationResult res;
  cplx w = cplx(1, 0);
  for (int j = 1; j < k; ++j) {
    w *= omega;
    if (std::abs(w - cplx(1, 0)) < 1e-9)
      throw precondition_error("iteration", "omega^j must avoid 1 for 0 < j < k");
    const CFrame Gz = make_frame<cplx>(cdsp, graph_columns(CMat(w * Tc)), tol);
    const int idx = hermitian_triple_index(GT, Adelta, Gz, tol).index_neg;
    const Index ker = 2 * n - matrix_rank<cplx>(CMat(Tc - w * Ic), tol);
    res.terms.push_back(static_cast<long long>(n) - static_cast<long long>(ker) -
                        static_cast<long long>(idx));
  }
  res.total = std::accumulate(res.terms.begin(), res.terms.end(), 0LL);
  return res;
}

// ---------------------------------------------------------------------------
// Circle index function.

CMat circle_matrix(const Mat& Theta, cplx z, const Tolerances& tol) {
  if (Theta.rows() != Theta.cols() || Theta.rows() % 2 != 0)
    throw schema_error("circle", "monodromy must be square of even size");
  const SymplecticSpace sp = SymplecticSpace::standard(Theta.rows());
  require_symplectic(sp, Theta, "circle", tol);
  if (std::abs(std::abs(z) - 1.0) > 1e-9)
    throw precondition_error("circle", "z must lie on the unit circle");
  if (std::abs(z - cplx(1, 0)) < 1e-9)
    throw precondition_error("circle", "z = 1 is excluded from the circle function");

  const cplx zb = std::conj(z);
  const CMat Jc = sp.form.cast<cplx>();
  const CMat Tc = Theta.cast<cplx>();
  const CMat Tinv = symplectic_inverse(sp, Theta).cast<cplx>();
  const CMat Ic = CMat::Identity(Theta.rows(), Theta.rows());
  return CMat(Jc * ((zb + 1.0) * Ic - zb * Tc - Tinv) / (1.0 - zb));
}

int circle_index(const Mat& Theta, cplx z, const Tolerances& tol) {
  CMat M = circle_matrix(Theta, z, tol);
  M = 0.5 * (M + M.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMat> es(M);
  if (es.info() != Eigen::Success)
    throw stabilization_error("circle", "eigendecomposition of the circle matrix failed");
  const Vec ev = es.eigenvalues();
  const double eps = std::numeric_limits<double>::epsilon();
  const double amax = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
  const double thr = std::max(tol.eig_floor, static_cast<double>(ev.size()) * eps * amax);
  int neg = 0;
  for (Index i = 0; i < ev.size(); ++i)
    if (ev(i) < -thr) ++neg;
  return neg;
}

std::vector<CircleSample> circle_sweep(const Mat& Theta, int samples, const Tolerances& tol) {
  if (samples < 2) throw schema_error("circle", "need at least two sweep samples");
  std::vector<CircleSample> out;
  out.reserve(samples);
  for (int s = 0; s < samples; ++s) {
    const double a = 2.0 * M_PI * (s + 0.5) / samples;
    out.push_back({a, circle_index(Theta, cplx(std::cos(a), std::sin(a)), tol)});
  }
  return out;
}

std::vector<CircleJump> circle_jumps(const Mat& Theta, int samples, const Tolerances& tol) {
  const std::vector<CircleSample> sweep = circle_sweep(Theta, samples, tol);
  std::vector<CircleJump> out;
  struct Cell {
    double a, b;
    int ia, ib;
  };
  std::vector<Cell> stack;
  for (std::size_t s = 0; s + 1 < sweep.size(); ++s)
    if (sweep[s].index != sweep[s + 1].index)
      stack.push_back({sweep[s].angle, sweep[s + 1].angle, sweep[s].index, sweep[s + 1].index});
  while (!stack.empty()) {
    Cell c = stack.back();
    stack.pop_back();
    if (c.ia == c.ib) continue;
    if (c.b - c.a < 1e-9) {
      out.push_back({0.5 * (c.a + c.b), c.ia, c.ib});
      continue;
    }
    const double m = 0.5 * (c.a + c.b);
    const int im = circle_index(Theta, cplx(std::cos(m), std::sin(m)), tol);
    stack.push_back({c.a, m, c.ia, im});
    stack.push_back({m, c.b, im, c.ib});
  }
  std::sort(out.begin(), out.end(),
            [](const CircleJump& x, const CircleJump& y) { return x.angle < y.angle; });
  return out;
}

// ---------------------------------------------------------------------------
// Filtration.

FiltrationResult filtration_contributions(const MetricGraph& g, Index n,
                                          const std::vector<Mat>& theta_per_edge,
                                          const std::vector<Mat>& vertex_frames,
                                          const std::vector<Index>& order,
                                          const Tolerances& tol) {
  g.validate();
  const Index E = g.num_edges();
  const Index V = g.num_vertices;
  if (static_cast<Index>(theta_per_edge.size()) != E)
    throw schema_error("filtration", "need one flow matrix per edge");
  if (static_cast<Index>(vertex_frames.size()) != V)
    throw schema_error("filtration", "need one boundary frame per vertex");
  {
    std::vector<Index> sorted(order);
    std::sort(sorted.begin(), sorted.end());
    std::vector<Index> want(V);
    std::iota(want.begin(), want.end(), Index(0));
    if (sorted != want)
      throw schema_error("filtration", "order must be a permutation of the vertices");
  }

  const SymplecticSpace dsp = signed_double_space(n, E);
  const Frame Gamma = product_flow_graph(n, theta_per_edge, tol);
  auto pull = [&](const std::vector<Mat>& active) {
    return pullback_boundary(g, n, BoundaryCondition::per_vertex(active));
  };

  std::vector<Mat> active(V, Mat(n, 0));
  Frame Aprev = annihilator(n, E, pull(active), tol);

  FiltrationResult res;
  for (Index v : order) {
    active[static_cast<std::size_t>(v)] = vertex_frames[static_cast<std::size_t>(v)];
    const Frame Anext = annihilator(n, E, pull(active), tol);

    // Isotropic reduction subspace: the part of the previous annihilator
    // supported on copies of edges not incident to the active vertex.
    std::vector<bool> incident(static_cast<std::size_t>(E), false);
    for (Index e : g.edges_of_vertex(v)) incident[static_cast<std::size_t>(e)] = true;
    Index away = 0;
    for (Index e = 0; e < E; ++e)
      if (!incident[static_cast<std::size_t>(e)]) ++away;
    Mat coord = Mat::Zero(dsp.dim(), 4 * n * away);
    Index col = 0;
    for (Index e = 0; e < E; ++e) {
      if (incident[static_cast<std::size_t>(e)]) continue;
      for (Index r = 0; r < 4 * n; ++r)
        coord(signed_copy_offset(n, 2 * e) + r, col++) = 1.0;
    }
    const Frame Vj = intersect(Aprev, make_frame(dsp, coord, tol), tol);

    const SymplecticReduction red(Vj, tol);
    const Frame a0 = red.apply(Aprev);
    const Frame gr = red.apply(Gamma);
    const Frame a1 = red.apply(Anext);

    const int idx = triple_index(a0, gr, a1, tol).index_neg;
    const Index k0 =
        intersect(a0, gr, tol).dim() - intersect(a0, gr, a1, tol).dim();

    FiltrationStep step;
    step.vertex = v;
    step.contribution = idx + static_cast<int>(k0);
    step.reduced_dim = red.reduced_dim();
    res.total += step.contribution;
    res.steps.push_back(step);
    Aprev = Anext;
  }
  return res;
}

}  // namespace symidx
