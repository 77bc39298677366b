// Acceptance suite: nine end-to-end checks covering the triple-index
// identities, the annihilator vanishing lemma, the boundary-comparison
// theorem against the discretized-Hessian oracle, discretization lower
// bounds, the iteration formulas, the circle index, vertex filtration,
// global flow quality, and CLI golden reproduction.
//
// Each criterion prints one [PASS]/[FAIL] line; the exit status is the
// number of failed criteria.

#include "symidx/cli.hpp"
#include "symidx/core.hpp"
#include "symidx/graph.hpp"
#include "symidx/jacobi.hpp"
#include "symidx/maslov.hpp"
#include "symidx/oracle.hpp"
#include "symidx/theorems.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"

using namespace symidx;

namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Bookkeeping.

struct Checker {
  long long checked = 0;
  long long failed = 0;
  std::string first;

  void expect(bool ok, const std::string& what) {
    ++checked;
    if (!ok) {
      ++failed;
      if (first.empty()) first = what;
    }
  }
  std::string note() const {
    std::ostringstream os;
    os << failed << "/" << checked << " checks failed; first: " << first;
    return os.str();
  }
};

// Accumulated across criteria 3-5 and consumed by criterion 8.
struct FlowAudit {
  double max_defect = 0.0;
  long long flows = 0;
  long long edge_checks = 0;    // single-edge fixed-endpoint agreements
  long long edge_mismatches = 0;
};
FlowAudit g_audit;

Mat audited_flow(const LinearHamiltonianSystem& sys) {
  FlowResult fr = integrate_flow(sys);
  g_audit.max_defect = std::max(g_audit.max_defect, fr.symplectic_defect);
  ++g_audit.flows;
  return fr.Theta;
}

// Fixed-endpoint cross-agreement between the eigenvalue-counting oracle and
// the conjugate-point count, tallied for criterion 8.
void audit_edge_fixed_endpoint(const LQEdgeData& lq) {
  LinearHamiltonianSystem sys = jacobi_from_lq(lq);
  const int conj = conjugate_point_index(sys);
  SeparatedLQProblem p;
  p.edges = {lq};
  p.N0 = Mat(lq.n, 0);
  p.N1 = Mat(lq.n, 0);
  const OracleResult o = oracle_index(p);
  ++g_audit.edge_checks;
  if (o.index != conj) ++g_audit.edge_mismatches;
}

// ---------------------------------------------------------------------------
// Shared constructors.

Mat scalar(double v) { return Mat::Constant(1, 1, v); }

LQEdgeData constant_lq(const Mat& A, const Mat& B, const Mat& W, const Mat& S,
                       const Mat& R) {
  LQEdgeData d;
  d.n = A.rows();
  d.m = B.cols();
  d.A = PiecewiseMat::constant(A);
  d.B = PiecewiseMat::constant(B);
  d.W = PiecewiseMat::constant(W);
  d.S = PiecewiseMat::constant(S);
  d.R = PiecewiseMat::constant(R);
  return d;
}

// Unit oscillator: x' = u, cost integrand u^2 - x^2.
LQEdgeData oscillator_lq() {
  return constant_lq(scalar(0.0), scalar(1.0), scalar(-1.0), scalar(0.0), scalar(1.0));
}

LQEdgeData random_lq(std::mt19937_64& rng, Index n, double curvature) {
  LQEdgeData d;
  d.n = n;
  d.m = n;
  d.A = PiecewiseMat::constant(testutil::random_matrix(rng, n, n, 0.3));
  d.B = PiecewiseMat::constant(Mat::Identity(n, n));
  d.W = PiecewiseMat::constant(
      Mat(-curvature * curvature * Mat::Identity(n, n) +
          testutil::random_symmetric(rng, n, 0.2)));
  d.S = PiecewiseMat::constant(testutil::random_matrix(rng, n, n, 0.2));
  d.R = PiecewiseMat::constant(testutil::random_spd(rng, n, 1.0));
  return d;
}

MetricGraph loop_graph(double length) {
  MetricGraph g;
  g.num_vertices = 1;
  g.edges = {{0, 0, length}};
  return g;
}

// Direct sum of planar rotations in (p, x) block coordinates.
Mat rotation_sum(const std::vector<double>& angles) {
  const Index n = static_cast<Index>(angles.size());
  Mat M = Mat::Zero(2 * n, 2 * n);
  for (Index i = 0; i < n; ++i) {
    const double c = std::cos(angles[static_cast<std::size_t>(i)]);
    const double s = std::sin(angles[static_cast<std::size_t>(i)]);
    M(i, i) = c;
    M(i, n + i) = -s;
    M(n + i, i) = s;
    M(n + i, n + i) = c;
  }
  return M;
}

int dim_cap(const Frame& A, const Frame& B) {
  return static_cast<int>(intersect(A, B).dim());
}

int dim_cap3(const Frame& A, const Frame& B, const Frame& C) {
  return static_cast<int>(intersect(A, B, C).dim());
}

// ---------------------------------------------------------------------------
// Criterion 1: identities of the Lagrangian triple index.

void check_triple(Checker& c, Index n, const Frame& L0, const Frame& L1,
                  const Frame& L2) {
  const MaslovResult base = triple_index(L0, L1, L2);
  const int tau = base.signature;
  c.expect(triple_index(L1, L0, L2).signature == -tau, "alternating swap(0,1)");
  c.expect(triple_index(L0, L2, L1).signature == -tau, "alternating swap(1,2)");
  c.expect(triple_index(L2, L0, L1).signature == tau, "cyclic shift by one");
  c.expect(triple_index(L1, L2, L0).signature == tau, "cyclic shift by two");
  const int expected_sig = -2 * base.index_neg + static_cast<int>(n) -
                           dim_cap(L0, L2) - dim_cap(L0, L1) - dim_cap(L1, L2) +
                           2 * dim_cap3(L0, L1, L2);
  c.expect(tau == expected_sig, "signature/index relation");
}

void check_quadruple(Checker& c, const Frame& L0, const Frame& L1, const Frame& L2,
                     const Frame& L3) {
  const MaslovResult m012 = triple_index(L0, L1, L2);
  const MaslovResult m123 = triple_index(L1, L2, L3);
  const MaslovResult m023 = triple_index(L0, L2, L3);
  const MaslovResult m013 = triple_index(L0, L1, L3);
  c.expect(m012.signature - m123.signature + m023.signature - m013.signature == 0,
           "cocycle identity");
  const int lhs = m012.index_neg - m123.index_neg + m023.index_neg - m013.index_neg;
  const int rhs = dim_cap(L1, L3) - dim_cap(L0, L2) + dim_cap3(L0, L1, L2) -
                  dim_cap3(L1, L2, L3) + dim_cap3(L0, L2, L3) - dim_cap3(L0, L1, L3);
  c.expect(lhs == rhs, "coboundary identity");
}

bool criterion_kashiwara(std::string& note) {
  Checker c;
  std::mt19937_64 rng(101);
  int reduction_nontrivial = 0;
  for (Index two_n : {2, 4, 6, 8, 12}) {
    const SymplecticSpace sp = SymplecticSpace::standard(two_n);
    const Index n = two_n / 2;
    for (int it = 0; it < 1000; ++it) {
      const Frame L0 = testutil::random_lagrangian(rng, sp);
      const Frame L1 = testutil::random_lagrangian(rng, sp);
      const Frame L2 = testutil::random_lagrangian(rng, sp);
      const Frame L3 = testutil::random_lagrangian(rng, sp);
      check_triple(c, n, L0, L1, L2);
      check_quadruple(c, L0, L1, L2, L3);
    }
    // Engineered degeneracies: a shared isotropic subspace of every
    // admissible dimension, exercising nontrivial intersections and
    // symplectic reduction.
    for (Index s = 1; s <= n; ++s) {
      for (int rep = 0; rep < 40; ++rep) {
        const Frame seed = testutil::random_lagrangian(rng, sp);
        const Frame V = make_frame(sp, Mat(seed.cols.leftCols(s)));
        const Frame L0 = testutil::random_lagrangian_containing(rng, sp, V);
        const Frame L2 = testutil::random_lagrangian_containing(rng, sp, V);
        const Frame L1 = (rep % 2 == 0)
                             ? testutil::random_lagrangian(rng, sp)
                             : testutil::random_lagrangian_containing(rng, sp, V);
        const Frame L3 = testutil::random_lagrangian_containing(rng, sp, V);
        check_triple(c, n, L0, L1, L2);
        check_quadruple(c, L0, L1, L2, L3);
        const MaslovResult full = triple_index(L0, L1, L2);
        const SymplecticReduction red(V);
        const MaslovResult reduced =
            triple_index(red.apply(L0), red.apply(L1), red.apply(L2));
        c.expect(full.index_neg == reduced.index_neg, "reduction keeps the index");
        c.expect(full.signature == reduced.signature, "reduction keeps the signature");
        if (full.index_neg != 0) ++reduction_nontrivial;
      }
    }
  }
  c.expect(reduction_nontrivial > 0, "degenerate family hits nonzero indices");
  note = c.note();
  return c.failed == 0;
}

// ---------------------------------------------------------------------------
// Criterion 2: vanishing of the Maslov form on nested annihilator triples.

bool criterion_annihilator(std::string& note) {
  Checker c;
  std::mt19937_64 rng(202);
  for (int rep = 0; rep < 108; ++rep) {
    const Index n = 1 + rep % 3;
    const Index E = 1 + (rep / 3) % 2;
    const Index rows = 2 * n * E;
    std::uniform_int_distribution<Index> pick_d0(1, rows);
    const Index d0 = pick_d0(rng);
    std::uniform_int_distribution<Index> pick_d1(0, d0);
    const Index d1 = pick_d1(rng);
    std::uniform_int_distribution<Index> pick_d2(0, rows);
    const Index d2 = pick_d2(rng);

    const Mat B0 = testutil::random_matrix(rng, rows, d0);
    const Mat B1 = B0 * testutil::random_matrix(rng, d0, d1);  // N1 inside N0
    const Mat B2 = testutil::random_matrix(rng, rows, d2);

    const Frame A0 = annihilator(n, E, B0);
    const Frame A1 = annihilator(n, E, B1);
    const Frame A2 = annihilator(n, E, B2);
    // The lemma covers the middle subspace nested in either outer one.
    const Frame& first = (rep % 2 == 0) ? A0 : A2;
    const Frame& last = (rep % 2 == 0) ? A2 : A0;

    const MaslovFormT<double> mf = maslov_form(first, A1, last);
    const double entry =
        mf.matrix.size() == 0 ? 0.0 : mf.matrix.cwiseAbs().maxCoeff();
    c.expect(entry <= 1e-10, "form entries vanish");
    const MaslovResult res = triple_index(first, A1, last);
    c.expect(res.index_neg == 0, "index vanishes");
    c.expect(res.signature == 0, "signature vanishes");
  }
  note = c.note();
  return c.failed == 0;
}

// ---------------------------------------------------------------------------
// Criterion 3: comparison differences equal oracle differences.

BoundaryCondition random_partial_boundary(std::mt19937_64& rng, const MetricGraph& g,
                                          Index n) {
  std::uniform_int_distribution<Index> pick(0, n);
  std::vector<Mat> frames;
  for (Index v = 0; v < g.num_vertices; ++v) {
    const Index d = pick(rng);
    frames.push_back(d == 0 ? Mat(n, 0) : Mat(testutil::random_matrix(rng, n, d)));
  }
  return BoundaryCondition::per_vertex(frames);
}

BoundaryCondition shrink_boundary(std::mt19937_64& rng, const BoundaryCondition& bc,
                                  Index n) {
  std::vector<Mat> frames;
  for (const Mat& F : bc.vertex_frames) {
    if (F.cols() == 0) {
      frames.push_back(Mat(n, 0));
      continue;
    }
    std::uniform_int_distribution<Index> pick(0, F.cols());
    const Index d = pick(rng);
    frames.push_back(d == 0 ? Mat(n, 0)
                            : Mat(F * testutil::random_matrix(rng, F.cols(), d)));
  }
  return BoundaryCondition::per_vertex(frames);
}

bool check_pair(Checker& c, const MetricGraph& g, Index n,
                const std::vector<LQEdgeData>& data, const BoundaryCondition& from,
                const BoundaryCondition& to, const std::string& what) {
  std::vector<Mat> thetas;
  for (const auto& lq : data) thetas.push_back(audited_flow(jacobi_from_lq(lq)));
  const ComparisonResult cmp = graph_comparison(g, n, thetas, from, to);
  const int o_from = graph_oracle_index(g, n, data, from).index;
  const int o_to = graph_oracle_index(g, n, data, to).index;
  const bool ok = cmp.difference == o_to - o_from;
  c.expect(ok, what);
  return ok;
}

bool criterion_comparison(std::string& note) {
  Checker c;
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> pick_len(0.5, 2.1);
  std::uniform_real_distribution<double> pick_curv(0.4, 1.4);

  // Single edge, >= 50 random problems over the three boundary-pair classes.
  for (int it = 0; it < 51; ++it) {
    const Index n = 1 + it % 2;
    MetricGraph g;
    g.num_vertices = 2;
    g.edges = {{0, 1, 1.0}};
    const LQEdgeData lq = random_lq(rng, n, pick_curv(rng)).scaled(pick_len(rng));
    audit_edge_fixed_endpoint(lq);
    BoundaryCondition from = BoundaryCondition::all_fixed(g, n);
    BoundaryCondition to = BoundaryCondition::all_free(g, n);
    switch (it % 3) {
      case 0: break;  // (fixed, free)
      case 1:  // (fixed, per-vertex submanifold)
        to = random_partial_boundary(rng, g, n);
        break;
      case 2:  // nested per-vertex pair N inside N-tilde
        to = random_partial_boundary(rng, g, n);
        from = shrink_boundary(rng, to, n);
        break;
    }
    check_pair(c, g, n, {lq}, from, to, "single-edge pair " + std::to_string(it));
  }

  // Degenerate single-edge instance: conjugate final time, so the flow graph
  // meets the fixed-boundary annihilator nontrivially.
  {
    MetricGraph g;
    g.num_vertices = 2;
    g.edges = {{0, 1, std::numbers::pi}};
    const LQEdgeData lq = oscillator_lq().scaled(std::numbers::pi);
    audit_edge_fixed_endpoint(lq);
    check_pair(c, g, 1, {lq}, BoundaryCondition::all_fixed(g, 1),
               BoundaryCondition::all_free(g, 1), "oscillator at a conjugate time");
  }

  // Small graphs, >= 20 cases across path, star, and loop shapes.
  for (int it = 0; it < 21; ++it) {
    const int shape = it % 3;
    const Index n = 1 + (it / 3) % 2;
    MetricGraph g;
    if (shape == 0) {
      g.num_vertices = 3;
      g.edges = {{0, 1, 1.0}, {1, 2, 1.0}};
    } else if (shape == 1) {
      g.num_vertices = 4;
      g.edges = {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}};
    } else {
      g = loop_graph(1.0);
    }
    std::vector<LQEdgeData> data;
    for (auto& e : g.edges) {
      e.length = pick_len(rng);
      data.push_back(random_lq(rng, n, pick_curv(rng)).scaled(e.length));
    }
    BoundaryCondition from = BoundaryCondition::all_fixed(g, n);
    BoundaryCondition to = BoundaryCondition::all_free(g, n);
    switch ((it / 3) % 3) {
      case 0: break;
      case 1:
        to = random_partial_boundary(rng, g, n);
        break;
      case 2:
        to = random_partial_boundary(rng, g, n);
        from = shrink_boundary(rng, to, n);
        break;
    }
    check_pair(c, g, n, data, from, to, "graph pair " + std::to_string(it));
  }

  // Degenerate loop: full period of the oscillator, periodic kernel present.
  {
    const MetricGraph g = loop_graph(2 * std::numbers::pi);
    const LQEdgeData lq = oscillator_lq().scaled(2 * std::numbers::pi);
    check_pair(c, g, 1, {lq}, BoundaryCondition::all_fixed(g, 1),
               BoundaryCondition::all_free(g, 1), "loop over a full period");
  }

  note = c.note();
  return c.failed == 0;
}

// ---------------------------------------------------------------------------
// Criterion 4: discretization lower bounds against conjugate counts and the
// oracle.

std::vector<double> uniform_partition(int cells) {
  std::vector<double> p;
  for (int j = 0; j <= cells; ++j) p.push_back(static_cast<double>(j) / cells);
  return p;
}

bool criterion_discretization(std::string& note) {
  Checker c;
  std::mt19937_64 rng(404);

  const double horizons[3] = {1.0, 3.5, 7.0};
  const int expected[3] = {0, 1, 2};
  for (int i = 0; i < 3; ++i) {
    const LQEdgeData lq = oscillator_lq().scaled(horizons[i]);
    const LinearHamiltonianSystem sys = jacobi_from_lq(lq);
    (void)audited_flow(sys);
    audit_edge_fixed_endpoint(lq);
    c.expect(conjugate_point_index(sys) == expected[i], "oscillator conjugate count");

    // Fine partition whose junctions avoid the conjugate instants.
    const DiscretizationResult fine = discretization_index(sys, uniform_partition(12));
    c.expect(fine.exact, "fine partition certifies exactness");
    c.expect(fine.lower_bound == expected[i], "fine partition reaches the index");

    // Coarse partitions stay below, refinement is monotone.
    int prev = std::numeric_limits<int>::min();
    for (int cells : {1, 2, 4, 8, 16}) {
      const DiscretizationResult dr = discretization_index(sys, uniform_partition(cells));
      c.expect(dr.lower_bound <= expected[i], "coarse bound below the index");
      c.expect(dr.lower_bound >= prev, "refinement is monotone");
      prev = dr.lower_bound;
    }
  }

  // Random LQ suite with an oracle cross-check.
  std::uniform_real_distribution<double> pick_len(0.8, 2.6);
  std::uniform_real_distribution<double> pick_curv(0.5, 1.5);
  for (int it = 0; it < 20; ++it) {
    const Index n = 1 + it % 2;
    const LQEdgeData lq = random_lq(rng, n, pick_curv(rng)).scaled(pick_len(rng));
    const LinearHamiltonianSystem sys = jacobi_from_lq(lq);
    (void)audited_flow(sys);
    audit_edge_fixed_endpoint(lq);
    SeparatedLQProblem p;
    p.edges = {lq};
    p.N0 = Mat(lq.n, 0);
    p.N1 = Mat(lq.n, 0);
    const int oracle = oracle_index(p).index;
    int prev = std::numeric_limits<int>::min();
    for (int cells : {1, 2, 4, 8, 16}) {
      const DiscretizationResult dr = discretization_index(sys, uniform_partition(cells));
      c.expect(dr.lower_bound <= oracle, "random bound below the oracle");
      c.expect(dr.lower_bound >= prev, "random refinement is monotone");
      if (dr.exact)
        c.expect(dr.lower_bound == oracle, "certified bound equals the oracle");
      prev = dr.lower_bound;
    }
  }

  note = c.note();
  return c.failed == 0;
}

// ---------------------------------------------------------------------------
// Criterion 5: the two iteration formulas agree, and match the periodic
// oracle for rotation monodromies.

int periodic_oscillator_index(double length) {
  const MetricGraph g = loop_graph(length);
  const BoundaryCondition bc = BoundaryCondition::per_vertex({Mat::Identity(1, 1)});
  return graph_oracle_index(g, 1, {oscillator_lq().scaled(length)}, bc).index;
}

bool criterion_iteration(std::string& note) {
  Checker c;
  std::mt19937_64 rng(505);

  for (int it = 0; it < 54; ++it) {
    const Index two_n = (it % 2 == 0) ? 2 : 4;
    const int k = 2 + it % 5;
    const Mat Theta = testutil::random_symplectic(rng, two_n);
    const IterationResult a = iteration_index_I(Theta, k);
    const IterationResult b = iteration_index_II(Theta, k);
    c.expect(a.total == b.total, "iteration forms agree (random)");
  }

  // Resonant monodromies: an eigenvalue sitting exactly at a k-th root of
  // unity in both dimensions.
  for (int k = 2; k <= 6; ++k) {
    const double a0 = 2 * std::numbers::pi / k;
    const Mat T2 = testutil::rotation2(a0);
    c.expect(iteration_index_I(T2, k).total == iteration_index_II(T2, k).total,
             "iteration forms agree (resonant, dim 2)");
    const Mat T4 = rotation_sum({a0, 0.9 + 0.2 * k});
    c.expect(iteration_index_I(T4, k).total == iteration_index_II(T4, k).total,
             "iteration forms agree (resonant, dim 4)");
  }

  // Rotation monodromies against the periodic oracle.
  const double angles[4] = {0.7, 2 * std::numbers::pi / 3, 1.9, 2.5};
  for (double alpha : angles) {
    const int base = periodic_oscillator_index(alpha);
    for (int k = 2; k <= 3; ++k) {
      const Mat Theta = testutil::rotation2(alpha);
      const IterationResult a = iteration_index_I(Theta, k);
      const IterationResult b = iteration_index_II(Theta, k);
      c.expect(a.total == b.total, "iteration forms agree (rotation)");
      const int iterated = periodic_oscillator_index(k * alpha);
      c.expect(a.total == iterated - k * base, "iteration total matches the oracle");
    }
  }

  note = c.note();
  return c.failed == 0;
}

// ---------------------------------------------------------------------------
// Criterion 6: circle index jumps sit at the unit-circle eigenvalues.

std::vector<double> unit_eigen_angles(const Mat& Theta) {
  Eigen::EigenSolver<Mat> es(Theta);
  std::vector<double> angles;
  for (Index i = 0; i < Theta.rows(); ++i) {
    const cplx lambda = es.eigenvalues()(i);
    if (std::abs(std::abs(lambda) - 1.0) > 1e-8) continue;
    double a = std::arg(lambda);
    if (a < 0) a += 2 * std::numbers::pi;
    if (a < 1e-6 || a > 2 * std::numbers::pi - 1e-6) continue;  // z = 1 excluded
    angles.push_back(a);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

Index circle_kernel_dim(const Mat& Theta, double angle) {
  const CMat D = Theta.cast<cplx>() -
                 std::polar(1.0, angle) * CMat::Identity(Theta.rows(), Theta.rows());
  Eigen::JacobiSVD<CMat> svd(D);
  svd.setThreshold(1e-7);
  return Theta.rows() - svd.rank();
}

bool criterion_circle(std::string& note) {
  Checker c;
  std::mt19937_64 rng(606);

  std::vector<Mat> thetas;
  thetas.push_back(testutil::rotation2(2.039));
  thetas.push_back(testutil::rotation2(0.35));
  thetas.push_back(rotation_sum({1.1, 2.7}));
  for (int rep = 0; rep < 6; ++rep)
    thetas.push_back(testutil::random_symplectic(rng, 2));
  for (int rep = 0; rep < 6; ++rep)
    thetas.push_back(testutil::random_symplectic(rng, 4));

  for (const Mat& Theta : thetas) {
    const Index two_n = Theta.rows();
    const std::vector<double> eigen_angles = unit_eigen_angles(Theta);
    const std::vector<CircleJump> jumps = circle_jumps(Theta);

    c.expect(static_cast<Index>(jumps.size()) <= two_n, "at most dim jumps");
    for (std::size_t j = 0; j + 1 < jumps.size(); ++j)
      c.expect(jumps[j].after == jumps[j + 1].before,
               "index is constant between jumps");

    // Every jump is at an eigenvalue angle, with bounded magnitude.
    for (const CircleJump& jump : jumps) {
      double best = std::numeric_limits<double>::infinity();
      double best_angle = 0.0;
      for (double a : eigen_angles) {
        if (std::abs(a - jump.angle) < best) {
          best = std::abs(a - jump.angle);
          best_angle = a;
        }
      }
      c.expect(best <= 1e-6, "jump sits on a unit-circle eigenvalue");
      if (best <= 1e-6) {
        c.expect(std::abs(jump.after - jump.before) <=
                     static_cast<int>(circle_kernel_dim(Theta, best_angle)),
                 "jump magnitude bounded by the eigenspace");
      }
    }

    // Every unit-circle eigenvalue produces a jump.
    for (double a : eigen_angles) {
      bool found = false;
      for (const CircleJump& jump : jumps)
        if (std::abs(jump.angle - a) <= 1e-6) found = true;
      c.expect(found, "eigenvalue angle is a jump location");
    }

    // The defining matrix is Hermitian as computed, not by symmetrization.
    for (int j = 0; j < 16; ++j) {
      const double a = 0.31 + j * (2 * std::numbers::pi - 0.62) / 15.0;
      const CMat M = circle_matrix(Theta, std::polar(1.0, a));
      const double defect = (M - M.adjoint()).cwiseAbs().maxCoeff();
      c.expect(defect <= 1e-12, "circle matrix is Hermitian");
    }
  }

  note = c.note();
  return c.failed == 0;
}

// ---------------------------------------------------------------------------
// Criterion 7: filtration totals are order-independent and match the
// comparison difference.

void check_filtration(Checker& c, const MetricGraph& g, Index n,
                      const std::vector<LQEdgeData>& data,
                      const std::vector<Mat>& frames, const std::string& what) {
  std::vector<Mat> thetas;
  for (const auto& lq : data) thetas.push_back(audited_flow(jacobi_from_lq(lq)));
  const ComparisonResult cmp =
      graph_comparison(g, n, thetas, BoundaryCondition::all_fixed(g, n),
                       BoundaryCondition::per_vertex(frames));
  std::vector<Index> order(static_cast<std::size_t>(g.num_vertices));
  for (Index v = 0; v < g.num_vertices; ++v) order[static_cast<std::size_t>(v)] = v;
  do {
    const FiltrationResult fr = filtration_contributions(g, n, thetas, frames, order);
    c.expect(fr.total == cmp.difference, what);
  } while (std::next_permutation(order.begin(), order.end()));
}

bool criterion_filtration(std::string& note) {
  Checker c;
  std::mt19937_64 rng(707);

  // Three-star with oscillator edges: free center, clamped leaves.
  {
    MetricGraph g;
    g.num_vertices = 4;
    g.edges = {{0, 1, 1.0}, {0, 2, 1.2}, {0, 3, 1.4}};
    std::vector<LQEdgeData> data;
    for (const auto& e : g.edges) data.push_back(oscillator_lq().scaled(e.length));
    const std::vector<Mat> frames = {Mat::Identity(1, 1), Mat(1, 0), Mat(1, 0),
                                     Mat(1, 0)};
    check_filtration(c, g, 1, data, frames, "star filtration total");
  }

  // Four-vertex path with planar states and mixed vertex frames.
  {
    MetricGraph g;
    g.num_vertices = 4;
    g.edges = {{0, 1, 1.8}, {1, 2, 1.7}, {2, 3, 0.9}};
    std::vector<LQEdgeData> data;
    for (const auto& e : g.edges)
      data.push_back(random_lq(rng, 2, 1.2).scaled(e.length));
    Mat v1(2, 1), v3(2, 1);
    v1 << 1.0, 0.5;
    v3 << 0.0, 1.0;
    const std::vector<Mat> frames = {Mat(2, 0), v1, Mat::Identity(2, 2), v3};
    check_filtration(c, g, 2, data, frames, "path filtration total");
  }

  note = c.note();
  return c.failed == 0;
}

// ---------------------------------------------------------------------------
// Criterion 8: flow quality and oracle cross-agreement, accumulated from the
// suites above.

bool criterion_flow_quality(std::string& note) {
  Checker c;
  c.expect(g_audit.flows >= 100, "enough flows were integrated");
  c.expect(g_audit.max_defect <= 1e-10, "symplectic defect within tolerance");
  c.expect(g_audit.edge_checks >= 70, "enough fixed-endpoint cross-checks ran");
  c.expect(g_audit.edge_mismatches == 0, "eigencount equals conjugate count");
  std::ostringstream os;
  os << c.note() << " [flows=" << g_audit.flows << " max_defect=" << g_audit.max_defect
     << " edge_checks=" << g_audit.edge_checks
     << " mismatches=" << g_audit.edge_mismatches << "]";
  note = os.str();
  return c.failed == 0;
}

// ---------------------------------------------------------------------------
// Criterion 9: the shipped fixtures reproduce their goldens byte-for-byte.

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool criterion_cli(std::string& note) {
  Checker c;
  const fs::path source = SYMIDX_SOURCE_DIR;
  const auto start = std::chrono::steady_clock::now();
  for (const char* family : {"interval", "loop", "star"}) {
    for (const char* task : {"compare", "discretize", "iterate", "oracle"}) {
      const std::string name = std::string(family) + "_" + task;
      const fs::path in = source / "tests" / "fixtures" / (name + ".json");
      const fs::path golden = source / "tests" / "golden" / (name + ".json");
      const fs::path out = fs::temp_directory_path() / ("symidx_acc_" + name + ".json");
      const int rc = run_cli({task, "--in", in.string(), "--out", out.string()});
      c.expect(rc == 0, name + " exits cleanly");
      c.expect(read_file(out) == read_file(golden), name + " matches its golden");
      fs::remove(out);
    }
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(elapsed < 30.0, "fixture matrix finishes inside 30 s");
  note = c.note();
  return c.failed == 0;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    bool (*fn)(std::string&);
  };
  const Criterion criteria[] = {
      {1, "Lagrangian triple-index identities", criterion_kashiwara},
      {2, "annihilator triples have vanishing Maslov form", criterion_annihilator},
      {3, "boundary comparison matches the Hessian oracle", criterion_comparison},
      {4, "discretization lower bounds and exactness", criterion_discretization},
      {5, "iteration formulas and the periodic oracle", criterion_iteration},
      {6, "circle index jumps at unit-circle eigenvalues", criterion_circle},
      {7, "vertex filtration sums to the comparison difference", criterion_filtration},
      {8, "flow quality and oracle cross-agreement", criterion_flow_quality},
      {9, "CLI fixtures reproduce goldens byte-for-byte", criterion_cli},
  };

  int failures = 0;
  for (const Criterion& cr : criteria) {
    std::string detail;
    bool ok = false;
    const auto start = std::chrono::steady_clock::now();
    try {
      ok = cr.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %d. %s (%.1fs)\n", ok ? "PASS" : "FAIL", cr.id, cr.name, secs);
    if (!ok) {
      std::printf("       %s\n", detail.c_str());
      ++failures;
    }
  }
  if (failures == 0)
    std::printf("all %d acceptance criteria passed\n",
                static_cast<int>(std::size(criteria)));
  else
    std::printf("%d acceptance criteria FAILED\n", failures);
  return failures;
}
