#include "symidx/jacobi.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <set>

namespace symidx {

Mat PolyMat::eval(double s) const {
  Mat out = Mat::Zero(rows(), cols());
  double p = 1.0;
  for (const Mat& c : coeffs) {
    out += p * c;
    p *= s;
  }
  return out;
}

PolyMat PolyMat::scaled(double a) const {
  PolyMat out = *this;
  for (Mat& c : out.coeffs) c *= a;
  return out;
}

PiecewiseMat PiecewiseMat::constant(const Mat& M, double t0, double t1) {
  return PiecewiseMat{{t0, t1}, {PolyMat{{M}}}};
}

void PiecewiseMat::validate(const std::string& module) const {
  if (breakpoints.size() < 2 || pieces.size() + 1 != breakpoints.size())
    throw schema_error(module, "piecewise matrix needs k+1 breakpoints for k pieces");
  for (size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i] < breakpoints[i + 1]))
      throw schema_error(module, "piecewise breakpoints must be strictly increasing");
    if (!std::isfinite(breakpoints[i]) || !std::isfinite(breakpoints[i + 1]))
      throw schema_error(module, "piecewise breakpoints must be finite");
  }
  const Index r = pieces.front().rows(), c = pieces.front().cols();
  for (const PolyMat& p : pieces) {
    if (p.coeffs.empty()) throw schema_error(module, "empty polynomial piece");
    for (const Mat& m : p.coeffs) {
      if (m.rows() != r || m.cols() != c)
        throw schema_error(module, "inconsistent matrix sizes across pieces");
      if (!m.allFinite()) throw schema_error(module, "non-finite matrix entry");
    }
  }
}

Mat PiecewiseMat::eval(double t) const {
  size_t i = 0;
  while (i + 2 < breakpoints.size() && t >= breakpoints[i + 1]) ++i;
  return pieces[i].eval(t - breakpoints[i]);
}

PiecewiseMat PiecewiseMat::scaled(double a) const {
  PiecewiseMat out = *this;
  for (PolyMat& p : out.pieces) p = p.scaled(a);
  return out;
}

void LQEdgeData::validate() const {
  if (n <= 0 || m <= 0) throw schema_error("jacobi", "LQ data needs positive state/control dims");
  A.validate("jacobi");
  B.validate("jacobi");
  W.validate("jacobi");
  S.validate("jacobi");
  R.validate("jacobi");
  auto dims = [&](const PiecewiseMat& M, Index r, Index c, const char* name) {
    if (M.rows() != r || M.cols() != c)
      throw schema_error("jacobi", std::string("LQ matrix ") + name + " has wrong shape");
  };
  dims(A, n, n, "A");
  dims(B, n, m, "B");
  dims(W, n, n, "W");
  dims(S, n, m, "S");
  dims(R, m, m, "R");
}

LQEdgeData LQEdgeData::scaled(double l) const {
  if (!(l > 0.0) || !std::isfinite(l))
    throw schema_error("jacobi", "edge length must be finite and positive");
  LQEdgeData out = *this;
  out.A = A.scaled(l);
  out.B = B.scaled(l);
  out.W = W.scaled(l);
  out.S = S.scaled(l);
  out.R = R.scaled(l);
  return out;
}

namespace {

// Union of smoothness breakpoints of the five LQ matrices.
std::vector<double> merged_breakpoints(const LQEdgeData& lq) {
  std::set<double> pts;
  for (const PiecewiseMat* M : {&lq.A, &lq.B, &lq.W, &lq.S, &lq.R})
    pts.insert(M->breakpoints.begin(), M->breakpoints.end());
  return {pts.begin(), pts.end()};
}

}  // namespace

LinearHamiltonianSystem jacobi_from_lq(const LQEdgeData& lq) {
  lq.validate();
  const Index n = lq.n;
  std::vector<double> bps = merged_breakpoints(lq);

  // Legendre condition: R(t) must be positive definite. Sampled on each
  // smooth piece (endpoints and interior points); piecewise-polynomial data
  // cannot hide a sign flip from this many samples at desk scales.
  for (size_t i = 0; i + 1 < bps.size(); ++i) {
    for (double u : {0.0, 0.21132486540518713, 0.5, 0.7886751345948129, 1.0}) {
      const double t = bps[i] + u * (bps[i + 1] - bps[i]);
      Mat R = lq.R.eval(t);
      if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, R.norm()))
        throw precondition_error("jacobi", "R(t) is not symmetric");
      Eigen::LDLT<Mat> ldlt(R);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
          ldlt.vectorD().minCoeff() <= 0.0)
        throw precondition_error("jacobi", "Legendre condition failed: R(t) not positive definite");
    }
  }

  LinearHamiltonianSystem sys;
  sys.n = n;
  sys.t0 = bps.front();
  sys.t1 = bps.back();
  sys.breakpoints = bps;
  LQEdgeData data = lq;  // capture by value
  sys.H = [data, n](double t) {
    Mat A = data.A.eval(t), B = data.B.eval(t), W = data.W.eval(t), S = data.S.eval(t),
        R = data.R.eval(t);
    Eigen::LDLT<Mat> Rinv(R);
    Mat RiBt = Rinv.solve(B.transpose());
    Mat RiSt = Rinv.solve(S.transpose());
    Mat H(2 * n, 2 * n);
    H.topLeftCorner(n, n) = B * RiBt;
    H.topRightCorner(n, n) = A - B * RiSt;
    H.bottomLeftCorner(n, n) = H.topRightCorner(n, n).transpose();
    H.bottomRightCorner(n, n) = -(W - S * RiSt);
    return H;
  };
  return sys;
}

namespace {

// One Magnus step of order 4 on [t, t+h] for z' = J H(t) z: two-point
// Gauss-Legendre collocation, exponentiated. J H is Hamiltonian, so the
// exponential is symplectic to machine precision.
Mat magnus_step(const LinearHamiltonianSystem& sys, const Mat& J, double t, double h) {
  static const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  static const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
  Mat A1 = J * sys.H(t + c1 * h);
  Mat A2 = J * sys.H(t + c2 * h);
  Mat Omega = 0.5 * h * (A1 + A2) +
              (std::sqrt(3.0) / 12.0) * h * h * (A2 * A1 - A1 * A2);
  return Omega.exp();
}

// Integrate across [a, b] with N uniform Magnus steps.
Mat integrate_piece(const LinearHamiltonianSystem& sys, const Mat& J, double a, double b,
                    int N) {
  Mat Theta = Mat::Identity(2 * sys.n, 2 * sys.n);
  const double h = (b - a) / N;
  for (int i = 0; i < N; ++i) Theta = magnus_step(sys, J, a + i * h, h) * Theta;
  return Theta;
}

}  // namespace

FlowResult integrate_flow(const LinearHamiltonianSystem& sys,
                          const std::vector<double>& checkpoint_times, double tol,
                          const Tolerances& tols) {
  if (sys.n <= 0) throw schema_error("jacobi", "flow needs a positive half-dimension");
  if (!(sys.t0 < sys.t1)) throw schema_error("jacobi", "flow needs t0 < t1");
  const Index d = 2 * sys.n;
  const Mat J = SymplecticSpace::standard(d).form;

  // Integration nodes: breakpoints plus requested checkpoints.
  std::set<double> nodes(sys.breakpoints.begin(), sys.breakpoints.end());
  nodes.insert(sys.t0);
  nodes.insert(sys.t1);
  for (double t : checkpoint_times) {
    if (t < sys.t0 - 1e-12 || t > sys.t1 + 1e-12)
      throw schema_error("jacobi", "checkpoint outside the integration interval");
    nodes.insert(std::clamp(t, sys.t0, sys.t1));
  }
  std::vector<double> grid(nodes.begin(), nodes.end());

  FlowResult out;
  out.Theta = Mat::Identity(d, d);
  std::vector<std::pair<double, Mat>> at_nodes;
  at_nodes.emplace_back(grid.front(), out.Theta);

  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    const double a = grid[i], b = grid[i + 1];
    if (b - a < 1e-15) {
      at_nodes.emplace_back(b, out.Theta);
      continue;
    }
    int N = 4;
    Mat coarse = integrate_piece(sys, J, a, b, N);
    Mat fine;
    for (;;) {
      fine = integrate_piece(sys, J, a, b, 2 * N);
      const double err = (fine - coarse).cwiseAbs().maxCoeff() /
                         std::max(1.0, fine.cwiseAbs().maxCoeff());
      if (err <= tol) break;
      if (N >= (1 << 17))
        throw stabilization_error("jacobi", "flow integration failed to reach tolerance");
      N *= 2;
      coarse = fine;
    }
    out.Theta = fine * out.Theta;
    at_nodes.emplace_back(b, out.Theta);
  }

  out.symplectic_defect = symplectic_defect(SymplecticSpace::standard(d), out.Theta);
  if (out.symplectic_defect > tols.symplectic_defect)
    throw stabilization_error("jacobi", "flow lost symplecticity beyond tolerance");

  // Report requested checkpoints in call order.
  for (double t : checkpoint_times) {
    const double tc = std::clamp(t, sys.t0, sys.t1);
    auto it = std::lower_bound(grid.begin(), grid.end(), tc - 1e-14);
    const size_t k = static_cast<size_t>(it - grid.begin());
    out.checkpoints.emplace_back(t, at_nodes[k].second);
  }
  return out;
}

namespace {

// Singular values of the conjugacy block: the base (x) rows of Theta_t
// restricted to the vertical Pi (p columns).
Vec conjugacy_singvals(const Mat& Theta, Index n) {
  Mat C = Theta.block(n, 0, n, n);
  return Eigen::JacobiSVD<Mat>(C).singularValues();
}

double conjugacy_det(const Mat& Theta, Index n) {
  return Theta.block(n, 0, n, n).determinant();
}

}  // namespace

std::vector<ConjugatePoint> conjugate_times(const LinearHamiltonianSystem& sys, double t_tol,
                                            int scan_points, const Tolerances& tols) {
  if (scan_points < 8) throw schema_error("jacobi", "conjugate scan needs at least 8 points");
  const Index n = sys.n;

  std::vector<double> grid(scan_points + 1);
  for (int i = 0; i <= scan_points; ++i)
    grid[i] = sys.t0 + (sys.t1 - sys.t0) * i / scan_points;
  FlowResult flow = integrate_flow(sys, grid, 1e-12, tols);

  std::vector<Mat> Th(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) Th[i] = flow.checkpoints[i].second;

  double theta_scale = 1.0;
  for (const Mat& T : Th) theta_scale = std::max(theta_scale, T.cwiseAbs().maxCoeff());

  // Flow from a grid node to an arbitrary time (for refinement).
  auto theta_at = [&](double t) -> Mat {
    size_t i = 0;
    while (i + 1 < grid.size() && grid[i + 1] <= t + 1e-15) ++i;
    if (std::abs(grid[i] - t) < 1e-15) return Th[i];
    LinearHamiltonianSystem part = sys;
    part.t0 = grid[i];
    part.t1 = t;
    part.breakpoints.clear();
    for (double b : sys.breakpoints)
      if (b > part.t0 && b < part.t1) part.breakpoints.push_back(b);
    part.breakpoints.insert(part.breakpoints.begin(), part.t0);
    part.breakpoints.push_back(part.t1);
    return integrate_flow(part, {}, 1e-12, tols).Theta * Th[i];
  };
  auto sig_min = [&](double t) { return conjugacy_singvals(theta_at(t), n).minCoeff(); };

  const double eps = std::numeric_limits<double>::epsilon();
  const double thr = std::max(64.0 * 2 * n * eps * theta_scale, 1e-11);
  // Internal refinement resolution: tight enough that a genuine zero drives
  // the singular value below `thr` (reporting accuracy stays at t_tol).
  const double rt = std::max(1e-13 * (sys.t1 - sys.t0), 4 * std::numeric_limits<double>::epsilon());

  std::vector<double> candidates;
  std::vector<double> dets(grid.size()), smin(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    dets[i] = conjugacy_det(Th[i], n);
    smin[i] = conjugacy_singvals(Th[i], n).minCoeff();
  }

  // Bisection on determinant sign changes (odd-multiplicity crossings).
  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    if (dets[i] == 0.0 || dets[i + 1] == 0.0) continue;  // handled by dips
    if ((dets[i] > 0) == (dets[i + 1] > 0)) continue;
    double lo = grid[i], hi = grid[i + 1];
    double flo = dets[i];
    while (hi - lo > rt) {
      const double mid = 0.5 * (lo + hi);
      const double fm = conjugacy_det(theta_at(mid), n);
      if ((fm > 0) == (flo > 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    candidates.push_back(0.5 * (lo + hi));
  }

  // Golden-section dips of the smallest singular value catch even-order
  // touches that the determinant cannot see.
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (size_t i = 1; i + 1 < grid.size(); ++i) {
    if (!(smin[i] <= smin[i - 1] && smin[i] <= smin[i + 1])) continue;
    if (smin[i] > 1e-3 * theta_scale) continue;
    double a = grid[i - 1], b = grid[i + 1];
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = sig_min(x1), f2 = sig_min(x2);
    while (b - a > rt) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = sig_min(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = sig_min(x2);
      }
    }
    candidates.push_back(0.5 * (a + b));
  }
  // The final endpoint cannot host a smin dip pattern; test it directly.
  if (smin.back() <= thr) candidates.push_back(grid.back());

  std::sort(candidates.begin(), candidates.end());
  std::vector<ConjugatePoint> out;
  for (double t : candidates) {
    if (t <= sys.t0 + t_tol) continue;  // the start point is trivially degenerate
    if (!out.empty() && std::abs(out.back().t - t) <= 10 * t_tol) continue;
    Vec sv = conjugacy_singvals(theta_at(t), n);
    Index mult = 0;
    for (Index k = 0; k < sv.size(); ++k)
      if (sv(k) <= thr) ++mult;
    if (mult == 0) continue;  // refined dip did not reach zero: not conjugate
    bool marginal = false;
    for (Index k = 0; k < sv.size(); ++k)
      if (sv(k) > thr && sv(k) < 100 * thr) marginal = true;
    out.push_back(ConjugatePoint{t, mult, marginal});
  }
  return out;
}

int conjugate_point_index(const LinearHamiltonianSystem& sys, bool* final_degenerate,
                          const Tolerances& tols) {
  std::vector<ConjugatePoint> pts = conjugate_times(sys, 1e-9, 256, tols);
  int index = 0;
  bool degen = false;
  const double end_window = 1e-7 * (sys.t1 - sys.t0);
  for (const ConjugatePoint& p : pts) {
    if (p.t >= sys.t1 - end_window) {
      degen = true;
    } else {
      index += static_cast<int>(p.multiplicity);
    }
  }
  if (final_degenerate) *final_degenerate = degen;
  return index;
}

Index bvp_solution_dim(const Mat& Theta, const Mat& L_start, const Mat& L_end,
                       const Tolerances& tols) {
  if (L_start.cols() == 0) return 0;
  Mat Qe = orthonormal_span<double>(L_end, tols);
  Mat M = Theta * L_start;
  Mat resid = M - Qe * (Qe.transpose() * M);
  return L_start.cols() - matrix_rank<double>(resid, tols);
}

}  // namespace symidx
