#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bpfd/field.hpp"
#include "bpfd/grid.hpp"
#include "bpfd/operators.hpp"

namespace bpfd {

struct KrylovConfig {
  double rtol = 1e-10;
  int max_iter = 0;  // 0 means 10 * sqrt(dimension)
};

struct KrylovResult {
  std::vector<double> x;
  int iterations = 0;
  double residual = 0.0;
};

struct MaxIterExceeded : std::runtime_error {
  std::vector<double> best;
  double residual;
  MaxIterExceeded(std::vector<double> b, double r)
      : std::runtime_error("bicgstab: max iterations exceeded"),
        best(std::move(b)),
        residual(r) {}
};

struct Breakdown : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using LinOp = std::function<void(std::span<const double>, std::span<double>)>;

/// Preconditioned BiCGSTAB for a matrix-free operator. `precond` may be
/// empty (identity). Converges when ||b - A x||_2 <= rtol ||b||_2. A
/// breakdown (rho or omega vanishing) triggers one restart with a fresh
/// shadow vector; a second breakdown is a hard error.
inline KrylovResult bicgstab(int n, const LinOp& apply,
                             std::span<const double> b, const LinOp& precond,
                             KrylovConfig cfg = {}) {
  if (static_cast<int>(b.size()) != n)
    throw std::invalid_argument("bicgstab: dimension mismatch");
  if (!(cfg.rtol > 0.0 && cfg.rtol < 1.0))
    throw std::invalid_argument("bicgstab: rtol out of (0,1)");
  int max_iter = cfg.max_iter > 0
                     ? cfg.max_iter
                     : 10 * static_cast<int>(std::ceil(std::sqrt(double(n))));

  auto dot = [n](std::span<const double> a, std::span<const double> c) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * c[i];
    return s;
  };
  auto nrm = [&](std::span<const double> a) { return std::sqrt(dot(a, a)); };

  double bnorm = nrm(b);
  KrylovResult res;
  res.x.assign(n, 0.0);
  if (bnorm == 0.0) return res;
  double target = cfg.rtol * bnorm;

  std::vector<double> r(b.begin(), b.end());  // x0 = 0
  std::vector<double> rhat = r;
  std::vector<double> p(n, 0.0), v(n, 0.0), phat(n), shat(n), s(n), t(n);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  bool restarted = false;

  std::vector<double> best_x = res.x;
  double best_res = nrm(r);
  double breakdown_eps = 1e-30;

  auto maybe_precond = [&](std::span<const double> in, std::span<double> out) {
    if (precond)
      precond(in, out);
    else
      std::copy(in.begin(), in.end(), out.begin());
  };

  for (int it = 1; it <= max_iter; ++it) {
    double rho_new = dot(rhat, r);
    if (std::abs(rho_new) < breakdown_eps * bnorm * bnorm ||
        (it > 1 && std::abs(omega) < breakdown_eps)) {
      if (restarted) throw Breakdown("bicgstab: repeated breakdown");
      restarted = true;
      rhat = r;
      rho = alpha = omega = 1.0;
      std::fill(p.begin(), p.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      rho_new = dot(rhat, r);
      if (std::abs(rho_new) < breakdown_eps * bnorm * bnorm)
        throw Breakdown("bicgstab: breakdown after restart");
    }
    double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (int i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    maybe_precond(p, phat);
    apply(phat, v);
    double rhat_v = dot(rhat, v);
    if (std::abs(rhat_v) < breakdown_eps) {
      if (restarted) throw Breakdown("bicgstab: stagnation (rhat,v)=0");
      restarted = true;
      rhat = r;
      rho = alpha = omega = 1.0;
      std::fill(p.begin(), p.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      continue;
    }
    alpha = rho / rhat_v;
    for (int i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    double snorm = nrm(s);
    if (snorm <= target) {
      for (int i = 0; i < n; ++i) res.x[i] += alpha * phat[i];
      res.iterations = it;
      res.residual = snorm;
      return res;
    }
    maybe_precond(s, shat);
    apply(shat, t);
    double tt = dot(t, t);
    omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
    for (int i = 0; i < n; ++i) {
      res.x[i] += alpha * phat[i] + omega * shat[i];
      r[i] = s[i] - omega * t[i];
    }
    double rnorm = nrm(r);
    if (rnorm < best_res) {
      best_res = rnorm;
      best_x = res.x;
    }
    if (rnorm <= target) {
      res.iterations = it;
      res.residual = rnorm;
      return res;
    }
  }
  throw MaxIterExceeded(std::move(best_x), best_res);
}

namespace detail {

/// Interior 1D matrix T = -(D2 restricted to interior columns): the
/// positive-definite (Dirichlet) or positive-semidefinite (periodic)
/// second-difference operator, so that the zero-velocity scheme reads
/// (alpha I + dt mu (T_x (x) I + I (x) T_y)) phi = rhs.
inline Eigen::MatrixXd interior_t_matrix(const Grid1D& g, int order) {
  DiffOps1D ops = build_ops_1d(g, order);
  int n = g.n;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (int r = 0; r < n; ++r) {
    int i = g.periodic() ? r : r + 1;
    StencilRow sr = ops.d2_row(i);
    for (int k = 0; k < sr.m; ++k) {
      int ci = i + sr.off[k];
      if (g.periodic()) {
        T(r, g.wrap(ci)) += sr.c[k] / (g.h * g.h);
      } else if (ci >= 1 && ci <= n) {
        T(r, ci - 1) += sr.c[k] / (g.h * g.h);
      }
      // Dirichlet boundary columns are folded into the right-hand side.
    }
  }
  return T;
}

/// Lumped-mass weight vector making diag(m) T symmetric. The fourth-order
/// scheme needs the parity weights 4/3, 2/3; the classical order-2 matrix is
/// already symmetric, so uniform weights keep it that way.
inline Eigen::VectorXd symmetrizing_weights(const Grid1D& g, int order) {
  Eigen::VectorXd m(g.n);
  if (order == 2) {
    m.setOnes();
    return m;
  }
  for (int r = 0; r < g.n; ++r) {
    int i = g.periodic() ? r : r + 1;
    m(r) = (i % 2 == 1) ? 4.0 / 3.0 : 2.0 / 3.0;
  }
  return m;
}

struct AxisEig {
  Eigen::VectorXd lambda;      // eigenvalues of T
  Eigen::MatrixXd fwd;         // U^T M^{1/2}
  Eigen::MatrixXd bwd;         // M^{-1/2} U
};

inline AxisEig axis_eigensystem(const Grid1D& g, int order) {
  Eigen::MatrixXd T = interior_t_matrix(g, order);
  Eigen::VectorXd m = symmetrizing_weights(g, order);
  Eigen::VectorXd ms = m.array().sqrt();
  Eigen::MatrixXd W =
      ms.asDiagonal() * T * ms.cwiseInverse().asDiagonal();
  // Symmetrize against round-off before the solver.
  W = 0.5 * (W + W.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("axis_eigensystem: eigen decomposition failed");
  AxisEig e;
  e.lambda = es.eigenvalues();
  e.fwd = es.eigenvectors().transpose() * ms.asDiagonal();
  e.bwd = ms.cwiseInverse().asDiagonal() * es.eigenvectors();
  return e;
}

}  // namespace detail

/// Fast inverse of the zero-velocity operator
///   alpha I + dt mu (-D2x - D2y)
/// on interior vectors (interior_flatten order), by per-axis eigen
/// decomposition of the symmetrized 1D second-difference matrices.
struct LaplacianPrecond {
  int nx = 0, ny = 0;
  double alpha = 1.0, mu = 0.0, dt = 0.0;
  detail::AxisEig ex, ey;
  Eigen::ArrayXXd denom;  // ny x nx: alpha + dt mu (lambda_y + lambda_x)

  LaplacianPrecond() = default;
  LaplacianPrecond(const Grid2D& g, double mu_, double dt_, int order,
                   double alpha_ = 1.0)
      : nx(interior_nx(g)),
        ny(interior_ny(g)),
        alpha(alpha_),
        mu(mu_),
        dt(dt_) {
    ex = detail::axis_eigensystem(g.gx, order);
    ey = detail::axis_eigensystem(g.gy, order);
    denom.resize(ny, nx);
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j)
        denom(j, i) = alpha + dt * mu * (ey.lambda(j) + ex.lambda(i));
  }

  void apply(std::span<const double> in, std::span<double> out) const {
    Eigen::Map<const Eigen::MatrixXd> B(in.data(), ny, nx);
    Eigen::MatrixXd G = ey.fwd * B * ex.fwd.transpose();
    G.array() /= denom;
    Eigen::Map<Eigen::MatrixXd>(out.data(), ny, nx) =
        ey.bwd * G * ex.bwd.transpose();
  }

  LinOp as_linop() const {
    return [this](std::span<const double> in, std::span<double> out) {
      apply(in, out);
    };
  }
};

inline LaplacianPrecond build_laplacian_precond(const Grid2D& g, double mu,
                                                double dt, int order,
                                                double alpha = 1.0) {
  return LaplacianPrecond(g, mu, dt, order, alpha);
}

struct IncompatibleRHS : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Solve the discrete Poisson equation  Delta psi = omega  with the scheme's
/// D2 operators: Dirichlet (homogeneous boundary) or periodic (zero-mean
/// gauge). `omega` is given at interior points in interior_flatten order;
/// the result is a full field with the boundary ring set to zero.
inline Field2D poisson_solve(std::span<const double> omega, const Grid2D& g,
                             int order) {
  int nx = interior_nx(g), ny = interior_ny(g);
  if (static_cast<int>(omega.size()) != nx * ny)
    throw std::invalid_argument("poisson_solve: size mismatch");
  detail::AxisEig ex = detail::axis_eigensystem(g.gx, order);
  detail::AxisEig ey = detail::axis_eigensystem(g.gy, order);

  // (T_x (x) I + I (x) T_y) psi = -omega
  Eigen::Map<const Eigen::MatrixXd> B(omega.data(), ny, nx);
  Eigen::MatrixXd G = ey.fwd * (-B) * ex.fwd.transpose();
  double wscale = G.cwiseAbs().maxCoeff();
  double lscale = std::max(ex.lambda.cwiseAbs().maxCoeff(),
                           ey.lambda.cwiseAbs().maxCoeff());
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      double d = ey.lambda(j) + ex.lambda(i);
      if (std::abs(d) <= 1e-12 * lscale) {
        // Null mode of the discrete Laplacian: the data must be orthogonal
        // to it (compatibility); the solution component is gauged to zero.
        if (std::abs(G(j, i)) > 1e-12 * std::max(wscale, 1e-300))
          throw IncompatibleRHS("poisson_solve: rhs not orthogonal to the "
                                "discrete null space");
        G(j, i) = 0.0;
      } else {
        G(j, i) /= d;
      }
    }
  Eigen::MatrixXd Psi = ey.bwd * G * ex.bwd.transpose();

  Field2D psi(g);
  for (int k = 0; k < nx * ny; ++k)
    psi(interior_i(g, k), interior_j(g, k)) =
        Psi(k % ny, k / ny);
  if (g.periodic()) {
    double mean = psi.quadrature_mean();
    for (double& x : psi.v) x -= mean;
  }
  return psi;
}

}  // namespace bpfd
