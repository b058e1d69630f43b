#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "bpfd/field.hpp"
#include "bpfd/grid.hpp"
#include "bpfd/sparse.hpp"

namespace bpfd {

/// One banded row, stored as unscaled rational coefficients plus offsets.
/// The global scale (1/(2h) or -1/h^2) is applied after the dot product so
/// that row sums against the all-ones vector cancel exactly in floating
/// point.
struct StencilRow {
  int m = 0;
  int off[5] = {0, 0, 0, 0, 0};
  double c[5] = {0, 0, 0, 0, 0};
};

/// The 1D difference matrices of the quadratic-element scheme (order 4) or
/// the classical centered scheme (order 2), exposed row by row. d1 rows
/// approximate d/dx with global scale 1/(2h); d2 rows approximate d^2/dx^2
/// with global scale -1/h^2 applied to the printed coefficients.
struct DiffOps1D {
  int order = 4;
  Bc bc = Bc::Dirichlet;
  int n = 0;  // interior count (Dirichlet) or total count (periodic)
  double h = 0.0;
  double d1_scale = 0.0;
  double d2_scale = 0.0;

  bool five_point_row(int i) const { return order == 4 && i % 2 == 0; }

  StencilRow d1_row(int i) const {
    StencilRow r;
    if (five_point_row(i)) {
      r.m = 4;
      r.off[0] = -2; r.off[1] = -1; r.off[2] = 1; r.off[3] = 2;
      r.c[0] = 0.5; r.c[1] = -2.0; r.c[2] = 2.0; r.c[3] = -0.5;
    } else {
      r.m = 2;
      r.off[0] = -1; r.off[1] = 1;
      r.c[0] = -1.0; r.c[1] = 1.0;
    }
    return r;
  }

  StencilRow d2_row(int i) const {
    StencilRow r;
    if (five_point_row(i)) {
      r.m = 5;
      r.off[0] = -2; r.off[1] = -1; r.off[2] = 0; r.off[3] = 1; r.off[4] = 2;
      r.c[0] = 0.25; r.c[1] = -2.0; r.c[2] = 3.5; r.c[3] = -2.0; r.c[4] = 0.25;
    } else {
      r.m = 3;
      r.off[0] = -1; r.off[1] = 0; r.off[2] = 1;
      r.c[0] = -1.0; r.c[1] = 2.0; r.c[2] = -1.0;
    }
    return r;
  }

  /// Dense n x (n+2) (Dirichlet) or n x n (periodic) realization, scaled.
  std::vector<std::vector<double>> dense(bool second_derivative) const {
    int cols = bc == Bc::Dirichlet ? n + 2 : n;
    std::vector<std::vector<double>> m(n, std::vector<double>(cols, 0.0));
    double scale = second_derivative ? d2_scale : d1_scale;
    for (int r = 0; r < n; ++r) {
      int i = bc == Bc::Dirichlet ? r + 1 : r;
      StencilRow sr = second_derivative ? d2_row(i) : d1_row(i);
      for (int k = 0; k < sr.m; ++k) {
        int cidx = i + sr.off[k];
        if (bc == Bc::Periodic) cidx = ((cidx % n) + n) % n;
        m[r][cidx] += scale * sr.c[k];
      }
    }
    return m;
  }
};

inline DiffOps1D build_ops_1d(const Grid1D& g, int order) {
  if (order != 2 && order != 4)
    throw std::invalid_argument("build_ops_1d: order must be 2 or 4");
  if (order == 4) {
    if (g.bc == Bc::Dirichlet && g.n % 2 == 0)
      throw std::invalid_argument("build_ops_1d: order 4 needs odd n");
    if (g.bc == Bc::Periodic && g.n % 2 != 0)
      throw std::invalid_argument("build_ops_1d: periodic order 4 needs even n");
  }
  DiffOps1D ops;
  ops.order = order;
  ops.bc = g.bc;
  ops.n = g.n;
  ops.h = g.h;
  ops.d1_scale = 1.0 / (2.0 * g.h);
  ops.d2_scale = -1.0 / (g.h * g.h);
  return ops;
}

/// Full (n+2) x (n+2) Neumann matrices of the 1D derivation, unscaled
/// (multiply by 1/(2h) resp. -1/h^2). Test fixture only; the one-sided
/// boundary rows take no part in the monotonicity engine.
inline std::vector<std::vector<double>> neumann_matrix_unscaled(
    int n, bool second_derivative) {
  int sz = n + 2;
  std::vector<std::vector<double>> m(sz, std::vector<double>(sz, 0.0));
  auto set = [&](int r, std::initializer_list<std::pair<int, double>> e) {
    for (auto& [c, v] : e) m[r][c] = v;
  };
  if (!second_derivative) {
    set(0, {{0, -3.0}, {1, 4.0}, {2, -1.0}});
    set(sz - 1, {{sz - 3, 1.0}, {sz - 2, -4.0}, {sz - 1, 3.0}});
  } else {
    set(0, {{0, 3.5}, {1, -4.0}, {2, 0.5}});
    set(sz - 1, {{sz - 3, 0.5}, {sz - 2, -4.0}, {sz - 1, 3.5}});
  }
  DiffOps1D ops;
  ops.order = 4;
  for (int i = 1; i <= n; ++i) {
    StencilRow sr = second_derivative ? ops.d2_row(i) : ops.d1_row(i);
    for (int k = 0; k < sr.m; ++k) m[i][i + sr.off[k]] += sr.c[k];
  }
  return m;
}

/// Interior index space used by the linear solvers: x-major over interior
/// points (all points on periodic grids).
inline int interior_nx(const Grid2D& g) {
  return g.periodic() ? g.gx.n : g.gx.n;
}
inline int interior_ny(const Grid2D& g) {
  return g.periodic() ? g.gy.n : g.gy.n;
}
inline int interior_count(const Grid2D& g) {
  return interior_nx(g) * interior_ny(g);
}
inline int interior_flatten(const Grid2D& g, int i, int j) {
  return g.periodic() ? i * g.gy.n + j : (i - 1) * g.gy.n + (j - 1);
}
inline int interior_i(const Grid2D& g, int k) {
  return g.periodic() ? k / g.gy.n : k / g.gy.n + 1;
}
inline int interior_j(const Grid2D& g, int k) {
  return g.periodic() ? k % g.gy.n : k % g.gy.n + 1;
}

/// The scheme operator (1 + S*dt)*phi
///   + dt * [ u .* D1x phi + v .* D1y phi - mu * (D2x + D2y) phi ]
/// applied matrix-free. With dt = 1, s = 0 this is the steady elliptic
/// operator; with dt the time step it is the backward-Euler / IMEX system
/// operator. vel == nullptr means zero velocity.
struct ConvDiffOp {
  Grid2D grid;
  int order = 4;
  double mu = 1.0;
  double dt = 1.0;
  double s = 0.0;
  const VelocityField* vel = nullptr;
  DiffOps1D ox, oy;

  ConvDiffOp() = default;
  ConvDiffOp(const Grid2D& g, int order_, double mu_, double dt_, double s_,
             const VelocityField* vel_)
      : grid(g), order(order_), mu(mu_), dt(dt_), s(s_), vel(vel_) {
    if (mu <= 0.0 || dt <= 0.0 || s < 0.0)
      throw std::invalid_argument("ConvDiffOp: need mu > 0, dt > 0, s >= 0");
    ox = build_ops_1d(g.gx, order);
    oy = build_ops_1d(g.gy, order);
  }

  /// c = h^2 / (mu * dt), the dimensionless group of the monotonicity theory.
  double c_value() const { return grid.gx.h * grid.gx.h / (mu * dt); }

  double point_value(const Field2D& phibar, int i, int j) const {
    const Grid1D& gx = grid.gx;
    const Grid1D& gy = grid.gy;
    StencilRow r1x = ox.d1_row(i), r2x = ox.d2_row(i);
    StencilRow r1y = oy.d1_row(j), r2y = oy.d2_row(j);
    auto px = [&](int ii) {
      return phibar(gx.periodic() ? gx.wrap(ii) : ii, j);
    };
    auto py = [&](int jj) {
      return phibar(i, gy.periodic() ? gy.wrap(jj) : jj);
    };
    double d1x = 0, d2x = 0, d1y = 0, d2y = 0;
    for (int k = 0; k < r1x.m; ++k) d1x += r1x.c[k] * px(i + r1x.off[k]);
    for (int k = 0; k < r2x.m; ++k) d2x += r2x.c[k] * px(i + r2x.off[k]);
    for (int k = 0; k < r1y.m; ++k) d1y += r1y.c[k] * py(j + r1y.off[k]);
    for (int k = 0; k < r2y.m; ++k) d2y += r2y.c[k] * py(j + r2y.off[k]);
    double uu = vel ? vel->u(i, j) : 0.0;
    double vv = vel ? vel->v(i, j) : 0.0;
    double conv = uu * (ox.d1_scale * d1x) + vv * (oy.d1_scale * d1y);
    double diff = mu * (ox.d2_scale * d2x + oy.d2_scale * d2y);
    return (1.0 + s * dt) * phibar(i, j) + dt * (conv - diff);
  }

  /// Interior rows of the operator, returned in interior_flatten order.
  void apply_interior_field(const Field2D& phibar,
                            std::span<double> out) const {
    phibar.for_each_interior([&](int i, int j) {
      out[interior_flatten(grid, i, j)] = point_value(phibar, i, j);
    });
  }

  /// Full L-bar: interior rows are the scheme, boundary rows the identity.
  Field2D apply_Lbar(const Field2D& phibar) const {
    Field2D out = phibar;  // boundary ring copied (identity rows)
    phibar.for_each_interior(
        [&](int i, int j) { out(i, j) = point_value(phibar, i, j); });
    return out;
  }

  /// Operator action on an interior-only vector with zero (or the given
  /// ring field's) boundary values; used by the Krylov solver.
  void apply_interior_vec(std::span<const double> x,
                          std::span<double> y) const {
    Field2D tmp(grid);
    for (int k = 0; k < interior_count(grid); ++k)
      tmp(interior_i(grid, k), interior_j(grid, k)) = x[k];
    apply_interior_field(tmp, y);
  }

  /// Assembled sparse matrix over all grid points (boundary rows identity),
  /// in Grid2D::flatten ordering.
  Csr assemble() const {
    CsrBuilder b(grid.total_points());
    const Grid1D& gx = grid.gx;
    const Grid1D& gy = grid.gy;
    Field2D probe(grid);  // only for interior iteration
    if (!grid.periodic()) {
      for (int i = 0; i < gx.total(); ++i)
        for (int j = 0; j < gy.total(); ++j)
          if (gx.is_boundary(i) || gy.is_boundary(j))
            b.add(grid.flatten(i, j), grid.flatten(i, j), 1.0);
    }
    probe.for_each_interior([&](int i, int j) {
      int row = grid.flatten(i, j);
      double uu = vel ? vel->u(i, j) : 0.0;
      double vv = vel ? vel->v(i, j) : 0.0;
      b.add(row, row, 1.0 + s * dt);
      StencilRow r1x = ox.d1_row(i), r2x = ox.d2_row(i);
      StencilRow r1y = oy.d1_row(j), r2y = oy.d2_row(j);
      auto colx = [&](int ii) {
        return grid.flatten(gx.periodic() ? gx.wrap(ii) : ii, j);
      };
      auto coly = [&](int jj) {
        return grid.flatten(i, gy.periodic() ? gy.wrap(jj) : jj);
      };
      for (int k = 0; k < r1x.m; ++k)
        b.add(row, colx(i + r1x.off[k]), dt * uu * ox.d1_scale * r1x.c[k]);
      for (int k = 0; k < r2x.m; ++k)
        b.add(row, colx(i + r2x.off[k]), -dt * mu * ox.d2_scale * r2x.c[k]);
      for (int k = 0; k < r1y.m; ++k)
        b.add(row, coly(j + r1y.off[k]), dt * vv * oy.d1_scale * r1y.c[k]);
      for (int k = 0; k < r2y.m; ++k)
        b.add(row, coly(j + r2y.off[k]), -dt * mu * oy.d2_scale * r2y.c[k]);
    });
    return b.build();
  }
};

/// 1D scheme matrix phi + dt*(u*D1 - mu*D2) phi over all grid points,
/// boundary rows identity. `u` is indexed by grid index (size total()); pass
/// an empty span for zero velocity.
inline Csr assemble_conv_diff_1d(const Grid1D& g, int order, double mu,
                                 double dt, std::span<const double> u = {}) {
  DiffOps1D ops = build_ops_1d(g, order);
  CsrBuilder b(g.total());
  auto colof = [&](int i) { return g.periodic() ? g.wrap(i) : i; };
  if (!g.periodic()) {
    b.add(0, 0, 1.0);
    b.add(g.n + 1, g.n + 1, 1.0);
  }
  int lo = g.periodic() ? 0 : 1;
  int hi = g.periodic() ? g.n - 1 : g.n;
  for (int i = lo; i <= hi; ++i) {
    double ui = u.empty() ? 0.0 : u[i];
    b.add(i, i, 1.0);
    StencilRow r1 = ops.d1_row(i), r2 = ops.d2_row(i);
    for (int k = 0; k < r1.m; ++k)
      b.add(i, colof(i + r1.off[k]), dt * ui * ops.d1_scale * r1.c[k]);
    for (int k = 0; k < r2.m; ++k)
      b.add(i, colof(i + r2.off[k]), -dt * mu * ops.d2_scale * r2.c[k]);
  }
  return b.build();
}

/// Matrix-free form of assemble_conv_diff_1d: the global 1/(2h), -1/h^2
/// scales are applied after the stencil dot products, so constants are
/// mapped exactly (row sums cancel in floating point).
inline void apply_conv_diff_1d(const Grid1D& g, int order, double mu,
                               double dt, std::span<const double> u,
                               std::span<const double> phi,
                               std::span<double> out) {
  DiffOps1D ops = build_ops_1d(g, order);
  auto at = [&](int i) { return phi[g.periodic() ? g.wrap(i) : i]; };
  if (!g.periodic()) {
    out[0] = phi[0];
    out[g.n + 1] = phi[g.n + 1];
  }
  int lo = g.periodic() ? 0 : 1;
  int hi = g.periodic() ? g.n - 1 : g.n;
  for (int i = lo; i <= hi; ++i) {
    double ui = u.empty() ? 0.0 : u[i];
    StencilRow r1 = ops.d1_row(i), r2 = ops.d2_row(i);
    double d1 = 0.0, d2 = 0.0;
    for (int k = 0; k < r1.m; ++k) d1 += r1.c[k] * at(i + r1.off[k]);
    for (int k = 0; k < r2.m; ++k) d2 += r2.c[k] * at(i + r2.off[k]);
    out[i] = phi[i] +
             dt * (ui * (ops.d1_scale * d1) - mu * (ops.d2_scale * d2));
  }
}

inline Csr scale_csr(Csr m, double s) {
  for (double& v : m.val) v *= s;
  return m;
}

enum class Axis { X, Y };

/// Conventional centered first-derivative of a periodic nodal field:
/// fourth order (5-point) or second order (3-point). Used for velocity
/// recovery from the stream function, where the scheme's D1 (second-order
/// accurate as a derivative) is not good enough.
inline Field2D d1_centered_velocity(const Field2D& f, Axis axis, int order) {
  const Grid2D& g = f.grid;
  if (!g.periodic())
    throw std::invalid_argument(
        "d1_centered_velocity: needs a periodic grid (no halo available)");
  Field2D out(g);
  const Grid1D& ga = axis == Axis::X ? g.gx : g.gy;
  double s = 1.0 / (12.0 * ga.h);
  double s2 = 1.0 / (2.0 * ga.h);
  for (int i = 0; i < g.gx.total(); ++i)
    for (int j = 0; j < g.gy.total(); ++j) {
      auto at = [&](int d) {
        return axis == Axis::X ? f(g.gx.wrap(i + d), j) : f(i, g.gy.wrap(j + d));
      };
      if (order == 4)
        out(i, j) = s * (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2));
      else
        out(i, j) = s2 * (at(1) - at(-1));
    }
  return out;
}

inline Field2D d1_fourth_order_velocity(const Field2D& f, Axis axis) {
  return d1_centered_velocity(f, axis, 4);
}

}  // namespace bpfd
