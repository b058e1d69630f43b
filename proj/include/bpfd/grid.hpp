#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace bpfd {

enum class Bc { Dirichlet, Periodic };

/// The five grid-point classes of the Q2 mesh. EdgeCenterX is the center of
/// an edge parallel to the x-axis (i odd, j even); EdgeCenterY the center of
/// an edge parallel to the y-axis (i even, j odd).
enum class PointClass { Boundary, CellCenter, EdgeCenterX, EdgeCenterY, Knot };

inline const char* to_string(PointClass c) {
  switch (c) {
    case PointClass::Boundary: return "boundary";
    case PointClass::CellCenter: return "cell_center";
    case PointClass::EdgeCenterX: return "edge_center_x";
    case PointClass::EdgeCenterY: return "edge_center_y";
    case PointClass::Knot: return "knot";
  }
  return "?";
}

/// Uniform 1D grid. For Dirichlet boundaries, `n` is the interior point count
/// (odd, so the grid carries a whole number of quadratic elements) and the
/// points are x_i = a + i*h for i = 0..n+1 with h = (b-a)/(n+1).
/// For periodic boundaries, `n` is the total point count (even) and
/// x_i = a + i*h for i = 0..n-1 with h = (b-a)/n; index arithmetic wraps.
struct Grid1D {
  int n = 1;
  double a = 0.0;
  double b = 1.0;
  Bc bc = Bc::Dirichlet;
  double h = 0.5;

  Grid1D() = default;
  Grid1D(int n_, double a_, double b_, Bc bc_ = Bc::Dirichlet)
      : n(n_), a(a_), b(b_), bc(bc_) {
    if (n < 1 || b <= a) throw std::invalid_argument("Grid1D: bad n or domain");
    if (bc == Bc::Dirichlet) {
      if (n % 2 == 0)
        throw std::invalid_argument("Grid1D: Dirichlet grid needs odd n");
      h = (b - a) / (n + 1);
    } else {
      if (n % 2 != 0)
        throw std::invalid_argument("Grid1D: periodic grid needs even n");
      h = (b - a) / n;
    }
  }

  /// Number of stored nodal values along this axis.
  int total() const { return bc == Bc::Dirichlet ? n + 2 : n; }
  double x(int i) const { return a + i * h; }
  bool periodic() const { return bc == Bc::Periodic; }

  int wrap(int i) const {
    int m = ((i % n) + n) % n;
    return m;
  }
  bool is_boundary(int i) const {
    return bc == Bc::Dirichlet && (i == 0 || i == n + 1);
  }
};

inline PointClass classify(const Grid1D& g, int i) {
  if (i < 0 || i >= g.total()) throw std::out_of_range("classify: index");
  if (g.is_boundary(i)) return PointClass::Boundary;
  // In 1D, odd index = cell center, even index = cell end (a knot).
  return (i % 2 == 1) ? PointClass::CellCenter : PointClass::Knot;
}

/// Node coordinates; these coincide with the composite 3-point Gauss-Lobatto
/// quadrature points of the quadratic element mesh.
inline std::vector<double> gauss_lobatto_nodes(const Grid1D& g) {
  std::vector<double> xs(g.total());
  for (int i = 0; i < g.total(); ++i) xs[i] = g.x(i);
  return xs;
}

struct Grid2D {
  Grid1D gx;
  Grid1D gy;

  Grid2D() = default;
  Grid2D(Grid1D gx_, Grid1D gy_) : gx(gx_), gy(gy_) {
    if (gx.bc != gy.bc)
      throw std::invalid_argument("Grid2D: mixed boundary kinds");
  }

  bool periodic() const { return gx.periodic(); }
  /// Equal spacings are required by the monotonicity theory; unequal
  /// spacings are allowed for plain simulation.
  bool uniform_spacing() const {
    return std::abs(gx.h - gy.h) <= 1e-14 * (std::abs(gx.h) + std::abs(gy.h));
  }

  int total_points() const { return gx.total() * gy.total(); }
  /// Vectorization is column-by-column of the (ny+2) x (nx+2) nodal matrix
  /// whose rows are indexed by y: k = i * gy.total() + j.
  int flatten(int i, int j) const { return i * gy.total() + j; }
  int unflatten_i(int k) const { return k / gy.total(); }
  int unflatten_j(int k) const { return k % gy.total(); }
};

inline PointClass classify(const Grid2D& g, int i, int j) {
  if (i < 0 || i >= g.gx.total() || j < 0 || j >= g.gy.total())
    throw std::out_of_range("classify: index");
  if (g.gx.is_boundary(i) || g.gy.is_boundary(j)) return PointClass::Boundary;
  bool iodd = (i % 2 == 1), jodd = (j % 2 == 1);
  if (iodd && jodd) return PointClass::CellCenter;
  if (!iodd && !jodd) return PointClass::Knot;
  return iodd ? PointClass::EdgeCenterX : PointClass::EdgeCenterY;
}

}  // namespace bpfd
