#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bpfd/grid.hpp"
#include "bpfd/operators.hpp"
#include "bpfd/sparse.hpp"

namespace bpfd {

struct SignConditionViolated : std::runtime_error {
  double value;  // h * max|u| / (2 mu), inferred from the offending entry
  explicit SignConditionViolated(double v)
      : std::runtime_error("sign condition h*max|u| <= 2*mu violated"),
        value(v) {}
};

struct SignPatternViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Row/column layout of a scheme matrix: point class per row and neighbor
/// lookup along the grid axes. Covers the 1D and 2D, Dirichlet and periodic
/// variants.
struct Layout1D {
  Grid1D g;
  int size() const { return g.total(); }
  PointClass cls(int k) const { return classify(g, k); }
  int neighbor(int k, Axis, int d) const {
    int t = k + d;
    if (g.periodic()) return g.wrap(t);
    return (t >= 0 && t < g.total()) ? t : -1;
  }
  /// The paper's M-matrix scaling witness: 1/2 at cell centers, 1 elsewhere.
  std::vector<double> default_scaling() const {
    std::vector<double> d(size(), 1.0);
    for (int k = 0; k < size(); ++k)
      if (cls(k) == PointClass::CellCenter) d[k] = 0.5;
    return d;
  }
};

struct Layout2D {
  Grid2D g;
  int size() const { return g.total_points(); }
  PointClass cls(int k) const {
    return classify(g, g.unflatten_i(k), g.unflatten_j(k));
  }
  int neighbor(int k, Axis ax, int d) const {
    int i = g.unflatten_i(k), j = g.unflatten_j(k);
    if (ax == Axis::X) {
      i += d;
      if (g.gx.periodic()) i = g.gx.wrap(i);
      else if (i < 0 || i >= g.gx.total()) return -1;
    } else {
      j += d;
      if (g.gy.periodic()) j = g.gy.wrap(j);
      else if (j < 0 || j >= g.gy.total()) return -1;
    }
    return g.flatten(i, j);
  }
  /// The paper's M-matrix scaling witness: 3/4 at edge centers, 1 elsewhere.
  std::vector<double> default_scaling() const {
    std::vector<double> d(size(), 1.0);
    for (int k = 0; k < size(); ++k) {
      PointClass c = cls(k);
      if (c == PointClass::EdgeCenterX || c == PointClass::EdgeCenterY)
        d[k] = 0.75;
    }
    return d;
  }
};

/// Lorenz splitting A = A_d + A_a^+ + A^z + A^s of the dimensionless scheme
/// matrix A = c * Lbar. Off-diagonal entries are assigned positionally, per
/// point class: distance-2 couplings form A_a^+; distance-1 couplings go to
/// A^z on five-point rows (cell ends / knots, and the five-point direction
/// of edge centers) and to A^s on three-point rows.
struct LorenzSplit {
  std::vector<double> a_d;  // diagonal
  Csr a_plus;
  Csr a_z;
  Csr a_s;
};

namespace detail {

enum class OffKind { Diag, Dist1, Dist2, None };

template <class Layout>
OffKind offset_kind(const Layout& lay, int row, int col, Axis& ax_out) {
  if (col == row) return OffKind::Diag;
  for (Axis ax : {Axis::X, Axis::Y}) {
    for (int d : {-1, 1, -2, 2}) {
      if (lay.neighbor(row, ax, d) == col) {
        ax_out = ax;
        return std::abs(d) == 1 ? OffKind::Dist1 : OffKind::Dist2;
      }
    }
  }
  return OffKind::None;
}

inline OffKind offset_kind(const Layout1D& lay, int row, int col, Axis& ax) {
  ax = Axis::X;
  if (col == row) return OffKind::Diag;
  for (int d : {-1, 1, -2, 2})
    if (lay.neighbor(row, Axis::X, d) == col)
      return std::abs(d) == 1 ? OffKind::Dist1 : OffKind::Dist2;
  return OffKind::None;
}

/// Whether a distance-1 coupling along `ax` from a point of class `c`
/// belongs to the five-point direction (A^z) or the three-point one (A^s).
inline bool dist1_goes_to_z(PointClass c, Axis ax) {
  switch (c) {
    case PointClass::CellCenter: return false;
    case PointClass::Knot: return true;
    case PointClass::EdgeCenterX: return ax == Axis::Y;  // i odd, j even
    case PointClass::EdgeCenterY: return ax == Axis::X;
    default: throw std::logic_error("dist1_goes_to_z: boundary row");
  }
}

}  // namespace detail

template <class Layout>
LorenzSplit lorenz_split(const Csr& A, const Layout& lay) {
  if (A.n != lay.size())
    throw std::invalid_argument("lorenz_split: dimension mismatch");
  LorenzSplit sp;
  sp.a_d.assign(A.n, 0.0);
  CsrBuilder bp(A.n), bz(A.n), bs(A.n);
  for (int r = 0; r < A.n; ++r) {
    PointClass c = lay.cls(r);
    for (int k = A.rowptr[r]; k < A.rowptr[r + 1]; ++k) {
      int col = A.col[k];
      double v = A.val[k];
      Axis ax{};
      auto kind = detail::offset_kind(lay, r, col, ax);
      switch (kind) {
        case detail::OffKind::Diag:
          sp.a_d[r] = v;
          break;
        case detail::OffKind::Dist1: {
          bool to_z = c != PointClass::Boundary &&
                      detail::dist1_goes_to_z(c, ax);
          if (v > 0.0) {
            // entry is -w*(1 -/+ h u/2mu) with w = 2 on five-point
            // directions, 1 otherwise; positive means h|u| > 2mu.
            double w = to_z ? 2.0 : 1.0;
            throw SignConditionViolated(1.0 + v / w);
          }
          (to_z ? bz : bs).add(r, col, v);
          break;
        }
        case detail::OffKind::Dist2:
          if (v < 0.0)
            throw SignPatternViolated(
                "negative distance-2 entry: splitting undefined (needs "
                "h*max|u| <= mu)");
          bp.add(r, col, v);
          break;
        case detail::OffKind::None:
          throw SignPatternViolated("entry outside the stencil cross");
      }
    }
    if (c != PointClass::Boundary && sp.a_d[r] <= 0.0)
      throw SignPatternViolated("nonpositive diagonal");
  }
  sp.a_plus = bp.build(true);
  sp.a_z = bz.build(true);
  sp.a_s = bs.build(true);
  return sp;
}

/// Theorem: a matrix with positive diagonal and nonpositive off-diagonal is
/// a nonsingular M-matrix iff B*D has all positive row sums for some
/// positive diagonal D. Row-sum positivity is strict, with an absolute
/// floor scaled by the row magnitude.
inline bool is_m_matrix_via_scaling(const Csr& B,
                                    std::span<const double> d) {
  if (static_cast<int>(d.size()) != B.n)
    throw std::invalid_argument("is_m_matrix_via_scaling: bad scaling size");
  for (int r = 0; r < B.n; ++r) {
    double diag = B.at(r, r);
    if (diag <= 0.0) throw SignPatternViolated("nonpositive diagonal");
    for (int k = B.rowptr[r]; k < B.rowptr[r + 1]; ++k)
      if (B.col[k] != r && B.val[k] > 0.0)
        throw SignPatternViolated("positive off-diagonal");
  }
  for (double x : d)
    if (x <= 0.0) throw std::invalid_argument("scaling must be positive");
  for (int r = 0; r < B.n; ++r) {
    double s = 0.0, scale = 0.0;
    for (int k = B.rowptr[r]; k < B.rowptr[r + 1]; ++k) {
      double t = B.val[k] * d[B.col[k]];
      s += t;
      scale = std::max(scale, std::abs(t));
    }
    if (!(s > 1e-14 * scale)) return false;
  }
  return true;
}

struct CertificationResult {
  enum class Status { Certified, FailedMMatrix, FailedEntrywise };
  Status status = Status::Certified;
  int row = -1, col = -1;
  double lhs = 0.0, rhs = 0.0;  // entrywise comparison witness
  bool certified() const { return status == Status::Certified; }
};

/// Simplified Lorenz condition: A^{-1} >= 0 if (1) A_d + A^z is a
/// nonsingular M-matrix and (2) A_a^+ <= A^z A_d^{-1} A^s entrywise. The
/// connectivity condition is automatic here because Lbar maps ones to ones.
inline CertificationResult check_lorenz(const LorenzSplit& sp,
                                        std::span<const double> d_scaling) {
  int n = static_cast<int>(sp.a_d.size());
  CertificationResult res;

  CsrBuilder bb(n);
  for (int r = 0; r < n; ++r) bb.add(r, r, sp.a_d[r]);
  for (int r = 0; r < n; ++r)
    for (int k = sp.a_z.rowptr[r]; k < sp.a_z.rowptr[r + 1]; ++k)
      bb.add(r, sp.a_z.col[k], sp.a_z.val[k]);
  Csr B = bb.build();
  if (!is_m_matrix_via_scaling(B, d_scaling)) {
    res.status = CertificationResult::Status::FailedMMatrix;
    return res;
  }

  // Entrywise A_a^+ <= A^z A_d^{-1} A^s, evaluated on the support of A_a^+.
  std::vector<double> trow(n, 0.0);
  std::vector<int> touched;
  for (int r = 0; r < n; ++r) {
    if (sp.a_plus.rowptr[r] == sp.a_plus.rowptr[r + 1]) continue;
    touched.clear();
    for (int k = sp.a_z.rowptr[r]; k < sp.a_z.rowptr[r + 1]; ++k) {
      int mid = sp.a_z.col[k];
      double w = sp.a_z.val[k] / sp.a_d[mid];
      for (int k2 = sp.a_s.rowptr[mid]; k2 < sp.a_s.rowptr[mid + 1]; ++k2) {
        int c = sp.a_s.col[k2];
        if (trow[c] == 0.0) touched.push_back(c);
        trow[c] += w * sp.a_s.val[k2];
      }
    }
    for (int k = sp.a_plus.rowptr[r]; k < sp.a_plus.rowptr[r + 1]; ++k) {
      int c = sp.a_plus.col[k];
      double lhs = sp.a_plus.val[k];
      double rhs = trow[c];
      if (lhs > rhs + 1e-14 * std::max(std::abs(lhs), std::abs(rhs))) {
        res.status = CertificationResult::Status::FailedEntrywise;
        res.row = r;
        res.col = c;
        res.lhs = lhs;
        res.rhs = rhs;
        for (int t : touched) trow[t] = 0.0;
        return res;
      }
    }
    for (int t : touched) trow[t] = 0.0;
  }
  return res;
}

/// Brute-force oracle: dense inverse, all entries >= -tol.
/// Default tol = 1e-12 * ||A^{-1}||_inf.
inline bool dense_inverse_nonneg(const Csr& A, double tol = -1.0) {
  if (A.n > 4096)
    throw std::invalid_argument("dense_inverse_nonneg: dimension > 4096");
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(A.n, A.n);
  for (int r = 0; r < A.n; ++r)
    for (int k = A.rowptr[r]; k < A.rowptr[r + 1]; ++k)
      M(r, A.col[k]) = A.val[k];
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible())
    throw std::runtime_error("dense_inverse_nonneg: singular matrix");
  Eigen::MatrixXd inv = lu.inverse();
  if (tol < 0.0)
    tol = 1e-12 * inv.cwiseAbs().rowwise().sum().maxCoeff();
  return inv.minCoeff() >= -tol;
}

/// Closed-form sufficient conditions of the monotonicity theory, expressed
/// in the dimensionless groups a = h*umax/(2 mu) and c = h^2/(mu dt).
struct ConstraintReport {
  int dim = 2;
  double h = 0, dt = 0, mu = 0, umax = 0;
  double a = 0, c = 0;
  double a_threshold = 0;
  double c_bound = 0;  // admissible c at this a (0 when a is out of range)
  bool sign_ok = false;
  bool a_ok = false;
  bool c_ok = false;
  bool satisfied = false;
  bool convenient1 = false;
  bool convenient2 = false;

  std::string format() const {
    std::ostringstream os;
    auto line = [&](const std::string& name, double thr, double meas,
                    bool ok) {
      os << "  " << name << ": threshold=" << thr << " measured=" << meas
         << " -> " << (ok ? "pass" : "FAIL") << "\n";
    };
    os << (dim == 1 ? "1D" : "2D") << " monotonicity constraints (a=" << a
       << ", c=" << c << ")\n";
    line("sign condition  a <= 1", 1.0, a, sign_ok);
    line("a below threshold", a_threshold, a, a_ok);
    line("c within curve bound", c_bound, c, c_ok);
    os << "  convenient pair 1: " << (convenient1 ? "pass" : "not met")
       << "\n  convenient pair 2: " << (convenient2 ? "pass" : "not met")
       << "\n  sufficient conditions "
       << (satisfied ? "SATISFIED" : "NOT satisfied") << "\n";
    return os.str();
  }
};

inline ConstraintReport constraints_1d(double h, double dt, double mu,
                                       double umax) {
  if (h <= 0 || dt <= 0 || mu <= 0 || umax < 0)
    throw std::invalid_argument("constraints_1d: positive inputs required");
  ConstraintReport r;
  r.dim = 1;
  r.h = h; r.dt = dt; r.mu = mu; r.umax = umax;
  r.a = h * umax / (2.0 * mu);
  r.c = h * h / (mu * dt);
  r.a_threshold = (std::sqrt(37.0) - 5.0) / 4.0;
  r.sign_ok = r.a <= 1.0;
  r.a_ok = r.a < r.a_threshold;
  r.c_bound = r.a_ok ? (-8.0 * r.a * r.a - 20.0 * r.a + 6.0) / (2.0 * r.a + 1.0)
                     : 0.0;
  r.c_ok = r.a_ok && r.c <= r.c_bound;
  r.satisfied = r.a_ok && r.c_ok;
  r.convenient1 = (h * umax / mu <= 0.5) && (dt * mu / (h * h) >= 3.0);
  // second pair as printed in the source analysis
  r.convenient2 = (dt * mu / (h * h) >= 0.5) && (h * umax / mu <= 0.5);
  return r;
}

inline ConstraintReport constraints_2d(double h, double dt, double mu,
                                       double umax) {
  if (h <= 0 || dt <= 0 || mu <= 0 || umax < 0)
    throw std::invalid_argument("constraints_2d: positive inputs required");
  ConstraintReport r;
  r.dim = 2;
  r.h = h; r.dt = dt; r.mu = mu; r.umax = umax;
  r.a = h * umax / (2.0 * mu);
  r.c = h * h / (mu * dt);
  r.a_threshold = (std::sqrt(201.0) - 11.0) / 16.0;
  r.sign_ok = r.a <= 1.0;
  r.a_ok = r.a < r.a_threshold;
  r.c_bound = r.a_ok
                  ? (-8.0 * r.a * r.a - 11.0 * r.a + 2.5) / (2.0 * r.a + 1.0)
                  : 0.0;
  r.c_ok = r.a_ok && r.c <= r.c_bound;
  r.satisfied = r.a_ok && r.c_ok;
  r.convenient1 = (h * umax / mu <= 1.0 / 3.0) && (dt * mu / (h * h) >= 3.0);
  r.convenient2 = (dt * mu / (h * h) >= 1.0) &&
                  (h * umax / mu <= (std::sqrt(217.0) - 13.0) / 8.0);
  return r;
}

}  // namespace bpfd
