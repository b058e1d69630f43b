#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bpfd {

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoDoubleWell : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class EnergyKind { Null, Polynomial, Logarithmic };

/// Allen-Cahn free-energy density. Polynomial: F = (x^2-1)^2/4 with wells at
/// +-1. Logarithmic (quadratic-well form used in the phase-field runs):
///   F = (theta/2)[(1+x)ln(1+x) + (1-x)ln(1-x)] - (theta_c/2) x^2,
/// wells at +-beta with artanh(beta)/beta = theta_c/theta. The linear-well
/// variant -(theta_c/2) x is kept behind a flag for completeness; it has no
/// interior double well and is simulation-only.
struct EnergyModel {
  EnergyKind kind = EnergyKind::Null;
  double epsilon = 1.0;
  double theta = 0.0;
  double theta_c = 0.0;
  bool linear_well = false;  // logarithmic variant with -(theta_c/2) x
  double beta = 0.0;         // well location; 0 when none exists
  double f2max = 0.0;        // max F'' on [-beta, beta]

  static EnergyModel null_model(double eps = 1.0) {
    EnergyModel m;
    m.kind = EnergyKind::Null;
    m.epsilon = eps;
    return m;
  }
  static EnergyModel polynomial(double eps);
  static EnergyModel logarithmic(double eps, double th, double thc,
                                 bool linear_well_variant = false);
};

inline double f_prime(const EnergyModel& m, double x) {
  switch (m.kind) {
    case EnergyKind::Null:
      return 0.0;
    case EnergyKind::Polynomial:
      return x * x * x - x;
    case EnergyKind::Logarithmic: {
      if (std::abs(x) >= 1.0)
        throw DomainError("f_prime: |x| >= 1 in logarithmic energy");
      double lg = 0.5 * m.theta * std::log((1.0 + x) / (1.0 - x));
      return m.linear_well ? lg - 0.5 * m.theta_c : lg - m.theta_c * x;
    }
  }
  return 0.0;
}

inline double f_second(const EnergyModel& m, double x) {
  switch (m.kind) {
    case EnergyKind::Null:
      return 0.0;
    case EnergyKind::Polynomial:
      return 3.0 * x * x - 1.0;
    case EnergyKind::Logarithmic: {
      if (std::abs(x) >= 1.0)
        throw DomainError("f_second: |x| >= 1 in logarithmic energy");
      double lg = m.theta / (1.0 - x * x);
      return m.linear_well ? lg : lg - m.theta_c;
    }
  }
  return 0.0;
}

/// Well location beta > 0 with F'(beta) = 0. Polynomial: 1 exactly.
/// Logarithmic quadratic-well: bisection on artanh(b)/b = theta_c/theta.
inline double solve_beta(const EnergyModel& m) {
  switch (m.kind) {
    case EnergyKind::Null:
      throw NoDoubleWell("solve_beta: null energy has no wells");
    case EnergyKind::Polynomial:
      return 1.0;
    case EnergyKind::Logarithmic: {
      if (m.linear_well)
        throw NoDoubleWell("solve_beta: linear-well variant has no "
                           "symmetric double well");
      double ratio = m.theta_c / m.theta;
      if (!(ratio > 1.0))
        throw NoDoubleWell("solve_beta: needs theta_c/theta > 1");
      // g(b) = artanh(b)/b is increasing from 1 to +inf on (0,1).
      double lo = 0.0, hi = 1.0 - 1e-16;
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double g = std::atanh(mid) / mid;
        (g < ratio ? lo : hi) = mid;
        if (hi - lo < 1e-15) break;
      }
      return 0.5 * (lo + hi);
    }
  }
  return 0.0;
}

namespace detail {

/// max F'' on [-beta, beta]. Analytic for polynomial (3 beta^2 - 1, i.e. 2
/// at beta = 1); for the logarithmic energy F'' is even and increasing in
/// |x|, but a sampling + golden-section pass guards the general case.
inline double f2_max_on_well(const EnergyModel& m, double beta) {
  if (m.kind == EnergyKind::Null) return 0.0;
  if (m.kind == EnergyKind::Polynomial)
    return std::max(3.0 * beta * beta - 1.0, f_second(m, 0.0));
  int samples = 2001;
  double best = -std::numeric_limits<double>::infinity();
  double xbest = 0.0;
  for (int k = 0; k < samples; ++k) {
    double x = -beta + 2.0 * beta * k / (samples - 1);
    double v = f_second(m, x);
    if (v > best) {
      best = v;
      xbest = x;
    }
  }
  double w = 2.0 * beta / (samples - 1);
  double a = std::max(-beta, xbest - w), b = std::min(beta, xbest + w);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
    if (f_second(m, c) > f_second(m, d)) {
      b = d;
      d = c;
      c = b - gr * (b - a);
    } else {
      a = c;
      c = d;
      d = a + gr * (b - a);
    }
  }
  return std::max(best, f_second(m, 0.5 * (a + b)));
}

}  // namespace detail

inline EnergyModel EnergyModel::polynomial(double eps) {
  if (eps <= 0.0) throw std::invalid_argument("EnergyModel: epsilon > 0");
  EnergyModel m;
  m.kind = EnergyKind::Polynomial;
  m.epsilon = eps;
  m.beta = 1.0;
  m.f2max = detail::f2_max_on_well(m, m.beta);
  return m;
}

inline EnergyModel EnergyModel::logarithmic(double eps, double th, double thc,
                                            bool linear_well_variant) {
  if (eps <= 0.0 || th <= 0.0)
    throw std::invalid_argument("EnergyModel: need epsilon > 0, theta > 0");
  EnergyModel m;
  m.kind = EnergyKind::Logarithmic;
  m.epsilon = eps;
  m.theta = th;
  m.theta_c = thc;
  m.linear_well = linear_well_variant;
  if (!linear_well_variant && thc / th > 1.0) {
    m.beta = solve_beta(m);
    m.f2max = detail::f2_max_on_well(m, m.beta);
  }
  return m;
}

/// Admissible explicit step: dt <= epsilon / max_{[-beta,beta]} F''.
/// Models without a double well impose no constraint.
inline double dt_bound(const EnergyModel& m) {
  if (m.kind == EnergyKind::Null || m.beta == 0.0 || m.f2max <= 0.0)
    return std::numeric_limits<double>::infinity();
  return m.epsilon / m.f2max;
}

/// The pointwise explicit map f(x) = x - (dt/epsilon) F'(x); maps
/// [-beta, beta] into itself whenever dt <= dt_bound.
inline double pointwise_rhs_map(const EnergyModel& m, double dt_eff,
                                double x) {
  return x - (dt_eff / m.epsilon) * f_prime(m, x);
}

/// Analytic derivative bundle of a manufactured exact solution.
struct ExactSolution {
  // value and partial derivatives at (x, y, t)
  double (*phi)(double, double, double) = nullptr;
  double (*phi_t)(double, double, double) = nullptr;
  double (*phi_x)(double, double, double) = nullptr;
  double (*phi_y)(double, double, double) = nullptr;
  double (*lap)(double, double, double) = nullptr;
};

/// Source term making `exact` solve
///   phi_t + u phi_x + v phi_y - mu lap(phi) + F'(phi)/epsilon = f.
template <class U, class V>
auto manufactured_forcing(const EnergyModel& m, double mu,
                          const ExactSolution& exact, U&& uf, V&& vf) {
  return [&m, mu, exact, uf, vf](double x, double y, double t) {
    double p = exact.phi(x, y, t);
    return exact.phi_t(x, y, t) + uf(x, y) * exact.phi_x(x, y, t) +
           vf(x, y) * exact.phi_y(x, y, t) - mu * exact.lap(x, y, t) +
           f_prime(m, p) / m.epsilon;
  };
}

}  // namespace bpfd
