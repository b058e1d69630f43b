#pragma once

#include <cmath>

#include "bpfd/field.hpp"
#include "bpfd/models.hpp"

namespace bpfd {

/// Manufactured Allen-Cahn benchmark on [0, 2 pi]^2 with Dirichlet data:
///   phi = (0.75 + 0.25 sin t) sin(y) sin^2(x),  u = v = sin(y - x),
/// and a source term chosen so phi solves
///   phi_t + u phi_x + v phi_y - mu lap(phi) + F'(phi)/eps = f.
struct AllenCahnManufactured {
  double mu = 0.1;
  EnergyModel model = EnergyModel::polynomial(0.05);

  static double amp(double t) { return 0.75 + 0.25 * std::sin(t); }

  double exact(double x, double y, double t) const {
    double sx = std::sin(x);
    return amp(t) * std::sin(y) * sx * sx;
  }

  static double velocity(double x, double y) { return std::sin(y - x); }

  double forcing(double x, double y, double t) const {
    double g = amp(t);
    double sx = std::sin(x), sy = std::sin(y), cy = std::cos(y);
    double w = sy * sx * sx;
    double phi = g * w;
    double phi_t = 0.25 * std::cos(t) * w;
    double phi_x = g * sy * std::sin(2.0 * x);
    double phi_y = g * cy * sx * sx;
    double lap = g * sy * (2.0 * std::cos(2.0 * x) - sx * sx);
    double uv = velocity(x, y);
    return phi_t + uv * (phi_x + phi_y) - mu * lap +
           f_prime(model, phi) / model.epsilon;
  }

  Field2D exact_field(const Grid2D& g, double t) const {
    Field2D f(g);
    f.set_from([&](double x, double y) { return exact(x, y, t); });
    return f;
  }
};

/// Taylor-Green vortex on [0, 2 pi]^2 periodic: an exact Navier-Stokes
/// solution in vorticity form.
struct TaylorGreen {
  double mu = 0.1;

  double omega(double x, double y, double t) const {
    return -2.0 * std::exp(-2.0 * mu * t) * std::sin(x) * std::sin(y);
  }
  double psi(double x, double y, double t) const {
    return std::exp(-2.0 * mu * t) * std::sin(x) * std::sin(y);
  }
  double u(double x, double y, double t) const {
    return -std::exp(-2.0 * mu * t) * std::sin(x) * std::cos(y);
  }
  double v(double x, double y, double t) const {
    return std::exp(-2.0 * mu * t) * std::cos(x) * std::sin(y);
  }

  Field2D omega_field(const Grid2D& g, double t) const {
    Field2D f(g);
    f.set_from([&](double x, double y) { return omega(x, y, t); });
    return f;
  }
};

/// l1 (grid-scaled) and l-infinity interior errors against a reference.
struct ErrorNorms {
  double l1 = 0.0;
  double linf = 0.0;
};

inline ErrorNorms interior_errors(const Field2D& num, const Field2D& ref) {
  ErrorNorms e;
  int count = 0;
  num.for_each_interior([&](int i, int j) {
    double d = std::abs(num(i, j) - ref(i, j));
    e.l1 += d;
    e.linf = std::max(e.linf, d);
    ++count;
  });
  if (count > 0) e.l1 /= count;
  return e;
}

}  // namespace bpfd
