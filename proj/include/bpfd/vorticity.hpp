#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bpfd/field.hpp"
#include "bpfd/linalg.hpp"
#include "bpfd/operators.hpp"
#include "bpfd/stepping.hpp"

namespace bpfd {

/// Stream-function-vorticity state. Velocity is recovered from psi by
/// conventional centered differentiation; on periodic grids this makes the
/// discrete velocity exactly divergence-free (cross derivatives commute).
struct FlowState {
  Field2D omega;
  Field2D psi;
  VelocityField vel;
  double t = 0.0;

  explicit FlowState(const Grid2D& g) : omega(g), psi(g), vel(g) {}
  explicit FlowState(Field2D w)
      : omega(std::move(w)), psi(omega.grid), vel(omega.grid) {}
};

/// Solve psi from omega and differentiate: (u, v) = (-psi_y, psi_x).
/// Periodic right-hand sides are projected onto the compatible subspace
/// (the quadrature mean is removed) before the Poisson solve.
inline void update_stream_function(FlowState& st, int order) {
  const Grid2D& g = st.omega.grid;
  std::vector<double> w = interior_values(st.omega);
  if (g.periodic()) {
    double mean = st.omega.quadrature_mean();
    for (double& x : w) x -= mean;
  }
  st.psi = poisson_solve(w, g, order);
  if (g.periodic()) {
    Field2D du = d1_centered_velocity(st.psi, Axis::Y, order);
    Field2D dv = d1_centered_velocity(st.psi, Axis::X, order);
    for (int k = 0; k < g.total_points(); ++k) {
      st.vel.u.v[k] = -du.v[k];
      st.vel.v.v[k] = dv.v[k];
    }
  } else {
    throw std::invalid_argument(
        "update_stream_function: only the periodic path is supported");
  }
}

/// First-order scheme: psi/velocity from omega^n, then a backward-Euler
/// convection-diffusion step for omega with the new velocity frozen.
inline FlowState flow_step(const FlowState& state, double mu, double dt,
                           int order, KrylovConfig cfg = {},
                           SolveStats* stats = nullptr) {
  FlowState next(state.omega.grid);
  next.omega = state.omega;
  next.t = state.t + dt;
  FlowState work = state;
  update_stream_function(work, order);
  next.psi = work.psi;
  next.vel = work.vel;
  SchemeSolver solver(state.omega.grid, order, mu, dt, 0.0, &next.vel, cfg);
  next.omega = step_backward_euler(state.omega, solver, state.omega, stats);
  return next;
}

/// BDF3 flow step: velocity is taken from the psi solve on the third-order
/// extrapolated vorticity 3 w^n - 3 w^{n-1} + w^{n-2}; convection and
/// diffusion are implicit at that velocity with no explicit term.
inline FlowState bdf3_flow_step(const FlowState& s_n, const FlowState& s_nm1,
                                const FlowState& s_nm2, double mu, double dt,
                                int order, KrylovConfig cfg = {},
                                SolveStats* stats = nullptr) {
  const Grid2D& g = s_n.omega.grid;
  FlowState next(g);
  next.t = s_n.t + dt;
  FlowState star(g);
  for (int k = 0; k < g.total_points(); ++k)
    star.omega.v[k] =
        3.0 * s_n.omega.v[k] - 3.0 * s_nm1.omega.v[k] + s_nm2.omega.v[k];
  update_stream_function(star, order);
  next.psi = star.psi;
  next.vel = star.vel;
  SchemeSolver solver3(g, order, mu, 6.0 * dt / 11.0, 0.0, &next.vel, cfg);
  int n = interior_count(g);
  std::vector<double> p0 = interior_values(s_n.omega);
  std::vector<double> p1 = interior_values(s_nm1.omega);
  std::vector<double> p2 = interior_values(s_nm2.omega);
  std::vector<double> rhs(n);
  for (int k = 0; k < n; ++k)
    rhs[k] = (6.0 / 11.0) * (3.0 * p0[k] - 1.5 * p1[k] + (1.0 / 3.0) * p2[k]);
  next.omega = solver3.solve(rhs, s_n.omega, stats);
  return next;
}

/// Double shear layer initial vorticity on [0, 2 pi]^2 (periodic):
///   w0 = delta cos x - (1/rho) sech^2((y - pi/2)/rho)        for y <= pi,
///   w0 = delta cos x + (1/rho) sech^2((3 pi/2 - y)/rho)      for y >  pi.
inline Field2D shear_layer_init(const Grid2D& g, double rho = M_PI / 15.0,
                                double delta = 0.05) {
  if (!g.periodic())
    throw std::invalid_argument("shear_layer_init: periodic grid required");
  Field2D w(g);
  auto sech = [](double x) { return 1.0 / std::cosh(x); };
  w.set_from([&](double x, double y) {
    double base = delta * std::cos(x);
    if (y <= M_PI) {
      double s = sech((y - M_PI / 2.0) / rho);
      return base - s * s / rho;
    }
    double s = sech((1.5 * M_PI - y) / rho);
    return base + s * s / rho;
  });
  return w;
}

}  // namespace bpfd
