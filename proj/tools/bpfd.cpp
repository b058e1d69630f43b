#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bpfd/config.hpp"
#include "bpfd/field.hpp"
#include "bpfd/grid.hpp"
#include "bpfd/io.hpp"
#include "bpfd/linalg.hpp"
#include "bpfd/models.hpp"
#include "bpfd/monotonicity.hpp"
#include "bpfd/operators.hpp"
#include "bpfd/problems.hpp"
#include "bpfd/sparse.hpp"
#include "bpfd/stepping.hpp"
#include "bpfd/vorticity.hpp"

namespace fs = std::filesystem;
using namespace bpfd;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitContradiction = 4;

struct Overrides {
  std::string config_path;
  std::string out_dir;
  std::optional<int> order;
  std::string grid;     // "NxM"
  std::string dt;       // number or rule
  std::vector<std::string> monitors;
};

std::pair<int, int> parse_grid_spec(const std::string& s) {
  size_t x = s.find('x');
  if (x == std::string::npos)
    throw ConfigError("grid spec must look like NxM: " + s);
  try {
    return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
  } catch (const std::exception&) {
    throw ConfigError("grid spec must look like NxM: " + s);
  }
}

struct RunSetup {
  Grid2D grid;
  int order = 4;
  double mu = 1.0;
  double t_end = 1.0;
  std::string dt_spec = "h/6";
  TimeMethod method = TimeMethod::Imex1;
  double stabilization = 0.0;
  EnergyModel model = EnergyModel::null_model();
  std::string problem = "allen_cahn";
  std::string velocity_kind = "zero";
  std::string init_kind = "zero";
  double init_amplitude = 0.75;
  double init_rho = M_PI / 15.0;
  double init_delta = 0.05;
  bool monitor_dmp = false;
  bool monitor_bounds = false;
  bool telemetry = true;
  int snapshot_every = 0;
  std::string out_dir = ".";
};

RunSetup build_setup(const ConfigFile& cfg, const Overrides& ov) {
  validate_schema(cfg);
  RunSetup s;
  s.problem = cfg.get_string("problem.kind", std::string("allen_cahn"));
  s.t_end = cfg.get_double("problem.T", 1.0);

  int nx = cfg.get_int("grid.nx", 79), ny = cfg.get_int("grid.ny", 79);
  if (!ov.grid.empty()) std::tie(nx, ny) = parse_grid_spec(ov.grid);
  double x0 = cfg.get_double("grid.x0", 0.0);
  double x1 = cfg.get_double("grid.x1", 2.0 * M_PI);
  double y0 = cfg.get_double("grid.y0", 0.0);
  double y1 = cfg.get_double("grid.y1", 2.0 * M_PI);
  std::string bcs = cfg.get_string(
      "grid.bc", s.problem == "vorticity" ? "periodic" : "dirichlet");
  Bc bc = bcs == "periodic" ? Bc::Periodic : Bc::Dirichlet;
  s.grid = Grid2D(Grid1D(nx, x0, x1, bc), Grid1D(ny, y0, y1, bc));

  s.order = ov.order ? *ov.order : cfg.get_int("scheme.order", 4);
  s.mu = cfg.get_double("model.mu", 1.0);
  s.dt_spec = ov.dt.empty() ? cfg.get_string("time.dt", std::string("h/6"))
                            : ov.dt;
  std::string method = cfg.get_string("time.method", std::string("imex1"));
  s.method = method == "backward_euler" ? TimeMethod::BackwardEuler
             : method == "imex_bdf3"    ? TimeMethod::ImexBdf3
                                        : TimeMethod::Imex1;
  s.stabilization = cfg.get_double("time.S", 0.0);

  std::string energy = cfg.get_string("model.energy", std::string("null"));
  double eps = cfg.get_double("model.epsilon", 0.05);
  if (energy == "polynomial") {
    s.model = EnergyModel::polynomial(eps);
  } else if (energy == "logarithmic") {
    s.model = EnergyModel::logarithmic(
        eps, cfg.get_double("model.theta", 1.0),
        cfg.get_double("model.theta_c", 2.0),
        cfg.get_bool("model.linear_well", false));
  } else {
    s.model = EnergyModel::null_model(eps);
  }

  s.velocity_kind = cfg.get_string("velocity.kind", std::string("zero"));
  s.init_kind = cfg.get_string("init.kind", std::string("zero"));
  s.init_amplitude = cfg.get_double("init.amplitude", 0.75);
  s.init_rho = cfg.get_double("init.rho", M_PI / 15.0);
  s.init_delta = cfg.get_double("init.delta", 0.05);

  s.monitor_dmp = cfg.get_bool("monitor.dmp", false);
  s.monitor_bounds = cfg.get_bool("monitor.bounds", false);
  for (const auto& m : ov.monitors) {
    if (m == "dmp")
      s.monitor_dmp = true;
    else if (m == "bounds")
      s.monitor_bounds = true;
    else
      throw ConfigError("unknown monitor: " + m);
  }
  s.telemetry = cfg.get_bool("output.telemetry", true);
  s.snapshot_every = cfg.get_int("output.snapshot_every", 0);
  s.out_dir = ov.out_dir.empty()
                  ? cfg.get_string("output.dir", std::string("."))
                  : ov.out_dir;
  return s;
}

double resolve_dt(const RunSetup& s) {
  double h = s.grid.gx.h;
  if (s.dt_spec == "h/6") return h / 6.0;
  if (s.dt_spec == "h/7") return h / 7.0;
  if (s.dt_spec == "lemma") {
    double b = dt_bound(s.model);
    if (!std::isfinite(b))
      throw ConfigError("dt rule 'lemma' needs a double-well energy");
    return b;
  }
  if (s.dt_spec == "dmp")
    throw ConfigError("dt rule 'dmp' is only available for vorticity runs");
  try {
    size_t pos = 0;
    double v = std::stod(s.dt_spec, &pos);
    if (pos != s.dt_spec.size() || v <= 0.0)
      throw std::invalid_argument("bad");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("time.dt: expected a positive number or one of "
                      "h/6, h/7, lemma, dmp; got '" + s.dt_spec + "'");
  }
}

Field2D initial_field(const RunSetup& s) {
  Field2D f(s.grid);
  if (s.init_kind == "sin_product") {
    double a = s.init_amplitude;
    f.set_from([a](double x, double y) {
      double sx = std::sin(x);
      return a * std::sin(y) * sx * sx;
    });
  } else if (s.init_kind == "shear_layer") {
    f = shear_layer_init(s.grid, s.init_rho, s.init_delta);
  } else if (s.init_kind == "taylor_green") {
    TaylorGreen tg{s.mu};
    f = tg.omega_field(s.grid, 0.0);
  }
  return f;
}

std::string snapshot_path(const RunSetup& s, int step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%06d.csv", step);
  return (fs::path(s.out_dir) / buf).string();
}

int cmd_run(const Overrides& ov) {
  RunSetup s = build_setup(load_config(ov.config_path), ov);
  fs::create_directories(s.out_dir);
  TelemetryWriter telemetry;
  if (s.telemetry)
    telemetry = TelemetryWriter((fs::path(s.out_dir) / "telemetry.csv").string());

  if (s.problem == "vorticity") {
    if (!s.grid.periodic())
      throw ConfigError("vorticity runs require grid.bc = periodic");
    FlowState st(initial_field(s));
    double h = s.grid.gx.h;
    bool adaptive = s.dt_spec == "dmp";
    double dt = adaptive ? 0.0 : resolve_dt(s);
    int step = 0;
    double mean0 = st.omega.quadrature_mean();
    while (st.t < s.t_end - 1e-12) {
      update_stream_function(st, s.order);
      if (adaptive) {
        ConstraintReport cr =
            constraints_2d(h, 1.0, s.mu, std::max(st.vel.max_norm(), 1e-300));
        dt = cr.a_ok ? h * h / (s.mu * cr.c_bound) : h * h / s.mu;
      }
      dt = std::min(dt, s.t_end - st.t);
      SolveStats stats;
      SchemeSolver solver(s.grid, s.order, s.mu, dt, 0.0, &st.vel);
      Field2D next = step_backward_euler(st.omega, solver, st.omega, &stats);
      ++step;
      TelemetryRow row;
      row.step = step;
      row.t = st.t + dt;
      row.min = next.interior_min();
      row.max = next.interior_max();
      row.iterations = stats.iterations;
      if (s.monitor_dmp)
        row.dmp_violation =
            std::max({0.0, row.max - st.omega.interior_max(),
                      st.omega.interior_min() - row.min});
      row.bound_violation = std::abs(next.quadrature_mean() - mean0);
      telemetry.write(row);
      st.omega = std::move(next);
      st.t = row.t;
      if (s.snapshot_every > 0 && step % s.snapshot_every == 0)
        write_snapshot_csv(st.omega, snapshot_path(s, step), st.t);
    }
    write_snapshot_csv(st.omega,
                       (fs::path(s.out_dir) / "snapshot_final.csv").string(),
                       st.t);
    return 0;
  }

  // Allen-Cahn / convection-diffusion
  SimOptions opt;
  opt.method = s.problem == "convection_diffusion" ? TimeMethod::BackwardEuler
                                                   : s.method;
  opt.order = s.order;
  opt.mu = s.mu;
  opt.dt = resolve_dt(s);
  opt.t_end = s.t_end;
  opt.stabilization = s.stabilization;
  opt.monitor_dmp = s.monitor_dmp;
  opt.monitor_bounds = s.monitor_bounds;

  VelocityField vel(s.grid);
  if (s.velocity_kind == "sin_diag")
    vel = VelocityField::from_functions(
        s.grid, [](double x, double y) { return std::sin(y - x); },
        [](double x, double y) { return std::sin(y - x); });
  else if (s.velocity_kind == "coupled")
    throw ConfigError("velocity.kind = coupled requires problem.kind = "
                      "vorticity");

  Simulator sim(s.grid, opt, s.model, &vel);
  Field2D phi0 = initial_field(s);
  int every = s.snapshot_every;
  Field2D final_state = sim.run(
      phi0, [&](const TelemetryRow& row, const Field2D& state) {
        telemetry.write(row);
        if (every > 0 && row.step % every == 0)
          write_snapshot_csv(state, snapshot_path(s, row.step), row.t);
      });
  write_snapshot_csv(final_state,
                     (fs::path(s.out_dir) / "snapshot_final.csv").string(),
                     s.t_end);
  return 0;
}

double observed_order(double e_coarse, double e_fine, double h_coarse,
                      double h_fine) {
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

int cmd_convergence(const Overrides& ov, const std::string& grids_arg) {
  ConfigFile cfg = load_config(ov.config_path);
  RunSetup s = build_setup(cfg, ov);
  std::vector<int> grids;
  {
    std::stringstream ss(grids_arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) grids.push_back(std::stoi(tok));
  }
  if (grids.size() < 2) throw ConfigError("need at least two grid sizes");

  std::printf("# problem=%s order=%d mu=%g T=%g\n", s.problem.c_str(),
              s.order, s.mu, s.t_end);
  std::printf("%8s %12s %12s %8s %12s %8s\n", "n", "h", "l1", "o(l1)",
              "linf", "o(linf)");
  std::vector<double> hs, e1s, eis;
  for (int n : grids) {
    double h, e1, ei;
    if (s.problem == "vorticity") {
      TaylorGreen tg{s.mu};
      Grid2D g(Grid1D(n, 0.0, 2.0 * M_PI, Bc::Periodic),
               Grid1D(n, 0.0, 2.0 * M_PI, Bc::Periodic));
      h = g.gx.h;
      int nsteps = std::max(3, static_cast<int>(std::llround(
                                   s.t_end / resolve_dt(s))));
      double dt = s.t_end / nsteps;
      std::vector<FlowState> hist;
      for (int k = 0; k < 3; ++k) {
        FlowState st(tg.omega_field(g, k * dt));
        st.t = k * dt;
        hist.push_back(std::move(st));
      }
      FlowState cur = hist[2];
      for (int k = 2; k < nsteps; ++k) {
        FlowState next =
            bdf3_flow_step(hist[2], hist[1], hist[0], s.mu, dt, s.order);
        hist[0] = std::move(hist[1]);
        hist[1] = std::move(hist[2]);
        hist[2] = std::move(next);
      }
      ErrorNorms e =
          interior_errors(hist[2].omega, tg.omega_field(g, s.t_end));
      e1 = e.l1;
      ei = e.linf;
    } else {
      AllenCahnManufactured mf;
      mf.mu = s.mu;
      mf.model = s.model.kind == EnergyKind::Null
                     ? EnergyModel::polynomial(0.05)
                     : s.model;
      Grid2D g(Grid1D(n, 0.0, 2.0 * M_PI, Bc::Dirichlet),
               Grid1D(n, 0.0, 2.0 * M_PI, Bc::Dirichlet));
      h = g.gx.h;
      RunSetup sl = s;
      sl.grid = g;
      SimOptions opt;
      opt.method = TimeMethod::ImexBdf3;
      opt.order = s.order;
      opt.mu = mf.mu;
      opt.dt = resolve_dt(sl);
      opt.t_end = s.t_end;
      opt.exact_state = [&](double t) { return mf.exact_field(g, t); };
      VelocityField vel = VelocityField::from_functions(
          g,
          [](double x, double y) {
            return AllenCahnManufactured::velocity(x, y);
          },
          [](double x, double y) {
            return AllenCahnManufactured::velocity(x, y);
          });
      Simulator sim(
          g, opt, mf.model, &vel,
          [&](double x, double y, double t) { return mf.forcing(x, y, t); },
          [&](double x, double y, double t) { return mf.exact(x, y, t); });
      Field2D out = sim.run(mf.exact_field(g, 0.0));
      ErrorNorms e = interior_errors(out, mf.exact_field(g, s.t_end));
      e1 = e.l1;
      ei = e.linf;
    }
    hs.push_back(h);
    e1s.push_back(e1);
    eis.push_back(ei);
    size_t k = hs.size();
    if (k == 1) {
      std::printf("%8d %12.4e %12.4e %8s %12.4e %8s\n", n, h, e1, "-", ei,
                  "-");
    } else {
      std::printf("%8d %12.4e %12.4e %8.2f %12.4e %8.2f\n", n, h, e1,
                  observed_order(e1s[k - 2], e1, hs[k - 2], h), ei,
                  observed_order(eis[k - 2], ei, hs[k - 2], h));
    }
  }
  return 0;
}

int cmd_verify_monotonicity(const Overrides& ov, int dim,
                            const std::string& export_path) {
  ConfigFile cfg = load_config(ov.config_path);
  RunSetup s = build_setup(cfg, ov);
  double dt = resolve_dt(s);
  double umax = s.velocity_kind == "sin_diag" ? 1.0 : 0.0;

  bool certified = false, oracle = false, oracle_run = false;
  if (dim == 1) {
    Grid1D g = s.grid.gx;
    ConstraintReport cr = constraints_1d(g.h, dt, s.mu, umax);
    std::fputs(cr.format().c_str(), stdout);
    std::vector<double> u(g.total(), umax);
    Csr A = scale_csr(assemble_conv_diff_1d(g, s.order, s.mu, dt, u),
                      g.h * g.h / (s.mu * dt));
    if (!export_path.empty()) write_matrix_market(A, export_path);
    Layout1D lay{g};
    try {
      LorenzSplit sp = lorenz_split(A, lay);
      CertificationResult res = check_lorenz(sp, lay.default_scaling());
      certified = res.certified();
      std::printf("lorenz certification: %s\n",
                  certified ? "certified"
                  : res.status == CertificationResult::Status::FailedMMatrix
                      ? "failed (A_d + A^z not an M-matrix)"
                      : "failed (entrywise condition)");
    } catch (const SignConditionViolated& e) {
      std::printf("lorenz split unavailable: %s (a >= %g)\n", e.what(),
                  e.value);
    }
    if (A.n <= 4096) {
      oracle = dense_inverse_nonneg(A);
      oracle_run = true;
    }
  } else {
    ConstraintReport cr = constraints_2d(s.grid.gx.h, dt, s.mu, umax);
    std::fputs(cr.format().c_str(), stdout);
    VelocityField vel(s.grid);
    if (umax > 0.0)
      vel = VelocityField::from_functions(
          s.grid, [](double x, double y) { return std::sin(y - x); },
          [](double x, double y) { return std::sin(y - x); });
    ConvDiffOp op(s.grid, s.order, s.mu, dt, 0.0, umax > 0 ? &vel : nullptr);
    Csr A = scale_csr(op.assemble(), op.c_value());
    if (!export_path.empty()) write_matrix_market(A, export_path);
    Layout2D lay{s.grid};
    try {
      LorenzSplit sp = lorenz_split(A, lay);
      CertificationResult res = check_lorenz(sp, lay.default_scaling());
      certified = res.certified();
      std::printf("lorenz certification: %s\n",
                  certified ? "certified"
                  : res.status == CertificationResult::Status::FailedMMatrix
                      ? "failed (A_d + A^z not an M-matrix)"
                      : "failed (entrywise condition)");
    } catch (const SignConditionViolated& e) {
      std::printf("lorenz split unavailable: %s (a >= %g)\n", e.what(),
                  e.value);
    }
    if (A.n <= 4096) {
      oracle = dense_inverse_nonneg(A);
      oracle_run = true;
    }
  }
  if (oracle_run)
    std::printf("dense inverse oracle: %s\n",
                oracle ? "nonnegative" : "has negative entries");
  else
    std::printf("dense inverse oracle: skipped (dimension > 4096)\n");
  if (certified && oracle_run && !oracle) {
    std::fprintf(stderr,
                 "contradiction: certified but the dense inverse has "
                 "negative entries\n");
    return kExitContradiction;
  }
  return 0;
}

int cmd_poisson_test(int n, int order) {
  TaylorGreen tg;
  std::printf("%8s %12s %12s %8s\n", "n", "h", "linf", "order");
  double prev_e = 0.0, prev_h = 0.0;
  for (int g = n; g <= 4 * n; g *= 2) {
    Grid2D grid(Grid1D(g, 0.0, 2.0 * M_PI, Bc::Periodic),
                Grid1D(g, 0.0, 2.0 * M_PI, Bc::Periodic));
    Field2D w = tg.omega_field(grid, 0.0);
    Field2D psi = poisson_solve(interior_values(w), grid, order);
    Field2D exact(grid);
    exact.set_from([&](double x, double y) { return tg.psi(x, y, 0.0); });
    double shift = exact.quadrature_mean() - psi.quadrature_mean();
    double e = 0.0;
    psi.for_each_interior([&](int i, int j) {
      e = std::max(e, std::abs(psi(i, j) + shift - exact(i, j)));
    });
    if (prev_h > 0.0)
      std::printf("%8d %12.4e %12.4e %8.2f\n", g, grid.gx.h, e,
                  observed_order(prev_e, e, prev_h, grid.gx.h));
    else
      std::printf("%8d %12.4e %12.4e %8s\n", g, grid.gx.h, e, "-");
    prev_e = e;
    prev_h = grid.gx.h;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bound-preserving fourth-order convection-diffusion solver"};
  app.require_subcommand(1);
  Overrides ov;

  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* o = sub->add_option("--config", ov.config_path, "config file path");
    if (need_config) o->required();
    sub->add_option("--out", ov.out_dir, "output directory");
    sub->add_option("--order", ov.order, "scheme order (2 or 4)")
        ->check(CLI::IsMember({2, 4}));
    sub->add_option("--grid", ov.grid, "grid size as NxM");
    sub->add_option("--dt", ov.dt, "time step (number or rule h/6, h/7, "
                                   "lemma, dmp)");
    sub->add_option("--monitor", ov.monitors, "monitors: dmp, bounds");
  };

  auto* run = app.add_subcommand("run", "run a simulation from a config");
  add_common(run, true);

  auto* conv = app.add_subcommand("convergence", "grid refinement study");
  add_common(conv, true);
  std::string grids = "19,39,79";
  conv->add_option("--grids", grids, "comma-separated interior grid sizes");

  auto* verify = app.add_subcommand("verify-monotonicity",
                                    "check the sufficient DMP conditions and "
                                    "the dense inverse oracle");
  add_common(verify, true);
  int dim = 2;
  std::string export_path;
  verify->add_option("--dim", dim, "1 or 2")->check(CLI::IsMember({1, 2}));
  verify->add_option("--export-matrix", export_path,
                     "write the scaled scheme matrix in Matrix Market form");

  auto* poisson = app.add_subcommand("poisson-test",
                                     "Poisson solver accuracy check");
  int pn = 20, porder = 4;
  poisson->add_option("--grid-base", pn, "coarsest grid size");
  poisson->add_option("--order", porder, "scheme order (2 or 4)")
      ->check(CLI::IsMember({2, 4}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(ov);
    if (conv->parsed()) return cmd_convergence(ov, grids);
    if (verify->parsed()) return cmd_verify_monotonicity(ov, dim, export_path);
    if (poisson->parsed()) return cmd_poisson_test(pn, porder);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kExitSolver;
  }
  return 0;
}
