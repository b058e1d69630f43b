#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "bpfd/field.hpp"
#include "bpfd/operators.hpp"

using namespace bpfd;

TEST_CASE("1D stencil rows carry the scheme coefficients") {
  Grid1D g(5, 0.0, 1.0);
  DiffOps1D ops = build_ops_1d(g, 4);
  double h = g.h;

  SECTION("cell-center (odd) rows") {
    StencilRow d1 = ops.d1_row(1);
    REQUIRE(d1.m == 2);
    CHECK(ops.d1_scale * d1.c[0] == Catch::Approx(-1.0 / (2.0 * h)));
    CHECK(ops.d1_scale * d1.c[1] == Catch::Approx(1.0 / (2.0 * h)));
    StencilRow d2 = ops.d2_row(3);
    REQUIRE(d2.m == 3);
    CHECK(ops.d2_scale * d2.c[0] == Catch::Approx(1.0 / (h * h)));
    CHECK(ops.d2_scale * d2.c[1] == Catch::Approx(-2.0 / (h * h)));
    CHECK(ops.d2_scale * d2.c[2] == Catch::Approx(1.0 / (h * h)));
  }
  SECTION("cell-end (even) rows") {
    StencilRow d1 = ops.d1_row(2);
    REQUIRE(d1.m == 4);
    double s = 1.0 / (2.0 * h);
    CHECK(ops.d1_scale * d1.c[0] == Catch::Approx(0.5 * s));
    CHECK(ops.d1_scale * d1.c[1] == Catch::Approx(-2.0 * s));
    CHECK(ops.d1_scale * d1.c[2] == Catch::Approx(2.0 * s));
    CHECK(ops.d1_scale * d1.c[3] == Catch::Approx(-0.5 * s));
    StencilRow d2 = ops.d2_row(2);
    REQUIRE(d2.m == 5);
    // D2 * h^2 * (-1) = (1/4, -2, 7/2, -2, 1/4)
    CHECK(-h * h * ops.d2_scale * d2.c[0] == Catch::Approx(0.25));
    CHECK(-h * h * ops.d2_scale * d2.c[1] == Catch::Approx(-2.0));
    CHECK(-h * h * ops.d2_scale * d2.c[2] == Catch::Approx(3.5));
    CHECK(-h * h * ops.d2_scale * d2.c[3] == Catch::Approx(-2.0));
    CHECK(-h * h * ops.d2_scale * d2.c[4] == Catch::Approx(0.25));
  }
  SECTION("order-2 rows are classical centered differences everywhere") {
    DiffOps1D o2 = build_ops_1d(g, 2);
    for (int i = 1; i <= 5; ++i) {
      CHECK(o2.d1_row(i).m == 2);
      CHECK(o2.d2_row(i).m == 3);
    }
  }
  SECTION("invalid combinations") {
    CHECK_THROWS_AS(build_ops_1d(g, 3), std::invalid_argument);
    CHECK_THROWS_AS(
        build_ops_1d(Grid1D(6, 0.0, 1.0, Bc::Periodic), 3),
        std::invalid_argument);
  }
}

TEST_CASE("row sums of the dense 1D matrices are exactly zero") {
  for (Bc bc : {Bc::Dirichlet, Bc::Periodic}) {
    int n = bc == Bc::Dirichlet ? 9 : 10;
    Grid1D g(n, 0.0, 1.0, bc);
    for (int order : {2, 4}) {
      DiffOps1D ops = build_ops_1d(g, order);
      for (bool second : {false, true}) {
        auto m = ops.dense(second);
        for (auto& row : m) {
          // The unscaled sums cancel exactly; the dense realization is
          // within round-off of zero.
          double s = 0.0;
          for (double v : row) s += v;
          CHECK(std::abs(s) < 1e-11);
        }
      }
    }
  }
}

TEST_CASE("matrix-free operator maps constants to constants exactly") {
  for (Bc bc : {Bc::Dirichlet, Bc::Periodic}) {
    int n = bc == Bc::Dirichlet ? 9 : 10;
    Grid2D g(Grid1D(n, 0.0, 2.0, bc), Grid1D(n, 0.0, 2.0, bc));
    auto vel = VelocityField::from_functions(
        g, [](double x, double y) { return std::sin(x + y); },
        [](double x, double y) { return std::cos(x - y); });
    for (int order : {2, 4}) {
      ConvDiffOp op(g, order, 0.37, 0.21, 0.0, &vel);
      Field2D ones(g);
      ones.fill(1.0);
      Field2D out = op.apply_Lbar(ones);
      for (double v : out.v) CHECK(v == 1.0);  // exact
    }
  }
}

TEST_CASE("order-4 D2 is exact on cubics at interior points") {
  Grid1D g(9, 0.0, 1.0);
  DiffOps1D ops = build_ops_1d(g, 4);
  auto f = [](double x) { return 2.0 * x * x * x - x * x + 3.0 * x - 5.0; };
  auto fpp = [](double x) { return 12.0 * x - 2.0; };
  std::vector<double> vals(g.total());
  for (int i = 0; i < g.total(); ++i) vals[i] = f(g.x(i));
  for (int i = 1; i <= g.n; ++i) {
    StencilRow r = ops.d2_row(i);
    double s = 0.0;
    for (int k = 0; k < r.m; ++k) s += r.c[k] * vals[i + r.off[k]];
    CHECK(ops.d2_scale * s == Catch::Approx(fpp(g.x(i))).margin(1e-9));
  }
}

TEST_CASE("diffusion of a linear function vanishes") {
  Grid2D g(Grid1D(5, 0.0, 1.0), Grid1D(5, 0.0, 1.0));
  ConvDiffOp op(g, 4, 1.0, 1.0, 0.0, nullptr);
  Field2D f(g);
  f.set_from([](double x, double) { return x; });
  Field2D out = op.apply_Lbar(f);
  for (int i = 0; i < f.nx_tot(); ++i)
    for (int j = 0; j < f.ny_tot(); ++j)
      CHECK(out(i, j) == Catch::Approx(f(i, j)).margin(1e-13));
}

TEST_CASE("single cell-center hot spot produces the tabulated stencil") {
  Grid2D g(Grid1D(9, 0.0, 1.0), Grid1D(9, 0.0, 1.0));
  double h = g.gx.h;
  ConvDiffOp op(g, 4, 1.0, h * h, 0.0, nullptr);
  Field2D f(g);
  int ci = 5, cj = 5;  // both odd: cell center
  f(ci, cj) = 1.0;
  Field2D out = op.apply_Lbar(f);
  // Row at the hot spot: 1 + (2 + 2).
  CHECK(out(ci, cj) == Catch::Approx(5.0));
  // The four direct neighbors are edge centers whose five-point direction
  // points at the hot spot with weight -2.
  CHECK(out(ci + 1, cj) == Catch::Approx(-2.0));
  CHECK(out(ci - 1, cj) == Catch::Approx(-2.0));
  CHECK(out(ci, cj + 1) == Catch::Approx(-2.0));
  CHECK(out(ci, cj - 1) == Catch::Approx(-2.0));
  // Cell-center rows two away use the 3-point stencil and miss it; no
  // five-point row reaches an odd (cell-center) column at distance two.
  CHECK(out(ci + 2, cj) == Catch::Approx(0.0));
  CHECK(out(ci, cj - 2) == Catch::Approx(0.0));
}

TEST_CASE("single knot hot spot produces the tabulated stencil") {
  Grid2D g(Grid1D(9, 0.0, 1.0), Grid1D(9, 0.0, 1.0));
  double h = g.gx.h;
  ConvDiffOp op(g, 4, 1.0, h * h, 0.0, nullptr);
  Field2D f(g);
  int ci = 4, cj = 4;  // both even: knot
  f(ci, cj) = 1.0;
  Field2D out = op.apply_Lbar(f);
  // Knot row: 1 + (7/2 + 7/2).
  CHECK(out(ci, cj) == Catch::Approx(8.0));
  // Direct neighbors are edge centers whose three-point direction points at
  // the knot with weight -1.
  CHECK(out(ci + 1, cj) == Catch::Approx(-1.0));
  CHECK(out(ci - 1, cj) == Catch::Approx(-1.0));
  CHECK(out(ci, cj + 1) == Catch::Approx(-1.0));
  CHECK(out(ci, cj - 1) == Catch::Approx(-1.0));
  // Five-point rows two away see the knot with weight 1/4.
  CHECK(out(ci + 2, cj) == Catch::Approx(0.25));
  CHECK(out(ci - 2, cj) == Catch::Approx(0.25));
  CHECK(out(ci, cj + 2) == Catch::Approx(0.25));
  CHECK(out(ci, cj - 2) == Catch::Approx(0.25));
}

TEST_CASE("assembled matrix agrees with the matrix-free apply") {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (Bc bc : {Bc::Dirichlet, Bc::Periodic}) {
    int n = bc == Bc::Dirichlet ? 5 : 6;
    Grid2D g(Grid1D(n, 0.0, 1.0, bc), Grid1D(n, 0.0, 1.0, bc));
    auto vel = VelocityField::from_functions(
        g, [](double x, double y) { return std::sin(3.0 * x + y); },
        [](double x, double y) { return std::cos(x - 2.0 * y); });
    for (int order : {2, 4}) {
      ConvDiffOp op(g, order, 0.4, 0.05, 0.7, &vel);
      Csr A = op.assemble();
      for (int rep = 0; rep < 5; ++rep) {
        Field2D f(g);
        for (double& v : f.v) v = dist(rng);
        Field2D out = op.apply_Lbar(f);
        std::vector<double> y = A.matvec(f.v);
        double scale = out.max_abs();
        for (int k = 0; k < g.total_points(); ++k)
          CHECK(std::abs(y[k] - out.v[k]) < 1e-12 * std::max(scale, 1.0));
      }
    }
  }
}

TEST_CASE("assembled matrix structure on a 3x3 grid") {
  Grid2D g(Grid1D(3, 0.0, 1.0), Grid1D(3, 0.0, 1.0));
  ConvDiffOp op(g, 4, 1.0, 1.0, 0.0, nullptr);
  Csr A = op.assemble();
  REQUIRE(A.n == 25);
  int identity_rows = 0;
  for (int r = 0; r < 25; ++r) {
    int i = g.unflatten_i(r), j = g.unflatten_j(r);
    if (g.gx.is_boundary(i) || g.gy.is_boundary(j)) {
      REQUIRE(A.rowptr[r + 1] - A.rowptr[r] == 1);
      CHECK(A.col[A.rowptr[r]] == r);
      CHECK(A.val[A.rowptr[r]] == 1.0);
      ++identity_rows;
    }
  }
  CHECK(identity_rows == 16);
  std::vector<double> ones(25, 1.0);
  std::vector<double> out = A.matvec(ones);
  for (double v : out) CHECK(v == Catch::Approx(1.0).margin(1e-13));
}

TEST_CASE("1D assembly and matrix-free apply agree") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (Bc bc : {Bc::Dirichlet, Bc::Periodic}) {
    int n = bc == Bc::Dirichlet ? 9 : 10;
    Grid1D g(n, 0.0, 1.5, bc);
    std::vector<double> u(g.total()), phi(g.total()), y1(g.total()),
        y2(g.total());
    for (auto& v : u) v = dist(rng);
    for (auto& v : phi) v = dist(rng);
    Csr A = assemble_conv_diff_1d(g, 4, 0.3, 0.07, u);
    A.matvec(phi, y1);
    apply_conv_diff_1d(g, 4, 0.3, 0.07, u, phi, y2);
    for (int i = 0; i < g.total(); ++i)
      CHECK(y1[i] == Catch::Approx(y2[i]).margin(1e-13));
    // constants map to constants exactly through the matrix-free path
    std::fill(phi.begin(), phi.end(), 1.0);
    apply_conv_diff_1d(g, 4, 0.3, 0.07, u, phi, y2);
    for (double v : y2) CHECK(v == 1.0);
  }
}

TEST_CASE("Neumann fixture rows sum to zero") {
  for (bool second : {false, true}) {
    auto m = neumann_matrix_unscaled(9, second);
    for (auto& row : m) {
      double s = 0.0;
      for (double v : row) s += v;
      CHECK(s == 0.0);
    }
  }
}

TEST_CASE("second-order path reproduces the classical centered scheme") {
  Grid2D g(Grid1D(5, 0.0, 1.0), Grid1D(5, 0.0, 1.0));
  double h = g.gx.h;
  auto vel = VelocityField::from_functions(
      g, [](double x, double y) { return x + y; },
      [](double x, double y) { return x - y; });
  double mu = 0.3, dt = 0.11;
  ConvDiffOp op(g, 2, mu, dt, 0.0, &vel);
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Field2D f(g);
  for (double& v : f.v) v = dist(rng);
  Field2D out = op.apply_Lbar(f);
  for (int i = 1; i <= 5; ++i)
    for (int j = 1; j <= 5; ++j) {
      double conv = vel.u(i, j) * (f(i + 1, j) - f(i - 1, j)) / (2 * h) +
                    vel.v(i, j) * (f(i, j + 1) - f(i, j - 1)) / (2 * h);
      double lap = (f(i + 1, j) + f(i - 1, j) + f(i, j + 1) + f(i, j - 1) -
                    4.0 * f(i, j)) /
                   (h * h);
      CHECK(out(i, j) ==
            Catch::Approx(f(i, j) + dt * (conv - mu * lap)).margin(1e-12));
    }
}

TEST_CASE("fourth-order periodic differentiation") {
  Grid2D g(Grid1D(40, 0.0, 2.0 * M_PI, Bc::Periodic),
           Grid1D(40, 0.0, 2.0 * M_PI, Bc::Periodic));
  SECTION("constants differentiate to zero") {
    Field2D f(g);
    f.fill(3.7);
    Field2D d = d1_fourth_order_velocity(f, Axis::X);
    for (double v : d.v) CHECK(v == Catch::Approx(0.0).margin(1e-14));
  }
  SECTION("sin(x): fourth-order slope under refinement") {
    auto err = [](int n) {
      Grid2D gg(Grid1D(n, 0.0, 2.0 * M_PI, Bc::Periodic),
                Grid1D(n, 0.0, 2.0 * M_PI, Bc::Periodic));
      Field2D f(gg);
      f.set_from([](double x, double) { return std::sin(x); });
      Field2D d = d1_fourth_order_velocity(f, Axis::X);
      double e = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          e = std::max(e, std::abs(d(i, j) - std::cos(gg.gx.x(i))));
      return e;
    };
    double ratio = err(40) / err(80);
    CHECK(ratio > 13.0);
    CHECK(ratio < 19.0);
  }
  SECTION("non-periodic grids are rejected") {
    Grid2D gd(Grid1D(5, 0.0, 1.0), Grid1D(5, 0.0, 1.0));
    Field2D f(gd);
    CHECK_THROWS_AS(d1_fourth_order_velocity(f, Axis::X),
                    std::invalid_argument);
  }
}
