#include <catch2/catch_amalgamated.hpp>

#include "bpfd/field.hpp"
#include "bpfd/grid.hpp"

using namespace bpfd;

TEST_CASE("Grid1D Dirichlet construction") {
  Grid1D g(3, 0.0, 1.0);
  CHECK(g.h == Catch::Approx(0.25));
  CHECK(g.total() == 5);
  CHECK(g.x(0) == 0.0);
  CHECK(g.x(4) == 1.0);
  CHECK(g.is_boundary(0));
  CHECK(g.is_boundary(4));
  CHECK_FALSE(g.is_boundary(2));
  CHECK_THROWS_AS(Grid1D(4, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Grid1D(3, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("Grid1D periodic construction") {
  Grid1D g(8, 0.0, 2.0, Bc::Periodic);
  CHECK(g.h == Catch::Approx(0.25));
  CHECK(g.total() == 8);
  CHECK(g.wrap(-1) == 7);
  CHECK(g.wrap(8) == 0);
  CHECK_FALSE(g.is_boundary(0));
  CHECK_THROWS_AS(Grid1D(7, 0.0, 1.0, Bc::Periodic), std::invalid_argument);
}

TEST_CASE("gauss_lobatto_nodes coincide with the uniform grid") {
  Grid1D g(3, 0.0, 1.0);
  auto xs = gauss_lobatto_nodes(g);
  REQUIRE(xs.size() == 5);
  CHECK(xs[0] == 0.0);
  CHECK(xs[1] == Catch::Approx(0.25));
  CHECK(xs[2] == Catch::Approx(0.5));
  CHECK(xs[3] == Catch::Approx(0.75));
  CHECK(xs[4] == 1.0);

  Grid1D g1(1, 0.0, 1.0);
  auto xs1 = gauss_lobatto_nodes(g1);
  REQUIRE(xs1.size() == 3);
  CHECK(xs1[1] == Catch::Approx(0.5));

  Grid1D g2(3, 0.0, 2.0 * M_PI);
  auto xs2 = gauss_lobatto_nodes(g2);
  CHECK(xs2[1] == Catch::Approx(M_PI / 2.0));
  CHECK(xs2[3] == Catch::Approx(3.0 * M_PI / 2.0));
}

TEST_CASE("2D point classification") {
  Grid2D g(Grid1D(5, 0.0, 1.0), Grid1D(5, 0.0, 1.0));
  CHECK(classify(g, 1, 1) == PointClass::CellCenter);
  CHECK(classify(g, 0, 5) == PointClass::Boundary);
  CHECK(classify(g, 2, 2) == PointClass::Knot);
  CHECK(classify(g, 1, 2) == PointClass::EdgeCenterX);
  CHECK(classify(g, 2, 1) == PointClass::EdgeCenterY);
  CHECK(classify(g, 6, 3) == PointClass::Boundary);
  CHECK_THROWS_AS(classify(g, 7, 0), std::out_of_range);
}

TEST_CASE("classification partitions the grid with the expected counts") {
  int nx = 7, ny = 5;
  Grid2D g(Grid1D(nx, 0.0, 1.0), Grid1D(ny, 0.0, 1.0));
  int counts[5] = {0, 0, 0, 0, 0};
  for (int i = 0; i < g.gx.total(); ++i)
    for (int j = 0; j < g.gy.total(); ++j)
      counts[static_cast<int>(classify(g, i, j))]++;
  int Nx = (nx + 1) / 2, Ny = (ny + 1) / 2;
  CHECK(counts[static_cast<int>(PointClass::Boundary)] ==
        2 * (nx + 2) + 2 * ny);
  CHECK(counts[static_cast<int>(PointClass::CellCenter)] == Nx * Ny);
  CHECK(counts[static_cast<int>(PointClass::Knot)] == (Nx - 1) * (Ny - 1));
  int total = (nx + 2) * (ny + 2);
  CHECK(counts[static_cast<int>(PointClass::EdgeCenterX)] +
            counts[static_cast<int>(PointClass::EdgeCenterY)] ==
        total - counts[0] - counts[1] - counts[3 + 1]);
}

TEST_CASE("periodic grids have no boundary class") {
  Grid2D g(Grid1D(6, 0.0, 1.0, Bc::Periodic),
           Grid1D(6, 0.0, 1.0, Bc::Periodic));
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      CHECK(classify(g, i, j) != PointClass::Boundary);
  CHECK(classify(g, 0, 0) == PointClass::Knot);
  CHECK(classify(g, 1, 1) == PointClass::CellCenter);
}

TEST_CASE("mixed boundary kinds are rejected") {
  CHECK_THROWS_AS(Grid2D(Grid1D(5, 0.0, 1.0),
                         Grid1D(6, 0.0, 1.0, Bc::Periodic)),
                  std::invalid_argument);
}

TEST_CASE("lumped-mass quadrature integrates band-limited fields") {
  Grid2D g(Grid1D(40, 0.0, 2.0 * M_PI, Bc::Periodic),
           Grid1D(40, 0.0, 2.0 * M_PI, Bc::Periodic));
  Field2D f(g);
  f.set_from([](double x, double y) { return 2.0 + std::sin(x + y); });
  CHECK(f.quadrature_mean() == Catch::Approx(2.0).margin(1e-12));
  double area = 4.0 * M_PI * M_PI;
  CHECK(f.quadrature() == Catch::Approx(2.0 * area).margin(1e-10));
}

TEST_CASE("velocity max norm") {
  Grid2D g(Grid1D(5, 0.0, 1.0), Grid1D(5, 0.0, 1.0));
  auto vel = VelocityField::from_functions(
      g, [](double x, double) { return x; },
      [](double, double y) { return -2.0 * y; });
  // interior points only: max |v| at the largest interior y
  CHECK(vel.max_norm() == Catch::Approx(2.0 * 5.0 / 6.0));
}
