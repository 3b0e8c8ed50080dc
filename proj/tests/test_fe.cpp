#include <doctest.h>

#include <random>

#include "support.hpp"
#include "vibro/fe.hpp"
#include "vibro/materials.hpp"
#include "vibro/mesh.hpp"

using namespace vibro;

namespace
{

Q9Coords square(double x0, double y0, double hx, double hy)
{
  DomainSpec d;
  d.id = "e";
  d.geometry = {x0, y0, x0 + hx, y0 + hy};
  return generate_mesh(d, {hx, hy}).element_coords(0);
}

// Curved but valid element: interior nodes pushed off the affine positions.
Q9Coords distorted()
{
  auto xy = square(0, 0, 1, 1);
  xy[1].y -= 0.06;
  xy[3].x += 0.05;
  xy[4] = {0.53, 0.46};
  xy[5].x += 0.07;
  xy[7].y += 0.04;
  xy[8] = {1.1, 1.05};
  return xy;
}

}  // namespace

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly")
{
  for (int n = 1; n <= 5; ++n)
  {
    const auto g = gauss_legendre(n);
    for (int p = 0; p <= 2 * n - 1; ++p)
    {
      double s = 0;
      for (int i = 0; i < n; ++i)
        s += g.weights[i] * std::pow(g.points[i], p);
      const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-14));
    }
  }
}

TEST_CASE("Q9 shape functions interpolate nodes and sum to one")
{
  const double r[3] = {-1, 0, 1};
  for (int q = 0; q < 3; ++q)
    for (int p = 0; p < 3; ++p)
    {
      const auto N = q9_shape(r[p], r[q]);
      for (int a = 0; a < 9; ++a)
        CHECK(N[a] == doctest::Approx(a == 3 * q + p ? 1.0 : 0.0));
    }
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 50; ++i)
  {
    const double xi = u(rng), eta = u(rng);
    const auto N = q9_shape(xi, eta);
    const auto G = q9_shape_grad(xi, eta);
    double s = 0, gx = 0, gy = 0;
    for (int a = 0; a < 9; ++a)
    {
      s += N[a];
      gx += G[0][a];
      gy += G[1][a];
    }
    CHECK(s == doctest::Approx(1.0));
    CHECK(std::abs(gx) < 1e-13);
    CHECK(std::abs(gy) < 1e-13);
  }
}

TEST_CASE("undamped elastic stiffness has exactly three rigid-body modes")
{
  ElasticMaterial m{70e9, 0.3, 2700, 0.002, {}};
  for (const auto &xy : {square(0, 0, 1, 1), square(0.2, 0.1, 0.3, 0.05), distorted()})
  {
    const auto e = elastic_element(m, 1.0, xy);
    const Eigen::MatrixXd K = e.K.real();
    CHECK(e.K.imag().norm() == 0.0);
    CHECK((K - K.transpose()).norm() <= 1e-12 * K.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
    const auto &ev = es.eigenvalues();
    int zeros = 0;
    for (int i = 0; i < 18; ++i)
    {
      CHECK(ev(i) > -1e-9 * ev(17));
      zeros += std::abs(ev(i)) < 1e-9 * ev(17);
    }
    CHECK(zeros == 3);
  }
}

TEST_CASE("loss factor scales the elastic stiffness")
{
  ElasticMaterial m{70e9, 0.3, 2700, 0.002, {}};
  const auto xy = distorted();
  const auto plain = elastic_element(m, 1.0, xy);
  const auto damped = elastic_element(m, Complex(1.0, 0.02), xy);
  CHECK((damped.K - Complex(1.0, 0.02) * plain.K).norm() <= 1e-15 * plain.K.norm());
  CHECK((damped.M - plain.M).norm() == 0.0);
}

TEST_CASE("prestress adds a symmetric positive semidefinite geometric term")
{
  ElasticMaterial m{70e9, 0.3, 2700, 0.002, {}};
  const auto xy = square(0, 0, 0.1, 0.1);
  const auto base = elastic_element(m, 1.0, xy);
  m.prestress = {1000, 3000};
  const auto pre = elastic_element(m, 1.0, xy);
  const Eigen::MatrixXd G = (pre.K - base.K).real();
  CHECK(G.norm() > 0);
  CHECK((G - G.transpose()).norm() <= 1e-12 * G.norm());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  CHECK(es.eigenvalues()(0) > -1e-10 * es.eigenvalues()(17));
  // Rigid translations carry no membrane energy.
  Eigen::VectorXd tx = Eigen::VectorXd::Zero(18);
  for (int a = 0; a < 9; ++a)
    tx(2 * a) = 1.0;
  CHECK((G * tx).norm() < 1e-9 * G.norm());

  // G above is a difference of two stiffness matrices, so it only holds to eps |K|.
  const auto parts = elastic_parts(m, xy);
  CHECK((parts.geometric - G).norm() <= 1e-14 * base.K.norm());
  CHECK((pre.K.real() - parts.stiffness - parts.geometric).norm() <= 1e-15 * base.K.norm());
}

TEST_CASE("consistent mass trace matches the exact quadrature oracle")
{
  ElasticMaterial m{1.0, 0.0, 1.0, 1.0, {}};
  const auto e = elastic_element(m, 1.0, square(0, 0, 1, 1));
  CHECK(e.M.trace() == doctest::Approx(test::quadrature_oracle("q9_mass_trace")).epsilon(1e-14));
  // Total mass rho t area on each displacement component.
  double total = 0;
  for (int i = 0; i < 18; i += 2)
    for (int j = 0; j < 18; j += 2)
      total += e.M(i, j);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Helmholtz element: Laplacian null space, mass scaling, complex signs")
{
  const auto xy = distorted();
  const auto air = helmholtz_element(1.2, 343.0, 1.0, xy);
  for (int i = 0; i < 9; ++i)
    CHECK(std::abs(air.K.row(i).sum()) < 1e-13 * air.K.norm());
  const auto faster = helmholtz_element(1.2, 686.0, 1.0, xy);
  CHECK((faster.M - 0.25 * air.M).norm() <= 1e-15 * air.M.norm());
  CHECK((faster.K - air.K).norm() == 0.0);

  JcaMaterial wool;
  wool.phi = 0.98;
  wool.sigma = 2e4;
  wool.alpha_inf = 1;
  wool.viscous_length = 1e-4;
  wool.thermal_length = 2e-4;
  wool.rho_frame = 16;
  const auto j = jca_effective(wool, 500);
  const auto e = helmholtz_element(j.rho_eff, j.c_eff, 1.0, square(0, 0, 1, 1));
  // 1 / rho carries Im > 0 and 1 / K carries Im < 0 for a lossy medium.
  for (int i = 0; i < 9; ++i)
  {
    CHECK(e.K(i, i).imag() > 0.0);
    CHECK(e.M(i, i).imag() < 0.0);
  }
}

TEST_CASE("isoparametric map of an affine element")
{
  const auto xy = square(1, 2, 0.5, 0.25);
  const auto p = q9_map(xy, 0.0, 0.0);
  CHECK(p.x == doctest::Approx(1.25));
  CHECK(p.y == doctest::Approx(2.125));
  const auto J = q9_jacobian(xy, 0.3, -0.7);
  CHECK(J.determinant() == doctest::Approx(0.25 * 0.125));
}
