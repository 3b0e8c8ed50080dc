#include "vibro/fe.hpp"

#include <cmath>

#include <fmt/format.h>

namespace vibro
{

GaussRule gauss_legendre(int n)
{
  if (n < 1)
    throw std::invalid_argument("gauss_legendre: n must be >= 1");
  GaussRule r;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i)
  {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it)
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k)
      {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    r.points[i] = -x;
    r.points[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  if (n % 2 == 1)
    r.points[n / 2] = 0.0;
  return r;
}

std::array<double, 3> line_shape(double t)
{
  return {0.5 * t * (t - 1.0), 1.0 - t * t, 0.5 * t * (t + 1.0)};
}

std::array<double, 3> line_shape_deriv(double t) { return {t - 0.5, -2.0 * t, t + 0.5}; }

std::array<double, 9> q9_shape(double xi, double eta)
{
  const auto a = line_shape(xi);
  const auto b = line_shape(eta);
  std::array<double, 9> n;
  for (int q = 0; q < 3; ++q)
  {
    for (int p = 0; p < 3; ++p)
      n[3 * q + p] = a[p] * b[q];
  }
  return n;
}

std::array<std::array<double, 9>, 2> q9_shape_grad(double xi, double eta)
{
  const auto a = line_shape(xi), da = line_shape_deriv(xi);
  const auto b = line_shape(eta), db = line_shape_deriv(eta);
  std::array<std::array<double, 9>, 2> g;
  for (int q = 0; q < 3; ++q)
  {
    for (int p = 0; p < 3; ++p)
    {
      g[0][3 * q + p] = da[p] * b[q];
      g[1][3 * q + p] = a[p] * db[q];
    }
  }
  return g;
}

Point q9_map(const Q9Coords &xy, double xi, double eta)
{
  const auto n = q9_shape(xi, eta);
  Point p{0.0, 0.0};
  for (int a = 0; a < 9; ++a)
  {
    p.x += n[a] * xy[a].x;
    p.y += n[a] * xy[a].y;
  }
  return p;
}

Eigen::Matrix2d q9_jacobian(const Q9Coords &xy, double xi, double eta)
{
  const auto g = q9_shape_grad(xi, eta);
  Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
  for (int a = 0; a < 9; ++a)
  {
    // J(i, j) = d x_i / d xi_j
    J(0, 0) += g[0][a] * xy[a].x;
    J(0, 1) += g[1][a] * xy[a].x;
    J(1, 0) += g[0][a] * xy[a].y;
    J(1, 1) += g[1][a] * xy[a].y;
  }
  return J;
}

namespace
{

struct QuadPoint
{
  std::array<double, 9> N;
  std::array<double, 9> dNdx, dNdy;
  double w;  // weight * det J
};

// 3x3 Gauss data in physical coordinates.
std::array<QuadPoint, 9> quadrature(const Q9Coords &xy)
{
  static const GaussRule rule = gauss_legendre(3);
  std::array<QuadPoint, 9> qp;
  int k = 0;
  for (int j = 0; j < 3; ++j)
  {
    for (int i = 0; i < 3; ++i, ++k)
    {
      const double xi = rule.points[i], eta = rule.points[j];
      const auto J = q9_jacobian(xy, xi, eta);
      const double det = J.determinant();
      if (!(det > 0.0))
        throw GeometryError(fmt::format("singular Jacobian (det = {:.3e}) at ({}, {})", det, xi,
                                        eta));
      const Eigen::Matrix2d Jinv = J.inverse();
      const auto g = q9_shape_grad(xi, eta);
      auto &q = qp[k];
      q.N = q9_shape(xi, eta);
      for (int a = 0; a < 9; ++a)
      {
        // grad_x N = J^{-T} grad_xi N
        q.dNdx[a] = Jinv(0, 0) * g[0][a] + Jinv(1, 0) * g[1][a];
        q.dNdy[a] = Jinv(0, 1) * g[0][a] + Jinv(1, 1) * g[1][a];
      }
      q.w = rule.weights[i] * rule.weights[j] * det;
    }
  }
  return qp;
}

}  // namespace

ElasticParts elastic_parts(const ElasticMaterial &m, const Q9Coords &xy)
{
  const double c = m.E / (1.0 - m.nu * m.nu);
  Eigen::Matrix3d D;
  D << c, c * m.nu, 0.0, c * m.nu, c, 0.0, 0.0, 0.0, c * (1.0 - m.nu) / 2.0;

  ElasticParts out;
  out.stiffness.setZero();
  out.geometric.setZero();
  out.mass.setZero();
  for (const auto &q : quadrature(xy))
  {
    Eigen::Matrix<double, 3, 18> B = Eigen::Matrix<double, 3, 18>::Zero();
    for (int a = 0; a < 9; ++a)
    {
      B(0, 2 * a) = q.dNdx[a];
      B(1, 2 * a + 1) = q.dNdy[a];
      B(2, 2 * a) = q.dNdy[a];
      B(2, 2 * a + 1) = q.dNdx[a];
    }
    out.stiffness.noalias() += (m.thickness * q.w) * B.transpose() * D * B;
    for (int a = 0; a < 9; ++a)
    {
      for (int b = 0; b < 9; ++b)
      {
        const double g = q.w * (m.prestress.tx * q.dNdx[a] * q.dNdx[b] +
                                m.prestress.ty * q.dNdy[a] * q.dNdy[b]);
        const double mm = q.w * m.rho * m.thickness * q.N[a] * q.N[b];
        for (int d = 0; d < 2; ++d)
        {
          out.geometric(2 * a + d, 2 * b + d) += g;
          out.mass(2 * a + d, 2 * b + d) += mm;
        }
      }
    }
  }
  return out;
}

ElasticElement elastic_element(const ElasticMaterial &m, Complex damping_scale, const Q9Coords &xy)
{
  const auto parts = elastic_parts(m, xy);
  ElasticElement e;
  e.K = damping_scale * parts.stiffness.cast<Complex>() + parts.geometric.cast<Complex>();
  e.M = parts.mass;
  return e;
}

ScalarParts scalar_parts(const Q9Coords &xy)
{
  ScalarParts out;
  out.laplace.setZero();
  out.mass.setZero();
  for (const auto &q : quadrature(xy))
  {
    for (int a = 0; a < 9; ++a)
    {
      for (int b = 0; b < 9; ++b)
      {
        out.laplace(a, b) += q.w * (q.dNdx[a] * q.dNdx[b] + q.dNdy[a] * q.dNdy[b]);
        out.mass(a, b) += q.w * q.N[a] * q.N[b];
      }
    }
  }
  return out;
}

HelmholtzElement helmholtz_element(Complex rho, Complex c, Complex damping_scale, const Q9Coords &xy)
{
  if (rho == Complex(0.0))
    throw std::domain_error("helmholtz_element: zero density");
  const auto parts = scalar_parts(xy);
  HelmholtzElement e;
  e.K = (damping_scale / rho) * parts.laplace.cast<Complex>();
  e.M = (1.0 / (rho * c * c)) * parts.mass.cast<Complex>();
  return e;
}

}  // namespace vibro
