#pragma once

#include <array>
#include <vector>

#include "vibro/config.hpp"

namespace vibro
{

struct GaussRule
{
  std::vector<double> points;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [-1, 1].
GaussRule gauss_legendre(int n);

// 1D quadratic Lagrange basis on nodes {-1, 0, 1}.
std::array<double, 3> line_shape(double t);
std::array<double, 3> line_shape_deriv(double t);

using Q9Coords = std::array<Point, 9>;

std::array<double, 9> q9_shape(double xi, double eta);
// d/dxi in [0], d/deta in [1].
std::array<std::array<double, 9>, 2> q9_shape_grad(double xi, double eta);
Point q9_map(const Q9Coords &xy, double xi, double eta);
Eigen::Matrix2d q9_jacobian(const Q9Coords &xy, double xi, double eta);

using Elastic18 = Eigen::Matrix<double, 18, 18>;
using Complex18 = Eigen::Matrix<Complex, 18, 18>;
using Real9 = Eigen::Matrix<double, 9, 9>;
using Complex9 = Eigen::Matrix<Complex, 9, 9>;

// Frequency-independent pieces of an elastic element. DoFs interleaved (ux, uy) per node.
struct ElasticParts
{
  Elastic18 stiffness;  // thickness * int B^T D B
  Elastic18 geometric;  // int Tx N,x N,x + Ty N,y N,y on each component
  Elastic18 mass;       // rho * thickness * int N^T N
};

ElasticParts elastic_parts(const ElasticMaterial &m, const Q9Coords &xy);

struct ElasticElement
{
  Complex18 K;
  Elastic18 M;
};

// K = damping_scale * stiffness + geometric.
ElasticElement elastic_element(const ElasticMaterial &m, Complex damping_scale, const Q9Coords &xy);

struct ScalarParts
{
  Real9 laplace;  // int grad N . grad N
  Real9 mass;     // int N N
};

ScalarParts scalar_parts(const Q9Coords &xy);

struct HelmholtzElement
{
  Complex9 K;
  Complex9 M;
};

// K = damping_scale / rho * laplace, M = mass / (rho c^2).
HelmholtzElement helmholtz_element(Complex rho, Complex c, Complex damping_scale,
                                   const Q9Coords &xy);

}  // namespace vibro
