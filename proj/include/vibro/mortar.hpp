#pragma once

#include <iosfwd>
#include <vector>

#include "vibro/fe.hpp"
#include "vibro/mesh.hpp"

namespace vibro
{

// Reference coordinates of x in the quadratic element; Newton on the isoparametric map.
// Throws GeometryError outside the (slightly inflated) bounding box, on
// non-convergence, or when the preimage leaves [-1, 1]^2.
Point inverse_map(const Q9Coords &xy, Point x, int element_id = -1);

struct MappedGaussPoint
{
  Point x;            // global position
  double weight = 0;  // W_l on [-1, 1]
  double xi_e = 0;    // coordinate in the interface element
  Point xi_a;         // preimage in the first parent element
  Point xi_b;         // preimage in the second parent element
  double jacobian = 0;
};

// One intersection of an edge trace of mesh a with an edge trace of mesh b.
struct InterfaceElement
{
  double s0 = 0, s1 = 0;
  BoundaryEdge parent_a;
  BoundaryEdge parent_b;
  std::vector<MappedGaussPoint> gauss;
  double length() const { return s1 - s0; }
};

// For fsi interfaces mesh a carries the structure and mesh b the fluid; the normal is
// the outward normal of mesh b, i.e. it points from the fluid into the structure.
struct MortarInterface
{
  const Mesh *a = nullptr;
  const Mesh *b = nullptr;
  SharedSegment segment;
  Eigen::Vector2d normal;
  std::vector<InterfaceElement> elements;
};

Eigen::Vector2d outward_normal(Edge side);

MortarInterface detect_interfaces(const Mesh &a, const Mesh &b, int n_gp = 3);

// C[2p + d, q] = sum_e sum_l W_l N^a_p N^b_q n_d J^e; rows are DoFs of mesh a,
// columns nodes of mesh b.
RealSpMat assemble_coupling(const MortarInterface &iface);

// Same matrix computed edge-by-edge in the shared parent parametrisation. Only valid
// for node-for-node coincident traces; throws GeometryError otherwise.
RealSpMat assemble_conforming_coupling(const Mesh &structure, const Mesh &fluid);

// Scalar trace products int N_i N_j along the interface, for tying two elastic sides.
struct TraceProducts
{
  RealSpMat aa, ab, bb;  // node x node
};

TraceProducts trace_products(const MortarInterface &iface);

void write_interface_csv(std::ostream &out, const MortarInterface &iface);

}  // namespace vibro
