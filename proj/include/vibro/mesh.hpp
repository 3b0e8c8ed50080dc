#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "vibro/config.hpp"

namespace vibro
{

// Element-edge trace on the rectangle boundary. Nodes run in the direction of
// increasing coordinate along the edge (x for south/north, y for east/west).
struct BoundaryEdge
{
  int element = 0;
  Edge side = Edge::south;
  std::array<int, 3> nodes{};
  double s0 = 0.0, s1 = 0.0;
};

// Structured mesh of 9-node quadrilaterals on one rectangular domain.
// Local node a = 3*q + p sits at reference (xi_p, eta_q), xi in {-1, 0, 1}.
struct Mesh
{
  std::string domain_id;
  Rect rect;
  int nx = 0, ny = 0;
  double hx = 0.0, hy = 0.0;
  std::vector<Point> nodes;
  std::vector<std::array<int, 9>> elements;
  std::vector<BoundaryEdge> boundary_edges;

  int node_columns() const { return 2 * nx + 1; }
  int node_rows() const { return 2 * ny + 1; }
  int node_index(int i, int j) const { return j * node_columns() + i; }
  std::array<Point, 9> element_coords(int e) const;
  std::vector<BoundaryEdge> edges_on(Edge side) const;
  std::vector<int> nodes_on(Edge side) const;
  // Element containing p (ties resolved toward lower indices), or -1.
  int locate(Point p) const;
};

Mesh generate_mesh(const DomainSpec &domain, ElementSize h);

double supports_per_wavelength(const Mesh &mesh, double lambda);
double supports_per_wavelength(ElementSize h, double lambda);

// Shortest wavelength carried by the domain's material at f.
double min_wavelength(const ModelConfig &config, const DomainSpec &domain, double f);

struct MeshSchedule
{
  std::vector<MeshLevel> levels;
  std::vector<int> band_assignment;  // band -> level
  // Last grid frequency each used level (except the finest used) still satisfies the
  // criterion, snapped down to the grid; one entry per level transition.
  std::vector<double> f_switch;
};

// Worst supports_per_wavelength over all domains for a level at frequency f.
double level_supports(const ModelConfig &config, const MeshLevel &level, double f);

MeshSchedule build_schedule(const ModelConfig &config);
MeshSchedule build_schedule(const ModelConfig &config, const std::vector<MeshLevel> &levels);

struct DofCount
{
  std::vector<std::string> domains;
  std::vector<int> per_domain;
  int shared = 0;  // DoFs merged across conforming same-field interfaces
  int total = 0;
};

struct DomainMesh
{
  const Mesh *mesh = nullptr;
  DomainKind kind = DomainKind::acoustic;
};

int dofs_per_node(DomainKind kind);

// Adjacent same-field domains whose traces coincide node-for-node share those
// nodes when merge_conforming is set; otherwise every domain is counted on its own.
DofCount dof_count(const std::vector<DomainMesh> &meshes, bool merge_conforming);

void write_mesh(std::ostream &out, const Mesh &mesh);

}  // namespace vibro
