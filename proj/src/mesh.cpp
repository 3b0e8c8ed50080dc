#include "vibro/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "vibro/materials.hpp"

namespace vibro
{

std::array<Point, 9> Mesh::element_coords(int e) const
{
  std::array<Point, 9> xy;
  for (int a = 0; a < 9; ++a)
    xy[a] = nodes[elements[e][a]];
  return xy;
}

std::vector<BoundaryEdge> Mesh::edges_on(Edge side) const
{
  std::vector<BoundaryEdge> out;
  for (const auto &b : boundary_edges)
  {
    if (b.side == side)
      out.push_back(b);
  }
  return out;
}

std::vector<int> Mesh::nodes_on(Edge side) const
{
  std::vector<int> out;
  const int nc = node_columns(), nr = node_rows();
  switch (side)
  {
    case Edge::south:
      for (int i = 0; i < nc; ++i)
        out.push_back(node_index(i, 0));
      break;
    case Edge::north:
      for (int i = 0; i < nc; ++i)
        out.push_back(node_index(i, nr - 1));
      break;
    case Edge::west:
      for (int j = 0; j < nr; ++j)
        out.push_back(node_index(0, j));
      break;
    case Edge::east:
      for (int j = 0; j < nr; ++j)
        out.push_back(node_index(nc - 1, j));
      break;
  }
  return out;
}

int Mesh::locate(Point p) const
{
  const double tol = 1e-9 * std::max(rect.width(), rect.height());
  if (!rect.contains(p, tol))
    return -1;
  int ex = static_cast<int>(std::floor((p.x - rect.x0) / hx));
  int ey = static_cast<int>(std::floor((p.y - rect.y0) / hy));
  ex = std::clamp(ex, 0, nx - 1);
  ey = std::clamp(ey, 0, ny - 1);
  return ey * nx + ex;
}

namespace
{

// Corner-line coordinates with the far end pinned, mid lines as exact means.
std::vector<double> node_lines(double a, double b, int n)
{
  const double h = (b - a) / n;
  std::vector<double> corners(n + 1);
  for (int k = 0; k < n; ++k)
    corners[k] = a + k * h;
  corners[n] = b;
  std::vector<double> lines(2 * n + 1);
  for (int k = 0; k <= n; ++k)
    lines[2 * k] = corners[k];
  for (int k = 0; k < n; ++k)
    lines[2 * k + 1] = 0.5 * (corners[k] + corners[k + 1]);
  return lines;
}

}  // namespace

Mesh generate_mesh(const DomainSpec &domain, ElementSize h)
{
  const auto &r = domain.geometry;
  if (!(r.width() > 0 && r.height() > 0))
    throw GeometryError(fmt::format("domain '{}': degenerate rectangle", domain.id));
  if (!(h.hx > 0 && h.hy > 0))
    throw GeometryError(fmt::format("domain '{}': element size must be positive", domain.id));

  Mesh m;
  m.domain_id = domain.id;
  m.rect = r;
  m.nx = std::max(1, static_cast<int>(std::lround(r.width() / h.hx)));
  m.ny = std::max(1, static_cast<int>(std::lround(r.height() / h.hy)));
  m.hx = r.width() / m.nx;
  m.hy = r.height() / m.ny;

  const auto xs = node_lines(r.x0, r.x1, m.nx);
  const auto ys = node_lines(r.y0, r.y1, m.ny);
  m.nodes.reserve(xs.size() * ys.size());
  for (double y : ys)
  {
    for (double x : xs)
      m.nodes.push_back({x, y});
  }

  m.elements.reserve(static_cast<std::size_t>(m.nx) * m.ny);
  for (int ey = 0; ey < m.ny; ++ey)
  {
    for (int ex = 0; ex < m.nx; ++ex)
    {
      std::array<int, 9> conn;
      for (int q = 0; q < 3; ++q)
      {
        for (int p = 0; p < 3; ++p)
          conn[3 * q + p] = m.node_index(2 * ex + p, 2 * ey + q);
      }
      m.elements.push_back(conn);
    }
  }

  for (int ex = 0; ex < m.nx; ++ex)
  {
    const int e = ex;
    const auto &c = m.elements[e];
    m.boundary_edges.push_back({e, Edge::south, {c[0], c[1], c[2]}, xs[2 * ex], xs[2 * ex + 2]});
  }
  for (int ey = 0; ey < m.ny; ++ey)
  {
    const int e = ey * m.nx + m.nx - 1;
    const auto &c = m.elements[e];
    m.boundary_edges.push_back({e, Edge::east, {c[2], c[5], c[8]}, ys[2 * ey], ys[2 * ey + 2]});
  }
  for (int ex = 0; ex < m.nx; ++ex)
  {
    const int e = (m.ny - 1) * m.nx + ex;
    const auto &c = m.elements[e];
    m.boundary_edges.push_back({e, Edge::north, {c[6], c[7], c[8]}, xs[2 * ex], xs[2 * ex + 2]});
  }
  for (int ey = 0; ey < m.ny; ++ey)
  {
    const int e = ey * m.nx;
    const auto &c = m.elements[e];
    m.boundary_edges.push_back({e, Edge::west, {c[0], c[3], c[6]}, ys[2 * ey], ys[2 * ey + 2]});
  }
  return m;
}

double supports_per_wavelength(ElementSize h, double lambda)
{
  return 2.0 * lambda / std::max(h.hx, h.hy);
}

double supports_per_wavelength(const Mesh &mesh, double lambda)
{
  return supports_per_wavelength(ElementSize{mesh.hx, mesh.hy}, lambda);
}

double min_wavelength(const ModelConfig &config, const DomainSpec &domain, double f)
{
  return wavelength(config.material(domain.material_id).law, f);
}

namespace
{

// Element size after rounding to whole element counts, as generate_mesh would build it.
ElementSize effective_size(const DomainSpec &d, ElementSize h)
{
  const int nx = std::max(1, static_cast<int>(std::lround(d.geometry.width() / h.hx)));
  const int ny = std::max(1, static_cast<int>(std::lround(d.geometry.height() / h.hy)));
  return {d.geometry.width() / nx, d.geometry.height() / ny};
}

}  // namespace

double level_supports(const ModelConfig &config, const MeshLevel &level, double f)
{
  double worst = std::numeric_limits<double>::infinity();
  for (const auto &d : config.domains)
  {
    const auto h = effective_size(d, level.sizes.at(d.id));
    worst = std::min(worst, supports_per_wavelength(h, min_wavelength(config, d, f)));
  }
  return worst;
}

MeshSchedule build_schedule(const ModelConfig &config)
{
  return build_schedule(config, config.mesh.levels);
}

MeshSchedule build_schedule(const ModelConfig &config, const std::vector<MeshLevel> &levels)
{
  if (levels.empty())
    throw ConfigError("mesh: no levels defined");
  for (std::size_t l = 1; l < levels.size(); ++l)
  {
    for (const auto &d : config.domains)
    {
      const auto &a = levels[l - 1].sizes.at(d.id);
      const auto &b = levels[l].sizes.at(d.id);
      if (b.hx > a.hx || b.hy > a.hy)
        throw ConfigError(fmt::format("mesh: levels must be ordered coarse to fine ('{}' is "
                                      "coarser than '{}' in domain '{}')",
                                      levels[l].name, levels[l - 1].name, d.id));
    }
  }

  const double target = config.mesh.supports_per_wavelength;
  const auto &plan = config.frequency;
  auto ok = [&](std::size_t l, double f) { return level_supports(config, levels[l], f) >= target; };

  MeshSchedule s;
  s.levels = levels;
  const auto nb = band_count(plan);
  for (std::size_t b = 0; b < nb; ++b)
  {
    const double f_hi = plan.band_edges[b + 1];
    int chosen = -1;
    for (std::size_t l = 0; l < levels.size(); ++l)
    {
      if (ok(l, f_hi))
      {
        chosen = static_cast<int>(l);
        break;
      }
    }
    if (chosen < 0)
      throw ConfigError(fmt::format("mesh: finest level violates {} supports per wavelength "
                                    "at {} Hz",
                                    target, f_hi));
    s.band_assignment.push_back(chosen);
  }

  // Switch points for every level that hands over to a finer one.
  for (std::size_t b = 0; b + 1 < nb; ++b)
  {
    const int l = s.band_assignment[b];
    if (s.band_assignment[b + 1] == l)
      continue;
    double lo = plan.band_edges[b + 1];
    double hi = plan.f_max;
    if (ok(l, hi))
    {
      s.f_switch.push_back(hi);
      continue;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-9 * hi; ++it)
    {
      const double mid = 0.5 * (lo + hi);
      (ok(l, mid) ? lo : hi) = mid;
    }
    // Slack covers the bisection tolerance when the switch sits exactly on a grid point.
    const double k = std::floor((lo - plan.f_min) / plan.delta_f + 1e-6);
    s.f_switch.push_back(plan.f_min + k * plan.delta_f);
  }
  return s;
}

int dofs_per_node(DomainKind kind) { return kind == DomainKind::elastic ? 2 : 1; }

namespace
{

struct UnionFind
{
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a)
  {
    while (parent[a] != a)
    {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(int a, int b)
  {
    a = find(a);
    b = find(b);
    if (a != b)
      parent[std::max(a, b)] = std::min(a, b);
  }
};

// Nodes of a mesh lying on the shared segment, ordered along it.
std::vector<int> trace_nodes(const Mesh &m, const SharedSegment &seg, Edge side)
{
  std::vector<int> out;
  for (int n : m.nodes_on(side))
  {
    const auto &p = m.nodes[n];
    const double s = seg.vertical ? p.y : p.x;
    if (s >= seg.s0 - 1e-12 && s <= seg.s1 + 1e-12)
      out.push_back(n);
  }
  return out;
}

}  // namespace

DofCount dof_count(const std::vector<DomainMesh> &meshes, bool merge_conforming)
{
  DofCount c;
  std::vector<int> offset(meshes.size() + 1, 0);
  for (std::size_t i = 0; i < meshes.size(); ++i)
    offset[i + 1] = offset[i] + static_cast<int>(meshes[i].mesh->nodes.size());

  UnionFind uf(offset.back());
  if (merge_conforming)
  {
    for (std::size_t a = 0; a < meshes.size(); ++a)
    {
      for (std::size_t b = a + 1; b < meshes.size(); ++b)
      {
        if (dofs_per_node(meshes[a].kind) != dofs_per_node(meshes[b].kind))
          continue;
        const auto seg = shared_segment(meshes[a].mesh->rect, meshes[b].mesh->rect);
        if (!seg)
          continue;
        const auto ta = trace_nodes(*meshes[a].mesh, *seg, seg->side_a);
        const auto tb = trace_nodes(*meshes[b].mesh, *seg, seg->side_b);
        if (ta.size() != tb.size())
          continue;
        bool same = true;
        for (std::size_t k = 0; k < ta.size() && same; ++k)
        {
          const auto &p = meshes[a].mesh->nodes[ta[k]];
          const auto &q = meshes[b].mesh->nodes[tb[k]];
          same = std::abs(p.x - q.x) <= 1e-12 && std::abs(p.y - q.y) <= 1e-12;
        }
        if (!same)
          continue;
        for (std::size_t k = 0; k < ta.size(); ++k)
          uf.unite(offset[a] + ta[k], offset[b] + tb[k]);
      }
    }
  }

  // A merged node is charged to the lowest-indexed domain that owns it.
  for (std::size_t i = 0; i < meshes.size(); ++i)
  {
    const int dpn = dofs_per_node(meshes[i].kind);
    int own = 0, merged = 0;
    for (int n = offset[i]; n < offset[i + 1]; ++n)
      (uf.find(n) == n ? own : merged) += 1;
    c.domains.push_back(meshes[i].mesh->domain_id);
    c.per_domain.push_back(own * dpn);
    c.shared += merged * dpn;
    c.total += own * dpn;
  }
  return c;
}

void write_mesh(std::ostream &out, const Mesh &mesh)
{
  fmt::print(out, "# mesh domain={} nx={} ny={} hx={:.17g} hy={:.17g}\n", mesh.domain_id,
             mesh.nx, mesh.ny, mesh.hx, mesh.hy);
  fmt::print(out, "nodes {}\n", mesh.nodes.size());
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    fmt::print(out, "{} {:.17g} {:.17g}\n", i, mesh.nodes[i].x, mesh.nodes[i].y);
  fmt::print(out, "elements {}\n", mesh.elements.size());
  for (std::size_t e = 0; e < mesh.elements.size(); ++e)
  {
    fmt::print(out, "{}", e);
    for (int n : mesh.elements[e])
      fmt::print(out, " {}", n);
    fmt::print(out, "\n");
  }
  fmt::print(out, "boundary_edges {}\n", mesh.boundary_edges.size());
  for (const auto &b : mesh.boundary_edges)
    fmt::print(out, "{} {} {} {} {}\n", b.element, to_string(b.side), b.nodes[0], b.nodes[1],
               b.nodes[2]);
}

}  // namespace vibro
