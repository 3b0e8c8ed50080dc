#include "vibro/mortar.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace vibro
{

Point inverse_map(const Q9Coords &xy, Point x, int element_id)
{
  // Curved edges can bulge past the nodes, so bound the mapped boundary, not the nodes.
  double xmin = xy[0].x, xmax = xy[0].x, ymin = xy[0].y, ymax = xy[0].y;
  for (int i = 0; i <= 32; ++i)
  {
    const double t = -1.0 + i / 16.0;
    for (const Point p : {q9_map(xy, t, -1.0), q9_map(xy, t, 1.0), q9_map(xy, -1.0, t),
                          q9_map(xy, 1.0, t)})
    {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  }
  const double pad = 1e-3 * std::max(xmax - xmin, ymax - ymin);
  if (x.x < xmin - pad || x.x > xmax + pad || x.y < ymin - pad || x.y > ymax + pad)
    throw GeometryError(fmt::format("inverse_map: point ({}, {}) outside element {}", x.x, x.y,
                                    element_id));

  // The quadratic map has spurious roots outside the reference square; clamp the iterates
  // and restart from other seeds if Newton lands on one.
  auto newton = [&](Eigen::Vector2d xi, double &res) {
    for (int it = 0; it < 30; ++it)
    {
      const Point p = q9_map(xy, xi(0), xi(1));
      const Eigen::Vector2d r(p.x - x.x, p.y - x.y);
      res = r.norm();
      if (res < 1e-12)
        break;
      xi -= q9_jacobian(xy, xi(0), xi(1)).partialPivLu().solve(r);
      xi = xi.cwiseMax(-1.2).cwiseMin(1.2);
    }
    const Point p = q9_map(xy, xi(0), xi(1));
    res = std::hypot(p.x - x.x, p.y - x.y);
    return xi;
  };
  Eigen::Vector2d xi(0.0, 0.0);
  double res = 0.0;
  bool converged = false;
  for (const auto &seed : {Eigen::Vector2d(0, 0), Eigen::Vector2d(-0.6, -0.6),
                           Eigen::Vector2d(0.6, -0.6), Eigen::Vector2d(-0.6, 0.6),
                           Eigen::Vector2d(0.6, 0.6)})
  {
    double r = 0.0;
    const Eigen::Vector2d cand = newton(seed, r);
    if (!(r < 1e-10))
      continue;
    if (!converged)
    {
      xi = cand;
      res = r;
    }
    converged = true;
    if (cand.cwiseAbs().maxCoeff() <= 1.0 + 1e-10)
    {
      xi = cand;
      res = r;
      break;
    }
  }
  if (!converged)
  {
    newton(Eigen::Vector2d(0, 0), res);
    throw GeometryError(fmt::format("inverse_map: Newton did not converge in element {} for "
                                    "({}, {}), residual {:.3e}",
                                    element_id, x.x, x.y, res));
  }
  for (int d = 0; d < 2; ++d)
  {
    if (std::abs(xi(d)) > 1.0 + 1e-10)
      throw GeometryError(fmt::format("inverse_map: point ({}, {}) maps outside element {}",
                                      x.x, x.y, element_id));
    // Snap onto the element edges so that shape functions of off-edge nodes vanish exactly.
    if (std::abs(xi(d) - 1.0) < 1e-10)
      xi(d) = 1.0;
    else if (std::abs(xi(d) + 1.0) < 1e-10)
      xi(d) = -1.0;
  }
  return {xi(0), xi(1)};
}

Eigen::Vector2d outward_normal(Edge side)
{
  switch (side)
  {
    case Edge::south:
      return {0.0, -1.0};
    case Edge::east:
      return {1.0, 0.0};
    case Edge::north:
      return {0.0, 1.0};
    case Edge::west:
      return {-1.0, 0.0};
  }
  return {0.0, 0.0};
}

namespace
{

std::vector<BoundaryEdge> trace_on(const Mesh &m, Edge side, const SharedSegment &seg)
{
  std::vector<BoundaryEdge> out;
  for (const auto &e : m.edges_on(side))
  {
    if (e.s1 > seg.s0 + 1e-12 && e.s0 < seg.s1 - 1e-12)
      out.push_back(e);
  }
  std::sort(out.begin(), out.end(),
            [](const BoundaryEdge &l, const BoundaryEdge &r) { return l.s0 < r.s0; });
  return out;
}

Point on_segment(const SharedSegment &seg, double s)
{
  return seg.vertical ? Point{seg.coord, s} : Point{s, seg.coord};
}

}  // namespace

MortarInterface detect_interfaces(const Mesh &a, const Mesh &b, int n_gp)
{
  const auto seg = shared_segment(a.rect, b.rect);
  if (!seg || seg->length() <= 1e-12)
    throw GeometryError(fmt::format("interface {}-{}: traces are not colinear", a.domain_id,
                                    b.domain_id));
  MortarInterface iface;
  iface.a = &a;
  iface.b = &b;
  iface.segment = *seg;
  iface.normal = outward_normal(seg->side_b);

  const auto ta = trace_on(a, seg->side_a, *seg);
  const auto tb = trace_on(b, seg->side_b, *seg);
  const auto rule = gauss_legendre(n_gp);

  // Two-pointer sweep over the sorted traces.
  std::size_t i = 0, j = 0;
  while (i < ta.size() && j < tb.size())
  {
    const double lo = std::max({ta[i].s0, tb[j].s0, seg->s0});
    const double hi = std::min({ta[i].s1, tb[j].s1, seg->s1});
    if (hi - lo > 1e-12)
    {
      InterfaceElement ie;
      ie.s0 = lo;
      ie.s1 = hi;
      ie.parent_a = ta[i];
      ie.parent_b = tb[j];
      const auto xa = a.element_coords(ta[i].element);
      const auto xb = b.element_coords(tb[j].element);
      const double jac = 0.5 * (hi - lo);
      for (int l = 0; l < n_gp; ++l)
      {
        MappedGaussPoint g;
        g.xi_e = rule.points[l];
        g.weight = rule.weights[l];
        g.jacobian = jac;
        g.x = on_segment(*seg, lo + (g.xi_e + 1.0) * jac);
        g.xi_a = inverse_map(xa, g.x, ta[i].element);
        g.xi_b = inverse_map(xb, g.x, tb[j].element);
        ie.gauss.push_back(g);
      }
      iface.elements.push_back(std::move(ie));
    }
    if (ta[i].s1 < tb[j].s1)
      ++i;
    else
      ++j;
  }
  return iface;
}

RealSpMat assemble_coupling(const MortarInterface &iface)
{
  const auto &a = *iface.a;
  const auto &b = *iface.b;
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto &ie : iface.elements)
  {
    const auto &ca = a.elements[ie.parent_a.element];
    const auto &cb = b.elements[ie.parent_b.element];
    for (const auto &g : ie.gauss)
    {
      const auto Na = q9_shape(g.xi_a.x, g.xi_a.y);
      const auto Nb = q9_shape(g.xi_b.x, g.xi_b.y);
      const double w = g.weight * g.jacobian;
      for (int p = 0; p < 9; ++p)
      {
        if (Na[p] == 0.0)
          continue;
        for (int q = 0; q < 9; ++q)
        {
          if (Nb[q] == 0.0)
            continue;
          for (int d = 0; d < 2; ++d)
          {
            if (iface.normal(d) != 0.0)
              trip.emplace_back(2 * ca[p] + d, cb[q], w * Na[p] * Nb[q] * iface.normal(d));
          }
        }
      }
    }
  }
  RealSpMat C(2 * static_cast<int>(a.nodes.size()), static_cast<int>(b.nodes.size()));
  C.setFromTriplets(trip.begin(), trip.end());
  return C;
}

RealSpMat assemble_conforming_coupling(const Mesh &structure, const Mesh &fluid)
{
  const auto seg = shared_segment(structure.rect, fluid.rect);
  if (!seg || seg->length() <= 1e-12)
    throw GeometryError("conforming coupling: domains share no edge");
  const auto ts = trace_on(structure, seg->side_a, *seg);
  const auto tf = trace_on(fluid, seg->side_b, *seg);
  if (ts.size() != tf.size())
    throw GeometryError("conforming coupling: traces do not coincide");
  const auto n = outward_normal(seg->side_b);
  const auto rule = gauss_legendre(3);

  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t k = 0; k < ts.size(); ++k)
  {
    if (std::abs(ts[k].s0 - tf[k].s0) > 1e-12 || std::abs(ts[k].s1 - tf[k].s1) > 1e-12)
      throw GeometryError("conforming coupling: traces do not coincide");
    const double jac = 0.5 * (ts[k].s1 - ts[k].s0);
    for (std::size_t l = 0; l < rule.points.size(); ++l)
    {
      const auto L = line_shape(rule.points[l]);
      const double w = rule.weights[l] * jac;
      for (int p = 0; p < 3; ++p)
      {
        for (int q = 0; q < 3; ++q)
        {
          for (int d = 0; d < 2; ++d)
          {
            if (n(d) != 0.0)
              trip.emplace_back(2 * ts[k].nodes[p] + d, tf[k].nodes[q], w * L[p] * L[q] * n(d));
          }
        }
      }
    }
  }
  RealSpMat C(2 * static_cast<int>(structure.nodes.size()), static_cast<int>(fluid.nodes.size()));
  C.setFromTriplets(trip.begin(), trip.end());
  return C;
}

TraceProducts trace_products(const MortarInterface &iface)
{
  const auto &a = *iface.a;
  const auto &b = *iface.b;
  std::vector<Eigen::Triplet<double>> taa, tab, tbb;
  for (const auto &ie : iface.elements)
  {
    const auto &ca = a.elements[ie.parent_a.element];
    const auto &cb = b.elements[ie.parent_b.element];
    for (const auto &g : ie.gauss)
    {
      const auto Na = q9_shape(g.xi_a.x, g.xi_a.y);
      const auto Nb = q9_shape(g.xi_b.x, g.xi_b.y);
      const double w = g.weight * g.jacobian;
      for (int p = 0; p < 9; ++p)
      {
        for (int q = 0; q < 9; ++q)
        {
          if (Na[p] != 0.0 && Na[q] != 0.0)
            taa.emplace_back(ca[p], ca[q], w * Na[p] * Na[q]);
          if (Na[p] != 0.0 && Nb[q] != 0.0)
            tab.emplace_back(ca[p], cb[q], w * Na[p] * Nb[q]);
          if (Nb[p] != 0.0 && Nb[q] != 0.0)
            tbb.emplace_back(cb[p], cb[q], w * Nb[p] * Nb[q]);
        }
      }
    }
  }
  const int na = static_cast<int>(a.nodes.size()), nb = static_cast<int>(b.nodes.size());
  TraceProducts t{RealSpMat(na, na), RealSpMat(na, nb), RealSpMat(nb, nb)};
  t.aa.setFromTriplets(taa.begin(), taa.end());
  t.ab.setFromTriplets(tab.begin(), tab.end());
  t.bb.setFromTriplets(tbb.begin(), tbb.end());
  return t;
}

void write_interface_csv(std::ostream &out, const MortarInterface &iface)
{
  out << "element,s0,s1,parent_a,side_a,parent_b,side_b,gp,x,y,weight,xi_e,xi_a,eta_a,xi_b,"
         "eta_b,jacobian\n";
  for (std::size_t e = 0; e < iface.elements.size(); ++e)
  {
    const auto &ie = iface.elements[e];
    for (std::size_t l = 0; l < ie.gauss.size(); ++l)
    {
      const auto &g = ie.gauss[l];
      fmt::print(out, "{},{:.17g},{:.17g},{},{},{},{},{},{:.17g},{:.17g},{:.17g},{:.17g},"
                      "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n",
                 e, ie.s0, ie.s1, ie.parent_a.element, to_string(ie.parent_a.side),
                 ie.parent_b.element, to_string(ie.parent_b.side), l, g.x.x, g.x.y, g.weight,
                 g.xi_e, g.xi_a.x, g.xi_a.y, g.xi_b.x, g.xi_b.y, g.jacobian);
    }
  }
}

}  // namespace vibro
