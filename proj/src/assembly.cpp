#include "vibro/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "vibro/materials.hpp"

namespace vibro
{

int BlockSystem::size() const
{
  return block_map.empty() ? 0 : block_map.back().offset + block_map.back().size;
}

namespace
{

SpMat global_from_blocks(const std::map<std::pair<int, int>, SpMat> &blocks,
                         const std::vector<BlockRange> &map, int n)
{
  std::vector<Eigen::Triplet<Complex>> trip;
  for (const auto &[rc, B] : blocks)
  {
    const int ro = map[rc.first].offset, co = map[rc.second].offset;
    for (int k = 0; k < B.outerSize(); ++k)
    {
      for (SpMat::InnerIterator it(B, k); it; ++it)
        trip.emplace_back(ro + it.row(), co + it.col(), it.value());
    }
  }
  SpMat A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

RealSpMat from_triplets(int rows, int cols, const std::vector<Eigen::Triplet<double>> &trip)
{
  RealSpMat m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

// Expand a node x node matrix to 2-component interleaved DoFs.
RealSpMat expand_components(const RealSpMat &s, double scale)
{
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < s.outerSize(); ++k)
  {
    for (RealSpMat::InnerIterator it(s, k); it; ++it)
    {
      for (int d = 0; d < 2; ++d)
        trip.emplace_back(2 * it.row() + d, 2 * it.col() + d, scale * it.value());
    }
  }
  return from_triplets(2 * s.rows(), 2 * s.cols(), trip);
}

double loss_at(const LossFactorTable *t, double f) { return t ? loss_factor(*t, f) : 0.0; }

}  // namespace

SpMat BlockSystem::global_K() const { return global_from_blocks(K_blocks, block_map, size()); }
SpMat BlockSystem::global_M() const { return global_from_blocks(M_blocks, block_map, size()); }

Complex fluid_density(const MaterialLaw &law, double f)
{
  if (const auto *a = std::get_if<AcousticMaterial>(&law))
    return a->rho;
  if (const auto *p = std::get_if<JcaMaterial>(&law))
    return jca_effective(*p, f).rho_eff;
  throw ConfigError("fluid_density: elastic material has no fluid density");
}

Complex plane_wave_pressure(const LoadSpec &load, double f, double s)
{
  const double k = angular(f) / load.wave_speed;
  return load.amplitude * std::exp(Complex(0.0, -k * load.direction * s));
}

Vec plane_wave_load(const LoadSpec &load, double f, const Mesh &mesh)
{
  Vec F = Vec::Zero(2 * static_cast<Eigen::Index>(mesh.nodes.size()));
  const auto n = outward_normal(load.boundary);
  const bool vertical = load.boundary == Edge::east || load.boundary == Edge::west;
  const double s_ref = vertical ? mesh.rect.y0 : mesh.rect.x0;
  static const GaussRule rule = gauss_legendre(5);
  for (const auto &e : mesh.edges_on(load.boundary))
  {
    const double jac = 0.5 * (e.s1 - e.s0);
    for (std::size_t l = 0; l < rule.points.size(); ++l)
    {
      const double t = rule.points[l];
      const double s = e.s0 + (t + 1.0) * jac - s_ref;
      const Complex p = plane_wave_pressure(load, f, s);
      const auto L = line_shape(t);
      for (int a = 0; a < 3; ++a)
      {
        // Traction of an external pressure: -p n.
        for (int d = 0; d < 2; ++d)
          F(2 * e.nodes[a] + d) -= rule.weights[l] * jac * L[a] * n(d) * p;
      }
    }
  }
  return F;
}

SystemAssembler::SystemAssembler(const ModelConfig &config, const MeshLevel &level, int n_gp)
    : config_(config), level_(level)
{
  const auto &doms = config_.domains;
  int offset = 0;
  for (const auto &d : doms)
  {
    auto it = level_.sizes.find(d.id);
    if (it == level_.sizes.end())
      throw ConfigError(fmt::format("mesh level '{}' has no size for domain '{}'", level_.name,
                                    d.id));
    meshes_.push_back(generate_mesh(d, it->second));
    const int n = dofs_per_node(d.kind) * static_cast<int>(meshes_.back().nodes.size());
    blocks_.push_back({offset, n});
    offset += n;
  }
  n_ = offset;

  auto one = [](double) { return Complex(1.0); };
  for (std::size_t i = 0; i < doms.size(); ++i)
  {
    const auto &d = doms[i];
    const auto &mesh = meshes_[i];
    const auto &law = config_.material(d.material_id).law;
    const auto *table = config_.damping_table(d);
    auto damped = [table](double f) { return Complex(1.0, loss_at(table, f)); };
    const int b = static_cast<int>(i);
    const int nd = blocks_[i].size;
    if (d.kind == DomainKind::elastic)
    {
      const auto &m = std::get<ElasticMaterial>(law);
      std::vector<Eigen::Triplet<double>> ks, kg, mm;
      for (std::size_t e = 0; e < mesh.elements.size(); ++e)
      {
        const auto parts = elastic_parts(m, mesh.element_coords(static_cast<int>(e)));
        const auto &conn = mesh.elements[e];
        for (int a = 0; a < 18; ++a)
        {
          const int r = 2 * conn[a / 2] + a % 2;
          for (int c = 0; c < 18; ++c)
          {
            const int col = 2 * conn[c / 2] + c % 2;
            ks.emplace_back(r, col, parts.stiffness(a, c));
            if (parts.geometric(a, c) != 0.0)
              kg.emplace_back(r, col, parts.geometric(a, c));
            if (parts.mass(a, c) != 0.0)
              mm.emplace_back(r, col, parts.mass(a, c));
          }
        }
      }
      add_term(b, b, TermKind::stiffness, from_triplets(nd, nd, ks), damped);
      if (!kg.empty())
        add_term(b, b, TermKind::stiffness, from_triplets(nd, nd, kg), one);
      add_term(b, b, TermKind::mass, from_triplets(nd, nd, mm), one);
    }
    else
    {
      std::vector<Eigen::Triplet<double>> kl, mm;
      for (std::size_t e = 0; e < mesh.elements.size(); ++e)
      {
        const auto parts = scalar_parts(mesh.element_coords(static_cast<int>(e)));
        const auto &conn = mesh.elements[e];
        for (int a = 0; a < 9; ++a)
        {
          for (int c = 0; c < 9; ++c)
          {
            kl.emplace_back(conn[a], conn[c], parts.laplace(a, c));
            mm.emplace_back(conn[a], conn[c], parts.mass(a, c));
          }
        }
      }
      add_term(b, b, TermKind::stiffness, from_triplets(nd, nd, kl), damped);
      std::function<Complex(double)> inv_c2;
      if (const auto *a = std::get_if<AcousticMaterial>(&law))
      {
        const double v = 1.0 / (a->c * a->c);
        inv_c2 = [v](double) { return Complex(v); };
      }
      else
      {
        const auto p = std::get<JcaMaterial>(law);
        inv_c2 = [p](double f) {
          const auto r = jca_effective(p, f);
          return r.rho_eff / r.K_eq;
        };
      }
      add_term(b, b, TermKind::mass, from_triplets(nd, nd, mm), inv_c2);
    }
  }

  interfaces_.reserve(config_.interfaces.size());
  for (const auto &spec : config_.interfaces)
  {
    int ia = static_cast<int>(config_.domain_index(spec.left));
    int ib = static_cast<int>(config_.domain_index(spec.right));
    if (spec.coupling == CouplingKind::fsi)
    {
      if (doms[ia].kind != DomainKind::elastic)
        std::swap(ia, ib);
      interfaces_.push_back(detect_interfaces(meshes_[ia], meshes_[ib], n_gp));
      const auto &iface = interfaces_.back();
      if (spec.conforming)
      {
        // The hint is checked, not trusted.
        bool coincide = true;
        for (const auto &ie : iface.elements)
          coincide = coincide && std::abs(ie.parent_a.s0 - ie.parent_b.s0) < 1e-12 &&
                     std::abs(ie.parent_a.s1 - ie.parent_b.s1) < 1e-12;
        if (!coincide)
          fmt::print(stderr, "warning: interface {}-{} declared conforming but traces differ\n",
                     spec.left, spec.right);
      }
      RealSpMat C = assemble_coupling(iface);
      RealSpMat Ct = C.transpose();
      const double depth =
          std::get<ElasticMaterial>(config_.material(doms[ia].material_id).law).thickness;
      const auto rho_law = config_.material(doms[ib].material_id).law;
      std::function<Complex(double)> rho = [rho_law](double f) {
        return fluid_density(rho_law, f);
      };
      fsi_.push_back({ia, ib, terms_.size(), depth, rho});
      add_term(ia, ib, TermKind::stiffness, std::move(C),
               [depth](double) { return Complex(-depth); });
      add_term(ib, ia, TermKind::mass, std::move(Ct), rho);
    }
    else
    {
      interfaces_.push_back(detect_interfaces(meshes_[ia], meshes_[ib], n_gp));
      const auto &iface = interfaces_.back();
      const auto &ma = std::get<ElasticMaterial>(config_.material(doms[ia].material_id).law);
      const auto &mb = std::get<ElasticMaterial>(config_.material(doms[ib].material_id).law);
      double kappa = 0.0;
      if (spec.penalty)
      {
        kappa = *spec.penalty;
      }
      else
      {
        const double h = std::min({meshes_[ia].hx, meshes_[ia].hy, meshes_[ib].hx,
                                   meshes_[ib].hy});
        kappa = 1e2 * std::max(ma.E * ma.thickness, mb.E * mb.thickness) / (h * h);
      }
      const auto t = trace_products(iface);
      RealSpMat abT = t.ab.transpose();
      add_term(ia, ia, TermKind::stiffness, expand_components(t.aa, kappa), one);
      add_term(ia, ib, TermKind::stiffness, expand_components(t.ab, -kappa), one);
      add_term(ib, ia, TermKind::stiffness, expand_components(abT, -kappa), one);
      add_term(ib, ib, TermKind::stiffness, expand_components(t.bb, kappa), one);
    }
  }

  build_outputs();
  model_ = AffineModel(n_, std::move(terms_), [this](double f) { return load(f); }, probes_.C_out);
}

void SystemAssembler::add_term(int rb, int cb, TermKind kind, RealSpMat local,
                               std::function<Complex(double)> coef)
{
  AffineTerm t;
  t.matrix = std::move(local);
  t.matrix.makeCompressed();
  t.row_offset = blocks_[rb].offset;
  t.col_offset = blocks_[cb].offset;
  t.kind = kind;
  t.coef = std::move(coef);
  terms_.push_back(std::move(t));
  term_blocks_.emplace_back(rb, cb);
}

void SystemAssembler::build_outputs()
{
  probes_.C_out.resize(0, n_);
  const auto &cabin_id = config_.output.cabin_domain;
  if (cabin_id.empty())
    return;
  const auto ci = config_.domain_index(cabin_id);
  const auto &mesh = meshes_[ci];
  const int off = blocks_[ci].offset;
  for (std::size_t k = 0; k < mesh.nodes.size(); ++k)
    cabin_dofs_.push_back(off + static_cast<int>(k));

  probes_.points = config_.output.probes;
  std::vector<Eigen::Triplet<Complex>> trip;
  for (std::size_t i = 0; i < probes_.points.size(); ++i)
  {
    const auto p = probes_.points[i];
    const int e = mesh.locate(p);
    if (e < 0)
      throw GeometryError(fmt::format("probe ({}, {}) outside the cabin mesh", p.x, p.y));
    const auto xi = inverse_map(mesh.element_coords(e), p, e);
    const auto N = q9_shape(xi.x, xi.y);
    for (int a = 0; a < 9; ++a)
    {
      if (N[a] != 0.0)
        trip.emplace_back(static_cast<int>(i), off + mesh.elements[e][a], N[a]);
    }
  }
  probes_.C_out.resize(static_cast<int>(probes_.points.size()), n_);
  probes_.C_out.setFromTriplets(trip.begin(), trip.end());
  probes_.C_out.makeCompressed();
}

std::vector<int> SystemAssembler::dofs_of(const std::vector<std::string> &domain_ids) const
{
  std::vector<int> out;
  for (const auto &id : domain_ids)
  {
    const auto &b = blocks_[config_.domain_index(id)];
    for (int k = 0; k < b.size; ++k)
      out.push_back(b.offset + k);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::pair<SpMat, SpMat> SystemAssembler::matrices(double f) const
{
  auto s = model_.matrices(f);
  return {std::move(s.K), std::move(s.M)};
}

Vec SystemAssembler::load(double f) const
{
  Vec F = Vec::Zero(n_);
  if (!config_.load)
    return F;
  const auto &l = *config_.load;
  const auto i = config_.domain_index(l.target_domain);
  const double depth =
      std::get<ElasticMaterial>(config_.material(config_.domains[i].material_id).law).thickness;
  F.segment(blocks_[i].offset, blocks_[i].size) = depth * plane_wave_load(l, f, meshes_[i]);
  return F;
}

BlockSystem SystemAssembler::blocks_at(double f) const
{
  BlockSystem s;
  s.f = f;
  for (const auto &d : config_.domains)
    s.domains.push_back(d.id);
  s.block_map = blocks_;
  const auto &terms = model_.terms();
  for (std::size_t k = 0; k < terms.size(); ++k)
  {
    const auto &t = terms[k];
    if (t.kind == TermKind::damping)
      throw Error("blocks_at: damping terms are not part of the block form");
    auto &target = t.kind == TermKind::mass ? s.M_blocks : s.K_blocks;
    SpMat contrib = t.coef(f) * t.matrix.cast<Complex>();
    auto it = target.find(term_blocks_[k]);
    if (it == target.end())
      target.emplace(term_blocks_[k], std::move(contrib));
    else
      it->second += contrib;
  }
  for (const auto &p : fsi_)
    s.couplings.push_back({p.structure, p.fluid, terms[p.coupling_term].matrix, p.rho(f), p.depth});
  s.f_ext = load(f);
  return s;
}

void write_matrix_market(const std::filesystem::path &path, const SpMat &A)
{
  std::ofstream out(path);
  if (!out)
    throw Error(fmt::format("cannot write '{}'", path.string()));
  out << "%%MatrixMarket matrix coordinate complex general\n";
  fmt::print(out, "{} {} {}\n", A.rows(), A.cols(), A.nonZeros());
  for (int k = 0; k < A.outerSize(); ++k)
  {
    for (SpMat::InnerIterator it(A, k); it; ++it)
      fmt::print(out, "{} {} {:.17g} {:.17g}\n", it.row() + 1, it.col() + 1, it.value().real(),
                 it.value().imag());
  }
}

void write_matrix_market(const std::filesystem::path &path, const Vec &v)
{
  std::ofstream out(path);
  if (!out)
    throw Error(fmt::format("cannot write '{}'", path.string()));
  out << "%%MatrixMarket matrix array complex general\n";
  fmt::print(out, "{} 1\n", v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    fmt::print(out, "{:.17g} {:.17g}\n", v(i).real(), v(i).imag());
}

}  // namespace vibro
