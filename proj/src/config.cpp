#include "vibro/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "vibro/materials.hpp"

namespace vibro
{

using nlohmann::json;

std::string to_string(DomainKind kind)
{
  switch (kind)
  {
    case DomainKind::elastic:
      return "elastic";
    case DomainKind::equivalent_fluid:
      return "equivalent_fluid";
    case DomainKind::acoustic:
      return "acoustic";
  }
  return "?";
}

std::string to_string(Edge edge)
{
  switch (edge)
  {
    case Edge::south:
      return "south";
    case Edge::east:
      return "east";
    case Edge::north:
      return "north";
    case Edge::west:
      return "west";
  }
  return "?";
}

std::string to_string(CouplingKind kind) { return kind == CouplingKind::fsi ? "fsi" : "fixed"; }

std::string to_string(SolverMethod m)
{
  switch (m)
  {
    case SolverMethod::direct:
      return "direct";
    case SolverMethod::bjacobi:
      return "bjacobi";
    case SolverMethod::gasm:
      return "gasm";
  }
  return "?";
}

std::string to_string(SchwarzVariant v)
{
  return v == SchwarzVariant::restricted ? "restricted" : "full";
}

SolverMethod solver_method_from_string(const std::string &s)
{
  if (s == "direct")
    return SolverMethod::direct;
  if (s == "bjacobi")
    return SolverMethod::bjacobi;
  if (s == "gasm")
    return SolverMethod::gasm;
  throw ConfigError(fmt::format("unknown solver '{}'", s));
}

SchwarzVariant schwarz_variant_from_string(const std::string &s)
{
  if (s == "restricted")
    return SchwarzVariant::restricted;
  if (s == "full")
    return SchwarzVariant::full;
  throw ConfigError(fmt::format("unknown Schwarz variant '{}'", s));
}

namespace
{

// Reads an object while tracking which keys were consumed, so that leftovers can be
// rejected.
class Reader
{
public:
  Reader(const json &j, std::string where) : j_(j), where_(std::move(where))
  {
    if (!j_.is_object())
      throw ConfigError(fmt::format("{}: expected an object", where_));
  }

  bool has(const std::string &key) const { return j_.contains(key); }

  const json &at(const std::string &key)
  {
    if (!j_.contains(key))
      throw ConfigError(fmt::format("{}: missing key '{}'", where_, key));
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string &key)
  {
    const auto &v = at(key);
    if (!v.is_number())
      throw ConfigError(fmt::format("{}.{}: expected a number", where_, key));
    return v.get<double>();
  }

  double number(const std::string &key, double fallback)
  {
    return has(key) ? number(key) : fallback;
  }

  int integer(const std::string &key, int fallback)
  {
    if (!has(key))
      return fallback;
    const auto &v = at(key);
    if (!v.is_number_integer())
      throw ConfigError(fmt::format("{}.{}: expected an integer", where_, key));
    return v.get<int>();
  }

  bool boolean(const std::string &key, bool fallback)
  {
    if (!has(key))
      return fallback;
    const auto &v = at(key);
    if (!v.is_boolean())
      throw ConfigError(fmt::format("{}.{}: expected a boolean", where_, key));
    return v.get<bool>();
  }

  std::string string(const std::string &key)
  {
    const auto &v = at(key);
    if (!v.is_string())
      throw ConfigError(fmt::format("{}.{}: expected a string", where_, key));
    return v.get<std::string>();
  }

  std::string string(const std::string &key, const std::string &fallback)
  {
    return has(key) ? string(key) : fallback;
  }

  const std::string &where() const { return where_; }

  void finish() const
  {
    for (auto it = j_.begin(); it != j_.end(); ++it)
    {
      if (!used_.count(it.key()))
        throw ConfigError(fmt::format("{}: unknown key '{}'", where_, it.key()));
    }
  }

private:
  const json &j_;
  std::string where_;
  std::set<std::string> used_;
};

std::vector<double> number_list(const json &v, const std::string &where)
{
  if (!v.is_array())
    throw ConfigError(fmt::format("{}: expected an array", where));
  std::vector<double> out;
  for (const auto &x : v)
  {
    if (!x.is_number())
      throw ConfigError(fmt::format("{}: expected numbers", where));
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<double> fixed_list(const json &v, std::size_t n, const std::string &where)
{
  auto out = number_list(v, where);
  if (out.size() != n)
    throw ConfigError(fmt::format("{}: expected {} numbers", where, n));
  return out;
}

DomainKind parse_kind(const std::string &s, const std::string &where)
{
  if (s == "elastic")
    return DomainKind::elastic;
  if (s == "equivalent_fluid")
    return DomainKind::equivalent_fluid;
  if (s == "acoustic")
    return DomainKind::acoustic;
  throw ConfigError(fmt::format("{}: unknown domain kind '{}'", where, s));
}

Edge parse_edge(const std::string &s, const std::string &where)
{
  if (s == "south")
    return Edge::south;
  if (s == "east")
    return Edge::east;
  if (s == "north")
    return Edge::north;
  if (s == "west")
    return Edge::west;
  throw ConfigError(fmt::format("{}: unknown boundary '{}'", where, s));
}

AirProperties parse_air(const json &j, const std::string &where)
{
  Reader r(j, where);
  AirProperties a;
  a.rho0 = r.number("rho0", a.rho0);
  a.c0 = r.number("c0", a.c0);
  a.viscosity = r.number("viscosity", a.viscosity);
  a.prandtl = r.number("prandtl", a.prandtl);
  a.gamma = r.number("gamma", a.gamma);
  a.p0 = r.number("p0", a.p0);
  r.finish();
  return a;
}

MaterialSpec parse_material(const json &j, const std::string &where)
{
  Reader r(j, where);
  MaterialSpec m;
  m.id = r.string("id");
  const auto type = r.string("type");
  if (type == "elastic")
  {
    ElasticMaterial e;
    e.E = r.number("E");
    e.nu = r.number("nu");
    e.rho = r.number("rho");
    e.thickness = r.number("thickness");
    if (r.has("prestress"))
    {
      Reader p(r.at("prestress"), where + ".prestress");
      if (p.has("delta_p") || p.has("radius"))
      {
        e.prestress = prestress_from_pressurisation(p.number("delta_p"), p.number("radius"));
      }
      else
      {
        e.prestress.tx = p.number("tx", 0.0);
        e.prestress.ty = p.number("ty", 0.0);
      }
      p.finish();
    }
    m.law = e;
  }
  else if (type == "acoustic")
  {
    AcousticMaterial a;
    a.c = r.number("c");
    a.rho = r.number("rho");
    m.law = a;
  }
  else if (type == "jca")
  {
    JcaMaterial p;
    p.phi = r.number("phi");
    p.sigma = r.number("sigma");
    p.alpha_inf = r.number("alpha_inf");
    p.viscous_length = r.number("viscous_length");
    p.thermal_length = r.number("thermal_length");
    p.rho_frame = r.number("rho_frame");
    if (r.has("air"))
      p.air = parse_air(r.at("air"), where + ".air");
    m.law = p;
  }
  else
  {
    throw ConfigError(fmt::format("{}: unknown material type '{}'", where, type));
  }
  r.finish();
  return m;
}

std::vector<Window> parse_windows(const json &v, const std::string &where)
{
  if (v.is_string())
  {
    if (v.get<std::string>() != "auto")
      throw ConfigError(fmt::format("{}: expected \"auto\" or a window list", where));
    return {};
  }
  if (!v.is_array())
    throw ConfigError(fmt::format("{}: expected \"auto\" or a window list", where));
  std::vector<Window> out;
  for (const auto &w : v)
  {
    auto lohi = fixed_list(w, 2, where);
    out.push_back({lohi[0], lohi[1]});
  }
  return out;
}

ModelConfig parse_json(const json &root)
{
  ModelConfig cfg;
  Reader r(root, "config");

  {
    const auto &arr = r.at("domains");
    if (!arr.is_array())
      throw ConfigError("config.domains: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
    {
      const auto where = fmt::format("domains[{}]", i);
      Reader d(arr[i], where);
      DomainSpec spec;
      spec.id = d.string("id");
      spec.kind = parse_kind(d.string("kind"), where);
      auto rect = fixed_list(d.at("rect"), 4, where + ".rect");
      spec.geometry = {rect[0], rect[1], rect[2], rect[3]};
      spec.material_id = d.string("material");
      if (d.has("damping"))
        spec.damping_table_id = d.string("damping");
      d.finish();
      cfg.domains.push_back(std::move(spec));
    }
  }

  {
    const auto &arr = r.at("materials");
    if (!arr.is_array())
      throw ConfigError("config.materials: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      cfg.materials.push_back(parse_material(arr[i], fmt::format("materials[{}]", i)));
  }

  if (r.has("damping_tables"))
  {
    const auto &arr = r.at("damping_tables");
    if (!arr.is_array())
      throw ConfigError("config.damping_tables: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
    {
      const auto where = fmt::format("damping_tables[{}]", i);
      Reader t(arr[i], where);
      LossFactorTable table;
      table.id = t.string("id");
      const auto &samples = t.at("samples");
      if (!samples.is_array())
        throw ConfigError(where + ".samples: expected an array");
      for (const auto &s : samples)
      {
        auto fe = fixed_list(s, 2, where + ".samples");
        table.samples.push_back({fe[0], fe[1]});
      }
      t.finish();
      cfg.damping_tables.push_back(std::move(table));
    }
  }

  if (r.has("interfaces"))
  {
    const auto &arr = r.at("interfaces");
    if (!arr.is_array())
      throw ConfigError("config.interfaces: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
    {
      const auto where = fmt::format("interfaces[{}]", i);
      Reader t(arr[i], where);
      InterfaceSpec spec;
      spec.left = t.string("left");
      spec.right = t.string("right");
      const auto kind = t.string("coupling");
      if (kind == "fsi")
        spec.coupling = CouplingKind::fsi;
      else if (kind == "fixed")
        spec.coupling = CouplingKind::fixed;
      else
        throw ConfigError(fmt::format("{}: unknown coupling '{}'", where, kind));
      spec.conforming = t.boolean("conforming", false);
      if (t.has("penalty"))
        spec.penalty = t.number("penalty");
      t.finish();
      cfg.interfaces.push_back(std::move(spec));
    }
  }

  if (r.has("load"))
  {
    Reader l(r.at("load"), "load");
    const auto kind = l.string("kind");
    if (kind != "plane_wave")
      throw ConfigError(fmt::format("load: unsupported kind '{}'", kind));
    LoadSpec load;
    load.target_domain = l.string("target");
    load.boundary = parse_edge(l.string("boundary"), "load");
    load.amplitude = l.number("amplitude");
    load.wave_speed = l.number("wave_speed");
    load.direction = l.integer("direction", 1);
    l.finish();
    cfg.load = load;
  }

  {
    Reader f(r.at("frequency"), "frequency");
    cfg.frequency.f_min = f.number("f_min");
    cfg.frequency.f_max = f.number("f_max");
    cfg.frequency.delta_f = f.number("delta_f");
    if (f.has("band_edges"))
      cfg.frequency.band_edges = number_list(f.at("band_edges"), "frequency.band_edges");
    else
      cfg.frequency.band_edges = {cfg.frequency.f_min, cfg.frequency.f_max};
    f.finish();
  }

  if (r.has("mesh"))
  {
    Reader m(r.at("mesh"), "mesh");
    cfg.mesh.supports_per_wavelength = m.number("supports_per_wavelength", 10.0);
    const auto &levels = m.at("levels");
    if (!levels.is_array())
      throw ConfigError("mesh.levels: expected an array");
    for (std::size_t i = 0; i < levels.size(); ++i)
    {
      const auto where = fmt::format("mesh.levels[{}]", i);
      Reader lv(levels[i], where);
      MeshLevel level;
      level.name = lv.string("name", fmt::format("level{}", i));
      const auto &sizes = lv.at("sizes");
      if (!sizes.is_object())
        throw ConfigError(where + ".sizes: expected an object");
      for (auto it = sizes.begin(); it != sizes.end(); ++it)
      {
        auto h = fixed_list(it.value(), 2, where + ".sizes." + it.key());
        level.sizes[it.key()] = {h[0], h[1]};
      }
      lv.finish();
      cfg.mesh.levels.push_back(std::move(level));
    }
    m.finish();
  }

  if (r.has("solver"))
  {
    Reader s(r.at("solver"), "solver");
    cfg.solver.method = solver_method_from_string(s.string("method", "direct"));
    if (s.has("groupings"))
    {
      const auto &g = s.at("groupings");
      if (!g.is_object())
        throw ConfigError("solver.groupings: expected an object");
      for (auto it = g.begin(); it != g.end(); ++it)
      {
        std::vector<std::vector<std::string>> groups;
        if (!it.value().is_array())
          throw ConfigError("solver.groupings." + it.key() + ": expected an array");
        for (const auto &grp : it.value())
        {
          if (!grp.is_array())
            throw ConfigError("solver.groupings." + it.key() + ": expected arrays of ids");
          std::vector<std::string> ids;
          for (const auto &id : grp)
          {
            if (!id.is_string())
              throw ConfigError("solver.groupings." + it.key() + ": expected domain ids");
            ids.push_back(id.get<std::string>());
          }
          groups.push_back(std::move(ids));
        }
        cfg.solver.groupings[it.key()] = std::move(groups);
      }
    }
    cfg.solver.grouping = s.string("grouping", "");
    cfg.solver.overlap = s.integer("overlap", 1);
    cfg.solver.variant = schwarz_variant_from_string(s.string("variant", "restricted"));
    cfg.solver.atol = s.number("atol", 1e-4);
    cfg.solver.max_it = s.integer("max_it", 150);
    cfg.solver.restart = s.integer("restart", 1000);
    cfg.solver.diagonal_scale = s.boolean("diagonal_scale", true);
    cfg.solver.warm_start = s.boolean("warm_start", true);
    s.finish();
  }

  if (r.has("mor"))
  {
    Reader m(r.at("mor"), "mor");
    cfg.mor.tol = m.number("tol", 1e-2);
    cfg.mor.max_points = m.integer("max_points", 20);
    cfg.mor.moments_per_point = m.integer("moments_per_point", 4);
    cfg.mor.candidate_stride = m.integer("candidate_stride", 4);
    cfg.mor.second_order = m.boolean("second_order", false);
    if (m.has("windows"))
    {
      const auto &w = m.at("windows");
      if (!w.is_array())
        throw ConfigError("mor.windows: expected one entry per band");
      for (std::size_t b = 0; b < w.size(); ++b)
        cfg.mor.windows.push_back(parse_windows(w[b], fmt::format("mor.windows[{}]", b)));
    }
    m.finish();
  }

  if (r.has("output"))
  {
    Reader o(r.at("output"), "output");
    cfg.output.cabin_domain = o.string("cabin");
    if (o.has("probes"))
    {
      const auto &p = o.at("probes");
      if (!p.is_array())
        throw ConfigError("output.probes: expected an array");
      for (const auto &pt : p)
      {
        auto xy = fixed_list(pt, 2, "output.probes");
        cfg.output.probes.push_back({xy[0], xy[1]});
      }
    }
    o.finish();
  }

  r.finish();
  return cfg;
}

void check(bool ok, const std::string &message)
{
  if (!ok)
    throw ConfigError(message);
}

bool is_pressure(DomainKind k) { return k != DomainKind::elastic; }

void validate_material(const MaterialSpec &m)
{
  const auto where = "material '" + m.id + "'";
  if (const auto *e = std::get_if<ElasticMaterial>(&m.law))
  {
    check(e->E > 0, where + ": E must be positive");
    check(e->nu >= 0 && e->nu < 0.5, where + ": nu must lie in [0, 0.5)");
    check(e->rho > 0, where + ": rho must be positive");
    check(e->thickness > 0, where + ": thickness must be positive");
  }
  else if (const auto *a = std::get_if<AcousticMaterial>(&m.law))
  {
    check(a->c > 0, where + ": c must be positive");
    check(a->rho > 0, where + ": rho must be positive");
  }
  else
  {
    const auto &p = std::get<JcaMaterial>(m.law);
    check(p.phi > 0 && p.phi <= 1, where + ": porosity must lie in (0, 1]");
    check(p.sigma > 0, where + ": flow resistivity must be positive");
    check(p.alpha_inf >= 1, where + ": tortuosity must be >= 1");
    check(p.viscous_length > 0 && p.thermal_length > 0,
          where + ": characteristic lengths must be positive");
    check(p.viscous_length <= p.thermal_length,
          where + ": viscous length must not exceed thermal length");
    check(p.rho_frame > 0, where + ": frame density must be positive");
    const auto &air = p.air;
    check(air.rho0 > 0 && air.c0 > 0 && air.viscosity > 0 && air.prandtl > 0 &&
              air.gamma > 1 && air.p0 > 0,
          where + ": air properties must be positive (gamma > 1)");
  }
}

}  // namespace

const DomainSpec &ModelConfig::domain(const std::string &id) const
{
  return domains.at(domain_index(id));
}

std::size_t ModelConfig::domain_index(const std::string &id) const
{
  for (std::size_t i = 0; i < domains.size(); ++i)
  {
    if (domains[i].id == id)
      return i;
  }
  throw ConfigError(fmt::format("unknown domain '{}'", id));
}

const MaterialSpec &ModelConfig::material(const std::string &id) const
{
  for (const auto &m : materials)
  {
    if (m.id == id)
      return m;
  }
  throw ConfigError(fmt::format("unknown material '{}'", id));
}

const LossFactorTable *ModelConfig::damping_table(const DomainSpec &d) const
{
  if (!d.damping_table_id)
    return nullptr;
  for (const auto &t : damping_tables)
  {
    if (t.id == *d.damping_table_id)
      return &t;
  }
  throw ConfigError(fmt::format("unknown damping table '{}'", *d.damping_table_id));
}

std::optional<SharedSegment> shared_segment(const Rect &a, const Rect &b, double tol)
{
  auto overlap = [](double a0, double a1, double b0, double b1) {
    return std::pair{std::max(a0, b0), std::min(a1, b1)};
  };
  if (std::abs(a.x1 - b.x0) <= tol || std::abs(a.x0 - b.x1) <= tol)
  {
    const bool a_left = std::abs(a.x1 - b.x0) <= tol;
    auto [s0, s1] = overlap(a.y0, a.y1, b.y0, b.y1);
    if (s1 - s0 > tol)
    {
      SharedSegment seg;
      seg.vertical = true;
      seg.coord = a_left ? a.x1 : a.x0;
      seg.s0 = s0;
      seg.s1 = s1;
      seg.side_a = a_left ? Edge::east : Edge::west;
      seg.side_b = a_left ? Edge::west : Edge::east;
      return seg;
    }
  }
  if (std::abs(a.y1 - b.y0) <= tol || std::abs(a.y0 - b.y1) <= tol)
  {
    const bool a_below = std::abs(a.y1 - b.y0) <= tol;
    auto [s0, s1] = overlap(a.x0, a.x1, b.x0, b.x1);
    if (s1 - s0 > tol)
    {
      SharedSegment seg;
      seg.vertical = false;
      seg.coord = a_below ? a.y1 : a.y0;
      seg.s0 = s0;
      seg.s1 = s1;
      seg.side_a = a_below ? Edge::north : Edge::south;
      seg.side_b = a_below ? Edge::south : Edge::north;
      return seg;
    }
  }
  return std::nullopt;
}

void validate(const ModelConfig &cfg)
{
  check(!cfg.domains.empty(), "at least one domain is required");

  std::set<std::string> ids;
  for (const auto &d : cfg.domains)
  {
    check(ids.insert(d.id).second, fmt::format("duplicate domain id '{}'", d.id));
    check(d.geometry.width() > 0 && d.geometry.height() > 0,
          fmt::format("domain '{}': degenerate rectangle", d.id));
  }
  for (std::size_t i = 0; i < cfg.domains.size(); ++i)
  {
    for (std::size_t j = i + 1; j < cfg.domains.size(); ++j)
    {
      const auto &a = cfg.domains[i].geometry;
      const auto &b = cfg.domains[j].geometry;
      const double ox = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
      const double oy = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
      check(!(ox > 1e-12 && oy > 1e-12),
            fmt::format("domains overlap: '{}' and '{}'", cfg.domains[i].id,
                        cfg.domains[j].id));
    }
  }

  std::set<std::string> mids;
  for (const auto &m : cfg.materials)
  {
    check(mids.insert(m.id).second, fmt::format("duplicate material id '{}'", m.id));
    validate_material(m);
  }

  std::set<std::string> tids;
  for (const auto &t : cfg.damping_tables)
  {
    check(tids.insert(t.id).second, fmt::format("duplicate damping table '{}'", t.id));
    check(!t.samples.empty(), fmt::format("damping table '{}': no samples", t.id));
    for (std::size_t i = 0; i < t.samples.size(); ++i)
    {
      check(t.samples[i].eta >= 0,
            fmt::format("damping table '{}': negative loss factor", t.id));
      if (i > 0)
        check(t.samples[i].f > t.samples[i - 1].f,
              fmt::format("damping table '{}': frequencies must ascend", t.id));
    }
  }

  for (const auto &d : cfg.domains)
  {
    check(mids.count(d.material_id),
          fmt::format("domain '{}': unknown material '{}'", d.id, d.material_id));
    const auto &law = cfg.material(d.material_id).law;
    const bool ok = (d.kind == DomainKind::elastic && std::holds_alternative<ElasticMaterial>(law)) ||
                    (d.kind == DomainKind::acoustic && std::holds_alternative<AcousticMaterial>(law)) ||
                    (d.kind == DomainKind::equivalent_fluid && std::holds_alternative<JcaMaterial>(law));
    check(ok, fmt::format("domain '{}': material '{}' does not match kind {}", d.id,
                          d.material_id, to_string(d.kind)));
    if (d.damping_table_id)
      check(tids.count(*d.damping_table_id),
            fmt::format("domain '{}': unknown damping table '{}'", d.id, *d.damping_table_id));
  }

  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto &i : cfg.interfaces)
  {
    check(ids.count(i.left) && ids.count(i.right),
          fmt::format("interface {}-{}: unknown domain", i.left, i.right));
    check(i.left != i.right, fmt::format("interface {}-{}: identical domains", i.left, i.right));
    check(pairs.insert(std::minmax(i.left, i.right)).second,
          fmt::format("interface {}-{}: declared twice", i.left, i.right));
    const auto &a = cfg.domain(i.left);
    const auto &b = cfg.domain(i.right);
    if (i.coupling == CouplingKind::fsi)
      check(is_pressure(a.kind) != is_pressure(b.kind),
            fmt::format("interface {}-{}: fsi needs one elastic and one pressure domain",
                        i.left, i.right));
    else
      check(a.kind == DomainKind::elastic && b.kind == DomainKind::elastic,
            fmt::format("interface {}-{}: fixed joints need two elastic domains", i.left,
                        i.right));
    const auto seg = shared_segment(a.geometry, b.geometry);
    check(seg.has_value() && seg->length() > 0,
          fmt::format("interface {}-{}: domains share no boundary segment", i.left, i.right));
    if (i.penalty)
      check(*i.penalty > 0, fmt::format("interface {}-{}: penalty must be positive", i.left,
                                        i.right));
  }

  if (cfg.load)
  {
    const auto &l = *cfg.load;
    check(ids.count(l.target_domain), fmt::format("load: unknown domain '{}'", l.target_domain));
    check(cfg.domain(l.target_domain).kind == DomainKind::elastic,
          "load: target must be an elastic domain");
    check(l.amplitude > 0, "load: amplitude must be positive");
    check(l.wave_speed > 0, "load: wave_speed must be positive");
    check(l.direction == 1 || l.direction == -1, "load: direction must be +1 or -1");
  }

  const auto &fp = cfg.frequency;
  check(fp.f_min > 0, "frequency: f_min must be positive");
  check(fp.delta_f > 0, "frequency: delta_f must be positive");
  check(fp.f_max >= fp.f_min, "frequency: f_max must not be below f_min");
  check(fp.band_edges.size() >= 2, "frequency: band_edges needs at least two entries");
  check(fp.band_edges.front() == fp.f_min && fp.band_edges.back() == fp.f_max,
        "frequency: band_edges must start at f_min and end at f_max");
  for (std::size_t i = 1; i < fp.band_edges.size(); ++i)
    check(fp.band_edges[i] > fp.band_edges[i - 1] || fp.f_min == fp.f_max,
          "frequency: band_edges must ascend");

  check(cfg.mesh.supports_per_wavelength > 0, "mesh: supports_per_wavelength must be positive");
  for (const auto &level : cfg.mesh.levels)
  {
    for (const auto &d : cfg.domains)
    {
      auto it = level.sizes.find(d.id);
      check(it != level.sizes.end(),
            fmt::format("mesh level '{}': no element size for domain '{}'", level.name, d.id));
      check(it->second.hx > 0 && it->second.hy > 0,
            fmt::format("mesh level '{}': element sizes must be positive", level.name));
    }
    for (const auto &[id, h] : level.sizes)
      check(ids.count(id), fmt::format("mesh level '{}': unknown domain '{}'", level.name, id));
  }

  const auto &s = cfg.solver;
  for (const auto &[name, groups] : s.groupings)
  {
    std::multiset<std::string> seen;
    for (const auto &g : groups)
    {
      check(!g.empty(), fmt::format("grouping '{}': empty group", name));
      for (const auto &id : g)
      {
        check(ids.count(id), fmt::format("grouping '{}': unknown domain '{}'", name, id));
        seen.insert(id);
      }
    }
    check(seen.size() == ids.size() && std::set<std::string>(seen.begin(), seen.end()) == ids,
          fmt::format("grouping '{}': groups must partition the domains", name));
  }
  if (!s.grouping.empty())
    check(s.groupings.count(s.grouping), fmt::format("solver: unknown grouping '{}'", s.grouping));
  check(s.overlap >= 0, "solver: overlap must be non-negative");
  check(s.atol > 0, "solver: atol must be positive");
  check(s.max_it > 0 && s.restart > 0, "solver: max_it and restart must be positive");

  const auto &m = cfg.mor;
  check(m.tol > 0, "mor: tol must be positive");
  check(m.max_points >= 1, "mor: max_points must be >= 1");
  check(m.moments_per_point >= 1, "mor: moments_per_point must be >= 1");
  check(m.candidate_stride >= 1, "mor: candidate_stride must be >= 1");
  if (!m.windows.empty())
  {
    check(m.windows.size() == fp.band_edges.size() - 1,
          "mor: windows needs one entry per frequency band");
    for (std::size_t b = 0; b < m.windows.size(); ++b)
    {
      const auto &ws = m.windows[b];
      if (ws.empty())
        continue;
      check(std::abs(ws.front().lo - fp.band_edges[b]) < 1e-9 &&
                std::abs(ws.back().hi - fp.band_edges[b + 1]) < 1e-9,
            fmt::format("mor: windows of band {} must cover the band", b));
      for (std::size_t k = 0; k < ws.size(); ++k)
      {
        check(ws[k].hi > ws[k].lo, fmt::format("mor: empty window in band {}", b));
        if (k > 0)
          check(std::abs(ws[k].lo - ws[k - 1].hi) < 1e-9,
                fmt::format("mor: windows of band {} must be contiguous", b));
      }
    }
  }

  if (!cfg.output.cabin_domain.empty())
  {
    check(ids.count(cfg.output.cabin_domain),
          fmt::format("output: unknown cabin domain '{}'", cfg.output.cabin_domain));
    const auto &cabin = cfg.domain(cfg.output.cabin_domain);
    check(is_pressure(cabin.kind), "output: cabin must be a pressure domain");
    for (const auto &p : cfg.output.probes)
      check(cabin.geometry.contains(p, 1e-12), "output: probe lies outside the cabin");
  }
}

ModelConfig parse_config(const std::string &text)
{
  json root;
  try
  {
    root = json::parse(text, nullptr, true, true);
  }
  catch (const json::parse_error &e)
  {
    throw ConfigError(fmt::format("parse error: {}", e.what()));
  }
  auto cfg = parse_json(root);
  validate(cfg);
  return cfg;
}

ModelConfig load_config(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialise_config(const ModelConfig &cfg)
{
  json root = json::object();

  json domains = json::array();
  for (const auto &d : cfg.domains)
  {
    json j = {{"id", d.id},
              {"kind", to_string(d.kind)},
              {"rect", {d.geometry.x0, d.geometry.y0, d.geometry.x1, d.geometry.y1}},
              {"material", d.material_id}};
    if (d.damping_table_id)
      j["damping"] = *d.damping_table_id;
    domains.push_back(j);
  }
  root["domains"] = domains;

  json materials = json::array();
  for (const auto &m : cfg.materials)
  {
    json j = {{"id", m.id}};
    if (const auto *e = std::get_if<ElasticMaterial>(&m.law))
    {
      j["type"] = "elastic";
      j["E"] = e->E;
      j["nu"] = e->nu;
      j["rho"] = e->rho;
      j["thickness"] = e->thickness;
      j["prestress"] = {{"tx", e->prestress.tx}, {"ty", e->prestress.ty}};
    }
    else if (const auto *a = std::get_if<AcousticMaterial>(&m.law))
    {
      j["type"] = "acoustic";
      j["c"] = a->c;
      j["rho"] = a->rho;
    }
    else
    {
      const auto &p = std::get<JcaMaterial>(m.law);
      j["type"] = "jca";
      j["phi"] = p.phi;
      j["sigma"] = p.sigma;
      j["alpha_inf"] = p.alpha_inf;
      j["viscous_length"] = p.viscous_length;
      j["thermal_length"] = p.thermal_length;
      j["rho_frame"] = p.rho_frame;
      j["air"] = {{"rho0", p.air.rho0},       {"c0", p.air.c0},       {"viscosity", p.air.viscosity},
                  {"prandtl", p.air.prandtl}, {"gamma", p.air.gamma}, {"p0", p.air.p0}};
    }
    materials.push_back(j);
  }
  root["materials"] = materials;

  json tables = json::array();
  for (const auto &t : cfg.damping_tables)
  {
    json samples = json::array();
    for (const auto &s : t.samples)
      samples.push_back({s.f, s.eta});
    tables.push_back({{"id", t.id}, {"samples", samples}});
  }
  root["damping_tables"] = tables;

  json interfaces = json::array();
  for (const auto &i : cfg.interfaces)
  {
    json j = {{"left", i.left},
              {"right", i.right},
              {"coupling", to_string(i.coupling)},
              {"conforming", i.conforming}};
    if (i.penalty)
      j["penalty"] = *i.penalty;
    interfaces.push_back(j);
  }
  root["interfaces"] = interfaces;

  if (cfg.load)
  {
    const auto &l = *cfg.load;
    root["load"] = {{"kind", "plane_wave"},        {"target", l.target_domain},
                    {"boundary", to_string(l.boundary)}, {"amplitude", l.amplitude},
                    {"wave_speed", l.wave_speed},  {"direction", l.direction}};
  }

  root["frequency"] = {{"f_min", cfg.frequency.f_min},
                       {"f_max", cfg.frequency.f_max},
                       {"delta_f", cfg.frequency.delta_f},
                       {"band_edges", cfg.frequency.band_edges}};

  json levels = json::array();
  for (const auto &level : cfg.mesh.levels)
  {
    json sizes = json::object();
    for (const auto &[id, h] : level.sizes)
      sizes[id] = {h.hx, h.hy};
    levels.push_back({{"name", level.name}, {"sizes", sizes}});
  }
  root["mesh"] = {{"supports_per_wavelength", cfg.mesh.supports_per_wavelength},
                  {"levels", levels}};

  json groupings = json::object();
  for (const auto &[name, groups] : cfg.solver.groupings)
    groupings[name] = groups;
  root["solver"] = {{"method", to_string(cfg.solver.method)},
                    {"groupings", groupings},
                    {"grouping", cfg.solver.grouping},
                    {"overlap", cfg.solver.overlap},
                    {"variant", to_string(cfg.solver.variant)},
                    {"atol", cfg.solver.atol},
                    {"max_it", cfg.solver.max_it},
                    {"restart", cfg.solver.restart},
                    {"diagonal_scale", cfg.solver.diagonal_scale},
                    {"warm_start", cfg.solver.warm_start}};

  json windows = json::array();
  for (const auto &ws : cfg.mor.windows)
  {
    if (ws.empty())
    {
      windows.push_back("auto");
      continue;
    }
    json band = json::array();
    for (const auto &w : ws)
      band.push_back({w.lo, w.hi});
    windows.push_back(band);
  }
  root["mor"] = {{"tol", cfg.mor.tol},
                 {"max_points", cfg.mor.max_points},
                 {"moments_per_point", cfg.mor.moments_per_point},
                 {"candidate_stride", cfg.mor.candidate_stride},
                 {"second_order", cfg.mor.second_order},
                 {"windows", windows}};

  if (!cfg.output.cabin_domain.empty())
  {
    json probes = json::array();
    for (const auto &p : cfg.output.probes)
      probes.push_back({p.x, p.y});
    root["output"] = {{"cabin", cfg.output.cabin_domain}, {"probes", probes}};
  }

  return root.dump(2) + "\n";
}

std::size_t grid_count(const FrequencyPlan &plan)
{
  const double steps = (plan.f_max - plan.f_min) / plan.delta_f;
  // Guard against representation error in the quotient (e.g. 0.3 / 0.1).
  return static_cast<std::size_t>(std::floor(steps + 1e-9 * std::max(1.0, steps))) + 1;
}

std::size_t band_count(const FrequencyPlan &plan)
{
  return plan.band_edges.size() < 2 ? 1 : plan.band_edges.size() - 1;
}

int band_of(const FrequencyPlan &plan, double f)
{
  const auto nb = static_cast<int>(band_count(plan));
  for (int b = 0; b < nb; ++b)
  {
    if (f <= plan.band_edges[b + 1])
      return b;
  }
  return nb - 1;
}

std::vector<GridPoint> frequency_grid(const FrequencyPlan &plan)
{
  const auto n = grid_count(plan);
  std::vector<GridPoint> grid;
  grid.reserve(n);
  for (std::size_t k = 0; k < n; ++k)
  {
    const double f = plan.f_min + static_cast<double>(k) * plan.delta_f;
    grid.push_back({f, band_of(plan, f)});
  }
  return grid;
}

}  // namespace vibro
