#include "vibro/report.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "vibro/materials.hpp"

namespace vibro
{

std::string csv_number(double v)
{
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.12e}", v);
}

double level_db(Complex y)
{
  const double a = std::abs(y);
  if (a == 0.0)
    return -std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(a / 20e-6);
}

void write_schedule_csv(std::ostream &out, const ModelConfig &config,
                        const MeshSchedule &schedule)
{
  out << "band,f_lo,f_hi,level,name";
  for (const auto &d : config.domains)
    out << ",dofs_" << d.id;
  out << ",total,supports_at_f_hi\n";

  const auto &edges = config.frequency.band_edges;
  for (std::size_t b = 0; b < schedule.band_assignment.size(); ++b)
  {
    const int l = schedule.band_assignment[b];
    const MeshLevel &level = schedule.levels.at(l);
    std::vector<Mesh> meshes;
    meshes.reserve(config.domains.size());
    for (const auto &d : config.domains)
      meshes.push_back(generate_mesh(d, level.sizes.at(d.id)));
    std::vector<DomainMesh> dm;
    for (std::size_t i = 0; i < meshes.size(); ++i)
      dm.push_back({&meshes[i], config.domains[i].kind});
    const DofCount n = dof_count(dm, false);

    out << b << ',' << csv_number(edges[b]) << ',' << csv_number(edges[b + 1]) << ',' << l
        << ',' << level.name;
    for (int c : n.per_domain)
      out << ',' << c;
    out << ',' << n.total << ',' << csv_number(level_supports(config, level, edges[b + 1]))
        << '\n';
  }
}

void write_wavelength_csv(std::ostream &out, const ModelConfig &config,
                          const std::vector<double> &frequencies)
{
  out << "f";
  for (const auto &d : config.domains)
    out << ",lambda_" << d.id;
  out << '\n';
  for (double f : frequencies)
  {
    out << csv_number(f);
    for (const auto &d : config.domains)
      out << ',' << csv_number(min_wavelength(config, d, f));
    out << '\n';
  }
}

namespace
{

void probe_header(std::ostream &out, std::size_t n)
{
  for (std::size_t k = 0; k < n; ++k)
    out << fmt::format(",re_y{0},im_y{0},db_y{0}", k);
}

void probe_values(std::ostream &out, const std::vector<Complex> &y)
{
  for (const Complex &v : y)
    out << ',' << csv_number(v.real()) << ',' << csv_number(v.imag()) << ','
        << csv_number(level_db(v));
}

}  // namespace

void write_frf_csv(std::ostream &out, const std::vector<FrequencyRecord> &records)
{
  const std::size_t np = records.empty() ? 0 : records.front().probes.size();
  out << "f,band,level";
  probe_header(out, np);
  out << ",spl\n";
  for (const auto &r : records)
  {
    out << csv_number(r.f) << ',' << r.band << ',' << r.level;
    probe_values(out, r.probes);
    out << ',' << csv_number(r.cabin.spl) << '\n';
  }
}

void write_stats_csv(std::ostream &out, const std::vector<FrequencyRecord> &records)
{
  out << "f,band,dofs,iterations,converged,residual,factor_memory,spl,spl_reference,"
         "spl_rel_error\n";
  for (const auto &r : records)
  {
    out << csv_number(r.f) << ',' << r.band << ',' << r.dofs << ',' << r.stats.iterations
        << ',' << (r.stats.converged ? 1 : 0) << ',' << csv_number(r.stats.residual) << ','
        << csv_number(r.stats.factor_memory) << ',' << csv_number(r.cabin.spl) << ',';
    if (r.reference)
      out << csv_number(r.reference->spl) << ','
          << csv_number(spl_relative_error(r.cabin.spl, r.reference->spl));
    else
      out << ',';
    out << '\n';
  }
}

void write_timings_csv(std::ostream &out, const std::vector<FrequencyRecord> &records)
{
  out << "f,factor_time,solve_time,symbolic_reused\n";
  for (const auto &r : records)
    out << csv_number(r.f) << ',' << csv_number(r.stats.factor_time) << ','
        << csv_number(r.stats.solve_time) << ',' << (r.stats.symbolic_reused ? 1 : 0) << '\n';
}

void write_rom_frf_csv(std::ostream &out, const RomSweep &sweep)
{
  const std::size_t np = sweep.points.empty() ? 0 : sweep.points.front().y.size();
  out << "f,window";
  probe_header(out, np);
  out << ",spl\n";
  for (const auto &p : sweep.points)
  {
    out << csv_number(p.f) << ',' << p.window;
    probe_values(out, std::vector<Complex>(p.y.data(), p.y.data() + p.y.size()));
    out << ',' << csv_number(p.spl) << '\n';
  }
}

void write_rom_timings_csv(std::ostream &out, const RomSweep &sweep)
{
  out << "f,window,solve_time\n";
  for (const auto &p : sweep.points)
    out << csv_number(p.f) << ',' << p.window << ',' << csv_number(p.time) << '\n';
}

void write_rom_summary_csv(std::ostream &out, const std::vector<ReducedModel> &roms)
{
  out << "index,band,level,w_lo,w_hi,r,n,points,eps_max,eps_argmax,converged,stalled\n";
  for (std::size_t i = 0; i < roms.size(); ++i)
  {
    const auto &m = roms[i];
    out << i << ',' << m.band << ',' << m.level << ',' << csv_number(m.window.lo) << ','
        << csv_number(m.window.hi) << ',' << m.r() << ',' << m.full_dim << ','
        << m.expansion_points.size() << ',' << csv_number(m.eps_max) << ','
        << csv_number(m.eps_argmax) << ',' << (m.converged ? 1 : 0) << ','
        << (m.stalled ? 1 : 0) << '\n';
  }
}

void write_error_csv(std::ostream &out, const std::vector<ErrorRow> &rows)
{
  out << "set,window,f,eps\n";
  for (const auto &r : rows)
    out << r.set << ',' << r.window << ',' << csv_number(r.f) << ',' << csv_number(r.eps)
        << '\n';
}

void write_comparison_csv(std::ostream &out, const std::vector<ComparisonRow> &rows)
{
  out << "method,frequencies,total_time,time_per_frequency,memory,max_rel_error\n";
  for (const auto &r : rows)
    out << r.method << ',' << r.frequencies << ',' << csv_number(r.total_time) << ','
        << csv_number(r.time_per_frequency) << ',' << csv_number(r.memory) << ','
        << csv_number(r.max_rel_error) << '\n';
}

std::vector<ComparisonRow> read_comparison_csv(std::istream &in)
{
  std::vector<ComparisonRow> rows;
  std::string line;
  if (!std::getline(in, line))
    throw Error("comparison csv: no header");
  while (std::getline(in, line))
  {
    if (line.empty())
      continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      cells.push_back(cell);
    if (cells.size() != 6)
      throw Error(fmt::format("comparison csv: bad row '{}'", line));
    ComparisonRow r;
    r.method = cells[0];
    r.frequencies = std::stoi(cells[1]);
    r.total_time = std::stod(cells[2]);
    r.time_per_frequency = std::stod(cells[3]);
    r.memory = std::stod(cells[4]);
    r.max_rel_error = std::stod(cells[5]);
    rows.push_back(r);
  }
  return rows;
}

std::uint64_t fnv1a(const std::string &bytes)
{
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes)
  {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t config_hash(const ModelConfig &config) { return fnv1a(serialise_config(config)); }

void write_manifest(const std::filesystem::path &path, const RunManifest &m)
{
  nlohmann::json j;
  j["command"] = m.command;
  j["config_hash"] = fmt::format("{:016x}", m.config_hash);
  j["schedule"] = m.schedule;
  j["solver"] = m.solver;
  nlohmann::json dofs = nlohmann::json::array();
  for (const auto &[b, n] : m.band_dofs)
    dofs.push_back({{"band", b}, {"dofs", n}});
  j["band_dofs"] = dofs;
  j["files"] = m.files;
  j["wall_time"] = m.wall_time;
  std::ofstream out(path);
  if (!out)
    throw Error(fmt::format("cannot write {}", path.string()));
  out << j.dump(2) << '\n';
}

}  // namespace vibro
