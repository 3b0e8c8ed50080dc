// Command-line driver: config -> meshes -> assembly -> sweep / MOR -> CSV artifacts.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "vibro/assembly.hpp"
#include "vibro/materials.hpp"
#include "vibro/mor.hpp"
#include "vibro/report.hpp"
#include "vibro/rom_io.hpp"
#include "vibro/sweep.hpp"

namespace fs = std::filesystem;
using namespace vibro;

namespace
{

enum Exit
{
  ok = 0,
  config_error = 2,
  solver_failure = 3,
  verification_failure = 4
};

struct Common
{
  std::string config = "data/fuselage_slice.cfg";
  std::string out = "out";
  int threads = 0;
  unsigned seed = 0;
  bool quiet = false;
};

struct SolverFlags
{
  std::string solver;
  std::string grouping;
  int overlap = -1;
  double atol = -1.0;
  std::string variant;
  bool cold = false;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void add_common(CLI::App *app, Common &c)
{
  app->add_option("--config", c.config, "model file")->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "output directory");
  app->add_option("--threads", c.threads, "accepted for compatibility; runs are single-threaded");
  app->add_option("--seed", c.seed, "accepted for compatibility; no run uses randomness");
  app->add_flag("--quiet", c.quiet, "no progress output");
}

void add_solver_flags(CLI::App *app, SolverFlags &s)
{
  app->add_option("--solver", s.solver, "direct | bjacobi | gasm");
  app->add_option("--grouping", s.grouping, "grouping label from the config");
  app->add_option("--overlap", s.overlap, "Schwarz overlap layers");
  app->add_option("--atol", s.atol, "GMRES tolerance");
  app->add_option("--variant", s.variant, "restricted | full");
  app->add_flag("--cold", s.cold, "disable warm starts");
}

void apply_solver_flags(ModelConfig &config, const SolverFlags &s)
{
  if (!s.solver.empty())
    config.solver.method = solver_method_from_string(s.solver);
  if (!s.grouping.empty())
  {
    if (!config.solver.groupings.count(s.grouping))
      throw ConfigError(fmt::format("unknown grouping '{}'", s.grouping));
    config.solver.grouping = s.grouping;
  }
  if (s.overlap >= 0)
    config.solver.overlap = s.overlap;
  if (s.atol > 0.0)
    config.solver.atol = s.atol;
  if (!s.variant.empty())
    config.solver.variant = schwarz_variant_from_string(s.variant);
  if (s.cold)
    config.solver.warm_start = false;
}

std::string method_label(const ModelConfig &c)
{
  if (c.solver.method == SolverMethod::direct)
    return "direct";
  std::string label = to_string(c.solver.method);
  if (!c.solver.grouping.empty())
    label += "-" + c.solver.grouping;
  if (c.solver.method == SolverMethod::gasm)
    label += fmt::format("-o{}", c.solver.overlap);
  return label;
}

class Run
{
public:
  Run(std::string command, const Common &common)
      : common_(common), start_(Clock::now()), out_(common.out)
  {
    manifest_.command = std::move(command);
    config_ = load_config(common.config);
    manifest_.config_hash = config_hash(config_);
    fs::create_directories(out_);
  }

  ModelConfig &config() { return config_; }
  const fs::path &out() const { return out_; }

  std::ofstream file(const std::string &name)
  {
    const fs::path p = out_ / name;
    if (p.has_parent_path())
      fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f)
      throw Error(fmt::format("cannot write {}", p.string()));
    manifest_.files.push_back(name);
    return f;
  }

  void note_schedule(const MeshSchedule &s)
  {
    manifest_.schedule.clear();
    for (std::size_t b = 0; b < s.band_assignment.size(); ++b)
      manifest_.schedule.push_back(
          fmt::format("band {}: {}", b, s.levels[s.band_assignment[b]].name));
  }
  void note_dofs(int band, int dofs) { manifest_.band_dofs.emplace_back(band, dofs); }
  void note_solver(std::string s) { manifest_.solver = std::move(s); }

  void log(const std::string &msg) const
  {
    if (!common_.quiet)
      std::cerr << msg << '\n';
  }

  void finish()
  {
    manifest_.wall_time = seconds_since(start_);
    write_manifest(out_ / fmt::format("manifest_{}.json", manifest_.command), manifest_);
  }

private:
  const Common &common_;
  Clock::time_point start_;
  fs::path out_;
  ModelConfig config_;
  RunManifest manifest_;
};

// ---------------------------------------------------------------------------

int cmd_mesh(const Common &common)
{
  Run run("mesh", common);
  const auto &config = run.config();
  const MeshSchedule schedule = build_schedule(config);
  run.note_schedule(schedule);
  {
    auto f = run.file("schedule.csv");
    write_schedule_csv(f, config, schedule);
  }
  {
    std::vector<double> freqs;
    for (const auto &g : frequency_grid(config.frequency))
      freqs.push_back(g.f);
    auto f = run.file("wavelength.csv");
    write_wavelength_csv(f, config, freqs);
  }
  std::set<int> used(schedule.band_assignment.begin(), schedule.band_assignment.end());
  for (int l : used)
  {
    const SystemAssembler assembler(config, schedule.levels[l]);
    const auto &name = schedule.levels[l].name;
    for (const auto &m : assembler.meshes())
    {
      auto f = run.file(fmt::format("mesh/{}_{}.txt", name, m.domain_id));
      write_mesh(f, m);
    }
    for (std::size_t i = 0; i < assembler.interfaces().size(); ++i)
    {
      auto f = run.file(fmt::format("mesh/{}_interface{}.csv", name, i));
      write_interface_csv(f, assembler.interfaces()[i]);
    }
    run.log(fmt::format("level {}: {} DoFs", name, assembler.size()));
  }
  for (std::size_t b = 0; b < schedule.band_assignment.size(); ++b)
  {
    const auto &level = schedule.levels[schedule.band_assignment[b]];
    std::vector<Mesh> meshes;
    for (const auto &d : config.domains)
      meshes.push_back(generate_mesh(d, level.sizes.at(d.id)));
    std::vector<DomainMesh> dm;
    for (std::size_t i = 0; i < meshes.size(); ++i)
      dm.push_back({&meshes[i], config.domains[i].kind});
    run.note_dofs(static_cast<int>(b), dof_count(dm, false).total);
  }
  run.finish();
  return ok;
}

int cmd_assemble(const Common &common, double f)
{
  Run run("assemble", common);
  const auto &config = run.config();
  const MeshSchedule schedule = build_schedule(config);
  const int band = band_of(config.frequency, f);
  const int level = schedule.band_assignment.at(band);
  const SystemAssembler assembler(config, schedule.levels[level]);
  const std::string tag = fmt::format("{:g}Hz", f);
  write_matrix_market(run.out() / fmt::format("A_{}.mtx", tag), assembler.operator_at(f));
  write_matrix_market(run.out() / fmt::format("f_{}.mtx", tag), assembler.load(f));
  run.note_dofs(band, assembler.size());
  run.log(fmt::format("{} Hz: level {}, {} DoFs", f, schedule.levels[level].name,
                      assembler.size()));
  run.finish();
  return ok;
}

ComparisonRow summarise(const std::string &method, const SweepResult &res)
{
  ComparisonRow row;
  row.method = method;
  row.frequencies = static_cast<int>(res.records.size());
  for (const auto &r : res.records)
  {
    row.total_time += r.stats.factor_time + r.stats.solve_time;
    row.memory = std::max(row.memory, r.stats.factor_memory);
    if (r.stats.relative_error)
      row.max_rel_error = std::max(row.max_rel_error, *r.stats.relative_error);
  }
  if (row.frequencies > 0)
    row.time_per_frequency = row.total_time / row.frequencies;
  return row;
}

int cmd_sweep(const Common &common, const SolverFlags &flags, int samples, bool compare)
{
  Run run("sweep", common);
  auto &config = run.config();
  apply_solver_flags(config, flags);
  const MeshSchedule schedule = build_schedule(config);
  run.note_schedule(schedule);
  const std::string label = method_label(config);
  run.note_solver(label);

  SweepOptions opts = sweep_options(config);
  opts.compare_direct = compare;
  if (samples > 0)
    opts.frequencies = sample_frequencies(config.frequency, samples);
  LevelCache levels(config, schedule);
  int last_band = -1;
  const auto res = frequency_sweep(config, levels, opts, [&](const FrequencyRecord &r) {
    if (r.band != last_band)
    {
      run.note_dofs(r.band, r.dofs);
      last_band = r.band;
    }
    if (r.stats.iterations > 0 && !r.stats.converged)
      run.log(fmt::format("warning: {} Hz not converged after {} iterations", r.f,
                          r.stats.iterations));
  });

  {
    auto f = run.file("frf.csv");
    write_frf_csv(f, res.records);
  }
  {
    auto f = run.file("stats.csv");
    write_stats_csv(f, res.records);
  }
  {
    auto f = run.file("timings.csv");
    write_timings_csv(f, res.records);
  }
  {
    auto f = run.file(fmt::format("summary_{}.csv", label));
    write_comparison_csv(f, {summarise(label, res)});
  }
  run.log(fmt::format("{}: {} frequencies", label, res.records.size()));
  run.finish();
  return ok;
}

int cmd_verify(const Common &common, const SolverFlags &flags, int samples, double bound)
{
  Run run("verify", common);
  auto &config = run.config();
  apply_solver_flags(config, flags);
  if (config.solver.method == SolverMethod::direct)
    throw ConfigError("verify compares an iterative solver against LU; pick bjacobi or gasm");
  const MeshSchedule schedule = build_schedule(config);
  run.note_schedule(schedule);
  const std::string label = method_label(config);
  run.note_solver(label);

  SweepOptions opts = sweep_options(config);
  opts.compare_direct = true;
  opts.frequencies = sample_frequencies(config.frequency, samples);
  LevelCache levels(config, schedule);
  const auto res = frequency_sweep(config, levels, opts);

  {
    auto f = run.file(fmt::format("verify_{}.csv", label));
    write_stats_csv(f, res.records);
  }
  const ComparisonRow row = summarise(label, res);
  {
    auto f = run.file(fmt::format("summary_{}.csv", label));
    write_comparison_csv(f, {row});
  }
  bool converged = true;
  for (const auto &r : res.records)
    converged = converged && r.stats.converged;
  run.log(fmt::format("{}: max SPL relative error {:.3e} over {} frequencies", label,
                      row.max_rel_error, row.frequencies));
  run.finish();
  if (!converged)
    throw SolverError("GMRES did not converge at every sampled frequency");
  if (!(row.max_rel_error <= bound))
    throw VerificationError(
        fmt::format("SPL relative error {:.3e} exceeds {:.1e}", row.max_rel_error, bound));
  return ok;
}

// ---------------------------------------------------------------------------

std::vector<fs::path> rom_files(const fs::path &dir)
{
  std::vector<fs::path> files;
  if (fs::exists(dir))
  {
    for (const auto &e : fs::directory_iterator(dir))
    {
      if (e.path().extension() == ".rom")
        files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw Error(fmt::format("no reduced models in {}; run 'mor build' first", dir.string()));
  return files;
}

std::vector<ReducedModel> load_roms(const fs::path &dir)
{
  std::vector<ReducedModel> roms;
  for (const auto &p : rom_files(dir))
    roms.push_back(load_rom(p));
  std::stable_sort(roms.begin(), roms.end(), [](const ReducedModel &a, const ReducedModel &b) {
    return a.band != b.band ? a.band < b.band : a.window.lo < b.window.lo;
  });
  return roms;
}

int cmd_mor_build(const Common &common, int only_band, bool store_basis,
                  const std::string &split)
{
  Run run("mor_build", common);
  const auto &config = run.config();
  const MeshSchedule schedule = build_schedule(config);
  run.note_schedule(schedule);
  LevelCache levels(config, schedule);

  const fs::path dir = run.out() / "roms";
  fs::create_directories(dir);
  std::vector<ReducedModel> all;
  std::vector<ErrorRow> errors;
  for (std::size_t b = 0; b < band_count(config.frequency); ++b)
  {
    if (only_band >= 0 && static_cast<int>(b) != only_band)
      continue;
    const int level = schedule.band_assignment[b];
    const auto &assembler = levels.level(level);
    run.note_dofs(static_cast<int>(b), assembler.size());
    FomCache cache(assembler.model());
    const auto blocks = basis_groups(assembler, split);
    auto roms = build_band_roms(assembler.model(), config.frequency, static_cast<int>(b), level,
                                config.mor, assembler.cabin_dofs(), blocks, cache, store_basis,
                                [&](const ReducedModel &m) {
                                  run.log(fmt::format(
                                      "band {} [{:g}, {:g}] Hz: r = {} of n = {}, "
                                      "{} points, eps_max {:.3e}{}",
                                      m.band, m.window.lo, m.window.hi, m.r(), m.full_dim,
                                      m.expansion_points.size(), m.eps_max,
                                      m.converged ? "" : " (not converged)"));
                                });
    for (std::size_t w = 0; w < roms.size(); ++w)
    {
      const auto name = fmt::format("band{}_w{}.rom", b, w);
      save_rom(dir / name, roms[w], store_basis);
      for (const auto &[f, e] : roms[w].error_log)
        errors.push_back({"candidate", f, e, static_cast<int>(all.size() + w)});
    }
    all.insert(all.end(), std::make_move_iterator(roms.begin()),
               std::make_move_iterator(roms.end()));
  }
  {
    auto f = run.file("rom_summary.csv");
    write_rom_summary_csv(f, all);
  }
  {
    auto f = run.file("rom_candidate_errors.csv");
    write_error_csv(f, errors);
  }
  run.finish();
  bool converged = true;
  for (const auto &m : all)
    converged = converged && m.converged;
  if (!converged)
    throw VerificationError("at least one reduced model missed the tolerance");
  return ok;
}

int cmd_mor_sweep(const Common &common)
{
  Run run("mor_sweep", common);
  const auto &config = run.config();
  const auto roms = load_roms(run.out() / "roms");
  const auto sweep = rom_sweep(roms, frequency_grid(config.frequency));
  {
    auto f = run.file("rom_frf.csv");
    write_rom_frf_csv(f, sweep);
  }
  {
    auto f = run.file("rom_timings.csv");
    write_rom_timings_csv(f, sweep);
  }
  std::vector<ErrorRow> seams;
  for (const auto &[f, e] : sweep.seams)
    seams.push_back({"seam", f, e, 0});
  {
    auto f = run.file("rom_seams.csv");
    write_error_csv(f, seams);
  }
  ComparisonRow row;
  row.method = "mor";
  row.frequencies = static_cast<int>(sweep.points.size());
  for (const auto &p : sweep.points)
    row.total_time += p.time;
  for (const auto &m : roms)
  {
    row.memory = std::max(row.memory, 16.0 * m.r() * m.r());
    row.max_rel_error = std::max(row.max_rel_error, m.eps_max);
  }
  if (row.frequencies > 0)
    row.time_per_frequency = row.total_time / row.frequencies;
  {
    auto f = run.file("summary_mor.csv");
    write_comparison_csv(f, {row});
  }
  run.finish();
  return ok;
}

int cmd_mor_verify(const Common &common)
{
  Run run("mor_verify", common);
  const auto &config = run.config();
  const MeshSchedule schedule = build_schedule(config);
  LevelCache levels(config, schedule);
  const auto roms = load_roms(run.out() / "roms");

  std::vector<ErrorRow> rows;
  double worst = 0.0, fom_time = 0.0, rom_time = 0.0;
  int n_solves = 0;
  for (std::size_t i = 0; i < roms.size(); ++i)
  {
    const auto &rom = roms[i];
    const auto &assembler = levels.level(rom.level);
    if (assembler.size() != rom.full_dim)
      throw VerificationError("reduced model does not match the mesh level of its band");
    FomCache cache(assembler.model());
    const auto grid =
        window_grid(config.frequency, rom.band, rom.window, config.mor.candidate_stride);
    for (double f : grid.verification)
    {
      const Vec &y = cache.output(f);
      fom_time += cache.last_solve_time();
      const auto t0 = Clock::now();
      const Vec yr = rom.C_R * rom_solve(rom, f);
      rom_time += seconds_since(t0);
      ++n_solves;
      const double e = relative_error(y, yr);
      worst = std::max(worst, e);
      rows.push_back({"verification", f, e, static_cast<int>(i)});
    }
  }
  {
    auto f = run.file("rom_verify.csv");
    write_error_csv(f, rows);
  }
  ComparisonRow row;
  row.method = "mor";
  row.frequencies = n_solves;
  row.total_time = rom_time;
  row.time_per_frequency = n_solves ? rom_time / n_solves : 0.0;
  for (const auto &m : roms)
    row.memory = std::max(row.memory, 16.0 * m.r() * m.r());
  row.max_rel_error = worst;
  {
    auto f = run.file("summary_mor.csv");
    write_comparison_csv(f, {row});
  }
  run.log(fmt::format("verification grid: eps_max {:.3e}, speedup {:.1f}", worst,
                      rom_time > 0 ? fom_time / rom_time : 0.0));
  run.finish();
  if (!(worst <= config.mor.tol))
    throw VerificationError(
        fmt::format("ROM error {:.3e} exceeds {:.1e}", worst, config.mor.tol));
  return ok;
}

int cmd_report(const Common &common)
{
  const fs::path out(common.out);
  std::vector<ComparisonRow> rows;
  std::vector<fs::path> files;
  for (const auto &e : fs::directory_iterator(out))
  {
    const auto name = e.path().filename().string();
    if (name.rfind("summary_", 0) == 0 && e.path().extension() == ".csv")
      files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw Error("no summary files; run sweep, verify or mor first");
  for (const auto &p : files)
  {
    std::ifstream in(p);
    auto r = read_comparison_csv(in);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  std::ofstream f(out / "comparison.csv", std::ios::binary);
  write_comparison_csv(f, rows);
  if (!common.quiet)
    write_comparison_csv(std::cout, rows);
  return ok;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Frequency-domain vibroacoustic FE engine"};
  app.require_subcommand(1);

  Common common;
  SolverFlags flags;

  auto *mesh = app.add_subcommand("mesh", "mesh schedule, wavelength curves, mesh dumps");
  add_common(mesh, common);

  double assemble_f = 100.0;
  auto *assemble = app.add_subcommand("assemble", "dump A(f) and f(f) in Matrix Market form");
  add_common(assemble, common);
  assemble->add_option("--frequency", assemble_f, "Hz");

  int samples = 0;
  bool compare = false;
  auto *sweep = app.add_subcommand("sweep", "frequency sweep over the grid");
  add_common(sweep, common);
  add_solver_flags(sweep, flags);
  sweep->add_option("--samples", samples, "evaluate only this many spread grid frequencies");
  sweep->add_flag("--compare-direct", compare, "also solve with LU and record SPL errors");

  int verify_samples = 10;
  double verify_bound = 1e-2;
  auto *verify = app.add_subcommand("verify", "iterative vs direct at sampled frequencies");
  add_common(verify, common);
  add_solver_flags(verify, flags);
  verify->add_option("--samples", verify_samples, "number of sampled frequencies");
  verify->add_option("--bound", verify_bound, "allowed SPL relative error");

  auto *mor = app.add_subcommand("mor", "model order reduction");
  mor->require_subcommand(1);
  int band = -1;
  bool no_basis = false;
  auto *mor_build = mor->add_subcommand("build", "greedy reduced models per window");
  add_common(mor_build, common);
  mor_build->add_option("--band", band, "build one band only");
  mor_build->add_flag("--no-basis", no_basis, "do not store V in the ROM files");
  std::string split = "field";
  mor_build->add_option("--split", split, "basis split: domain | field | none");
  auto *mor_sweep = mor->add_subcommand("sweep", "evaluate the grid with stored ROMs");
  add_common(mor_sweep, common);
  auto *mor_verify = mor->add_subcommand("verify", "ROM vs full model on the verification grid");
  add_common(mor_verify, common);

  auto *report = app.add_subcommand("report", "aggregate summary files into comparison.csv");
  add_common(report, common);

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try
  {
    if (*mesh)
      return cmd_mesh(common);
    if (*assemble)
      return cmd_assemble(common, assemble_f);
    if (*sweep)
      return cmd_sweep(common, flags, samples, compare);
    if (*verify)
      return cmd_verify(common, flags, verify_samples, verify_bound);
    if (*mor_build)
      return cmd_mor_build(common, band, !no_basis, split);
    if (*mor_sweep)
      return cmd_mor_sweep(common);
    if (*mor_verify)
      return cmd_mor_verify(common);
    if (*report)
      return cmd_report(common);
  }
  catch (const ConfigError &e)
  {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  }
  catch (const VerificationError &e)
  {
    std::cerr << "verification failed: " << e.what() << '\n';
    return verification_failure;
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return solver_failure;
  }
  return ok;
}
