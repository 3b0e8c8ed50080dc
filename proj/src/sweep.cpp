#include "vibro/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

namespace vibro
{

SweepOptions sweep_options(const ModelConfig &config)
{
  const auto &s = config.solver;
  SweepOptions o;
  o.method = s.method;
  if (!s.grouping.empty())
    o.groups = s.groupings.at(s.grouping);
  o.overlap = s.overlap;
  o.variant = s.variant;
  o.gmres.atol = s.atol;
  o.gmres.max_it = s.max_it;
  o.gmres.restart = s.restart;
  o.diagonal_scale = s.diagonal_scale;
  o.warm_start = s.warm_start;
  return o;
}

std::unique_ptr<Preconditioner> make_preconditioner(const SystemAssembler &assembler,
                                                    const SweepOptions &options)
{
  std::vector<std::vector<std::string>> groups = options.groups;
  if (groups.empty())
  {
    for (const auto &d : assembler.config().domains)
      groups.push_back({d.id});
  }
  std::vector<std::vector<int>> sets;
  for (const auto &g : groups)
    sets.push_back(assembler.dofs_of(g));
  if (options.method == SolverMethod::bjacobi)
    return std::make_unique<BlockJacobiPreconditioner>(std::move(sets));
  DomainGrouping grouping{std::move(sets), options.overlap, options.variant};
  return std::make_unique<AdditiveSchwarzPreconditioner>(std::move(grouping));
}

LevelSolver::LevelSolver(const SystemAssembler &assembler, const SweepOptions &options)
    : assembler_(assembler), options_(options)
{
  if (options_.method != SolverMethod::direct)
    pc_ = make_preconditioner(assembler_, options_);
}

LevelSolver::~LevelSolver() = default;

Vec LevelSolver::solve(double f, const Vec *guess, SolveStats &stats)
{
  return solve(assembler_.operator_at(f), assembler_.load(f), guess, stats);
}

Vec LevelSolver::solve(const SpMat &A_in, const Vec &b, const Vec *guess, SolveStats &stats)
{
  if (options_.method == SolverMethod::direct)
  {
    auto r = direct_solve(lu_, A_in, b);
    stats = r.stats;
    return r.x;
  }

  // Symmetric diagonal scaling D A D y = D b, x = D y, with the right-hand side
  // normalised so that the absolute tolerance acts on a unit-norm system.
  const int n = static_cast<int>(A_in.rows());
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  SpMat A = A_in;
  if (options_.diagonal_scale)
  {
    for (int i = 0; i < n; ++i)
    {
      const double a = std::abs(A_in.coeff(i, i));
      d(i) = a > 0.0 ? 1.0 / std::sqrt(a) : 1.0;
    }
    for (int c = 0; c < A.outerSize(); ++c)
    {
      for (SpMat::InnerIterator it(A, c); it; ++it)
        it.valueRef() *= d(it.row()) * d(c);
    }
  }
  Vec bs = d.cast<Complex>().cwiseProduct(b);
  const double scale = bs.norm();
  if (scale == 0.0)
  {
    stats = SolveStats{};
    return Vec::Zero(n);
  }
  bs /= scale;

  pc_->setup(A);
  Vec x0 = Vec::Zero(n);
  if (guess && guess->size() == n)
    x0 = guess->cwiseQuotient(d.cast<Complex>()) / scale;

  LinearOp op = [&A](const Vec &in, Vec &out) { out.noalias() = A * in; };
  LinearOp pc = [this](const Vec &in, Vec &out) { pc_->apply(in, out); };
  auto res = gmres(op, pc, bs, x0, options_.gmres);
  Vec x = d.cast<Complex>().cwiseProduct(res.x) * scale;
  stats = res.stats;
  stats.factor_time = pc_->factor_time;
  stats.factor_memory = 16.0 * static_cast<double>(pc_->factor_nonzeros());
  stats.residual = relative_residual(A_in, x, b);
  return x;
}

CabinLevel cabin_spl(const Vec &x, const std::vector<int> &cabin_dofs)
{
  CabinLevel c;
  if (cabin_dofs.empty())
    return c;
  double s = 0.0;
  for (int i : cabin_dofs)
    s += std::norm(x(i));
  c.p_ms = 0.5 * s / static_cast<double>(cabin_dofs.size());
  const double p_ref = 20e-6;
  c.spl = 10.0 * std::log10(c.p_ms / (p_ref * p_ref));
  return c;
}

double spl_relative_error(double spl, double spl_reference)
{
  return std::abs(spl - spl_reference) / std::abs(spl_reference);
}

LevelCache::LevelCache(const ModelConfig &config, const MeshSchedule &schedule)
    : config_(config), schedule_(schedule)
{
}

const SystemAssembler &LevelCache::level(int index)
{
  auto it = cache_.find(index);
  if (it == cache_.end())
    it = cache_.emplace(index, std::make_unique<SystemAssembler>(config_, schedule_.levels.at(index)))
             .first;
  return *it->second;
}

SweepResult frequency_sweep(const ModelConfig &config, LevelCache &levels,
                            const SweepOptions &options, const SweepProgress &progress)
{
  const auto grid = frequency_grid(config.frequency);
  std::vector<GridPoint> points;
  if (options.frequencies.empty())
  {
    points = grid;
  }
  else
  {
    for (double f : options.frequencies)
    {
      auto it = std::find_if(grid.begin(), grid.end(),
                             [f](const GridPoint &g) { return std::abs(g.f - f) < 1e-9; });
      if (it == grid.end())
        throw ConfigError(fmt::format("frequency {} Hz is not on the grid", f));
      points.push_back(*it);
    }
    std::stable_sort(points.begin(), points.end(),
                     [](const GridPoint &a, const GridPoint &b) { return a.f < b.f; });
  }

  SweepResult result;
  std::unique_ptr<LevelSolver> solver, reference;
  int current_band = -1;
  Vec previous;
  for (const auto &gp : points)
  {
    const int level = levels.schedule().band_assignment.at(gp.band);
    const auto &assembler = levels.level(level);
    if (gp.band != current_band)
    {
      // New band: fresh solver objects, symbolic work redone once for the new pattern.
      solver = std::make_unique<LevelSolver>(assembler, options);
      if (options.compare_direct)
      {
        SweepOptions ref = options;
        ref.method = SolverMethod::direct;
        reference = std::make_unique<LevelSolver>(assembler, ref);
      }
      previous.resize(0);
      current_band = gp.band;
    }

    FrequencyRecord rec;
    rec.f = gp.f;
    rec.band = gp.band;
    rec.level = level;
    rec.dofs = assembler.size();
    const SpMat A = assembler.operator_at(gp.f);
    const Vec b = assembler.load(gp.f);
    Vec x;
    try
    {
      const Vec *guess = options.warm_start && previous.size() > 0 ? &previous : nullptr;
      x = solver->solve(A, b, guess, rec.stats);
    }
    catch (const SolverError &e)
    {
      throw SolverError(fmt::format("at {} Hz: {}", gp.f, e.what()));
    }
    rec.cabin = cabin_spl(x, assembler.cabin_dofs());
    const Vec y = assembler.probes().C_out * x;
    rec.probes.assign(y.data(), y.data() + y.size());
    if (reference)
    {
      SolveStats ref_stats;
      const Vec xr = reference->solve(A, b, nullptr, ref_stats);
      rec.reference = cabin_spl(xr, assembler.cabin_dofs());
      rec.stats.relative_error = spl_relative_error(rec.cabin.spl, rec.reference->spl);
    }
    if (options.keep_solutions)
      result.solutions.push_back(x);
    previous = std::move(x);
    if (progress)
      progress(rec);
    result.records.push_back(std::move(rec));
  }
  return result;
}

std::vector<double> sample_frequencies(const FrequencyPlan &plan, int count)
{
  const auto grid = frequency_grid(plan);
  const auto n = grid.size();
  std::vector<double> out;
  for (int k = 0; k < count && static_cast<std::size_t>(k) < n; ++k)
  {
    const std::size_t i = (2 * static_cast<std::size_t>(k) + 1) * n / (2 * count);
    out.push_back(grid[std::min(i, n - 1)].f);
  }
  return out;
}

std::vector<BasisGroup> basis_groups(const SystemAssembler &assembler, const std::string &split)
{
  const auto &blocks = assembler.block_map();
  std::vector<BasisGroup> groups;
  if (split == "domain")
  {
    for (const auto &r : blocks)
      groups.push_back(BasisGroup{std::make_pair(r.offset, r.size)});
  }
  else if (split == "field")
  {
    BasisGroup u, p;
    for (std::size_t i = 0; i < blocks.size(); ++i)
    {
      auto &g = assembler.config().domains[i].kind == DomainKind::elastic ? u : p;
      g.emplace_back(blocks[i].offset, blocks[i].size);
    }
    for (auto *g : {&u, &p})
    {
      if (!g->empty())
        groups.push_back(*g);
    }
  }
  else if (split != "none")
  {
    throw ConfigError(fmt::format("unknown basis split '{}'", split));
  }
  return groups;
}

}  // namespace vibro
