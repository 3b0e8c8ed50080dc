#pragma once

#include <functional>
#include <map>
#include <memory>

#include "vibro/assembly.hpp"
#include "vibro/gmres.hpp"
#include "vibro/mor.hpp"
#include "vibro/precond.hpp"

namespace vibro
{

struct SweepOptions
{
  SolverMethod method = SolverMethod::direct;
  std::vector<std::vector<std::string>> groups;  // domain ids per subdomain
  int overlap = 1;
  SchwarzVariant variant = SchwarzVariant::restricted;
  GmresOptions gmres;
  bool diagonal_scale = true;
  bool warm_start = true;
  bool keep_solutions = false;
  // Evaluate only these grid frequencies (Hz); empty means the whole grid.
  std::vector<double> frequencies;
  // Also solve with sparse LU and record the cabin-SPL relative error.
  bool compare_direct = false;
};

// Options from the config's solver section; grouping resolved by name.
SweepOptions sweep_options(const ModelConfig &config);

// Solver for one mesh level. Keeps the symbolic factorisation (direct) or the
// preconditioner's subdomain structure (iterative) alive across frequencies.
class LevelSolver
{
public:
  LevelSolver(const SystemAssembler &assembler, const SweepOptions &options);
  ~LevelSolver();
  // guess: previous solution for warm starts (may be null).
  Vec solve(double f, const Vec *guess, SolveStats &stats);
  Vec solve(const SpMat &A, const Vec &b, const Vec *guess, SolveStats &stats);
  const Preconditioner *preconditioner() const { return pc_.get(); }

private:
  const SystemAssembler &assembler_;
  SweepOptions options_;
  SparseLU lu_;
  std::unique_ptr<Preconditioner> pc_;
};

std::unique_ptr<Preconditioner> make_preconditioner(const SystemAssembler &assembler,
                                                    const SweepOptions &options);

struct CabinLevel
{
  double p_ms = 0.0;  // mean over cabin nodes of |p|^2 / 2
  double spl = 0.0;   // dB re 20 uPa
};

CabinLevel cabin_spl(const Vec &x, const std::vector<int> &cabin_dofs);

struct FrequencyRecord
{
  double f = 0.0;
  int band = 0;
  int level = 0;
  int dofs = 0;
  std::vector<Complex> probes;
  CabinLevel cabin;
  std::optional<CabinLevel> reference;  // direct solution when compared
  SolveStats stats;
};

struct SweepResult
{
  std::vector<FrequencyRecord> records;
  std::vector<Vec> solutions;  // only when keep_solutions
};

// Builds (and caches) one assembler per mesh level used.
class LevelCache
{
public:
  LevelCache(const ModelConfig &config, const MeshSchedule &schedule);
  const SystemAssembler &level(int index);
  const MeshSchedule &schedule() const { return schedule_; }

private:
  const ModelConfig &config_;
  MeshSchedule schedule_;
  std::map<int, std::unique_ptr<SystemAssembler>> cache_;
};

using SweepProgress = std::function<void(const FrequencyRecord &)>;

SweepResult frequency_sweep(const ModelConfig &config, LevelCache &levels,
                            const SweepOptions &options, const SweepProgress &progress = {});

// Relative error of the SPL values in dB.
double spl_relative_error(double spl, double spl_reference);

// count grid frequencies spread evenly over the whole range (midpoints of equal slices).
std::vector<double> sample_frequencies(const FrequencyPlan &plan, int count);

// Basis split for the greedy: "domain" (one group per domain), "field" (all elastic
// domains vs all pressure domains) or "none".
std::vector<BasisGroup> basis_groups(const SystemAssembler &assembler, const std::string &split);

}  // namespace vibro
