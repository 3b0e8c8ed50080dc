#pragma once

#include <functional>
#include <map>
#include <optional>

#include "vibro/affine.hpp"
#include "vibro/config.hpp"
#include "vibro/direct.hpp"

namespace vibro
{

// Unknown ranges (offset, size) treated as one part when Krylov vectors are split.
using BasisGroup = std::vector<std::pair<int, int>>;

// Reduced model valid on one frequency window. Term matrices are projected once,
// coefficients and the reduced load are sampled at the grid frequencies of the window,
// so a stored model can be evaluated without the full model.
struct ReducedModel
{
  int band = 0;
  int level = 0;
  Window window;
  int full_dim = 0;
  std::vector<double> expansion_points;  // Hz
  // Unknowns are balanced before projection: x = diag(scale) V x_R, with V orthonormal.
  Eigen::VectorXd scale;                 // n, empty means identity
  Mat V;                                 // n x r, empty when not stored
  std::vector<TermKind> kinds;
  std::vector<Mat> terms;  // V^H T V
  Mat C_R;                 // probes x r
  Mat cabin_R;             // cabin pressure DoFs x r
  std::vector<double> sample_f;
  std::vector<std::vector<Complex>> sample_coef;  // raw term coefficients per sample
  std::vector<Vec> sample_load;                   // V^H f
  std::vector<std::pair<double, double>> error_log;  // (f, eps) on the candidate grid
  std::vector<double> eps_history;                   // best eps_max after each greedy step
  double eps_max = 0.0;
  double eps_argmax = 0.0;
  bool converged = false;
  bool stalled = false;

  int r() const { return terms.empty() ? 0 : static_cast<int>(terms.front().rows()); }
  Mat reduced_operator(double f, const std::vector<Complex> &coef) const;
  std::optional<std::size_t> sample_index(double f) const;
  // Full-order unknowns from reduced coordinates (needs V).
  Vec lift(const Vec &x_R) const;
};

// Reduced solve from stored samples; throws when f is not sampled.
Vec rom_solve(const ReducedModel &rom, double f);
// Reduced solve with freshly evaluated coefficients and load of the unbalanced model (needs V).
Vec rom_solve(const ReducedModel &rom, const AffineModel &fom, double f);

// Two-pass modified Gram-Schmidt of the columns of W against V and each other;
// appends the columns that keep a relative norm above drop_tol. Returns count added.
int orthonormalize(Mat &V, const Mat &W, double drop_tol = 1e-10);

// Every column of W cut into its parts on the given groups (zero elsewhere).
Mat split_columns(const Mat &W, const std::vector<BasisGroup> &blocks);

struct KrylovBlock
{
  Mat vectors;  // orthonormal columns
  bool breakdown = false;
};

// Moment vectors at f_j from the factorisation of A(f_j), started from the load.
// First-order: span{A^-1 f, (A^-1 M) A^-1 f, ...}; second-order: the recurrence
// r_k = -A^-1 (D~ r_{k-1} + M~ r_{k-2}) with D~ = i D - 2 omega_j M, M~ = -M.
KrylovBlock krylov_block(const AffineModel &fom, double f_j, int m, bool second_order,
                         SparseLU &lu);

// V^H T V for every term, plus the reduced output maps.
void project(const AffineModel &fom, const Mat &V, ReducedModel &rom,
             const std::vector<int> &cabin_dofs = {});
// Same, reusing the projection of the first `first_new` columns already held by rom.
void extend_projection(const AffineModel &fom, const Mat &V, int first_new, ReducedModel &rom,
                       const std::vector<int> &cabin_dofs = {});

struct ErrorSummary
{
  std::vector<double> eps;
  double max = 0.0;
  std::size_t argmax = 0;
  bool absolute = false;  // some reference output vanished; absolute error reported
};

double relative_error(const Vec &y_full, const Vec &y_rom, bool *absolute = nullptr);
ErrorSummary relative_error(const std::vector<Vec> &y_full, const std::vector<Vec> &y_rom);

// Exact full-order outputs with a cached symbolic factorisation.
class FomCache
{
public:
  explicit FomCache(const AffineModel &fom) : fom_(fom) {}
  const Vec &output(double f);
  Vec solve(double f);
  double last_solve_time() const { return last_time_; }

private:
  const AffineModel &fom_;
  SparseLU lu_;
  std::map<double, Vec> outputs_;
  double last_time_ = 0.0;
};

struct GreedySettings
{
  double tol = 1e-2;
  int max_points = 20;
  int moments = 4;
  bool second_order = false;
  bool keep_basis = true;
  // Give up once eps_max has dropped by less than 10 % over three steps.
  bool stop_on_stall = false;
  // Groups of unknowns whose parts of every Krylov vector enter the basis separately.
  // Keeps the coupling blocks of the projected operator apart; without it a
  // shared basis mixes displacement and pressure rows and the Galerkin model degrades
  // away from the expansion points.
  std::vector<BasisGroup> blocks;
};

// Greedy expansion-point selection on the candidate frequencies of one window, on the
// model balanced at the window centre. samples: frequencies at which reduced providers
// are stored.
ReducedModel greedy_expand(const AffineModel &fom, const std::vector<double> &candidates,
                           const std::vector<double> &samples, Window window,
                           const GreedySettings &settings, FomCache &cache,
                           const std::vector<int> &cabin_dofs = {});

// All windows of one band: explicit ones, or automatic bisection of the band whenever
// the greedy stalls or runs out of budget.
using RomProgress = std::function<void(const ReducedModel &)>;
std::vector<ReducedModel> build_band_roms(const AffineModel &fom, const FrequencyPlan &plan,
                                          int band, int level, const MorSettings &settings,
                                          const std::vector<int> &cabin_dofs,
                                          const std::vector<BasisGroup> &blocks,
                                          FomCache &cache, bool keep_basis = true,
                                          const RomProgress &progress = {});

// Validates explicit windows for a band (contiguous and covering) or returns the whole
// band as a single window when none are given.
std::vector<Window> window_plan(double f_lo, double f_hi, const std::vector<Window> &windows);

// Grid frequencies of a band split into greedy candidates (every stride-th grid index
// plus both window ends) and the disjoint verification set.
struct WindowGrid
{
  std::vector<double> all, candidates, verification;
};

WindowGrid window_grid(const FrequencyPlan &plan, int band, Window w, int stride);

struct RomPoint
{
  double f = 0.0;
  int window = 0;
  Vec y;
  double p_ms = 0.0;
  double spl = 0.0;
  double time = 0.0;  // seconds for the reduced solve
};

// Evaluates every frequency by the ROM whose window contains it; shared window edges
// go to the lower window, and the disagreement of both ROMs there is recorded.
struct RomSweep
{
  std::vector<RomPoint> points;
  std::vector<std::pair<double, double>> seams;  // (f, relative disagreement)
};

RomSweep rom_sweep(const std::vector<ReducedModel> &roms, const std::vector<GridPoint> &grid);

// Optional post-hoc damping D_R = alpha M_R + beta K_R added to the reduced operator.
struct Rayleigh
{
  double alpha = 0.0;
  double beta = 0.0;
};

Vec rom_solve_rayleigh(const ReducedModel &rom, double f, Rayleigh damping);

}  // namespace vibro
