#include "vibro/mor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/core.h>

namespace vibro
{

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Complex kind_factor(TermKind kind, double f)
{
  const double w = angular(f);
  switch (kind)
  {
    case TermKind::stiffness:
      return 1.0;
    case TermKind::damping:
      return Complex(0.0, w);
    case TermKind::mass:
      return -w * w;
  }
  return 1.0;
}

std::vector<Complex> raw_coefficients(const AffineModel &fom, double f)
{
  std::vector<Complex> c;
  c.reserve(fom.terms().size());
  for (const auto &t : fom.terms())
    c.push_back(t.coef(f));
  return c;
}

Vec solve_dense(const Mat &A, const Vec &b)
{
  if (A.rows() == 0)
    return Vec();
  return A.partialPivLu().solve(b);
}

double cabin_p_ms(const Mat &cabin_R, const Vec &x)
{
  if (cabin_R.rows() == 0)
    return 0.0;
  const Vec p = cabin_R * x;
  return 0.5 * p.squaredNorm() / static_cast<double>(p.size());
}

}  // namespace

Mat ReducedModel::reduced_operator(double f, const std::vector<Complex> &coef) const
{
  if (coef.size() != terms.size())
    throw Error("reduced model: coefficient count does not match the terms");
  const int n = r();
  Mat A = Mat::Zero(n, n);
  for (std::size_t t = 0; t < terms.size(); ++t)
    A += (kind_factor(kinds[t], f) * coef[t]) * terms[t];
  return A;
}

std::optional<std::size_t> ReducedModel::sample_index(double f) const
{
  const auto it = std::lower_bound(sample_f.begin(), sample_f.end(), f - 1e-9);
  if (it == sample_f.end() || std::abs(*it - f) > 1e-9)
    return std::nullopt;
  return static_cast<std::size_t>(it - sample_f.begin());
}

Vec rom_solve(const ReducedModel &rom, double f)
{
  const auto i = rom.sample_index(f);
  if (!i)
    throw Error(fmt::format("reduced model has no sample at {} Hz", f));
  return solve_dense(rom.reduced_operator(f, rom.sample_coef[*i]), rom.sample_load[*i]);
}

Vec ReducedModel::lift(const Vec &x_R) const
{
  if (V.cols() != r())
    throw Error("reduced model: basis not stored");
  Vec x = V * x_R;
  if (scale.size() == x.size())
    x = x.cwiseProduct(scale.cast<Complex>());
  return x;
}

Vec rom_solve(const ReducedModel &rom, const AffineModel &fom, double f)
{
  if (rom.V.cols() != rom.r())
    throw Error("reduced model: basis not stored");
  Vec load = fom.load(f);
  if (rom.scale.size() == load.size())
    load = load.cwiseProduct(rom.scale.cast<Complex>());
  const Vec fr = rom.V.adjoint() * load;
  return solve_dense(rom.reduced_operator(f, raw_coefficients(fom, f)), fr);
}

Vec rom_solve_rayleigh(const ReducedModel &rom, double f, Rayleigh damping)
{
  const auto i = rom.sample_index(f);
  if (!i)
    throw Error(fmt::format("reduced model has no sample at {} Hz", f));
  const int n = rom.r();
  const double w = angular(f);
  Mat K = Mat::Zero(n, n), M = Mat::Zero(n, n);
  Mat A = rom.reduced_operator(f, rom.sample_coef[*i]);
  for (std::size_t t = 0; t < rom.terms.size(); ++t)
  {
    if (rom.kinds[t] == TermKind::stiffness)
      K += rom.sample_coef[*i][t] * rom.terms[t];
    else if (rom.kinds[t] == TermKind::mass)
      M += rom.sample_coef[*i][t] * rom.terms[t];
  }
  A += Complex(0.0, w) * (damping.alpha * M + damping.beta * K);
  return solve_dense(A, rom.sample_load[*i]);
}

int orthonormalize(Mat &V, const Mat &W, double drop_tol)
{
  if (V.cols() > 0 && V.rows() != W.rows())
    throw Error("orthonormalize: row mismatch");
  if (V.cols() == 0)
    V.resize(W.rows(), 0);
  int added = 0;
  for (int j = 0; j < W.cols(); ++j)
  {
    Vec v = W.col(j);
    const double n0 = v.norm();
    if (n0 == 0.0)
      continue;
    for (int pass = 0; pass < 2; ++pass)
    {
      for (int k = 0; k < V.cols(); ++k)
        v -= V.col(k).dot(v) * V.col(k);
    }
    const double n1 = v.norm();
    if (n1 <= drop_tol * n0)
      continue;
    V.conservativeResize(Eigen::NoChange, V.cols() + 1);
    V.col(V.cols() - 1) = v / n1;
    ++added;
  }
  return added;
}

Mat split_columns(const Mat &W, const std::vector<BasisGroup> &blocks)
{
  if (blocks.empty())
    return W;
  Mat out = Mat::Zero(W.rows(), W.cols() * static_cast<Eigen::Index>(blocks.size()));
  Eigen::Index c = 0;
  for (Eigen::Index j = 0; j < W.cols(); ++j)
  {
    for (const auto &group : blocks)
    {
      for (const auto &[offset, size] : group)
      {
        if (offset < 0 || offset + size > W.rows())
          throw Error("split_columns: range outside the vector");
        out.col(c).segment(offset, size) = W.col(j).segment(offset, size);
      }
      ++c;
    }
  }
  return out;
}

KrylovBlock krylov_block(const AffineModel &fom, double f_j, int m, bool second_order,
                         SparseLU &lu)
{
  if (m < 1)
    throw Error("krylov block: need at least one moment");
  lu.factorize(fom.operator_at(f_j));
  const SystemMatrices S = fom.matrices(f_j);
  const double w = angular(f_j);

  KrylovBlock out;
  Vec r0 = lu.solve(fom.load(f_j));
  if (r0.norm() == 0.0)
    throw Error("krylov block: zero load");
  r0 /= r0.norm();

  if (!second_order)
  {
    // Arnoldi: same span as the raw moments, but each new vector is orthogonalised before
    // the next solve so the sequence does not collapse onto the dominant mode.
    Mat Q = r0;
    for (int k = 1; k < m; ++k)
    {
      const Vec v = lu.solve(Vec(S.M * Q.col(Q.cols() - 1)));
      if (orthonormalize(Q, v) == 0)
      {
        out.breakdown = true;
        break;
      }
    }
    out.vectors = std::move(Q);
    return out;
  }

  // Second order: Arnoldi on the linearised pair (r_k, r_{k-1}) in 2n, where
  // r_k = -A^-1 (D~ r_{k-1} + M~ r_{k-2}); the top halves span the second-order space.
  const Eigen::Index n = fom.size();
  auto Dt = [&](const Vec &r) -> Vec { return 1i * (S.D * r) - 2.0 * w * (S.M * r); };
  Mat P;
  Vec start = Vec::Zero(2 * n);
  start.head(n) = r0;
  orthonormalize(P, start);
  for (int k = 1; k < m; ++k)
  {
    const Vec q = P.col(P.cols() - 1);
    Vec next(2 * n);
    next.head(n) = -lu.solve(Vec(Dt(q.head(n)) - S.M * q.tail(n)));
    next.tail(n) = q.head(n);
    if (orthonormalize(P, next) == 0)
    {
      out.breakdown = true;
      break;
    }
  }
  Mat Q;
  const int kept = orthonormalize(Q, P.topRows(n));
  if (kept < P.cols())
    out.breakdown = true;
  out.vectors = std::move(Q);
  return out;
}

void project(const AffineModel &fom, const Mat &V, ReducedModel &rom,
             const std::vector<int> &cabin_dofs)
{
  rom.terms.clear();
  rom.C_R.resize(0, 0);
  rom.cabin_R.resize(0, 0);
  extend_projection(fom, V, 0, rom, cabin_dofs);
}

void extend_projection(const AffineModel &fom, const Mat &V, int first_new, ReducedModel &rom,
                       const std::vector<int> &cabin_dofs)
{
  const int r = static_cast<int>(V.cols());
  const int r0 = first_new;
  const int m = r - r0;
  if (V.rows() != fom.size())
    throw Error("projection: basis has the wrong row count");
  if (r0 > 0 && (rom.r() != r0 || rom.terms.size() != fom.terms().size()))
    throw Error("projection: reduced model does not hold the leading columns");

  rom.full_dim = fom.size();
  rom.kinds.clear();
  for (const auto &t : fom.terms())
    rom.kinds.push_back(t.kind);
  if (r0 == 0)
    rom.terms.assign(fom.terms().size(), Mat());

  for (std::size_t k = 0; k < fom.terms().size(); ++k)
  {
    const AffineTerm &t = fom.terms()[k];
    const auto rows = t.matrix.rows(), cols = t.matrix.cols();
    const auto Vr = V.middleRows(t.row_offset, rows);
    const auto Vc = V.middleRows(t.col_offset, cols);
    const Mat TVn = t.matrix * Vc.rightCols(m);
    Mat Tr = Mat::Zero(r, r);
    if (r0 > 0)
    {
      Tr.topLeftCorner(r0, r0) = rom.terms[k];
      // V_new^H T V_old, using T real.
      const Mat TtVn = t.matrix.transpose() * Vr.rightCols(m);
      Tr.bottomLeftCorner(m, r0) = TtVn.adjoint() * Vc.leftCols(r0);
    }
    Tr.rightCols(m) = Vr.adjoint() * TVn;
    rom.terms[k] = std::move(Tr);
  }

  const SpMat &C = fom.output();
  Mat CR(C.rows(), r);
  if (r0 > 0)
    CR.leftCols(r0) = rom.C_R;
  if (C.rows() > 0)
    CR.rightCols(m) = C * V.rightCols(m);
  rom.C_R = std::move(CR);

  Mat P(static_cast<Eigen::Index>(cabin_dofs.size()), r);
  if (r0 > 0 && rom.cabin_R.rows() == P.rows())
    P.leftCols(r0) = rom.cabin_R;
  for (std::size_t i = 0; i < cabin_dofs.size(); ++i)
    P.row(static_cast<Eigen::Index>(i)).rightCols(m) = V.row(cabin_dofs[i]).rightCols(m);
  rom.cabin_R = std::move(P);
}

double relative_error(const Vec &y_full, const Vec &y_rom, bool *absolute)
{
  const double d = (y_full - y_rom).norm();
  const double ref = y_full.norm();
  if (ref <= std::numeric_limits<double>::min())
  {
    if (absolute)
      *absolute = true;
    return d;
  }
  if (absolute)
    *absolute = false;
  return d / ref;
}

ErrorSummary relative_error(const std::vector<Vec> &y_full, const std::vector<Vec> &y_rom)
{
  if (y_full.size() != y_rom.size())
    throw Error("relative error: size mismatch");
  ErrorSummary s;
  for (std::size_t i = 0; i < y_full.size(); ++i)
  {
    bool abs_flag = false;
    const double e = relative_error(y_full[i], y_rom[i], &abs_flag);
    s.absolute = s.absolute || abs_flag;
    s.eps.push_back(e);
    if (i == 0 || e > s.max)
    {
      s.max = e;
      s.argmax = i;
    }
  }
  return s;
}

Vec FomCache::solve(double f)
{
  const auto t0 = Clock::now();
  lu_.factorize(fom_.operator_at(f));
  Vec x = lu_.solve(fom_.load(f));
  last_time_ = seconds_since(t0);
  return x;
}

const Vec &FomCache::output(double f)
{
  auto it = outputs_.find(f);
  if (it != outputs_.end())
    return it->second;
  const Vec x = solve(f);
  return outputs_.emplace(f, fom_.output() * x).first->second;
}

ReducedModel greedy_expand(const AffineModel &full, const std::vector<double> &candidates,
                           const std::vector<double> &samples, Window window,
                           const GreedySettings &settings, FomCache &cache,
                           const std::vector<int> &cabin_dofs)
{
  if (candidates.empty())
    throw Error("greedy: empty candidate set");
  if (full.output().rows() == 0)
    throw Error("greedy: the model has no output probes");

  const Eigen::VectorXd scale = full.balancing_scale(0.5 * (window.lo + window.hi));
  const AffineModel fom = full.scaled(scale);

  const std::size_t nc = candidates.size();
  std::vector<Vec> loads(nc), y_full(nc), f_red(nc);
  std::vector<std::vector<Complex>> coefs(nc);
  for (std::size_t i = 0; i < nc; ++i)
  {
    loads[i] = fom.load(candidates[i]);
    coefs[i] = raw_coefficients(fom, candidates[i]);
    y_full[i] = cache.output(candidates[i]);
  }

  ReducedModel rom;
  rom.window = window;
  rom.full_dim = fom.size();
  rom.scale = scale;

  Mat V(fom.size(), 0);
  SparseLU lu;
  std::vector<bool> used(nc, false);
  const double centre = 0.5 * (window.lo + window.hi);
  std::size_t next = 0;
  for (std::size_t i = 1; i < nc; ++i)
  {
    if (std::abs(candidates[i] - centre) < std::abs(candidates[next] - centre))
      next = i;
  }

  struct Best
  {
    int r = 0;
    std::size_t points = 0;
    double eps = std::numeric_limits<double>::infinity();
    double argmax = 0.0;
    std::vector<std::pair<double, double>> log;
  } best;

  for (int it = 0; it < settings.max_points; ++it)
  {
    used[next] = true;
    const KrylovBlock block =
        krylov_block(fom, candidates[next], settings.moments, settings.second_order, lu);
    const int r0 = static_cast<int>(V.cols());
    const int added = orthonormalize(V, split_columns(block.vectors, settings.blocks));
    rom.expansion_points.push_back(candidates[next]);
    if (added == 0)
    {
      rom.stalled = true;
      break;
    }
    extend_projection(fom, V, r0, rom, cabin_dofs);
    const int r = static_cast<int>(V.cols());

    std::vector<Vec> y_rom(nc);
    for (std::size_t i = 0; i < nc; ++i)
    {
      Vec fr(r);
      if (r0 > 0)
        fr.head(r0) = f_red[i];
      fr.tail(added) = V.rightCols(added).adjoint() * loads[i];
      f_red[i] = fr;
      y_rom[i] = rom.C_R * solve_dense(rom.reduced_operator(candidates[i], coefs[i]), fr);
    }
    const ErrorSummary err = relative_error(y_full, y_rom);
    if (err.max < best.eps)
    {
      best.r = r;
      best.points = rom.expansion_points.size();
      best.eps = err.max;
      best.argmax = candidates[err.argmax];
      best.log.clear();
      for (std::size_t i = 0; i < nc; ++i)
        best.log.emplace_back(candidates[i], err.eps[i]);
    }
    rom.eps_history.push_back(best.eps);
    if (best.eps <= settings.tol)
    {
      rom.converged = true;
      break;
    }
    const std::size_t h = rom.eps_history.size();
    if (h >= 4 && rom.eps_history[h - 1] > 0.9 * rom.eps_history[h - 4])
    {
      rom.stalled = true;
      if (settings.stop_on_stall)
        break;
    }

    // Next point: worst unused candidate.
    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < nc; ++i)
    {
      if (!used[i] && (!pick || err.eps[i] > err.eps[*pick]))
        pick = i;
    }
    if (!pick)
      break;
    next = *pick;
  }

  if (best.r == 0)
    throw Error("greedy: no usable basis vectors");

  // The basis only grows, so the best model seen is a leading block of the final one.
  const int r = best.r;
  V.conservativeResize(Eigen::NoChange, r);
  for (auto &T : rom.terms)
    T = Mat(T.topLeftCorner(r, r));
  rom.C_R = Mat(rom.C_R.leftCols(r));
  rom.cabin_R = Mat(rom.cabin_R.leftCols(r));
  for (std::size_t i = 0; i < cabin_dofs.size(); ++i)
    rom.cabin_R.row(static_cast<Eigen::Index>(i)) *= scale(cabin_dofs[i]);
  rom.expansion_points.resize(best.points);
  rom.eps_max = best.eps;
  rom.eps_argmax = best.argmax;
  rom.error_log = std::move(best.log);

  for (double f : samples)
  {
    rom.sample_f.push_back(f);
    rom.sample_coef.push_back(raw_coefficients(fom, f));
    rom.sample_load.push_back(V.adjoint() * fom.load(f));
  }
  std::vector<std::size_t> order(rom.sample_f.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return rom.sample_f[a] < rom.sample_f[b]; });
  ReducedModel sorted = rom;
  for (std::size_t i = 0; i < order.size(); ++i)
  {
    sorted.sample_f[i] = rom.sample_f[order[i]];
    sorted.sample_coef[i] = rom.sample_coef[order[i]];
    sorted.sample_load[i] = rom.sample_load[order[i]];
  }
  rom = std::move(sorted);

  if (settings.keep_basis)
    rom.V = std::move(V);
  return rom;
}

std::vector<Window> window_plan(double f_lo, double f_hi, const std::vector<Window> &windows)
{
  if (windows.empty())
    return {Window{f_lo, f_hi}};
  const double tol = 1e-9 * std::max(1.0, f_hi);
  if (std::abs(windows.front().lo - f_lo) > tol || std::abs(windows.back().hi - f_hi) > tol)
    throw ConfigError(
        fmt::format("mor windows do not cover the band [{}, {}]", f_lo, f_hi));
  for (std::size_t i = 0; i < windows.size(); ++i)
  {
    if (!(windows[i].hi > windows[i].lo))
      throw ConfigError("mor window with empty range");
    if (i > 0 && std::abs(windows[i].lo - windows[i - 1].hi) > tol)
      throw ConfigError("mor windows are not contiguous");
  }
  return windows;
}

WindowGrid window_grid(const FrequencyPlan &plan, int band, Window w, int stride)
{
  if (stride < 1)
    throw ConfigError("candidate stride must be positive");
  WindowGrid g;
  const auto grid = frequency_grid(plan);
  const double tol = 1e-9 * std::max(1.0, plan.f_max);
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < grid.size(); ++k)
  {
    if (grid[k].band == band && grid[k].f >= w.lo - tol && grid[k].f <= w.hi + tol)
      idx.push_back(k);
  }
  // Window ends are always candidates so verification never extrapolates.
  for (std::size_t k : idx)
  {
    g.all.push_back(grid[k].f);
    const bool end = k == idx.front() || k == idx.back();
    if (end || k % static_cast<std::size_t>(stride) == 0)
      g.candidates.push_back(grid[k].f);
    else
      g.verification.push_back(grid[k].f);
  }
  return g;
}

namespace
{

void build_window(const AffineModel &fom, const FrequencyPlan &plan, int band, int level,
                  Window w, const MorSettings &settings, const std::vector<int> &cabin_dofs,
                  const std::vector<BasisGroup> &blocks, FomCache &cache, bool keep_basis, bool automatic, int depth,
                  std::vector<ReducedModel> &out, const RomProgress &progress)
{
  const WindowGrid g = window_grid(plan, band, w, settings.candidate_stride);
  if (g.all.empty())
    throw ConfigError(fmt::format("mor window [{}, {}] holds no grid frequency", w.lo, w.hi));

  GreedySettings gs;
  gs.tol = settings.tol;
  gs.max_points = settings.max_points;
  gs.moments = settings.moments_per_point;
  gs.second_order = settings.second_order;
  gs.keep_basis = keep_basis;
  gs.stop_on_stall = automatic;
  gs.blocks = blocks;

  ReducedModel rom = greedy_expand(fom, g.candidates, g.all, w, gs, cache, cabin_dofs);
  rom.band = band;
  rom.level = level;

  const bool can_split = automatic && depth < 6 && g.candidates.size() >= 4;
  if (!rom.converged && can_split)
  {
    // Split at the grid frequency nearest the middle.
    const double mid = 0.5 * (w.lo + w.hi);
    double cut = g.all.front();
    for (double f : g.all)
    {
      if (std::abs(f - mid) < std::abs(cut - mid))
        cut = f;
    }
    if (cut > w.lo && cut < w.hi)
    {
      build_window(fom, plan, band, level, {w.lo, cut}, settings, cabin_dofs, blocks, cache,
                   keep_basis, automatic, depth + 1, out, progress);
      build_window(fom, plan, band, level, {cut, w.hi}, settings, cabin_dofs, blocks, cache,
                   keep_basis, automatic, depth + 1, out, progress);
      return;
    }
  }
  if (progress)
    progress(rom);
  out.push_back(std::move(rom));
}

}  // namespace

std::vector<ReducedModel> build_band_roms(const AffineModel &fom, const FrequencyPlan &plan,
                                          int band, int level, const MorSettings &settings,
                                          const std::vector<int> &cabin_dofs,
                                          const std::vector<BasisGroup> &blocks,
                                          FomCache &cache, bool keep_basis,
                                          const RomProgress &progress)
{
  const auto nb = band_count(plan);
  if (band < 0 || static_cast<std::size_t>(band) >= nb)
    throw Error("build_band_roms: band out of range");
  const double lo = plan.band_edges[band];
  const double hi = plan.band_edges[band + 1];
  const bool automatic = settings.windows.size() <= static_cast<std::size_t>(band) ||
                         settings.windows[band].empty();
  const std::vector<Window> plan_w =
      window_plan(lo, hi, automatic ? std::vector<Window>{} : settings.windows[band]);
  std::vector<ReducedModel> out;
  for (const Window &w : plan_w)
    build_window(fom, plan, band, level, w, settings, cabin_dofs, blocks, cache, keep_basis,
                 automatic, 0, out, progress);
  return out;
}

RomSweep rom_sweep(const std::vector<ReducedModel> &roms, const std::vector<GridPoint> &grid)
{
  RomSweep out;
  for (const GridPoint &g : grid)
  {
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < roms.size(); ++i)
    {
      const auto &w = roms[i].window;
      const double tol = 1e-9 * std::max(1.0, w.hi);
      if (roms[i].band == g.band && g.f >= w.lo - tol && g.f <= w.hi + tol &&
          roms[i].sample_index(g.f))
        hits.push_back(i);
    }
    if (hits.empty())
      throw Error(fmt::format("no reduced model covers {} Hz", g.f));
    std::sort(hits.begin(), hits.end(), [&](std::size_t a, std::size_t b) {
      return roms[a].window.lo < roms[b].window.lo;
    });

    const ReducedModel &rom = roms[hits.front()];
    const auto t0 = Clock::now();
    const Vec x = rom_solve(rom, g.f);
    const Vec y = rom.C_R * x;
    const double dt = seconds_since(t0);

    RomPoint p;
    p.f = g.f;
    p.window = static_cast<int>(hits.front());
    p.y = y;
    p.p_ms = cabin_p_ms(rom.cabin_R, x);
    p.spl = p.p_ms > 0.0 ? 10.0 * std::log10(p.p_ms / (20e-6 * 20e-6))
                         : -std::numeric_limits<double>::infinity();
    p.time = dt;
    out.points.push_back(std::move(p));

    if (hits.size() > 1)
    {
      const ReducedModel &other = roms[hits[1]];
      const Vec y2 = other.C_R * rom_solve(other, g.f);
      out.seams.emplace_back(g.f, relative_error(y, y2));
    }
  }
  return out;
}

}  // namespace vibro
