#include "vibro/precond.hpp"

#include <algorithm>
#include <chrono>

#include <fmt/format.h>

namespace vibro
{

std::vector<int> grow_overlap(const SpMat &A, const std::vector<int> &set, int layers)
{
  const int n = static_cast<int>(A.rows());
  // Row-wise adjacency: column-major storage gives column lists, add the transpose too.
  std::vector<std::vector<int>> adj(n);
  for (int c = 0; c < A.outerSize(); ++c)
  {
    for (SpMat::InnerIterator it(A, c); it; ++it)
    {
      if (it.row() == c)
        continue;
      adj[it.row()].push_back(c);
      adj[c].push_back(static_cast<int>(it.row()));
    }
  }
  std::vector<char> in(n, 0);
  std::vector<int> frontier = set;
  for (int i : set)
    in[i] = 1;
  for (int l = 0; l < layers; ++l)
  {
    std::vector<int> next;
    for (int i : frontier)
    {
      for (int j : adj[i])
      {
        if (!in[j])
        {
          in[j] = 1;
          next.push_back(j);
        }
      }
    }
    frontier = std::move(next);
  }
  std::vector<int> out;
  for (int i = 0; i < n; ++i)
  {
    if (in[i])
      out.push_back(i);
  }
  return out;
}

Submatrix::Submatrix(const SpMat &A, std::vector<int> index) : index_(std::move(index))
{
  const int n = static_cast<int>(A.rows());
  std::vector<int> local(n, -1);
  for (std::size_t k = 0; k < index_.size(); ++k)
    local[index_[k]] = static_cast<int>(k);
  const int m = static_cast<int>(index_.size());

  std::vector<int> outer(m + 1, 0), inner;
  pos_.clear();
  for (int lc = 0; lc < m; ++lc)
  {
    const int c = index_[lc];
    for (int p = A.outerIndexPtr()[c]; p < A.outerIndexPtr()[c + 1]; ++p)
    {
      const int lr = local[A.innerIndexPtr()[p]];
      if (lr >= 0)
      {
        inner.push_back(lr);
        pos_.push_back(p);
      }
    }
    outer[lc + 1] = static_cast<int>(inner.size());
  }
  // Rows inside a column stay sorted because index_ is sorted.
  sub_.resize(m, m);
  sub_.reserve(static_cast<Eigen::Index>(inner.size()));
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(inner.size());
  for (int lc = 0; lc < m; ++lc)
  {
    for (int k = outer[lc]; k < outer[lc + 1]; ++k)
      trip.emplace_back(inner[k], lc, A.valuePtr()[pos_[k]]);
  }
  sub_.setFromTriplets(trip.begin(), trip.end());
  sub_.makeCompressed();
}

void Submatrix::refresh(const SpMat &A)
{
  Complex *v = sub_.valuePtr();
  for (std::size_t k = 0; k < pos_.size(); ++k)
    v[k] = A.valuePtr()[pos_[k]];
}

namespace
{

void check_partition(const std::vector<std::vector<int>> &groups)
{
  for (const auto &g : groups)
  {
    if (g.empty())
      throw SolverError("preconditioner: empty subdomain");
    if (!std::is_sorted(g.begin(), g.end()))
      throw SolverError("preconditioner: subdomain indices must be sorted");
  }
}

void factor_blocks(const SpMat &A, const std::vector<std::vector<int>> &sets,
                   std::vector<Submatrix> &blocks, std::vector<SparseLU> &lu)
{
  if (blocks.size() != sets.size())
  {
    blocks.clear();
    lu.clear();
    for (const auto &s : sets)
      blocks.emplace_back(A, s);
    lu.resize(sets.size());
  }
  else
  {
    for (auto &b : blocks)
      b.refresh(A);
  }
  for (std::size_t j = 0; j < blocks.size(); ++j)
  {
    try
    {
      lu[j].factorize(blocks[j].matrix());
    }
    catch (const SolverError &e)
    {
      throw SolverError(fmt::format("subdomain {}: {}", j, e.what()));
    }
  }
}

double elapsed(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

BlockJacobiPreconditioner::BlockJacobiPreconditioner(std::vector<std::vector<int>> groups)
    : groups_(std::move(groups))
{
  check_partition(groups_);
}

void BlockJacobiPreconditioner::setup(const SpMat &A)
{
  const auto t0 = std::chrono::steady_clock::now();
  factor_blocks(A, groups_, blocks_, lu_);
  factor_time = elapsed(t0);
}

void BlockJacobiPreconditioner::apply(const Vec &r, Vec &z) const
{
  z.setZero(r.size());
  Vec rl, zl;
  for (std::size_t j = 0; j < groups_.size(); ++j)
  {
    const auto &g = groups_[j];
    rl.resize(static_cast<Eigen::Index>(g.size()));
    zl.resize(rl.size());
    for (std::size_t k = 0; k < g.size(); ++k)
      rl(k) = r(g[k]);
    lu_[j].solve_in_place(zl.data(), rl.data());
    for (std::size_t k = 0; k < g.size(); ++k)
      z(g[k]) = zl(k);
  }
}

long BlockJacobiPreconditioner::factor_nonzeros() const
{
  long s = 0;
  for (const auto &l : lu_)
    s += l.factor_nonzeros();
  return s;
}

AdditiveSchwarzPreconditioner::AdditiveSchwarzPreconditioner(DomainGrouping grouping)
    : grouping_(std::move(grouping))
{
  check_partition(grouping_.groups);
  if (grouping_.overlap < 0)
    throw SolverError("additive Schwarz: overlap must be non-negative");
}

void AdditiveSchwarzPreconditioner::setup(const SpMat &A)
{
  const auto t0 = std::chrono::steady_clock::now();
  if (extended_.empty())
  {
    for (const auto &g : grouping_.groups)
    {
      extended_.push_back(grow_overlap(A, g, grouping_.overlap));
      const auto &ext = extended_.back();
      std::vector<char> mask(ext.size(), 0);
      for (std::size_t k = 0; k < ext.size(); ++k)
        mask[k] = std::binary_search(g.begin(), g.end(), ext[k]) ? 1 : 0;
      core_mask_.push_back(std::move(mask));
    }
  }
  factor_blocks(A, extended_, blocks_, lu_);
  factor_time = elapsed(t0);
}

void AdditiveSchwarzPreconditioner::apply(const Vec &r, Vec &z) const
{
  z.setZero(r.size());
  const bool restricted = grouping_.variant == SchwarzVariant::restricted;
  Vec rl, zl;
  for (std::size_t j = 0; j < extended_.size(); ++j)
  {
    const auto &g = extended_[j];
    rl.resize(static_cast<Eigen::Index>(g.size()));
    zl.resize(rl.size());
    for (std::size_t k = 0; k < g.size(); ++k)
      rl(k) = r(g[k]);
    lu_[j].solve_in_place(zl.data(), rl.data());
    for (std::size_t k = 0; k < g.size(); ++k)
    {
      if (!restricted || core_mask_[j][k])
        z(g[k]) += zl(k);
    }
  }
}

long AdditiveSchwarzPreconditioner::factor_nonzeros() const
{
  long s = 0;
  for (const auto &l : lu_)
    s += l.factor_nonzeros();
  return s;
}

}  // namespace vibro
