#pragma once

#include <vector>

#include "vibro/config.hpp"
#include "vibro/direct.hpp"

namespace vibro
{

// Partition of the global DoFs into subdomain groups.
struct DomainGrouping
{
  std::vector<std::vector<int>> groups;  // sorted global DoF indices, disjoint
  int overlap = 0;
  SchwarzVariant variant = SchwarzVariant::restricted;
};

// Adds `layers` rings of neighbours in the (symmetrised) sparsity graph of A.
std::vector<int> grow_overlap(const SpMat &A, const std::vector<int> &set, int layers);

// Principal submatrix A(I, I) with precomputed value positions for cheap refreshes.
class Submatrix
{
public:
  Submatrix() = default;
  Submatrix(const SpMat &A, std::vector<int> index);
  void refresh(const SpMat &A);
  const SpMat &matrix() const { return sub_; }
  const std::vector<int> &index() const { return index_; }

private:
  std::vector<int> index_;
  std::vector<int> pos_;  // position in A's value array for each entry of sub_
  SpMat sub_;
};

class Preconditioner
{
public:
  virtual ~Preconditioner() = default;
  // Builds (first call) or refactors (same pattern) the preconditioner for A.
  virtual void setup(const SpMat &A) = 0;
  virtual void apply(const Vec &r, Vec &z) const = 0;
  virtual long factor_nonzeros() const = 0;
  double factor_time = 0.0;
};

// Exact LU of every diagonal block, applied independently.
class BlockJacobiPreconditioner : public Preconditioner
{
public:
  explicit BlockJacobiPreconditioner(std::vector<std::vector<int>> groups);
  void setup(const SpMat &A) override;
  void apply(const Vec &r, Vec &z) const override;
  long factor_nonzeros() const override;

private:
  std::vector<std::vector<int>> groups_;
  std::vector<Submatrix> blocks_;
  std::vector<SparseLU> lu_;
};

// sum_j R~_j^T A_j^{-1} R_j over overlapping index sets; R~_j = R_j for the full variant
// and the restriction to the non-overlapping core for the restricted one.
class AdditiveSchwarzPreconditioner : public Preconditioner
{
public:
  explicit AdditiveSchwarzPreconditioner(DomainGrouping grouping);
  void setup(const SpMat &A) override;
  void apply(const Vec &r, Vec &z) const override;
  long factor_nonzeros() const override;
  const std::vector<std::vector<int>> &extended_sets() const { return extended_; }

private:
  DomainGrouping grouping_;
  std::vector<std::vector<int>> extended_;
  // Per subdomain: local positions that belong to the core (restricted combine).
  std::vector<std::vector<char>> core_mask_;
  std::vector<Submatrix> blocks_;
  std::vector<SparseLU> lu_;
};

}  // namespace vibro
