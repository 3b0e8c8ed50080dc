#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vibro/common.hpp"

namespace vibro
{

struct SolveStats
{
  int iterations = 0;
  std::vector<double> residual_history;
  double factor_time = 0.0;
  double solve_time = 0.0;
  double factor_memory = 0.0;  // bytes, LU factor nonzeros x 16
  double residual = 0.0;       // ||A x - f|| / ||f||
  bool converged = true;
  bool symbolic_reused = false;
  std::optional<double> relative_error;
};

// Sparse LU of a complex matrix (UMFPACK, multifrontal). The symbolic analysis is kept
// and reused for every later factorisation with an identical sparsity pattern.
class SparseLU
{
public:
  SparseLU() = default;
  SparseLU(const SparseLU &) = delete;
  SparseLU &operator=(const SparseLU &) = delete;
  SparseLU(SparseLU &&other) noexcept;
  SparseLU &operator=(SparseLU &&other) noexcept;
  ~SparseLU();

  // Returns true when the cached symbolic analysis was reused.
  bool factorize(const SpMat &A);
  Vec solve(const Vec &b) const;
  Mat solve(const Mat &B) const;
  void solve_in_place(Complex *x, const Complex *b) const;

  int rows() const { return n_; }
  long factor_nonzeros() const { return lnz_ + unz_; }
  bool ready() const { return numeric_ != nullptr; }

private:
  void release_symbolic();
  void release_numeric();

  void *symbolic_ = nullptr;
  void *numeric_ = nullptr;
  std::uint64_t pattern_hash_ = 0;
  int n_ = 0;
  long lnz_ = 0, unz_ = 0;
  // The factorised matrix must stay alive for iterative-refinement-free solves, so keep
  // a compressed copy of its arrays.
  std::vector<int> Ap_, Ai_;
  std::vector<Complex> Ax_;
};

std::uint64_t pattern_hash(const SpMat &A);

struct DirectResult
{
  Vec x;
  SolveStats stats;
};

DirectResult direct_solve(const SpMat &A, const Vec &f);
// Reuses the symbolic analysis held by lu when the pattern matches.
DirectResult direct_solve(SparseLU &lu, const SpMat &A, const Vec &f);

double relative_residual(const SpMat &A, const Vec &x, const Vec &f);

}  // namespace vibro
