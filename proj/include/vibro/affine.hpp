#pragma once

#include <functional>
#include <vector>

#include "vibro/common.hpp"

namespace vibro
{

enum class TermKind
{
  stiffness,
  damping,
  mass
};

// One frequency-independent sparse matrix placed at (row_offset, col_offset) and scaled
// by a frequency-dependent coefficient.
struct AffineTerm
{
  RealSpMat matrix;
  int row_offset = 0;
  int col_offset = 0;
  TermKind kind = TermKind::stiffness;
  std::function<Complex(double)> coef;
};

struct SystemMatrices
{
  SpMat K, D, M;
};

// A(f) = K(f) + i omega D(f) - omega^2 M(f), each a sum of coefficient-weighted terms,
// evaluated into one fixed sparsity pattern (the union of all terms plus the diagonal).
class AffineModel
{
public:
  AffineModel() = default;
  AffineModel(int n, std::vector<AffineTerm> terms, std::function<Vec(double)> load,
              SpMat output);

  int size() const { return n_; }
  const std::vector<AffineTerm> &terms() const { return terms_; }
  const SpMat &pattern() const { return pattern_; }
  const SpMat &output() const { return output_; }
  bool has_damping() const;

  // Scalar multiplying term t inside A(f), i.e. coef, i omega coef or -omega^2 coef.
  Complex operator_coefficient(std::size_t t, double f) const;
  void operator_values(double f, std::vector<Complex> &values) const;
  SpMat operator_at(double f) const;
  SystemMatrices matrices(double f) const;
  Vec load(double f) const { return load_ ? load_(f) : Vec::Zero(n_); }
  // Global (n x n) copy of one term, unscaled.
  SpMat term_global(std::size_t t) const;

  // s_i = 1 / sqrt(sum_t |c_t(f)| |T_t,ii|): brings displacement and pressure unknowns to
  // comparable magnitude. Entries without a diagonal get 1.
  Eigen::VectorXd balancing_scale(double f) const;
  // Same model in the unknowns x = diag(s) x^: every term, the load and the output map
  // are scaled accordingly.
  AffineModel scaled(const Eigen::VectorXd &s) const;

private:
  int n_ = 0;
  std::vector<AffineTerm> terms_;
  std::vector<std::vector<int>> pos_;
  std::function<Vec(double)> load_;
  SpMat output_;
  SpMat pattern_;
};

}  // namespace vibro
