#include "vibro/direct.hpp"

#include <chrono>
#include <cstring>
#include <utility>

#include <fmt/format.h>
#include <suitesparse/umfpack.h>

namespace vibro
{

namespace
{

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const double *packed(const Complex *p) { return reinterpret_cast<const double *>(p); }
double *packed(Complex *p) { return reinterpret_cast<double *>(p); }

void fnv(std::uint64_t &h, const void *data, std::size_t bytes)
{
  const auto *p = static_cast<const unsigned char *>(data);
  for (std::size_t i = 0; i < bytes; ++i)
  {
    h ^= p[i];
    h *= 1099511628211ull;
  }
}

}  // namespace

std::uint64_t pattern_hash(const SpMat &A)
{
  std::uint64_t h = 1469598103934665603ull;
  const int n = static_cast<int>(A.cols());
  const int m = static_cast<int>(A.rows());
  fnv(h, &n, sizeof n);
  fnv(h, &m, sizeof m);
  fnv(h, A.outerIndexPtr(), sizeof(int) * (A.outerSize() + 1));
  fnv(h, A.innerIndexPtr(), sizeof(int) * A.nonZeros());
  return h;
}

SparseLU::SparseLU(SparseLU &&o) noexcept { *this = std::move(o); }

SparseLU &SparseLU::operator=(SparseLU &&o) noexcept
{
  if (this != &o)
  {
    release_numeric();
    release_symbolic();
    symbolic_ = std::exchange(o.symbolic_, nullptr);
    numeric_ = std::exchange(o.numeric_, nullptr);
    pattern_hash_ = o.pattern_hash_;
    n_ = o.n_;
    lnz_ = o.lnz_;
    unz_ = o.unz_;
    Ap_ = std::move(o.Ap_);
    Ai_ = std::move(o.Ai_);
    Ax_ = std::move(o.Ax_);
  }
  return *this;
}

SparseLU::~SparseLU()
{
  release_numeric();
  release_symbolic();
}

void SparseLU::release_symbolic()
{
  if (symbolic_)
    umfpack_zi_free_symbolic(&symbolic_);
  symbolic_ = nullptr;
}

void SparseLU::release_numeric()
{
  if (numeric_)
    umfpack_zi_free_numeric(&numeric_);
  numeric_ = nullptr;
}

bool SparseLU::factorize(const SpMat &A_in)
{
  if (A_in.rows() != A_in.cols())
    throw SolverError("sparse LU: matrix is not square");
  SpMat A = A_in;
  A.makeCompressed();
  const int n = static_cast<int>(A.rows());
  Ap_.assign(A.outerIndexPtr(), A.outerIndexPtr() + n + 1);
  Ai_.assign(A.innerIndexPtr(), A.innerIndexPtr() + A.nonZeros());
  Ax_.assign(A.valuePtr(), A.valuePtr() + A.nonZeros());

  double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
  umfpack_zi_defaults(control);

  const auto h = pattern_hash(A);
  bool reused = symbolic_ && h == pattern_hash_ && n == n_;
  if (!reused)
  {
    release_symbolic();
    const int status = umfpack_zi_symbolic(n, n, Ap_.data(), Ai_.data(), packed(Ax_.data()),
                                           nullptr, &symbolic_, control, info);
    if (status != UMFPACK_OK)
    {
      symbolic_ = nullptr;
      throw SolverError(fmt::format("sparse LU: symbolic analysis failed (status {})", status));
    }
    pattern_hash_ = h;
    n_ = n;
  }
  release_numeric();
  const int status = umfpack_zi_numeric(Ap_.data(), Ai_.data(), packed(Ax_.data()), nullptr,
                                        symbolic_, &numeric_, control, info);
  if (status == UMFPACK_WARNING_singular_matrix)
  {
    // Locate the first zero pivot for the diagnostic.
    std::vector<int> P(n), Q(n);
    std::vector<double> D(2 * n);
    int do_recip = 0;
    umfpack_zi_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr,
                           nullptr, P.data(), Q.data(), D.data(), nullptr, &do_recip, nullptr,
                           numeric_);
    int col = -1;
    for (int k = 0; k < n; ++k)
    {
      if (D[2 * k] == 0.0 && D[2 * k + 1] == 0.0)
      {
        col = Q[k];
        break;
      }
    }
    release_numeric();
    throw SolverError(fmt::format("sparse LU: zero pivot at column {}", col));
  }
  if (status != UMFPACK_OK)
  {
    numeric_ = nullptr;
    throw SolverError(fmt::format("sparse LU: numeric factorisation failed (status {})", status));
  }
  int lnz = 0, unz = 0, nr = 0, nc = 0, nz_udiag = 0;
  umfpack_zi_get_lunz(&lnz, &unz, &nr, &nc, &nz_udiag, numeric_);
  lnz_ = lnz;
  unz_ = unz;
  return reused;
}

void SparseLU::solve_in_place(Complex *x, const Complex *b) const
{
  if (!numeric_)
    throw SolverError("sparse LU: solve before factorisation");
  double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
  umfpack_zi_defaults(control);
  const int status = umfpack_zi_solve(UMFPACK_A, Ap_.data(), Ai_.data(), packed(Ax_.data()),
                                      nullptr, packed(x), nullptr, packed(b), nullptr, numeric_,
                                      control, info);
  if (status != UMFPACK_OK)
    throw SolverError(fmt::format("sparse LU: solve failed (status {})", status));
}

Vec SparseLU::solve(const Vec &b) const
{
  if (b.size() != n_)
    throw SolverError("sparse LU: right-hand side has the wrong size");
  Vec x(n_);
  solve_in_place(x.data(), b.data());
  return x;
}

Mat SparseLU::solve(const Mat &B) const
{
  Mat X(n_, B.cols());
  for (Eigen::Index j = 0; j < B.cols(); ++j)
  {
    Vec b = B.col(j);
    X.col(j) = solve(b);
  }
  return X;
}

double relative_residual(const SpMat &A, const Vec &x, const Vec &f)
{
  const double nf = f.norm();
  const double r = (A * x - f).norm();
  return nf > 0 ? r / nf : r;
}

DirectResult direct_solve(SparseLU &lu, const SpMat &A, const Vec &f)
{
  DirectResult out;
  auto t0 = std::chrono::steady_clock::now();
  out.stats.symbolic_reused = lu.factorize(A);
  out.stats.factor_time = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  out.x = lu.solve(f);
  out.stats.solve_time = seconds_since(t0);
  out.stats.factor_memory = 16.0 * static_cast<double>(lu.factor_nonzeros());
  out.stats.residual = relative_residual(A, out.x, f);
  out.stats.iterations = 1;
  return out;
}

DirectResult direct_solve(const SpMat &A, const Vec &f)
{
  SparseLU lu;
  return direct_solve(lu, A, f);
}

}  // namespace vibro
