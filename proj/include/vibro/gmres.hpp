#pragma once

#include <functional>

#include "vibro/direct.hpp"

namespace vibro
{

// out = Op(in); out is sized by the caller.
using LinearOp = std::function<void(const Vec &in, Vec &out)>;

struct GmresOptions
{
  double atol = 1e-4;
  int max_it = 150;
  int restart = 1000;
};

struct GmresResult
{
  Vec x;
  SolveStats stats;
};

// Right-preconditioned GMRES with modified Gram-Schmidt. With right preconditioning the
// monitored residual is the residual of the original system. An empty precond means
// identity. Stops when ||b - A x|| <= atol or after max_it iterations (stats.converged
// then reports false).
GmresResult gmres(const LinearOp &A, const LinearOp &precond, const Vec &b, const Vec &x0,
                  const GmresOptions &opts);

}  // namespace vibro
