#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "support.hpp"
#include "vibro/sweep.hpp"

using namespace vibro;
using namespace vibro::test;

namespace
{

LinearOp op_of(const SpMat &A)
{
  return [&A](const Vec &x, Vec &y) { y = A * x; };
}

LinearOp op_of(const Preconditioner &P)
{
  return [&P](const Vec &r, Vec &z) { P.apply(r, z); };
}

// [[A1, eps B], [eps C, A2]] with well-conditioned diagonal blocks of size n each.
SpMat coupled_pair(int n, double eps, std::mt19937 &rng)
{
  const SpMat A1 = random_sparse(n, 0.05, rng, 8.0);
  const SpMat A2 = random_sparse(n, 0.05, rng, 8.0);
  const SpMat B = random_sparse(n, 0.05, rng, 0.0);
  const SpMat C = random_sparse(n, 0.05, rng, 0.0);
  std::vector<Eigen::Triplet<Complex>> t;
  auto put = [&](const SpMat &M, int ro, int co, Complex s) {
    for (int k = 0; k < M.outerSize(); ++k)
    {
      for (SpMat::InnerIterator it(M, k); it; ++it)
        t.emplace_back(ro + it.row(), co + it.col(), s * it.value());
    }
  };
  put(A1, 0, 0, 1.0);
  put(A2, n, n, 1.0);
  if (eps != 0.0)
  {
    put(B, 0, n, eps);
    put(C, n, 0, eps);
  }
  SpMat A(2 * n, 2 * n);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

std::vector<std::vector<int>> halves(int n)
{
  std::vector<int> a(n), b(n);
  for (int i = 0; i < n; ++i)
  {
    a[i] = i;
    b[i] = n + i;
  }
  return {a, b};
}

// max_i |b - A x|_i / (|A| |x| + |b|)_i
double backward_error(const SpMat &A, const Vec &x, const Vec &b)
{
  const Eigen::SparseMatrix<double> absA = A.cwiseAbs().real();
  const Eigen::VectorXd scale = absA * x.cwiseAbs() + b.cwiseAbs();
  const Eigen::VectorXd r = (b - A * x).cwiseAbs();
  double e = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i)
  {
    if (scale(i) > 0.0)
      e = std::max(e, r(i) / scale(i));
  }
  return e;
}

MeshLevel coarse(const ModelConfig &c) { return c.mesh.levels.front(); }

}  // namespace

TEST_CASE("direct solve: identity and a 2x2 system")
{
  SpMat I(3, 3);
  I.setIdentity();
  Vec b(3);
  b << 1.0, Complex(0, 2), -3.0;
  CHECK((direct_solve(I, b).x - b).norm() == 0.0);

  SpMat A(2, 2);
  A.insert(0, 0) = 2.0;
  A.insert(0, 1) = 1i;
  A.insert(1, 0) = -1i;
  A.insert(1, 1) = 3.0;
  Vec f(2);
  f << 1.0, 1.0;
  // Exact solution of [[2, i], [-i, 3]] x = [1, 1]: det = 5.
  Vec x(2);
  x << (3.0 - 1i) / 5.0, (2.0 + 1i) / 5.0;
  const auto r = direct_solve(A, f);
  CHECK((r.x - x).norm() < 1e-15);
  CHECK(r.stats.residual < 1e-15);
}

TEST_CASE("direct solve of the benchmark at 100 Hz: normwise residual below 1e-10")
{
  const auto c = benchmark();
  SystemAssembler a(c, coarse(c));
  const auto r = direct_solve(a.operator_at(100.0), a.load(100.0));
  CHECK(r.stats.residual <= 1e-10);
}

TEST_CASE("direct solve of the benchmark at 100 Hz matches a dense LU")
{
  const auto c = benchmark();
  SystemAssembler a(c, coarse(c));
  const SpMat A = a.operator_at(100.0);
  const Vec b = a.load(100.0);
  const auto r = direct_solve(A, b);
  CHECK(backward_error(A, r.x, b) <= 1e-14);
  CHECK(relative_residual(A, r.x, b) == doctest::Approx(r.stats.residual));
  const Vec x = Mat(A).partialPivLu().solve(b);
  const Vec y = a.probes().C_out * r.x, y_ref = a.probes().C_out * x;
  CHECK((y - y_ref).norm() <= 1e-8 * y_ref.norm());
  CHECK(r.stats.factor_memory > 0.0);
}

TEST_CASE("symbolic analysis is reused across frequencies")
{
  const auto c = benchmark();
  SystemAssembler a(c, coarse(c));
  SparseLU lu;
  CHECK_FALSE(lu.factorize(a.operator_at(50.0)));
  CHECK(lu.factorize(a.operator_at(60.0)));
  const SpMat A = a.operator_at(70.0);
  const Vec b = a.load(70.0);
  const auto r = direct_solve(lu, A, b);
  CHECK(r.stats.symbolic_reused);
  CHECK(backward_error(A, r.x, b) <= 1e-14);
  // A different pattern forces a fresh analysis.
  SpMat I(5, 5);
  I.setIdentity();
  CHECK_FALSE(lu.factorize(I));
}

TEST_CASE("GMRES converges in one step for the identity and for an exact preconditioner")
{
  std::mt19937 rng(3);
  const int n = 40;
  SpMat I(n, n);
  I.setIdentity();
  const Vec b = random_vector(n, rng);
  GmresOptions o;
  o.atol = 1e-10;
  auto r = gmres(op_of(I), {}, b, Vec(), o);
  CHECK(r.stats.converged);
  CHECK(r.stats.iterations == 1);

  const SpMat A = random_sparse(n, 0.2, rng, 4.0);
  SparseLU lu;
  lu.factorize(A);
  LinearOp exact = [&lu](const Vec &v, Vec &z) { z = lu.solve(v); };
  r = gmres(op_of(A), exact, b, Vec(), o);
  CHECK(r.stats.converged);
  CHECK(r.stats.iterations == 1);
  CHECK((A * r.x - b).norm() <= 1e-10);
}

TEST_CASE("GMRES on a random system agrees with LU and its residual never grows")
{
  std::mt19937 rng(11);
  const int n = 50;
  const SpMat A = random_sparse(n, 0.3, rng, 6.0);
  const Vec b = random_vector(n, rng);
  GmresOptions o;
  o.atol = 1e-12 * b.norm();
  o.max_it = 200;
  const auto r = gmres(op_of(A), {}, b, Vec(), o);
  REQUIRE(r.stats.converged);
  const Vec x = direct_solve(A, b).x;
  CHECK((r.x - x).norm() <= 1e-8 * x.norm());
  const auto &h = r.stats.residual_history;
  for (std::size_t k = 1; k < h.size(); ++k)
    CHECK(h[k] <= h[k - 1] * (1.0 + 1e-12));
}

TEST_CASE("GMRES reports non-convergence at the iteration cap")
{
  std::mt19937 rng(5);
  const int n = 60;
  const SpMat A = random_sparse(n, 0.3, rng, 0.0);
  const Vec b = random_vector(n, rng);
  GmresOptions o;
  o.atol = 1e-14;
  o.max_it = 5;
  const auto r = gmres(op_of(A), {}, b, Vec(), o);
  CHECK_FALSE(r.stats.converged);
  CHECK(r.stats.iterations == 5);
}

TEST_CASE("restarted GMRES still converges")
{
  std::mt19937 rng(8);
  const int n = 80;
  const SpMat A = random_sparse(n, 0.1, rng, 6.0);
  const Vec b = random_vector(n, rng);
  GmresOptions o;
  o.atol = 1e-10;
  o.max_it = 400;
  o.restart = 5;
  const auto r = gmres(op_of(A), {}, b, Vec(), o);
  CHECK(r.stats.converged);
  CHECK((A * r.x - b).norm() <= 1e-10 * 1.0001);
}

TEST_CASE("block Jacobi is exact on a block-diagonal system")
{
  std::mt19937 rng(13);
  const int n = 30;
  const SpMat A = coupled_pair(n, 0.0, rng);
  BlockJacobiPreconditioner P(halves(n));
  P.setup(A);
  GmresOptions o;
  o.atol = 1e-10;
  const auto r = gmres(op_of(A), op_of(P), random_vector(2 * n, rng), Vec(), o);
  CHECK(r.stats.converged);
  CHECK(r.stats.iterations == 1);
}

TEST_CASE("block Jacobi iterations grow with the coupling strength")
{
  std::vector<int> its;
  for (double eps : {0.0, 0.3, 1.5})
  {
    std::mt19937 rng(21);
    const int n = 60;
    const SpMat A = coupled_pair(n, eps, rng);
    BlockJacobiPreconditioner P(halves(n));
    P.setup(A);
    GmresOptions o;
    o.atol = 1e-10;
    o.max_it = 500;
    std::mt19937 rb(1);
    const auto r = gmres(op_of(A), op_of(P), random_vector(2 * n, rb), Vec(), o);
    REQUIRE(r.stats.converged);
    its.push_back(r.stats.iterations);
  }
  CHECK(its[0] < its[1]);
  CHECK(its[1] < its[2]);
}

TEST_CASE("Schwarz without overlap equals block Jacobi")
{
  std::mt19937 rng(17);
  const int n = 25;
  const SpMat A = coupled_pair(n, 0.7, rng);
  BlockJacobiPreconditioner J(halves(n));
  J.setup(A);
  for (auto variant : {SchwarzVariant::restricted, SchwarzVariant::full})
  {
    AdditiveSchwarzPreconditioner S({halves(n), 0, variant});
    S.setup(A);
    CHECK(S.factor_nonzeros() == J.factor_nonzeros());
    for (int k = 0; k < 20; ++k)
    {
      const Vec r = random_vector(2 * n, rng);
      Vec zj(2 * n), zs(2 * n);
      J.apply(r, zj);
      S.apply(r, zs);
      CHECK((zj - zs).norm() <= 1e-15 * zj.norm() + 1e-300);
    }
  }
}

TEST_CASE("overlap growth follows the matrix graph")
{
  // Tridiagonal pattern: each layer adds one index on each side.
  const int n = 10;
  SpMat A(n, n);
  for (int i = 0; i < n; ++i)
  {
    A.insert(i, i) = 2.0;
    if (i > 0)
      A.insert(i, i - 1) = -1.0;
  }
  A.makeCompressed();
  CHECK(grow_overlap(A, {4, 5}, 0) == std::vector<int>{4, 5});
  CHECK(grow_overlap(A, {4, 5}, 1) == std::vector<int>{3, 4, 5, 6});
  CHECK(grow_overlap(A, {4, 5}, 2) == std::vector<int>{2, 3, 4, 5, 6, 7});
  CHECK(grow_overlap(A, {0}, 3) == std::vector<int>{0, 1, 2, 3});
  CHECK(grow_overlap(A, {0}, 50).size() == static_cast<std::size_t>(n));
}

TEST_CASE("restricted and full Schwarz are both exact with one subdomain")
{
  std::mt19937 rng(23);
  const int n = 30;
  const SpMat A = random_sparse(n, 0.2, rng, 5.0);
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i)
    all[i] = i;
  for (auto variant : {SchwarzVariant::restricted, SchwarzVariant::full})
  {
    AdditiveSchwarzPreconditioner S({{all}, 2, variant});
    S.setup(A);
    const Vec r = random_vector(n, rng);
    Vec z(n);
    S.apply(r, z);
    CHECK((A * z - r).norm() <= 1e-12 * r.norm());
  }
}

TEST_CASE("subdomain factors are smaller than the monolithic factor")
{
  const auto c = benchmark();
  SystemAssembler a(c, coarse(c));
  const SpMat A = a.operator_at(400.0);
  SparseLU lu;
  lu.factorize(A);
  auto opts = sweep_options(c);
  opts.method = SolverMethod::gasm;
  opts.overlap = 0;
  auto P = make_preconditioner(a, opts);
  P->setup(A);
  CHECK(P->factor_nonzeros() < lu.factor_nonzeros());
}

TEST_CASE("warm start needs no more iterations than a cold start")
{
  const auto c = benchmark();
  SystemAssembler a(c, coarse(c));
  auto opts = sweep_options(c);
  opts.method = SolverMethod::gasm;
  opts.overlap = 1;
  LevelSolver s(a, opts);
  SolveStats st;
  const Vec x0 = s.solve(100.0, nullptr, st);
  REQUIRE(st.converged);
  SolveStats cold, warm;
  s.solve(102.0, nullptr, cold);
  s.solve(102.0, &x0, warm);
  CHECK(cold.converged);
  CHECK(warm.converged);
  CHECK(warm.iterations <= cold.iterations);
}

TEST_CASE("one-frequency sweeps: direct and Schwarz agree on the cabin level")
{
  const auto c = benchmark();
  LevelCache cache(c, build_schedule(c));
  auto opts = sweep_options(c);
  opts.frequencies = {100.0};
  const auto direct = frequency_sweep(c, cache, opts);
  REQUIRE(direct.records.size() == 1);
  const auto &r = direct.records.front();
  CHECK(r.f == 100.0);
  CHECK(r.band == 0);
  CHECK(r.level == 0);
  CHECK(r.dofs == 1352);
  CHECK(r.probes.size() == 3);
  CHECK(std::isfinite(r.cabin.spl));
  {
    SystemAssembler a(c, coarse(c));
    const auto ref = direct_solve(a.operator_at(100.0), a.load(100.0));
    CHECK(r.stats.residual == doctest::Approx(ref.stats.residual).epsilon(1e-6));
  }

  opts.method = SolverMethod::gasm;
  opts.overlap = 2;
  opts.compare_direct = true;
  const auto it = frequency_sweep(c, cache, opts);
  REQUIRE(it.records.size() == 1);
  const auto &q = it.records.front();
  REQUIRE(q.reference);
  CHECK(q.stats.converged);
  CHECK(q.reference->spl == doctest::Approx(r.cabin.spl).epsilon(1e-12));
  CHECK(spl_relative_error(q.cabin.spl, q.reference->spl) <= 1e-6);
}

TEST_CASE("a frequency off the grid is rejected")
{
  const auto c = benchmark();
  LevelCache cache(c, build_schedule(c));
  auto opts = sweep_options(c);
  opts.frequencies = {101.0};
  CHECK_THROWS_AS(frequency_sweep(c, cache, opts), Error);
}

TEST_CASE("cabin level of a uniform field")
{
  Vec x = Vec::Zero(6);
  for (int i = 2; i < 6; ++i)
    x(i) = Complex(0.0, 20e-6 * std::sqrt(2.0));
  const auto l = cabin_spl(x, {2, 3, 4, 5});
  CHECK(l.p_ms == doctest::Approx(4e-10));
  CHECK(l.spl == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(spl_relative_error(90.0, 100.0) == doctest::Approx(0.1));
}
