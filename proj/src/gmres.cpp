#include "vibro/gmres.hpp"

#include <chrono>
#include <cmath>

namespace vibro
{

namespace
{

// Complex Givens rotation zeroing b in (a, b).
void givens(Complex a, Complex b, double &c, Complex &s)
{
  const double na = std::abs(a), nb = std::abs(b);
  if (nb == 0.0)
  {
    c = 1.0;
    s = 0.0;
    return;
  }
  if (na == 0.0)
  {
    c = 0.0;
    s = std::conj(b) / nb;
    return;
  }
  const double r = std::hypot(na, nb);
  c = na / r;
  s = (a / na) * std::conj(b) / r;
}

}  // namespace

GmresResult gmres(const LinearOp &A, const LinearOp &precond, const Vec &b, const Vec &x0,
                  const GmresOptions &opts)
{
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index n = b.size();
  GmresResult out;
  out.x = x0.size() == n ? x0 : Vec::Zero(n);
  auto &st = out.stats;
  st.converged = false;

  Vec r(n), w(n), z(n);
  auto residual = [&](const Vec &x) {
    A(x, w);
    r = b - w;
    return r.norm();
  };

  double beta = residual(out.x);
  st.residual_history.push_back(beta);
  if (beta <= opts.atol)
  {
    st.converged = true;
  }

  const int m = std::max(1, opts.restart);
  while (!st.converged && st.iterations < opts.max_it)
  {
    std::vector<Vec> V;
    std::vector<Vec> Z;  // preconditioned directions
    V.reserve(m + 1);
    Z.reserve(m);
    Mat H = Mat::Zero(m + 1, m);
    std::vector<double> cs(m);
    std::vector<Complex> sn(m);
    Vec g = Vec::Zero(m + 1);
    g(0) = beta;
    V.push_back(r / beta);

    int j = 0;
    bool breakdown = false;
    for (; j < m && st.iterations < opts.max_it; ++j)
    {
      if (precond)
        precond(V[j], z);
      else
        z = V[j];
      A(z, w);
      Z.push_back(z);
      for (int i = 0; i <= j; ++i)
      {
        H(i, j) = V[i].dot(w);  // conj(V_i)^T w
        w -= H(i, j) * V[i];
      }
      const double hn = w.norm();
      H(j + 1, j) = hn;
      for (int i = 0; i < j; ++i)
      {
        const Complex t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -std::conj(sn[i]) * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      givens(H(j, j), H(j + 1, j), cs[j], sn[j]);
      H(j, j) = cs[j] * H(j, j) + sn[j] * H(j + 1, j);
      H(j + 1, j) = 0.0;
      g(j + 1) = -std::conj(sn[j]) * g(j);
      g(j) = cs[j] * g(j);
      ++st.iterations;
      const double est = std::abs(g(j + 1));
      st.residual_history.push_back(est);
      if (est <= opts.atol)
      {
        ++j;
        break;
      }
      // Happy breakdown: the Krylov space is invariant, the update is exact.
      if (hn <= 1e-14 * beta)
      {
        breakdown = true;
        ++j;
        break;
      }
      V.push_back(w / hn);
    }

    // Solve the triangular system and update x.
    Vec y = Vec::Zero(j);
    for (int i = j - 1; i >= 0; --i)
    {
      Complex s = g(i);
      for (int k = i + 1; k < j; ++k)
        s -= H(i, k) * y(k);
      y(i) = s / H(i, i);
    }
    for (int i = 0; i < j; ++i)
      out.x += y(i) * Z[i];

    beta = residual(out.x);
    st.converged = beta <= opts.atol;
    if (breakdown || beta == 0.0)
      break;
  }
  st.residual = b.norm() > 0 ? beta / b.norm() : beta;
  st.solve_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace vibro
