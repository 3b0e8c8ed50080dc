#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "vibro/direct.hpp"

namespace vibro::test
{

std::filesystem::path source_dir() { return VIBRO_SOURCE_DIR; }

std::filesystem::path benchmark_path() { return source_dir() / "data" / "fuselage_slice.cfg"; }

std::filesystem::path test_data(const std::string &name)
{
  return source_dir() / "tests" / "data" / name;
}

ModelConfig benchmark() { return load_config(benchmark_path()); }

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
    throw Error("cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line))
  {
    if (line.empty())
      continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

double quadrature_oracle(const std::string &name)
{
  for (const auto &row : read_csv(test_data("quadrature_oracle.csv")))
  {
    if (row.at(0) == name)
      return std::stod(row.at(2));
  }
  throw Error("quadrature oracle: no entry " + name);
}

std::string cavity_config(double lx, double ly, double h, double c, double rho)
{
  return fmt::format(R"({{
  "domains": [{{"id": "cav", "kind": "acoustic", "rect": [0, 0, {0}, {1}], "material": "air"}}],
  "materials": [{{"id": "air", "type": "acoustic", "c": {3}, "rho": {4}}}],
  "frequency": {{"f_min": 10, "f_max": 500, "delta_f": 10}},
  "mesh": {{"levels": [{{"name": "fine", "sizes": {{"cav": [{2}, {2}]}}}}]}},
  "output": {{"cabin": "cav"}}
}})",
                     lx, ly, h, c, rho);
}

std::vector<double> cavity_modes(double lx, double ly, double c, std::size_t count)
{
  std::vector<double> f;
  for (int m = 0; m < 20; ++m)
  {
    for (int n = 0; n < 20; ++n)
    {
      if (m == 0 && n == 0)
        continue;
      f.push_back(0.5 * c * std::hypot(m / lx, n / ly));
    }
  }
  std::sort(f.begin(), f.end());
  f.resize(std::min(count, f.size()));
  return f;
}

double nearest_eigenfrequency(const SpMat &K, const SpMat &M, double f_guess, int block,
                              int sweeps)
{
  const int n = static_cast<int>(K.rows());
  const double sigma = std::pow(angular(f_guess), 2);
  SpMat S = K - Complex(sigma) * M;
  SparseLU lu;
  lu.factorize(S);
  std::mt19937 rng(7);
  Mat X(n, block);
  for (int j = 0; j < block; ++j)
    X.col(j) = random_vector(n, rng);
  for (int s = 0; s < sweeps; ++s)
  {
    X = lu.solve(Mat(M * X));
    X = X.householderQr().householderQ() * Mat::Identity(n, block);
  }
  // Rayleigh-Ritz on span X; K and M are real symmetric here.
  const Eigen::MatrixXd Kr = (X.adjoint() * (K * X)).real();
  const Eigen::MatrixXd Mr = (X.adjoint() * (M * X)).real();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Kr, Mr);
  double best = 0.0, gap = std::numeric_limits<double>::infinity();
  for (int j = 0; j < block; ++j)
  {
    const double lam = es.eigenvalues()(j);
    const double f = lam > 0 ? std::sqrt(lam) / (2.0 * std::numbers::pi) : 0.0;
    if (std::abs(f - f_guess) < gap)
    {
      gap = std::abs(f - f_guess);
      best = f;
    }
  }
  return best;
}

Vec random_vector(int n, std::mt19937 &rng)
{
  std::normal_distribution<double> g;
  Vec v(n);
  for (int i = 0; i < n; ++i)
    v(i) = Complex(g(rng), g(rng));
  return v;
}

SpMat random_sparse(int n, double density, std::mt19937 &rng, double diagonal_shift)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g;
  std::vector<Eigen::Triplet<Complex>> t;
  for (int i = 0; i < n; ++i)
  {
    t.emplace_back(i, i, Complex(diagonal_shift + g(rng), g(rng)));
    for (int j = 0; j < n; ++j)
    {
      if (i != j && u(rng) < density)
        t.emplace_back(i, j, Complex(g(rng), g(rng)));
    }
  }
  SpMat A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

AffineModel oscillator_chain(int n, double k, double m, double eta,
                             const std::vector<int> &outputs, std::mt19937 &rng, double spread)
{
  std::uniform_real_distribution<double> u(1.0 - spread, 1.0 + spread);
  std::vector<Eigen::Triplet<double>> kt, mt;
  for (int i = 0; i < n; ++i)
  {
    // Spring i connects mass i to mass i-1 (or the wall).
    const double ki = k * u(rng);
    kt.emplace_back(i, i, ki);
    if (i > 0)
    {
      kt.emplace_back(i - 1, i - 1, ki);
      kt.emplace_back(i, i - 1, -ki);
      kt.emplace_back(i - 1, i, -ki);
    }
    mt.emplace_back(i, i, m * u(rng));
  }
  RealSpMat K(n, n), M(n, n);
  K.setFromTriplets(kt.begin(), kt.end());
  M.setFromTriplets(mt.begin(), mt.end());

  std::vector<AffineTerm> terms(2);
  terms[0].matrix = K;
  terms[0].kind = TermKind::stiffness;
  terms[0].coef = [eta](double) { return Complex(1.0, eta); };
  terms[1].matrix = M;
  terms[1].kind = TermKind::mass;
  terms[1].coef = [](double) { return Complex(1.0); };

  SpMat C(static_cast<int>(outputs.size()), n);
  for (std::size_t i = 0; i < outputs.size(); ++i)
    C.insert(static_cast<int>(i), outputs[i]) = 1.0;
  C.makeCompressed();
  auto load = [n](double) {
    Vec b = Vec::Zero(n);
    b(n - 1) = 1.0;
    return b;
  };
  return AffineModel(n, std::move(terms), load, C);
}

Vec dense_output(const AffineModel &fom, double f)
{
  const Mat A = Mat(fom.operator_at(f));
  const Vec x = A.fullPivLu().solve(fom.load(f));
  return fom.output() * x;
}

}  // namespace vibro::test
