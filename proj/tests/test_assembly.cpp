#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <algorithm>

#include "support.hpp"
#include "vibro/assembly.hpp"

using namespace vibro;
using namespace vibro::test;

namespace
{

MeshLevel level_named(const ModelConfig &c, const std::string &name)
{
  for (const auto &l : c.mesh.levels)
  {
    if (l.name == name)
      return l;
  }
  throw Error("no level " + name);
}

double max_abs(const SpMat &A)
{
  double m = 0.0;
  for (int k = 0; k < A.outerSize(); ++k)
  {
    for (SpMat::InnerIterator it(A, k); it; ++it)
      m = std::max(m, std::abs(it.value()));
  }
  return m;
}

ModelConfig undamped_benchmark()
{
  auto c = benchmark();
  for (auto &d : c.domains)
    d.damping_table_id.reset();
  return c;
}

}  // namespace

TEST_CASE("benchmark dimension equals the DoF count of the level meshes")
{
  const auto c = benchmark();
  const int expected[] = {1352, 3068, 12222};
  int i = 0;
  for (const char *name : {"coarse", "medium", "fine"})
  {
    SystemAssembler a(c, level_named(c, name));
    std::vector<DomainMesh> dm;
    for (std::size_t d = 0; d < a.meshes().size(); ++d)
      dm.push_back({&a.meshes()[d], c.domains[d].kind});
    CHECK(a.size() == dof_count(dm, false).total);
    CHECK(a.size() == expected[i++]);
    CHECK(a.block_map().back().offset + a.block_map().back().size == a.size());
  }
}

TEST_CASE("block pattern follows the interface graph")
{
  const auto c = benchmark();
  SystemAssembler a(c, level_named(c, "coarse"));
  const auto s = a.blocks_at(200.0);
  std::set<std::pair<int, int>> k_keys, m_keys;
  for (const auto &[rc, B] : s.K_blocks)
    k_keys.insert(rc);
  for (const auto &[rc, B] : s.M_blocks)
    m_keys.insert(rc);
  // om1 = 0 (skin), om2 = 1 (wool), om3 = 2 (lining), om4 = 3 (cabin).
  const std::set<std::pair<int, int>> k_expected = {{0, 0}, {1, 1}, {2, 2}, {3, 3},
                                                    {0, 1}, {2, 1}, {2, 3}, {0, 3}};
  const std::set<std::pair<int, int>> m_expected = {{0, 0}, {1, 1}, {2, 2}, {3, 3},
                                                    {1, 0}, {1, 2}, {3, 2}, {3, 0}};
  CHECK(k_keys == k_expected);
  CHECK(m_keys == m_expected);
  CHECK(s.couplings.size() == 4);
}

TEST_CASE("block form and affine operator agree")
{
  const auto c = benchmark();
  SystemAssembler a(c, level_named(c, "coarse"));
  for (double f : {10.0, 250.0, 1000.0})
  {
    const auto s = a.blocks_at(f);
    const double w2 = std::pow(angular(f), 2);
    const SpMat A = s.global_K() - Complex(w2) * s.global_M();
    const SpMat B = a.operator_at(f);
    CHECK(max_abs(A - B) <= 1e-12 * max_abs(B));
    CHECK((s.f_ext - a.load(f)).norm() == 0.0);
  }
}

TEST_CASE("coupling blocks: -t C on the structure side, rho C^T on the fluid side")
{
  const auto c = benchmark();
  SystemAssembler a(c, level_named(c, "coarse"));
  const double f = 300.0;
  const auto s = a.blocks_at(f);
  for (const auto &cp : s.couplings)
  {
    const SpMat C = cp.C.cast<Complex>();
    const SpMat Ks = s.K_blocks.at({cp.structure, cp.fluid});
    const SpMat Mf = s.M_blocks.at({cp.fluid, cp.structure});
    CHECK(max_abs(Ks + Complex(cp.depth) * C) <= 1e-14 * max_abs(C));
    const SpMat Ct = SpMat(C.transpose());
    CHECK(max_abs(Mf - cp.rho * Ct) <= 1e-14 * std::abs(cp.rho) * max_abs(C));
  }
  // Lining (2) over cabin (3): the fluid's outward normal is +y on a 1.98 m edge.
  for (const auto &cp : s.couplings)
  {
    if (cp.structure == 2 && cp.fluid == 3)
      CHECK(cp.C.sum() == doctest::Approx(1.98).epsilon(1e-12));
  }
}

TEST_CASE("decoupled domains give a block-diagonal operator")
{
  auto c = benchmark();
  c.interfaces.clear();
  SystemAssembler a(c, level_named(c, "coarse"));
  const auto s = a.blocks_at(120.0);
  for (const auto &[rc, B] : s.K_blocks)
    CHECK(rc.first == rc.second);
  for (const auto &[rc, B] : s.M_blocks)
    CHECK(rc.first == rc.second);
  const SpMat A = a.operator_at(120.0);
  const auto &map = a.block_map();
  auto block_of = [&](int i) {
    for (std::size_t b = 0; b < map.size(); ++b)
    {
      if (i >= map[b].offset && i < map[b].offset + map[b].size)
        return static_cast<int>(b);
    }
    return -1;
  };
  int off_block = 0;
  for (int k = 0; k < A.outerSize(); ++k)
  {
    for (SpMat::InnerIterator it(A, k); it; ++it)
    {
      if (it.value() != Complex(0.0) && block_of(it.row()) != block_of(it.col()))
        ++off_block;
    }
  }
  CHECK(off_block == 0);
}

TEST_CASE("without damping the elastic and acoustic blocks are Hermitian and M is SPD")
{
  const auto c = undamped_benchmark();
  SystemAssembler a(c, level_named(c, "coarse"));
  const auto s = a.blocks_at(150.0);
  for (int d : {0, 2, 3})
  {
    const Mat K = Mat(s.K_blocks.at({d, d}));
    const Mat M = Mat(s.M_blocks.at({d, d}));
    CHECK((K - K.adjoint()).norm() <= 1e-12 * K.norm());
    CHECK((M - M.adjoint()).norm() <= 1e-12 * M.norm());
    Eigen::LLT<Mat> llt(M);
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("acoustic stiffness annihilates constants")
{
  const auto c = benchmark();
  SystemAssembler a(c, level_named(c, "coarse"));
  const auto s = a.blocks_at(80.0);
  for (int d : {1, 3})
  {
    const SpMat &K = s.K_blocks.at({d, d});
    const Vec ones = Vec::Ones(K.cols());
    CHECK((K * ones).norm() <= 1e-10 * max_abs(K));
  }
}

TEST_CASE("rigid cavity resonances within 1 % of the analytic modes")
{
  const double lx = 2.0, ly = 1.6, c0 = 343.0;
  const auto config = parse_config(cavity_config(lx, ly, 0.04, c0));
  SystemAssembler a(config, config.mesh.levels.front());
  const auto [K, M] = a.matrices(100.0);
  for (double f : cavity_modes(lx, ly, c0, 6))
  {
    const double fh = nearest_eigenfrequency(K, M, f);
    INFO("mode " << f << " Hz, computed " << fh);
    CHECK(std::abs(fh - f) <= 0.01 * f);
  }
}

TEST_CASE("plane-wave pressure: amplitude, phase and winding")
{
  LoadSpec l;
  l.amplitude = 2.0;
  l.wave_speed = 686.0;
  l.direction = 1;
  CHECK(std::abs(plane_wave_pressure(l, 100.0, 0.0) - Complex(2.0)) < 1e-15);
  for (double s : {0.1, 0.7, 1.3})
    CHECK(std::abs(plane_wave_pressure(l, 350.0, s)) == doctest::Approx(2.0));
  // One full wavelength along the edge.
  const double L = 1.72;
  const Complex end = plane_wave_pressure(l, l.wave_speed / L, L);
  CHECK(std::abs(end - Complex(2.0)) < 1e-12);
  // Direction flips the sign of the phase.
  LoadSpec r = l;
  r.direction = -1;
  const Complex p = plane_wave_pressure(l, 300.0, 0.4), q = plane_wave_pressure(r, 300.0, 0.4);
  CHECK(std::abs(p - std::conj(q)) < 1e-14);
}

TEST_CASE("plane-wave load on the skin")
{
  const auto c = benchmark();
  const auto level = level_named(c, "coarse");
  const auto &d = c.domain("om1");
  const Mesh mesh = generate_mesh(d, level.sizes.at("om1"));
  LoadSpec l = *c.load;

  SUBCASE("quasi-static limit: uniform inward push, total force p L")
  {
    const Vec F = plane_wave_load(l, 0.0, mesh);
    Complex fx = 0.0, fy = 0.0;
    for (Eigen::Index i = 0; i < F.size(); i += 2)
    {
      fx += F(i);
      fy += F(i + 1);
    }
    CHECK(std::abs(fx - Complex(l.amplitude * 1.72)) < 1e-12);
    CHECK(std::abs(fy) == 0.0);
    for (Eigen::Index i = 0; i < F.size(); i += 2)
      CHECK(std::abs(F(i).imag()) <= 1e-12);
  }
  SUBCASE("one full wavelength on the edge gives zero net force")
  {
    const Vec F = plane_wave_load(l, l.wave_speed / 1.72, mesh);
    Complex fx = 0.0;
    for (Eigen::Index i = 0; i < F.size(); i += 2)
      fx += F(i);
    CHECK(std::abs(fx) < 1e-9);
  }
  SUBCASE("zero amplitude gives zero load")
  {
    l.amplitude = 0.0;
    CHECK(plane_wave_load(l, 500.0, mesh).norm() == 0.0);
  }
  SUBCASE("assembled load carries the skin thickness")
  {
    SystemAssembler a(c, level);
    const Vec F = a.load(200.0);
    const auto &b = a.block_map()[0];
    const Vec Fs = plane_wave_load(l, 200.0, mesh);
    CHECK((F.segment(b.offset, b.size) - 0.003 * Fs).norm() <= 1e-15 * Fs.norm());
    CHECK((F.size() - b.size) >= 0);
    CHECK(F.norm() == doctest::Approx(0.003 * Fs.norm()));
  }
}

TEST_CASE("assembly is deterministic")
{
  const auto c = benchmark();
  SystemAssembler a(c, level_named(c, "coarse"));
  SystemAssembler b(c, level_named(c, "coarse"));
  const SpMat A = a.operator_at(437.0), B = b.operator_at(437.0);
  REQUIRE(A.nonZeros() == B.nonZeros());
  CHECK(std::equal(A.valuePtr(), A.valuePtr() + A.nonZeros(), B.valuePtr()));
  CHECK(std::equal(A.innerIndexPtr(), A.innerIndexPtr() + A.nonZeros(), B.innerIndexPtr()));
}

TEST_CASE("probe rows interpolate inside the cabin block")
{
  const auto c = benchmark();
  SystemAssembler a(c, level_named(c, "coarse"));
  const auto &P = a.probes().C_out;
  REQUIRE(P.rows() == 3);
  const auto &cab = a.block_map()[3];
  for (int i = 0; i < P.rows(); ++i)
  {
    Complex sum = 0.0;
    for (int j = 0; j < P.cols(); ++j)
    {
      const Complex v = P.coeff(i, j);
      if (v != Complex(0.0))
        CHECK((j >= cab.offset && j < cab.offset + cab.size));
      sum += v;
    }
    CHECK(std::abs(sum - Complex(1.0)) < 1e-12);
  }
  CHECK(a.cabin_dofs().size() == static_cast<std::size_t>(cab.size));
}

TEST_CASE("probe outside the cabin is rejected")
{
  auto c = benchmark();
  c.output.probes.push_back({3.0, 0.5});
  CHECK_THROWS_AS(SystemAssembler(c, level_named(c, "coarse")), GeometryError);
}
