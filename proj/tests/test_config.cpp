#include <doctest.h>

#include <random>

#include "support.hpp"
#include "vibro/config.hpp"

using namespace vibro;

namespace
{

std::string minimal(const std::string &domains, const std::string &extra = "")
{
  return R"({"domains": )" + domains + R"(,
  "materials": [{"id": "air", "type": "acoustic", "c": 343, "rho": 1.2}],
  "frequency": {"f_min": 10, "f_max": 100, "delta_f": 2})" +
         extra + "}";
}

}  // namespace

TEST_CASE("benchmark config loads with four domains and four fsi interfaces")
{
  const auto cfg = test::benchmark();
  REQUIRE(cfg.domains.size() == 4);
  CHECK(cfg.domains[0].kind == DomainKind::elastic);
  CHECK(cfg.domains[1].kind == DomainKind::equivalent_fluid);
  CHECK(cfg.domains[2].kind == DomainKind::elastic);
  CHECK(cfg.domains[3].kind == DomainKind::acoustic);
  REQUIRE(cfg.interfaces.size() == 4);
  const std::vector<std::pair<std::string, std::string>> expected = {
      {"om1", "om2"}, {"om2", "om3"}, {"om3", "om4"}, {"om1", "om4"}};
  for (std::size_t i = 0; i < 4; ++i)
  {
    CHECK(cfg.interfaces[i].left == expected[i].first);
    CHECK(cfg.interfaces[i].right == expected[i].second);
    CHECK(cfg.interfaces[i].coupling == CouplingKind::fsi);
  }
  REQUIRE(cfg.load.has_value());
  CHECK(cfg.load->target_domain == "om1");
  CHECK(cfg.load->boundary == Edge::west);
}

TEST_CASE("10 to 1000 Hz in 2 Hz steps gives 496 grid points")
{
  const auto cfg = test::benchmark();
  CHECK(grid_count(cfg.frequency) == 496);
  const auto grid = frequency_grid(cfg.frequency);
  REQUIRE(grid.size() == 496);
  CHECK(grid.front().f == 10.0);
  CHECK(grid.back().f == 1000.0);
}

TEST_CASE("single-step plan")
{
  FrequencyPlan p{10, 10, 2, {10, 10}};
  const auto grid = frequency_grid(p);
  REQUIRE(grid.size() == 1);
  CHECK(grid[0].f == 10.0);
}

TEST_CASE("band tagging is lower-exclusive except for the first band")
{
  const auto plan = test::benchmark().frequency;
  for (const auto &g : frequency_grid(plan))
  {
    const int expected = g.f <= 258 ? 0 : (g.f <= 578 ? 1 : 2);
    CHECK(g.band == expected);
  }
  CHECK(band_of(plan, 10) == 0);
  CHECK(band_of(plan, 258) == 0);
  CHECK(band_of(plan, 260) == 1);
  CHECK(band_of(plan, 578) == 1);
  CHECK(band_of(plan, 580) == 2);
  CHECK(band_of(plan, 1000) == 2);
  CHECK(band_count(plan) == 3);
}

TEST_CASE("band tagging is monotone and total")
{
  const auto plan = test::benchmark().frequency;
  int prev = 0;
  for (double f = 10; f <= 1000; f += 0.37)
  {
    const int b = band_of(plan, f);
    CHECK(b >= prev);
    CHECK(b < 3);
    prev = b;
  }
}

TEST_CASE("grid count formula over random integer plans")
{
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> lo(1, 500), step(1, 50), steps(0, 300), frac(0, 49);
  for (int trial = 0; trial < 500; ++trial)
  {
    // Work in units of 1/100 Hz so the expected count is exact integer arithmetic.
    const long a = lo(rng) * 100L;
    const long d = step(rng) * 10L;
    const long k = steps(rng);
    const long extra = frac(rng) * d / 50;  // strictly below one step
    const long b = a + k * d + extra;
    FrequencyPlan p{a / 100.0, b / 100.0, d / 100.0, {a / 100.0, b / 100.0}};
    CHECK(grid_count(p) == static_cast<std::size_t>((b - a) / d + 1));
    CHECK(frequency_grid(p).size() == grid_count(p));
  }
}

TEST_CASE("overlapping domains are rejected")
{
  const auto text = minimal(R"([
    {"id": "a", "kind": "acoustic", "rect": [0, 0, 1, 1], "material": "air"},
    {"id": "b", "kind": "acoustic", "rect": [0.5, 0, 1.5, 1], "material": "air"}])");
  CHECK_THROWS_WITH_AS(parse_config(text), doctest::Contains("domains overlap"), ConfigError);
}

TEST_CASE("unknown keys fail closed")
{
  const auto text = minimal(R"([{"id": "a", "kind": "acoustic", "rect": [0, 0, 1, 1],
    "material": "air", "colour": "red"}])");
  CHECK_THROWS_WITH_AS(parse_config(text), doctest::Contains("unknown key 'colour'"), ConfigError);
}

TEST_CASE("malformed text is a parse error")
{
  CHECK_THROWS_AS(parse_config("{\"domains\": ["), ConfigError);
}

TEST_CASE("interface rules")
{
  const std::string domains = R"([
    {"id": "s", "kind": "elastic", "rect": [0, 0, 0.01, 1], "material": "al"},
    {"id": "f", "kind": "acoustic", "rect": [0.01, 0, 1, 1], "material": "air"},
    {"id": "g", "kind": "acoustic", "rect": [2, 0, 3, 1], "material": "air"}])";
  auto with = [&](const std::string &ifaces) {
    return R"({"domains": )" + domains + R"(,
      "materials": [{"id": "air", "type": "acoustic", "c": 343, "rho": 1.2},
                    {"id": "al", "type": "elastic", "E": 7e10, "nu": 0.3, "rho": 2700,
                     "thickness": 0.002}],
      "frequency": {"f_min": 10, "f_max": 100, "delta_f": 2},
      "interfaces": )" +
           ifaces + "}";
  };
  CHECK_NOTHROW(parse_config(with(R"([{"left": "s", "right": "f", "coupling": "fsi"}])")));
  CHECK_THROWS_WITH_AS(parse_config(with(R"([{"left": "f", "right": "g", "coupling": "fsi"}])")),
                       doctest::Contains("one elastic and one pressure"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config(with(R"([{"left": "s", "right": "f", "coupling": "fixed"}])")),
      doctest::Contains("two elastic"), ConfigError);
  CHECK_THROWS_AS(parse_config(with(R"([{"left": "s", "right": "g", "coupling": "fsi"}])")),
                  ConfigError);
}

TEST_CASE("material and load invariants")
{
  auto elastic = [](const std::string &fields) {
    return R"({"domains": [{"id": "s", "kind": "elastic", "rect": [0, 0, 1, 1], "material": "m"}],
      "materials": [{"id": "m", "type": "elastic", )" +
           fields + R"(}],
      "frequency": {"f_min": 10, "f_max": 100, "delta_f": 2}})";
  };
  CHECK_NOTHROW(parse_config(elastic(R"("E": 1e9, "nu": 0.3, "rho": 1, "thickness": 1)")));
  CHECK_THROWS_AS(parse_config(elastic(R"("E": 1e9, "nu": 0.5, "rho": 1, "thickness": 1)")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(elastic(R"("E": -1, "nu": 0.3, "rho": 1, "thickness": 1)")),
                  ConfigError);

  auto cfg = test::benchmark();
  cfg.load->amplitude = 0.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = test::benchmark();
  cfg.load->wave_speed = -1.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("frequency plan invariants")
{
  auto cfg = test::benchmark();
  cfg.frequency.delta_f = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = test::benchmark();
  cfg.frequency.band_edges = {10, 600, 258, 1000};
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = test::benchmark();
  cfg.frequency.band_edges = {12, 1000};
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("serialise then parse reproduces the config")
{
  const auto cfg = test::benchmark();
  const auto again = parse_config(serialise_config(cfg));
  CHECK(again == cfg);
  CHECK(serialise_config(again) == serialise_config(cfg));
}

TEST_CASE("shared segment of touching rectangles")
{
  const auto s = shared_segment({0, 0, 1, 1}, {1, 0.5, 2, 2});
  REQUIRE(s.has_value());
  CHECK(s->vertical);
  CHECK(s->coord == 1.0);
  CHECK(s->s0 == 0.5);
  CHECK(s->s1 == 1.0);
  CHECK(s->side_a == Edge::east);
  CHECK(s->side_b == Edge::west);
  const auto corner = shared_segment({0, 0, 1, 1}, {1, 1, 2, 2});
  CHECK((!corner.has_value() || corner->length() == 0.0));
}
