#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vibro/common.hpp"

namespace vibro
{

enum class DomainKind
{
  elastic,
  equivalent_fluid,
  acoustic
};

enum class Edge
{
  south,
  east,
  north,
  west
};

enum class CouplingKind
{
  fsi,
  fixed
};

std::string to_string(DomainKind kind);
std::string to_string(Edge edge);
std::string to_string(CouplingKind kind);

// Axis-aligned rectangle in the cross-section plane, metres.
struct Rect
{
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool contains(Point p, double tol = 0.0) const
  {
    return p.x >= x0 - tol && p.x <= x1 + tol && p.y >= y0 - tol && p.y <= y1 + tol;
  }
  bool operator==(const Rect &) const = default;
};

struct DomainSpec
{
  std::string id;
  DomainKind kind = DomainKind::acoustic;
  Rect geometry;
  std::string material_id;
  std::optional<std::string> damping_table_id;
  bool operator==(const DomainSpec &) const = default;
};

// Membrane pre-tension, N/m.
struct Prestress
{
  double tx = 0.0;
  double ty = 0.0;
  bool operator==(const Prestress &) const = default;
};

struct ElasticMaterial
{
  double E = 0.0;
  double nu = 0.0;
  double rho = 0.0;
  double thickness = 0.0;
  Prestress prestress;
  bool operator==(const ElasticMaterial &) const = default;
};

struct AcousticMaterial
{
  double c = 0.0;
  double rho = 0.0;
  bool operator==(const AcousticMaterial &) const = default;
};

struct AirProperties
{
  double rho0 = 1.213;
  double c0 = 343.0;
  double viscosity = 1.839e-5;
  double prandtl = 0.71;
  double gamma = 1.4;
  double p0 = 101325.0;
  bool operator==(const AirProperties &) const = default;
};

struct JcaMaterial
{
  double phi = 0.0;
  double sigma = 0.0;
  double alpha_inf = 1.0;
  double viscous_length = 0.0;
  double thermal_length = 0.0;
  double rho_frame = 0.0;
  AirProperties air;
  bool operator==(const JcaMaterial &) const = default;
};

using MaterialLaw = std::variant<ElasticMaterial, AcousticMaterial, JcaMaterial>;

struct MaterialSpec
{
  std::string id;
  MaterialLaw law;
  bool operator==(const MaterialSpec &) const = default;
};

struct LossSample
{
  double f = 0.0;
  double eta = 0.0;
  bool operator==(const LossSample &) const = default;
};

// Piecewise-linear loss factor, clamped outside the sampled range.
struct LossFactorTable
{
  std::string id;
  std::vector<LossSample> samples;
  bool operator==(const LossFactorTable &) const = default;
};

struct InterfaceSpec
{
  std::string left;
  std::string right;
  CouplingKind coupling = CouplingKind::fsi;
  bool conforming = false;
  // Tie stiffness for fixed joints (N/m^3); derived from the stiffer side when absent.
  std::optional<double> penalty;
  bool operator==(const InterfaceSpec &) const = default;
};

struct LoadSpec
{
  std::string target_domain;
  Edge boundary = Edge::west;
  double amplitude = 0.0;
  double wave_speed = 0.0;
  int direction = 1;
  bool operator==(const LoadSpec &) const = default;
};

struct FrequencyPlan
{
  double f_min = 0.0;
  double f_max = 0.0;
  double delta_f = 0.0;
  std::vector<double> band_edges;
  bool operator==(const FrequencyPlan &) const = default;
};

struct ElementSize
{
  double hx = 0.0;
  double hy = 0.0;
  bool operator==(const ElementSize &) const = default;
};

// One candidate discretisation: an element size per domain.
struct MeshLevel
{
  std::string name;
  std::map<std::string, ElementSize> sizes;
  bool operator==(const MeshLevel &) const = default;
};

struct MeshSettings
{
  std::vector<MeshLevel> levels;
  double supports_per_wavelength = 10.0;
  bool operator==(const MeshSettings &) const = default;
};

enum class SolverMethod
{
  direct,
  bjacobi,
  gasm
};

enum class SchwarzVariant
{
  restricted,
  full
};

std::string to_string(SolverMethod m);
std::string to_string(SchwarzVariant v);
SolverMethod solver_method_from_string(const std::string &s);
SchwarzVariant schwarz_variant_from_string(const std::string &s);

struct SolverSettings
{
  SolverMethod method = SolverMethod::direct;
  // Named partitions of the domain ids into subdomain groups.
  std::map<std::string, std::vector<std::vector<std::string>>> groupings;
  std::string grouping;
  int overlap = 1;
  SchwarzVariant variant = SchwarzVariant::restricted;
  double atol = 1e-4;
  int max_it = 150;
  int restart = 1000;
  bool diagonal_scale = true;
  bool warm_start = true;
  bool operator==(const SolverSettings &) const = default;
};

struct Window
{
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Window &) const = default;
};

struct MorSettings
{
  double tol = 1e-2;
  int max_points = 20;
  int moments_per_point = 4;
  int candidate_stride = 4;
  bool second_order = false;
  // One entry per frequency band; an empty list means automatic windowing.
  std::vector<std::vector<Window>> windows;
  bool operator==(const MorSettings &) const = default;
};

struct OutputSettings
{
  std::string cabin_domain;
  std::vector<Point> probes;
  bool operator==(const OutputSettings &) const = default;
};

struct ModelConfig
{
  std::vector<DomainSpec> domains;
  std::vector<MaterialSpec> materials;
  std::vector<LossFactorTable> damping_tables;
  std::vector<InterfaceSpec> interfaces;
  std::optional<LoadSpec> load;
  FrequencyPlan frequency;
  MeshSettings mesh;
  SolverSettings solver;
  MorSettings mor;
  OutputSettings output;

  bool operator==(const ModelConfig &) const = default;

  const DomainSpec &domain(const std::string &id) const;
  std::size_t domain_index(const std::string &id) const;
  const MaterialSpec &material(const std::string &id) const;
  const LossFactorTable *damping_table(const DomainSpec &d) const;
};

// Parse + validate. Throws ConfigError with the first violated rule.
ModelConfig parse_config(const std::string &text);
ModelConfig load_config(const std::filesystem::path &path);
std::string serialise_config(const ModelConfig &config);
void validate(const ModelConfig &config);

// Segment shared by two touching rectangles; length zero when they only meet at a corner.
struct SharedSegment
{
  bool vertical = false;  // line x = coord when true, y = coord otherwise
  double coord = 0.0;
  double s0 = 0.0, s1 = 0.0;
  Edge side_a = Edge::east;  // edge of the first rectangle on the line
  Edge side_b = Edge::west;
  double length() const { return s1 - s0; }
};

std::optional<SharedSegment> shared_segment(const Rect &a, const Rect &b, double tol = 1e-12);

struct GridPoint
{
  double f = 0.0;
  int band = 0;
};

std::size_t grid_count(const FrequencyPlan &plan);
std::vector<GridPoint> frequency_grid(const FrequencyPlan &plan);
int band_of(const FrequencyPlan &plan, double f);
std::size_t band_count(const FrequencyPlan &plan);

}  // namespace vibro
