#include "vibro/materials.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace vibro
{

namespace
{

void require_positive_frequency(double f)
{
  if (!(f > 0.0))
    throw std::domain_error(fmt::format("frequency must be positive, got {}", f));
}

}  // namespace

Complex jca_rigid_density(const JcaMaterial &m, double f)
{
  require_positive_frequency(f);
  const double w = angular(f);
  const auto &a = m.air;
  const double lam = m.viscous_length;
  const Complex g = std::sqrt(1.0 + 4.0i * m.alpha_inf * m.alpha_inf * a.viscosity * a.rho0 * w /
                                        (m.sigma * m.sigma * lam * lam * m.phi * m.phi));
  return m.alpha_inf * a.rho0 *
         (1.0 + m.sigma * m.phi / (1.0i * w * a.rho0 * m.alpha_inf) * g);
}

Complex jca_bulk_modulus(const JcaMaterial &m, double f)
{
  require_positive_frequency(f);
  const double w = angular(f);
  const auto &a = m.air;
  const double lt = m.thermal_length;
  const Complex g = std::sqrt(1.0 + 1.0i * a.rho0 * w * a.prandtl * lt * lt / (16.0 * a.viscosity));
  const Complex inner = 1.0 + 8.0 * a.viscosity / (1.0i * lt * lt * a.prandtl * w * a.rho0) * g;
  return a.gamma * a.p0 / (a.gamma - (a.gamma - 1.0) / inner);
}

JcaResponse jca_effective(const JcaMaterial &m, double f)
{
  JcaResponse r;
  r.rho_rigid = jca_rigid_density(m, f);
  r.rho_eq = r.rho_rigid / m.phi;
  r.K_eq = jca_bulk_modulus(m, f) / m.phi;
  const double rho0 = m.air.rho0;
  const double rho_t = m.rho_frame + m.phi * rho0;
  r.rho_eff = (rho_t * r.rho_eq - rho0 * rho0) / (rho_t + r.rho_eq - 2.0 * rho0);
  r.c_eff = std::sqrt(r.K_eq / r.rho_eff);
  return r;
}

double loss_factor(const LossFactorTable &table, double f)
{
  const auto &s = table.samples;
  if (s.empty())
    return 0.0;
  if (f <= s.front().f)
    return s.front().eta;
  if (f >= s.back().f)
    return s.back().eta;
  auto hi = std::upper_bound(s.begin(), s.end(), f,
                             [](double v, const LossSample &x) { return v < x.f; });
  auto lo = hi - 1;
  const double t = (f - lo->f) / (hi->f - lo->f);
  return lo->eta + t * (hi->eta - lo->eta);
}

Complex complex_stiffness_scale(const LossFactorTable &table, double f)
{
  return {1.0, loss_factor(table, f)};
}

Prestress prestress_from_pressurisation(double delta_p, double radius)
{
  if (delta_p < 0.0 || !(radius > 0.0))
    throw ConfigError("prestress needs delta_p >= 0 and radius > 0");
  return {delta_p * radius / 2.0, delta_p * radius};
}

double bending_wavelength(const ElasticMaterial &m, double f)
{
  require_positive_frequency(f);
  const double w = angular(f);
  const double t = m.thickness;
  const double D = m.E * t * t * t / (12.0 * (1.0 - m.nu * m.nu));
  const double kb = std::pow(w * w * m.rho * t / D, 0.25);
  return 2.0 * std::numbers::pi / kb;
}

double wavelength(const MaterialLaw &law, double f)
{
  require_positive_frequency(f);
  if (const auto *e = std::get_if<ElasticMaterial>(&law))
    return bending_wavelength(*e, f);
  if (const auto *a = std::get_if<AcousticMaterial>(&law))
    return a->c / f;
  return jca_effective(std::get<JcaMaterial>(law), f).c_eff.real() / f;
}

}  // namespace vibro
