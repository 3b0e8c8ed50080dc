#pragma once

#include "vibro/config.hpp"

namespace vibro
{

// Time convention is e^{+i omega t} throughout: dissipation shows up as a negative
// imaginary part of the density and of the compressibility 1/K (so Im K > 0).

Complex jca_rigid_density(const JcaMaterial &m, double f);
Complex jca_bulk_modulus(const JcaMaterial &m, double f);

struct JcaResponse
{
  Complex rho_rigid;  // rigid-frame dynamic density of the pore fluid, rho_tilde
  Complex rho_eq;     // rho_tilde / phi
  Complex K_eq;       // K_tilde / phi
  Complex rho_eff;    // limp-frame effective density
  Complex c_eff;      // sqrt(K_eq / rho_eff)
};

JcaResponse jca_effective(const JcaMaterial &m, double f);

// Piecewise-linear, clamped at both ends.
double loss_factor(const LossFactorTable &table, double f);
Complex complex_stiffness_scale(const LossFactorTable &table, double f);

Prestress prestress_from_pressurisation(double delta_p, double radius);

// Bending wavelength of a plate with the elastic material's thickness.
double bending_wavelength(const ElasticMaterial &m, double f);
// Smallest physical wavelength carried by a material at frequency f.
double wavelength(const MaterialLaw &law, double f);

}  // namespace vibro
