#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "vibro/affine.hpp"
#include "vibro/config.hpp"

namespace vibro::test
{

std::filesystem::path source_dir();
std::filesystem::path benchmark_path();
std::filesystem::path test_data(const std::string &name);

ModelConfig benchmark();

// Rows of a small CSV file, header included.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path &path);
// Value column of quadrature_oracle.csv by name.
double quadrature_oracle(const std::string &name);

// Rigid-walled rectangular air cavity meshed with square elements of size h.
std::string cavity_config(double lx, double ly, double h, double c = 343.0,
                          double rho = 1.213);
// Analytic eigenfrequencies c/2 sqrt((m/lx)^2 + (n/ly)^2), (0,0) excluded, ascending.
std::vector<double> cavity_modes(double lx, double ly, double c, std::size_t count);
// Eigenfrequency of K x = w^2 M x nearest to f_guess, by shift-invert subspace iteration.
double nearest_eigenfrequency(const SpMat &K, const SpMat &M, double f_guess, int block = 6,
                              int sweeps = 8);

// Mass-spring chain with hysteretic damping: n masses, springs k_i, fixed at the left.
// Load at the last mass, outputs at the given DoFs. Terms: stiffness (1 + i eta), mass.
AffineModel oscillator_chain(int n, double k, double m, double eta,
                             const std::vector<int> &outputs, std::mt19937 &rng,
                             double spread = 0.2);

Vec random_vector(int n, std::mt19937 &rng);
SpMat random_sparse(int n, double density, std::mt19937 &rng, double diagonal_shift);

// Dense solve of A(f) x = b(f) and y = C x; the oracle for reduced models.
Vec dense_output(const AffineModel &fom, double f);

}  // namespace vibro::test
