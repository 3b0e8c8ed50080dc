#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "vibro/mor.hpp"
#include "vibro/sweep.hpp"

namespace vibro
{

// CSV dialect: comma separated, '.' decimal, header row, LF endings. Every numeric
// column except those in the timing files is deterministic for a given config.

std::string csv_number(double v);

// band, f_lo, f_hi, level, level name, DoFs per domain, total, worst supports per
// wavelength at f_hi; one row per band.
void write_schedule_csv(std::ostream &out, const ModelConfig &config,
                        const MeshSchedule &schedule);

// Shortest wavelength per domain at each frequency.
void write_wavelength_csv(std::ostream &out, const ModelConfig &config,
                          const std::vector<double> &frequencies);

// |y| in dB re 20 uPa.
double level_db(Complex y);

void write_frf_csv(std::ostream &out, const std::vector<FrequencyRecord> &records);
void write_stats_csv(std::ostream &out, const std::vector<FrequencyRecord> &records);
void write_timings_csv(std::ostream &out, const std::vector<FrequencyRecord> &records);

void write_rom_frf_csv(std::ostream &out, const RomSweep &sweep);
void write_rom_timings_csv(std::ostream &out, const RomSweep &sweep);
// One row per reduced model: band, window, r, n, expansion points, eps_max, argmax, flags.
void write_rom_summary_csv(std::ostream &out, const std::vector<ReducedModel> &roms);

// f, eps pairs with a label column (e.g. "candidate", "verification", "seam").
struct ErrorRow
{
  std::string set;
  double f = 0.0;
  double eps = 0.0;
  int window = 0;
};
void write_error_csv(std::ostream &out, const std::vector<ErrorRow> &rows);

struct ComparisonRow
{
  std::string method;
  double total_time = 0.0;         // s, summed over evaluated frequencies
  double time_per_frequency = 0.0;  // s
  double memory = 0.0;             // bytes, LU factor proxy
  double max_rel_error = 0.0;
  int frequencies = 0;
};
void write_comparison_csv(std::ostream &out, const std::vector<ComparisonRow> &rows);
std::vector<ComparisonRow> read_comparison_csv(std::istream &in);

std::uint64_t fnv1a(const std::string &bytes);
std::uint64_t config_hash(const ModelConfig &config);

struct RunManifest
{
  std::string command;
  std::uint64_t config_hash = 0;
  std::vector<std::string> schedule;  // "band b: level name"
  std::string solver;
  std::vector<std::pair<int, int>> band_dofs;  // (band, total DoFs)
  std::vector<std::string> files;
  double wall_time = 0.0;
};
void write_manifest(const std::filesystem::path &path, const RunManifest &manifest);

}  // namespace vibro
