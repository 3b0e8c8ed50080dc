#include "vibro/rom_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/core.h>

namespace vibro
{

namespace
{

constexpr std::array<char, 8> magic = {'V', 'I', 'B', 'R', 'O', 'R', 'O', 'M'};

// Guard against absurd sizes from a corrupt file before allocating.
constexpr std::uint64_t max_count = 1ull << 32;

class Writer
{
public:
  explicit Writer(std::ostream &out) : out_(out) {}

  template <class T>
  void pod(const T &v)
  {
    out_.write(reinterpret_cast<const char *>(&v), sizeof(T));
  }
  void u64(std::uint64_t v) { pod(v); }
  void f64(double v) { pod(v); }
  void doubles(const std::vector<double> &v)
  {
    u64(v.size());
    out_.write(reinterpret_cast<const char *>(v.data()),
               static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  void complexes(const Complex *p, std::size_t n)
  {
    out_.write(reinterpret_cast<const char *>(p),
               static_cast<std::streamsize>(n * sizeof(Complex)));
  }
  void mat(const Mat &m)
  {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    complexes(m.data(), static_cast<std::size_t>(m.size()));
  }
  void vec(const Vec &v)
  {
    u64(static_cast<std::uint64_t>(v.size()));
    complexes(v.data(), static_cast<std::size_t>(v.size()));
  }

private:
  std::ostream &out_;
};

class Reader
{
public:
  explicit Reader(std::istream &in) : in_(in) {}

  template <class T>
  T pod()
  {
    T v{};
    in_.read(reinterpret_cast<char *>(&v), sizeof(T));
    check();
    return v;
  }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  std::uint64_t count()
  {
    const auto n = u64();
    if (n > max_count)
      throw Error("rom file: implausible size field");
    return n;
  }
  double f64() { return pod<double>(); }
  std::vector<double> doubles()
  {
    std::vector<double> v(count());
    in_.read(reinterpret_cast<char *>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
    check();
    return v;
  }
  void complexes(Complex *p, std::size_t n)
  {
    in_.read(reinterpret_cast<char *>(p), static_cast<std::streamsize>(n * sizeof(Complex)));
    check();
  }
  Mat mat()
  {
    const auto r = count(), c = count();
    if (r * c > max_count)
      throw Error("rom file: implausible matrix size");
    Mat m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    complexes(m.data(), static_cast<std::size_t>(m.size()));
    return m;
  }
  Vec vec()
  {
    Vec v(static_cast<Eigen::Index>(count()));
    complexes(v.data(), static_cast<std::size_t>(v.size()));
    return v;
  }

private:
  void check()
  {
    if (!in_)
      throw Error("rom file: truncated");
  }
  std::istream &in_;
};

}  // namespace

void write_rom(std::ostream &out, const ReducedModel &rom, bool include_basis)
{
  Writer w(out);
  out.write(magic.data(), magic.size());
  w.pod(rom_format_version);
  w.pod<std::int32_t>(rom.band);
  w.pod<std::int32_t>(rom.level);
  w.f64(rom.window.lo);
  w.f64(rom.window.hi);
  w.pod<std::int64_t>(rom.full_dim);
  w.doubles(rom.expansion_points);
  w.doubles(std::vector<double>(rom.scale.data(), rom.scale.data() + rom.scale.size()));

  w.u64(rom.terms.size());
  for (std::size_t t = 0; t < rom.terms.size(); ++t)
  {
    w.pod<std::int32_t>(static_cast<std::int32_t>(rom.kinds[t]));
    w.mat(rom.terms[t]);
  }
  w.mat(rom.C_R);
  w.mat(rom.cabin_R);

  w.doubles(rom.sample_f);
  for (std::size_t i = 0; i < rom.sample_f.size(); ++i)
  {
    w.u64(rom.sample_coef[i].size());
    w.complexes(rom.sample_coef[i].data(), rom.sample_coef[i].size());
    w.vec(rom.sample_load[i]);
  }

  w.u64(rom.error_log.size());
  for (const auto &[f, e] : rom.error_log)
  {
    w.f64(f);
    w.f64(e);
  }
  w.doubles(rom.eps_history);
  w.f64(rom.eps_max);
  w.f64(rom.eps_argmax);
  w.pod<std::uint8_t>(rom.converged ? 1 : 0);
  w.pod<std::uint8_t>(rom.stalled ? 1 : 0);

  const bool basis = include_basis && rom.V.cols() > 0;
  w.pod<std::uint8_t>(basis ? 1 : 0);
  if (basis)
    w.mat(rom.V);
  if (!out)
    throw Error("rom file: write failed");
}

ReducedModel read_rom(std::istream &in)
{
  std::array<char, 8> head{};
  in.read(head.data(), head.size());
  if (!in || head != magic)
    throw Error("rom file: bad magic");
  Reader r(in);
  const auto version = r.pod<std::uint32_t>();
  if (version != rom_format_version)
    throw Error(fmt::format("rom file: unsupported version {}", version));

  ReducedModel rom;
  rom.band = r.pod<std::int32_t>();
  rom.level = r.pod<std::int32_t>();
  rom.window.lo = r.f64();
  rom.window.hi = r.f64();
  rom.full_dim = static_cast<int>(r.pod<std::int64_t>());
  rom.expansion_points = r.doubles();
  {
    const auto s = r.doubles();
    rom.scale = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
  }

  const auto nt = r.count();
  for (std::uint64_t t = 0; t < nt; ++t)
  {
    const auto k = r.pod<std::int32_t>();
    if (k < 0 || k > 2)
      throw Error("rom file: bad term kind");
    rom.kinds.push_back(static_cast<TermKind>(k));
    rom.terms.push_back(r.mat());
    if (rom.terms.back().rows() != rom.terms.front().rows() ||
        rom.terms.back().cols() != rom.terms.front().rows())
      throw Error("rom file: inconsistent term size");
  }
  rom.C_R = r.mat();
  rom.cabin_R = r.mat();

  rom.sample_f = r.doubles();
  for (std::size_t i = 0; i < rom.sample_f.size(); ++i)
  {
    std::vector<Complex> c(r.count());
    r.complexes(c.data(), c.size());
    if (c.size() != nt)
      throw Error("rom file: coefficient count does not match the terms");
    rom.sample_coef.push_back(std::move(c));
    rom.sample_load.push_back(r.vec());
    if (rom.sample_load.back().size() != rom.r())
      throw Error("rom file: reduced load has the wrong size");
  }

  const auto ne = r.count();
  for (std::uint64_t i = 0; i < ne; ++i)
  {
    const double f = r.f64();
    rom.error_log.emplace_back(f, r.f64());
  }
  rom.eps_history = r.doubles();
  rom.eps_max = r.f64();
  rom.eps_argmax = r.f64();
  rom.converged = r.pod<std::uint8_t>() != 0;
  rom.stalled = r.pod<std::uint8_t>() != 0;
  if (r.pod<std::uint8_t>() != 0)
    rom.V = r.mat();
  return rom;
}

void save_rom(const std::filesystem::path &path, const ReducedModel &rom, bool include_basis)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(fmt::format("cannot write {}", path.string()));
  write_rom(out, rom, include_basis);
}

ReducedModel load_rom(const std::filesystem::path &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(fmt::format("cannot read {}", path.string()));
  return read_rom(in);
}

}  // namespace vibro
