#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "vibro/affine.hpp"
#include "vibro/mesh.hpp"
#include "vibro/mortar.hpp"

namespace vibro
{

struct BlockRange
{
  int offset = 0;
  int size = 0;
};

// Frequency-evaluated block form of the coupled system.
// Structure rows carry -t C in K, fluid rows carry rho_q C^T in M. Every fluid row is
// scaled by its density so that the fluid blocks read int grad N grad N and int N N / c^2;
// every structure row describes a slice of depth t (the plane-stress thickness), so
// interface and load forces carry t as well.
struct BlockSystem
{
  double f = 0.0;
  std::vector<std::string> domains;
  std::vector<BlockRange> block_map;
  std::map<std::pair<int, int>, SpMat> K_blocks;
  std::map<std::pair<int, int>, SpMat> M_blocks;
  struct Coupling
  {
    int structure = 0;
    int fluid = 0;
    RealSpMat C;       // structure DoFs x fluid nodes, no density, no depth
    Complex rho;       // density of the fluid side at f
    double depth = 1;  // plane-stress thickness of the structure
  };
  std::vector<Coupling> couplings;
  Vec f_ext;

  int size() const;
  SpMat global_K() const;
  SpMat global_M() const;
};

struct ProbeMap
{
  std::vector<Point> points;
  // Rows: probes, columns: global DoFs.
  SpMat C_out;
};

class SystemAssembler
{
public:
  SystemAssembler(const ModelConfig &config, const MeshLevel &level, int n_gp = 3);
  SystemAssembler(const SystemAssembler &) = delete;
  SystemAssembler &operator=(const SystemAssembler &) = delete;

  const ModelConfig &config() const { return config_; }
  const MeshLevel &level() const { return level_; }
  int size() const { return n_; }
  const std::vector<Mesh> &meshes() const { return meshes_; }
  const std::vector<BlockRange> &block_map() const { return blocks_; }
  const std::vector<MortarInterface> &interfaces() const { return interfaces_; }
  // Global DoFs of every domain listed, sorted.
  std::vector<int> dofs_of(const std::vector<std::string> &domain_ids) const;

  // Operator terms; A(f) = K(f) - omega^2 M(f) in the model's fixed pattern.
  const AffineModel &model() const { return model_; }
  std::pair<SpMat, SpMat> matrices(double f) const;
  SpMat operator_at(double f) const { return model_.operator_at(f); }
  Vec load(double f) const;
  BlockSystem blocks_at(double f) const;

  const ProbeMap &probes() const { return probes_; }
  // Global DoFs of the cabin (pressure) nodes.
  const std::vector<int> &cabin_dofs() const { return cabin_dofs_; }

private:
  void add_term(int rb, int cb, TermKind kind, RealSpMat local, std::function<Complex(double)> coef);
  void build_outputs();

  ModelConfig config_;
  MeshLevel level_;
  std::vector<Mesh> meshes_;
  std::vector<BlockRange> blocks_;
  std::vector<MortarInterface> interfaces_;
  std::vector<AffineTerm> terms_;
  std::vector<std::pair<int, int>> term_blocks_;
  struct FsiPair
  {
    int structure, fluid;
    std::size_t coupling_term;
    double depth;
    std::function<Complex(double)> rho;
  };
  std::vector<FsiPair> fsi_;
  AffineModel model_;
  int n_ = 0;

  ProbeMap probes_;
  std::vector<int> cabin_dofs_;
};

// p(s) of the travelling plane wave along the loaded edge; s is measured from the
// lower end of the edge.
Complex plane_wave_pressure(const LoadSpec &load, double f, double s);

// Consistent nodal forces per unit depth of the plane wave on one edge of an elastic mesh.
Vec plane_wave_load(const LoadSpec &load, double f, const Mesh &mesh);

// Fluid density used to scale a pressure domain's rows.
Complex fluid_density(const MaterialLaw &law, double f);

void write_matrix_market(const std::filesystem::path &path, const SpMat &A);
void write_matrix_market(const std::filesystem::path &path, const Vec &v);

}  // namespace vibro
