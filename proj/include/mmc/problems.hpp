#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

#include "mmc/geometry.hpp"
#include "mmc/material.hpp"
#include "mmc/mesh.hpp"

namespace mmc {

struct PointLoad {
  int dof = 0;
  double value = 0;
};

struct PointSpring {
  int dof = 0;
  double stiffness = 0;
};

enum class ObjectiveKind { Compliance, OutputDisplacement };

struct ProblemDefinition {
  std::string name;
  Mesh mesh;

  std::vector<int> fixedDofs;        // sorted unique
  std::vector<PointLoad> loads;      // F entries
  std::vector<PointLoad> dummyLoads; // Fout entries (adjoint right-hand side)
  std::vector<PointSpring> springs;  // kin / kout point springs
  std::vector<int> loadingElements;  // elements containing load-carrying nodes
  std::vector<int> fixedElements;    // elements containing support nodes
  Eigen::MatrixXd nonDesignTdfs;     // nNod x nNd indicator columns (+1 / -1)

  double volumeBound = 0.5;
  ObjectiveKind objective = ObjectiveKind::Compliance;
  double youngsModulus = 1.0;
  double poisson = 0.3;
  double thickness = 1.0;  // 2D plane stress

  TdfHyperParams tdf;
  HeavisideParams heaviside;
  // objective scale, chosen so the scaled objective is O(0.1..1) and balances
  // the volume constraint inside MMA
  double scl = 100.0;
  int dgt0 = 5;

  std::vector<Component3D> init3d;
  std::vector<Component2D> init2d;

  bool is2d() const { return mesh.is2d(); }
  int varsPerComponent() const { return is2d() ? 6 : 9; }
  int componentCount() const {
    return is2d() ? static_cast<int>(init2d.size()) : static_cast<int>(init3d.size());
  }

  Eigen::VectorXd loadVector() const;
  Eigen::VectorXd dummyLoadVector() const;
  std::vector<char> freeDofMask() const;
};

// Regular lattice of initial components. Sites are ordered x-major, then z,
// then replica, then y; the sign cycles index the flattened component list.
struct LatticeSpec {
  std::vector<double> xs, ys, zs;
  int replicas = 1;
  double L1 = 1, L2 = 1, L3 = 1;
  double alpha = 0, beta = 0, gamma = 0;
  std::vector<int> alphaSigns{1}, betaSigns{1}, gammaSigns{1};
};

std::vector<Component3D> lattice_init(const LatticeSpec& spec);

struct LatticeSpec2D {
  std::vector<double> xs, ys;
  int replicas = 1;
  double L = 1, t1 = 0.1, t2 = 0.1, theta = 0;
  std::vector<int> thetaSigns{1};
};

std::vector<Component2D> lattice_init_2d(const LatticeSpec2D& spec);

// Matlab-style inclusive range start:step:stop.
std::vector<double> range_by(double start, double step, double stop);

std::vector<std::string> builtin_names();

// Builds one of the named benchmarks. meshScale divides the default element
// counts; a non-zero meshOverride replaces them entirely (geometry fixed).
ProblemDefinition builtin_problem(const std::string& name, int meshScale = 1,
                                  std::array<int, 3> meshOverride = {0, 0, 0});

}  // namespace mmc
