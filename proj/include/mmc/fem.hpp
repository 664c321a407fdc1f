#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <string>
#include <vector>

#include "mmc/mesh.hpp"

namespace mmc {

// Global stiffness assembly on a fixed sparsity pattern. The pattern spans
// all DOFs; constrained solves restrict to a DOF subset afterwards. Values
// are accumulated in element-index order, so assembly is deterministic and
// the matrix is bitwise symmetric.
class Assembler {
 public:
  explicit Assembler(const Mesh& mesh);

  const Eigen::MatrixXi& edofMat() const { return edofMat_; }

  // K = sum_e density_e * E * keUnit scattered to global DOFs.
  void assemble(const Eigen::VectorXd& elemDensity, double E,
                const Eigen::MatrixXd& keUnit);

  // Adds value to K(dof, dof); used for point springs.
  void add_to_diagonal(int dof, double value);

  const Eigen::SparseMatrix<double>& matrix() const { return K_; }

  // K restricted to the given sorted DOF subset.
  Eigen::SparseMatrix<double> restrict_to(const std::vector<int>& dofs) const;

 private:
  const Mesh* mesh_;
  Eigen::MatrixXi edofMat_;               // nEle x (dofPerNode*nodesPerElem)
  Eigen::SparseMatrix<double> K_;         // compressed, pattern fixed
  std::vector<std::int64_t> scatter_;     // element entry -> value slot
  std::vector<std::int64_t> diagSlot_;    // dof -> value slot of (dof, dof)
};

enum class SolverKind { Auto, Cg, Direct };

struct SolveOptions {
  SolverKind kind = SolverKind::Auto;
  double tol = 1e-8;          // CG relative residual
  int maxIterPerDof = 10;     // CG iteration cap = maxIterPerDof * n
  double diagShiftRel = 1e-8; // diagonal regularizer, relative to max diagonal
};

struct SolveReport {
  double relResidual = 0;
  int iterations = 0;
  double diagShift = 0;
  bool usedDirect = false;
};

// Solves (K + shift*I) u = f for an SPD K; throws on failure with the
// residual in the message. The Auto policy picks the direct factorization
// for 2D-scale systems and Jacobi-preconditioned CG otherwise.
Eigen::VectorXd solve_spd(const Eigen::SparseMatrix<double>& K,
                          const Eigen::VectorXd& f, const SolveOptions& opts,
                          SolveReport* report = nullptr);

// Same, one column per right-hand side (the direct path factorizes once).
Eigen::MatrixXd solve_spd_multi(const Eigen::SparseMatrix<double>& K,
                                const Eigen::MatrixXd& F, const SolveOptions& opts,
                                SolveReport* report = nullptr);

inline double compliance(const Eigen::VectorXd& F, const Eigen::VectorXd& U) {
  return F.dot(U);
}

// Scatters the per-element energies u_e^T ke0 v_e to nodes in equal shares.
// Pass v = u for strain energy; pass the adjoint field for the
// output-displacement cross energy.
Eigen::VectorXd nodal_strain_energy(const Mesh& mesh, const Eigen::MatrixXi& edofMat,
                                    const Eigen::MatrixXd& ke0,
                                    const Eigen::VectorXd& u,
                                    const Eigen::VectorXd& v);

// Coordinate-format export for debugging.
void write_matrix_market(const Eigen::SparseMatrix<double>& K,
                         const std::string& path);

}  // namespace mmc
