#pragma once

#include <Eigen/Dense>

#include "mmc/mesh.hpp"

namespace mmc {

// Per-node, per-variable chain factor H'(phi_s) * ksWeight_i * dphi_i/dd_j.
// ksWeights must hold one column per active component, in the same order as
// the gradient blocks of tdfGradients (varsPerComp columns each).
Eigen::MatrixXd chain_weights(const Eigen::VectorXd& deltaH,
                              const Eigen::MatrixXd& ksWeights,
                              const Eigen::MatrixXd& tdfGradients, int varsPerComp);

// df0dx = -sum_m engyNod_m chainW[m,:] / scl
Eigen::VectorXd compliance_gradient(const Eigen::VectorXd& engyNod,
                                    const Eigen::MatrixXd& chainWeights, double scl);

// dfdx = sum_m (W_m / |D|) chainW[m,:]
Eigen::VectorXd volume_gradient(const Eigen::VectorXd& nodalWeights,
                                const Eigen::MatrixXd& chainWeights,
                                double domainVolume);

// Output-displacement gradient for compliant mechanisms: identical form with
// the cross energy u_e^T ke0 u_e^adj in place of the strain energy.
Eigen::VectorXd output_gradient(const Mesh& mesh, const Eigen::MatrixXi& edofMat,
                                const Eigen::MatrixXd& ke0, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& uAdj,
                                const Eigen::MatrixXd& chainWeights, double scl);

// Rounds to dgt0 significant decimal digits; zero and non-finite values pass
// through unchanged.
double round_significant(double value, int dgt0);
void round_significant(Eigen::VectorXd& values, int dgt0);

}  // namespace mmc
