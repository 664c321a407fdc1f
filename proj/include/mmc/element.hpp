#pragma once

#include <Eigen/Dense>

namespace mmc {

// Fully integrated (2x2x2 Gauss) isotropic-elasticity stiffness of a
// rectangular 8-node brick with edge lengths hx, hy, hz. Local node ordering
// matches Mesh::elemNodes. Exactly symmetric by construction.
Eigen::MatrixXd hex8_stiffness(double E, double nu, double hx, double hy, double hz);

// Plane-stress 4-node quadrilateral, 2x2 Gauss.
Eigen::MatrixXd quad4_stiffness(double E, double nu, double thickness, double hx,
                                double hy);

}  // namespace mmc
