#pragma once

#include <Eigen/Dense>

#include "mmc/mesh.hpp"

namespace mmc {

struct HeavisideParams {
  double epsilon = 0.25;    // transition half-width
  double alphaVoid = 1e-3;  // void stiffness fraction
};

// Smoothed Heaviside: alpha below -epsilon, 1 above +epsilon, cubic in
// between. C1 at the band edges.
double heaviside(double x, const HeavisideParams& hp);

// Derivative of heaviside(): 3(1-alpha)/4 * (1/eps - x^2/eps^3) inside the
// band, zero outside.
double heaviside_deriv(double x, const HeavisideParams& hp);

Eigen::VectorXd heaviside(const Eigen::VectorXd& x, const HeavisideParams& hp);
Eigen::VectorXd heaviside_deriv(const Eigen::VectorXd& x, const HeavisideParams& hp);

// Ersatz density per element: arithmetic mean of its nodal H values.
Eigen::VectorXd element_density(const Eigen::VectorXd& nodalH, const Mesh& mesh);

// V = sum_m W_m H_m with the mesh's nodal quadrature weights.
double structural_volume(const Eigen::VectorXd& nodalH,
                         const Eigen::VectorXd& nodalWeights);

}  // namespace mmc
