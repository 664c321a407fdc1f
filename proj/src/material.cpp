#include "mmc/material.hpp"

#include <stdexcept>

namespace mmc {

double heaviside(double x, const HeavisideParams& hp) {
  const double e = hp.epsilon, a = hp.alphaVoid;
  if (x > e) return 1.0;
  if (x < -e) return a;
  return 0.75 * (1.0 - a) * (x / e - x * x * x / (3.0 * e * e * e)) + 0.5 * (1.0 + a);
}

double heaviside_deriv(double x, const HeavisideParams& hp) {
  const double e = hp.epsilon, a = hp.alphaVoid;
  if (x > e || x < -e) return 0.0;
  return 0.75 * (1.0 - a) * (1.0 / e - x * x / (e * e * e));
}

Eigen::VectorXd heaviside(const Eigen::VectorXd& x, const HeavisideParams& hp) {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = heaviside(x(i), hp);
  return out;
}

Eigen::VectorXd heaviside_deriv(const Eigen::VectorXd& x, const HeavisideParams& hp) {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = heaviside_deriv(x(i), hp);
  return out;
}

Eigen::VectorXd element_density(const Eigen::VectorXd& nodalH, const Mesh& mesh) {
  if (nodalH.size() != mesh.nNod)
    throw std::invalid_argument("element_density: nodal field size mismatch");
  const int npe = mesh.nodesPerElem;
  Eigen::VectorXd rho(mesh.nEle);
  for (int e = 0; e < mesh.nEle; ++e) {
    double s = 0.0;
    for (int a = 0; a < npe; ++a) s += nodalH(mesh.elemNodes(e, a));
    rho(e) = s / npe;
  }
  return rho;
}

double structural_volume(const Eigen::VectorXd& nodalH,
                         const Eigen::VectorXd& nodalWeights) {
  if (nodalH.size() != nodalWeights.size())
    throw std::invalid_argument("structural_volume: size mismatch");
  return nodalWeights.dot(nodalH);
}

}  // namespace mmc
