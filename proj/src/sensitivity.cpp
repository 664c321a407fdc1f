#include "mmc/sensitivity.hpp"

#include <cmath>
#include <stdexcept>

#include "mmc/fem.hpp"

namespace mmc {

Eigen::MatrixXd chain_weights(const Eigen::VectorXd& deltaH,
                              const Eigen::MatrixXd& ksWeights,
                              const Eigen::MatrixXd& tdfGradients, int varsPerComp) {
  const Eigen::Index nNod = deltaH.size();
  const Eigen::Index nComp = ksWeights.cols();
  if (tdfGradients.rows() != nNod || ksWeights.rows() != nNod ||
      tdfGradients.cols() != nComp * varsPerComp)
    throw std::invalid_argument("chain_weights: size mismatch");

  Eigen::MatrixXd out(nNod, tdfGradients.cols());
  for (Eigen::Index c = 0; c < nComp; ++c) {
    const Eigen::VectorXd w = deltaH.cwiseProduct(ksWeights.col(c));
    for (int j = 0; j < varsPerComp; ++j) {
      const Eigen::Index col = c * varsPerComp + j;
      out.col(col) = w.cwiseProduct(tdfGradients.col(col));
    }
  }
  return out;
}

Eigen::VectorXd compliance_gradient(const Eigen::VectorXd& engyNod,
                                    const Eigen::MatrixXd& chainWeights, double scl) {
  if (engyNod.size() != chainWeights.rows())
    throw std::invalid_argument("compliance_gradient: size mismatch");
  return -(chainWeights.transpose() * engyNod) / scl;
}

Eigen::VectorXd volume_gradient(const Eigen::VectorXd& nodalWeights,
                                const Eigen::MatrixXd& chainWeights,
                                double domainVolume) {
  if (nodalWeights.size() != chainWeights.rows())
    throw std::invalid_argument("volume_gradient: size mismatch");
  return (chainWeights.transpose() * nodalWeights) / domainVolume;
}

Eigen::VectorXd output_gradient(const Mesh& mesh, const Eigen::MatrixXi& edofMat,
                                const Eigen::MatrixXd& ke0, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& uAdj,
                                const Eigen::MatrixXd& chainWeights, double scl) {
  const Eigen::VectorXd cross = nodal_strain_energy(mesh, edofMat, ke0, u, uAdj);
  return compliance_gradient(cross, chainWeights, scl);
}

double round_significant(double value, int dgt0) {
  if (dgt0 < 1) throw std::invalid_argument("round_significant: dgt0 must be >= 1");
  if (value == 0.0 || !std::isfinite(value)) return value;
  const double mag = std::floor(std::log10(std::fabs(value)));
  const double scale = std::pow(10.0, dgt0 - 1 - mag);
  return std::round(value * scale) / scale;
}

void round_significant(Eigen::VectorXd& values, int dgt0) {
  for (Eigen::Index i = 0; i < values.size(); ++i)
    values(i) = round_significant(values(i), dgt0);
}

}  // namespace mmc
