#include "mmc/element.hpp"

#include <cmath>
#include <stdexcept>

namespace mmc {

namespace {

void check_material(double E, double nu) {
  if (!(E > 0) || !(nu > -1.0) || !(nu < 0.5))
    throw std::invalid_argument("element stiffness: need E > 0 and -1 < nu < 0.5");
}

// local corner signs, counterclockwise bottom face then top face
constexpr int kXi[8] = {-1, 1, 1, -1, -1, 1, 1, -1};
constexpr int kEta[8] = {-1, -1, 1, 1, -1, -1, 1, 1};
constexpr int kZeta[8] = {-1, -1, -1, -1, 1, 1, 1, 1};

}  // namespace

Eigen::MatrixXd hex8_stiffness(double E, double nu, double hx, double hy, double hz) {
  check_material(E, nu);
  if (hx <= 0 || hy <= 0 || hz <= 0)
    throw std::invalid_argument("hex8_stiffness: edge lengths must be positive");

  Eigen::Matrix<double, 6, 6> D = Eigen::Matrix<double, 6, 6>::Zero();
  const double f = E / ((1.0 + nu) * (1.0 - 2.0 * nu));
  D(0, 0) = D(1, 1) = D(2, 2) = f * (1.0 - nu);
  D(0, 1) = D(0, 2) = D(1, 0) = D(1, 2) = D(2, 0) = D(2, 1) = f * nu;
  D(3, 3) = D(4, 4) = D(5, 5) = f * (1.0 - 2.0 * nu) / 2.0;

  const double g = 1.0 / std::sqrt(3.0);
  const double detJ = hx * hy * hz / 8.0;
  Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(24, 24);
  for (int gx = 0; gx < 2; ++gx)
    for (int gy = 0; gy < 2; ++gy)
      for (int gz = 0; gz < 2; ++gz) {
        const double xi = (gx ? g : -g), eta = (gy ? g : -g), zeta = (gz ? g : -g);
        Eigen::Matrix<double, 6, 24> B = Eigen::Matrix<double, 6, 24>::Zero();
        for (int a = 0; a < 8; ++a) {
          const double dNdx =
              0.125 * kXi[a] * (1 + kEta[a] * eta) * (1 + kZeta[a] * zeta) * 2.0 / hx;
          const double dNdy =
              0.125 * kEta[a] * (1 + kXi[a] * xi) * (1 + kZeta[a] * zeta) * 2.0 / hy;
          const double dNdz =
              0.125 * kZeta[a] * (1 + kXi[a] * xi) * (1 + kEta[a] * eta) * 2.0 / hz;
          B(0, 3 * a) = dNdx;
          B(1, 3 * a + 1) = dNdy;
          B(2, 3 * a + 2) = dNdz;
          B(3, 3 * a) = dNdy; B(3, 3 * a + 1) = dNdx;
          B(4, 3 * a + 1) = dNdz; B(4, 3 * a + 2) = dNdy;
          B(5, 3 * a) = dNdz; B(5, 3 * a + 2) = dNdx;
        }
        Ke.noalias() += detJ * B.transpose() * D * B;
      }
  Ke = 0.5 * (Ke + Ke.transpose()).eval();
  return Ke;
}

Eigen::MatrixXd quad4_stiffness(double E, double nu, double thickness, double hx,
                                double hy) {
  check_material(E, nu);
  if (hx <= 0 || hy <= 0 || thickness <= 0)
    throw std::invalid_argument("quad4_stiffness: geometry must be positive");

  Eigen::Matrix3d D;
  D << 1, nu, 0, nu, 1, 0, 0, 0, (1.0 - nu) / 2.0;
  D *= E / (1.0 - nu * nu);

  const double g = 1.0 / std::sqrt(3.0);
  const double detJ = hx * hy / 4.0;
  Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(8, 8);
  for (int gx = 0; gx < 2; ++gx)
    for (int gy = 0; gy < 2; ++gy) {
      const double xi = (gx ? g : -g), eta = (gy ? g : -g);
      Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
      for (int a = 0; a < 4; ++a) {
        const double dNdx = 0.25 * kXi[a] * (1 + kEta[a] * eta) * 2.0 / hx;
        const double dNdy = 0.25 * kEta[a] * (1 + kXi[a] * xi) * 2.0 / hy;
        B(0, 2 * a) = dNdx;
        B(1, 2 * a + 1) = dNdy;
        B(2, 2 * a) = dNdy; B(2, 2 * a + 1) = dNdx;
      }
      Ke.noalias() += thickness * detJ * B.transpose() * D * B;
    }
  Ke = 0.5 * (Ke + Ke.transpose()).eval();
  return Ke;
}

}  // namespace mmc
