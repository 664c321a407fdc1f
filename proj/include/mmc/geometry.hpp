#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace mmc {

// Cuboid component described by its center, half-sizes and rotation angles
// (radians). The nine fields, in this order, are the design variables of the
// component.
struct Component3D {
  double x0 = 0, y0 = 0, z0 = 0;
  double L1 = 1, L2 = 1, L3 = 1;
  double alpha = 0, beta = 0, gamma = 0;
};

// Trapezoidal 2D component: center, half-length, half-widths at the two ends
// and rotation angle. Six design variables in field order.
struct Component2D {
  double x0 = 0, y0 = 0;
  double L = 1, t1 = 0.1, t2 = 0.1;
  double theta = 0;
};

struct TdfHyperParams {
  int p = 6;                // even exponent of the superellipsoid metric
  double lambda = 100.0;    // log-sum-exp aggregation weight
  double expFloor = 1e-12;  // lower clamp on the shifted exponential sum
};

using Points3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;

// Rotation taking global offsets to component-local coordinates,
// (x',y',z')^T = R (x-x0, y-y0, z-z0)^T.
Eigen::Matrix3d rotation_matrix_3d(double alpha, double beta, double gamma);

// Partial derivatives of rotation_matrix_3d with respect to alpha, beta,
// gamma, in that order.
std::array<Eigen::Matrix3d, 3> rotation_matrix_derivs_3d(double alpha, double beta,
                                                         double gamma);

// Topology description function of one component at the given points:
// 1 at the center, 0 on the boundary surface, negative outside. Values are
// clamped below at -1e30 so downstream arithmetic stays finite.
Eigen::VectorXd tdf_eval_3d(const Component3D& c, const Points3& pts, int p);

// nPts x 9 partials ordered (x0, y0, z0, L1, L2, L3, alpha, beta, gamma).
// Rows where the metric w is zero (exact center) or non-finite are zero.
Eigen::MatrixXd tdf_grad_3d(const Component3D& c, const Points3& pts, int p);

Eigen::VectorXd tdf_eval_2d(const Component2D& c, const Points2& pts, int p);

// nPts x 6 partials ordered (x0, y0, L, t1, t2, theta).
Eigen::MatrixXd tdf_grad_2d(const Component2D& c, const Points2& pts, int p);

struct KsAggregate {
  Eigen::VectorXd phiMax;   // nodal log-sum-exp of the input columns
  Eigen::MatrixXd weights;  // row-stochastic softmax weights per column
};

// Smooth maximum of the per-component TDF columns, evaluated in shifted form
// so that max_i phi_i <= phiMax <= max_i phi_i + ln(m)/lambda holds exactly.
KsAggregate ks_aggregate(const Eigen::MatrixXd& tdfColumns, double lambda,
                         double expFloor = 1e-12);

struct PruneResult {
  std::vector<char> active;       // per input component
  bool keptLastFallback = false;  // all components were prunable
};

// Deactivates components that are tiny relative to the smallest element edge
// (min half-dimension / minSz <= 0.1) or whose TDF never enters the Heaviside
// transition band (|phi| >= epsilon at every node). If every component would
// be removed, the last one is kept and the fallback flag is set.
PruneResult prune_components(const std::vector<double>& minHalfDims,
                             const Eigen::MatrixXd& tdfColumns, double minSz,
                             double epsilon);

}  // namespace mmc
