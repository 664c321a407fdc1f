#include "mmc/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace mmc {

namespace {

constexpr double kPhiFloor = -1e30;

// x^n for small non-negative integer n
inline double ipow(double x, int n) {
  double r = 1.0, b = x;
  for (int e = n; e > 0; e >>= 1) {
    if (e & 1) r *= b;
    b *= b;
  }
  return r;
}

}  // namespace

Eigen::Matrix3d rotation_matrix_3d(double alpha, double beta, double gamma) {
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cb = std::cos(beta), sb = std::sin(beta);
  const double cg = std::cos(gamma), sg = std::sin(gamma);
  Eigen::Matrix3d R;
  R << cb * cg, cb * sg, -sb,                            //
      sa * sb * cg - ca * sg, sa * sb * sg + ca * cg, sa * cb,  //
      ca * sb * cg + sa * sg, ca * sb * sg - sa * cg, ca * cb;
  return R;
}

std::array<Eigen::Matrix3d, 3> rotation_matrix_derivs_3d(double alpha, double beta,
                                                         double gamma) {
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cb = std::cos(beta), sb = std::sin(beta);
  const double cg = std::cos(gamma), sg = std::sin(gamma);

  Eigen::Matrix3d Ra, Rb, Rg;
  Ra << 0, 0, 0,                                          //
      ca * sb * cg + sa * sg, ca * sb * sg - sa * cg, ca * cb,   //
      -sa * sb * cg + ca * sg, -sa * sb * sg - ca * cg, -sa * cb;
  Rb << -sb * cg, -sb * sg, -cb,                          //
      sa * cb * cg, sa * cb * sg, -sa * sb,               //
      ca * cb * cg, ca * cb * sg, -ca * sb;
  Rg << -cb * sg, cb * cg, 0,                             //
      -sa * sb * sg - ca * cg, sa * sb * cg - ca * sg, 0,  //
      -ca * sb * sg + sa * cg, ca * sb * cg + sa * sg, 0;
  return {Ra, Rb, Rg};
}

Eigen::VectorXd tdf_eval_3d(const Component3D& c, const Points3& pts, int p) {
  const Eigen::Matrix3d R = rotation_matrix_3d(c.alpha, c.beta, c.gamma);
  const Eigen::Index n = pts.rows();
  const double invP = 1.0 / static_cast<double>(p);
  Eigen::VectorXd phi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d d(pts(i, 0) - c.x0, pts(i, 1) - c.y0, pts(i, 2) - c.z0);
    const Eigen::Vector3d loc = R * d;
    const double w = ipow(loc.x() / c.L1, p) + ipow(loc.y() / c.L2, p) +
                     ipow(loc.z() / c.L3, p);
    const double v = 1.0 - std::pow(w, invP);
    phi(i) = std::isfinite(v) ? std::max(v, kPhiFloor) : kPhiFloor;
  }
  return phi;
}

Eigen::MatrixXd tdf_grad_3d(const Component3D& c, const Points3& pts, int p) {
  const Eigen::Matrix3d R = rotation_matrix_3d(c.alpha, c.beta, c.gamma);
  const auto dR = rotation_matrix_derivs_3d(c.alpha, c.beta, c.gamma);
  const Eigen::Index n = pts.rows();
  const double expo = (1.0 - p) / static_cast<double>(p);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d d(pts(i, 0) - c.x0, pts(i, 1) - c.y0, pts(i, 2) - c.z0);
    const Eigen::Vector3d loc = R * d;
    const double xt = loc.x() / c.L1, yt = loc.y() / c.L2, zt = loc.z() / c.L3;
    const double w = ipow(xt, p) + ipow(yt, p) + ipow(zt, p);
    if (!(w > 0.0) || !std::isfinite(w)) continue;  // center singularity / overflow
    const double wf = std::pow(w, expo);
    const double ax = ipow(xt, p - 1) / c.L1;
    const double ay = ipow(yt, p - 1) / c.L2;
    const double az = ipow(zt, p - 1) / c.L3;
    // translations: local coords shift by -R columns
    g(i, 0) = wf * (ax * R(0, 0) + ay * R(1, 0) + az * R(2, 0));
    g(i, 1) = wf * (ax * R(0, 1) + ay * R(1, 1) + az * R(2, 1));
    g(i, 2) = wf * (ax * R(0, 2) + ay * R(1, 2) + az * R(2, 2));
    // half-sizes
    g(i, 3) = wf * ipow(xt, p) / c.L1;
    g(i, 4) = wf * ipow(yt, p) / c.L2;
    g(i, 5) = wf * ipow(zt, p) / c.L3;
    // angles, via the rotation-matrix derivatives
    for (int a = 0; a < 3; ++a) {
      const Eigen::Vector3d dloc = dR[a] * d;
      g(i, 6 + a) = -wf * (ax * dloc.x() + ay * dloc.y() + az * dloc.z());
    }
    for (int j = 0; j < 9; ++j) {
      if (!std::isfinite(g(i, j))) {
        g.row(i).setZero();
        break;
      }
    }
  }
  return g;
}

Eigen::VectorXd tdf_eval_2d(const Component2D& c, const Points2& pts, int p) {
  const double ct = std::cos(c.theta), st = std::sin(c.theta);
  const Eigen::Index n = pts.rows();
  const double invP = 1.0 / static_cast<double>(p);
  Eigen::VectorXd phi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dx = pts(i, 0) - c.x0, dy = pts(i, 1) - c.y0;
    const double xp = ct * dx + st * dy;
    const double yp = -st * dx + ct * dy;
    double l = 0.5 * (c.t1 + c.t2) + 0.5 * (c.t2 - c.t1) / c.L * xp;
    if (l == 0.0) l = 1e-30;  // wedge apex line
    const double w = ipow(xp / c.L, p) + ipow(yp / l, p);
    const double v = 1.0 - std::pow(w, invP);
    phi(i) = std::isfinite(v) ? std::max(v, kPhiFloor) : kPhiFloor;
  }
  return phi;
}

Eigen::MatrixXd tdf_grad_2d(const Component2D& c, const Points2& pts, int p) {
  const double ct = std::cos(c.theta), st = std::sin(c.theta);
  const Eigen::Index n = pts.rows();
  const double expo = (1.0 - p) / static_cast<double>(p);
  const double halfSlope = 0.5 * (c.t2 - c.t1) / c.L;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, 6);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dx = pts(i, 0) - c.x0, dy = pts(i, 1) - c.y0;
    const double xp = ct * dx + st * dy;
    const double yp = -st * dx + ct * dy;
    double l = 0.5 * (c.t1 + c.t2) + halfSlope * xp;
    if (l == 0.0) l = 1e-30;
    const double xt = xp / c.L, yt = yp / l;
    const double w = ipow(xt, p) + ipow(yt, p);
    if (!(w > 0.0) || !std::isfinite(w)) continue;
    const double wf = std::pow(w, expo);
    const double xq = ipow(xt, p - 1) / c.L;   // xt^(p-1)/L
    const double yq = ipow(yt, p - 1) / l;     // yt^(p-1)/l
    const double ypl = ipow(yt, p) / l;        // yt^p/l
    // width derivatives, chained through x'
    const double dl_dx0 = -halfSlope * ct;
    const double dl_dy0 = -halfSlope * st;
    const double dl_dL = -halfSlope * xp / c.L;
    const double dl_dt1 = 0.5 - 0.5 * xp / c.L;
    const double dl_dt2 = 0.5 + 0.5 * xp / c.L;
    const double dl_dth = halfSlope * yp;

    g(i, 0) = wf * (xq * ct - yq * st + ypl * dl_dx0);
    g(i, 1) = wf * (xq * st + yq * ct + ypl * dl_dy0);
    g(i, 2) = wf * (ipow(xt, p) / c.L + ypl * dl_dL);
    g(i, 3) = wf * ypl * dl_dt1;
    g(i, 4) = wf * ypl * dl_dt2;
    g(i, 5) = wf * (-xq * yp + yq * xp + ypl * dl_dth);
    for (int j = 0; j < 6; ++j) {
      if (!std::isfinite(g(i, j))) {
        g.row(i).setZero();
        break;
      }
    }
  }
  return g;
}

KsAggregate ks_aggregate(const Eigen::MatrixXd& tdfColumns, double lambda,
                         double expFloor) {
  const Eigen::Index n = tdfColumns.rows(), m = tdfColumns.cols();
  if (m < 1) throw std::invalid_argument("ks_aggregate: need at least one column");
  if (!(lambda > 0)) throw std::invalid_argument("ks_aggregate: lambda must be > 0");
  KsAggregate out;
  out.phiMax.resize(n);
  out.weights.resize(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double M = tdfColumns.row(i).maxCoeff();
    double s = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double e = std::exp(lambda * (tdfColumns(i, j) - M));
      out.weights(i, j) = e;
      s += e;
    }
    s = std::max(s, expFloor);
    out.weights.row(i) /= s;
    out.phiMax(i) = M + std::log(s) / lambda;
  }
  return out;
}

PruneResult prune_components(const std::vector<double>& minHalfDims,
                             const Eigen::MatrixXd& tdfColumns, double minSz,
                             double epsilon) {
  if (!(minSz > 0)) throw std::invalid_argument("prune_components: minSz must be > 0");
  const Eigen::Index m = tdfColumns.cols();
  if (static_cast<Eigen::Index>(minHalfDims.size()) != m)
    throw std::invalid_argument("prune_components: size mismatch");
  PruneResult out;
  out.active.assign(static_cast<size_t>(m), 1);
  for (Eigen::Index j = 0; j < m; ++j) {
    const bool tiny = minHalfDims[static_cast<size_t>(j)] / minSz <= 0.1;
    const bool outsideBand = tdfColumns.col(j).cwiseAbs().minCoeff() >= epsilon;
    if (tiny || outsideBand) out.active[static_cast<size_t>(j)] = 0;
  }
  bool any = false;
  for (char a : out.active) any = any || (a != 0);
  if (!any && m > 0) {
    out.active.back() = 1;
    out.keptLastFallback = true;
  }
  return out;
}

}  // namespace mmc
