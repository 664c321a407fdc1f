#include "mmc/mma.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mmc {

void MmaState::init(const Eigen::VectorXd& x0) {
  xval = x0;
  xold1 = x0;
  xold2 = x0;
  low = Eigen::VectorXd::Zero(x0.size());
  upp = Eigen::VectorXd::Zero(x0.size());
  iter = 0;
}

void MmaState::remove_variables(const std::vector<int>& keep) {
  const Eigen::Index m = static_cast<Eigen::Index>(keep.size());
  Eigen::VectorXd nx(m), n1(m), n2(m), nl(m), nu(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const int k = keep[static_cast<size_t>(i)];
    nx(i) = xval(k); n1(i) = xold1(k); n2(i) = xold2(k);
    nl(i) = low(k); nu(i) = upp(k);
  }
  xval = nx; xold1 = n1; xold2 = n2; low = nl; upp = nu;
}

namespace {

// Primal-dual interior-point solve of the separable MMA subproblem with one
// constraint, following Svanberg's reference scheme.
struct Subproblem {
  const Eigen::VectorXd &low, &upp, &alfa, &beta, &p0, &q0, &P, &Q;
  double a0, a, b, c, d, epsimin;

  Eigen::VectorXd solve() const {
    const Eigen::Index n = low.size();
    Eigen::VectorXd x = 0.5 * (alfa + beta);
    Eigen::VectorXd xsi = (x - alfa).cwiseInverse().cwiseMax(1.0);
    Eigen::VectorXd eta = (beta - x).cwiseInverse().cwiseMax(1.0);
    double y = 1.0, z = 1.0, lam = 1.0;
    double mu = std::max(1.0, 0.5 * c), zet = 1.0, s = 1.0;

    Eigen::VectorXd rex(n), rexsi(n), reeta(n);
    double rey = 0, rez = 0, relam = 0, remu = 0, rezet = 0, res = 0;

    auto residual = [&](const Eigen::VectorXd& xv, double yv, double zv, double lamv,
                        const Eigen::VectorXd& xsiv, const Eigen::VectorXd& etav,
                        double muv, double zetv, double sv, double epsi,
                        double& norm2, double& maxAbs) {
      const Eigen::VectorXd ux1 = upp - xv;
      const Eigen::VectorXd xl1 = xv - low;
      const Eigen::VectorXd plam = p0 + lamv * P;
      const Eigen::VectorXd qlam = q0 + lamv * Q;
      const double gvec = (P.array() / ux1.array()).sum() + (Q.array() / xl1.array()).sum();
      rex = plam.array() / ux1.array().square() - qlam.array() / xl1.array().square() -
            xsiv.array() + etav.array();
      rey = c + d * yv - muv - lamv;
      rez = a0 - zetv - a * lamv;
      relam = gvec - a * zv - yv + sv - b;
      rexsi = xsiv.array() * (xv - alfa).array() - epsi;
      reeta = etav.array() * (beta - xv).array() - epsi;
      remu = muv * yv - epsi;
      rezet = zetv * zv - epsi;
      res = lamv * sv - epsi;
      double sq = rex.squaredNorm() + rexsi.squaredNorm() + reeta.squaredNorm();
      sq += rey * rey + rez * rez + relam * relam + remu * remu + rezet * rezet + res * res;
      norm2 = std::sqrt(sq);
      maxAbs = std::max({rex.cwiseAbs().maxCoeff(), rexsi.cwiseAbs().maxCoeff(),
                         reeta.cwiseAbs().maxCoeff(), std::fabs(rey), std::fabs(rez),
                         std::fabs(relam), std::fabs(remu), std::fabs(rezet),
                         std::fabs(res)});
    };

    double epsi = 1.0;
    while (epsi > epsimin) {
      double residunorm, residumax;
      residual(x, y, z, lam, xsi, eta, mu, zet, s, epsi, residunorm, residumax);
      int ittt = 0;
      while (residumax > 0.9 * epsi && ittt < 200) {
        ++ittt;
        const Eigen::VectorXd ux1 = upp - x;
        const Eigen::VectorXd xl1 = x - low;
        const Eigen::VectorXd ux2 = ux1.cwiseProduct(ux1);
        const Eigen::VectorXd xl2 = xl1.cwiseProduct(xl1);
        const Eigen::VectorXd ux3 = ux1.cwiseProduct(ux2);
        const Eigen::VectorXd xl3 = xl1.cwiseProduct(xl2);
        const Eigen::VectorXd plam = p0 + lam * P;
        const Eigen::VectorXd qlam = q0 + lam * Q;
        const double gvec =
            (P.array() / ux1.array()).sum() + (Q.array() / xl1.array()).sum();
        const Eigen::VectorXd GG = P.array() / ux2.array() - Q.array() / xl2.array();
        const Eigen::VectorXd delx = plam.array() / ux2.array() -
                                     qlam.array() / xl2.array() -
                                     epsi / (x - alfa).array() +
                                     epsi / (beta - x).array();
        const double dely = c + d * y - lam - epsi / y;
        const double delz = a0 - a * lam - epsi / z;
        const double dellam = gvec - a * z - y - b + epsi / lam;
        Eigen::VectorXd diagx = plam.array() / ux3.array() + qlam.array() / xl3.array();
        diagx = 2.0 * diagx.array() + xsi.array() / (x - alfa).array() +
                eta.array() / (beta - x).array();
        const double diagy = d + mu / y;
        const double diaglamyi = s / lam + 1.0 / diagy;

        // reduced 2x2 system in (dlam, dz)
        const double blam =
            dellam + dely / diagy - (GG.array() * delx.array() / diagx.array()).sum();
        const double Alam = diaglamyi + (GG.array().square() / diagx.array()).sum();
        const double a11 = Alam, a12 = a, a21 = a, a22 = -zet / z;
        const double det = a11 * a22 - a12 * a21;
        double dlam, dz;
        if (std::fabs(det) > 1e-300) {
          dlam = (blam * a22 - a12 * delz) / det;
          dz = (a11 * delz - a21 * blam) / det;
        } else {
          dlam = blam / std::max(a11, 1e-300);
          dz = 0.0;
        }
        const Eigen::VectorXd dx =
            -delx.array() / diagx.array() - GG.array() * dlam / diagx.array();
        const double dy = -dely / diagy + dlam / diagy;
        const Eigen::VectorXd dxsi = -xsi.array() + epsi / (x - alfa).array() -
                                     xsi.array() * dx.array() / (x - alfa).array();
        const Eigen::VectorXd deta = -eta.array() + epsi / (beta - x).array() +
                                     eta.array() * dx.array() / (beta - x).array();
        const double dmu = -mu + epsi / y - mu * dy / y;
        const double dzet = -zet + epsi / z - zet * dz / z;
        const double ds = -s + epsi / lam - s * dlam / lam;

        // largest step keeping all duals and slacks strictly positive
        double stminv = 1.0;
        auto upd = [&stminv](double dv, double v) {
          stminv = std::max(stminv, -1.01 * dv / v);
        };
        upd(dy, y); upd(dz, z); upd(dlam, lam); upd(dmu, mu); upd(dzet, zet); upd(ds, s);
        for (Eigen::Index i = 0; i < n; ++i) {
          upd(dxsi(i), xsi(i));
          upd(deta(i), eta(i));
          stminv = std::max(stminv, -1.01 * dx(i) / (x(i) - alfa(i)));
          stminv = std::max(stminv, 1.01 * dx(i) / (beta(i) - x(i)));
        }
        double steg = 1.0 / stminv;

        const Eigen::VectorXd xold = x, xsiold = xsi, etaold = eta;
        const double yold = y, zold = z, lamold = lam, muold = mu, zetold = zet,
                     sold = s;
        double resinew = 2.0 * residunorm;
        int itto = 0;
        while (resinew > residunorm && itto < 50) {
          ++itto;
          x = Eigen::VectorXd(xold + steg * dx);
          xsi = Eigen::VectorXd(xsiold + steg * dxsi);
          eta = Eigen::VectorXd(etaold + steg * deta);
          y = yold + steg * dy;
          z = zold + steg * dz;
          lam = lamold + steg * dlam;
          mu = muold + steg * dmu;
          zet = zetold + steg * dzet;
          s = sold + steg * ds;
          residual(x, y, z, lam, xsi, eta, mu, zet, s, epsi, resinew, residumax);
          steg *= 0.5;
        }
        residunorm = resinew;
      }
      epsi *= 0.1;
    }
    return x;
  }
};

}  // namespace

Eigen::VectorXd mma_update(MmaState& state, const MmaParams& prm,
                           const Eigen::VectorXd& xmin, const Eigen::VectorXd& xmax,
                           double /*f0val*/, const Eigen::VectorXd& df0dx, double fval,
                           const Eigen::VectorXd& dfdx) {
  const Eigen::Index n = state.xval.size();
  if (xmin.size() != n || xmax.size() != n || df0dx.size() != n || dfdx.size() != n)
    throw std::invalid_argument("mma_update: size mismatch");

  state.iter += 1;
  const Eigen::VectorXd& xval = state.xval;
  const Eigen::VectorXd range = xmax - xmin;

  if (state.iter <= 2) {
    state.low = xval - prm.asyinit * range;
    state.upp = xval + prm.asyinit * range;
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double zzz = (xval(i) - state.xold1(i)) * (state.xold1(i) - state.xold2(i));
      double factor = 1.0;
      if (zzz > 0) factor = prm.asyincr;
      else if (zzz < 0) factor = prm.asydecr;
      state.low(i) = xval(i) - factor * (state.xold1(i) - state.low(i));
      state.upp(i) = xval(i) + factor * (state.upp(i) - state.xold1(i));
      state.low(i) = std::clamp(state.low(i), xval(i) - 10.0 * range(i),
                                xval(i) - 0.01 * range(i));
      state.upp(i) = std::clamp(state.upp(i), xval(i) + 0.01 * range(i),
                                xval(i) + 10.0 * range(i));
    }
  }

  const Eigen::VectorXd alfa =
      xmin.cwiseMax(state.low + prm.albefa * (xval - state.low));
  const Eigen::VectorXd beta =
      xmax.cwiseMin(state.upp - prm.albefa * (state.upp - xval));

  const Eigen::VectorXd xmami = range.cwiseMax(1e-5);
  const Eigen::VectorXd ux1 = state.upp - xval;
  const Eigen::VectorXd xl1 = xval - state.low;
  const Eigen::VectorXd ux2 = ux1.cwiseProduct(ux1);
  const Eigen::VectorXd xl2 = xl1.cwiseProduct(xl1);

  Eigen::VectorXd p0 = df0dx.cwiseMax(0.0);
  Eigen::VectorXd q0 = (-df0dx).cwiseMax(0.0);
  const Eigen::VectorXd pq0 =
      0.001 * (p0 + q0) + prm.raa0 * xmami.cwiseInverse();
  p0 = (p0 + pq0).cwiseProduct(ux2);
  q0 = (q0 + pq0).cwiseProduct(xl2);

  Eigen::VectorXd P = dfdx.cwiseMax(0.0);
  Eigen::VectorXd Q = (-dfdx).cwiseMax(0.0);
  const Eigen::VectorXd PQ = 0.001 * (P + Q) + prm.raa0 * xmami.cwiseInverse();
  P = (P + PQ).cwiseProduct(ux2);
  Q = (Q + PQ).cwiseProduct(xl2);

  const double b = (P.array() / ux1.array()).sum() +
                   (Q.array() / xl1.array()).sum() - fval;

  Subproblem sub{state.low, state.upp, alfa,  beta,  p0,
                 q0,        P,         Q,     prm.a0, prm.a,
                 b,         prm.c,     prm.d, prm.epsimin};
  const Eigen::VectorXd xnew = sub.solve();

  state.xold2 = state.xold1;
  state.xold1 = state.xval;
  state.xval = xnew;
  return xnew;
}

void update_convergence(ConvergenceState& st, double newObj, double volume,
                        double domainVolume, double vBound) {
  st.objHistory.push_back(newObj);
  st.volErr = (volume / domainVolume - vBound) / vBound;
  const size_t k = st.objHistory.size();
  if (k < 5) {
    st.objVr5 = 1.0;
    return;
  }
  if (st.volErr > 1e-4) return;  // frozen at the previous value
  double mx = st.objHistory[k - 5], mean = 0.0;
  for (size_t i = k - 5; i < k; ++i) {
    mx = std::max(mx, st.objHistory[i]);
    mean += st.objHistory[i];
  }
  mean /= 5.0;
  if (mean == 0.0) {
    st.objVr5 = 0.0;
    st.warnedZeroMean = true;
    return;
  }
  st.objVr5 = std::fabs(mx - mean) / std::fabs(mean);
}

bool converged(const ConvergenceState& st, double tol, int maxIter) {
  return st.objVr5 < tol ||
         static_cast<int>(st.objHistory.size()) >= maxIter;
}

VariableBounds variable_bounds(const Mesh& mesh, int nComponents) {
  const int k = mesh.is2d() ? 6 : 9;
  const double pi = std::numbers::pi;
  VariableBounds vb;
  vb.xmin.resize(static_cast<Eigen::Index>(k) * nComponents);
  vb.xmax.resize(static_cast<Eigen::Index>(k) * nComponents);
  if (mesh.is2d()) {
    const double minEdge = std::min(mesh.DL, mesh.DW);
    const double maxEdge = std::max(mesh.DL, mesh.DW);
    for (int c = 0; c < nComponents; ++c) {
      const Eigen::Index o = static_cast<Eigen::Index>(6) * c;
      vb.xmin(o + 0) = 0; vb.xmax(o + 0) = mesh.DL;
      vb.xmin(o + 1) = 0; vb.xmax(o + 1) = mesh.DW;
      for (int j = 2; j < 5; ++j) {
        vb.xmin(o + j) = 0.02 * minEdge;
        vb.xmax(o + j) = maxEdge;
      }
      vb.xmin(o + 5) = -pi; vb.xmax(o + 5) = pi;
    }
  } else {
    const double minEdge = std::min({mesh.DL, mesh.DW, mesh.DH});
    const double maxEdge = std::max({mesh.DL, mesh.DW, mesh.DH});
    for (int c = 0; c < nComponents; ++c) {
      const Eigen::Index o = static_cast<Eigen::Index>(9) * c;
      vb.xmin(o + 0) = 0; vb.xmax(o + 0) = mesh.DL;
      vb.xmin(o + 1) = 0; vb.xmax(o + 1) = mesh.DW;
      vb.xmin(o + 2) = 0; vb.xmax(o + 2) = mesh.DH;
      for (int j = 3; j < 6; ++j) {
        vb.xmin(o + j) = 0.02 * minEdge;
        vb.xmax(o + j) = maxEdge;
      }
      for (int j = 6; j < 9; ++j) {
        vb.xmin(o + j) = -pi;
        vb.xmax(o + j) = pi;
      }
    }
  }
  return vb;
}

}  // namespace mmc
