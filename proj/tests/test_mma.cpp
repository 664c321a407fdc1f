#include <doctest.h>

#include <cmath>
#include <random>

#include "mmc/mma.hpp"

using namespace mmc;

namespace {

MmaParams loop_params() { return MmaParams{}; }

// one analytic QP: min x1^2 + x2^2  s.t.  x1 + x2 >= 1,  x in [0,1]^2
struct Qp {
  double objective(const Eigen::VectorXd& x) const { return x.squaredNorm(); }
  Eigen::VectorXd dObj(const Eigen::VectorXd& x) const { return 2.0 * x; }
  double constraint(const Eigen::VectorXd& x) const { return 1.0 - x(0) - x(1); }
  Eigen::VectorXd dCon(const Eigen::VectorXd&) const {
    return Eigen::VectorXd::Constant(2, -1.0);
  }
};

}  // namespace

TEST_CASE("MMA solves the analytic QP to the KKT point") {
  // With the loop's conservative asymptote settings (asyinit 0.05 and no
  // asymptote growth) the tangential mode contracts by only ~2.5% per
  // iteration, so a 50-iteration budget requires a start whose tangential
  // offset is already small; the infeasible midpoint start exercises the
  // constraint activation and the normal-mode dynamics.
  Qp qp;
  Eigen::VectorXd x(2);
  x << 0.3, 0.3;
  const Eigen::VectorXd xmin = Eigen::VectorXd::Zero(2);
  const Eigen::VectorXd xmax = Eigen::VectorXd::Ones(2);
  MmaState st;
  st.init(x);
  const MmaParams prm = loop_params();
  int it = 0;
  for (; it < 50; ++it) {
    x = mma_update(st, prm, xmin, xmax, qp.objective(x), qp.dObj(x),
                   qp.constraint(x), qp.dCon(x));
    if ((x - Eigen::Vector2d(0.5, 0.5)).cwiseAbs().maxCoeff() <= 1e-3) break;
  }
  CHECK(it < 50);
  CHECK(x(0) == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(x(1) == doctest::Approx(0.5).epsilon(1e-3));

  // from an asymmetric start the iteration still approaches the optimum,
  // on the slower tangential schedule
  Eigen::VectorXd y(2);
  y << 0.4, 0.6;
  MmaState st2;
  st2.init(y);
  for (int k = 0; k < 50; ++k)
    y = mma_update(st2, prm, xmin, xmax, qp.objective(y), qp.dObj(y),
                   qp.constraint(y), qp.dCon(y));
  CHECK((y - Eigen::Vector2d(0.5, 0.5)).cwiseAbs().maxCoeff() < 0.05);
  CHECK(std::fabs(y(0) + y(1) - 1.0) <= 1e-3);
}

TEST_CASE("MMA keeps the asymptote sandwich and the move box") {
  Qp qp;
  Eigen::VectorXd x(2);
  x << 0.9, 0.2;
  const Eigen::VectorXd xmin = Eigen::VectorXd::Zero(2);
  const Eigen::VectorXd xmax = Eigen::VectorXd::Ones(2);
  MmaState st;
  st.init(x);
  const MmaParams prm = loop_params();
  for (int it = 0; it < 20; ++it) {
    const Eigen::VectorXd xPrev = st.xval;
    const Eigen::VectorXd lowPrev = st.low, uppPrev = st.upp;
    x = mma_update(st, prm, xmin, xmax, qp.objective(x), qp.dObj(x),
                   qp.constraint(x), qp.dCon(x));
    for (int i = 0; i < 2; ++i) {
      CHECK(st.low(i) < x(i));
      CHECK(x(i) < st.upp(i));
      CHECK(x(i) >= xmin(i));
      CHECK(x(i) <= xmax(i));
      // the albefa box around the expansion point bounds the step
      const double alfa = std::max(xmin(i), st.low(i) + prm.albefa * (xPrev(i) - st.low(i)));
      const double beta = std::min(xmax(i), st.upp(i) - prm.albefa * (st.upp(i) - xPrev(i)));
      CHECK(x(i) >= alfa - 1e-12);
      CHECK(x(i) <= beta + 1e-12);
    }
  }
}

TEST_CASE("MMA is equivariant under variable permutation") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  const int n = 6;
  Eigen::VectorXd x0(n), df(n), dg(n);
  for (int i = 0; i < n; ++i) { x0(i) = u(rng); df(i) = u(rng) - 0.5; dg(i) = u(rng) - 0.5; }
  const Eigen::VectorXd xmin = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd xmax = Eigen::VectorXd::Ones(n);

  MmaState a;
  a.init(x0);
  const Eigen::VectorXd xa =
      mma_update(a, loop_params(), xmin, xmax, 0.0, df, -0.1, dg);

  std::vector<int> perm{3, 0, 5, 1, 4, 2};
  Eigen::VectorXd xp(n), dfp(n), dgp(n);
  for (int i = 0; i < n; ++i) { xp(i) = x0(perm[i]); dfp(i) = df(perm[i]); dgp(i) = dg(perm[i]); }
  MmaState b;
  b.init(xp);
  const Eigen::VectorXd xb =
      mma_update(b, loop_params(), xmin, xmax, 0.0, dfp, -0.1, dgp);
  for (int i = 0; i < n; ++i) CHECK(xb(i) == doctest::Approx(xa(perm[i])).epsilon(1e-12));
}

TEST_CASE("stationary design with slack constraint barely moves") {
  const int n = 4;
  MmaState st;
  st.init(Eigen::VectorXd::Constant(n, 0.5));
  const Eigen::VectorXd xmin = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd xmax = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd x = mma_update(st, loop_params(), xmin, xmax, 1.0,
                                       Eigen::VectorXd::Zero(n), -0.5,
                                       Eigen::VectorXd::Zero(n));
  CHECK((x - Eigen::VectorXd::Constant(n, 0.5)).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("monotone objective pushes toward the bound under a slack constraint") {
  MmaState st;
  st.init(Eigen::VectorXd::Constant(1, 0.5));
  const Eigen::VectorXd xmin = Eigen::VectorXd::Zero(1);
  const Eigen::VectorXd xmax = Eigen::VectorXd::Ones(1);
  double x = 0.5;
  for (int it = 0; it < 40; ++it) {
    Eigen::VectorXd df = Eigen::VectorXd::Constant(1, 1.0);  // decrease x
    Eigen::VectorXd dg = Eigen::VectorXd::Zero(1);
    const double xNew = mma_update(st, loop_params(), xmin, xmax, x, df, -1.0, dg)(0);
    CHECK(xNew < x);
    x = xNew;
  }
  CHECK(x <= 0.15);  // ~0.01 of travel per iteration at these settings
}

TEST_CASE("remove_variables keeps the history aligned") {
  MmaState st;
  Eigen::VectorXd x(4);
  x << 1, 2, 3, 4;
  st.init(x);
  st.xold1 << 10, 20, 30, 40;
  st.low << -1, -2, -3, -4;
  st.remove_variables({0, 2});
  CHECK(st.xval.size() == 2);
  CHECK(st.xval(1) == 3);
  CHECK(st.xold1(1) == 30);
  CHECK(st.low(1) == -3);
}

TEST_CASE("five-iteration convergence metric follows its three branches") {
  ConvergenceState st;
  const double D = 1.0, v = 0.4;

  // fewer than five samples: metric pinned at 1
  for (int i = 0; i < 3; ++i) update_convergence(st, 10.0, 0.39, D, v);
  CHECK(st.objVr5 == 1.0);
  CHECK_FALSE(converged(st, 1e-4, 500));

  // frozen while infeasible by more than 1e-4 relative
  update_convergence(st, 10.0, 0.39, D, v);
  update_convergence(st, 10.0, 0.45, D, v);  // Ver = 0.125 > 1e-4
  CHECK(st.objVr5 == 1.0);
  const double frozen = st.objVr5;
  update_convergence(st, 12.0, 0.45, D, v);
  CHECK(st.objVr5 == frozen);  // bitwise unchanged

  // feasible: |max - mean| / mean over the last five
  ConvergenceState s2;
  for (double o : {10.0, 10.0, 10.0, 10.0, 12.0}) update_convergence(s2, o, 0.39, D, v);
  CHECK(s2.objVr5 == doctest::Approx(1.6 / 10.4).epsilon(1e-12));

  ConvergenceState s3;
  for (int i = 0; i < 5; ++i) update_convergence(s3, 7.5, 0.39, D, v);
  CHECK(s3.objVr5 == 0.0);

  // zero mean counts as converged with a warning
  ConvergenceState s4;
  for (int i = 0; i < 5; ++i) update_convergence(s4, 0.0, 0.39, D, v);
  CHECK(s4.objVr5 == 0.0);
  CHECK(s4.warnedZeroMean);
}

TEST_CASE("termination test") {
  ConvergenceState st;
  st.objVr5 = 9.76e-5;
  st.objHistory.assign(171, 1.0);
  CHECK(converged(st, 1e-4, 500));

  st.objVr5 = 0.5;
  st.objHistory.assign(500, 1.0);
  CHECK(converged(st, 1e-4, 500));  // iteration cap

  ConvergenceState young;
  young.objHistory.assign(2, 1.0);
  young.objVr5 = 1.0;
  CHECK_FALSE(converged(young, 1e-4, 500));
}

TEST_CASE("variable bounds cover the domain box") {
  const Mesh m3 = build_mesh(4, 2, 2, 64, 8, 32);
  const VariableBounds b3 = variable_bounds(m3, 2);
  CHECK(b3.xmin.size() == 18);
  CHECK(b3.xmin(0) == 0.0);
  CHECK(b3.xmax(0) == 64.0);
  CHECK(b3.xmax(1) == 8.0);
  CHECK(b3.xmax(2) == 32.0);
  CHECK(b3.xmin(3) == doctest::Approx(0.16));  // 0.02 * min edge
  CHECK(b3.xmin(3) > 0.0);
  CHECK(b3.xmax(5) == 64.0);
  CHECK(b3.xmin(6) == doctest::Approx(-M_PI));
  CHECK(b3.xmax(6) == doctest::Approx(M_PI));

  const Mesh m2 = build_mesh_2d(4, 2, 2, 1);
  const VariableBounds b2 = variable_bounds(m2, 1);
  CHECK(b2.xmin.size() == 6);
  CHECK(b2.xmax(0) == 2.0);
  CHECK(b2.xmax(1) == 1.0);
  CHECK(b2.xmin(2) == doctest::Approx(0.02));
  CHECK(b2.xmin(5) == doctest::Approx(-M_PI));
}
