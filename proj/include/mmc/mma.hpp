#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mmc/mesh.hpp"

namespace mmc {

// Method-of-moving-asymptotes parameters. The first six follow the values
// used by the optimization loop; a0/a/c/d weight the single constraint's
// elastic relaxation in the subproblem.
struct MmaParams {
  double epsimin = 1e-9;
  double raa0 = 0.01;
  double albefa = 0.8;
  double asyinit = 0.05;
  double asyincr = 1.0;
  double asydecr = 0.8;
  double a0 = 1.0;
  double a = 0.0;
  double c = 10000.0;
  double d = 0.0;
};

struct MmaState {
  Eigen::VectorXd xval, xold1, xold2;
  Eigen::VectorXd low, upp;
  int iter = 0;

  void init(const Eigen::VectorXd& x0);
  // Keeps only the given variable positions (ascending); used when
  // components are deactivated mid-run.
  void remove_variables(const std::vector<int>& keep);
};

// One MMA step for a problem with a single inequality constraint
// (fval <= 0). Gradients are taken at state.xval. Updates the state history
// and returns the new design; low < x < upp componentwise afterwards.
Eigen::VectorXd mma_update(MmaState& state, const MmaParams& params,
                           const Eigen::VectorXd& xmin, const Eigen::VectorXd& xmax,
                           double f0val, const Eigen::VectorXd& df0dx, double fval,
                           const Eigen::VectorXd& dfdx);

struct ConvergenceState {
  std::vector<double> objHistory;
  double objVr5 = 1.0;  // relative variation over the last five iterations
  double volErr = 0.0;  // (V/|D| - v)/v of the latest design
  bool warnedZeroMean = false;
};

// Appends the iteration's objective and updates the five-iteration metric:
// 1.0 before five samples exist, frozen while the volume constraint is
// violated by more than 1e-4 relative, |max - mean|/|mean| otherwise.
void update_convergence(ConvergenceState& state, double newObj, double volume,
                        double domainVolume, double vBound);

bool converged(const ConvergenceState& state, double tol, int maxIter);

struct VariableBounds {
  Eigen::VectorXd xmin, xmax;
};

// Box bounds per component variable: centers inside the domain, half-sizes
// in [0.02 * min domain edge, max domain edge], angles in [-pi, pi].
VariableBounds variable_bounds(const Mesh& mesh, int nComponents);

}  // namespace mmc
