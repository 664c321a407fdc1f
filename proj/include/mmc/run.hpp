#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "mmc/fem.hpp"
#include "mmc/problems.hpp"

namespace mmc {

struct RunConfig {
  std::string problem;  // builtin name; empty when customProblem is set
  std::optional<ProblemDefinition> customProblem;
  int meshScale = 1;
  std::array<int, 3> meshOverride{0, 0, 0};

  int maxIter = 500;
  double tol = 1e-4;
  std::string outDir = "out";
  int vtkEvery = 0;  // 0 = final design only
  bool fdValidate = false;
  double fdDelta = 1e-8;
  bool compareFullDofs = false;
  SolverKind solver = SolverKind::Auto;
  double cgTol = 1e-8;
  bool literalVoidThreshold = false;  // use alpha + epsilon instead of alpha + 1e-6
  bool exportMatrixMarket = false;
  int threads = 1;
  bool quiet = false;

  std::optional<double> epsilon, lambda, alphaVoid, scl, volfrac;
  std::optional<int> p, dgt0;
};

// Builds the problem named by the config and applies hyperparameter overrides.
ProblemDefinition resolve_problem(const RunConfig& config);

struct IterationRecord {
  int iter = 0;
  double obj = 0;
  double volfrac = 0;
  double objVr5 = 1.0;
  double volErr = 0;
  int nActive = 0;
  int nPath = 0;
  bool pathExists = false;
  double retainedDofFrac = 1.0;
  double objFull = std::numeric_limits<double>::quiet_NaN();
  bool pruneFallback = false;
  double tTdf = 0, tSrch = 0, tFer = 0, tFe = 0, tSens = 0, tUpdt = 0;
};

struct RunResult {
  ProblemDefinition problem;
  std::vector<IterationRecord> history;
  std::vector<Component3D> comps3;
  std::vector<Component2D> comps2;
  std::vector<char> active;
  bool convergedFlag = false;
  double finalObjective = 0;
  double finalVolumeFrac = 0;
};

// Full optimization loop: TDFs and gradients with component pruning, K-S
// aggregation, load-path-reduced FEA, nodal sensitivities with rounding,
// MMA update and the five-iteration convergence metric. Artifacts are
// written under config.outDir unless it is empty.
RunResult run(const RunConfig& config);

struct FdRow {
  int varIndex = 0;
  double analytic = 0;
  double fd = 0;
  double relError = 0;
};

struct FdReport {
  std::vector<FdRow> objective;
  std::vector<FdRow> volume;
  double maxObjError = 0;
  double maxVolError = 0;
};

// Central-difference check of the analytic objective and volume gradients on
// the problem's initial design, using full-DOF FEA and a reused direct
// factorization for both sides. Mesh must stay at or below 5e4 DOFs.
FdReport fd_validate(const ProblemDefinition& problem, double delta);

void write_fd_csv(const FdReport& report, const std::string& path);

}  // namespace mmc
