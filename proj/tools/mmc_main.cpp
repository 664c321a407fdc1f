#include <Eigen/Core>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mmc/io.hpp"
#include "mmc/run.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit topology optimization with moving morphable components"};
  app.require_subcommand(1);

  std::string configPath, outDir, problemName;
  int threads = 0, meshScale = 1, maxIter = 0, vtkEvery = -1;
  double fdDelta = 0;

  CLI::App* runCmd = app.add_subcommand("run", "run an optimization from a JSON config");
  runCmd->add_option("config", configPath, "config file")->required();
  runCmd->add_option("--out", outDir, "output directory (overrides config)");
  runCmd->add_option("--threads", threads, "linear algebra threads");
  runCmd->add_option("--max-iter", maxIter, "iteration cap (overrides config)");
  runCmd->add_option("--vtk-every", vtkEvery, "density export period (overrides config)");

  CLI::App* valCmd = app.add_subcommand(
      "validate-gradients", "finite-difference check of the analytic sensitivities");
  valCmd->add_option("config", configPath, "config file")->required();
  valCmd->add_option("--out", outDir, "output directory (overrides config)");
  valCmd->add_option("--delta", fdDelta, "central-difference step (overrides config)");
  valCmd->add_option("--threads", threads, "linear algebra threads");

  CLI::App* dumpCmd =
      app.add_subcommand("dump-problem", "print a builtin problem as an editable config");
  dumpCmd->add_option("name", problemName, "builtin problem name")->required();
  dumpCmd->add_option("--mesh-scale", meshScale, "divide the default element counts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (threads > 0) Eigen::setNbThreads(threads);
    if (dumpCmd->parsed()) {
      std::cout << mmc::dump_problem_json(problemName, meshScale);
      return 0;
    }

    mmc::RunConfig cfg = mmc::parse_config(read_file(configPath));
    if (!outDir.empty()) cfg.outDir = outDir;
    if (maxIter > 0) cfg.maxIter = maxIter;
    if (vtkEvery >= 0) cfg.vtkEvery = vtkEvery;
    if (valCmd->parsed()) {
      cfg.fdValidate = true;
      if (fdDelta > 0) cfg.fdDelta = fdDelta;
    }

    const mmc::RunResult res = mmc::run(cfg);
    if (!cfg.fdValidate) {
      std::printf("%s after %zu iterations: objective %.6g, volume fraction %.4f\n",
                  res.convergedFlag ? "converged" : "stopped", res.history.size(),
                  res.finalObjective, res.finalVolumeFrac);
    }
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
