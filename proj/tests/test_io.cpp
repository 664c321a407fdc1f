#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mmc/io.hpp"
#include "mmc/run.hpp"

using namespace mmc;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string tmpdir(const std::string& leaf) {
  const auto d = std::filesystem::temp_directory_path() / "mmc_io_tests" / leaf;
  std::filesystem::create_directories(d);
  return d.string();
}

}  // namespace

TEST_CASE("config parsing applies defaults") {
  const RunConfig cfg = parse_config(R"({"problem":"cantilever2d"})");
  CHECK(cfg.problem == "cantilever2d");
  CHECK(cfg.maxIter == 500);
  CHECK(cfg.tol == 1e-4);
  CHECK(cfg.meshScale == 1);
  CHECK(cfg.vtkEvery == 0);
  CHECK_FALSE(cfg.fdValidate);
}

TEST_CASE("config parsing rejects malformed input by name") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"problem":"x","bogusKey":1})"),
                       doctest::Contains("bogusKey"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("not json"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"problem":"x","maxIter":0})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"problem":"x","tol":-1})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({})"), std::invalid_argument);

  // unknown problem names surface when the problem is resolved
  const RunConfig cfg = parse_config(R"({"problem":"nope"})");
  CHECK_THROWS_WITH_AS(resolve_problem(cfg), doctest::Contains("nope"),
                       std::invalid_argument);
}

TEST_CASE("meshScale reaches the problem builder") {
  const RunConfig cfg = parse_config(R"({"problem":"torsion3d","meshScale":2})");
  const ProblemDefinition p = resolve_problem(cfg);
  CHECK(p.mesh.nelx == 48);
  CHECK(p.mesh.nely == 16);
  CHECK(p.mesh.nelz == 16);
}

TEST_CASE("hyperparameter overrides") {
  const RunConfig cfg = parse_config(
      R"({"problem":"cantilever2d","overrides":{"epsilon":0.3,"scl":7,"dgt0":4}})");
  const ProblemDefinition p = resolve_problem(cfg);
  CHECK(p.heaviside.epsilon == 0.3);
  CHECK(p.scl == 7.0);
  CHECK(p.dgt0 == 4);
}

TEST_CASE("VTK export matches the golden bytes") {
  const Mesh m = build_mesh(2, 2, 2, 2, 2, 2);
  Eigen::VectorXd rho(8);
  rho << 1, 0.5, 0.25, 0.125, 0.0625, 1, 0.001, 0;
  const std::string path = tmpdir("vtk") + "/golden.vtk";
  export_vtk(m, rho, path);
  const std::string expected =
      "# vtk DataFile Version 3.0\n"
      "mmc element field\n"
      "ASCII\n"
      "DATASET STRUCTURED_POINTS\n"
      "DIMENSIONS 3 3 3\n"
      "ORIGIN 0 0 0\n"
      "SPACING 1 1 1\n"
      "CELL_DATA 8\n"
      "SCALARS density double 1\n"
      "LOOKUP_TABLE default\n"
      "1\n0.5\n0.25\n0.125\n0.0625\n1\n0.001\n0\n";
  CHECK(slurp(path) == expected);
}

TEST_CASE("single-element VTK export") {
  const Mesh m = build_mesh(1, 1, 1, 1, 1, 1);
  const std::string path = tmpdir("vtk") + "/one.vtk";
  export_vtk(m, Eigen::VectorXd::Ones(1), path);
  const std::string text = slurp(path);
  CHECK(text.find("CELL_DATA 1") != std::string::npos);
  CHECK(text.substr(text.size() - 2) == "1\n");
}

TEST_CASE("components JSON carries kinds, parameter order and active flags") {
  std::vector<Component3D> c3{{1, 2, 3, 4, 5, 6, 0.1, 0.2, 0.3}};
  const std::string doc = components_to_json(c3, {}, {1});
  CHECK(doc.find("cuboid3d") != std::string::npos);
  CHECK(doc.find("\"formatVersion\": 1") != std::string::npos);

  std::vector<Component2D> c2{{1, 2, 0.4, 0.05, 0.06, -0.7}};
  const std::string doc2 = components_to_json({}, c2, {0});
  CHECK(doc2.find("trapezoid2d") != std::string::npos);
  CHECK(doc2.find("-0.7") != std::string::npos);
}

TEST_CASE("dump-problem emits a runnable inline config") {
  const std::string text = dump_problem_json("cantilever2d", 2);
  RunConfig cfg = parse_config(text);
  REQUIRE(cfg.customProblem.has_value());
  const ProblemDefinition p = resolve_problem(cfg);
  CHECK(p.mesh.nelx == 100);
  CHECK(p.init2d.size() == 16);
  CHECK(p.heaviside.alphaVoid == 1e-9);
}

TEST_CASE("identical configs give byte-identical histories") {
  RunConfig cfg;
  cfg.problem = "cantilever2d";
  cfg.meshOverride = {20, 10, 0};
  cfg.maxIter = 8;
  cfg.quiet = true;

  cfg.outDir = tmpdir("det_a");
  run(cfg);
  cfg.outDir = tmpdir("det_b");
  run(cfg);
  CHECK(slurp(tmpdir("det_a") + "/history.csv") ==
        slurp(tmpdir("det_b") + "/history.csv"));
  CHECK(slurp(tmpdir("det_a") + "/final.vtk") == slurp(tmpdir("det_b") + "/final.vtk"));
  CHECK(slurp(tmpdir("det_a") + "/components.json") ==
        slurp(tmpdir("det_b") + "/components.json"));
}

TEST_CASE("maxIter 1 writes exactly one record") {
  RunConfig cfg;
  cfg.problem = "cantilever2d";
  cfg.meshOverride = {20, 10, 0};
  cfg.maxIter = 1;
  cfg.quiet = true;
  cfg.outDir = tmpdir("one");
  const RunResult r = run(cfg);
  CHECK(r.history.size() == 1);
  std::ifstream f(tmpdir("one") + "/history.csv");
  std::string line;
  int lines = 0;
  while (std::getline(f, line)) ++lines;
  CHECK(lines == 2);  // header + one record
}

TEST_CASE("fd-validation mode writes the report and skips optimization") {
  RunConfig cfg;
  cfg.problem = "cantilever2d";
  cfg.meshOverride = {16, 8, 0};
  cfg.fdValidate = true;
  cfg.quiet = true;
  cfg.outDir = tmpdir("fdmode");
  const RunResult r = run(cfg);
  CHECK(r.history.empty());
  CHECK(std::filesystem::exists(tmpdir("fdmode") + "/fd_report.csv"));
  const std::string rep = slurp(tmpdir("fdmode") + "/fd_report.csv");
  CHECK(rep.find("variable,analyticObj") == 0);
}

TEST_CASE("matrix market export is flag-gated") {
  RunConfig cfg;
  cfg.problem = "cantilever2d";
  cfg.meshOverride = {10, 6, 0};
  cfg.maxIter = 1;
  cfg.quiet = true;
  cfg.outDir = tmpdir("mm");
  cfg.exportMatrixMarket = true;
  run(cfg);
  const std::string mm = slurp(tmpdir("mm") + "/K_iter1.mtx");
  CHECK(mm.find("%%MatrixMarket matrix coordinate real general") == 0);
}
