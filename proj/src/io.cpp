#include "mmc/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace mmc {

namespace {

using nlohmann::json;

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[40];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::invalid_argument("unknown key \"" + it.key() + "\" in " + where);
}

}  // namespace

void export_vtk(const Mesh& mesh, const Eigen::VectorXd& elemValues,
                const std::string& path, const std::string& fieldName) {
  if (elemValues.size() != mesh.nEle)
    throw std::invalid_argument("export_vtk: field size mismatch");
  std::ofstream f(path);
  if (!f) throw std::runtime_error("export_vtk: cannot open " + path);
  f << "# vtk DataFile Version 3.0\n";
  f << "mmc element field\n";
  f << "ASCII\n";
  f << "DATASET STRUCTURED_POINTS\n";
  f << "DIMENSIONS " << mesh.nelx + 1 << " " << mesh.nely + 1 << " "
    << (mesh.is2d() ? 1 : mesh.nelz + 1) << "\n";
  f << "ORIGIN 0 0 0\n";
  f << "SPACING " << fmt(mesh.hx, "%.9g") << " " << fmt(mesh.hy, "%.9g") << " "
    << fmt(mesh.is2d() ? 1.0 : mesh.hz, "%.9g") << "\n";
  f << "CELL_DATA " << mesh.nEle << "\n";
  f << "SCALARS " << fieldName << " double 1\n";
  f << "LOOKUP_TABLE default\n";
  for (int e = 0; e < mesh.nEle; ++e) f << fmt(elemValues(e), "%.9g") << "\n";
  if (!f) throw std::runtime_error("export_vtk: write failed for " + path);
}

std::string components_to_json(const std::vector<Component3D>& comps3,
                               const std::vector<Component2D>& comps2,
                               const std::vector<char>& active) {
  json comps = json::array();
  for (const auto& c : comps3)
    comps.push_back({{"kind", "cuboid3d"},
                     {"params", {c.x0, c.y0, c.z0, c.L1, c.L2, c.L3, c.alpha, c.beta,
                                 c.gamma}}});
  for (const auto& c : comps2)
    comps.push_back(
        {{"kind", "trapezoid2d"}, {"params", {c.x0, c.y0, c.L, c.t1, c.t2, c.theta}}});
  json doc;
  doc["formatVersion"] = 1;
  doc["components"] = comps;
  json act = json::array();
  for (char a : active) act.push_back(a ? 1 : 0);
  doc["active"] = act;
  return doc.dump(2) + "\n";
}

void write_history_header(std::ostream& os) {
  os << "iter,obj,volfrac,objVr5,volErr,nActive,nPath,pathExists,retainedDofFrac,"
        "objFull\n";
}

void append_history(std::ostream& os, const IterationRecord& r) {
  os << r.iter << ',' << fmt(r.obj) << ',' << fmt(r.volfrac) << ',' << fmt(r.objVr5)
     << ',' << fmt(r.volErr) << ',' << r.nActive << ',' << r.nPath << ','
     << (r.pathExists ? 1 : 0) << ',' << fmt(r.retainedDofFrac) << ','
     << fmt(r.objFull) << '\n';
  os.flush();
}

void write_timings_header(std::ostream& os) {
  os << "iter,t_TDF,t_srch,t_FEr,t_FE,t_sens,t_updt\n";
}

void append_timings(std::ostream& os, const IterationRecord& r) {
  os << r.iter << ',' << fmt(r.tTdf, "%.6g") << ',' << fmt(r.tSrch, "%.6g") << ','
     << fmt(r.tFer, "%.6g") << ',' << fmt(r.tFe, "%.6g") << ',' << fmt(r.tSens, "%.6g")
     << ',' << fmt(r.tUpdt, "%.6g") << '\n';
  os.flush();
}

namespace {

ProblemDefinition problem_from_json(const json& jp) {
  check_keys(jp,
             {"name", "dim", "domain", "mesh", "E", "nu", "thickness", "volumeBound",
              "objective", "epsilon", "alphaVoid", "lambda", "p", "scl", "dgt0",
              "fixedDofs", "loads", "dummyLoads", "springs", "loadingElements",
              "fixedElements", "nonDesignNodes", "components"},
             "customProblem");
  ProblemDefinition p;
  p.name = jp.value("name", std::string("custom"));
  const int dim = jp.at("dim").get<int>();
  const auto dom = jp.at("domain").get<std::vector<double>>();
  const auto msh = jp.at("mesh").get<std::vector<int>>();
  if (dim == 3) {
    if (dom.size() != 3 || msh.size() != 3)
      throw std::invalid_argument("customProblem: 3D needs domain and mesh of length 3");
    p.mesh = build_mesh(msh[0], msh[1], msh[2], dom[0], dom[1], dom[2]);
  } else if (dim == 2) {
    if (dom.size() != 2 || msh.size() != 2)
      throw std::invalid_argument("customProblem: 2D needs domain and mesh of length 2");
    p.mesh = build_mesh_2d(msh[0], msh[1], dom[0], dom[1]);
  } else {
    throw std::invalid_argument("customProblem: dim must be 2 or 3");
  }
  p.youngsModulus = jp.value("E", 1.0);
  p.poisson = jp.value("nu", 0.3);
  p.thickness = jp.value("thickness", 1.0);
  p.volumeBound = jp.at("volumeBound").get<double>();
  const std::string obj = jp.value("objective", std::string("compliance"));
  if (obj == "compliance") p.objective = ObjectiveKind::Compliance;
  else if (obj == "outputDisplacement") p.objective = ObjectiveKind::OutputDisplacement;
  else throw std::invalid_argument("customProblem: unknown objective \"" + obj + "\"");
  p.heaviside.epsilon = jp.value("epsilon", 0.25);
  p.heaviside.alphaVoid = jp.value("alphaVoid", 1e-3);
  p.tdf.lambda = jp.value("lambda", 100.0);
  p.tdf.p = jp.value("p", 6);
  p.scl = jp.value("scl", 1.0);
  p.dgt0 = jp.value("dgt0", 5);
  p.fixedDofs = jp.value("fixedDofs", std::vector<int>{});
  for (const auto& l : jp.value("loads", json::array()))
    p.loads.push_back({l.at(0).get<int>(), l.at(1).get<double>()});
  for (const auto& l : jp.value("dummyLoads", json::array()))
    p.dummyLoads.push_back({l.at(0).get<int>(), l.at(1).get<double>()});
  for (const auto& l : jp.value("springs", json::array()))
    p.springs.push_back({l.at(0).get<int>(), l.at(1).get<double>()});
  p.loadingElements = jp.value("loadingElements", std::vector<int>{});
  p.fixedElements = jp.value("fixedElements", std::vector<int>{});
  const auto nd = jp.value("nonDesignNodes", std::vector<std::vector<int>>{});
  if (!nd.empty()) {
    p.nonDesignTdfs = -Eigen::MatrixXd::Ones(p.mesh.nNod, static_cast<int>(nd.size()));
    for (size_t c = 0; c < nd.size(); ++c)
      for (int n : nd[c]) p.nonDesignTdfs(n, static_cast<Eigen::Index>(c)) = 1.0;
  }
  for (const auto& jc : jp.at("components")) {
    const std::string kind = jc.at("kind").get<std::string>();
    const auto prm = jc.at("params").get<std::vector<double>>();
    if (kind == "cuboid3d") {
      if (dim != 3 || prm.size() != 9)
        throw std::invalid_argument("customProblem: cuboid3d needs 9 params in a 3D problem");
      p.init3d.push_back({prm[0], prm[1], prm[2], prm[3], prm[4], prm[5], prm[6],
                          prm[7], prm[8]});
    } else if (kind == "trapezoid2d") {
      if (dim != 2 || prm.size() != 6)
        throw std::invalid_argument("customProblem: trapezoid2d needs 6 params in a 2D problem");
      p.init2d.push_back({prm[0], prm[1], prm[2], prm[3], prm[4], prm[5]});
    } else {
      throw std::invalid_argument("customProblem: unknown component kind \"" + kind + "\"");
    }
  }
  if (p.componentCount() == 0)
    throw std::invalid_argument("customProblem: needs at least one component");
  return p;
}

json problem_to_json(const ProblemDefinition& p) {
  json jp;
  jp["name"] = p.name;
  jp["dim"] = p.is2d() ? 2 : 3;
  if (p.is2d()) {
    jp["domain"] = {p.mesh.DL, p.mesh.DW};
    jp["mesh"] = {p.mesh.nelx, p.mesh.nely};
  } else {
    jp["domain"] = {p.mesh.DL, p.mesh.DW, p.mesh.DH};
    jp["mesh"] = {p.mesh.nelx, p.mesh.nely, p.mesh.nelz};
  }
  jp["E"] = p.youngsModulus;
  jp["nu"] = p.poisson;
  if (p.is2d()) jp["thickness"] = p.thickness;
  jp["volumeBound"] = p.volumeBound;
  jp["objective"] = p.objective == ObjectiveKind::Compliance ? "compliance"
                                                             : "outputDisplacement";
  jp["epsilon"] = p.heaviside.epsilon;
  jp["alphaVoid"] = p.heaviside.alphaVoid;
  jp["lambda"] = p.tdf.lambda;
  jp["p"] = p.tdf.p;
  jp["scl"] = p.scl;
  jp["dgt0"] = p.dgt0;
  jp["fixedDofs"] = p.fixedDofs;
  json loads = json::array();
  for (const auto& l : p.loads) loads.push_back({l.dof, l.value});
  jp["loads"] = loads;
  json dloads = json::array();
  for (const auto& l : p.dummyLoads) dloads.push_back({l.dof, l.value});
  jp["dummyLoads"] = dloads;
  json springs = json::array();
  for (const auto& s : p.springs) springs.push_back({s.dof, s.stiffness});
  jp["springs"] = springs;
  jp["loadingElements"] = p.loadingElements;
  jp["fixedElements"] = p.fixedElements;
  json nd = json::array();
  for (Eigen::Index c = 0; c < p.nonDesignTdfs.cols(); ++c) {
    json col = json::array();
    for (int n = 0; n < p.mesh.nNod; ++n)
      if (p.nonDesignTdfs(n, c) > 0) col.push_back(n);
    nd.push_back(col);
  }
  jp["nonDesignNodes"] = nd;
  json comps = json::array();
  for (const auto& c : p.init3d)
    comps.push_back({{"kind", "cuboid3d"},
                     {"params", {c.x0, c.y0, c.z0, c.L1, c.L2, c.L3, c.alpha, c.beta,
                                 c.gamma}}});
  for (const auto& c : p.init2d)
    comps.push_back(
        {{"kind", "trapezoid2d"}, {"params", {c.x0, c.y0, c.L, c.t1, c.t2, c.theta}}});
  jp["components"] = comps;
  return jp;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config: top level must be an object");
  check_keys(doc,
             {"formatVersion", "problem", "customProblem", "meshScale", "mesh",
              "maxIter", "tol", "outDir", "vtkEvery", "fdValidate", "fdDelta",
              "compareFullDofs", "solver", "cgTol", "literalVoidThreshold",
              "exportMatrixMarket", "threads", "quiet", "overrides"},
             "config");
  if (doc.contains("formatVersion") && doc["formatVersion"].get<int>() != 1)
    throw std::invalid_argument("config: unsupported formatVersion");

  RunConfig cfg;
  const bool hasName = doc.contains("problem");
  const bool hasCustom = doc.contains("customProblem");
  if (hasName == hasCustom)
    throw std::invalid_argument(
        "config: exactly one of \"problem\" and \"customProblem\" is required");
  if (hasName) cfg.problem = doc["problem"].get<std::string>();
  else cfg.customProblem = problem_from_json(doc["customProblem"]);

  cfg.meshScale = doc.value("meshScale", 1);
  if (doc.contains("mesh")) {
    const auto m = doc["mesh"].get<std::vector<int>>();
    if (m.size() < 2 || m.size() > 3)
      throw std::invalid_argument("config: mesh needs 2 or 3 entries");
    cfg.meshOverride = {m[0], m[1], m.size() == 3 ? m[2] : 0};
  }
  cfg.maxIter = doc.value("maxIter", 500);
  cfg.tol = doc.value("tol", 1e-4);
  if (!(cfg.tol > 0)) throw std::invalid_argument("config: tol must be > 0");
  if (cfg.maxIter < 1) throw std::invalid_argument("config: maxIter must be >= 1");
  cfg.outDir = doc.value("outDir", std::string("out"));
  cfg.vtkEvery = doc.value("vtkEvery", 0);
  cfg.fdValidate = doc.value("fdValidate", false);
  cfg.fdDelta = doc.value("fdDelta", 1e-8);
  cfg.compareFullDofs = doc.value("compareFullDofs", false);
  const std::string solver = doc.value("solver", std::string("auto"));
  if (solver == "auto") cfg.solver = SolverKind::Auto;
  else if (solver == "cg") cfg.solver = SolverKind::Cg;
  else if (solver == "direct") cfg.solver = SolverKind::Direct;
  else throw std::invalid_argument("config: unknown solver \"" + solver + "\"");
  cfg.cgTol = doc.value("cgTol", 1e-8);
  cfg.literalVoidThreshold = doc.value("literalVoidThreshold", false);
  cfg.exportMatrixMarket = doc.value("exportMatrixMarket", false);
  cfg.threads = doc.value("threads", 1);
  cfg.quiet = doc.value("quiet", false);

  if (doc.contains("overrides")) {
    const json& ov = doc["overrides"];
    check_keys(ov, {"epsilon", "lambda", "alphaVoid", "p", "scl", "dgt0", "volfrac"},
               "overrides");
    if (ov.contains("epsilon")) cfg.epsilon = ov["epsilon"].get<double>();
    if (ov.contains("lambda")) cfg.lambda = ov["lambda"].get<double>();
    if (ov.contains("alphaVoid")) cfg.alphaVoid = ov["alphaVoid"].get<double>();
    if (ov.contains("p")) cfg.p = ov["p"].get<int>();
    if (ov.contains("scl")) cfg.scl = ov["scl"].get<double>();
    if (ov.contains("dgt0")) cfg.dgt0 = ov["dgt0"].get<int>();
    if (ov.contains("volfrac")) cfg.volfrac = ov["volfrac"].get<double>();
  }
  return cfg;
}

std::string dump_problem_json(const std::string& name, int meshScale) {
  const ProblemDefinition p = builtin_problem(name, meshScale);
  json doc;
  doc["formatVersion"] = 1;
  doc["customProblem"] = problem_to_json(p);
  return doc.dump(2) + "\n";
}

}  // namespace mmc
