#include "mmc/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "mmc/element.hpp"
#include "mmc/io.hpp"
#include "mmc/load_path.hpp"
#include "mmc/mma.hpp"
#include "mmc/sensitivity.hpp"

#include <Eigen/SparseCholesky>

namespace mmc {

namespace {

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double lap() {
    const auto t1 = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(t1 - t0).count();
    t0 = t1;
    return s;
  }
};

Eigen::VectorXd pack3(const std::vector<Component3D>& comps,
                      const std::vector<int>& idx) {
  Eigen::VectorXd x(9 * static_cast<Eigen::Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) {
    const Component3D& c = comps[static_cast<size_t>(idx[i])];
    const Eigen::Index o = 9 * static_cast<Eigen::Index>(i);
    x(o + 0) = c.x0; x(o + 1) = c.y0; x(o + 2) = c.z0;
    x(o + 3) = c.L1; x(o + 4) = c.L2; x(o + 5) = c.L3;
    x(o + 6) = c.alpha; x(o + 7) = c.beta; x(o + 8) = c.gamma;
  }
  return x;
}

void unpack3(const Eigen::VectorXd& x, const std::vector<int>& idx,
             std::vector<Component3D>& comps) {
  for (size_t i = 0; i < idx.size(); ++i) {
    Component3D& c = comps[static_cast<size_t>(idx[i])];
    const Eigen::Index o = 9 * static_cast<Eigen::Index>(i);
    c.x0 = x(o + 0); c.y0 = x(o + 1); c.z0 = x(o + 2);
    c.L1 = x(o + 3); c.L2 = x(o + 4); c.L3 = x(o + 5);
    c.alpha = x(o + 6); c.beta = x(o + 7); c.gamma = x(o + 8);
  }
}

Eigen::VectorXd pack2(const std::vector<Component2D>& comps,
                      const std::vector<int>& idx) {
  Eigen::VectorXd x(6 * static_cast<Eigen::Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) {
    const Component2D& c = comps[static_cast<size_t>(idx[i])];
    const Eigen::Index o = 6 * static_cast<Eigen::Index>(i);
    x(o + 0) = c.x0; x(o + 1) = c.y0;
    x(o + 2) = c.L; x(o + 3) = c.t1; x(o + 4) = c.t2;
    x(o + 5) = c.theta;
  }
  return x;
}

void unpack2(const Eigen::VectorXd& x, const std::vector<int>& idx,
             std::vector<Component2D>& comps) {
  for (size_t i = 0; i < idx.size(); ++i) {
    Component2D& c = comps[static_cast<size_t>(idx[i])];
    const Eigen::Index o = 6 * static_cast<Eigen::Index>(i);
    c.x0 = x(o + 0); c.y0 = x(o + 1);
    c.L = x(o + 2); c.t1 = x(o + 3); c.t2 = x(o + 4);
    c.theta = x(o + 5);
  }
}

// Shared state for evaluating designs of one problem.
struct Context {
  const ProblemDefinition& prob;
  const Mesh& mesh;
  Points3 pts3;
  Points2 pts2;
  Assembler assembler;
  Eigen::MatrixXd keUnit, ke0;
  Eigen::VectorXd F, Fout;
  std::vector<char> freeMask;
  std::vector<int> freeDofs;
  SolveOptions solveOpts;
  double voidThreshold;
  bool mechanism;

  Context(const ProblemDefinition& p, SolverKind kind, double cgTol,
          bool literalThreshold)
      : prob(p), mesh(p.mesh), assembler(p.mesh) {
    if (mesh.is2d()) {
      pts2 = mesh.nodeCoords.leftCols<2>();
      keUnit = quad4_stiffness(1.0, p.poisson, p.thickness, mesh.hx, mesh.hy);
    } else {
      pts3 = mesh.nodeCoords;
      keUnit = hex8_stiffness(1.0, p.poisson, mesh.hx, mesh.hy, mesh.hz);
    }
    ke0 = p.youngsModulus * keUnit;
    F = p.loadVector();
    Fout = p.dummyLoadVector();
    freeMask = p.freeDofMask();
    for (int d = 0; d < mesh.nDof; ++d)
      if (freeMask[static_cast<size_t>(d)]) freeDofs.push_back(d);
    solveOpts.kind = kind != SolverKind::Auto
                         ? kind
                         : ((mesh.is2d() || mesh.nDof <= 30000) ? SolverKind::Direct
                                                                : SolverKind::Cg);
    solveOpts.tol = cgTol;
    voidThreshold = literalThreshold
                        ? p.heaviside.alphaVoid + p.heaviside.epsilon
                        : p.heaviside.alphaVoid + 1e-6;
    mechanism = p.objective == ObjectiveKind::OutputDisplacement;
  }

  Eigen::VectorXd tdf_column(const std::vector<Component3D>& c3,
                             const std::vector<Component2D>& c2, int ci) const {
    return mesh.is2d() ? tdf_eval_2d(c2[static_cast<size_t>(ci)], pts2, prob.tdf.p)
                       : tdf_eval_3d(c3[static_cast<size_t>(ci)], pts3, prob.tdf.p);
  }

  Eigen::MatrixXd tdf_gradient(const std::vector<Component3D>& c3,
                               const std::vector<Component2D>& c2, int ci) const {
    return mesh.is2d() ? tdf_grad_2d(c2[static_cast<size_t>(ci)], pts2, prob.tdf.p)
                       : tdf_grad_3d(c3[static_cast<size_t>(ci)], pts3, prob.tdf.p);
  }

  void add_springs() {
    for (const auto& s : prob.springs) assembler.add_to_diagonal(s.dof, s.stiffness);
  }
};

void check_ks_sandwich(const Eigen::MatrixXd& cols, const Eigen::VectorXd& phiMax,
                       double lambda) {
  const double bound = std::log(static_cast<double>(cols.cols())) / lambda;
  for (Eigen::Index i = 0; i < phiMax.size(); ++i) {
    const double mx = cols.row(i).maxCoeff();
    if (!(phiMax(i) >= mx) || !(phiMax(i) <= mx + bound))
      throw std::logic_error("K-S aggregate left the sandwich bounds");
  }
}

double min_half_dim(const ProblemDefinition& p, const std::vector<Component3D>& c3,
                    const std::vector<Component2D>& c2, int ci) {
  if (p.is2d()) {
    const auto& c = c2[static_cast<size_t>(ci)];
    return std::min({c.L, c.t1, c.t2});
  }
  const auto& c = c3[static_cast<size_t>(ci)];
  return std::min({c.L1, c.L2, c.L3});
}

Eigen::VectorXd gather(const Eigen::VectorXd& full, const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = full(idx[i]);
  return out;
}

void scatter(const Eigen::VectorXd& vals, const std::vector<int>& idx,
             Eigen::VectorXd& full) {
  for (size_t i = 0; i < idx.size(); ++i) full(idx[i]) = vals(static_cast<Eigen::Index>(i));
}

}  // namespace

ProblemDefinition resolve_problem(const RunConfig& config) {
  ProblemDefinition p = config.customProblem
                            ? *config.customProblem
                            : builtin_problem(config.problem, config.meshScale,
                                              config.meshOverride);
  if (config.epsilon) p.heaviside.epsilon = *config.epsilon;
  if (config.alphaVoid) p.heaviside.alphaVoid = *config.alphaVoid;
  if (config.lambda) p.tdf.lambda = *config.lambda;
  if (config.p) p.tdf.p = *config.p;
  if (config.scl) p.scl = *config.scl;
  if (config.dgt0) p.dgt0 = *config.dgt0;
  if (config.volfrac) p.volumeBound = *config.volfrac;
  if (p.tdf.p < 2 || p.tdf.p % 2 != 0)
    throw std::invalid_argument("TDF exponent p must be an even integer >= 2");
  return p;
}

RunResult run(const RunConfig& config) {
  RunResult res;
  res.problem = resolve_problem(config);
  const ProblemDefinition& prob = res.problem;
  const Mesh& mesh = prob.mesh;
  const int k = prob.varsPerComponent();
  const int nComps = prob.componentCount();
  const int nNd = static_cast<int>(prob.nonDesignTdfs.cols());

  Context ctx(prob, config.solver, config.cgTol, config.literalVoidThreshold);

  const bool writeFiles = !config.outDir.empty();
  std::ofstream histFile, timeFile;
  if (writeFiles) {
    std::filesystem::create_directories(config.outDir);
    histFile.open(config.outDir + "/history.csv");
    timeFile.open(config.outDir + "/timings.csv");
    if (!histFile || !timeFile)
      throw std::runtime_error("run: cannot open output files in " + config.outDir);
    write_history_header(histFile);
    write_timings_header(timeFile);
  }

  if (config.fdValidate) {
    const FdReport rep = fd_validate(prob, config.fdDelta);
    if (writeFiles) write_fd_csv(rep, config.outDir + "/fd_report.csv");
    if (!config.quiet)
      std::printf("fd_validate: max rel error objective %.3e, volume %.3e (%zu vars)\n",
                  rep.maxObjError, rep.maxVolError, rep.objective.size());
    res.comps3 = prob.init3d;
    res.comps2 = prob.init2d;
    res.active.assign(static_cast<size_t>(nComps), 1);
    return res;
  }

  res.comps3 = prob.init3d;
  res.comps2 = prob.init2d;
  res.active.assign(static_cast<size_t>(nComps), 1);
  std::vector<int> activeIdx(static_cast<size_t>(nComps));
  for (int i = 0; i < nComps; ++i) activeIdx[static_cast<size_t>(i)] = i;

  const VariableBounds fullBounds = variable_bounds(mesh, nComps);
  auto boundsFor = [&](const std::vector<int>& idx) {
    VariableBounds b;
    b.xmin.resize(static_cast<Eigen::Index>(idx.size()) * k);
    b.xmax.resize(static_cast<Eigen::Index>(idx.size()) * k);
    for (size_t i = 0; i < idx.size(); ++i)
      for (int j = 0; j < k; ++j) {
        b.xmin(static_cast<Eigen::Index>(i) * k + j) = fullBounds.xmin(idx[i] * k + j);
        b.xmax(static_cast<Eigen::Index>(i) * k + j) = fullBounds.xmax(idx[i] * k + j);
      }
    return b;
  };

  MmaState mma;
  mma.init(mesh.is2d() ? pack2(res.comps2, activeIdx) : pack3(res.comps3, activeIdx));
  VariableBounds bounds = boundsFor(activeIdx);
  MmaParams mmaParams;
  ConvergenceState conv;

  const Eigen::VectorXd& W = mesh.nodalVolume;
  const double domainVol = mesh.domainVolume;
  bool shownShift = false;

  try {
    for (int iter = 1; iter <= config.maxIter; ++iter) {
      IterationRecord rec;
      rec.iter = iter;
      Stopwatch sw;

      // ---- TDFs, pruning, gradients
      const int nActBefore = static_cast<int>(activeIdx.size());
      Eigen::MatrixXd phi(mesh.nNod, nActBefore);
      std::vector<double> minDims(static_cast<size_t>(nActBefore));
      for (int i = 0; i < nActBefore; ++i) {
        phi.col(i) = ctx.tdf_column(res.comps3, res.comps2, activeIdx[static_cast<size_t>(i)]);
        minDims[static_cast<size_t>(i)] =
            min_half_dim(prob, res.comps3, res.comps2, activeIdx[static_cast<size_t>(i)]);
      }
      const PruneResult pr =
          prune_components(minDims, phi, mesh.minSz, prob.heaviside.epsilon);
      rec.pruneFallback = pr.keptLastFallback;
      std::vector<int> keepPos;
      for (int i = 0; i < nActBefore; ++i)
        if (pr.active[static_cast<size_t>(i)]) keepPos.push_back(i);
      if (static_cast<int>(keepPos.size()) < nActBefore) {
        std::vector<int> newIdx, keepVars;
        Eigen::MatrixXd phiKept(mesh.nNod, static_cast<Eigen::Index>(keepPos.size()));
        for (size_t i = 0; i < keepPos.size(); ++i) {
          newIdx.push_back(activeIdx[static_cast<size_t>(keepPos[i])]);
          phiKept.col(static_cast<Eigen::Index>(i)) = phi.col(keepPos[i]);
          for (int j = 0; j < k; ++j) keepVars.push_back(keepPos[i] * k + j);
        }
        for (int ci : activeIdx) res.active[static_cast<size_t>(ci)] = 0;
        for (int ci : newIdx) res.active[static_cast<size_t>(ci)] = 1;
        activeIdx = newIdx;
        phi = phiKept;
        mma.remove_variables(keepVars);
        bounds = boundsFor(activeIdx);
        if (!config.quiet)
          std::printf("it %4d: pruned %d component(s), %zu remain%s\n", iter,
                      nActBefore - static_cast<int>(keepPos.size()), activeIdx.size(),
                      pr.keptLastFallback ? " (fallback: kept last)" : "");
      }
      const int nAct = static_cast<int>(activeIdx.size());
      rec.nActive = nAct;

      Eigen::MatrixXd grads(mesh.nNod, static_cast<Eigen::Index>(nAct) * k);
      for (int i = 0; i < nAct; ++i)
        grads.middleCols(static_cast<Eigen::Index>(i) * k, k) =
            ctx.tdf_gradient(res.comps3, res.comps2, activeIdx[static_cast<size_t>(i)]);

      Eigen::MatrixXd allCols(mesh.nNod, nAct + nNd);
      allCols.leftCols(nAct) = phi;
      if (nNd > 0) allCols.rightCols(nNd) = prob.nonDesignTdfs;

      const KsAggregate ks =
          ks_aggregate(allCols, prob.tdf.lambda, prob.tdf.expFloor);
      check_ks_sandwich(allCols, ks.phiMax, prob.tdf.lambda);

      const Eigen::VectorXd H = heaviside(ks.phiMax, prob.heaviside);
      const Eigen::VectorXd den = element_density(H, mesh);
      const double V = structural_volume(H, W);
      rec.volfrac = V / domainVol;
      rec.tTdf = sw.lap();

      // ---- load transmission path
      std::vector<std::vector<int>> coverages(static_cast<size_t>(nAct + nNd));
      for (int c = 0; c < nAct + nNd; ++c)
        coverages[static_cast<size_t>(c)] =
            component_coverage(allCols.col(c), mesh, prob.heaviside.epsilon);
      const auto graph = connectivity_graph(coverages);
      const LoadPathResult path = find_load_path(graph, coverages, prob.loadingElements,
                                                 prob.fixedElements);
      rec.pathExists = path.exists;
      rec.nPath = static_cast<int>(path.pathComponents.size());

      ReducedModel reduced;
      if (path.exists) {
        std::vector<int> compCols;
        for (int v : path.pathComponents)
          if (v < nAct) compCols.push_back(v);
        Eigen::MatrixXd pathCols(mesh.nNod,
                                 static_cast<Eigen::Index>(compCols.size()) + nNd);
        for (size_t i = 0; i < compCols.size(); ++i)
          pathCols.col(static_cast<Eigen::Index>(i)) = phi.col(compCols[i]);
        if (nNd > 0) pathCols.rightCols(nNd) = prob.nonDesignTdfs;
        reduced = reduced_model(pathCols, prob.tdf, prob.heaviside, mesh, ctx.freeMask,
                                ctx.voidThreshold);
        // keep every DOF the load vectors and springs act on
        std::vector<char> inSet(static_cast<size_t>(mesh.nDof), 0);
        for (int d : reduced.retainedFreeDofs) inSet[static_cast<size_t>(d)] = 1;
        auto force_elem = [&](int e) {
          for (int a = 0; a < mesh.nodesPerElem; ++a)
            for (int d = 0; d < mesh.dofPerNode; ++d) {
              const int dof = mesh.dofPerNode * mesh.elemNodes(e, a) + d;
              if (ctx.freeMask[static_cast<size_t>(dof)]) inSet[static_cast<size_t>(dof)] = 1;
            }
        };
        for (int e : prob.loadingElements) force_elem(e);
        for (const auto& s : prob.springs)
          if (ctx.freeMask[static_cast<size_t>(s.dof)]) inSet[static_cast<size_t>(s.dof)] = 1;
        reduced.retainedFreeDofs.clear();
        for (int d = 0; d < mesh.nDof; ++d)
          if (inSet[static_cast<size_t>(d)]) reduced.retainedFreeDofs.push_back(d);
      }
      rec.retainedDofFrac =
          path.exists ? static_cast<double>(reduced.retainedFreeDofs.size()) /
                            static_cast<double>(ctx.freeDofs.size())
                      : 1.0;
      rec.tSrch = sw.lap();

      // ---- FEA
      Eigen::VectorXd U = Eigen::VectorXd::Zero(mesh.nDof);
      Eigen::VectorXd Uout;
      if (ctx.mechanism) Uout = Eigen::VectorXd::Zero(mesh.nDof);
      SolveReport srep;
      const std::vector<int>& solveDofs =
          path.exists ? reduced.retainedFreeDofs : ctx.freeDofs;
      ctx.assembler.assemble(path.exists ? reduced.denSld : den, prob.youngsModulus,
                             ctx.keUnit);
      ctx.add_springs();
      {
        const Eigen::SparseMatrix<double> Ksub = ctx.assembler.restrict_to(solveDofs);
        Eigen::MatrixXd rhs(static_cast<Eigen::Index>(solveDofs.size()),
                            ctx.mechanism ? 2 : 1);
        rhs.col(0) = gather(ctx.F, solveDofs);
        if (ctx.mechanism) rhs.col(1) = gather(ctx.Fout, solveDofs);
        const Eigen::MatrixXd sol = solve_spd_multi(Ksub, rhs, ctx.solveOpts, &srep);
        scatter(sol.col(0), solveDofs, U);
        if (ctx.mechanism) scatter(sol.col(1), solveDofs, Uout);
      }
      rec.obj = ctx.mechanism ? compliance(ctx.Fout, U) : compliance(ctx.F, U);
      if (config.exportMatrixMarket && iter == 1 && writeFiles)
        write_matrix_market(ctx.assembler.restrict_to(solveDofs),
                            config.outDir + "/K_iter1.mtx");
      rec.tFer = sw.lap();

      if (!path.exists) {
        rec.objFull = rec.obj;
      } else if (config.compareFullDofs) {
        ctx.assembler.assemble(den, prob.youngsModulus, ctx.keUnit);
        ctx.add_springs();
        const Eigen::SparseMatrix<double> Kfree = ctx.assembler.restrict_to(ctx.freeDofs);
        Eigen::VectorXd Ufull = Eigen::VectorXd::Zero(mesh.nDof);
        const Eigen::VectorXd sol =
            solve_spd(Kfree, gather(ctx.F, ctx.freeDofs), ctx.solveOpts);
        scatter(sol, ctx.freeDofs, Ufull);
        rec.objFull = ctx.mechanism ? compliance(ctx.Fout, Ufull)
                                    : compliance(ctx.F, Ufull);
        rec.tFe = sw.lap();
      }
      if (!shownShift && !config.quiet) {
        std::printf("solver: %s, diag shift %.3e\n",
                    srep.usedDirect ? "direct LDLT" : "Jacobi-PCG", srep.diagShift);
        shownShift = true;
      }

      // ---- sensitivities
      const Eigen::VectorXd deltaH = heaviside_deriv(ks.phiMax, prob.heaviside);
      const Eigen::VectorXd engyNod = nodal_strain_energy(
          mesh, ctx.assembler.edofMat(), ctx.ke0, U, ctx.mechanism ? Uout : U);
      const Eigen::MatrixXd chainW =
          chain_weights(deltaH, ks.weights.leftCols(nAct), grads, k);
      Eigen::VectorXd df0dx = compliance_gradient(engyNod, chainW, prob.scl);
      Eigen::VectorXd dfdx = volume_gradient(W, chainW, domainVol);
      round_significant(df0dx, prob.dgt0);
      round_significant(dfdx, prob.dgt0);
      rec.tSens = sw.lap();

      // ---- MMA update and convergence metric
      const double f0val = rec.obj / prob.scl;
      const double fval = rec.volfrac - prob.volumeBound;
      const Eigen::VectorXd xnew = mma_update(mma, mmaParams, bounds.xmin, bounds.xmax,
                                              f0val, df0dx, fval, dfdx);
      if (mesh.is2d()) unpack2(xnew, activeIdx, res.comps2);
      else unpack3(xnew, activeIdx, res.comps3);
      update_convergence(conv, rec.obj, V, domainVol, prob.volumeBound);
      rec.objVr5 = conv.objVr5;
      rec.volErr = conv.volErr;
      rec.tUpdt = sw.lap();

      res.history.push_back(rec);
      if (writeFiles) {
        append_history(histFile, rec);
        append_timings(timeFile, rec);
        if (config.vtkEvery > 0 && iter % config.vtkEvery == 0) {
          char name[64];
          std::snprintf(name, sizeof(name), "/iter_%04d.vtk", iter);
          export_vtk(mesh, den, config.outDir + name);
        }
      }
      if (!config.quiet)
        std::printf("it %4d  obj %12.6g  vol %.4f  objVr5 %9.3e  act %3d  path %d  dofs %.3f\n",
                    iter, rec.obj, rec.volfrac, rec.objVr5, nAct, rec.pathExists ? 1 : 0,
                    rec.retainedDofFrac);

      res.finalObjective = rec.obj;
      res.finalVolumeFrac = rec.volfrac;
      if (conv.objVr5 < config.tol) {
        res.convergedFlag = true;
        break;
      }
    }
  } catch (...) {
    if (writeFiles) {
      std::ofstream cj(config.outDir + "/components.json");
      cj << components_to_json(res.comps3, res.comps2, res.active);
    }
    throw;
  }

  if (writeFiles) {
    // density field of the final design
    std::vector<int> idx;
    for (int i = 0; i < nComps; ++i)
      if (res.active[static_cast<size_t>(i)]) idx.push_back(i);
    Eigen::MatrixXd cols(mesh.nNod, static_cast<Eigen::Index>(idx.size()) + nNd);
    for (size_t i = 0; i < idx.size(); ++i)
      cols.col(static_cast<Eigen::Index>(i)) = ctx.tdf_column(res.comps3, res.comps2, idx[i]);
    if (nNd > 0) cols.rightCols(nNd) = prob.nonDesignTdfs;
    const KsAggregate ks = ks_aggregate(cols, prob.tdf.lambda, prob.tdf.expFloor);
    const Eigen::VectorXd den = element_density(heaviside(ks.phiMax, prob.heaviside), mesh);
    export_vtk(mesh, den, config.outDir + "/final.vtk");
    std::ofstream cj(config.outDir + "/components.json");
    cj << components_to_json(res.comps3, res.comps2, res.active);
  }
  return res;
}

FdReport fd_validate(const ProblemDefinition& prob, double delta) {
  if (!(delta > 0)) throw std::invalid_argument("fd_validate: delta must be > 0");
  if (prob.mesh.nDof > 50000)
    throw std::invalid_argument("fd_validate: mesh too large (> 5e4 DOFs)");

  Context ctx(prob, SolverKind::Direct, 1e-8, false);
  const Mesh& mesh = prob.mesh;
  const int k = prob.varsPerComponent();
  const int nComps = prob.componentCount();
  const int nNd = static_cast<int>(prob.nonDesignTdfs.cols());
  std::vector<int> idx(static_cast<size_t>(nComps));
  for (int i = 0; i < nComps; ++i) idx[static_cast<size_t>(i)] = i;

  // One factorization object so the elimination ordering, and with it the
  // rounding path, is identical across all perturbed solves. No diagonal
  // shift here: it would vary with the design and bias the differences,
  // and K is already positive definite for alphaVoid > 0.
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analyzed = false;

  struct Eval {
    double scaledObj;
    double volfrac;
  };
  auto evaluate = [&](const std::vector<Component3D>& c3,
                      const std::vector<Component2D>& c2) -> Eval {
    Eigen::MatrixXd cols(mesh.nNod, nComps + nNd);
    for (int i = 0; i < nComps; ++i) cols.col(i) = ctx.tdf_column(c3, c2, i);
    if (nNd > 0) cols.rightCols(nNd) = prob.nonDesignTdfs;
    const KsAggregate ks = ks_aggregate(cols, prob.tdf.lambda, prob.tdf.expFloor);
    const Eigen::VectorXd H = heaviside(ks.phiMax, prob.heaviside);
    const Eigen::VectorXd den = element_density(H, mesh);
    ctx.assembler.assemble(den, prob.youngsModulus, ctx.keUnit);
    ctx.add_springs();
    const Eigen::SparseMatrix<double> Kfree = ctx.assembler.restrict_to(ctx.freeDofs);
    if (!analyzed) {
      ldlt.analyzePattern(Kfree);
      analyzed = true;
    }
    ldlt.factorize(Kfree);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("fd_validate: factorization failed");
    const Eigen::VectorXd u = ldlt.solve(gather(ctx.F, ctx.freeDofs));
    double obj;
    if (ctx.mechanism) obj = gather(ctx.Fout, ctx.freeDofs).dot(u);
    else obj = gather(ctx.F, ctx.freeDofs).dot(u);
    return {obj / prob.scl, structural_volume(H, mesh.nodalVolume) / mesh.domainVolume};
  };

  // analytic gradients at the base design, full free-DOF model, unrounded
  Eigen::VectorXd df0dx, dfdx;
  {
    Eigen::MatrixXd cols(mesh.nNod, nComps + nNd);
    Eigen::MatrixXd grads(mesh.nNod, static_cast<Eigen::Index>(nComps) * k);
    for (int i = 0; i < nComps; ++i) {
      cols.col(i) = ctx.tdf_column(prob.init3d, prob.init2d, i);
      grads.middleCols(static_cast<Eigen::Index>(i) * k, k) =
          ctx.tdf_gradient(prob.init3d, prob.init2d, i);
    }
    if (nNd > 0) cols.rightCols(nNd) = prob.nonDesignTdfs;
    const KsAggregate ks = ks_aggregate(cols, prob.tdf.lambda, prob.tdf.expFloor);
    const Eigen::VectorXd H = heaviside(ks.phiMax, prob.heaviside);
    const Eigen::VectorXd den = element_density(H, mesh);
    ctx.assembler.assemble(den, prob.youngsModulus, ctx.keUnit);
    ctx.add_springs();
    const Eigen::SparseMatrix<double> Kfree = ctx.assembler.restrict_to(ctx.freeDofs);
    if (!analyzed) {
      ldlt.analyzePattern(Kfree);
      analyzed = true;
    }
    ldlt.factorize(Kfree);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("fd_validate: factorization failed");
    Eigen::VectorXd U = Eigen::VectorXd::Zero(mesh.nDof);
    scatter(ldlt.solve(gather(ctx.F, ctx.freeDofs)), ctx.freeDofs, U);
    Eigen::VectorXd Uadj = U;
    if (ctx.mechanism) {
      Uadj = Eigen::VectorXd::Zero(mesh.nDof);
      scatter(ldlt.solve(gather(ctx.Fout, ctx.freeDofs)), ctx.freeDofs, Uadj);
    }
    const Eigen::VectorXd deltaH = heaviside_deriv(ks.phiMax, prob.heaviside);
    const Eigen::VectorXd engyNod =
        nodal_strain_energy(mesh, ctx.assembler.edofMat(), ctx.ke0, U, Uadj);
    const Eigen::MatrixXd chainW =
        chain_weights(deltaH, ks.weights.leftCols(nComps), grads, k);
    df0dx = compliance_gradient(engyNod, chainW, prob.scl);
    dfdx = volume_gradient(mesh.nodalVolume, chainW, mesh.domainVolume);
  }

  FdReport rep;
  const Eigen::Index nVars = df0dx.size();
  Eigen::VectorXd x0 = mesh.is2d() ? pack2(prob.init2d, idx) : pack3(prob.init3d, idx);
  std::vector<Component3D> c3 = prob.init3d;
  std::vector<Component2D> c2 = prob.init2d;
  auto relErr = [](double a, double b) {
    const double scale = std::max({std::fabs(a), std::fabs(b), 1e-10});
    return (std::fabs(a) < 1e-10 && std::fabs(b) < 1e-10) ? 0.0
                                                          : std::fabs(a - b) / scale;
  };
  for (Eigen::Index v = 0; v < nVars; ++v) {
    Eigen::VectorXd xp = x0, xm = x0;
    xp(v) += delta;
    xm(v) -= delta;
    if (mesh.is2d()) unpack2(xp, idx, c2);
    else unpack3(xp, idx, c3);
    const Eval ep = evaluate(c3, c2);
    if (mesh.is2d()) unpack2(xm, idx, c2);
    else unpack3(xm, idx, c3);
    const Eval em = evaluate(c3, c2);
    if (mesh.is2d()) unpack2(x0, idx, c2);
    else unpack3(x0, idx, c3);

    const double fdObj = (ep.scaledObj - em.scaledObj) / (2.0 * delta);
    const double fdVol = (ep.volfrac - em.volfrac) / (2.0 * delta);
    FdRow ro{static_cast<int>(v), df0dx(v), fdObj, relErr(df0dx(v), fdObj)};
    FdRow rv{static_cast<int>(v), dfdx(v), fdVol, relErr(dfdx(v), fdVol)};
    rep.objective.push_back(ro);
    rep.volume.push_back(rv);
    rep.maxObjError = std::max(rep.maxObjError, ro.relError);
    rep.maxVolError = std::max(rep.maxVolError, rv.relError);
  }
  return rep;
}

void write_fd_csv(const FdReport& rep, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_fd_csv: cannot open " + path);
  f << "variable,analyticObj,fdObj,relErrObj,analyticVol,fdVol,relErrVol\n";
  char line[256];
  for (size_t i = 0; i < rep.objective.size(); ++i) {
    const FdRow& o = rep.objective[i];
    const FdRow& v = rep.volume[i];
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.3e,%.17g,%.17g,%.3e\n",
                  o.varIndex, o.analytic, o.fd, o.relError, v.analytic, v.fd,
                  v.relError);
    f << line;
  }
}

}  // namespace mmc
