#include "mmc/fem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mmc {

Assembler::Assembler(const Mesh& mesh) : mesh_(&mesh) {
  const int npe = mesh.nodesPerElem, dpn = mesh.dofPerNode;
  const int ndofe = npe * dpn;
  edofMat_.resize(mesh.nEle, ndofe);
  for (int e = 0; e < mesh.nEle; ++e)
    for (int a = 0; a < npe; ++a)
      for (int d = 0; d < dpn; ++d)
        edofMat_(e, a * dpn + d) = dpn * mesh.elemNodes(e, a) + d;

  // fix the pattern once from zero-valued triplets
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(mesh.nEle) * ndofe * ndofe + mesh.nDof);
  for (int e = 0; e < mesh.nEle; ++e)
    for (int a = 0; a < ndofe; ++a)
      for (int b = 0; b < ndofe; ++b)
        trip.emplace_back(edofMat_(e, a), edofMat_(e, b), 0.0);
  for (int d = 0; d < mesh.nDof; ++d) trip.emplace_back(d, d, 0.0);
  K_.resize(mesh.nDof, mesh.nDof);
  K_.setFromTriplets(trip.begin(), trip.end());
  K_.makeCompressed();
  trip.clear();
  trip.shrink_to_fit();

  // map every element entry to its slot in the compressed value array
  const auto* outer = K_.outerIndexPtr();
  const auto* inner = K_.innerIndexPtr();
  auto slot_of = [&](int row, int col) -> std::int64_t {
    const auto* begin = inner + outer[col];
    const auto* end = inner + outer[col + 1];
    const auto* it = std::lower_bound(begin, end, row);
    return outer[col] + (it - begin);
  };
  scatter_.resize(static_cast<size_t>(mesh.nEle) * ndofe * ndofe);
  std::int64_t idx = 0;
  for (int e = 0; e < mesh.nEle; ++e)
    for (int a = 0; a < ndofe; ++a)
      for (int b = 0; b < ndofe; ++b)
        scatter_[static_cast<size_t>(idx++)] = slot_of(edofMat_(e, a), edofMat_(e, b));
  diagSlot_.resize(static_cast<size_t>(mesh.nDof));
  for (int d = 0; d < mesh.nDof; ++d) diagSlot_[static_cast<size_t>(d)] = slot_of(d, d);
}

void Assembler::assemble(const Eigen::VectorXd& elemDensity, double E,
                         const Eigen::MatrixXd& keUnit) {
  const int ndofe = static_cast<int>(edofMat_.cols());
  if (elemDensity.size() != mesh_->nEle)
    throw std::invalid_argument("assemble: density size mismatch");
  if (keUnit.rows() != ndofe || keUnit.cols() != ndofe)
    throw std::invalid_argument("assemble: element matrix size mismatch");

  double* vals = K_.valuePtr();
  std::fill(vals, vals + K_.nonZeros(), 0.0);
  std::vector<double> keFlat(static_cast<size_t>(ndofe) * ndofe);
  for (int a = 0; a < ndofe; ++a)
    for (int b = 0; b < ndofe; ++b)
      keFlat[static_cast<size_t>(a) * ndofe + b] = keUnit(a, b);

  const std::int64_t perElem = static_cast<std::int64_t>(ndofe) * ndofe;
  for (int e = 0; e < mesh_->nEle; ++e) {
    const double s = elemDensity(e) * E;
    const std::int64_t base = perElem * e;
    for (std::int64_t q = 0; q < perElem; ++q)
      vals[scatter_[static_cast<size_t>(base + q)]] += s * keFlat[static_cast<size_t>(q)];
  }
}

void Assembler::add_to_diagonal(int dof, double value) {
  K_.valuePtr()[diagSlot_[static_cast<size_t>(dof)]] += value;
}

Eigen::SparseMatrix<double> Assembler::restrict_to(const std::vector<int>& dofs) const {
  const int n = static_cast<int>(dofs.size());
  std::vector<int> map(static_cast<size_t>(mesh_->nDof), -1);
  for (int i = 0; i < n; ++i) map[static_cast<size_t>(dofs[static_cast<size_t>(i)])] = i;

  Eigen::SparseMatrix<double> R(n, n);
  const auto* outer = K_.outerIndexPtr();
  const auto* inner = K_.innerIndexPtr();
  const auto* vals = K_.valuePtr();

  Eigen::VectorXi counts(n);
  for (int j = 0; j < n; ++j) {
    const int col = dofs[static_cast<size_t>(j)];
    int c = 0;
    for (auto q = outer[col]; q < outer[col + 1]; ++q)
      if (map[static_cast<size_t>(inner[q])] >= 0) ++c;
    counts(j) = c;
  }
  R.reserve(counts);
  for (int j = 0; j < n; ++j) {
    const int col = dofs[static_cast<size_t>(j)];
    for (auto q = outer[col]; q < outer[col + 1]; ++q) {
      const int r = map[static_cast<size_t>(inner[q])];
      if (r >= 0) R.insert(r, j) = vals[q];
    }
  }
  R.makeCompressed();
  return R;
}

Eigen::MatrixXd solve_spd_multi(const Eigen::SparseMatrix<double>& K,
                                const Eigen::MatrixXd& F, const SolveOptions& opts,
                                SolveReport* report) {
  const Eigen::Index n = K.rows();
  if (n == 0) return Eigen::MatrixXd(0, F.cols());

  double maxDiag = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) maxDiag = std::max(maxDiag, K.coeff(i, i));
  const double shift = opts.diagShiftRel * maxDiag;

  Eigen::SparseMatrix<double> A = K;
  if (shift > 0) {
    Eigen::SparseMatrix<double> I(n, n);
    I.setIdentity();
    A += shift * I;
  }

  const bool direct = opts.kind == SolverKind::Direct ||
                      (opts.kind == SolverKind::Auto && n <= 20000);
  Eigen::MatrixXd U(n, F.cols());
  int iterations = 0;
  if (direct) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("solve_spd: LDLT factorization failed (matrix not SPD?)");
    U = ldlt.solve(F);
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                             Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(opts.tol);
    cg.setMaxIterations(static_cast<Eigen::Index>(opts.maxIterPerDof) * n);
    cg.compute(A);
    for (Eigen::Index c = 0; c < F.cols(); ++c) {
      U.col(c) = cg.solve(F.col(c));
      iterations += static_cast<int>(cg.iterations());
      if (cg.info() != Eigen::Success) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "solve_spd: CG did not converge (relative residual %.3e after %ld iterations)",
                      cg.error(), static_cast<long>(cg.iterations()));
        throw std::runtime_error(msg);
      }
    }
  }

  double worst = 0.0;
  for (Eigen::Index c = 0; c < F.cols(); ++c) {
    const double fn = F.col(c).norm();
    if (fn > 0) worst = std::max(worst, (A * U.col(c) - F.col(c)).norm() / fn);
  }
  if (report) {
    report->relResidual = worst;
    report->iterations = iterations;
    report->diagShift = shift;
    report->usedDirect = direct;
  }
  return U;
}

Eigen::VectorXd solve_spd(const Eigen::SparseMatrix<double>& K,
                          const Eigen::VectorXd& f, const SolveOptions& opts,
                          SolveReport* report) {
  return solve_spd_multi(K, f, opts, report).col(0);
}

Eigen::VectorXd nodal_strain_energy(const Mesh& mesh, const Eigen::MatrixXi& edofMat,
                                    const Eigen::MatrixXd& ke0,
                                    const Eigen::VectorXd& u,
                                    const Eigen::VectorXd& v) {
  const int npe = mesh.nodesPerElem;
  const int ndofe = static_cast<int>(edofMat.cols());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mesh.nNod);
  Eigen::VectorXd ue(ndofe), ve(ndofe);
  for (int e = 0; e < mesh.nEle; ++e) {
    for (int a = 0; a < ndofe; ++a) {
      ue(a) = u(edofMat(e, a));
      ve(a) = v(edofMat(e, a));
    }
    const double q = ue.dot(ke0 * ve) / npe;
    for (int a = 0; a < npe; ++a) out(mesh.elemNodes(e, a)) += q;
  }
  return out;
}

void write_matrix_market(const Eigen::SparseMatrix<double>& K,
                         const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_matrix_market: cannot open " + path);
  f << "%%MatrixMarket matrix coordinate real general\n";
  f << K.rows() << " " << K.cols() << " " << K.nonZeros() << "\n";
  char line[64];
  for (int j = 0; j < K.outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, j); it; ++it) {
      std::snprintf(line, sizeof(line), "%ld %ld %.17g\n",
                    static_cast<long>(it.row() + 1), static_cast<long>(it.col() + 1),
                    it.value());
      f << line;
    }
  if (!f) throw std::runtime_error("write_matrix_market: write failed for " + path);
}

}  // namespace mmc
