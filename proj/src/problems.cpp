#include "mmc/problems.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace mmc {

Eigen::VectorXd ProblemDefinition::loadVector() const {
  Eigen::VectorXd F = Eigen::VectorXd::Zero(mesh.nDof);
  for (const auto& l : loads) F(l.dof) += l.value;
  return F;
}

Eigen::VectorXd ProblemDefinition::dummyLoadVector() const {
  Eigen::VectorXd F = Eigen::VectorXd::Zero(mesh.nDof);
  for (const auto& l : dummyLoads) F(l.dof) += l.value;
  return F;
}

std::vector<char> ProblemDefinition::freeDofMask() const {
  std::vector<char> mask(static_cast<size_t>(mesh.nDof), 1);
  for (int d : fixedDofs) mask[static_cast<size_t>(d)] = 0;
  return mask;
}

std::vector<double> range_by(double start, double step, double stop) {
  std::vector<double> out;
  const double tol = 1e-9 * std::max(1.0, std::fabs(stop));
  for (double v = start; v <= stop + tol; v += step) out.push_back(v);
  return out;
}

std::vector<Component3D> lattice_init(const LatticeSpec& spec) {
  if (spec.xs.empty() || spec.ys.empty() || spec.zs.empty() || spec.replicas < 1)
    throw std::invalid_argument("lattice_init: empty site grid");
  std::vector<Component3D> comps;
  comps.reserve(spec.xs.size() * spec.ys.size() * spec.zs.size() *
                static_cast<size_t>(spec.replicas));
  size_t k = 0;
  auto sign = [](const std::vector<int>& cycle, size_t idx) {
    return cycle.empty() ? 1 : cycle[idx % cycle.size()];
  };
  for (double x : spec.xs)
    for (double z : spec.zs)
      for (int r = 0; r < spec.replicas; ++r)
        for (double y : spec.ys) {
          Component3D c;
          c.x0 = x; c.y0 = y; c.z0 = z;
          c.L1 = spec.L1; c.L2 = spec.L2; c.L3 = spec.L3;
          c.alpha = sign(spec.alphaSigns, k) * spec.alpha;
          c.beta = sign(spec.betaSigns, k) * spec.beta;
          c.gamma = sign(spec.gammaSigns, k) * spec.gamma;
          comps.push_back(c);
          ++k;
        }
  return comps;
}

std::vector<Component2D> lattice_init_2d(const LatticeSpec2D& spec) {
  if (spec.xs.empty() || spec.ys.empty() || spec.replicas < 1)
    throw std::invalid_argument("lattice_init_2d: empty site grid");
  std::vector<Component2D> comps;
  size_t k = 0;
  auto sign = [](const std::vector<int>& cycle, size_t idx) {
    return cycle.empty() ? 1 : cycle[idx % cycle.size()];
  };
  for (double x : spec.xs)
    for (double y : spec.ys)
      for (int r = 0; r < spec.replicas; ++r) {
        Component2D c;
        c.x0 = x; c.y0 = y;
        c.L = spec.L; c.t1 = spec.t1; c.t2 = spec.t2;
        c.theta = sign(spec.thetaSigns, k) * spec.theta;
        comps.push_back(c);
        ++k;
      }
  return comps;
}

namespace {

int scaled(int n, int scale, const char* what) {
  if (n % scale != 0)
    throw std::invalid_argument(std::string("meshScale does not divide ") + what);
  return n / scale;
}

// all elements containing grid node (i, j, k)
void elements_containing_node(const Mesh& m, int i, int j, int k,
                              std::set<int>& out) {
  for (int dk = (m.is2d() ? 0 : -1); dk <= 0; ++dk)
    for (int dj = -1; dj <= 0; ++dj)
      for (int di = -1; di <= 0; ++di) {
        const int ei = i + di, ej = j + dj, ek = m.is2d() ? 0 : k + dk;
        if (ei < 0 || ei >= m.nelx || ej < 0 || ej >= m.nely) continue;
        if (!m.is2d() && (ek < 0 || ek >= m.nelz)) continue;
        out.insert(m.elemIndex(ei, ej, ek));
      }
}

void finalize_dofs(ProblemDefinition& p, std::set<int>& fixed) {
  p.fixedDofs.assign(fixed.begin(), fixed.end());
  for (const auto& l : p.loads)
    if (fixed.count(l.dof))
      throw std::logic_error(p.name + ": load applied to a fixed DOF");
  for (const auto& l : p.dummyLoads)
    if (fixed.count(l.dof))
      throw std::logic_error(p.name + ": dummy load applied to a fixed DOF");
}

ProblemDefinition cantilever3d(int scale, std::array<int, 3> mo) {
  ProblemDefinition p;
  p.name = "cantilever3d";
  const int nelx = mo[0] ? mo[0] : scaled(128, scale, "nelx");
  const int nely = mo[1] ? mo[1] : scaled(16, scale, "nely");
  const int nelz = mo[2] ? mo[2] : scaled(64, scale, "nelz");
  if (nely % 2 || nelz % 2)
    throw std::invalid_argument("cantilever3d: nely and nelz must be even");
  p.mesh = build_mesh(nelx, nely, nelz, 64.0, 8.0, 32.0);
  p.volumeBound = 0.3;
  p.heaviside = {0.25, 1e-3};

  std::set<int> fixed;
  for (int k = 0; k <= nelz; ++k)
    for (int j = 0; j <= nely; ++j) {
      const int n = p.mesh.nodeIndex(0, j, k);
      fixed.insert(3 * n); fixed.insert(3 * n + 1); fixed.insert(3 * n + 2);
    }
  for (int k = 0; k < nelz; ++k)
    for (int j = 0; j < nely; ++j) p.fixedElements.push_back(p.mesh.elemIndex(0, j, k));

  const int loadNode = p.mesh.nodeIndex(nelx, nely / 2, nelz / 2);
  p.loads.push_back({3 * loadNode + 2, -1.0});
  std::set<int> le;
  elements_containing_node(p.mesh, nelx, nely / 2, nelz / 2, le);
  p.loadingElements.assign(le.begin(), le.end());
  finalize_dofs(p, fixed);

  LatticeSpec ls;
  ls.xs = range_by(8.0, 16.0, 64.0);
  ls.ys = range_by(4.0, 8.0, 8.0);
  ls.zs = range_by(8.0, 16.0, 32.0);
  ls.replicas = 2;
  ls.L1 = 12.0; ls.L2 = 2.5; ls.L3 = 2.0;
  ls.alpha = 0.0; ls.beta = std::atan(1.0); ls.gamma = 0.0;
  ls.betaSigns = {1, -1};
  ls.gammaSigns = {1, 1, -1, -1};
  p.init3d = lattice_init(ls);
  return p;
}

ProblemDefinition mbb3d(int scale, std::array<int, 3> mo) {
  ProblemDefinition p;
  p.name = "mbb3d";
  const int nelx = mo[0] ? mo[0] : scaled(60, scale, "nelx");
  const int nely = mo[1] ? mo[1] : scaled(10, scale, "nely");
  const int nelz = mo[2] ? mo[2] : scaled(20, scale, "nelz");
  p.mesh = build_mesh(nelx, nely, nelz, 3.0, 0.5, 1.0);
  p.volumeBound = 0.25;
  p.heaviside = {0.2, 1e-3};

  std::set<int> fixed;
  // symmetry plane x = 0: normal displacement fixed
  for (int k = 0; k <= nelz; ++k)
    for (int j = 0; j <= nely; ++j) fixed.insert(3 * p.mesh.nodeIndex(0, j, k));
  // symmetry plane y = DW
  for (int k = 0; k <= nelz; ++k)
    for (int i = 0; i <= nelx; ++i) fixed.insert(3 * p.mesh.nodeIndex(i, nely, k) + 1);
  // pinned corner (DL, 0, 0)
  const int pin = p.mesh.nodeIndex(nelx, 0, 0);
  fixed.insert(3 * pin); fixed.insert(3 * pin + 1); fixed.insert(3 * pin + 2);
  p.fixedElements = {p.mesh.elemIndex(nelx - 1, 0, 0)};

  const int loadNode = p.mesh.nodeIndex(0, nely, nelz);
  p.loads.push_back({3 * loadNode + 2, -0.25});
  p.loadingElements = {p.mesh.elemIndex(0, nely - 1, nelz - 1)};
  finalize_dofs(p, fixed);

  LatticeSpec ls;
  ls.xs = range_by(0.5, 1.0, 3.0);
  ls.ys = range_by(0.25, 0.5, 0.5);
  ls.zs = range_by(0.25, 0.5, 1.0);
  ls.replicas = 4;
  ls.L1 = 0.7; ls.L2 = 0.08; ls.L3 = 0.08;
  ls.alpha = std::atan(0.5); ls.beta = std::atan(0.5); ls.gamma = std::atan(-0.5);
  ls.betaSigns = {1, -1};
  ls.gammaSigns = {1, 1, -1, -1};
  p.init3d = lattice_init(ls);
  return p;
}

ProblemDefinition torsion3d(int scale, std::array<int, 3> mo) {
  ProblemDefinition p;
  p.name = "torsion3d";
  const int nelx = mo[0] ? mo[0] : scaled(96, scale, "nelx");
  const int nely = mo[1] ? mo[1] : scaled(32, scale, "nely");
  const int nelz = mo[2] ? mo[2] : scaled(32, scale, "nelz");
  p.mesh = build_mesh(nelx, nely, nelz, 12.0, 4.0, 4.0);
  p.volumeBound = 0.15;
  p.heaviside = {0.5, 1e-3};
  p.scl = 1000.0;

  std::set<int> fixed;
  for (int k = 0; k <= nelz; ++k)
    for (int j = 0; j <= nely; ++j) {
      const int n = p.mesh.nodeIndex(0, j, k);
      fixed.insert(3 * n); fixed.insert(3 * n + 1); fixed.insert(3 * n + 2);
    }
  for (int k = 0; k < nelz; ++k)
    for (int j = 0; j < nely; ++j) p.fixedElements.push_back(p.mesh.elemIndex(0, j, k));

  // corner forces on the free face forming a pure torque
  struct Corner { int j, k; double fy, fz; };
  const Corner corners[4] = {{0, 0, 1, -1},
                             {nely, 0, 1, 1},
                             {0, nelz, -1, -1},
                             {nely, nelz, -1, 1}};
  std::set<int> le;
  for (const auto& c : corners) {
    const int n = p.mesh.nodeIndex(nelx, c.j, c.k);
    p.loads.push_back({3 * n + 1, c.fy});
    p.loads.push_back({3 * n + 2, c.fz});
    elements_containing_node(p.mesh, nelx, c.j, c.k, le);
  }
  p.loadingElements.assign(le.begin(), le.end());
  finalize_dofs(p, fixed);

  // non-design faces, 0.25 thick, on the fixed and the loaded ends
  const int nLayers = std::max(1, static_cast<int>(std::lround(0.25 / p.mesh.hx)));
  p.nonDesignTdfs = -Eigen::MatrixXd::Ones(p.mesh.nNod, 2);
  for (int k = 0; k <= nelz; ++k)
    for (int j = 0; j <= nely; ++j)
      for (int l = 0; l <= nLayers; ++l) {
        p.nonDesignTdfs(p.mesh.nodeIndex(l, j, k), 0) = 1.0;
        p.nonDesignTdfs(p.mesh.nodeIndex(nelx - l, j, k), 1) = 1.0;
      }

  LatticeSpec ls;
  ls.xs = range_by(1.0, 2.0, 12.0);
  ls.ys = range_by(0.5, 1.0, 4.0);
  ls.zs = range_by(0.5, 1.0, 4.0);
  ls.replicas = 1;
  ls.L1 = 1.2; ls.L2 = 0.2; ls.L3 = 0.2;
  ls.alpha = 0.0; ls.beta = std::asin(0.4); ls.gamma = std::asin(-0.4);
  // per x-slab: beta alternates sign with z, gamma with y; both flip per slab
  ls.betaSigns.clear();
  ls.gammaSigns.clear();
  for (int ix = 0; ix < 2; ++ix)
    for (int iz = 0; iz < 4; ++iz)
      for (int iy = 0; iy < 4; ++iy) {
        ls.betaSigns.push_back(((ix + iz) % 2 == 0) ? 1 : -1);
        ls.gammaSigns.push_back(((ix + iy) % 2 == 0) ? 1 : -1);
      }
  p.init3d = lattice_init(ls);
  return p;
}

ProblemDefinition mechanism3d(int scale, std::array<int, 3> mo, bool secondInit) {
  ProblemDefinition p;
  p.name = secondInit ? "mechanism3d_v2" : "mechanism3d_v1";
  const int nelx = mo[0] ? mo[0] : scaled(200, scale, "nelx");
  const int nely = mo[1] ? mo[1] : scaled(20, scale, "nely");
  const int nelz = mo[2] ? mo[2] : scaled(100, scale, "nelz");
  if (nelz % 5)
    throw std::invalid_argument("mechanism3d: nelz must be divisible by 5");
  p.mesh = build_mesh(nelx, nely, nelz, 10.0, 1.0, 5.0);
  p.volumeBound = 0.2;
  p.heaviside = {0.2, 1e-3};
  p.objective = ObjectiveKind::OutputDisplacement;

  std::set<int> fixed;
  // symmetry plane y = DW
  for (int k = 0; k <= nelz; ++k)
    for (int i = 0; i <= nelx; ++i) fixed.insert(3 * p.mesh.nodeIndex(i, nely, k) + 1);
  // symmetry plane z = DH
  for (int j = 0; j <= nely; ++j)
    for (int i = 0; i <= nelx; ++i) fixed.insert(3 * p.mesh.nodeIndex(i, j, nelz) + 2);
  // clamped patch on the left face, lowest fifth
  const int kTop = nelz / 5;
  for (int k = 0; k <= kTop; ++k)
    for (int j = 0; j <= nely; ++j) {
      const int n = p.mesh.nodeIndex(0, j, k);
      fixed.insert(3 * n); fixed.insert(3 * n + 1); fixed.insert(3 * n + 2);
    }
  for (int k = 0; k < kTop; ++k)
    for (int j = 0; j < nely; ++j) p.fixedElements.push_back(p.mesh.elemIndex(0, j, k));

  const int inNode = p.mesh.nodeIndex(0, nely, nelz);
  const int outNode = p.mesh.nodeIndex(nelx, nely, nelz);
  p.loads.push_back({3 * inNode, 0.25});
  p.dummyLoads.push_back({3 * outNode, 1.0});
  p.springs.push_back({3 * inNode, 0.1 / 4.0});
  p.springs.push_back({3 * outNode, 0.1 / 4.0});
  p.loadingElements = {p.mesh.elemIndex(0, nely - 1, nelz - 1),
                       p.mesh.elemIndex(nelx - 1, nely - 1, nelz - 1)};
  finalize_dofs(p, fixed);

  LatticeSpec ls;
  if (!secondInit) {
    ls.xs = range_by(5.0 / 3.0, 10.0 / 3.0, 10.0);
    ls.ys = range_by(1.0, 2.0, 1.0);
    ls.zs = range_by(5.0 / 4.0, 5.0 / 2.0, 5.0);
    ls.replicas = 2;
    ls.L1 = 2.0; ls.L2 = 0.5; ls.L3 = 0.25;
    ls.alpha = 0.0; ls.beta = std::atan(0.75); ls.gamma = 0.0;
    ls.betaSigns = {1, -1};
    ls.gammaSigns = {1, 1, -1, -1};
  } else {
    ls.xs = range_by(5.0 / 6.0, 5.0 / 3.0, 10.0);
    ls.ys = range_by(0.25, 0.5, 1.0);
    ls.zs = range_by(5.0 / 8.0, 5.0 / 4.0, 5.0);
    ls.replicas = 1;
    ls.L1 = 1.2; ls.L2 = 0.2; ls.L3 = 0.2;
    ls.alpha = std::atan(2.5); ls.beta = std::atan(0.75); ls.gamma = std::atan(0.3);
    ls.betaSigns = {-1, -1, 1, 1, -1, -1, 1, 1, 1, 1, -1, -1, 1, 1, -1, -1};
    ls.gammaSigns = {1, -1, 1, -1, 1, -1, 1, -1, -1, 1, -1, 1, -1, 1, -1, 1};
  }
  p.init3d = lattice_init(ls);
  return p;
}

ProblemDefinition cantilever2d(int scale, std::array<int, 3> mo) {
  ProblemDefinition p;
  p.name = "cantilever2d";
  const int nelx = mo[0] ? mo[0] : scaled(200, scale, "nelx");
  const int nely = mo[1] ? mo[1] : scaled(100, scale, "nely");
  if (nely % 2) throw std::invalid_argument("cantilever2d: nely must be even");
  p.mesh = build_mesh_2d(nelx, nely, 2.0, 1.0);
  p.volumeBound = 0.4;
  p.heaviside = {0.2, 1e-9};
  p.scl = 1000.0;

  std::set<int> fixed;
  for (int j = 0; j <= nely; ++j) {
    const int n = p.mesh.nodeIndex(0, j);
    fixed.insert(2 * n); fixed.insert(2 * n + 1);
  }
  for (int j = 0; j < nely; ++j) p.fixedElements.push_back(p.mesh.elemIndex(0, j));

  const int loadNode = p.mesh.nodeIndex(nelx, nely / 2);
  p.loads.push_back({2 * loadNode + 1, -1.0});
  std::set<int> le;
  elements_containing_node(p.mesh, nelx, nely / 2, 0, le);
  p.loadingElements.assign(le.begin(), le.end());
  finalize_dofs(p, fixed);

  LatticeSpec2D ls;
  ls.xs = range_by(0.25, 0.5, 2.0);
  ls.ys = range_by(0.25, 0.5, 1.0);
  ls.replicas = 2;
  ls.L = 0.4; ls.t1 = 0.05; ls.t2 = 0.05;
  ls.theta = std::asin(0.7);
  ls.thetaSigns = {1, -1};
  p.init2d = lattice_init_2d(ls);
  return p;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"cantilever3d", "mbb3d", "torsion3d", "mechanism3d_v1", "mechanism3d_v2",
          "cantilever2d"};
}

ProblemDefinition builtin_problem(const std::string& name, int meshScale,
                                  std::array<int, 3> meshOverride) {
  if (meshScale < 1) throw std::invalid_argument("meshScale must be >= 1");
  if (name == "cantilever3d") return cantilever3d(meshScale, meshOverride);
  if (name == "mbb3d") return mbb3d(meshScale, meshOverride);
  if (name == "torsion3d") return torsion3d(meshScale, meshOverride);
  if (name == "mechanism3d_v1") return mechanism3d(meshScale, meshOverride, false);
  if (name == "mechanism3d_v2") return mechanism3d(meshScale, meshOverride, true);
  if (name == "cantilever2d") return cantilever2d(meshScale, meshOverride);
  throw std::invalid_argument("unknown problem name: " + name);
}

}  // namespace mmc
