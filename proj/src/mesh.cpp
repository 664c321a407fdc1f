#include "mmc/mesh.hpp"

#include <algorithm>
#include <stdexcept>

namespace mmc {

namespace {

void fill_common(Mesh& m) {
  const int npe = m.nodesPerElem;
  m.nodalVolume = Eigen::VectorXd::Zero(m.nNod);
  const double share = m.elemVolume / npe;
  for (int e = 0; e < m.nEle; ++e)
    for (int a = 0; a < npe; ++a) m.nodalVolume(m.elemNodes(e, a)) += share;
}

}  // namespace

Mesh build_mesh(int nelx, int nely, int nelz, double DL, double DW, double DH) {
  if (nelx <= 0 || nely <= 0 || nelz <= 0 || DL <= 0 || DW <= 0 || DH <= 0)
    throw std::invalid_argument("build_mesh: element counts and dimensions must be positive");
  Mesh m;
  m.nelx = nelx; m.nely = nely; m.nelz = nelz;
  m.DL = DL; m.DW = DW; m.DH = DH;
  m.hx = DL / nelx; m.hy = DW / nely; m.hz = DH / nelz;
  m.minSz = std::min({m.hx, m.hy, m.hz});
  m.elemVolume = m.hx * m.hy * m.hz;
  m.domainVolume = DL * DW * DH;
  m.nEle = nelx * nely * nelz;
  m.nNod = (nelx + 1) * (nely + 1) * (nelz + 1);
  m.dofPerNode = 3;
  m.nDof = 3 * m.nNod;
  m.nodesPerElem = 8;
  m.nodesPerLayer = (nelx + 1) * (nely + 1);

  m.nodeCoords.resize(m.nNod, 3);
  for (int k = 0; k <= nelz; ++k)
    for (int j = 0; j <= nely; ++j)
      for (int i = 0; i <= nelx; ++i) {
        const int n = m.nodeIndex(i, j, k);
        m.nodeCoords(n, 0) = i * m.hx;
        m.nodeCoords(n, 1) = j * m.hy;
        m.nodeCoords(n, 2) = k * m.hz;
      }

  m.elemNodes.resize(m.nEle, 8);
  for (int k = 0; k < nelz; ++k)
    for (int j = 0; j < nely; ++j)
      for (int i = 0; i < nelx; ++i) {
        const int e = m.elemIndex(i, j, k);
        m.elemNodes(e, 0) = m.nodeIndex(i, j, k);
        m.elemNodes(e, 1) = m.nodeIndex(i + 1, j, k);
        m.elemNodes(e, 2) = m.nodeIndex(i + 1, j + 1, k);
        m.elemNodes(e, 3) = m.nodeIndex(i, j + 1, k);
        m.elemNodes(e, 4) = m.nodeIndex(i, j, k + 1);
        m.elemNodes(e, 5) = m.nodeIndex(i + 1, j, k + 1);
        m.elemNodes(e, 6) = m.nodeIndex(i + 1, j + 1, k + 1);
        m.elemNodes(e, 7) = m.nodeIndex(i, j + 1, k + 1);
      }

  fill_common(m);
  return m;
}

Mesh build_mesh_2d(int nelx, int nely, double DL, double DW) {
  if (nelx <= 0 || nely <= 0 || DL <= 0 || DW <= 0)
    throw std::invalid_argument("build_mesh_2d: element counts and dimensions must be positive");
  Mesh m;
  m.nelx = nelx; m.nely = nely; m.nelz = 0;
  m.DL = DL; m.DW = DW; m.DH = 0;
  m.hx = DL / nelx; m.hy = DW / nely; m.hz = 0;
  m.minSz = std::min(m.hx, m.hy);
  m.elemVolume = m.hx * m.hy;
  m.domainVolume = DL * DW;
  m.nEle = nelx * nely;
  m.nNod = (nelx + 1) * (nely + 1);
  m.dofPerNode = 2;
  m.nDof = 2 * m.nNod;
  m.nodesPerElem = 4;
  m.nodesPerLayer = m.nNod;

  m.nodeCoords = Eigen::MatrixXd::Zero(m.nNod, 3);
  for (int j = 0; j <= nely; ++j)
    for (int i = 0; i <= nelx; ++i) {
      const int n = m.nodeIndex(i, j);
      m.nodeCoords(n, 0) = i * m.hx;
      m.nodeCoords(n, 1) = j * m.hy;
    }

  m.elemNodes.resize(m.nEle, 4);
  for (int j = 0; j < nely; ++j)
    for (int i = 0; i < nelx; ++i) {
      const int e = m.elemIndex(i, j);
      m.elemNodes(e, 0) = m.nodeIndex(i, j);
      m.elemNodes(e, 1) = m.nodeIndex(i + 1, j);
      m.elemNodes(e, 2) = m.nodeIndex(i + 1, j + 1);
      m.elemNodes(e, 3) = m.nodeIndex(i, j + 1);
    }

  fill_common(m);
  return m;
}

}  // namespace mmc
