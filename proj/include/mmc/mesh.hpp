#pragma once

#include <Eigen/Dense>

namespace mmc {

// Structured uniform grid. Nodes and elements are numbered from the
// left-bottom corner, first along x, then y, then layer by layer along z.
// 2D meshes are encoded with nelz == 0; z-related fields collapse.
//
// Element-local node ordering is the standard counterclockwise bottom face
// followed by the top face:
//   (i,j,k) (i+1,j,k) (i+1,j+1,k) (i,j+1,k) | same four at k+1
// and for quads the first four.
struct Mesh {
  int nelx = 0, nely = 0, nelz = 0;
  double DL = 0, DW = 0, DH = 0;
  double hx = 0, hy = 0, hz = 0;
  double minSz = 0;
  double elemVolume = 0;    // hx*hy*hz, or hx*hy in 2D (unit thickness)
  double domainVolume = 0;  // DL*DW*DH, or DL*DW in 2D
  int nEle = 0, nNod = 0, nDof = 0;
  int nodesPerElem = 0, dofPerNode = 0;
  int nodesPerLayer = 0;  // (nelx+1)*(nely+1)

  Eigen::MatrixXi elemNodes;   // nEle x nodesPerElem
  Eigen::MatrixXd nodeCoords;  // nNod x 3 (z = 0 in 2D)
  Eigen::VectorXd nodalVolume; // per-node quadrature weight: sum of
                               // (element volume / nodes per element)
                               // over incident elements

  bool is2d() const { return nelz == 0; }

  int nodeIndex(int i, int j, int k = 0) const {
    return k * nodesPerLayer + j * (nelx + 1) + i;
  }
  int elemIndex(int i, int j, int k = 0) const {
    return k * nelx * nely + j * nelx + i;
  }
};

Mesh build_mesh(int nelx, int nely, int nelz, double DL, double DW, double DH);
Mesh build_mesh_2d(int nelx, int nely, double DL, double DW);

}  // namespace mmc
