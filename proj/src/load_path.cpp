#include "mmc/load_path.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace mmc {

std::vector<int> component_coverage(const Eigen::VectorXd& tdfColumn,
                                    const Mesh& mesh, double epsilon) {
  if (tdfColumn.size() != mesh.nNod)
    throw std::invalid_argument("component_coverage: column size mismatch");
  std::vector<char> nodeHit(static_cast<size_t>(mesh.nNod), 0);
  for (int n = 0; n < mesh.nNod; ++n) nodeHit[static_cast<size_t>(n)] = tdfColumn(n) > -epsilon;
  std::vector<int> covered;
  for (int e = 0; e < mesh.nEle; ++e) {
    for (int a = 0; a < mesh.nodesPerElem; ++a) {
      if (nodeHit[static_cast<size_t>(mesh.elemNodes(e, a))]) {
        covered.push_back(e);
        break;
      }
    }
  }
  return covered;
}

namespace {

bool sorted_intersect(const std::vector<int>& a, const std::vector<int>& b) {
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) ++i;
    else if (b[j] < a[i]) ++j;
    else return true;
  }
  return false;
}

bool covers(const std::vector<int>& coverage, int element) {
  return std::binary_search(coverage.begin(), coverage.end(), element);
}

}  // namespace

std::vector<std::vector<int>> connectivity_graph(
    const std::vector<std::vector<int>>& coverages) {
  const size_t m = coverages.size();
  std::vector<std::vector<int>> adj(m);
  for (size_t i = 0; i < m; ++i)
    for (size_t j = i + 1; j < m; ++j)
      if (sorted_intersect(coverages[i], coverages[j])) {
        adj[i].push_back(static_cast<int>(j));
        adj[j].push_back(static_cast<int>(i));
      }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

LoadPathResult find_load_path(const std::vector<std::vector<int>>& graph,
                              const std::vector<std::vector<int>>& coverages,
                              const std::vector<int>& loadingElements,
                              const std::vector<int>& fixedElements) {
  LoadPathResult out;
  const size_t m = coverages.size();

  // every loading element covered, and at least one fixed element covered
  for (int le : loadingElements) {
    bool hit = false;
    for (size_t i = 0; i < m && !hit; ++i) hit = covers(coverages[i], le);
    if (!hit) return out;
  }
  bool anyFixedCovered = false;
  for (int fe : fixedElements) {
    for (size_t i = 0; i < m && !anyFixedCovered; ++i)
      anyFixedCovered = covers(coverages[i], fe);
    if (anyFixedCovered) break;
  }
  if (!anyFixedCovered) return out;

  std::vector<char> visited(m, 0);
  std::deque<int> front;
  for (size_t i = 0; i < m; ++i) {
    for (int le : loadingElements)
      if (covers(coverages[i], le)) {
        visited[i] = 1;
        front.push_back(static_cast<int>(i));
        break;
      }
  }
  while (!front.empty()) {
    const int v = front.front();
    front.pop_front();
    for (int w : graph[static_cast<size_t>(v)])
      if (!visited[static_cast<size_t>(w)]) {
        visited[static_cast<size_t>(w)] = 1;
        front.push_back(w);
      }
  }

  for (size_t i = 0; i < m; ++i)
    if (visited[i]) out.pathComponents.push_back(static_cast<int>(i));
  for (int v : out.pathComponents) {
    for (int fe : fixedElements)
      if (covers(coverages[static_cast<size_t>(v)], fe)) {
        out.exists = true;
        break;
      }
    if (out.exists) break;
  }
  if (!out.exists) out.pathComponents.clear();
  return out;
}

ReducedModel reduced_model(const Eigen::MatrixXd& pathTdfColumns,
                           const TdfHyperParams& hp, const HeavisideParams& hs,
                           const Mesh& mesh, const std::vector<char>& freeDofMask,
                           double voidThreshold) {
  if (pathTdfColumns.rows() != mesh.nNod)
    throw std::invalid_argument("reduced_model: column size mismatch");
  if (freeDofMask.size() != static_cast<size_t>(mesh.nDof))
    throw std::invalid_argument("reduced_model: free DOF mask size mismatch");

  ReducedModel out;
  const KsAggregate ks = ks_aggregate(pathTdfColumns, hp.lambda, hp.expFloor);
  const Eigen::VectorXd H = heaviside(ks.phiMax, hs);
  out.denSld = element_density(H, mesh);

  std::vector<char> nodeKeep(static_cast<size_t>(mesh.nNod), 0);
  for (int e = 0; e < mesh.nEle; ++e) {
    if (out.denSld(e) >= voidThreshold)
      for (int a = 0; a < mesh.nodesPerElem; ++a)
        nodeKeep[static_cast<size_t>(mesh.elemNodes(e, a))] = 1;
  }
  const int dpn = mesh.dofPerNode;
  for (int n = 0; n < mesh.nNod; ++n) {
    if (!nodeKeep[static_cast<size_t>(n)]) continue;
    for (int d = 0; d < dpn; ++d) {
      const int dof = dpn * n + d;
      if (freeDofMask[static_cast<size_t>(dof)]) out.retainedFreeDofs.push_back(dof);
    }
  }
  return out;
}

}  // namespace mmc
