#pragma once

// Test-side oracles, independent of the library's load-path implementation.

#include <deque>
#include <random>
#include <vector>

#include "mmc/geometry.hpp"
#include "mmc/mesh.hpp"

namespace oracles {

// Element adjacency by shared nodes (the stiffness coupling relation).
inline std::vector<std::vector<int>> element_adjacency(const mmc::Mesh& m) {
  std::vector<std::vector<int>> nodeElems(static_cast<size_t>(m.nNod));
  for (int e = 0; e < m.nEle; ++e)
    for (int a = 0; a < m.nodesPerElem; ++a)
      nodeElems[static_cast<size_t>(m.elemNodes(e, a))].push_back(e);
  std::vector<std::vector<int>> adj(static_cast<size_t>(m.nEle));
  std::vector<char> mark(static_cast<size_t>(m.nEle), 0);
  for (int e = 0; e < m.nEle; ++e) {
    for (int a = 0; a < m.nodesPerElem; ++a)
      for (int other : nodeElems[static_cast<size_t>(m.elemNodes(e, a))])
        if (other != e && !mark[static_cast<size_t>(other)]) {
          mark[static_cast<size_t>(other)] = 1;
          adj[static_cast<size_t>(e)].push_back(other);
        }
    for (int other : adj[static_cast<size_t>(e)]) mark[static_cast<size_t>(other)] = 0;
  }
  return adj;
}

// Element-level flood fill over non-void elements: true when some fixed
// element is reachable from the loading elements. Mirrors the component
// search's preconditions (all loading elements non-void, some fixed element
// non-void).
inline bool flood_fill_exists(const mmc::Mesh& m, const std::vector<char>& nonVoid,
                              const std::vector<int>& loadingElements,
                              const std::vector<int>& fixedElements,
                              const std::vector<std::vector<int>>& adj) {
  for (int le : loadingElements)
    if (!nonVoid[static_cast<size_t>(le)]) return false;
  bool anyFixed = false;
  for (int fe : fixedElements) anyFixed = anyFixed || nonVoid[static_cast<size_t>(fe)];
  if (!anyFixed) return false;

  std::vector<char> visited(static_cast<size_t>(m.nEle), 0);
  std::deque<int> q;
  for (int le : loadingElements) {
    if (!visited[static_cast<size_t>(le)]) {
      visited[static_cast<size_t>(le)] = 1;
      q.push_back(le);
    }
  }
  while (!q.empty()) {
    const int e = q.front();
    q.pop_front();
    for (int w : adj[static_cast<size_t>(e)])
      if (!visited[static_cast<size_t>(w)] && nonVoid[static_cast<size_t>(w)]) {
        visited[static_cast<size_t>(w)] = 1;
        q.push_back(w);
      }
  }
  for (int fe : fixedElements)
    if (visited[static_cast<size_t>(fe)]) return true;
  return false;
}

// Is an element set connected under the given adjacency?
inline bool element_set_connected(const std::vector<int>& set,
                                  const std::vector<std::vector<int>>& adj,
                                  int nEle) {
  if (set.empty()) return true;
  std::vector<char> inSet(static_cast<size_t>(nEle), 0);
  for (int e : set) inSet[static_cast<size_t>(e)] = 1;
  std::vector<char> visited(static_cast<size_t>(nEle), 0);
  std::deque<int> q{set.front()};
  visited[static_cast<size_t>(set.front())] = 1;
  size_t seen = 1;
  while (!q.empty()) {
    const int e = q.front();
    q.pop_front();
    for (int w : adj[static_cast<size_t>(e)])
      if (inSet[static_cast<size_t>(w)] && !visited[static_cast<size_t>(w)]) {
        visited[static_cast<size_t>(w)] = 1;
        q.push_back(w);
        ++seen;
      }
  }
  return seen == set.size();
}

inline mmc::Component3D random_component(std::mt19937& rng, double DL, double DW,
                                         double DH) {
  std::uniform_real_distribution<double> px(0, DL), py(0, DW), pz(0, DH);
  std::uniform_real_distribution<double> len(0.5, 4.0);
  std::uniform_real_distribution<double> ang(-3.14159, 3.14159);
  mmc::Component3D c;
  c.x0 = px(rng); c.y0 = py(rng); c.z0 = pz(rng);
  c.L1 = len(rng); c.L2 = len(rng); c.L3 = len(rng);
  c.alpha = ang(rng); c.beta = ang(rng); c.gamma = ang(rng);
  return c;
}

}  // namespace oracles
