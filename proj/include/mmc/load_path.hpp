#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mmc/geometry.hpp"
#include "mmc/material.hpp"
#include "mmc/mesh.hpp"

namespace mmc {

// Elements a component (or non-design domain) contributes stiffness to: an
// element is covered when at least one of its nodes has phi > -epsilon.
// Returns sorted element indices.
std::vector<int> component_coverage(const Eigen::VectorXd& tdfColumn,
                                    const Mesh& mesh, double epsilon);

// Symmetric adjacency over coverage sets: i ~ j iff the sets intersect.
// Returned as sorted adjacency lists.
std::vector<std::vector<int>> connectivity_graph(
    const std::vector<std::vector<int>>& coverages);

struct LoadPathResult {
  bool exists = false;
  std::vector<int> pathComponents;  // sorted visited vertices (incl. non-design domains)
};

// Breadth-first search from the vertices covering the loading elements.
// Preconditions checked first: every loading element covered, at least one
// fixed element covered. The path exists when some visited vertex covers a
// fixed element; pathComponents is the whole visited closure.
LoadPathResult find_load_path(const std::vector<std::vector<int>>& graph,
                              const std::vector<std::vector<int>>& coverages,
                              const std::vector<int>& loadingElements,
                              const std::vector<int>& fixedElements);

struct ReducedModel {
  Eigen::VectorXd denSld;             // per-element densities from the path subset
  std::vector<int> retainedFreeDofs;  // sorted
};

// Density field restricted to the path members and the retained free DOFs:
// a DOF survives when it is free and touches an element with
// denSld >= voidThreshold.
ReducedModel reduced_model(const Eigen::MatrixXd& pathTdfColumns,
                           const TdfHyperParams& hp, const HeavisideParams& hs,
                           const Mesh& mesh, const std::vector<char>& freeDofMask,
                           double voidThreshold);

}  // namespace mmc
