#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mmc/run.hpp"

namespace mmc {

// Legacy-ASCII structured-points file with one CELL_DATA scalar per element.
// Output bytes are stable for fixed inputs.
void export_vtk(const Mesh& mesh, const Eigen::VectorXd& elemValues,
                const std::string& path, const std::string& fieldName = "density");

// {"kind": "cuboid3d"|"trapezoid2d", "params": [...]} records plus active flags.
std::string components_to_json(const std::vector<Component3D>& comps3,
                               const std::vector<Component2D>& comps2,
                               const std::vector<char>& active);

void write_history_header(std::ostream& os);
void append_history(std::ostream& os, const IterationRecord& r);
void write_timings_header(std::ostream& os);
void append_timings(std::ostream& os, const IterationRecord& r);

// Strict JSON config: unknown keys are rejected by name, absent keys take
// defaults. Exactly one of "problem" and "customProblem" must be present.
RunConfig parse_config(const std::string& text);

// Serializes a builtin to the inline-problem config schema.
std::string dump_problem_json(const std::string& name, int meshScale = 1);

}  // namespace mmc
