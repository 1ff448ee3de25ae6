#pragma once

// JSON, CSV and DOT formats.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "kronrev/blockmat.hpp"
#include "kronrev/decomposition.hpp"
#include "kronrev/estimation.hpp"
#include "kronrev/kron_forward.hpp"
#include "kronrev/network.hpp"

namespace kronrev {

using json = nlohmann::json;

json block_to_json(const PhaseBlock& b);
PhaseBlock block_from_json(const json& j);

json matrix_to_json(const BlockMatrix& a);
BlockMatrix matrix_from_json(const json& j);

json network_to_json(const RadialNetwork& net);
RadialNetwork network_from_json(const json& j);

json trace_to_json(const std::vector<KronState>& trace);
json plan_to_json(const DecompositionPlan& plan);

void write_measurements_csv(std::ostream& os, const MeasurementSet& ms);
MeasurementSet read_measurements_csv(std::istream& is);

// G(A) with measured labels 1..n; cliques drawn as clusters.
std::string reduction_to_dot(const BlockMatrix& ybar, double zero_tol = 1e-9);
std::string network_to_dot(const RadialNetwork& net);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace kronrev
