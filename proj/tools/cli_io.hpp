#pragma once

#include "json.hpp"
#include <string>

#include "nehari/solver.hpp"
#include "nehari/weight.hpp"

namespace nehari::cli {

using nlohmann::ordered_json;

/// Writes through a sibling temporary file and renames it into place.
void write_atomic(const std::string& path, const std::string& content);

std::string format_double(double v);  // %.17g

ordered_json to_json(const ConstraintReport& r);
ordered_json to_json(const Diagnostics& d);
ordered_json to_json(const NehariParams& p);
ordered_json to_json(const SweepVerdicts& v);

/// x[,y],u,a_plus,a_minus with one row per interior node.
std::string solution_csv(const Grid& g, const WeightField& w, const Field& u);

/// Reads a field written by solution_csv. Throws GridMismatch when the
/// dimension, node count or coordinates disagree with g.
Field read_solution_csv(const std::string& path, const Grid& g);

/// Node count per axis of a stored solution (rows, or sqrt(rows) in 2D).
int stored_nodes_per_axis(const std::string& path);

}  // namespace nehari::cli
