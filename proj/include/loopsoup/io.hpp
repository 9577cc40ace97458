#pragma once

// JSON file formats:
//   matrix: {"labels": [...], "entries": [[[re, im], ...], ...]}  (row-major)
//   graph:  {"vertices": [...], "edges": [[i, j], ...]}

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "loopsoup/lerw_wilson.hpp"
#include "loopsoup/matrix_core.hpp"
#include "loopsoup/soup_field.hpp"

namespace loopsoup::io {

using nlohmann::json;

/// Throws InvalidInput on malformed documents; matrix errors propagate.
WeightMatrix matrix_from_json(const json& doc);
json matrix_to_json(const WeightMatrix& q);

struct LabeledGraph {
  std::vector<std::string> vertices;
  SimpleGraph graph;
};

LabeledGraph graph_from_json(const json& doc);
json graph_to_json(const LabeledGraph& g);

json read_json_file(const std::filesystem::path& path);

json loops_to_json(const LoopSoupSample& soup);
json field_to_json(const OccupationField& field);
json complex_to_json(Complex z);

}  // namespace loopsoup::io
