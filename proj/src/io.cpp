#include "loopsoup/io.hpp"

#include <fstream>

namespace loopsoup::io {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::InvalidInput, what); }

Complex complex_from_json(const json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    bad("complex entries must be [re, im] pairs");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

WeightMatrix matrix_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("labels") || !doc.contains("entries")) {
    bad("matrix document needs \"labels\" and \"entries\"");
  }
  std::vector<std::string> labels;
  for (const auto& label : doc.at("labels")) {
    if (label.is_string()) {
      labels.push_back(label.get<std::string>());
    } else if (label.is_number_integer()) {
      labels.push_back(std::to_string(label.get<long long>()));
    } else {
      bad("labels must be strings or integers");
    }
  }
  const auto& rows = doc.at("entries");
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n) bad("entries must have one row per label");
  CMatrix entries(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    const auto& row = rows[static_cast<std::size_t>(x)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) bad("entries must be square");
    for (Eigen::Index y = 0; y < n; ++y) entries(x, y) = complex_from_json(row[static_cast<std::size_t>(y)]);
  }
  return WeightMatrix(StateSpace(std::move(labels)), std::move(entries));
}

json matrix_to_json(const WeightMatrix& q) {
  json rows = json::array();
  for (int x = 0; x < q.size(); ++x) {
    json row = json::array();
    for (int y = 0; y < q.size(); ++y) row.push_back(complex_to_json(q(x, y)));
    rows.push_back(std::move(row));
  }
  return {{"labels", q.space().labels()}, {"entries", std::move(rows)}};
}

LabeledGraph graph_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("vertices") || !doc.contains("edges")) {
    bad("graph document needs \"vertices\" and \"edges\"");
  }
  std::vector<std::string> vertices;
  for (const auto& v : doc.at("vertices")) {
    vertices.push_back(v.is_string() ? v.get<std::string>() : v.dump());
  }
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : doc.at("edges")) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
      bad("edges must be [i, j] index pairs");
    }
    edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  return {vertices, SimpleGraph(static_cast<int>(vertices.size()), std::move(edges))};
}

json graph_to_json(const LabeledGraph& g) {
  json edges = json::array();
  for (auto [a, b] : g.graph.edges()) edges.push_back({a, b});
  return {{"vertices", g.vertices}, {"edges", std::move(edges)}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    bad("cannot parse " + path.string() + ": " + e.what());
  }
}

json loops_to_json(const LoopSoupSample& soup) {
  json loops = json::array();
  for (const auto& loop : soup.loops) loops.push_back(loop.sites());
  return {{"loops", std::move(loops)}};
}

json field_to_json(const OccupationField& field) {
  std::vector<double> values(field.values.data(), field.values.data() + field.values.size());
  return {{"field", values}};
}

}  // namespace loopsoup::io
