#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "loopsoup/fixtures.hpp"
#include "loopsoup/harness.hpp"
#include "loopsoup/io.hpp"

using namespace loopsoup;
using harness::CheckReport;
using harness::Status;
using io::json;

namespace {

std::filesystem::path write_temp(const std::string& name, const json& doc) {
  const auto path = std::filesystem::temp_directory_path() / ("loopsoup_unit_" + name);
  std::ofstream(path) << doc.dump();
  return path;
}

std::vector<json> parse_lines(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(json::parse(line));
  return out;
}

CheckReport with_status(Status s) {
  CheckReport r;
  r.check = "c";
  r.status = s;
  return r;
}

}  // namespace

TEST_SUITE("io_harness") {

TEST_CASE("matrix json round trip") {
  const auto q = fixtures::hermitian_three_site();
  const auto back = io::matrix_from_json(io::matrix_to_json(q));
  CHECK(back.entries() == q.entries());
  CHECK(back.space().labels() == q.space().labels());

  const json doc = {{"labels", {"a", 7}}, {"entries", {{0.1, {0.0, 0.2}}, {{0.0, -0.2}, 0.1}}}};
  const auto parsed = io::matrix_from_json(doc);
  CHECK(parsed.space().labels() == std::vector<std::string>{"a", "7"});
  CHECK(parsed(0, 1) == Complex(0.0, 0.2));
  CHECK(parsed.flags().hermitian);
}

TEST_CASE("malformed matrix documents are input errors") {
  auto kind_of = [](const json& doc) {
    try {
      io::matrix_from_json(doc);
    } catch (const Error& e) {
      return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::InvalidInput;
  };
  CHECK(kind_of(json::array()) == ErrorKind::InvalidInput);
  CHECK(kind_of({{"labels", {"a"}}}) == ErrorKind::InvalidInput);
  CHECK(kind_of({{"labels", {"a", "b"}}, {"entries", {{0.1, 0.1}}}}) == ErrorKind::InvalidInput);
  CHECK(kind_of({{"labels", {"a"}}, {"entries", {{"x"}}}}) == ErrorKind::InvalidInput);
  CHECK(kind_of({{"labels", {"a"}}, {"entries", {{{1.0, 2.0, 3.0}}}}}) == ErrorKind::InvalidInput);
  CHECK(kind_of({{"labels", {"a", "a"}}, {"entries", {{0.1, 0.1}, {0.1, 0.1}}}}) == ErrorKind::InvalidInput);
}

TEST_CASE("graph json round trip and validation") {
  io::LabeledGraph g{{"a", "b", "c"}, SimpleGraph(3, {{0, 1}, {1, 2}})};
  const auto back = io::graph_from_json(io::graph_to_json(g));
  CHECK(back.vertices == g.vertices);
  CHECK(back.graph.edges() == g.graph.edges());
  CHECK_THROWS_AS(io::graph_from_json({{"vertices", {"a"}}}), Error);
  CHECK_THROWS_AS(io::graph_from_json({{"vertices", {"a", "b"}}, {"edges", {{0, "b"}}}}), Error);
  CHECK_THROWS_AS(io::graph_from_json({{"vertices", {"a", "b"}}, {"edges", {{0, 5}}}}), Error);
}

TEST_CASE("json files") {
  const auto path = write_temp("m.json", io::matrix_to_json(fixtures::two_state()));
  CHECK(io::matrix_from_json(io::read_json_file(path)).entries() == fixtures::two_state().entries());
  const auto broken = std::filesystem::temp_directory_path() / "loopsoup_unit_broken.json";
  std::ofstream(broken) << "{ not json";
  CHECK_THROWS_AS(io::read_json_file(broken), Error);
  CHECK_THROWS_AS(io::read_json_file("/nonexistent/loopsoup.json"), Error);
}

TEST_CASE("config round trip, defaults and validation") {
  harness::RunConfig c;
  c.seed = 7;
  c.samples = 1234;
  c.tolerances["greens_product"] = 1e-8;
  c.matrix_fixtures = {"a.json"};
  c.record_timing = true;
  const auto back = harness::config_from_json(harness::config_to_json(c));
  CHECK(harness::config_to_json(back) == harness::config_to_json(c));
  CHECK(back.tolerance("greens_product", 1.0) == 1e-8);
  CHECK(back.tolerance("other", 0.5) == 0.5);

  const auto defaults = harness::config_from_json(json::object());
  CHECK(harness::config_to_json(defaults) == harness::config_to_json(harness::RunConfig{}));

  CHECK_THROWS_AS(harness::config_from_json(json::array()), Error);
  CHECK_THROWS_AS(harness::config_from_json({{"samples", "many"}}), Error);
  CHECK_THROWS_AS(harness::config_from_json({{"samples", 0}}), Error);
  CHECK_THROWS_AS(harness::config_from_json({{"loop_length", 0}}), Error);
  CHECK_THROWS_AS(harness::config_from_json({{"tolerances", {{"x", -1.0}}}}), Error);
}

TEST_CASE("report json and digest") {
  CHECK(harness::digest("") == "cbf29ce484222325");
  CHECK(harness::digest("a") == "af63dc4c8601ec8c");
  CHECK(harness::digest("foobar") == "85944171f73967e8");

  CheckReport r;
  r.check = "x";
  r.anchor = "identity";
  r.fixture = "f";
  r.inputs_digest = harness::digest("f");
  r.lhs = 1.0;
  r.rhs = 1.5;
  r.error = 0.5;
  r.tolerance = 0.1;
  r.status = Status::Fail;
  auto j = harness::report_to_json(r);
  CHECK(j["status"] == "fail");
  CHECK(j["pass"] == false);
  CHECK(!j.contains("bound"));
  CHECK(!j.contains("runtime_ms"));
  r.bound = 1e-3;
  r.runtime_ms = 2.0;
  j = harness::report_to_json(r);
  CHECK(j["bound"] == 1e-3);
  CHECK(j["runtime_ms"] == 2.0);
  for (const char* key : {"check", "anchor", "fixture", "inputs_digest", "lhs", "rhs", "error", "tolerance"}) {
    CHECK(j.contains(key));
  }

  std::ostringstream out;
  harness::write_reports({r, r}, out);
  CHECK(parse_lines(out.str()).size() == 2);
}

TEST_CASE("exit code precedence") {
  CHECK(harness::exit_code({}) == harness::kPass);
  CHECK(harness::exit_code({with_status(Status::Pass)}) == harness::kPass);
  CHECK(harness::exit_code({with_status(Status::Pass), with_status(Status::Inconclusive)}) == harness::kInconclusive);
  CHECK(harness::exit_code({with_status(Status::Inconclusive), with_status(Status::Fail)}) == harness::kCheckFailure);
}

TEST_CASE("sample kinds") {
  CHECK(harness::parse_sample_kind("soup") == harness::SampleKind::Soup);
  CHECK(harness::parse_sample_kind("gff") == harness::SampleKind::Gff);
  CHECK(harness::parse_sample_kind("tree") == harness::SampleKind::Tree);
  CHECK(harness::parse_sample_kind("field") == harness::SampleKind::Field);
  CHECK(!harness::parse_sample_kind("forest"));
}

TEST_CASE("tree samples are spanning trees with metadata") {
  harness::RunConfig c;
  c.seed = 5;
  harness::SampleRequest req;
  req.kind = harness::SampleKind::Tree;
  req.count = 50;
  std::ostringstream out;
  harness::run_sample(c, req, out);
  const auto lines = parse_lines(out.str());
  REQUIRE(lines.size() == 50);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    CHECK(lines[i]["seed"] == 5);
    CHECK(lines[i]["substream"] == i);
    const auto edges = lines[i]["edges"];
    REQUIRE(edges.size() == 3);
    // Union-find over K4: three edges without a cycle span all four vertices.
    std::vector<int> parent{0, 1, 2, 3};
    auto find = [&](int v) {
      while (parent[static_cast<std::size_t>(v)] != v) v = parent[static_cast<std::size_t>(v)];
      return v;
    };
    for (const auto& e : edges) {
      const int a = find(e[0].get<int>());
      const int b = find(e[1].get<int>());
      CHECK(a != b);
      parent[static_cast<std::size_t>(a)] = b;
    }
  }
  std::ostringstream again;
  harness::run_sample(c, req, again);
  CHECK(again.str() == out.str());
}

TEST_CASE("soup, field and gff samples") {
  harness::RunConfig c;
  harness::SampleRequest req;
  req.count = 20;
  req.intensity = 2.0;
  std::ostringstream soups;
  harness::run_sample(c, req, soups);
  for (const auto& line : parse_lines(soups.str())) {
    CHECK(line["t"] == 2.0);
    for (const auto& loop : line["loops"]) {
      REQUIRE(loop.size() >= 2);
      CHECK(loop.front() == loop.back());
    }
  }

  req.kind = harness::SampleKind::Field;
  std::ostringstream fields;
  harness::run_sample(c, req, fields);
  for (const auto& line : parse_lines(fields.str())) {
    REQUIRE(line["field"].size() == 1);
    CHECK(line["field"][0].get<double>() >= 0.0);
  }

  req.kind = harness::SampleKind::Gff;
  std::ostringstream gff;
  harness::run_sample(c, req, gff);
  for (const auto& line : parse_lines(gff.str())) CHECK(line["field"].size() == 2);
}

TEST_CASE("sampling refuses complex weights and bad graphs") {
  harness::RunConfig c;
  harness::SampleRequest req;
  req.matrix_path = write_temp("herm.json", io::matrix_to_json(fixtures::hermitian_two_state())).string();
  std::ostringstream out;
  try {
    harness::run_sample(c, req, out);
    FAIL("expected NotPositive");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotPositive);
  }
  CHECK(out.str().empty());

  req.kind = harness::SampleKind::Tree;
  req.matrix_path.reset();
  req.graph_path = write_temp("split.json", {{"vertices", {"a", "b", "c"}}, {"edges", {{0, 1}}}}).string();
  CHECK_THROWS_AS(harness::run_sample(c, req, out), Error);
}

TEST_CASE("mc below the sample threshold is inconclusive, never failing") {
  harness::RunConfig c;
  c.samples = 10;
  c.wilson_samples = 10;
  const auto reports = harness::run_mc(c);
  CHECK(!reports.empty());
  for (const auto& r : reports) CHECK(r.status == Status::Inconclusive);
  CHECK(harness::exit_code(reports) == harness::kInconclusive);
}

TEST_CASE("mc reports are reproducible for a fixed seed") {
  harness::RunConfig c;
  c.samples = 1000;
  c.wilson_samples = 1000;
  std::ostringstream a;
  std::ostringstream b;
  harness::write_reports(harness::run_mc(c), a);
  harness::write_reports(harness::run_mc(c), b);
  CHECK(a.str() == b.str());
  std::set<std::string> suites;
  for (const auto& line : parse_lines(a.str())) suites.insert(line["check"].get<std::string>());
  CHECK(suites.size() >= 6);
}

TEST_CASE("unacceptable fixture files are rejected before any check runs") {
  RMatrix big(1, 1);
  big << 1.2;
  harness::RunConfig c;
  c.matrix_fixtures = {write_temp("rho12.json", io::matrix_to_json(WeightMatrix::from_real(big))).string()};
  try {
    harness::run_verify(c);
    FAIL("expected NotAcceptable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotAcceptable);
  }
}

}  // TEST_SUITE
