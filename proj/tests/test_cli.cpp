#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"
#include "loopsoup/fixtures.hpp"
#include "loopsoup/io.hpp"

using namespace loopsoup;
using io::json;

namespace {

struct RunResult {
  int exit = -1;
  std::string out;
};

RunResult run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + std::string(LOOPSOUP_CLI_PATH) + " " + args;
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0;) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<json> lines(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(json::parse(line));
  return out;
}

std::string temp_file(const std::string& name, const json& doc) {
  const auto path = std::filesystem::temp_directory_path() / ("loopsoup_cli_" + name);
  std::ofstream(path) << doc.dump();
  return path.string();
}

std::map<std::string, std::string> verdicts(const std::string& text) {
  std::map<std::string, std::string> out;
  for (const auto& r : lines(text)) {
    out[r["check"].get<std::string>() + "|" + r["fixture"].get<std::string>()] = r["status"].get<std::string>();
  }
  return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("verify with an empty config passes with every deterministic suite") {
  const auto cfg = temp_file("empty.json", json::object());
  const auto out_path = (std::filesystem::temp_directory_path() / "loopsoup_cli_verify.jsonl").string();
  const auto r = run("--out " + out_path + " verify --config " + cfg + " 2>/dev/null");
  CHECK(r.exit == 0);
  std::ifstream in(out_path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::set<std::string> suites;
  for (const auto& rep : lines(text)) {
    suites.insert(rep["check"].get<std::string>());
    CHECK(rep["pass"] == true);
    CHECK(!rep["anchor"].get<std::string>().empty());
  }
  CHECK(suites.size() >= 9);
}

TEST_CASE("verify rejects an unacceptable fixture") {
  RMatrix big(1, 1);
  big << 1.2;
  const auto m = temp_file("rho12.json", io::matrix_to_json(WeightMatrix::from_real(big)));
  const auto cfg = temp_file("rho12_cfg.json", {{"matrix_fixtures", {m}}});
  const auto r = run("verify --config " + cfg + " 2>&1");
  CHECK(r.exit == 2);
  CHECK(r.out.find("NotAcceptable") != std::string::npos);
}

TEST_CASE("input errors exit 2") {
  CHECK(run("verify --config /nonexistent/cfg.json 2>/dev/null").exit == 2);
  CHECK(run("verify --config " + temp_file("bad_cfg.json", {{"samples", 0}}) + " 2>/dev/null").exit == 2);
  CHECK(run("frobnicate 2>/dev/null").exit == 2);
  CHECK(run("sample --what forest 2>/dev/null").exit == 2);
  CHECK(run("--help >/dev/null").exit == 0);
}

TEST_CASE("mc with too few samples is inconclusive") {
  const auto r = run("mc --samples 10 2>/dev/null");
  CHECK(r.exit == 3);
  for (const auto& rep : lines(r.out)) CHECK(rep["status"] == "inconclusive");
}

TEST_CASE("mc reruns are bit identical and verdicts are stable across seeds") {
  const auto first = run("mc --seed 42 2>/dev/null");
  const auto second = run("mc --seed 42 2>/dev/null");
  CHECK(first.exit == 0);
  CHECK(first.out == second.out);
  const auto base = verdicts(first.out);
  CHECK(base.size() > 50);
  for (const char* seed : {"1", "2", "3", "4"}) {
    const auto other = run(std::string("mc --seed ") + seed + " 2>/dev/null");
    CHECK(other.exit == 0);
    CHECK(other.out != first.out);
    CHECK(verdicts(other.out) == base);
  }
}

TEST_CASE("sample tree emits spanning trees of K4") {
  const auto r = run("sample --what tree --n 3 --seed 9 2>/dev/null");
  CHECK(r.exit == 0);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 3);
  for (std::size_t i = 0; i < ls.size(); ++i) {
    CHECK(ls[i]["seed"] == 9);
    CHECK(ls[i]["substream"] == i);
    std::set<int> touched;
    for (const auto& e : ls[i]["edges"]) {
      touched.insert(e[0].get<int>());
      touched.insert(e[1].get<int>());
    }
    CHECK(ls[i]["edges"].size() == 3);
    CHECK(touched.size() == 4);
  }
}

TEST_CASE("sample soup and gff defaults") {
  const auto soup = run("sample --what soup --n 50 --t 2 2>/dev/null");
  CHECK(soup.exit == 0);
  std::size_t loops = 0;
  for (const auto& line : lines(soup.out)) {
    for (const auto& loop : line["loops"]) {
      for (const auto& site : loop) CHECK(site == 0);
      ++loops;
    }
  }
  CHECK(loops > 0);

  const auto gff = run("sample --what gff --n 5 2>/dev/null");
  CHECK(gff.exit == 0);
  const auto ls = lines(gff.out);
  CHECK(ls.size() == 5);
  for (const auto& line : ls) CHECK(line["field"].size() == 2);

  const auto field = run("sample --what field --n 5 2>/dev/null");
  CHECK(field.exit == 0);
  CHECK(lines(field.out).size() == 5);
}

TEST_CASE("seed falls back to the environment") {
  const auto env = lines(run("sample --what gff --n 1 2>/dev/null", "LOOPSOUP_SEED=77").out);
  REQUIRE(env.size() == 1);
  CHECK(env[0]["seed"] == 77);
  const auto flag = lines(run("sample --what gff --n 1 --seed 5 2>/dev/null", "LOOPSOUP_SEED=77").out);
  REQUIRE(flag.size() == 1);
  CHECK(flag[0]["seed"] == 5);
  const auto fallback = lines(run("sample --what gff --n 1 2>/dev/null", "env -u LOOPSOUP_SEED").out);
  REQUIRE(fallback.size() == 1);
  CHECK(fallback[0]["seed"] == 42);
}

TEST_CASE("sampling complex weights is refused") {
  const auto m = temp_file("herm.json", io::matrix_to_json(fixtures::hermitian_two_state()));
  const auto r = run("sample --what soup --matrix " + m + " 2>&1");
  CHECK(r.exit == 2);
  CHECK(r.out.find("complex") != std::string::npos);
}

}  // TEST_SUITE
