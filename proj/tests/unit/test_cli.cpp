#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "hyperrate/cli.hpp"
#include "hyperrate/error.hpp"
#include "hyperrate/report.hpp"
#include "../support/generators.hpp"

using namespace hyperrate;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  args.insert(args.begin(), "hyperrate");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Outcome o;
  o.code = run(int(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::string path(const std::string& name) { return std::string(HYPERRATE_INSTANCE_DIR) + "/" + name + ".json"; }

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);)
    if (!l.empty() && l[0] != '#') out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(call({"rate", "-i", "/nonexistent/x.json"}).code == 1);
  CHECK(call({"rate", "--bogus"}).code == 1);
  CHECK(call({}).code == 1);
  CHECK(call({"rate", "-i", path("ternary_half"), "-f", "yaml"}).code == 1);
  CHECK(call({"verify", "-i", path("ternary_half")}).code == 0);
  CHECK(call({"curve", "-i", path("bit_pair")}).code == 1);
}

TEST_CASE("rate output is deterministic") {
  auto a = call({"rate", "-i", path("parity_side"), "-f", "json", "--threads", "2"});
  auto b = call({"rate", "-i", path("parity_side"), "-f", "json", "--threads", "3"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("\"version\"") != std::string::npos);
  CHECK(call({"rate", "-i", path("ternary_half")}).out.find("0.666667") != std::string::npos);
}

TEST_CASE("region csv") {
  auto r = call({"region", "-i", path("bit_pair"), "-f", "csv"});
  REQUIRE(r.code == 0);
  auto rows = lines(r.out);
  REQUIRE(rows.size() >= 3);
  CHECK(rows[0] == "weight,R1,R2");
  CHECK(r.out.find("1.000000,0.000000") != std::string::npos);
  CHECK(r.out.find("0.000000,1.000000") != std::string::npos);

  auto single = call({"region", "-i", path("mdc_binary"), "-f", "csv"});
  REQUIRE(single.code == 0);
  CHECK(lines(single.out).size() == 2);

  RateRegion empty;
  auto tmp = std::filesystem::temp_directory_path() / "hyperrate_empty.csv";
  CHECK_THROWS_AS(emit_region_csv(empty, tmp, {}), ValidationError);
  auto full = region_distributed(gen::fixture("bit_pair"), 0.5);
  CHECK_THROWS_AS(emit_region_csv(full, "/nonexistent/dir/x.csv", {}), Error);
  emit_region_csv(full, tmp, {});
  std::ifstream in(tmp);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(lines(ss.str()).size() >= 3);
  std::filesystem::remove(tmp);
}

TEST_CASE("curve ranges") {
  auto r = call({"curve", "-i", path("ternary_half"), "-e", "0:1:0.25", "-f", "csv"});
  REQUIRE(r.code == 0);
  auto rows = lines(r.out);
  REQUIRE(rows.size() == 6);
  CHECK(rows[1].rfind("0.000000,1.584963", 0) == 0);
  CHECK(rows[5].rfind("1.000000,0.000000", 0) == 0);
  auto listed = call({"curve", "-i", path("ternary_half"), "-e", "0", "-e", "0.5", "-f", "csv"});
  CHECK(lines(listed.out).size() == 3);
}

TEST_CASE("markov and hypergraph commands") {
  auto m = call({"markov", "--birth-death", "6", "0.3", "0.3", "--k", "2", "-e", "0.5"});
  REQUIRE(m.code == 0);
  CHECK(m.out.find("324") != std::string::npos);
  CHECK(call({"markov", "--birth-death", "1", "0.3", "0.3"}).code == 1);
  CHECK(call({"markov", "--matrix", "0.5,0.5;0.5,0.5", "-f", "json"}).code == 0);
  auto h = call({"hypergraph", "-i", path("parity_side")});
  REQUIRE(h.code == 0);
  CHECK(h.out.find("{1,3}") != std::string::npos);
}
