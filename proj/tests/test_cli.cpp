#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "run_config.hpp"

using namespace bowen;
using namespace bowen::cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "bowen-press");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> split(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

RunConfig parse(const std::vector<std::string>& args) {
  std::vector<std::string> all{"bowen-press"};
  all.insert(all.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : all) argv.push_back(a.c_str());
  std::string help;
  const auto cfg = parse_run_config(static_cast<int>(argv.size()), argv.data(), help);
  REQUIRE(cfg);
  return *cfg;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("property: flags round-trip through the parser") {
  const std::vector<std::string> lines{
      "pressure --family exp --lambda 0.2+0.1i --z 2+3.14159i --t 1.5 --depth 6 --cutoff 40",
      "pressure --family tan --lambda 0.5 --z inf --t 0.8 --prune -20 --decay-cutoff --ignore-tail",
      "curve --family quad --c -0.1+0.2i --t-grid 0.25:2:8 --far-panels 8 --format csv",
      "delta --family exp --lambda 1 --tol 0.05 --threads 2 --output out.json",
      "repeller --family quad --c 0 --t 1 --budget 12 --ring-samples 32 --seed 99",
      "gps --family exp --lambda 0.2 --z 10+3.14159i --gps-depth 16",
      "verify --suite sandwich --samples 5000 --level 12 --ratio 3"};
  for (const auto& line : lines) {
    CAPTURE(line);
    const RunConfig a = parse(split(line));
    const RunConfig b = parse(to_flags(a));
    CHECK(a == b);
    CHECK(to_flags(a) == to_flags(b));
  }
}

TEST_CASE("t grid syntax") {
  CHECK(parse_t_grid("1:2:3") == std::vector<double>{1.0, 1.5, 2.0});
  CHECK(parse_t_grid("0.5,1,1.5") == std::vector<double>{0.5, 1.0, 1.5});
  CHECK_THROWS(parse_t_grid("1:2"));
  CHECK_THROWS(parse_t_grid("a,b"));
}

TEST_CASE("config errors name the flag and exit 2") {
  const Run missing = run({"pressure", "--family", "exp", "--t", "1"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("--lambda") != std::string::npos);
  CHECK(missing.out.empty());

  const std::vector<std::pair<std::vector<std::string>, std::string>> bad{
      {{"pressure", "--family", "quad", "--c", "0", "--lambda", "1", "--t", "1"}, "--lambda"},
      {{"pressure", "--family", "quad", "--c", "0"}, "--t"},
      {{"delta", "--family", "quad", "--c", "0", "--t", "1"}, "--t"},
      {{"pressure", "--family", "quad", "--c", "0", "--t", "1", "--depth", "0"}, "--depth"},
      {{"pressure", "--family", "quad", "--c", "0", "--t", "1", "--prune", "1"}, "--prune"},
      {{"pressure", "--family", "quad", "--c", "0", "--t", "1", "--far-panels", "6"}, "--far-panels"},
      {{"verify", "--suite", "nope"}, "--suite"},
      {{"gps", "--family", "quad", "--c", "0", "--format", "xml"}, "--format"},
      {{"pressure", "--family", "exp", "--lambda", "1", "--z", "1+2k", "--t", "1"}, "--z"},
      {{"verify", "--suite", "el", "--level", "2"}, "--level"}};
  for (const auto& [args, flag] : bad) {
    CAPTURE(flag);
    const Run r = run(args);
    CHECK(r.code == 2);
    CHECK(r.err.find(flag) != std::string::npos);
  }
}

TEST_CASE("divergent pressure exits 3 with +inf") {
  const Run r = run({"pressure", "--family", "exp", "--lambda", "1", "--t", "0.3", "--depth", "3"});
  CHECK(r.code == 3);
  CHECK(r.out.find("\"divergent\": true") != std::string::npos);
  CHECK(r.out.find("\"headline\": \"+inf\"") != std::string::npos);
}

TEST_CASE("delta for the circle map brackets 1") {
  const Run r = run({"delta", "--family", "quad", "--c", "0", "--tol", "0.005"});
  CHECK(r.code == 0);
  const RunConfig cfg = parse({"delta", "--family", "quad", "--c", "0", "--tol", "0.005"});
  const CommandResult res = cmd_delta(cfg);
  std::ostringstream csv;
  res.report.write_csv(csv);
  double low = 0, high = 0;
  std::istringstream in(csv.str());
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("t_low,", 0) == 0) low = std::stod(line.substr(6));
    if (line.rfind("t_high,", 0) == 0) high = std::stod(line.substr(7));
  }
  CHECK(low < 1.0);
  CHECK(high > 1.0);
  CHECK(high - low <= 0.01);
}

TEST_CASE("verify koebe passes and exits 0") {
  const Run r = run({"verify", "--suite", "koebe", "--samples", "10000"});
  CHECK(r.code == 0);
  CHECK(r.out.find("\"proven_checks_hold\": true") != std::string::npos);
}

TEST_CASE("gps flags a point in the postsingular set") {
  const Run r = run({"gps", "--family", "exp", "--lambda", "0.2", "--z", "0"});
  CHECK(r.code == 0);
  CHECK(r.out.find("\"not_gps\": true") != std::string::npos);
  const Run far = run({"gps", "--family", "exp", "--lambda", "0.2", "--z", "10+3.14159i"});
  CHECK(far.out.find("\"consistent_with_gps\": true") != std::string::npos);
}

TEST_CASE("csv output has a field block and table blocks") {
  const Run r = run({"pressure", "--family", "quad", "--c", "0", "--t", "1.5", "--depth", "4", "--format", "csv"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("field,value\nschema,bowen-press/1\n", 0) == 0);
  CHECK(r.out.find("\n# levels\nn,log_s_lower,") != std::string::npos);
}

TEST_CASE("--output writes the report to a file") {
  const auto path = std::filesystem::temp_directory_path() / "bowen_press_cli_test.json";
  std::filesystem::remove(path);
  const Run r = run({"gps", "--family", "quad", "--c", "0", "--z", "0.5", "--output", path.string()});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  CHECK(read_file(path) == run({"gps", "--family", "quad", "--c", "0", "--z", "0.5"}).out);
  std::filesystem::remove(path);
}

TEST_CASE("golden pressure report") {
  const Run r = run({"pressure", "--family", "exp", "--lambda", "0.2", "--z", "2+3.14159i", "--t", "1.5", "--depth",
                     "4", "--cutoff", "40", "--decay-cutoff"});
  CHECK(r.code == 0);
  CHECK(r.out == read_file(std::filesystem::path(BOWEN_GOLDEN_DIR) / "pressure_exp_lambda0.2_t1.5.json"));
}

TEST_CASE("output is byte-identical across 1, 2 and 8 threads") {
  const std::vector<std::vector<std::string>> commands{
      {"pressure", "--family", "exp", "--lambda", "0.2", "--z", "2+3.14159i", "--t", "1.5", "--depth", "3",
       "--cutoff", "20"},
      {"curve", "--family", "tan", "--lambda", "0.5", "--depth", "3", "--cutoff", "6", "--format", "csv"},
      {"delta", "--family", "quad", "--c", "0"},
      {"repeller", "--family", "quad", "--c", "0", "--t", "1", "--budget", "24"},
      {"gps", "--family", "exp", "--lambda", "0.2", "--z", "2+3.14159i"},
      {"verify", "--samples", "1000"}};
  for (const auto& cmd : commands) {
    CAPTURE(cmd.front());
    std::string first;
    for (const char* threads : {"1", "2", "8"}) {
      auto args = cmd;
      args.insert(args.end(), {"--threads", threads});
      const Run r = run(args);
      CHECK(r.code == 0);
      if (first.empty())
        first = r.out;
      else
        CHECK(r.out == first);
    }
  }
}
