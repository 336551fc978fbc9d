#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "support/fixtures.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("storegrid_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Result run(const std::string& args) {
  const fs::path dir = fs::temp_directory_path();
  const std::string tag = std::to_string(::getpid());
  const fs::path out = dir / ("storegrid_cli_stdout_" + tag), err = dir / ("storegrid_cli_stderr_" + tag);
  const std::string cmd = std::string(STOREGRID_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// The structured error record is the last line on stderr.
nlohmann::json error_of(const Result& r) {
  std::string last, line;
  std::istringstream in(r.err);
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  return nlohmann::json::parse(last);
}

std::string data(const std::string& name) { return fixture::data_path(name); }

void write(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

// Every file of a run except wall-clock timings.
std::map<std::string, std::string> artifacts(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "timings.json")
      out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

}  // namespace

TEST(Cli, ValidateLayout) {
  const Result ok = run("validate-layout " + data("store.json"));
  ASSERT_EQ(ok.code, 0) << ok.err;
  const auto j = nlohmann::json::parse(ok.out);
  EXPECT_EQ(j["width"], 16);
  EXPECT_EQ(j["categories"], 11);

  const fs::path dir = scratch("badlayout");
  auto doc = fixture::layout_doc({"#S##", "E.C#", "####"}, {{"a", {{1, 0}}}});
  doc["grid"][1] = "ES C";
  write(dir / "bad.json", doc.dump());
  const Result bad = run("validate-layout " + (dir / "bad.json").string());
  EXPECT_EQ(bad.code, 2);
  const auto e = error_of(bad);
  EXPECT_EQ(e["error"], "validation");
  EXPECT_EQ(e["exit_code"], 2);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("generate --no-such-flag 1").code, 2);
  EXPECT_EQ(run("--workers 0 validate-layout " + data("store.json")).code, 2);
  const Result r = run("generate --layout " + data("store.json") + " --method walk --basket bakery");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(error_of(r)["message"].get<std::string>().find("walk"), std::string::npos);
}

TEST(Cli, ConfigUnknownKeyRejected) {
  const fs::path dir = scratch("config");
  auto cfg = nlohmann::json::parse(slurp(data("experiment.json")));
  cfg["layout"] = data("store.json");
  cfg["basket_mix"] = data("basket_mix.json");
  cfg["colour"] = "blue";
  write(dir / "c.json", cfg.dump());
  const Result r = run("generate --config " + (dir / "c.json").string() + " --method tsp --count 5");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(error_of(r)["message"].get<std::string>().find("colour"), std::string::npos);
}

TEST(Cli, ConfigWithOverrides) {
  const fs::path dir = scratch("override");
  auto cfg = nlohmann::json::parse(slurp(data("experiment.json")));
  cfg["layout"] = data("store.json");
  cfg["basket_mix"] = data("basket_mix.json");
  cfg["output"] = "out";
  write(dir / "c.json", cfg.dump());
  const Result r = run("generate --config " + (dir / "c.json").string() + " --method tsp --method pnn --count 20 --seed 4");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto man = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  EXPECT_EQ(man["config"]["count"], 20);
  EXPECT_EQ(man["config"]["seed"], 4);
  EXPECT_EQ(man["config"]["methods"], (nlohmann::json{"tsp", "pnn"}));
  EXPECT_EQ(man["methods"]["pnn"]["retention_rate"], 1.0);
  EXPECT_TRUE(fs::exists(dir / "out" / "tsp.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "out" / "layout.json"));
  std::ifstream in(dir / "out" / "pnn.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) lines += !line.empty();
  EXPECT_EQ(lines, 20);
}

TEST(Cli, RuntimeFailureExitsThree) {
  const fs::path dir = scratch("runtime");
  write(dir / "tight.json", fixture::layout_doc({"#S##", "E.C#", "####"}, {{"a", {{1, 0}}}}).dump());
  const Result r = run("generate --layout " + (dir / "tight.json").string() +
                       " --method human --basket a --count 5 --detour-target 3 --out " + (dir / "o").string());
  EXPECT_EQ(r.code, 3) << r.err;
  EXPECT_EQ(error_of(r)["error"], "runtime");
}

TEST(Cli, ReportAndMissingArtifacts) {
  const fs::path empty = scratch("empty");
  const Result r = run("report " + empty.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("nothing to report"), std::string::npos);

  write(empty / "divergence.csv", "method,jsd\n");
  const Result m = run("analyze " + empty.string());
  EXPECT_EQ(m.code, 2);
  const std::string msg = error_of(m)["message"];
  EXPECT_NE(msg.find("manifest.json"), std::string::npos);
  EXPECT_NE(msg.find("layout.json"), std::string::npos);

  EXPECT_EQ(run("analyze " + (empty / "nope").string()).code, 2);
}

TEST(Cli, GenerateAnalyzeTrafficReport) {
  const fs::path dir = scratch("pipeline");
  const std::string out = (dir / "run").string();
  const Result g = run("generate --layout " + data("store.json") + " --mix " + data("basket_mix.json") +
                       " --method tsp --method pnn --method human --count 60 --seed 2 --out " + out);
  ASSERT_EQ(g.code, 0) << g.err;
  const Result a = run("analyze " + out);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("tsp"), std::string::npos);
  const auto analysis = nlohmann::json::parse(slurp(dir / "run" / "analysis.json"));
  for (const auto& [m, total] : analysis["occupancy_total"].items()) EXPECT_NEAR(total.get<double>(), 1.0, 1e-9) << m;
  ASSERT_EQ(run("traffic " + out).code, 0);
  EXPECT_TRUE(fs::exists(dir / "run" / "traffic" / "pnn.csv"));
  ASSERT_EQ(run("report " + out).code, 0);
  const std::string report = slurp(dir / "run" / "report.md");
  EXPECT_NE(report.find("Divergence"), std::string::npos);
  EXPECT_NE(report.find("Shelf traffic"), std::string::npos);
}

TEST(Cli, TspGenerationIsDeterministic) {
  const fs::path dir = scratch("tsp");
  const std::string base =
      "generate --layout " + data("store.json") + " --method tsp --basket hot_coffee,bakery --count 100 --seed 7 --out ";
  ASSERT_EQ(run(base + (dir / "a").string()).code, 0);
  ASSERT_EQ(run(base + (dir / "b").string()).code, 0);
  EXPECT_EQ(artifacts(dir / "a"), artifacts(dir / "b"));
  // one basket, so every trajectory is the same apart from its id
  std::ifstream in(dir / "a" / "tsp.jsonl");
  std::string line;
  std::set<std::string> distinct;
  int lines = 0;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    j.erase("id");
    distinct.insert(j.dump());
    ++lines;
  }
  EXPECT_EQ(lines, 100);
  EXPECT_EQ(distinct.size(), 1u);
}

TEST(Cli, OutputIndependentOfWorkers) {
  const fs::path dir = scratch("workers");
  const std::string base = "generate --layout " + data("store.json") + " --mix " + data("basket_mix.json") +
                           " --method pnn --method human --method maxent --budget-mode ratio --count 40 --seed 6 --out ";
  const Result one = run("--workers 1 " + base + (dir / "w1").string());
  ASSERT_EQ(one.code, 0) << one.err;
  const Result three = run("--workers 3 " + base + (dir / "w3").string());
  ASSERT_EQ(three.code, 0) << three.err;
  const auto a = artifacts(dir / "w1"), b = artifacts(dir / "w3");
  EXPECT_EQ(a.size(), 5u);
  EXPECT_EQ(a, b);
  const auto man = nlohmann::json::parse(a.at("manifest.json"));
  const auto& me = man["methods"]["maxent"];
  EXPECT_GT(me["retention_rate"].get<double>(), 0.0);
  EXPECT_LE(me["retention_rate"].get<double>(), 1.0);
  EXPECT_GT(me["mean_length"].get<double>(), 0.0);
  EXPECT_TRUE(nlohmann::json::parse(slurp(dir / "w1" / "timings.json")).contains("maxent"));
}

TEST(Cli, ClusterCommand) {
  const Result r = run("cluster --layout " + data("store.json") + " --baskets " + data("basket_mix.json") +
                       " --k-max 5 --seed 3");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_GE(j["k"].get<int>(), 1);
  EXPECT_EQ(j["clusters"].size(), j["k"].get<std::size_t>());
  EXPECT_EQ(j["wcss"].size(), 5u);
}
