#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <sys/wait.h>

#include "collabnet/error.hpp"
#include "collabnet/pipeline.hpp"
#include "tempdir.hpp"

using namespace collabnet;
using nlohmann::json;
using testing::slurp;
using testing::TempDir;
namespace fs = std::filesystem;

namespace {

const fs::path kMini = fs::path(COLLABNET_FIXTURES) / "mini";
const char* const kStages[] = {"ingest", "analyze", "temporal", "report"};

/// Copies the mini fixture into a scratch directory.
void stage_fixture(const TempDir& dir) {
  for (const auto& e : fs::directory_iterator(kMini)) fs::copy(e.path(), dir.path() / e.path().filename());
}

RunConfig config_in(const TempDir& dir) { return load_config(dir.path() / "run.json"); }

StageResult run_stage(const RunConfig& c, std::string_view stage) {
  if (stage == "ingest") return cmd_ingest(c);
  if (stage == "analyze") return cmd_analyze(c);
  if (stage == "temporal") return cmd_temporal(c);
  return cmd_report(c);
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  if (!fs::exists(root)) return files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
  return files;
}

struct Run {
  int code;
  std::string out;
};

/// Runs a shell command and captures stdout.
Run shell(const std::string& cmd) {
  Run r{0, {}};
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string cli(const fs::path& config, std::string_view stage, std::string_view extra = "") {
  return std::string(COLLABNET_CLI) + " " + std::string(stage) + " --config '" + config.string() +
         "' " + std::string(extra) + " >/dev/null 2>&1";
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config parsing") {
  auto c = parse_config(R"({"programmes":[{"programme":"H2020","projects":"p.csv",
      "organizations":"o.csv","topics":"t.csv"}],"algorithm":"LP","baseSeed":"18446744073709551615",
      "exploration":{"tMax":10,"workers":3},"topN":4})",
                        "/base");
  REQUIRE(c.programmes.size() == 1);
  CHECK(c.programmes[0].projects == fs::path("/base/p.csv"));
  CHECK(c.algorithm == Algorithm::LabelPropagation);
  CHECK(c.baseSeed == 18446744073709551615ull);
  CHECK(c.exploration.tMax == 10);
  CHECK(c.exploration.workers == 3);
  CHECK(c.topN == 4u);
  CHECK(c.output == fs::path("/base/out"));

  // the canonical form parses back to itself
  CHECK(config_to_json(parse_config(config_to_json(c), "/base")) == config_to_json(c));

  CHECK_THROWS_AS(parse_config(R"({"algorithm":"infomap"})"), Error);
  CHECK_THROWS_AS(parse_config(R"({"theta":1.5})"), Error);
  CHECK_THROWS_AS(parse_config(R"({"exploration":{"tMax":0}})"), Error);
  CHECK_THROWS_AS(parse_config("{not json"), Error);
}

TEST_CASE("full run and manifests") {
  TempDir dir;
  stage_fixture(dir);
  const auto c = config_in(dir);
  for (auto s : kStages) {
    CAPTURE(s);
    CHECK(run_stage(c, s).code == ExitCode::Ok);
    const auto m = json::parse(slurp(stage_dir(c, s) / "manifest.json"));
    CHECK(m["schemaVersion"] == 1);
    CHECK(m["stage"] == s);
    CHECK(m["config"] == json::parse(config_to_json(c)));
    for (const auto& o : m["outputs"]) {
      const auto path = stage_dir(c, s) / o["file"].get<std::string>();
      REQUIRE(fs::exists(path));
      const auto sum = shell("sha256sum '" + path.string() + "'").out.substr(0, 64);
      CHECK(o["sha256"] == sum);
    }
  }

  const auto ingest = json::parse(slurp(stage_dir(c, "ingest") / "manifest.json"));
  for (const auto& [table, n] : ingest["rowCounts"].items())
    CHECK(n["in"].get<int>() == n["accepted"].get<int>() + n["rejected"].get<int>());
  CHECK(ingest["rowCounts"]["projects"]["rejected"] == 1);
  CHECK(ingest["rowCounts"]["participations"]["rejected"] == 1);
  CHECK(ingest["unit"] == "kEUR");
  CHECK(slurp(stage_dir(c, "ingest") / "rejects.csv") ==
        "table,line,reason\nprojects,30,bad date\nparticipations,82,missing value\n");

  // the topic filter drops project 193
  CHECK(slurp(stage_dir(c, "ingest") / "projects.csv").find("\n193,") == std::string::npos);

  // yearly totals in the manifest match weights.csv
  std::map<int, double> totals;
  std::istringstream w(slurp(stage_dir(c, "ingest") / "weights.csv"));
  std::string line;
  std::getline(w, line);
  while (std::getline(w, line)) totals[std::stoi(line)] += std::stod(line.substr(line.rfind(',') + 1));
  for (const auto& y : ingest["years"])
    CHECK(y["total"].get<double>() == doctest::Approx(totals.at(y["year"].get<int>())).epsilon(1e-12));

  const auto report = slurp(stage_dir(c, "report") / "report.json");
  CHECK(validate_report_json(report).empty());
}

TEST_CASE("reruns are byte-identical and stages are isolated") {
  TempDir dir;
  stage_fixture(dir);
  const auto c = config_in(dir);
  for (auto s : kStages) REQUIRE(run_stage(c, s).code == ExitCode::Ok);
  const auto first = snapshot(c.output);

  for (auto s : kStages) run_stage(c, s);
  CHECK(snapshot(c.output) == first);

  // deleting everything downstream of ingest and rerunning restores the same bytes
  for (auto s : {"analyze", "temporal", "report"}) fs::remove_all(stage_dir(c, s));
  for (auto s : {"analyze", "temporal", "report"}) REQUIRE(run_stage(c, s).code == ExitCode::Ok);
  CHECK(snapshot(c.output) == first);

  // more workers, same answer
  auto parallel = c;
  parallel.exploration.workers = 4;
  fs::remove_all(stage_dir(c, "analyze"));
  REQUIRE(run_stage(parallel, "analyze").code == ExitCode::Ok);
  CHECK(snapshot(c.output).size() == first.size());
  for (const auto& [name, bytes] : snapshot(c.output))
    if (name.rfind("analyze/", 0) == 0 && name != "analyze/manifest.json") CHECK(bytes == first.at(name));
}

TEST_CASE("missing inputs fail without partial outputs") {
  TempDir dir;
  stage_fixture(dir);
  fs::remove(dir.path() / "projects.csv");
  const auto c = config_in(dir);
  try {
    cmd_ingest(c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingInput);
    CHECK(std::string(e.what()).find("projects.csv") != std::string::npos);
  }
  CHECK(snapshot(c.output).empty());
  CHECK(shell(cli(dir.path() / "run.json", "ingest")).code == 2);
  CHECK(snapshot(c.output).empty());

  // downstream stages need their upstream
  CHECK(shell(cli(dir.path() / "run.json", "analyze")).code == 2);
  CHECK(shell(cli(dir.path() / "run.json", "report")).code == 2);
  CHECK(snapshot(c.output).empty());
}

TEST_CASE("temporal needs consecutive years") {
  TempDir dir;
  stage_fixture(dir);
  const auto c = config_in(dir);
  REQUIRE(cmd_ingest(c).code == ExitCode::Ok);
  REQUIRE(cmd_analyze(c).code == ExitCode::Ok);

  // drop 2021 from the analysis outputs
  const auto parts = stage_dir(c, "analyze") / "partitions.csv";
  std::istringstream in(slurp(parts));
  std::string kept, line;
  while (std::getline(in, line))
    if (line.rfind("2021,", 0) != 0) kept += line + "\n";
  std::ofstream(parts, std::ios::binary) << kept;
  auto m = json::parse(slurp(stage_dir(c, "analyze") / "manifest.json"));
  json years = json::array();
  for (const auto& y : m["years"])
    if (y != 2021 && !(y.is_object() && y["year"] == 2021)) years.push_back(y);
  m["years"] = years;
  std::ofstream(stage_dir(c, "analyze") / "manifest.json", std::ios::binary) << m.dump(2);

  try {
    cmd_temporal(c);
    FAIL("expected MissingYear");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingYear);
    CHECK(std::string(e.what()).find("2021") != std::string::npos);
  }
  CHECK(!fs::exists(stage_dir(c, "temporal")));
}

TEST_CASE("report schema check catches problems") {
  CHECK(!validate_report_json("{}").empty());
  CHECK(!validate_report_json("[]").empty());
  CHECK(!validate_report_json("not json").empty());
  CHECK(!validate_report_json(R"({"schemaVersion":2})").empty());
}

TEST_CASE("command line") {
  TempDir dir;
  stage_fixture(dir);
  const auto cfg = dir.path() / "run.json";
  CHECK(shell(std::string(COLLABNET_CLI) + " --help >/dev/null 2>&1").code == 0);
  CHECK(shell(std::string(COLLABNET_CLI) + " >/dev/null 2>&1").code == 2);
  CHECK(shell(std::string(COLLABNET_CLI) + " ingest >/dev/null 2>&1").code == 2);
  CHECK(shell(cli(dir.path() / "absent.json", "ingest")).code == 2);
  CHECK(shell(cli(cfg, "ingest", "--workers 0")).code == 2);

  for (auto s : kStages) CHECK(shell(cli(cfg, s)).code == 0);
  const auto a = snapshot(dir.path() / "out");

  // --out and --seed override the config
  const auto other = dir.path() / "elsewhere";
  for (auto s : kStages) CHECK(shell(cli(cfg, s, "--out '" + other.string() + "'")).code == 0);
  auto b = snapshot(other);
  CHECK(b.size() == a.size());
  for (const auto& [name, bytes] : b)
    if (name.find("manifest.json") == std::string::npos) CHECK(bytes == a.at(name));

  CHECK(shell(cli(cfg, "ingest", "--seed 99 --out '" + (dir.path() / "s99").string() + "'")).code == 0);
  const auto m = json::parse(slurp(dir.path() / "s99" / "ingest" / "manifest.json"));
  CHECK(m["config"]["baseSeed"] == "99");
}

}  // TEST_SUITE
