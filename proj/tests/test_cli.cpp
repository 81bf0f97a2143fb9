// SPDX-License-Identifier: Apache-2.0
//
// End-to-end checks of the installed command-line tool: exit codes, output
// schemas, and byte-level reproducibility.  The binary path and the data
// directory come in as compile definitions.
#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string kCli = MDAGG_CLI_PATH;
const std::string kData = MDAGG_DATA_DIR;

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "mdagg_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string& args, const std::string& stdout_path = "") {
  std::string cmd = "\"" + kCli + "\" " + args;
  if (!stdout_path.empty()) cmd += " > \"" + stdout_path + "\"";
  cmd += " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path p = work_dir() / name;
  std::ofstream out(p);
  out << body;
  return p;
}

fs::path analyze_config() {
  return write_config("analyze.conf",
                      "channel.table = " + kData +
                          "/channel_synthetic.csv\n"
                          "scenario.n1 = 10\n"
                          "scenario.n2 = 10\n"
                          "scenario.rssi_class2 = 35\n"
                          "scenario.frame_bytes = 65535\n"
                          "analyze.rssi_min = 14\n"
                          "analyze.rssi_max = 16\n"
                          "analyze.rssi_step = 1\n"
                          "analyze.schemes = uncoded, timesharing\n");
}

int data_lines(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') ++n;
  return n;
}

}  // namespace

TEST_CASE("analyze writes a manifested CSV report") {
  const fs::path cfg = analyze_config();
  const fs::path out = work_dir() / "report.csv";
  const fs::path sweep = work_dir() / "sweep.csv";
  const int rc = run_cli("analyze --config \"" + cfg.string() + "\" --out \"" +
                         out.string() + "\" --sweep-out \"" + sweep.string() +
                         "\"");
  CHECK(rc == 0);
  const std::string text = slurp(out);
  CHECK(text.rfind("# command: ", 0) == 0);
  CHECK(text.find("# schema: mdagg-analyze-v1\n") != std::string::npos);
  CHECK(text.find("rssi_dbm,scheme,status,best_rate_mbps,throughput_mbps,"
                  "x1_down_bytes,x2_down_bytes,beta,gain_vs_uncoded\n") !=
        std::string::npos);
  // 3 RSSI points x 2 schemes, plus the column header
  CHECK(data_lines(text) == 1 + 6);
  // the uncoded rows carry a zero gain reference
  CHECK(text.find(",uncoded,ok,") != std::string::npos);
  CHECK(text.find(",timesharing,ok,") != std::string::npos);

  const std::string sweep_text = slurp(sweep);
  CHECK(sweep_text.find("# schema: mdagg-analyze-sweep-v1\n") !=
        std::string::npos);
  // 6 report rows x 8 PHY rates, plus the column header
  CHECK(data_lines(sweep_text) == 1 + 48);
}

TEST_CASE("re-running the same command is byte-identical") {
  const fs::path cfg = analyze_config();
  const fs::path out = work_dir() / "repeat.csv";
  const std::string args =
      "analyze --config \"" + cfg.string() + "\" --out \"" + out.string() + "\"";
  REQUIRE(run_cli(args) == 0);
  const std::string first = slurp(out);
  REQUIRE(run_cli(args) == 0);
  CHECK(slurp(out) == first);
}

TEST_CASE("analyze emits JSON rows on request") {
  const fs::path cfg = analyze_config();
  const fs::path out = work_dir() / "report.json";
  REQUIRE(run_cli("analyze --config \"" + cfg.string() +
                  "\" --format json --out \"" + out.string() + "\"") == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j.at("schema") == "mdagg-analyze-v1");
  CHECK(j.at("manifest").at("seed") == 0);
  REQUIRE(j.at("rows").size() == 6);
  int ok_rows = 0;
  for (const auto& row : j.at("rows")) {
    const std::string status = row.at("status").get<std::string>();
    if (status == "ok") {
      ++ok_rows;
      CHECK(row.at("throughput_mbps").get<double>() > 0.0);
    } else {
      // The uncoded uplink-fairness staircase leaves isolated grid points
      // with no feasible rate; such rows must carry a reason instead.
      CHECK(status == "infeasible");
      CHECK(!row.at("reason").get<std::string>().empty());
    }
    // Coded downlink must stay feasible across this mid-range RSSI window.
    if (row.at("scheme") == "timesharing") CHECK(status == "ok");
  }
  CHECK(ok_rows >= 4);
}

TEST_CASE("stdout is the default sink") {
  const fs::path cfg = analyze_config();
  const fs::path cap = work_dir() / "stdout.txt";
  REQUIRE(run_cli("analyze --config \"" + cfg.string() + "\"", cap.string()) ==
          0);
  CHECK(slurp(cap).find("# schema: mdagg-analyze-v1\n") != std::string::npos);
}

TEST_CASE("exit code 2 when no operating point is feasible") {
  const fs::path cfg = write_config(
      "infeasible.conf",
      "channel.table = " + kData +
          "/channel_synthetic.csv\n"
          "scenario.n1 = 1\n"
          "scenario.n2 = 1\n"
          "analyze.rssi_min = 0\n"
          "analyze.rssi_max = 0\n"
          "analyze.rssi_step = 1\n"
          "analyze.schemes = timesharing\n");
  const fs::path out = work_dir() / "infeasible.csv";
  CHECK(run_cli("analyze --config \"" + cfg.string() + "\" --out \"" +
                out.string() + "\"") == 2);
  CHECK(slurp(out).find(",timesharing,infeasible,") != std::string::npos);
}

TEST_CASE("usage errors exit with code 1") {
  CHECK(run_cli("analyze") == 1);                       // missing --config
  CHECK(run_cli("frobnicate") == 1);                    // unknown subcommand
  CHECK(run_cli("analyze --config /does/not/exist") == 1);
  const fs::path cfg = analyze_config();
  CHECK(run_cli("analyze --config \"" + cfg.string() + "\" --format xml") ==
        1);
}

TEST_CASE("simulate produces parseable metrics and honours --seed") {
  const fs::path cfg = write_config("sim.conf",
                                    "sim.n_stations = 3\n"
                                    "sim.arrival = poisson\n"
                                    "sim.arrival_rate = 500\n"
                                    "sim.packet_size = 500\n"
                                    "sim.uplink_enabled = true\n"
                                    "sim.duration_s = 0.2\n"
                                    "sim.seed = 5\n");
  const fs::path out = work_dir() / "sim.json";
  const std::string base = "simulate --config \"" + cfg.string() +
                           "\" --format json --out \"" + out.string() + "\"";
  REQUIRE(run_cli(base) == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j.at("schema") == "mdagg-simulate-v1");
  CHECK(j.at("manifest").at("seed") == 5);
  CHECK(j.at("metrics").at("network_throughput_mbps").is_number());
  CHECK(j.at("metrics").at("per_flow").size() == 6);
  const std::string with_config_seed = slurp(out);

  REQUIRE(run_cli(base + " --seed 9") == 0);
  const std::string with_flag_seed = slurp(out);
  CHECK(with_flag_seed != with_config_seed);
  CHECK(nlohmann::json::parse(with_flag_seed).at("manifest").at("seed") == 9);
  REQUIRE(run_cli(base + " --seed 9") == 0);
  CHECK(slurp(out) == with_flag_seed);

  const fs::path csv = work_dir() / "sim.csv";
  REQUIRE(run_cli("simulate --config \"" + cfg.string() + "\" --out \"" +
                  csv.string() + "\"") == 0);
  const std::string text = slurp(csv);
  CHECK(text.find("metric,value\n") != std::string::npos);
  CHECK(text.find("network_throughput_mbps,") != std::string::npos);
  CHECK(text.find("flow_id,arrivals,delivered,") != std::string::npos);
}

TEST_CASE("codec-demo reports per-destination outcomes") {
  const fs::path out = work_dir() / "codec.json";
  REQUIRE(run_cli("codec-demo --config \"" + kData +
                  "/codec_demo.conf\" --format json --out \"" + out.string() +
                  "\"") == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j.at("schema") == "mdagg-codec-v1");
  // 24-byte header + 4 segments of (16 + 300 + 4) bytes
  CHECK(j.at("frame").at("total_len_bytes") == 1304);
  REQUIRE(j.at("destinations").size() == 4);
  CHECK(j.at("destinations")[0].at("station_id") == 1);
  CHECK(j.at("hex_preview").is_string());

  // idealized-code mode: every destination decodes its clean segment
  const fs::path cfg = write_config("codec_ts.conf",
                                    "codec.n_dest = 3\n"
                                    "codec.payload_bytes = 200\n"
                                    "codec.crossover = 0.02\n"
                                    "codec.margin = 0.05\n"
                                    "codec.format = timesharing\n"
                                    "codec.seed = 7\n");
  const fs::path ts = work_dir() / "codec_ts.csv";
  REQUIRE(run_cli("codec-demo --config \"" + cfg.string() + "\" --out \"" +
                  ts.string() + "\"") == 0);
  const std::string text = slurp(ts);
  CHECK(text.find("# schema: mdagg-codec-v1\n") != std::string::npos);
  CHECK(data_lines(text) == 1 + 3);
  CHECK(text.find("1,delivered,1,1,") != std::string::npos);
  CHECK(text.find("3,delivered,1,1,") != std::string::npos);
}
