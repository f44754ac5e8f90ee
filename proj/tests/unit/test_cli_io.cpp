#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "heislab/cli_io.hpp"
#include "heislab/error.hpp"
#include "heislab/grid.hpp"

using namespace heis;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("heislab-cli-" + name);
  fs::remove_all(d);
  return d;
}

nlohmann::json read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "run-manifest.json");
  return nlohmann::json::parse(in);
}

void small_kernel(RunConfig& c) {
  c.set("L_xy", "3");
  c.set("L_tau", "9");
  c.set("N", "33");
  c.set("t", "0.1,0.05");
  c.set("mollifier_width", "0");
}

struct Shell {
  int code = -1;
  std::string out;
};

Shell shell(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "heislab-cli-stdout.txt";
  const std::string cmd = std::string(HEISLAB_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Shell s;
  s.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  s.out = ss.str();
  return s;
}

}  // namespace

TEST_CASE("command names") {
  for (Command c : {Command::kernel, Command::solve, Command::sweep, Command::certify, Command::mild,
                    Command::estimates}) {
    CHECK(command_from_string(to_string(c)) == c);
    CHECK_FALSE(command_keys(c).empty());
  }
  CHECK_THROWS_AS(command_from_string("blowup"), InvalidArgument);
}

TEST_CASE("defaults are materialised on resolve") {
  RunConfig c(Command::kernel);
  CHECK_FALSE(c.resolved());
  c.resolve();
  CHECK(c.resolved());
  CHECK(c.get("n") == "1");
  CHECK(c.get("t") == "0.25");
  CHECK(c.get("N") == "65");
  CHECK(c.real("safety") == 0.4);
  CHECK(c.real("L_tau") == 16.0);
  CHECK(c.flag("write_fields"));
  CHECK(c.reals("t") == std::vector<double>{0.25});
  CHECK(c.dump().find("safety = 0.4\n") != std::string::npos);
  // Every documented key appears in the dump.
  for (const KeySpec& k : command_keys(Command::kernel)) CHECK(c.values().count(k.name) == 1);
}

TEST_CASE("validation names the offending key") {
  RunConfig s(Command::solve);
  s.set("p", "0.9");
  CHECK_THROWS_WITH_AS(s.resolve(), doctest::Contains("p must exceed 1"), InvalidArgument);
  RunConfig k(Command::kernel);
  CHECK_THROWS_WITH_AS(k.set("nonsense", "1"), doctest::Contains("unknown key 'nonsense'"), InvalidArgument);
  k.set("N", "64");
  CHECK_THROWS_WITH_AS(k.resolve(), doctest::Contains("'N'"), InvalidArgument);
  RunConfig m(Command::solve);
  m.set("boundary", "neumann");
  CHECK_THROWS_WITH_AS(m.resolve(), doctest::Contains("'boundary'"), InvalidArgument);
  RunConfig e(Command::sweep);
  e.set("epsilons", "1,2,0.5");
  CHECK_THROWS_WITH_AS(e.resolve(), doctest::Contains("strictly decrease"), InvalidArgument);
  RunConfig x(Command::solve);
  x.set("epsilon", "abc");
  CHECK_THROWS_WITH_AS(x.resolve(), doctest::Contains("not a number"), InvalidArgument);
  RunConfig w(Command::kernel);
  w.workers = 0;
  CHECK_THROWS_AS(w.resolve(), InvalidArgument);
}

TEST_CASE("text configuration and precedence") {
  RunConfig c(Command::solve);
  c.load_text("# comment\n\np = 3\n  epsilon=0.5  \np = 4\n");
  c.resolve();
  CHECK(c.real("p") == 4.0);
  CHECK(c.real("epsilon") == 0.5);
  c.set("p", "5");  // a flag applied after the file wins
  c.resolve();
  CHECK(c.real("p") == 5.0);
  CHECK_THROWS_WITH_AS(c.load_text("p 3\n", "cfg.txt"), doctest::Contains("cfg.txt:1"), InvalidArgument);
  CHECK_THROWS_AS(c.load_file("/nonexistent/heislab.cfg"), IoError);
  const fs::path f = fs::temp_directory_path() / "heislab-cli-test.cfg";
  std::ofstream(f) << "t_max = 2.5\n";
  RunConfig d(Command::solve);
  d.load_file(f.string());
  d.resolve();
  CHECK(d.real("t_max") == 2.5);
  fs::remove(f);
}

TEST_CASE("property: format_real round-trips bit for bit") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint64_t> bits;
  int checked = 0;
  while (checked < 5000) {
    const std::uint64_t b = bits(rng);
    double v;
    std::memcpy(&v, &b, sizeof v);
    if (!std::isfinite(v)) continue;
    const std::string s = format_real(v);
    REQUIRE(s.find(',') == std::string::npos);
    const double back = std::strtod(s.c_str(), nullptr);
    REQUIRE(std::memcmp(&back, &v, sizeof v) == 0);
    ++checked;
  }
  CHECK(format_real(0.25) == "0.25");
  CHECK(format_real(NAN) == "nan");
  CHECK(format_real(-INFINITY) == "-inf");
}

TEST_CASE("CSV round trip") {
  const fs::path f = fs::temp_directory_path() / "heislab-cli-test.csv";
  CsvWriter w(f.string(), {"a", "b"});
  w.row({format_real(0.1), format_real(1e-300)});
  w.row({"x", "y"});
  CHECK_THROWS_AS(w.row({"only"}), InvalidArgument);
  w.close();
  const auto rows = read_csv(f.string());
  REQUIRE(rows.size() == 3u);
  CHECK(rows[0] == std::vector<std::string>{"a", "b"});
  CHECK(std::strtod(rows[1][0].c_str(), nullptr) == 0.1);
  CHECK(std::strtod(rows[1][1].c_str(), nullptr) == 1e-300);
  CHECK(rows[2][1] == "y");
  fs::remove(f);
  CHECK_THROWS_AS(read_csv("/nonexistent/x.csv"), IoError);
}

TEST_CASE("run_command writes reports and a manifest") {
  const fs::path dir = fresh_dir("kernel");
  RunConfig c(Command::kernel);
  small_kernel(c);
  const CommandReport rep = run_command(c, dir.string(), false);
  CHECK(rep.all_pass());
  CHECK(rep.checks.size() == 2u);
  CHECK(rep.files == std::vector<std::string>{"kernel-t0.05.hfield", "kernel-t0.1.hfield", "kernel-report.csv"});
  for (const std::string& f : rep.files) CHECK(fs::exists(dir / f));
  const auto rows = read_csv((dir / "kernel-report.csv").string());
  REQUIRE(rows.size() == 3u);  // sorted times
  CHECK(rows[1][0] == "0.050000000000000003");
  const ScalarField k = read_hfield((dir / "kernel-t0.1.hfield").string());
  CHECK(integrate(k) == doctest::Approx(std::strtod(rows[2][1].c_str(), nullptr)).epsilon(1e-15));
  const nlohmann::json m = read_manifest(dir);
  CHECK(m["status"] == "pass");
  CHECK(m["exit_code"] == 0);
  CHECK(m["command"] == "kernel");
  CHECK(m["config"]["N"] == "33");
  CHECK(m["seed"] == 20240917u);
  CHECK(m["files"].size() == 3u);

  // A second run into the same directory is refused unless forced.
  RunConfig again(Command::kernel);
  small_kernel(again);
  CHECK_THROWS_WITH_AS(run_command(again, dir.string(), false), doctest::Contains("--force"), IoError);
  CHECK_NOTHROW(run_command(again, dir.string(), true));
  fs::remove_all(dir);
}

TEST_CASE("run_command records errors in the manifest") {
  const fs::path dir = fresh_dir("error");
  RunConfig c(Command::solve);
  c.set("N", "17");
  c.set("epsilon", "1e7");  // above blowup_threshold / 100
  CHECK_THROWS_AS(run_command(c, dir.string(), false), InvalidArgument);
  const nlohmann::json m = read_manifest(dir);
  CHECK(m["status"] == "error");
  CHECK(m["exit_code"] == static_cast<int>(exit_config_error));
  CHECK(m["error"].get<std::string>().find("blowup_threshold") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("command-line tool exit codes") {
  CHECK(shell("--help").code == 0);
  CHECK(shell("--version").out.find(library_version()) != std::string::npos);
  const Shell bad_p = shell("solve --p 0.9 --out " + fresh_dir("badp").string());
  CHECK(bad_p.code == static_cast<int>(exit_config_error));
  CHECK(bad_p.out.find("p must exceed 1") != std::string::npos);
  CHECK(shell("frobnicate").code != 0);

  const fs::path dir = fresh_dir("tool");
  const std::string args = "kernel --L_xy 3 --L_tau 9 --N 33 --t 0.05 --mollifier_width 0 --out " + dir.string();
  const Shell ok = shell(args);
  CHECK(ok.code == 0);
  CHECK(ok.out.find("N = 33") != std::string::npos);
  CHECK(ok.out.find("PASS  mass t=0.05") != std::string::npos);
  CHECK(fs::exists(dir / "run-manifest.json"));
  CHECK(shell(args).code == static_cast<int>(exit_io_error));
  CHECK(shell(args + " --force").code == 0);

  // Flags override the configuration file.
  const fs::path cfg = dir / "kernel.cfg";
  std::ofstream(cfg) << "N = 9\nt = 0.01\n";
  const Shell merged = shell("--config " + cfg.string() + " " + args + " --force");
  CHECK(merged.out.find("N = 33") != std::string::npos);
  CHECK(merged.out.find("t = 0.05") != std::string::npos);
  fs::remove_all(dir);
  fs::remove_all(fresh_dir("badp"));
}
