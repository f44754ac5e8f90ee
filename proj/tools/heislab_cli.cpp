// Command-line front end. Talks to the library only through the C interface.
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "heislab/heislab.h"

namespace {

struct Subcommand {
  std::string name;
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
};

int fail(heis_status s, const char* what) {
  std::fprintf(stderr, "heislab: %s: %s (%s)\n", what, heis_last_error(), heis_status_name(s));
  return heis_exit_code(s, nullptr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heat and semilinear heat flows on the Heisenberg group"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(heis_version()));

  std::string config_path;
  std::string out_dir = "heislab-out";
  int workers = 1;
  std::uint64_t seed = 20240917;
  bool force = false;
  app.add_option("--config", config_path, "flat key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--workers", workers, "concurrent runs for sweeps")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--seed", seed, "seed for all randomness")->capture_default_str();
  app.add_flag("--force", force, "overwrite a previous run in the output directory");

  std::vector<Subcommand> subs(heis_command_count());
  for (std::size_t i = 0; i < subs.size(); ++i) {
    Subcommand& s = subs[i];
    s.name = heis_command_name(i);
    s.app = app.add_subcommand(s.name, "run the " + s.name + " workflow");
    std::size_t nkeys = 0;
    if (heis_status st = heis_command_key_count(s.name.c_str(), &nkeys); st != HEIS_OK) return fail(st, "key list");
    for (std::size_t k = 0; k < nkeys; ++k) {
      const char* name = nullptr;
      const char* def = nullptr;
      const char* desc = nullptr;
      heis_command_key(s.name.c_str(), k, &name, &def, &desc);
      const std::string help = std::string(desc) + " [default: " + (*def ? def : "\"\"") + "]";
      s.options[name] = s.app->add_option("--" + std::string(name), s.values[name], help);
    }
  }

  CLI11_PARSE(app, argc, argv);

  for (Subcommand& s : subs) {
    if (!s.app->parsed()) continue;
    heis_config* cfg = nullptr;
    if (heis_status st = heis_config_create(s.name.c_str(), &cfg); st != HEIS_OK) return fail(st, "config");
    auto cleanup = [&](int code) {
      heis_config_destroy(cfg);
      return code;
    };
    heis_status st = HEIS_OK;
    if (!config_path.empty()) st = heis_config_load_file(cfg, config_path.c_str());
    for (const auto& [key, opt] : s.options) {
      if (st == HEIS_OK && opt->count() > 0) st = heis_config_set(cfg, key.c_str(), s.values[key].c_str());
    }
    if (st == HEIS_OK) st = heis_config_set_workers(cfg, workers);
    if (st == HEIS_OK) st = heis_config_set_seed(cfg, seed);
    if (st == HEIS_OK) st = heis_config_resolve(cfg);
    if (st != HEIS_OK) return cleanup(fail(st, "configuration"));

    const char* dump = nullptr;
    heis_config_dump(cfg, &dump);
    std::printf("# heislab %s %s (workers=%d seed=%llu)\n%s", heis_version(), s.name.c_str(), workers,
                static_cast<unsigned long long>(seed), dump);
    std::fflush(stdout);

    heis_report* rep = nullptr;
    st = heis_run(cfg, out_dir.c_str(), force ? 1 : 0, &rep);
    if (st != HEIS_OK) return cleanup(fail(st, s.name.c_str()));
    for (std::size_t i = 0; i < heis_report_check_count(rep); ++i) {
      const char* name = nullptr;
      const char* detail = nullptr;
      int pass = 0;
      double value = 0.0;
      heis_report_check(rep, i, &name, &pass, &value, &detail);
      std::printf("%s  %s  (%.6g)%s%s\n", pass ? "PASS" : "FAIL", name, value, *detail ? "  " : "", detail);
    }
    std::printf("%s\nreports in %s:", heis_report_summary(rep), out_dir.c_str());
    for (std::size_t i = 0; i < heis_report_file_count(rep); ++i) std::printf(" %s", heis_report_file(rep, i));
    std::printf(" run-manifest.json\n");
    const int code = heis_exit_code(HEIS_OK, rep);
    heis_report_destroy(rep);
    return cleanup(code);
  }
  return HEIS_EXIT_INTERNAL_ERROR;
}
