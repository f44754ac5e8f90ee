#include "heislab/heislab.h"

#include <cstdio>
#include <exception>
#include <memory>
#include <mutex>
#include <new>
#include <string>

#include "heislab/cli_io.hpp"
#include "heislab/error.hpp"
#include "heislab/grid.hpp"
#include "heislab/group.hpp"
#include "heislab/solver.hpp"
#include "heislab/sublaplacian.hpp"
#include "heislab/sweep.hpp"

struct heis_field {
  heis::ScalarField field;
};

struct heis_config {
  explicit heis_config(heis::Command c) : config(c) {}
  heis::RunConfig config;
  std::string scratch;
};

struct heis_report {
  heis::CommandReport report;
};

namespace {

thread_local std::string last_error;

heis_status status_of(heis::ErrorKind k) {
  switch (k) {
    case heis::ErrorKind::invalid_argument: return HEIS_ERR_INVALID_ARGUMENT;
    case heis::ErrorKind::numerical: return HEIS_ERR_NUMERICAL;
    case heis::ErrorKind::io: return HEIS_ERR_IO;
    case heis::ErrorKind::check_failed: return HEIS_ERR_CHECK_FAILED;
  }
  return HEIS_ERR_INTERNAL;
}

// Runs f, translating exceptions into status codes and the thread-local message.
template <class F>
heis_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return HEIS_OK;
  } catch (const heis::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return HEIS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return HEIS_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return HEIS_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw heis::InvalidArgument(what);
}

std::mutex warning_mutex;
heis_warning_fn warning_fn = nullptr;
void* warning_user = nullptr;

void warning_trampoline(const std::string& message) {
  std::lock_guard<std::mutex> lock(warning_mutex);
  if (warning_fn) warning_fn(message.c_str(), warning_user);
  else std::fprintf(stderr, "warning: %s\n", message.c_str());
}

const heis::Command all_commands[] = {heis::Command::kernel, heis::Command::solve,   heis::Command::sweep,
                                      heis::Command::certify, heis::Command::mild, heis::Command::estimates};

}  // namespace

extern "C" {

const char* heis_version(void) {
  static const std::string v = heis::library_version();
  return v.c_str();
}

const char* heis_last_error(void) { return last_error.c_str(); }

const char* heis_status_name(heis_status status) {
  switch (status) {
    case HEIS_OK: return "ok";
    case HEIS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case HEIS_ERR_NUMERICAL: return "numerical failure";
    case HEIS_ERR_IO: return "i/o failure";
    case HEIS_ERR_CHECK_FAILED: return "check failed";
    case HEIS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void heis_set_warning_callback(heis_warning_fn fn, void* user_data) {
  {
    std::lock_guard<std::mutex> lock(warning_mutex);
    warning_fn = fn;
    warning_user = user_data;
  }
  heis::set_warning_sink(&warning_trampoline);
}

heis_status heis_fujita_exponent(int n, double* out) {
  return guarded([&] {
    require(out != nullptr, "heis_fujita_exponent: null output");
    *out = heis::fujita_exponent(heis::GroupParams(n));
  });
}

heis_status heis_classify_regime(double p, int n, const char** out) {
  return guarded([&] {
    require(out != nullptr, "heis_classify_regime: null output");
    require(n >= 1, "heis_classify_regime: n must be >= 1");
    *out = heis::to_string(heis::classify_regime(p, 2.0 * n + 2.0));
  });
}

heis_status heis_field_create(int n, double L_xy, double L_tau, int N_xy, int N_tau, heis_field** out) {
  return guarded([&] {
    require(out != nullptr, "heis_field_create: null output");
    heis::GridSpec g{n, L_xy, L_tau, N_xy, N_tau};
    g.validate();
    *out = new heis_field{heis::ScalarField(g)};
  });
}

heis_status heis_field_fill_datum(heis_field* field, const char* kind, double radius, double kappa, int subsamples) {
  return guarded([&] {
    require(field != nullptr && kind != nullptr, "heis_field_fill_datum: null argument");
    heis::InitialDatum d;
    d.kind = heis::initial_kind_from_string(kind);
    d.radius = radius;
    d.kappa = kappa;
    d.subsamples = subsamples;
    field->field = heis::initial_datum(d, field->field.grid);
  });
}

heis_status heis_field_read(const char* path, heis_field** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "heis_field_read: null argument");
    *out = new heis_field{heis::read_hfield(path)};
  });
}

heis_status heis_field_write(const heis_field* field, const char* path) {
  return guarded([&] {
    require(field != nullptr && path != nullptr, "heis_field_write: null argument");
    heis::write_hfield(field->field, path);
  });
}

heis_status heis_field_size(const heis_field* field, size_t* out) {
  return guarded([&] {
    require(field != nullptr && out != nullptr, "heis_field_size: null argument");
    *out = field->field.size();
  });
}

heis_status heis_field_data(heis_field* field, double** out) {
  return guarded([&] {
    require(field != nullptr && out != nullptr, "heis_field_data: null argument");
    *out = field->field.values.data();
  });
}

heis_status heis_field_integrate(const heis_field* field, double* out) {
  return guarded([&] {
    require(field != nullptr && out != nullptr, "heis_field_integrate: null argument");
    *out = heis::integrate(field->field);
  });
}

heis_status heis_field_sublaplacian(const heis_field* field, int periodic, heis_field** out) {
  return guarded([&] {
    require(field != nullptr && out != nullptr, "heis_field_sublaplacian: null argument");
    const auto b = periodic ? heis::Boundary::periodic : heis::Boundary::dirichlet;
    *out = new heis_field{heis::apply_sublaplacian(field->field, b)};
  });
}

void heis_field_destroy(heis_field* field) { delete field; }

heis_status heis_solve(const heis_field* datum, double p, double epsilon, double t_max, double blowup_threshold,
                       heis_solve_result* out) {
  return guarded([&] {
    require(datum != nullptr && out != nullptr, "heis_solve: null argument");
    heis::SolverConfig c;
    c.p = p;
    c.epsilon = epsilon;
    c.grid = datum->field.grid;
    c.t_max = t_max;
    c.blowup_threshold = blowup_threshold;
    c.validate();
    const heis::TrajectoryRecord rec = heis::run_from(c, datum->field);
    out->blowup = rec.termination == heis::Termination::blowup;
    out->contaminated = rec.boundary_contaminated;
    out->lifespan = rec.lifespan_estimate.value_or(-1.0);
    out->final_time = rec.last_stable_time;
    out->final_sup = rec.sup_norms.back();
    out->steps = rec.steps;
  });
}

size_t heis_command_count(void) { return sizeof all_commands / sizeof all_commands[0]; }

const char* heis_command_name(size_t index) {
  return index < heis_command_count() ? heis::to_string(all_commands[index]) : nullptr;
}

heis_status heis_command_key_count(const char* command, size_t* out) {
  return guarded([&] {
    require(command != nullptr && out != nullptr, "heis_command_key_count: null argument");
    *out = heis::command_keys(heis::command_from_string(command)).size();
  });
}

heis_status heis_command_key(const char* command, size_t index, const char** name, const char** default_value,
                             const char** description) {
  return guarded([&] {
    require(command != nullptr, "heis_command_key: null command");
    const auto& keys = heis::command_keys(heis::command_from_string(command));
    require(index < keys.size(), "heis_command_key: index out of range");
    if (name) *name = keys[index].name.c_str();
    if (default_value) *default_value = keys[index].default_value.c_str();
    if (description) *description = keys[index].description.c_str();
  });
}

heis_status heis_config_create(const char* command, heis_config** out) {
  return guarded([&] {
    require(command != nullptr && out != nullptr, "heis_config_create: null argument");
    *out = new heis_config(heis::command_from_string(command));
  });
}

heis_status heis_config_load_file(heis_config* config, const char* path) {
  return guarded([&] {
    require(config != nullptr && path != nullptr, "heis_config_load_file: null argument");
    config->config.load_file(path);
  });
}

heis_status heis_config_set(heis_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config != nullptr && key != nullptr && value != nullptr, "heis_config_set: null argument");
    config->config.set(key, value);
  });
}

heis_status heis_config_set_workers(heis_config* config, int workers) {
  return guarded([&] {
    require(config != nullptr, "heis_config_set_workers: null config");
    require(workers >= 1, "heis_config_set_workers: workers must be >= 1");
    config->config.workers = workers;
  });
}

heis_status heis_config_set_seed(heis_config* config, uint64_t seed) {
  return guarded([&] {
    require(config != nullptr, "heis_config_set_seed: null config");
    config->config.seed = seed;
  });
}

heis_status heis_config_resolve(heis_config* config) {
  return guarded([&] {
    require(config != nullptr, "heis_config_resolve: null config");
    config->config.resolve();
  });
}

heis_status heis_config_get(const heis_config* config, const char* key, const char** value) {
  return guarded([&] {
    require(config != nullptr && key != nullptr && value != nullptr, "heis_config_get: null argument");
    *value = config->config.get(key).c_str();
  });
}

heis_status heis_config_dump(const heis_config* config, const char** text) {
  return guarded([&] {
    require(config != nullptr && text != nullptr, "heis_config_dump: null argument");
    auto* mut = const_cast<heis_config*>(config);
    mut->scratch = config->config.dump();
    *text = mut->scratch.c_str();
  });
}

void heis_config_destroy(heis_config* config) { delete config; }

heis_status heis_run(heis_config* config, const char* out_dir, int force, heis_report** out) {
  return guarded([&] {
    require(config != nullptr && out_dir != nullptr && out != nullptr, "heis_run: null argument");
    auto rep = std::make_unique<heis_report>();
    rep->report = heis::run_command(config->config, out_dir, force != 0);
    *out = rep.release();
  });
}

int heis_report_all_pass(const heis_report* report) { return report && report->report.all_pass() ? 1 : 0; }

size_t heis_report_check_count(const heis_report* report) { return report ? report->report.checks.size() : 0; }

heis_status heis_report_check(const heis_report* report, size_t index, const char** name, int* pass, double* value,
                              const char** detail) {
  return guarded([&] {
    require(report != nullptr, "heis_report_check: null report");
    require(index < report->report.checks.size(), "heis_report_check: index out of range");
    const auto& c = report->report.checks[index];
    if (name) *name = c.name.c_str();
    if (pass) *pass = c.pass ? 1 : 0;
    if (value) *value = c.value;
    if (detail) *detail = c.detail.c_str();
  });
}

size_t heis_report_file_count(const heis_report* report) { return report ? report->report.files.size() : 0; }

const char* heis_report_file(const heis_report* report, size_t index) {
  return report && index < report->report.files.size() ? report->report.files[index].c_str() : nullptr;
}

const char* heis_report_summary(const heis_report* report) { return report ? report->report.summary.c_str() : ""; }

void heis_report_destroy(heis_report* report) { delete report; }

int heis_exit_code(heis_status status, const heis_report* report) {
  switch (status) {
    case HEIS_OK: return heis_report_all_pass(report) ? HEIS_EXIT_OK : HEIS_EXIT_CHECK_FAILED;
    case HEIS_ERR_INVALID_ARGUMENT: return HEIS_EXIT_CONFIG_ERROR;
    case HEIS_ERR_NUMERICAL: return HEIS_EXIT_NUMERICAL_ERROR;
    case HEIS_ERR_IO: return HEIS_EXIT_IO_ERROR;
    case HEIS_ERR_CHECK_FAILED: return HEIS_EXIT_CHECK_FAILED;
    case HEIS_ERR_INTERNAL: return HEIS_EXIT_INTERNAL_ERROR;
  }
  return HEIS_EXIT_INTERNAL_ERROR;
}

}  // extern "C"
