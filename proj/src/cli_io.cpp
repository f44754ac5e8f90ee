#include "heislab/cli_io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>

#include <json.hpp>

#include "heislab/certificates.hpp"
#include "heislab/error.hpp"
#include "heislab/heat.hpp"
#include "heislab/mild.hpp"
#include "heislab/solver.hpp"
#include "heislab/sweep.hpp"

#ifndef HEISLAB_VERSION
#define HEISLAB_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace heis {

std::string library_version() { return HEISLAB_VERSION; }

const char* to_string(Command c) {
  switch (c) {
    case Command::kernel: return "kernel";
    case Command::solve: return "solve";
    case Command::sweep: return "sweep";
    case Command::certify: return "certify";
    case Command::mild: return "mild";
    case Command::estimates: return "estimates";
  }
  return "?";
}

Command command_from_string(const std::string& name) {
  for (Command c : {Command::kernel, Command::solve, Command::sweep, Command::certify, Command::mild,
                    Command::estimates}) {
    if (name == to_string(c)) return c;
  }
  throw InvalidArgument("unknown command '" + name + "'");
}

namespace {

enum class Kind { real, integer, flag, reals, choice };

// Validation rule for one key. Bounds apply to every element of a list.
struct Rule {
  std::string name;
  std::string default_value;
  std::string description;
  Kind kind = Kind::real;
  std::optional<double> lower;  // value must exceed lower (or reach it when inclusive)
  bool inclusive = false;
  std::optional<double> upper;
  std::vector<std::string> choices;
  std::string bound_message;  // replaces the generic range message when set
};

Rule base_rule(std::string name, std::string def, std::string desc) {
  Rule r;
  r.name = std::move(name);
  r.default_value = std::move(def);
  r.description = std::move(desc);
  return r;
}

Rule real_key(std::string name, std::string def, std::string desc, std::optional<double> lo = {}, bool inc = false,
              std::string msg = {}) {
  Rule r = base_rule(std::move(name), std::move(def), std::move(desc));
  r.kind = Kind::real;
  r.lower = lo;
  r.inclusive = inc;
  r.bound_message = std::move(msg);
  return r;
}

Rule int_key(std::string name, std::string def, std::string desc, double lo, double hi = 1e18) {
  Rule r = base_rule(std::move(name), std::move(def), std::move(desc));
  r.kind = Kind::integer;
  r.lower = lo;
  r.inclusive = true;
  r.upper = hi;
  return r;
}

Rule list_key(std::string name, std::string def, std::string desc, std::optional<double> lo = {}, bool inc = false) {
  Rule r = base_rule(std::move(name), std::move(def), std::move(desc));
  r.kind = Kind::reals;
  r.lower = lo;
  r.inclusive = inc;
  return r;
}

Rule flag_key(std::string name, std::string def, std::string desc) {
  Rule r = base_rule(std::move(name), std::move(def), std::move(desc));
  r.kind = Kind::flag;
  return r;
}

Rule choice_key(std::string name, std::string def, std::string desc, std::vector<std::string> choices) {
  Rule r = base_rule(std::move(name), std::move(def), std::move(desc));
  r.kind = Kind::choice;
  r.choices = std::move(choices);
  return r;
}

Rule p_key(const std::string& def) {
  return real_key("p", def, "nonlinearity exponent", 1.0, false, "p must exceed 1");
}

void add_grid(std::vector<Rule>& r, const std::string& L, const std::string& Lt, const std::string& N) {
  r.push_back(int_key("n", "1", "Heisenberg dimension H_n", 1, GridSpec::max_n));
  r.push_back(real_key("L_xy", L, "horizontal half-width", 0.0));
  r.push_back(real_key("L_tau", Lt, "vertical half-width", 0.0));
  r.push_back(int_key("N", N, "nodes per horizontal axis (odd)", 5));
  r.push_back(int_key("N_tau", "0", "nodes on the tau axis; 0 uses N", 0));
}

void add_datum(std::vector<Rule>& r, const std::string& kind, const std::string& subsamples) {
  r.push_back(choice_key("datum", kind, "initial datum family", {"compact_bump", "weighted_decay", "constant"}));
  r.push_back(real_key("radius", "1", "compact_bump support radius", 0.0));
  r.push_back(real_key("datum_kappa", "2", "weighted_decay exponent", 0.0, true));
  r.push_back(int_key("subsamples", subsamples, "compact_bump cell-average subsamples (1 = nodal)", 1, 64));
}

void add_steps(std::vector<Rule>& r, const std::string& t_max) {
  r.push_back(real_key("dt_safety", "0.4", "fraction of the stability step", 0.0));
  r.push_back(real_key("c_nl", "0.1", "nonlinear step factor: dt <= c_nl sup^{1-p}", 0.0));
  r.push_back(real_key("blowup_threshold", "1e8", "sup-norm level declaring blow-up", 0.0));
  r.push_back(real_key("t_max", t_max, "time horizon", 0.0));
}

std::vector<Rule> build_rules(Command c) {
  std::vector<Rule> r;
  switch (c) {
    case Command::kernel:
      add_grid(r, "4", "16", "65");
      r.push_back(list_key("t", "0.25", "kernel times", 0.0));
      r.push_back(real_key("safety", "0.4", "fraction of the stability step", 0.0));
      r.push_back(real_key("mollifier_width", "-1", "initial mollifier width; 0 spike, < 0 default 1.5 h_xy"));
      r.push_back(real_key("scaling_ref", "0", "reference time for the scaling identity; 0 skips", 0.0, true));
      r.push_back(flag_key("semigroup", "false", "check h_{t/2} * h_{t/2} against h_t"));
      r.push_back(flag_key("write_fields", "true", "write one .hfield per kernel"));
      break;
    case Command::solve:
      add_grid(r, "4", "16", "65");
      add_datum(r, "compact_bump", "1");
      r.push_back(p_key("2"));
      r.push_back(real_key("epsilon", "1", "datum amplitude", 0.0));
      add_steps(r, "10");
      r.push_back(choice_key("boundary", "dirichlet", "boundary treatment", {"dirichlet", "periodic"}));
      r.push_back(real_key("weighted_kappa", "-1", "record the weighted norm with this kappa; < 0 skips"));
      r.push_back(list_key("snapshot_times", "", "times at which fields are written", 0.0, true));
      break;
    case Command::sweep:
      r.push_back(int_key("n", "1", "Heisenberg dimension H_n", 1, GridSpec::max_n));
      r.push_back(p_key("1.25"));
      r.push_back(list_key("epsilons", "", "explicit decreasing ladder; empty uses eps0, ratio, count", 0.0));
      r.push_back(real_key("eps0", "1", "largest epsilon of the geometric ladder", 0.0));
      r.push_back(real_key("ratio", "0.70710678118654757", "ladder ratio", 0.0));
      r.push_back(int_key("count", "6", "ladder length", 3, 1000));
      add_datum(r, "compact_bump", "5");
      r.push_back(real_key("box_factor", "4", "L_xy = box_factor sqrt(expected T)", 4.0, true));
      r.push_back(real_key("min_L_xy", "0", "floor on L_xy", 0.0, true));
      r.push_back(int_key("N", "65", "nodes per axis", 65));
      r.push_back(real_key("memory_cap_mb", "1024", "memory cap per run in MiB", 0.0));
      r.push_back(real_key("initial_expected_T", "1", "grid guess for the largest epsilon", 0.0));
      r.push_back(real_key("horizon_factor", "4", "blow-up runs stop at factor * expected T", 1.0));
      r.push_back(int_key("max_retries", "2", "contamination retries with a larger box", 0, 10));
      add_steps(r, "1e6");
      break;
    case Command::certify:
      r.push_back(int_key("n", "1", "Heisenberg dimension H_n", 1, GridSpec::max_n));
      r.push_back(p_key("1.25"));
      r.push_back(real_key("epsilon", "1", "datum amplitude", 0.0));
      add_datum(r, "compact_bump", "5");
      r.push_back(real_key("expected_T", "60", "expected lifespan; sizes the box and the horizon", 0.0));
      r.push_back(real_key("box_factor", "4", "L_xy = box_factor sqrt(expected_T)", 4.0, true));
      r.push_back(int_key("N", "65", "nodes per axis", 65));
      r.push_back(real_key("horizon_factor", "4", "t_max = factor * expected_T", 1.0));
      r.push_back(real_key("dt_safety", "0.4", "fraction of the stability step", 0.0));
      r.push_back(real_key("c_nl", "0.1", "nonlinear step factor", 0.0));
      r.push_back(real_key("blowup_threshold", "1e8", "sup-norm level declaring blow-up", 0.0));
      r.push_back(int_key("snapshots_per_octave", "8", "geometric snapshot density", 1, 64));
      r.push_back(list_key("R_values", "4,8,16", "radii for the derivative-quotient fits", 0.0));
      r.push_back(int_key("fit_N", "65", "nodes per axis of the derivative-fit grids", 9));
      r.push_back(int_key("time_samples", "17", "times sampled in each derivative fit", 2));
      r.push_back(list_key("phi_R", "", "radii for I_R, J_R; empty picks sqrt(t_last) * {1/4, 1/2, 1}", 0.0));
      r.push_back(list_key("psi_R", "", "radii for X, Y, W; empty picks t_last * {1/16, 1/4, 1}", 0.0));
      r.push_back(real_key("smoothness", "1", "mollifier scale of the cut-offs", 0.0));
      r.push_back(list_key("g_A", "0.3,0.6,0.9,1.2", "A values for the g cut-off check", 0.0));
      r.push_back(list_key("g_R", "1,2", "R values for the g cut-off check", 0.0));
      break;
    case Command::mild:
      add_grid(r, "4", "16", "33");
      add_datum(r, "weighted_decay", "1");
      r.push_back(p_key("2"));
      r.push_back(real_key("epsilon", "0.1", "datum amplitude", 0.0, true));
      r.push_back(real_key("kappa", "2", "weight exponent of the norm", 0.0, true));
      r.push_back(real_key("T", "1", "horizon", 0.0));
      r.push_back(int_key("slices", "8", "uniform time slices", 1, 100000));
      r.push_back(int_key("iterations", "30", "maximum Picard iterations", 1, 100000));
      r.push_back(real_key("tol", "1e-12", "relative residual tolerance", 0.0));
      r.push_back(real_key("inner_safety", "0.4", "fraction of the stability step for inner steps", 0.0));
      r.push_back(int_key("probes", "20", "random pairs for the contraction probe", 0, 100000));
      r.push_back(real_key("probe_radius", "0", "ball radius for probes; 0 uses 2 epsilon", 0.0, true));
      r.push_back(choice_key("boundary", "dirichlet", "boundary treatment", {"dirichlet", "periodic"}));
      break;
    case Command::estimates:
      add_grid(r, "16", "256", "65");
      r.push_back(list_key("decay_kappas", "6,2", "kappa values for the linear decay check", 0.0));
      r.push_back(list_key("decay_times", "0.2,0.4,0.8", "times for the linear decay check", 0.0));
      r.push_back(list_key("duhamel_alphas", "2,3", "alpha values for the Duhamel bound", 0.0));
      r.push_back(list_key("duhamel_times", "0.5,2,8", "times for the Duhamel bound", 0.0));
      r.push_back(int_key("intervals_per_unit", "8", "s-quadrature intervals per unit time", 1, 100000));
      break;
  }
  return r;
}

const std::vector<Rule>& rules(Command c) {
  static const std::map<Command, std::vector<Rule>> all = [] {
    std::map<Command, std::vector<Rule>> m;
    for (Command k : {Command::kernel, Command::solve, Command::sweep, Command::certify, Command::mild,
                      Command::estimates}) {
      m[k] = build_rules(k);
    }
    return m;
  }();
  return all.at(c);
}

const Rule* find_rule(Command c, const std::string& key) {
  for (const Rule& r : rules(c)) {
    if (r.name == key) return &r;
  }
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw InvalidArgument("key '" + key + "': '" + text + "' is not a number");
  }
  if (!std::isfinite(v)) throw InvalidArgument("key '" + key + "': value must be finite");
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw InvalidArgument("key '" + key + "': '" + text + "' is not an integer");
  }
  return v;
}

bool parse_flag(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw InvalidArgument("key '" + key + "': '" + text + "' is not a boolean");
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(key, item));
  return out;
}

void check_bounds(const Rule& r, double v) {
  bool ok = true;
  if (r.lower) ok = r.inclusive ? v >= *r.lower : v > *r.lower;
  if (r.upper) ok = ok && v <= *r.upper;
  if (ok) return;
  if (!r.bound_message.empty()) throw InvalidArgument("key '" + r.name + "': " + r.bound_message);
  std::ostringstream os;
  os << "key '" << r.name << "': value " << v << " out of range";
  if (r.lower) os << (r.inclusive ? " (need >= " : " (need > ") << *r.lower << (r.upper ? "" : ")");
  if (r.upper) os << (r.lower ? ", <= " : " (need <= ") << *r.upper << ")";
  throw InvalidArgument(os.str());
}

void validate_value(const Rule& r, const std::string& value) {
  switch (r.kind) {
    case Kind::real: check_bounds(r, parse_real(r.name, value)); break;
    case Kind::integer: check_bounds(r, static_cast<double>(parse_int(r.name, value))); break;
    case Kind::flag: parse_flag(r.name, value); break;
    case Kind::reals:
      for (double v : parse_list(r.name, value)) check_bounds(r, v);
      break;
    case Kind::choice:
      if (std::find(r.choices.begin(), r.choices.end(), trim(value)) == r.choices.end()) {
        std::string opts;
        for (const auto& c : r.choices) opts += (opts.empty() ? "" : ", ") + c;
        throw InvalidArgument("key '" + r.name + "': '" + value + "' is not one of " + opts);
      }
      break;
  }
}

}  // namespace

const std::vector<KeySpec>& command_keys(Command command) {
  static std::mutex m;
  static std::map<Command, std::vector<KeySpec>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(command);
  if (it == cache.end()) {
    std::vector<KeySpec> ks;
    for (const Rule& r : rules(command)) ks.push_back({r.name, r.default_value, r.description});
    it = cache.emplace(command, std::move(ks)).first;
  }
  return it->second;
}

RunConfig::RunConfig(Command command) : command_(command) {}

void RunConfig::set(const std::string& key, const std::string& value) {
  const std::string k = trim(key);
  if (!find_rule(command_, k)) {
    throw InvalidArgument("unknown key '" + k + "' for command '" + to_string(command_) + "'");
  }
  values_[k] = trim(value);
  resolved_ = false;
}

void RunConfig::load_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument(origin + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    set(t.substr(0, eq), t.substr(eq + 1));
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  load_text(ss.str(), path);
}

void RunConfig::resolve() {
  for (const Rule& r : rules(command_)) {
    auto it = values_.find(r.name);
    if (it == values_.end()) it = values_.emplace(r.name, r.default_value).first;
    validate_value(r, it->second);
  }
  // Cross-key checks that the owning modules would reject later.
  if (command_ == Command::sweep && !reals("epsilons").empty()) {
    const auto e = reals("epsilons");
    if (e.size() < 3) throw InvalidArgument("key 'epsilons': need at least 3 values");
    for (std::size_t i = 1; i < e.size(); ++i) {
      if (!(e[i] < e[i - 1])) throw InvalidArgument("key 'epsilons': values must strictly decrease");
    }
  }
  if (command_ == Command::sweep && !(real("ratio") < 1.0)) throw InvalidArgument("key 'ratio': must lie in (0, 1)");
  if (find_rule(command_, "N") && integer("N") % 2 == 0) throw InvalidArgument("key 'N': must be odd");
  if (find_rule(command_, "N_tau") && integer("N_tau") != 0 && integer("N_tau") % 2 == 0) {
    throw InvalidArgument("key 'N_tau': must be odd (or 0)");
  }
  if (find_rule(command_, "dt_safety") && real("dt_safety") > 1.0) {
    throw InvalidArgument("key 'dt_safety': must lie in (0, 1]");
  }
  if (command_ == Command::mild && real("inner_safety") > 1.0) {
    throw InvalidArgument("key 'inner_safety': must lie in (0, 1]");
  }
  if (workers < 1) throw InvalidArgument("flag --workers: must be >= 1");
  resolved_ = true;
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it != values_.end()) return it->second;
  const Rule* r = find_rule(command_, key);
  if (!r) throw InvalidArgument("unknown key '" + key + "' for command '" + to_string(command_) + "'");
  return r->default_value;
}

double RunConfig::real(const std::string& key) const { return parse_real(key, get(key)); }
long long RunConfig::integer(const std::string& key) const { return parse_int(key, get(key)); }
bool RunConfig::flag(const std::string& key) const { return parse_flag(key, get(key)); }
std::vector<double> RunConfig::reals(const std::string& key) const { return parse_list(key, get(key)); }

std::string RunConfig::dump() const {
  std::ostringstream os;
  for (const auto& [k, v] : values_) os << k << " = " << v << "\n";
  return os.str();
}

bool CommandReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc()) throw Error(ErrorKind::io, "format_real: conversion failed");
  return std::string(buf, ptr);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), columns_(header.size()) {
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw InvalidArgument("csv " + path_ + ": row width does not match the header");
  for (std::size_t i = 0; i < cells.size(); ++i) buffer_ += (i ? "," : "") + cells[i];
  buffer_ += "\n";
}

void CsvWriter::close() {
  std::ofstream out(path_, std::ios::binary);
  if (!out) throw IoError("cannot write " + path_);
  out << buffer_;
  if (!out) throw IoError("write failed for " + path_);
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    rows.push_back(std::move(cells));
  }
  return rows;
}

namespace {

std::string iso_time_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

GridSpec grid_from(const RunConfig& c) {
  GridSpec g;
  g.n = static_cast<int>(c.integer("n"));
  g.L_xy = c.real("L_xy");
  g.L_tau = c.real("L_tau");
  g.N_xy = static_cast<int>(c.integer("N"));
  g.N_tau = c.integer("N_tau") == 0 ? g.N_xy : static_cast<int>(c.integer("N_tau"));
  g.validate();
  return g;
}

InitialDatum datum_from(const RunConfig& c) {
  InitialDatum d;
  d.kind = initial_kind_from_string(c.get("datum"));
  d.radius = c.real("radius");
  d.kappa = c.real("datum_kappa");
  d.subsamples = static_cast<int>(c.integer("subsamples"));
  return d;
}

Boundary boundary_from(const RunConfig& c) {
  return c.get("boundary") == "periodic" ? Boundary::periodic : Boundary::dirichlet;
}

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::string R(double v) { return format_real(v); }

// Shortest round-trip form, for names rather than data.
std::string S(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : format_real(v);
}

CheckResult check(std::string name, bool pass, double value, std::string detail = {}) {
  return CheckResult{std::move(name), pass, value, std::move(detail)};
}

// ---- kernel ----------------------------------------------------------------------------

CommandReport do_kernel(const RunConfig& c, const std::string& out) {
  const GridSpec g = grid_from(c);
  KernelOptions opt;
  opt.safety = c.real("safety");
  opt.mollifier_width = c.real("mollifier_width");
  const auto times = c.reals("t");
  if (times.empty()) throw InvalidArgument("key 't': need at least one time");
  auto sorted = times;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const double ref = c.real("scaling_ref");
  const bool semigroup = c.flag("semigroup");
  std::vector<double> all = sorted;
  if (ref > 0.0) all.push_back(ref);
  if (semigroup) {
    for (double t : sorted) all.push_back(0.5 * t);
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  const std::vector<KernelSnapshot> ks = heat_kernels(all, g, opt);
  auto at = [&](double t) -> const KernelSnapshot& {
    for (const auto& k : ks) {
      if (k.t == t) return k;
    }
    throw Error(ErrorKind::numerical, "kernel: missing snapshot");
  };
  CommandReport rep;
  CsvWriter csv(path_in(out, "kernel-report.csv"),
                {"t", "mass", "min_over_max", "fitted_c", "fitted_C", "scaling_err", "semigroup_err"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double t : sorted) {
    const KernelSnapshot& k = at(t);
    double scaling = nan;
    if (ref > 0.0) scaling = check_scaling_identity(k, at(ref)).max_rel_error;
    double sg = nan;
    if (semigroup) {
      const KernelSnapshot& h = at(0.5 * t);
      sg = check_semigroup(h.field, h.field, k.field).max_rel_error;
    }
    csv.row({R(t), R(k.mass), R(k.min_value / k.max_value), k.fit_ok ? R(k.fitted_c) : "nan",
             k.fit_ok ? R(k.fitted_C) : "nan", R(scaling), R(sg)});
    rep.checks.push_back(check("mass t=" + S(t), std::abs(k.mass - 1.0) <= 0.02, k.mass));
    if (c.flag("write_fields")) {
      const std::string name = "kernel-t" + S(t) + ".hfield";
      write_hfield(k.field, path_in(out, name));
      rep.files.push_back(name);
    }
  }
  csv.close();
  rep.files.push_back("kernel-report.csv");
  rep.summary = std::to_string(sorted.size()) + " kernel(s)";
  return rep;
}

// ---- solve ----------------------------------------------------------------------------

CommandReport do_solve(const RunConfig& c, const std::string& out) {
  SolverConfig sc;
  sc.p = c.real("p");
  sc.epsilon = c.real("epsilon");
  sc.grid = grid_from(c);
  sc.dt_safety = c.real("dt_safety");
  sc.c_nl = c.real("c_nl");
  sc.blowup_threshold = c.real("blowup_threshold");
  sc.t_max = c.real("t_max");
  sc.boundary = boundary_from(c);
  sc.u0 = datum_from(c);
  if (c.real("weighted_kappa") >= 0.0) sc.weighted_kappa = c.real("weighted_kappa");
  sc.snapshot_times = c.reals("snapshot_times");
  sc.validate();
  const TrajectoryRecord rec = run(sc);
  CommandReport rep;
  std::vector<std::string> header{"t", "sup_norm", "mass", "boundary_max"};
  if (sc.weighted_kappa) header.push_back("weighted_norm_kappa");
  CsvWriter csv(path_in(out, "trajectory.csv"), header);
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    std::vector<std::string> row{R(rec.times[i]), R(rec.sup_norms[i]), R(rec.masses[i]), R(rec.boundary_max[i])};
    if (sc.weighted_kappa) row.push_back(R(rec.weighted_norms[i]));
    csv.row(row);
  }
  csv.close();
  rep.files.push_back("trajectory.csv");
  for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
    const std::string name = "snapshot-" + std::to_string(k) + ".hfield";
    write_hfield(rec.snapshots[k].field, path_in(out, name));
    rep.files.push_back(name);
  }
  std::ostringstream s;
  s << "termination=" << to_string(rec.termination) << " steps=" << rec.steps;
  if (rec.lifespan_estimate) s << " T_h=" << R(*rec.lifespan_estimate);
  if (rec.boundary_contaminated) s << " boundary-contaminated";
  rep.summary = s.str();
  rep.checks.push_back(check("finite trajectory", rec.termination != Termination::instability, rec.last_stable_time));
  if (rec.termination == Termination::instability) {
    throw NumericalError("solve: numerical instability at t=" + R(rec.last_stable_time));
  }
  return rep;
}

// ---- sweep ----------------------------------------------------------------------------

CommandReport do_sweep(const RunConfig& c, const std::string& out) {
  SweepConfig sc;
  sc.p = c.real("p");
  sc.epsilons = c.reals("epsilons");
  if (sc.epsilons.empty()) {
    sc.epsilons = geometric_ladder(c.real("eps0"), c.real("ratio"), static_cast<int>(c.integer("count")));
  }
  sc.policy.n = static_cast<int>(c.integer("n"));
  sc.policy.box_factor = c.real("box_factor");
  sc.policy.min_L_xy = c.real("min_L_xy");
  sc.policy.N = static_cast<int>(c.integer("N"));
  sc.policy.memory_cap_bytes = c.real("memory_cap_mb") * 1024.0 * 1024.0;
  sc.base.grid.n = sc.policy.n;
  sc.base.u0 = datum_from(c);
  sc.base.dt_safety = c.real("dt_safety");
  sc.base.c_nl = c.real("c_nl");
  sc.base.blowup_threshold = c.real("blowup_threshold");
  sc.base.t_max = c.real("t_max");
  sc.worker_count = c.workers;
  sc.initial_expected_T = c.real("initial_expected_T");
  sc.horizon_factor = c.real("horizon_factor");
  sc.max_retries = static_cast<int>(c.integer("max_retries"));
  const SweepResult res = run_sweep(sc);
  CommandReport rep;
  CsvWriter csv(path_in(out, "sweep-result.csv"), {"epsilon", "T_h", "termination", "contaminated", "grid_Lxy", "grid_N"});
  for (const SweepRun& r : res.runs) {
    csv.row({R(r.epsilon), r.lifespan ? R(*r.lifespan) : "nan", to_string(r.termination), r.contaminated ? "1" : "0",
             R(r.grid.L_xy), std::to_string(r.grid.N_xy)});
  }
  csv.close();
  std::ofstream fit(path_in(out, "sweep-fit.txt"));
  fit << "regime = " << to_string(res.regime) << "\n"
      << "theory_slope = " << R(res.theory_slope) << "\n"
      << "fitted_slope = " << R(res.fitted_slope) << "\n"
      << "fitted_intercept = " << R(res.fitted_intercept) << "\n"
      << "r2 = " << R(res.r_squared) << "\n"
      << "runs_test_p = " << R(res.runs_test_p) << "\n"
      << "superpolynomial = " << (res.superpolynomial ? "true" : "false") << "\n"
      << "threshold_epsilon = " << (res.threshold_epsilon ? R(*res.threshold_epsilon) : "nan") << "\n"
      << "pass = " << (res.pass ? "true" : "false") << "\n";
  if (!fit) throw IoError("cannot write " + path_in(out, "sweep-fit.txt"));
  rep.files = {"sweep-result.csv", "sweep-fit.txt"};
  rep.checks.push_back(check(std::string("sweep fit (") + to_string(res.regime) + ")", res.pass,
                             res.regime == Regime::supercritical ? res.threshold_epsilon.value_or(0.0)
                                                                 : res.fitted_slope));
  rep.summary = std::string("regime=") + to_string(res.regime) + " slope=" + R(res.fitted_slope) + " r2=" +
                R(res.r_squared);
  return rep;
}

// ---- certify ---------------------------------------------------------------------------

CommandReport do_certify(const RunConfig& c, const std::string& out) {
  const double p = c.real("p");
  const auto bumps = make_bumps(p, c.real("smoothness"));
  CommandReport rep;

  const QuotientConstants qc = check_bump_shapes(*bumps);
  rep.checks.push_back(check("cut-off shapes", qc.shape_ok, qc.alpha_d2));

  const auto R_fit = c.reals("R_values");
  const DerivativeFit df = derivative_bound_check(*bumps, R_fit, static_cast<int>(c.integer("n")),
                                                  static_cast<int>(c.integer("fit_N")),
                                                  static_cast<int>(c.integer("time_samples")));
  rep.checks.push_back(check("derivative quotients R-stable", df.pass, df.spread));

  GridPolicy policy;
  policy.n = static_cast<int>(c.integer("n"));
  policy.box_factor = c.real("box_factor");
  policy.N = static_cast<int>(c.integer("N"));
  const double T = c.real("expected_T");
  SolverConfig sc;
  sc.p = p;
  sc.epsilon = c.real("epsilon");
  sc.grid = policy(T);
  sc.u0 = datum_from(c);
  sc.dt_safety = c.real("dt_safety");
  sc.c_nl = c.real("c_nl");
  sc.blowup_threshold = c.real("blowup_threshold");
  sc.t_max = c.real("horizon_factor") * T;
  sc.snapshot_times = geometric_snapshot_times(sc.t_max / 1024.0, sc.t_max, static_cast<int>(c.integer("snapshots_per_octave")));
  while (sc.snapshot_times.back() > sc.t_max) sc.snapshot_times.pop_back();
  const TrajectoryRecord rec = run(sc);
  if (rec.snapshots.size() < 9) throw NumericalError("certify: trajectory ended before 9 snapshots were stored");
  const double t_last = rec.snapshots.back().t;

  auto phi_R = c.reals("phi_R");
  if (phi_R.empty()) phi_R = {std::sqrt(t_last) / 4.0, std::sqrt(t_last) / 2.0, std::sqrt(t_last)};
  auto psi_R = c.reals("psi_R");
  if (psi_R.empty()) psi_R = {t_last / 16.0, t_last / 4.0, t_last};
  std::sort(psi_R.begin(), psi_R.end());

  const SubcriticalCheck sub = subcritical_inequality_check(rec.snapshots, sc.epsilon, *bumps, phi_R);
  const PsiFunctionals psi = functionals_psi(rec.snapshots, psi_R, *bumps);
  rep.checks.push_back(check("subcritical constant bounded", sub.pass, sub.spread));
  double worst_margin = std::numeric_limits<double>::infinity();
  for (double m : psi.xw_margin) worst_margin = std::min(worst_margin, m);
  rep.checks.push_back(check("X-W margin", worst_margin >= -0.02, worst_margin));

  // One row per radius appearing in any list; quantities not evaluated at a radius are nan.
  std::vector<double> radii = R_fit;
  radii.insert(radii.end(), phi_R.begin(), phi_R.end());
  radii.insert(radii.end(), psi_R.begin(), psi_R.end());
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  auto lookup = [](const std::vector<double>& keys, const std::vector<double>& vals, double r) {
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (keys[i] == r) return R(vals[i]);
    }
    return std::string("nan");
  };
  CsvWriter csv(path_in(out, "certificate-report.csv"),
                {"R", "I_R", "J_R", "X_R", "Y_R", "W_R", "C_fit_phi_t", "C_fit_phi_lap", "C_fit_psi_t", "C_fit_psi_lap",
                 "xw_margin", "subcrit_Cfit"});
  for (double r : radii) {
    csv.row({R(r), lookup(sub.R_values, sub.I, r), lookup(sub.R_values, sub.J, r), lookup(psi.R_values, psi.X, r),
             lookup(psi.R_values, psi.Y, r), lookup(psi.R_values, psi.W, r), lookup(df.R_values, df.phi_t, r),
             lookup(df.R_values, df.phi_lap, r), lookup(df.R_values, df.psi_t, r), lookup(df.R_values, df.psi_lap, r),
             lookup(psi.R_values, psi.xw_margin, r), lookup(sub.R_values, sub.C_fit, r)});
  }
  csv.close();

  const double e = 2.0 * bumps->p_conjugate();
  const BumpPair& b = *bumps;
  auto g = [&b, e](double s) { return std::pow(b.phi_star(s), e); };
  auto g_applied = [&b, e](double s) { return std::pow(b.phi(s), e); };
  const auto rows = g_cutoff_check(g, g_applied, c.reals("g_A"), c.reals("g_R"));
  CsvWriter lg(path_in(out, "g-cutoff-report.csv"), {"A", "R", "lhs", "rhs_literal", "rhs_applied", "literal_holds",
                                                    "applied_holds"});
  bool applied = true;
  for (const auto& row : rows) {
    lg.row({R(row.A), R(row.R), R(row.lhs), R(row.rhs_literal), R(row.rhs_applied), row.literal_holds ? "1" : "0",
            row.applied_holds ? "1" : "0"});
    applied = applied && row.applied_holds;
  }
  lg.close();
  rep.checks.push_back(check("g cut-off applied form", applied, static_cast<double>(rows.size())));
  rep.files = {"certificate-report.csv", "g-cutoff-report.csv"};
  std::ostringstream s;
  s << "termination=" << to_string(rec.termination) << " snapshots=" << rec.snapshots.size()
    << " exponent=" << R(sub.exponent);
  rep.summary = s.str();
  return rep;
}

// ---- mild ------------------------------------------------------------------------------

CommandReport do_mild(const RunConfig& c, const std::string& out) {
  const GridSpec g = grid_from(c);
  const double p = c.real("p");
  const double eps = c.real("epsilon");
  const double kappa = c.real("kappa");
  const double T = c.real("T");
  const int m = static_cast<int>(c.integer("slices"));
  const Boundary b = boundary_from(c);
  const ScalarField u0 = initial_datum(datum_from(c), g);
  const auto times = uniform_times(T, m);
  const double dt = inner_timestep(g, T / m, c.real("inner_safety"));
  CommandReport rep;

  const int probes = static_cast<int>(c.integer("probes"));
  if (probes > 0) {
    const double radius = c.real("probe_radius") > 0.0 ? c.real("probe_radius") : 2.0 * eps;
    if (!(radius > 0.0)) throw InvalidArgument("key 'probe_radius': the ball is empty for epsilon = 0");
    std::mt19937_64 rng(c.seed);
    double worst = 0.0;
    for (int i = 0; i < probes; ++i) {
      const SpaceTimeField a = random_ball_element(g, times, kappa, radius, rng());
      const SpaceTimeField v = random_ball_element(g, times, kappa, radius, rng());
      worst = std::max(worst, contraction_probe(a, v, u0, eps, p, kappa, dt, b));
    }
    rep.checks.push_back(check("contraction probe <= 0.6", worst <= 0.6, worst));
  }

  const PicardResult pr = picard_solve(u0, eps, p, kappa, times, static_cast<int>(c.integer("iterations")), dt,
                                       c.real("tol"), b);
  CsvWriter csv(path_in(out, "picard-report.csv"), {"iteration", "residual", "ball_norm", "lipschitz_estimate"});
  double worst_ratio = 0.0;
  for (std::size_t k = 0; k < pr.residuals.size(); ++k) {
    csv.row({std::to_string(k + 1), R(pr.residuals[k]), R(pr.ball_norms[k]), R(pr.lipschitz_estimates[k])});
    // Ratios at round-off level carry no contraction information.
    if (k > 0 && pr.residuals[k - 1] > 1e3 * std::numeric_limits<double>::epsilon() * pr.ball_norms[k - 1]) {
      worst_ratio = std::max(worst_ratio, pr.lipschitz_estimates[k]);
    }
  }
  csv.close();
  rep.files.push_back("picard-report.csv");
  rep.checks.push_back(check("Picard converged", pr.converged && pr.contractive, static_cast<double>(pr.residuals.size())));
  rep.checks.push_back(check("Picard ratio <= 0.7", worst_ratio <= 0.7, worst_ratio));
  rep.summary = "iterations=" + std::to_string(pr.residuals.size());
  return rep;
}

// ---- estimates -------------------------------------------------------------------------

CommandReport do_estimates(const RunConfig& c, const std::string& out) {
  const GridSpec g = grid_from(c);
  CommandReport rep;
  CsvWriter csv(path_in(out, "estimates-report.csv"), {"check_name", "kappa_or_alpha", "t", "max_ratio", "pass"});
  for (double kappa : c.reals("decay_kappas")) {
    const DecayReport d = check_linear_decay(kappa, g, c.reals("decay_times"));
    for (std::size_t i = 0; i < d.times.size(); ++i) {
      csv.row({"linear_decay", R(kappa), R(d.times[i]), R(d.max_ratios[i]), d.pass ? "1" : "0"});
    }
    rep.checks.push_back(check("linear decay kappa=" + S(kappa), d.pass, d.spread,
                               d.contaminated ? "boundary-contaminated" : ""));
  }
  for (double alpha : c.reals("duhamel_alphas")) {
    const DuhamelReport d = check_duhamel_bound(alpha, g, c.reals("duhamel_times"),
                                                static_cast<int>(c.integer("intervals_per_unit")));
    for (std::size_t i = 0; i < d.times.size(); ++i) {
      csv.row({"duhamel", R(alpha), R(d.times[i]), R(d.max_ratios[i]), d.pass ? "1" : "0"});
      if (d.endpoint) csv.row({"duhamel_log", R(alpha), R(d.times[i]), R(d.max_ratios_log[i]), d.pass ? "1" : "0"});
    }
    rep.checks.push_back(check("duhamel alpha=" + S(alpha), d.pass, d.spread,
                               d.contaminated ? "boundary-contaminated" : ""));
  }
  csv.close();
  rep.files.push_back("estimates-report.csv");
  return rep;
}

nlohmann::json manifest_json(const RunConfig& c, const std::string& status) {
  nlohmann::json j;
  j["command"] = to_string(c.command());
  j["tool_version"] = library_version();
  j["config"] = c.values();
  j["workers"] = c.workers;
  j["seed"] = c.seed;
  j["status"] = status;
  return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace

CommandReport run_command(RunConfig& config, const std::string& out_dir, bool force) {
  if (!config.resolved()) config.resolve();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
  const std::string manifest = path_in(out_dir, "run-manifest.json");
  if (fs::exists(manifest) && !force) {
    throw IoError("output directory " + out_dir + " already holds a run; pass --force to overwrite");
  }
  nlohmann::json j = manifest_json(config, "running");
  const std::string started = iso_time_now();
  j["started"] = started;
  write_json(manifest, j);
  const auto t0 = std::chrono::steady_clock::now();
  auto finish = [&](const std::string& status, int exit_code, const std::string& error) {
    j["status"] = status;
    j["exit_code"] = exit_code;
    j["finished"] = iso_time_now();
    j["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!error.empty()) j["error"] = error;
  };
  try {
    CommandReport rep;
    switch (config.command()) {
      case Command::kernel: rep = do_kernel(config, out_dir); break;
      case Command::solve: rep = do_solve(config, out_dir); break;
      case Command::sweep: rep = do_sweep(config, out_dir); break;
      case Command::certify: rep = do_certify(config, out_dir); break;
      case Command::mild: rep = do_mild(config, out_dir); break;
      case Command::estimates: rep = do_estimates(config, out_dir); break;
    }
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& ch : rep.checks) {
      checks.push_back({{"name", ch.name}, {"pass", ch.pass}, {"value", ch.value}, {"detail", ch.detail}});
    }
    j["checks"] = checks;
    j["files"] = rep.files;
    j["summary"] = rep.summary;
    finish(rep.all_pass() ? "pass" : "check_failed", rep.all_pass() ? exit_ok : exit_check_failed, "");
    write_json(manifest, j);
    return rep;
  } catch (const Error& e) {
    const int code = e.kind() == ErrorKind::invalid_argument ? exit_config_error
                     : e.kind() == ErrorKind::numerical    ? exit_numerical_error
                     : e.kind() == ErrorKind::io           ? exit_io_error
                                                           : exit_check_failed;
    finish("error", code, e.what());
    write_json(manifest, j);
    throw;
  } catch (const std::exception& e) {
    finish("error", exit_internal_error, e.what());
    write_json(manifest, j);
    throw;
  }
}

}  // namespace heis
