#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "toml.hpp"
#include "ddopt/eqsolve.hpp"
#include "ddopt/error.hpp"
#include "ddopt/gensolve.hpp"
#include "ddopt/registry.hpp"
#include "ddopt/stosolve.hpp"

namespace ddopt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- TOML ---------------------------------------------------------------------------

namespace {

json toml_node_to_json(const toml::node& n) {
  if (const auto* t = n.as_table()) {
    json o = json::object();
    for (const auto& [k, v] : *t) o[std::string(k.str())] = toml_node_to_json(v);
    return o;
  }
  if (const auto* a = n.as_array()) {
    json arr = json::array();
    for (const auto& v : *a) arr.push_back(toml_node_to_json(v));
    return arr;
  }
  if (auto v = n.value_exact<std::int64_t>()) return *v;
  if (auto v = n.value_exact<double>()) return *v;
  if (auto v = n.value_exact<bool>()) return *v;
  if (auto v = n.value_exact<std::string>()) return *v;
  // Dates and times are kept as their TOML text.
  std::ostringstream os;
  n.visit([&](const auto& v) { os << v; });
  return os.str();
}

}  // namespace

json parse_toml(const std::string& text) {
  try {
    return toml_node_to_json(toml::parse(text));
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "TOML: " << e.description() << " at line " << e.source().begin.line;
    throw Error(ErrorCode::InvalidConfig, os.str());
  }
}

json load_toml(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_toml(ss.str());
}

// ---- config resolution ------------------------------------------------------------

namespace {

enum class Kind { Number, Integer, String, Bool, OptionalNumber };

struct KeySpec {
  const char* key;
  Kind kind;
};

// Every key any algorithm understands.
const std::vector<KeySpec>& known_keys() {
  static const std::vector<KeySpec> keys = {
      {"algo", Kind::String},        {"seed", Kind::Integer},         {"qp_tol", Kind::Number},
      {"mapping", Kind::String},     {"alpha", Kind::OptionalNumber}, {"alpha2", Kind::OptionalNumber},
      {"tau", Kind::Number},         {"rho0", Kind::Number},          {"max_iter", Kind::Integer},
      {"tol", Kind::Number},         {"early_stop", Kind::Bool},      {"vartheta", Kind::Number},
      {"infeas_eps", Kind::Number},  {"K", Kind::Integer},            {"sigma", Kind::Number},
      {"noise_dist", Kind::String},  {"estimator", Kind::String},     {"momentum", Kind::Number},
      {"batch", Kind::Integer},      {"schedule", Kind::String},      {"target_eps", Kind::Number},
      {"diag_every", Kind::Integer},
  };
  return keys;
}

const KeySpec* find_key(const std::string& k) {
  for (const KeySpec& s : known_keys())
    if (k == s.key) return &s;
  return nullptr;
}

json defaults_for(const std::string& algo) {
  json d = {{"algo", algo}, {"seed", 0}};
  if (algo == "eq") {
    d.update({{"mapping", "gram-inverse"}, {"alpha", nullptr}, {"alpha2", nullptr}, {"tau", 0.5},
              {"rho0", 1.0}, {"max_iter", 1000}, {"tol", 1e-6}, {"early_stop", true}});
  } else if (algo == "gen") {
    d.update({{"qp_tol", default_qp_tol()}, {"vartheta", 0.5}, {"tau", 0.5}, {"rho0", 1.0}, {"max_iter", 1000},
              {"tol", 1e-6}, {"infeas_eps", 1e-2}, {"early_stop", true}});
  } else if (algo == "sto") {
    d.update({{"qp_tol", default_qp_tol()}, {"vartheta", 0.5}, {"tau", 0.25}, {"rho0", 1.0}, {"K", 1000},
              {"sigma", 0.0}, {"noise_dist", "uniform-ball"}, {"estimator", "minibatch"}, {"momentum", 0.1},
              {"batch", 1}, {"schedule", "fixed"}, {"target_eps", 0.1}, {"diag_every", 1}});
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown algo '" + algo + "' (expected eq, gen or sto)");
  }
  return d;
}

void check_type(const std::string& key, Kind kind, const json& v) {
  bool ok = false;
  switch (kind) {
    case Kind::Number:
      ok = v.is_number();
      break;
    case Kind::OptionalNumber:
      ok = v.is_number() || v.is_null();
      break;
    case Kind::Integer:
      ok = v.is_number_integer() && v.get<std::int64_t>() >= 0;
      break;
    case Kind::String:
      ok = v.is_string();
      break;
    case Kind::Bool:
      ok = v.is_boolean();
      break;
  }
  if (!ok) throw Error(ErrorCode::InvalidConfig, "bad value for '" + key + "': " + v.dump());
}

}  // namespace

json resolve_config(const std::vector<json>& layers) {
  std::string algo = "eq";
  for (const json& l : layers) {
    if (!l.is_object()) throw Error(ErrorCode::InvalidConfig, "config layer must be a table");
    if (l.contains("algo")) {
      check_type("algo", Kind::String, l["algo"]);
      algo = l["algo"].get<std::string>();
    }
  }
  json cfg = defaults_for(algo);
  for (const json& l : layers) {
    for (const auto& [k, v] : l.items()) {
      const KeySpec* spec = find_key(k);
      if (!spec) throw Error(ErrorCode::InvalidConfig, "unknown config key '" + k + "'");
      if (!cfg.contains(k)) throw Error(ErrorCode::InvalidConfig, "'" + k + "' does not apply to algo " + algo);
      check_type(k, spec->kind, v);
      cfg[k] = v;
    }
  }
  return cfg;
}

// ---- solving --------------------------------------------------------------------------

namespace {

EqSolverConfig eq_config(const json& c) {
  EqSolverConfig cfg;
  cfg.tau = c["tau"];
  cfg.rho0 = c["rho0"];
  cfg.max_iter = c["max_iter"];
  cfg.tol_eps = c["tol"];
  cfg.early_stop = c["early_stop"];
  const auto kind = parse_operator_kind(c["mapping"]);
  if (c["alpha"].is_null()) {
    cfg.alpha_from_problem = true;
    cfg.A.kind = kind;
  } else {
    const double a = c["alpha"];
    cfg.A = OperatorAChoice{kind, a, c["alpha2"].is_null() ? a : c["alpha2"].get<double>()};
    if (kind != OperatorAChoice::Kind::Hybrid) cfg.A.alpha2 = 0.0;
  }
  return cfg;
}

GenConfig gen_config(const json& c) {
  GenConfig cfg;
  cfg.vartheta = c["vartheta"];
  cfg.tau = c["tau"];
  cfg.rho0 = c["rho0"];
  cfg.max_iter = c["max_iter"];
  cfg.tol_eps = c["tol"];
  cfg.infeas_eps = c["infeas_eps"];
  cfg.qp_tol = c["qp_tol"];
  cfg.early_stop = c["early_stop"];
  return cfg;
}

EstimatorKind parse_estimator(const std::string& s) {
  if (s == "minibatch") return EstimatorKind::MiniBatch;
  if (s == "recursive") return EstimatorKind::RecursiveMomentum;
  throw Error(ErrorCode::InvalidConfig, "unknown estimator '" + s + "' (expected minibatch or recursive)");
}

NoiseDistribution parse_noise_dist(const std::string& s) {
  if (s == "uniform-ball") return NoiseDistribution::UniformBall;
  if (s == "signed-scaled") return NoiseDistribution::SignedScaled;
  throw Error(ErrorCode::InvalidConfig, "unknown noise_dist '" + s + "'");
}

StoConfig sto_config(const json& c) {
  StoConfig cfg;
  cfg.vartheta_tilde = c["vartheta"];
  cfg.tau = c["tau"];
  cfg.rho0 = c["rho0"];
  cfg.K = c["K"];
  cfg.seed = c["seed"];
  cfg.qp_tol = c["qp_tol"];
  cfg.diag_every = std::max(1, c["diag_every"].get<int>());
  cfg.estimator = parse_estimator(c["estimator"]);
  const double mom = c["momentum"];
  cfg.alpha = {mom, mom, mom};
  const std::string schedule = c["schedule"];
  if (schedule == "fixed") {
    const std::uint64_t b = std::max<std::uint64_t>(1, c["batch"].get<std::uint64_t>());
    cfg.schedule.fixed = {b, b, b};
  } else if (schedule == "theory") {
    const double sigma = c["sigma"];
    TargetConstants k;
    k.K = std::max(1, cfg.K);
    const TheoryParameters pp = from_target_eps(c["target_eps"], sigma, sigma, sigma, k, cfg.estimator);
    cfg.schedule = pp.schedule;
    if (cfg.estimator == EstimatorKind::RecursiveMomentum) cfg.alpha = pp.alpha;
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown schedule '" + schedule + "' (expected fixed or theory)");
  }
  return cfg;
}

}  // namespace

RunRecord run_one(const std::string& problem, const json& cfg) {
  const ProblemSpec p = registry_get(problem);
  const std::string algo = cfg.at("algo");
  RunRecord rec;
  if (algo == "eq") {
    rec = solve_eq(p, eq_config(cfg));
  } else if (algo == "gen") {
    rec = solve_gen(p, gen_config(cfg));
  } else {
    NoiseModel noise = NoiseModel::uniform(cfg.at("sigma"), cfg.at("seed"));
    noise.distribution = parse_noise_dist(cfg.at("noise_dist"));
    rec = solve_sto(p, noise, sto_config(cfg));
  }
  json full = cfg;
  full["problem"] = problem;
  full["solver"] = rec.config;
  rec.config = std::move(full);
  return rec;
}

int exit_code_for(RunStatus s) {
  switch (s) {
    case RunStatus::Converged:
    case RunStatus::MaxIter:
      return kExitOk;
    case RunStatus::InfeasibleStationary:
      return kExitInfeasible;
    case RunStatus::Failed:
      return kExitFailed;
  }
  return kExitFailed;
}

std::string slug(const std::string& name) {
  std::string out;
  for (char ch : name) {
    const bool keep = std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' || ch == '_' || ch == '=';
    out += keep ? ch : '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "run" : out;
}

// ---- commands ------------------------------------------------------------------------

namespace {

// Solver parameters exposed as flags; each maps onto a config key.
struct ParamFlags {
  struct Entry {
    const char* key;
    CLI::Option* opt = nullptr;
    std::string value;
  };
  std::vector<Entry> entries;
  bool no_early_stop = false;
  CLI::Option* no_early_stop_opt = nullptr;

  void attach(CLI::App& app) {
    const std::vector<std::pair<const char*, const char*>> flags = {
        {"algo", "--algo"},
        {"seed", "--seed"},
        {"qp_tol", "--qp-tol"},
        {"mapping", "--A,--mapping"},
        {"alpha", "--alpha"},
        {"alpha2", "--alpha2"},
        {"tau", "--tau"},
        {"rho0", "--rho0"},
        {"max_iter", "--max-iter"},
        {"tol", "--tol"},
        {"vartheta", "--vartheta"},
        {"infeas_eps", "--infeas-eps"},
        {"K", "--K,--iterations"},
        {"sigma", "--sigma,--noise"},
        {"noise_dist", "--noise-dist"},
        {"estimator", "--estimator"},
        {"momentum", "--momentum"},
        {"batch", "--batch"},
        {"schedule", "--schedule"},
        {"target_eps", "--target-eps"},
        {"diag_every", "--diag-every"},
    };
    entries.reserve(flags.size());
    for (const auto& [key, flag] : flags) entries.push_back({key, nullptr, {}});
    for (std::size_t i = 0; i < flags.size(); ++i)
      entries[i].opt = app.add_option(flags[i].second, entries[i].value, std::string("solver parameter ") + flags[i].first)
                           ->group("Solver parameters");
    no_early_stop_opt =
        app.add_flag("--no-early-stop", no_early_stop, "run the full iteration budget")->group("Solver parameters");
  }

  json layer() const {
    json l = json::object();
    for (const Entry& e : entries) {
      if (e.opt->count() == 0) continue;
      const KeySpec* spec = find_key(e.key);
      try {
        std::size_t used = 0;
        switch (spec->kind) {
          case Kind::Number:
          case Kind::OptionalNumber: {
            const double v = std::stod(e.value, &used);
            if (used != e.value.size()) throw std::invalid_argument(e.value);
            l[e.key] = v;
            break;
          }
          case Kind::Integer: {
            const long long v = std::stoll(e.value, &used);
            if (used != e.value.size() || v < 0) throw std::invalid_argument(e.value);
            l[e.key] = v;
            break;
          }
          case Kind::String:
            l[e.key] = e.value;
            break;
          case Kind::Bool:
            break;
        }
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::InvalidConfig, std::string("bad value for --") + e.key + ": " + e.value);
      }
    }
    if (no_early_stop_opt->count() > 0) l["early_stop"] = false;
    return l;
  }
};

void write_to(const std::string& path, const std::function<void(std::ostream&)>& body, std::ostream& out) {
  if (path.empty() || path == "-") {
    body(out);
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p);
  if (!f) throw Error(ErrorCode::InvalidConfig, "cannot write " + path);
  body(f);
}

struct RunOptions {
  std::string problem;
  std::string config_file;
  std::string output;
  std::string format = "jsonl";
  bool timing = false;
};

int cmd_run(const RunOptions& o, const ParamFlags& flags, std::ostream& out, std::ostream& err) {
  std::vector<json> layers;
  if (!o.config_file.empty()) {
    json file = load_toml(o.config_file);
    // Either flat keys or a [solver] table.
    if (file.contains("solver")) file = file["solver"];
    layers.push_back(file);
  }
  layers.push_back(flags.layer());
  const json cfg = resolve_config(layers);
  const RunRecord rec = run_one(o.problem, cfg);
  write_to(o.output,
           [&](std::ostream& os) {
             if (o.format == "csv")
               write_summary_csv(os, summarize_suite({rec}), rec.config);
             else
               write_jsonl(os, rec, o.timing);
           },
           out);
  if (rec.status == RunStatus::Failed) err << "run failed: " << rec.failure_reason << '\n';
  return exit_code_for(rec.status);
}

struct SuiteOptions {
  std::string manifest;
  std::string out_dir = "ddopt-out";
  unsigned jobs = 0;
  bool timing = false;
};

struct SuiteTask {
  std::size_t group = 0;
  std::string problem;
  json cfg;
  RunRecord rec;
};

std::string format_value(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

int cmd_suite(const SuiteOptions& o, const ParamFlags& flags, std::ostream& out, std::ostream& err) {
  const json m = load_toml(o.manifest);
  for (const auto& [k, v] : m.items())
    if (k != "suite" && k != "overrides" && k != "sweep")
      throw Error(ErrorCode::InvalidConfig, "unknown manifest table [" + k + "]");
  if (!m.contains("suite") || !m["suite"].contains("problems") || !m["suite"]["problems"].is_array())
    throw Error(ErrorCode::InvalidConfig, "manifest needs [suite] problems = [...]");
  std::vector<std::string> problems;
  for (const json& p : m["suite"]["problems"]) {
    if (!p.is_string()) throw Error(ErrorCode::InvalidConfig, "problem names must be strings");
    problems.push_back(p);
  }
  if (problems.empty()) throw Error(ErrorCode::InvalidConfig, "manifest lists no problems");
  json base = m["suite"];
  base.erase("problems");
  const json overrides = m.value("overrides", json::object());
  for (const auto& [name, tbl] : overrides.items())
    if (std::find(problems.begin(), problems.end(), name) == problems.end())
      throw Error(ErrorCode::InvalidConfig, "override for unlisted problem '" + name + "'");

  // Cartesian product of the sweep axes (keys in sorted order).
  std::vector<json> groups{json::object()};
  const json sweep = m.value("sweep", json::object());
  for (const auto& [key, values] : sweep.items()) {
    if (!values.is_array() || values.empty())
      throw Error(ErrorCode::InvalidConfig, "sweep '" + key + "' must be a non-empty array");
    std::vector<json> next;
    for (const json& g : groups)
      for (const json& v : values) {
        json h = g;
        h[key] = v;
        next.push_back(h);
      }
    groups = std::move(next);
  }
  const bool swept = groups.size() > 1 || !groups.front().empty();

  const json flag_layer = flags.layer();
  std::vector<SuiteTask> tasks;
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (const std::string& p : problems) {
      registry_get(p);  // unknown names fail before anything runs
      SuiteTask t;
      t.group = g;
      t.problem = p;
      t.cfg = resolve_config({base, overrides.value(p, json::object()), groups[g], flag_layer});
      tasks.push_back(std::move(t));
    }

  unsigned jobs = o.jobs ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, unsigned(tasks.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        tasks[i].rec = run_one(tasks[i].problem, tasks[i].cfg);
      } catch (const std::exception& e) {
        RunRecord r;
        r.problem = tasks[i].problem;
        r.algorithm = tasks[i].cfg.value("algo", "");
        r.config = tasks[i].cfg;
        r.status = RunStatus::Failed;
        r.failure_reason = e.what();
        tasks[i].rec = std::move(r);
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::size_t ok_runs = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::string label;
    for (const auto& [k, v] : groups[g].items()) label += (label.empty() ? "" : ",") + k + "=" + format_value(v);
    const fs::path dir = swept ? fs::path(o.out_dir) / slug(label) : fs::path(o.out_dir);
    fs::create_directories(dir);
    std::vector<RunRecord> recs;
    for (const SuiteTask& t : tasks) {
      if (t.group != g) continue;
      std::ofstream f(dir / (slug(t.problem) + ".jsonl"));
      write_jsonl(f, t.rec, o.timing);
      if (t.rec.status != RunStatus::Failed) ++ok_runs;
      recs.push_back(t.rec);
    }
    const SuiteSummary s = summarize_suite(recs);
    json header_cfg = {{"command", "suite"}, {"manifest", o.manifest}, {"suite", base},
                       {"group", groups[g]}, {"flags", flag_layer}, {"overrides", overrides}};
    std::ofstream csv(dir / "summary.csv");
    write_summary_csv(csv, s, header_cfg);
    char line[256];
    std::snprintf(line, sizeof line, "runs=%zu failed=%zu median stationarity=%.3e feasibility=%.3e", recs.size(),
                  s.failed, s.stationarity.median, s.feasibility.median);
    out << (label.empty() ? std::string("suite") : label) << ": " << line << "  -> " << (dir / "summary.csv").string()
        << '\n';
    for (const SuiteRow& r : s.rows)
      if (r.status == RunStatus::Failed) {
        for (const SuiteTask& t : tasks)
          if (t.group == g && t.problem == r.problem) err << "  " << r.problem << " failed: " << t.rec.failure_reason << '\n';
      }
  }
  return ok_runs > 0 ? kExitOk : kExitFailed;
}

struct ReportOptions {
  std::vector<std::string> inputs;
  std::string output;
};

int cmd_report(const ReportOptions& o, std::ostream& out) {
  std::vector<std::string> files;
  for (const std::string& in : o.inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      for (const auto& e : fs::recursive_directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path().string());
    } else if (fs::is_regular_file(p)) {
      files.push_back(in);
    } else {
      throw Error(ErrorCode::InvalidConfig, "no such input: " + in);
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::InvalidConfig, "report: no .jsonl inputs");
  std::vector<RunRecord> recs;
  for (const std::string& f : files) {
    std::ifstream in(f);
    try {
      recs.push_back(read_jsonl(in));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::InvalidConfig, "report: " + f + ": " + e.what());
    }
  }
  const SuiteSummary s = summarize_suite(recs);
  const json cfg = {{"command", "report"}, {"inputs", o.inputs}};
  write_to(o.output, [&](std::ostream& os) { write_summary_csv(os, s, cfg); }, out);
  return kExitOk;
}

int cmd_check(std::ostream& out) {
  const std::vector<CheckResult> results = run_checks();
  bool all = true;
  for (const CheckResult& r : results) {
    char line[128];
    std::snprintf(line, sizeof line, "%-26s %s", r.name.c_str(), r.pass ? "PASS" : "FAIL");
    out << line << "  " << r.detail << '\n';
    all = all && r.pass;
  }
  std::size_t failed = 0;
  for (const CheckResult& r : results) failed += r.pass ? 0 : 1;
  out << (all ? "all checks passed" : std::to_string(failed) + " check(s) failed") << '\n';
  return all ? kExitOk : kExitFailed;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ddopt: adaptive directional decomposition solvers and benchmarks", "ddopt"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DDOPT_VERSION);

  RunOptions run_opts;
  ParamFlags run_flags;
  auto* run = app.add_subcommand("run", "solve one problem and write its history");
  run->add_option("--problem,-p", run_opts.problem, "registry name or rand-quad(...) expression")->required();
  run->add_option("--config", run_opts.config_file, "TOML file with solver parameters");
  run->add_option("--output,-o", run_opts.output, "output path (default stdout)");
  run->add_option("--format", run_opts.format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));
  run->add_flag("--timing", run_opts.timing, "include wall time in the output");
  run_flags.attach(*run);

  SuiteOptions suite_opts;
  ParamFlags suite_flags;
  auto* suite = app.add_subcommand("suite", "run every problem of a TOML manifest");
  suite->add_option("--manifest,-m", suite_opts.manifest, "TOML manifest")->required();
  suite->add_option("--out-dir,-o", suite_opts.out_dir, "directory for per-run JSONL and summary CSV");
  suite->add_option("--jobs,-j", suite_opts.jobs, "parallel runs (default: all cores)");
  suite->add_flag("--timing", suite_opts.timing, "include wall time in the outputs");
  suite_flags.attach(*suite);

  ReportOptions report_opts;
  auto* report = app.add_subcommand("report", "summarize JSONL run files as CSV");
  report->add_option("inputs", report_opts.inputs, "JSONL files or directories")->required();
  report->add_option("--output,-o", report_opts.output, "output path (default stdout)");

  auto* check = app.add_subcommand("check", "run the self-check oracle battery");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(run_opts, run_flags, out, err);
    if (*suite) return cmd_suite(suite_opts, suite_flags, out, err);
    if (*report) return cmd_report(report_opts, out);
    if (*check) return cmd_check(out);
  } catch (const Error& e) {
    err << "ddopt: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "ddopt: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace ddopt::cli
