#include "ddopt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "ddopt/error.hpp"

namespace ddopt {

using nlohmann::json;

double KktResidual::max() const { return std::max({stationarity, feasibility, complementarity}); }

KktResidual kkt_residual(const Evaluation& ev, const Vector& lambda, const Vector& mu, const Vector& x) {
  const std::size_t d = ev.grad_f.size();
  if (x.size() != d || (!mu.empty() && mu.size() != d) || (!lambda.empty() && lambda.size() != ev.c.size()))
    throw Error(ErrorCode::DimensionMismatch, "kkt_residual: dimensions");
  Vector st = ev.grad_f;
  if (!lambda.empty() && !ev.c.empty()) axpy(1.0, matvec(ev.jac_c, lambda), st);
  if (!mu.empty()) axpy(-1.0, mu, st);
  KktResidual r;
  r.stationarity = norm(st);
  r.feasibility = norm(ev.c);
  r.complementarity = mu.empty() ? 0.0 : std::fabs(dot(mu, x));
  return r;
}

InfeasibilityResidual infeasibility_residual(const Matrix& j, const Vector& c, const Vector& mu,
                                             const Vector& x) {
  Vector g = c.empty() ? Vector(j.rows(), 0.0) : matvec(j, c);
  InfeasibilityResidual r;
  if (!mu.empty()) {
    axpy(-1.0, mu, g);
    r.complementarity = std::fabs(dot(mu, x));
  }
  r.stationarity = norm(g);
  return r;
}

double stationarity_from_step(const Vector& s, const Matrix& j, const Vector& w) {
  if (w.empty()) return norm(s);
  return norm(add(s, matvec(j, w)));
}

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged:
      return "Converged";
    case RunStatus::MaxIter:
      return "MaxIter";
    case RunStatus::InfeasibleStationary:
      return "InfeasibleStationary";
    case RunStatus::Failed:
      return "Failed";
  }
  return "Failed";
}

RunStatus run_status_from_string(std::string_view s) {
  for (RunStatus r : {RunStatus::Converged, RunStatus::MaxIter, RunStatus::InfeasibleStationary, RunStatus::Failed})
    if (to_string(r) == s) return r;
  throw Error(ErrorCode::InvalidConfig, "unknown run status: " + std::string(s));
}

KktResidual RunRecord::final_kkt() const { return history.empty() ? KktResidual{} : history.back().kkt; }

// ---- summaries ----------------------------------------------------------------

namespace {

double quantile_sorted(const std::vector<double>& v, double p) {
  const double pos = p * double(v.size() - 1);
  const std::size_t lo = std::size_t(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - double(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace

Quartiles quartiles(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "quartiles of an empty set");
  std::sort(values.begin(), values.end());
  Quartiles q;
  q.min = values.front();
  q.max = values.back();
  q.q1 = quantile_sorted(values, 0.25);
  q.median = quantile_sorted(values, 0.5);
  q.q3 = quantile_sorted(values, 0.75);
  const double iqr = q.q3 - q.q1;
  const double lo_fence = q.q1 - 1.5 * iqr;
  const double hi_fence = q.q3 + 1.5 * iqr;
  q.whisker_lo = q.q1;
  q.whisker_hi = q.q3;
  for (double v : values) {
    if (v >= lo_fence) q.whisker_lo = std::min(q.whisker_lo, v);
    if (v <= hi_fence) q.whisker_hi = std::max(q.whisker_hi, v);
  }
  return q;
}

SuiteSummary summarize_suite(const std::vector<RunRecord>& records) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "summarize_suite: no records");
  SuiteSummary s;
  std::vector<double> st, fe, co;
  for (const RunRecord& r : records) {
    SuiteRow row{r.problem, r.d, r.m, r.final_kkt(), r.status};
    s.rows.push_back(row);
    if (r.status == RunStatus::Failed) {
      ++s.failed;
      continue;
    }
    st.push_back(row.kkt.stationarity);
    fe.push_back(row.kkt.feasibility);
    co.push_back(row.kkt.complementarity);
  }
  std::stable_sort(s.rows.begin(), s.rows.end(),
                   [](const SuiteRow& a, const SuiteRow& b) { return a.problem < b.problem; });
  s.included = st.size();
  if (!st.empty()) {
    s.stationarity = quartiles(st);
    s.feasibility = quartiles(fe);
    s.complementarity = quartiles(co);
  }
  return s;
}

// ---- serialization -------------------------------------------------------------

namespace {

json counts_json(const SampleCounts& c) { return {{"grad_f", c.grad_f}, {"jac_c", c.jac_c}, {"c", c.c}}; }

SampleCounts counts_from(const json& j) {
  SampleCounts c;
  c.grad_f = j.value("grad_f", std::uint64_t{0});
  c.jac_c = j.value("jac_c", std::uint64_t{0});
  c.c = j.value("c", std::uint64_t{0});
  return c;
}

json kkt_json(const KktResidual& k) {
  return {{"stationarity", k.stationarity}, {"feasibility", k.feasibility}, {"complementarity", k.complementarity}};
}

// NaN and inf serialize as null.
double num_or_nan(const json& j) { return j.is_number() ? j.get<double>() : kNaN; }

KktResidual kkt_from(const json& j) {
  return {num_or_nan(j.at("stationarity")), num_or_nan(j.at("feasibility")), num_or_nan(j.at("complementarity"))};
}

// Generator names such as rand-quad(seed=1,d=6,m=2) contain commas.
std::string csv_field(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char ch : v) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

}  // namespace

json output_header(const json& config) {
  return {{"type", "header"}, {"artifact", "ddopt"}, {"version", DDOPT_VERSION}, {"config", config}};
}

void write_jsonl(std::ostream& os, const RunRecord& rec, bool with_timing) {
  json h = output_header(rec.config);
  h["problem"] = rec.problem;
  h["algorithm"] = rec.algorithm;
  h["d"] = rec.d;
  h["m"] = rec.m;
  os << h.dump() << '\n';
  for (const HistoryRow& r : rec.history) {
    json row = {{"type", "iter"}, {"k", r.k},         {"f", r.f},
                {"rho", r.rho},   {"eta", r.eta},     {"step_norm", r.step_norm},
                {"kkt", kkt_json(r.kkt)}, {"samples", counts_json(r.samples)}};
    os << row.dump() << '\n';
  }
  json t = {{"type", "summary"},
            {"status", std::string(to_string(rec.status))},
            {"iterations", rec.iterations()},
            {"final", kkt_json(rec.final_kkt())},
            {"x", rec.x_final},
            {"lambda", rec.lambda_final},
            {"mu", rec.mu_final},
            {"samples", counts_json(rec.samples)},
            {"evaluations", counts_json(rec.evaluations)}};
  if (with_timing) t["wall_time"] = rec.wall_time;
  if (!rec.failure_reason.empty()) t["reason"] = rec.failure_reason;
  if (rec.has_infeasibility)
    t["infeasibility"] = {{"stationarity", rec.infeasibility.stationarity},
                          {"complementarity", rec.infeasibility.complementarity}};
  os << t.dump() << '\n';
}

RunRecord read_jsonl(std::istream& is) {
  RunRecord rec;
  std::string line;
  bool header = false;
  bool summary = false;
  while (!summary && std::getline(is, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const std::string type = j.at("type");
    if (type == "header") {
      header = true;
      rec.config = j.value("config", json::object());
      rec.problem = j.value("problem", "");
      rec.algorithm = j.value("algorithm", "");
      rec.d = j.value("d", std::size_t{0});
      rec.m = j.value("m", std::size_t{0});
    } else if (type == "iter") {
      HistoryRow r;
      r.k = j.at("k");
      r.f = num_or_nan(j.at("f"));
      r.rho = num_or_nan(j.at("rho"));
      r.eta = num_or_nan(j.at("eta"));
      r.step_norm = num_or_nan(j.at("step_norm"));
      r.kkt = kkt_from(j.at("kkt"));
      r.samples = counts_from(j.at("samples"));
      rec.history.push_back(r);
    } else if (type == "summary") {
      summary = true;
      rec.status = run_status_from_string(j.at("status").get<std::string>());
      rec.wall_time = j.value("wall_time", 0.0);
      rec.x_final = j.value("x", Vector{});
      rec.lambda_final = j.value("lambda", Vector{});
      rec.mu_final = j.value("mu", Vector{});
      rec.samples = counts_from(j.value("samples", json::object()));
      rec.evaluations = counts_from(j.value("evaluations", json::object()));
      rec.failure_reason = j.value("reason", "");
      if (j.contains("infeasibility")) {
        rec.has_infeasibility = true;
        rec.infeasibility = {num_or_nan(j["infeasibility"].at("stationarity")),
                             num_or_nan(j["infeasibility"].at("complementarity"))};
      }
    }
  }
  if (!header || !summary) throw Error(ErrorCode::EmptyInput, "read_jsonl: incomplete record");
  return rec;
}

void write_summary_csv(std::ostream& os, const SuiteSummary& s, const json& config) {
  os << "# " << output_header(config).dump() << '\n';
  os << "problem,dim,m,stationarity,feasibility,complementarity,status\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return std::string(buf);
  };
  for (const SuiteRow& r : s.rows)
    os << csv_field(r.problem) << ',' << r.d << ',' << r.m << ',' << num(r.kkt.stationarity) << ','
       << num(r.kkt.feasibility) << ',' << num(r.kkt.complementarity) << ',' << to_string(r.status) << '\n';
}

}  // namespace ddopt
