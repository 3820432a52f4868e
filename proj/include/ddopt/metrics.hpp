#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ddopt/linalg.hpp"
#include "ddopt/model.hpp"

namespace ddopt {

struct KktResidual {
  double stationarity = 0.0;     // |grad f + J lambda - mu|
  double feasibility = 0.0;      // |c|
  double complementarity = 0.0;  // |mu^T x|
  double max() const;
};

/// Empty lambda or mu are treated as zero.
KktResidual kkt_residual(const Evaluation& ev, const Vector& lambda, const Vector& mu, const Vector& x);

struct InfeasibilityResidual {
  double stationarity = 0.0;     // |J c - mu|
  double complementarity = 0.0;  // |mu^T x|
};

InfeasibilityResidual infeasibility_residual(const Matrix& j, const Vector& c, const Vector& mu,
                                             const Vector& x);

/// |s + J w|
double stationarity_from_step(const Vector& s, const Matrix& j, const Vector& w);

enum class RunStatus { Converged, MaxIter, InfeasibleStationary, Failed };
std::string_view to_string(RunStatus s);
RunStatus run_status_from_string(std::string_view s);

struct SampleCounts {
  std::uint64_t grad_f = 0;
  std::uint64_t jac_c = 0;
  std::uint64_t c = 0;
  std::uint64_t total() const { return grad_f + jac_c + c; }
  SampleCounts& operator+=(const SampleCounts& o) {
    grad_f += o.grad_f;
    jac_c += o.jac_c;
    c += o.c;
    return *this;
  }
  friend bool operator==(const SampleCounts&, const SampleCounts&) = default;
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Per-iteration quantities used by the invariant checks. NaN means "not
/// applicable for this algorithm or iteration".
struct IterDiagnostics {
  double merit_before = kNaN;       // f_k + rho_k |c_k|
  double merit_after = kNaN;        // f_{k+1} + rho_k |c_{k+1}|
  double required_decrease = kNaN;  // eta_k (1 - tau) / 2 |s_k|^2
  double min_x = kNaN;              // min over bounded components of x_k
  double vartheta = kNaN;           // contraction used in the merit update
  double contraction_err = kNaN;    // | |c + J^T s| - (1 - vartheta)|c| |
  double step_stationarity = kNaN;  // |s + J w|
  double err_grad_f = kNaN;         // estimator errors against true values
  double err_jac_c = kNaN;
  double err_c = kNaN;

  /// merit_after - merit_before + required_decrease (<= 0 means descent held)
  double descent_violation() const { return merit_after - merit_before + required_decrease; }
};

struct HistoryRow {
  int k = 0;
  double f = 0.0;
  KktResidual kkt;
  double rho = 0.0;
  double eta = 0.0;
  double step_norm = 0.0;
  SampleCounts samples;  // cumulative
  IterDiagnostics diag;
};

struct RunRecord {
  std::string problem;
  std::string algorithm;
  nlohmann::json config;
  std::size_t d = 0;
  std::size_t m = 0;
  std::vector<HistoryRow> history;
  RunStatus status = RunStatus::Failed;
  std::string failure_reason;
  double wall_time = 0.0;
  Vector x_final;
  Vector lambda_final;
  Vector mu_final;
  SampleCounts samples;      // samples drawn per oracle
  SampleCounts evaluations;  // oracle calls per oracle (recursive estimators pay twice)
  bool has_infeasibility = false;
  InfeasibilityResidual infeasibility;

  /// Last history row's residual (zeros when there is no history).
  KktResidual final_kkt() const;
  int iterations() const { return history.empty() ? 0 : history.back().k; }
};

struct Quartiles {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  // Tukey whiskers: extreme data points within 1.5 IQR of the box.
  double whisker_lo = 0.0;
  double whisker_hi = 0.0;
};

/// Inclusive linear-interpolation quartiles. Throws EmptyInput.
Quartiles quartiles(std::vector<double> values);

struct SuiteRow {
  std::string problem;
  std::size_t d = 0;
  std::size_t m = 0;
  KktResidual kkt;
  RunStatus status = RunStatus::Failed;
};

struct SuiteSummary {
  Quartiles stationarity;
  Quartiles feasibility;
  Quartiles complementarity;
  std::size_t included = 0;  // records entering the quartiles
  std::size_t failed = 0;
  std::vector<SuiteRow> rows;  // sorted by problem name
};

/// Failed runs are listed in `rows` but excluded from the quartiles; when
/// every run failed the quartiles stay zero. Throws EmptyInput.
SuiteSummary summarize_suite(const std::vector<RunRecord>& records);

// ---- serialization -----------------------------------------------------------

/// Header object shared by every output file.
nlohmann::json output_header(const nlohmann::json& config);

/// Header line, one line per history row, then a terminal summary line.
/// Without timing the output depends only on the record's numbers.
void write_jsonl(std::ostream& os, const RunRecord& rec, bool with_timing = true);
/// Inverse of write_jsonl for a single record (diagnostics are not restored).
RunRecord read_jsonl(std::istream& is);

/// A `# {header json}` comment line, then the CSV header and one row per run.
void write_summary_csv(std::ostream& os, const SuiteSummary& s, const nlohmann::json& config);

}  // namespace ddopt
