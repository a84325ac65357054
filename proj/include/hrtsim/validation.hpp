#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace hrtsim {

/// Published correlation between a trust antecedent and trust.
struct BenchmarkEntry {
  std::string factor;
  double r_meta = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  int k = 0;    // studies
  long n = 0;   // pooled sample

  friend bool operator==(const BenchmarkEntry&, const BenchmarkEntry&) = default;
};

/// The embedded meta-analytic set, one entry per swept factor.
std::vector<BenchmarkEntry> default_benchmarks();

/// CSV with header `factor,r_meta,ci_lo,ci_hi,k,n`. Errors carry the line number.
std::vector<BenchmarkEntry> parse_benchmarks(std::string_view text);
std::vector<BenchmarkEntry> load_benchmarks(const std::filesystem::path& path);

struct FactorValidation {
  std::string factor;
  double r_meta = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double r_model = 0.0;
  double delta_r = 0.0;  // r_model - r_meta
  bool validated = false;
};

struct ValidationReport {
  std::vector<FactorValidation> factors;  // benchmark order
  int validated_count = 0;
  double spearman_rho = 0.0;  // over (r_meta, r_model), midranks
  std::string top_model_factor;  // factor with the largest model r
  std::vector<std::string> notes;
};

/// Throws std::invalid_argument naming the first benchmark factor missing from model_rs.
ValidationReport validate(const std::map<std::string, double>& model_rs, const std::vector<BenchmarkEntry>& benchmarks);

struct ForestRecord {
  std::string factor;
  double r_meta = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double r_model = 0.0;
  std::string status;  // "validated" or "not_validated"
};

/// One record per factor, largest r_meta first (ties keep benchmark order).
std::vector<ForestRecord> forest_plot_data(const ValidationReport& report, const std::vector<BenchmarkEntry>& benchmarks);

}  // namespace hrtsim
