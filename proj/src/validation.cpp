#include "hrtsim/validation.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hrtsim/errors.hpp"
#include "hrtsim/stats.hpp"

namespace hrtsim {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void parse_fail(int line, const std::string& msg) {
  throw ConfigError(ConfigError::Kind::syntax, "benchmarks", "benchmarks line " + std::to_string(line) + ": " + msg);
}

template <typename T>
T parse_number(const std::string& s, int line, const char* column) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    parse_fail(line, std::string("bad ") + column + " value '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<BenchmarkEntry> default_benchmarks() {
  return {
      {"reliability", 0.60, 0.54, 0.65, 66, 3471},   {"transparency", 0.45, 0.37, 0.52, 24, 1277},
      {"warmth", 0.45, 0.37, 0.52, 24, 1277},        {"communication", 0.45, 0.37, 0.52, 24, 1277},
      {"expertise", 0.27, 0.17, 0.36, 12, 618},      {"propensity", 0.22, 0.14, 0.30, 19, 1032},
      {"tenure", 0.22, 0.14, 0.30, 19, 1032},        {"collaboration", 0.27, 0.15, 0.38, 8, 483},
  };
}

std::vector<BenchmarkEntry> parse_benchmarks(std::string_view text) {
  static const std::vector<std::string> kHeader{"factor", "r_meta", "ci_lo", "ci_hi", "k", "n"};
  std::vector<BenchmarkEntry> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line;
    const std::string l = trim(raw);
    if (l.empty() || l.front() == '#') continue;
    const auto cols = split_csv_line(l);
    if (!header_seen) {
      if (cols != kHeader) parse_fail(line, "expected header factor,r_meta,ci_lo,ci_hi,k,n");
      header_seen = true;
      continue;
    }
    if (cols.size() != kHeader.size()) {
      parse_fail(line, "expected 6 columns, found " + std::to_string(cols.size()));
    }
    BenchmarkEntry e;
    e.factor = cols[0];
    if (e.factor.empty()) parse_fail(line, "empty factor name");
    e.r_meta = parse_number<double>(cols[1], line, "r_meta");
    e.ci_lo = parse_number<double>(cols[2], line, "ci_lo");
    e.ci_hi = parse_number<double>(cols[3], line, "ci_hi");
    e.k = parse_number<int>(cols[4], line, "k");
    e.n = parse_number<long>(cols[5], line, "n");
    if (e.ci_lo > e.ci_hi) parse_fail(line, "ci_lo exceeds ci_hi");
    if (e.r_meta < e.ci_lo || e.r_meta > e.ci_hi) parse_fail(line, "r_meta outside its interval");
    if (e.r_meta < -1.0 || e.r_meta > 1.0) parse_fail(line, "r_meta outside [-1, 1]");
    for (const auto& prev : out) {
      if (prev.factor == e.factor) parse_fail(line, "duplicate factor '" + e.factor + "'");
    }
    out.push_back(std::move(e));
  }
  if (out.empty()) throw ConfigError(ConfigError::Kind::invalid, "benchmarks", "benchmark file has no entries");
  return out;
}

std::vector<BenchmarkEntry> load_benchmarks(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError(ConfigError::Kind::missing_file, "benchmarks", "cannot open benchmarks file " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_benchmarks(ss.str());
}

ValidationReport validate(const std::map<std::string, double>& model_rs, const std::vector<BenchmarkEntry>& benchmarks) {
  if (benchmarks.empty()) throw std::invalid_argument("no benchmarks to validate against");
  ValidationReport rep;
  std::vector<double> meta, model;
  for (const auto& b : benchmarks) {
    const auto it = model_rs.find(b.factor);
    if (it == model_rs.end()) throw std::invalid_argument("model correlation missing for factor: " + b.factor);
    FactorValidation fv{b.factor, b.r_meta, b.ci_lo, b.ci_hi, it->second, it->second - b.r_meta,
                        ci_contains(it->second, b.ci_lo, b.ci_hi)};
    rep.validated_count += fv.validated ? 1 : 0;
    meta.push_back(b.r_meta);
    model.push_back(fv.r_model);
    rep.factors.push_back(std::move(fv));
  }

  const auto top = std::max_element(rep.factors.begin(), rep.factors.end(),
                                    [](const auto& a, const auto& b) { return a.r_model < b.r_model; });
  rep.top_model_factor = top->factor;

  if (meta.size() >= 3) {
    try {
      rep.spearman_rho = spearman_rho(meta, model);
    } catch (const UndefinedStatistic&) {
      rep.spearman_rho = 0.0;
      rep.notes.push_back("rank correlation undefined: one side has no variation");
    }
  } else {
    rep.notes.push_back("rank correlation needs at least 3 factors");
  }
  rep.notes.push_back("rank correlation uses midranks for tied benchmark values");
  return rep;
}

std::vector<ForestRecord> forest_plot_data(const ValidationReport& report, const std::vector<BenchmarkEntry>& benchmarks) {
  std::vector<ForestRecord> out;
  for (const auto& b : benchmarks) {
    const auto it = std::find_if(report.factors.begin(), report.factors.end(),
                                 [&](const FactorValidation& f) { return f.factor == b.factor; });
    if (it == report.factors.end()) continue;
    out.push_back({b.factor, b.r_meta, b.ci_lo, b.ci_hi, it->r_model, it->validated ? "validated" : "not_validated"});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.r_meta > b.r_meta; });
  return out;
}

}  // namespace hrtsim
