#include "hrtsim/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

#include "hrtsim/errors.hpp"

namespace hrtsim {

namespace {

constexpr double kZ975 = 1.959963984540054;

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("correlation inputs differ in length");
  if (x.size() < 3) throw std::invalid_argument("correlation needs at least 3 pairs");
}

}  // namespace

Correlation pearson_r(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedStatistic("correlation undefined: zero variance");

  Correlation c;
  c.n = x.size();
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double z = std::atanh(c.r);
  const double se = 1.0 / std::sqrt(static_cast<double>(c.n) - 3.0);
  c.ci_lo = std::tanh(z - kZ975 * se);
  c.ci_hi = std::tanh(z + kZ975 * se);
  return c;
}

std::vector<double> midranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });

  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  return pearson_r(rx, ry).r;
}

double eta_squared_oneway(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw std::invalid_argument("eta squared needs at least 2 groups");
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& g : groups) {
    if (g.empty()) throw std::invalid_argument("eta squared: empty group");
    total += std::accumulate(g.begin(), g.end(), 0.0);
    n += g.size();
  }
  const double grand = total / static_cast<double>(n);

  double ss_between = 0.0, ss_total = 0.0;
  for (const auto& g : groups) {
    const double m = mean(g);
    ss_between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double v : g) ss_total += (v - grand) * (v - grand);
  }
  if (ss_total == 0.0) throw UndefinedStatistic("eta squared undefined: zero total variance");
  return ss_between / ss_total;
}

AnovaTable factorial_anova(const std::vector<FactorialObservation>& obs, const std::vector<int>& design,
                           std::vector<std::string> names) {
  const std::size_t k = design.size();
  if (k == 0 || k > 16) throw std::invalid_argument("factorial design needs 1..16 factors");
  for (int l : design) {
    if (l < 2) throw std::invalid_argument("every factor needs at least 2 levels");
  }
  if (names.empty()) {
    for (std::size_t i = 0; i < k; ++i) names.push_back("F" + std::to_string(i));
  }
  if (names.size() != k) throw std::invalid_argument("one name per factor required");

  // Mixed-radix cell index, factor 0 varying fastest.
  std::vector<std::size_t> stride(k);
  std::size_t cells = 1;
  for (std::size_t i = 0; i < k; ++i) {
    stride[i] = cells;
    cells *= static_cast<std::size_t>(design[i]);
  }

  std::vector<double> cell_sum(cells, 0.0);
  std::vector<std::size_t> cell_n(cells, 0);
  std::vector<std::size_t> cell_of(obs.size());
  double total = 0.0;
  for (std::size_t o = 0; o < obs.size(); ++o) {
    const auto& ob = obs[o];
    if (ob.levels.size() != k) throw std::invalid_argument("observation has wrong number of factor levels");
    std::size_t c = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (ob.levels[i] < 0 || ob.levels[i] >= design[i]) throw std::invalid_argument("level index out of range");
      c += static_cast<std::size_t>(ob.levels[i]) * stride[i];
    }
    cell_of[o] = c;
    cell_sum[c] += ob.response;
    ++cell_n[c];
    total += ob.response;
  }
  const std::size_t reps = cell_n.front();
  if (reps < 2) throw std::invalid_argument("factorial ANOVA needs at least 2 replicates per cell");
  if (std::any_of(cell_n.begin(), cell_n.end(), [&](std::size_t n) { return n != reps; })) {
    throw std::invalid_argument("unbalanced design: unequal replicates per cell are not supported");
  }

  const std::size_t n = obs.size();
  const double grand = total / static_cast<double>(n);
  std::vector<double> cell_mean(cells);
  for (std::size_t c = 0; c < cells; ++c) cell_mean[c] = cell_sum[c] / static_cast<double>(reps);

  std::vector<std::vector<int>> cell_levels(cells, std::vector<int>(k));
  for (std::size_t c = 0; c < cells; ++c) {
    for (std::size_t i = 0; i < k; ++i) {
      cell_levels[c][i] = static_cast<int>((c / stride[i]) % static_cast<std::size_t>(design[i]));
    }
  }

  // Marginal means for every factor subset (mask 0 is the grand mean). Balanced,
  // so the mean of cell means equals the mean of the raw observations.
  const std::uint32_t nmasks = 1u << k;
  std::vector<std::vector<double>> marginal(nmasks);
  auto project = [&](std::uint32_t mask, std::size_t c) {
    std::size_t idx = 0, mult = 1;
    for (std::size_t i = 0; i < k; ++i) {
      if (mask & (1u << i)) {
        idx += static_cast<std::size_t>(cell_levels[c][i]) * mult;
        mult *= static_cast<std::size_t>(design[i]);
      }
    }
    return idx;
  };
  for (std::uint32_t mask = 0; mask < nmasks; ++mask) {
    std::size_t size = 1;
    for (std::size_t i = 0; i < k; ++i) {
      if (mask & (1u << i)) size *= static_cast<std::size_t>(design[i]);
    }
    std::vector<double> sum(size, 0.0);
    for (std::size_t c = 0; c < cells; ++c) sum[project(mask, c)] += cell_mean[c];
    const double per = static_cast<double>(cells / size);
    for (double& s : sum) s /= per;
    marginal[mask] = std::move(sum);
  }

  AnovaTable table;
  table.factor_names = names;
  table.n = n;
  for (const auto& ob : obs) table.ss_total += (ob.response - grand) * (ob.response - grand);

  double ss_resid = 0.0;
  for (std::size_t o = 0; o < n; ++o) {
    const double d = obs[o].response - cell_mean[cell_of[o]];
    ss_resid += d * d;
  }
  table.residual.label = "Residual";
  table.residual.df = static_cast<int>(n - cells);
  table.residual.ss = ss_resid;
  table.residual.ms = table.residual.df > 0 ? ss_resid / table.residual.df : 0.0;
  table.residual.f = std::numeric_limits<double>::quiet_NaN();
  table.residual.p = std::numeric_limits<double>::quiet_NaN();

  std::vector<std::uint32_t> masks;
  for (std::uint32_t m = 1; m < nmasks; ++m) masks.push_back(m);
  std::stable_sort(masks.begin(), masks.end(),
                   [](std::uint32_t a, std::uint32_t b) { return std::popcount(a) < std::popcount(b); });

  for (std::uint32_t s : masks) {
    // Effect at each cell by inclusion-exclusion over the subsets of s.
    double ss = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      double e = 0.0;
      for (std::uint32_t t = s;; t = (t - 1) & s) {
        const int sign = (std::popcount(s) - std::popcount(t)) % 2 == 0 ? 1 : -1;
        e += sign * marginal[t][project(t, c)];
        if (t == 0) break;
      }
      ss += static_cast<double>(reps) * e * e;
    }

    AnovaRow row;
    row.factors = s;
    row.df = 1;
    for (std::size_t i = 0; i < k; ++i) {
      if (s & (1u << i)) {
        row.df *= design[i] - 1;
        if (!row.label.empty()) row.label += " x ";
        row.label += names[i];
      }
    }
    row.ss = ss;
    row.ms = ss / row.df;
    if (table.residual.ms > 0.0) {
      row.f = row.ms / table.residual.ms;
      row.p = f_p_value(row.f, row.df, table.residual.df);
    } else {
      row.f = row.ms > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
      row.p = row.ms > 0.0 ? 0.0 : 1.0;
    }
    table.effects.push_back(std::move(row));
  }

  const double denom = table.ss_total;
  for (auto& row : table.effects) row.eta_squared = denom > 0.0 ? row.ss / denom : 0.0;
  table.residual.eta_squared = denom > 0.0 ? ss_resid / denom : 0.0;
  return table;
}

std::vector<EffectOrderShare> summarize_effects(const AnovaTable& table) {
  std::vector<EffectOrderShare> out;
  for (const auto& row : table.effects) {
    const int order = std::popcount(row.factors);
    if (out.empty() || out.back().order != order) out.push_back({order, 0.0});
    out.back().eta_squared += row.eta_squared;
  }
  out.push_back({0, table.residual.eta_squared});
  return out;
}

double f_p_value(double f, double df1, double df2) {
  if (!std::isfinite(df1) || !std::isfinite(df2) || !std::isfinite(f)) {
    throw std::invalid_argument("f_p_value: non-finite input");
  }
  if (df1 <= 0.0 || df2 <= 0.0) throw std::invalid_argument("f_p_value: degrees of freedom must be positive");
  if (f < 0.0) throw std::invalid_argument("f_p_value: F must be nonnegative");
  if (f == 0.0) return 1.0;
  const double x = df2 / (df2 + df1 * f);
  return boost::math::ibeta(df2 / 2.0, df1 / 2.0, x);
}

bool ci_contains(double r, double ci_lo, double ci_hi) noexcept { return ci_lo <= r && r <= ci_hi; }

std::string format_p(double p) {
  if (std::isnan(p)) return "";
  if (p < 0.001) return "< .001";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.3f", p);
  std::string s = buf;
  if (s.rfind("0.", 0) == 0) s.erase(0, 1);
  return s;
}

}  // namespace hrtsim
