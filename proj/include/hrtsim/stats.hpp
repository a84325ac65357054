#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hrtsim {

struct Correlation {
  double r = 0.0;
  double ci_lo = 0.0;  // 95% interval via Fisher z
  double ci_hi = 0.0;
  std::size_t n = 0;
};

/// Sample Pearson correlation. Throws std::invalid_argument on length mismatch
/// or n < 3, UndefinedStatistic when either input has zero variance.
Correlation pearson_r(std::span<const double> x, std::span<const double> y);

/// Average ranks, 1-based; ties share the mean of the positions they span.
std::vector<double> midranks(std::span<const double> v);

/// Pearson correlation of midranks.
double spearman_rho(std::span<const double> x, std::span<const double> y);

/// SS_between / SS_total over the pooled groups.
double eta_squared_oneway(const std::vector<std::vector<double>>& groups);

/// One response at one cell of a full-factorial design.
struct FactorialObservation {
  std::vector<int> levels;  // level index per factor, 0-based
  double response = 0.0;
};

struct AnovaRow {
  std::uint32_t factors = 0;  // bit i set when factor i takes part in the effect
  std::string label;          // e.g. "R x T"
  int df = 0;
  double ss = 0.0;
  double ms = 0.0;
  double f = 0.0;
  double p = 1.0;
  double eta_squared = 0.0;
};

struct AnovaTable {
  std::vector<std::string> factor_names;
  std::vector<AnovaRow> effects;  // main effects first, then by interaction order
  AnovaRow residual;
  double ss_total = 0.0;
  std::size_t n = 0;
};

/// Balanced full-factorial ANOVA over every nonempty factor subset.
/// `design[i]` is the number of levels of factor i; `names` labels the rows
/// (defaults to F0, F1, ...). Throws std::invalid_argument when the design is
/// unbalanced, has fewer than two replicates per cell or has a bad level index.
AnovaTable factorial_anova(const std::vector<FactorialObservation>& obs, const std::vector<int>& design,
                           std::vector<std::string> names = {});

/// Summed eta squared per interaction order (1 = main effects); the last entry is the residual share.
struct EffectOrderShare {
  int order = 0;  // 0 marks the residual
  double eta_squared = 0.0;
};
std::vector<EffectOrderShare> summarize_effects(const AnovaTable& table);

/// Upper tail P(F(df1, df2) > f). Throws std::invalid_argument on non-finite or negative input.
double f_p_value(double f, double df1, double df2);

/// Closed interval test.
bool ci_contains(double r, double ci_lo, double ci_hi) noexcept;

/// APA-style p: "< .001" below a thousandth, otherwise three decimals without the leading zero.
std::string format_p(double p);

}  // namespace hrtsim
