#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fraccomp/detail/math.hpp"
#include "fraccomp/error.hpp"
#include "fraccomp/foc.hpp"
#include "fraccomp/population.hpp"

namespace fraccomp {

inline constexpr double kDefaultPressureBinMmHg = 5.0;
inline constexpr double kDefaultPwvBinMs = 0.5;

struct BinnedSeries {
  std::vector<double> centers;
  std::vector<double> means;
  std::vector<std::size_t> counts;
};

/// Contiguous fixed-width bins anchored at min(x); empty bins are skipped,
/// single-sample bins kept.
inline BinnedSeries bin_average(std::span<const double> x, std::span<const double> y,
                                double bin_width) {
  if (x.size() != y.size()) fail(errc::length_mismatch, "x and y lengths differ");
  if (x.empty()) fail(errc::empty_input, "nothing to bin");
  if (!(bin_width > 0.0)) fail(errc::invalid_argument, "bin width must be > 0");
  const double x_min = *std::min_element(x.begin(), x.end());
  const double x_max = *std::max_element(x.begin(), x.end());
  const std::size_t n_bins =
      static_cast<std::size_t>(std::floor((x_max - x_min) / bin_width)) + 1;
  std::vector<double> sums(n_bins, 0.0);
  std::vector<std::size_t> counts(n_bins, 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::size_t b = static_cast<std::size_t>(std::floor((x[i] - x_min) / bin_width));
    if (b >= n_bins) b = n_bins - 1;
    sums[b] += y[i];
    ++counts[b];
  }
  BinnedSeries out;
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (counts[b] == 0) continue;
    out.centers.push_back(x_min + (static_cast<double>(b) + 0.5) * bin_width);
    out.means.push_back(sums[b] / static_cast<double>(counts[b]));
    out.counts.push_back(counts[b]);
  }
  return out;
}

struct PearsonCi {
  double r = 0.0;
  double ci_low = -1.0;
  double ci_high = 1.0;
};

/// Sample Pearson correlation with a Fisher-z confidence interval.
/// |r| = 1 collapses the interval; n = 3 widens it to (-1, 1).
inline PearsonCi pearson_with_ci(std::span<const double> x, std::span<const double> y,
                                 double confidence = 0.95) {
  if (x.size() != y.size()) fail(errc::length_mismatch, "x and y lengths differ");
  if (x.size() < 3) fail(errc::invalid_argument, "need at least 3 points");
  if (!(confidence > 0.0 && confidence < 1.0))
    fail(errc::invalid_argument, "confidence must lie in (0, 1)");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    fail(errc::degenerate_variance, "zero variance in x or y");
  PearsonCi out;
  out.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double z = std::atanh(out.r);
  const double se = 1.0 / std::sqrt(n - 3.0);  // +inf at n == 3
  const double q = detail::normal_quantile(0.5 + confidence / 2.0);
  out.ci_low = std::tanh(z - q * se);
  out.ci_high = std::tanh(z + q * se);
  return out;
}

enum class Determinant { sbp, dbp, app, mbp, pwv_a, pwv_cf };
enum class FracParameter { alpha, eta_r };

inline constexpr std::array<Determinant, 6> kAllDeterminants = {
    Determinant::sbp, Determinant::dbp, Determinant::app,
    Determinant::mbp, Determinant::pwv_a, Determinant::pwv_cf};

inline const char* determinant_name(Determinant d) {
  switch (d) {
    case Determinant::sbp: return "sbp";
    case Determinant::dbp: return "dbp";
    case Determinant::app: return "app";
    case Determinant::mbp: return "mbp";
    case Determinant::pwv_a: return "pwv_a";
    case Determinant::pwv_cf: return "pwv_cf";
  }
  return "?";
}

inline const char* frac_parameter_name(FracParameter p) {
  return p == FracParameter::alpha ? "alpha" : "eta_r";
}

inline bool is_pwv(Determinant d) {
  return d == Determinant::pwv_a || d == Determinant::pwv_cf;
}

inline std::optional<double> determinant_value(const SubjectMeta& m, Determinant d) {
  switch (d) {
    case Determinant::sbp: return m.sbp;
    case Determinant::dbp: return m.dbp;
    case Determinant::app: return m.app;
    case Determinant::mbp: return m.mbp;
    case Determinant::pwv_a: return m.pwv_a;
    case Determinant::pwv_cf: return m.pwv_cf;
  }
  return std::nullopt;
}

struct CorrelationRow {
  Model model = Model::A;
  FracParameter parameter = FracParameter::alpha;
  Determinant determinant = Determinant::sbp;
  double bin_width = 0.0;
  double r = 0.0, ci_low = -1.0, ci_high = 1.0;
  std::size_t n_bins = 0;
};

struct CorrelationOptions {
  double bin_mmhg = kDefaultPressureBinMmHg;
  double bin_pwv = kDefaultPwvBinMs;
  double confidence = 0.95;
  bool raw_subjects = false;  // correlate raw pairs instead of binned means
};

/// Binned correlation of fractional estimates against hemodynamic indices:
/// one row per (model with an alpha, parameter, determinant) that has enough
/// populated bins. eta_r is derived from the fitted alpha. Skipped rows leave
/// a note in `diagnostics`.
inline std::vector<CorrelationRow> correlation_table(const BatchResults& batch,
                                                     std::span<const SubjectRecord> subjects,
                                                     const CorrelationOptions& opt = {},
                                                     std::vector<std::string>* diagnostics = nullptr) {
  const auto note = [&](const std::string& s) {
    if (diagnostics) diagnostics->push_back(s);
  };
  std::vector<CorrelationRow> out;
  for (Model m : batch.models) {
    const int ai = alpha_index(m);
    if (ai < 0) continue;  // integer-order structures carry no fractional order
    for (FracParameter par : {FracParameter::alpha, FracParameter::eta_r}) {
      for (Determinant det : kAllDeterminants) {
        std::vector<double> xs, ys;
        std::size_t missing = 0;
        for (const auto& row : batch.rows) {
          if (row.model != m || !row.ok()) continue;
          const auto dv = determinant_value(subjects[row.subject_index].meta, det);
          if (!dv) {
            ++missing;
            continue;
          }
          const double alpha = row.result->theta_hat[static_cast<std::size_t>(ai)];
          double value = alpha;
          if (par == FracParameter::eta_r) {
            try {
              value = hysteresivity(alpha);
            } catch (const Error&) {
              continue;  // alpha landed on an even integer; eta undefined there
            }
          }
          xs.push_back(*dv);
          ys.push_back(value);
        }
        if (missing)
          note(std::string("model ") + model_tag(m) + " " + frac_parameter_name(par) + " vs " +
               determinant_name(det) + ": " + std::to_string(missing) +
               " subjects missing metadata");
        if (xs.empty()) continue;
        CorrelationRow row;
        row.model = m;
        row.parameter = par;
        row.determinant = det;
        row.bin_width = is_pwv(det) ? opt.bin_pwv : opt.bin_mmhg;
        try {
          if (opt.raw_subjects) {
            const auto p = pearson_with_ci(xs, ys, opt.confidence);
            row.r = p.r;
            row.ci_low = p.ci_low;
            row.ci_high = p.ci_high;
            row.n_bins = xs.size();
          } else {
            const BinnedSeries b = bin_average(xs, ys, row.bin_width);
            if (b.centers.size() < 3) {
              note(std::string("model ") + model_tag(m) + " " + frac_parameter_name(par) +
                   " vs " + determinant_name(det) + ": only " +
                   std::to_string(b.centers.size()) + " populated bins, row omitted");
              continue;
            }
            const auto p = pearson_with_ci(b.centers, b.means, opt.confidence);
            row.r = p.r;
            row.ci_low = p.ci_low;
            row.ci_high = p.ci_high;
            row.n_bins = b.centers.size();
          }
        } catch (const Error& e) {
          note(std::string("model ") + model_tag(m) + " " + frac_parameter_name(par) + " vs " +
               determinant_name(det) + ": " + e.what());
          continue;
        }
        out.push_back(row);
      }
    }
  }
  return out;
}

}  // namespace fraccomp
