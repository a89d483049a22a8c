#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>

#include "fraccomp/error.hpp"

namespace fraccomp {

/// Corrected Akaike criterion on the fit RMSE:
/// AIC_c = -2 ln(RMSE) + 2 P N_s / (N_s - P - 1).
/// Note the convention: a smaller RMSE makes the first term larger, so the
/// most parsimonious model, not the best-fitting one, minimizes AIC_c.
inline double aicc(double rmse, std::size_t p, std::size_t n_s) {
  if (!(rmse > 0.0)) fail(errc::non_positive_rmse, "rmse must be > 0");
  if (n_s <= p + 1)
    fail(errc::degenerate_sample_size, "need n_s > p + 1 harmonics for the AICc correction");
  return -2.0 * std::log(rmse) +
         2.0 * static_cast<double>(p) * static_cast<double>(n_s) /
             (static_cast<double>(n_s) - static_cast<double>(p) - 1.0);
}

/// Signed mean relative modulus error, in percent:
/// mean_i (|model_i| - |data_i|) / |data_i| * 100.
inline double deviation_pct(std::span<const std::complex<double>> model,
                            std::span<const std::complex<double>> data) {
  if (model.size() != data.size())
    fail(errc::length_mismatch, "model and data lengths differ");
  if (data.empty()) fail(errc::length_mismatch, "need at least one harmonic");
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double d = std::abs(data[i]);
    if (!(d > 0.0)) fail(errc::zero_data_modulus, "data modulus is zero at harmonic " + std::to_string(i + 1));
    sum += (std::abs(model[i]) - d) / d;
  }
  return sum / static_cast<double>(data.size()) * 100.0;
}

/// Mean of |D_i|; the nonnegative companion figure reported next to the
/// signed Deviation.
inline double mean_abs_deviation_pct(std::span<const std::complex<double>> model,
                                     std::span<const std::complex<double>> data) {
  if (model.size() != data.size())
    fail(errc::length_mismatch, "model and data lengths differ");
  if (data.empty()) fail(errc::length_mismatch, "need at least one harmonic");
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double d = std::abs(data[i]);
    if (!(d > 0.0)) fail(errc::zero_data_modulus, "data modulus is zero at harmonic " + std::to_string(i + 1));
    sum += std::fabs(std::abs(model[i]) - d) / d;
  }
  return sum / static_cast<double>(data.size()) * 100.0;
}

}  // namespace fraccomp
