#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "fraccomp/detail/math.hpp"
#include "fraccomp/error.hpp"

namespace fraccomp {

inline constexpr double kDefaultFmaxHz = 12.0;

/// Flow harmonics whose magnitude falls below this fraction of the largest
/// flow harmonic are treated as unexcited and dropped from the impedance.
inline constexpr double kZeroFlowRelTol = 1e-12;

enum class SignalKind { pressure, flow };

/// One cardiac cycle of a sampled periodic signal. Pressure in mmHg,
/// flow in ml/s; periodic extension is assumed.
struct Waveform {
  std::vector<double> samples;
  double sample_period = 0.0;  // s
  SignalKind kind = SignalKind::pressure;

  double duration() const { return static_cast<double>(samples.size()) * sample_period; }
  double fundamental_hz() const { return 1.0 / duration(); }
};

inline void validate(const Waveform& w) {
  if (w.samples.empty()) fail(errc::empty_waveform, "waveform has no samples");
  if (!(w.sample_period > 0.0))
    fail(errc::non_positive_sample_period, "sample period must be > 0 s");
}

/// One-sided harmonic coefficients of a real periodic signal.
/// coefficients[0] is the DC term (purely real); coefficient k reconstructs
/// the signal as mean + sum_k 2 Re(c_k e^{j k w0 t}).
struct HarmonicSpectrum {
  double fundamental_hz = 0.0;
  std::vector<std::complex<double>> coefficients;
  SignalKind kind = SignalKind::pressure;

  std::size_t harmonic_count() const {
    return coefficients.empty() ? 0 : coefficients.size() - 1;
  }
};

/// Discrete Fourier analysis of one cycle, truncated at f_max (and at the
/// Nyquist limit of the sampling). Accumulates in extended precision; the
/// phase index is reduced mod N so large k*n products do not lose accuracy.
inline HarmonicSpectrum compute_spectrum(const Waveform& w, double f_max = kDefaultFmaxHz) {
  validate(w);
  const std::size_t n = w.samples.size();
  const double f0 = w.fundamental_hz();
  if (!(f_max > f0))
    fail(errc::fmax_below_fundamental, "f_max must exceed the fundamental " + std::to_string(f0) + " Hz");

  std::size_t k_max = static_cast<std::size_t>(std::floor(f_max / f0 + 1e-9));
  k_max = std::min(k_max, (n - 1) / 2);

  HarmonicSpectrum s;
  s.fundamental_hz = f0;
  s.kind = w.kind;
  s.coefficients.resize(k_max + 1);

  const long double step = 2.0L * std::numbers::pi_v<long double> / static_cast<long double>(n);
  for (std::size_t k = 0; k <= k_max; ++k) {
    long double re = 0.0L, im = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      const long double ang = step * static_cast<long double>((k * i) % n);
      const long double x = w.samples[i];
      re += x * std::cos(ang);
      im -= x * std::sin(ang);
    }
    s.coefficients[k] = {static_cast<double>(re / n), static_cast<double>(im / n)};
  }
  return s;
}

/// Inverse synthesis of one cycle from the retained harmonics.
inline std::vector<double> synthesize_cycle(const HarmonicSpectrum& s, std::size_t n_samples) {
  if (s.coefficients.empty()) fail(errc::empty_input, "spectrum has no coefficients");
  if (n_samples == 0) fail(errc::invalid_argument, "n_samples must be > 0");
  std::vector<double> out(n_samples);
  const long double step = 2.0L * std::numbers::pi_v<long double> / static_cast<long double>(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    long double v = s.coefficients[0].real();
    for (std::size_t k = 1; k < s.coefficients.size(); ++k) {
      const long double ang = step * static_cast<long double>((k * i) % n_samples);
      v += 2.0L * (s.coefficients[k].real() * std::cos(ang) - s.coefficients[k].imag() * std::sin(ang));
    }
    out[i] = static_cast<double>(v);
  }
  return out;
}

/// Complex aortic input impedance per excited harmonic, Z = P_k / Q_k.
/// The DC ratio (mean pressure over mean flow) is carried separately.
struct ImpedanceSpectrum {
  std::vector<double> angular_frequencies;  // rad/s, ascending
  std::vector<std::complex<double>> values; // mmHg·s/ml
  double dc_ratio = std::numeric_limits<double>::quiet_NaN();
  std::size_t dropped_harmonics = 0;        // near-zero flow harmonics removed
};

inline ImpedanceSpectrum input_impedance(const HarmonicSpectrum& p, const HarmonicSpectrum& q) {
  if (p.coefficients.size() != q.coefficients.size())
    fail(errc::spectra_mismatch, "spectra retain different harmonic counts");
  const double f0 = p.fundamental_hz;
  if (!(std::fabs(f0 - q.fundamental_hz) <= 1e-9 * std::fabs(f0)))
    fail(errc::spectra_mismatch, "spectra have different fundamentals");
  if (p.coefficients.empty()) fail(errc::spectra_mismatch, "empty spectra");

  const std::size_t k_count = p.coefficients.size() - 1;
  // scale reference includes DC, so waveforms with no real oscillation drop
  // every harmonic instead of dividing by rounding noise
  double q_max = 0.0;
  for (std::size_t k = 0; k <= k_count; ++k) q_max = std::max(q_max, std::abs(q.coefficients[k]));

  ImpedanceSpectrum z;
  if (std::abs(q.coefficients[0]) > 0.0)
    z.dc_ratio = p.coefficients[0].real() / q.coefficients[0].real();
  for (std::size_t k = 1; k <= k_count; ++k) {
    if (std::abs(q.coefficients[k]) < kZeroFlowRelTol * q_max || q_max == 0.0) {
      ++z.dropped_harmonics;
      continue;
    }
    z.angular_frequencies.push_back(2.0 * detail::pi * f0 * static_cast<double>(k));
    z.values.push_back(p.coefficients[k] / q.coefficients[k]);
  }
  if (z.values.empty() && k_count > 0)
    fail(errc::zero_flow_harmonic, "all harmonics have (near-)zero flow; impedance undefined");
  return z;
}

/// Mean pressure over mean flow, the constant stand-in for the total
/// peripheral resistance.
inline double apparent_resistance(const HarmonicSpectrum& p, const HarmonicSpectrum& q) {
  if (p.coefficients.empty() || q.coefficients.empty())
    fail(errc::spectra_mismatch, "empty spectra");
  const double q0 = q.coefficients[0].real();
  if (!(std::fabs(q0) > 0.0)) fail(errc::zero_mean_flow, "mean flow is zero");
  return p.coefficients[0].real() / q0;
}

/// Measured apparent compliance C_app at the excited harmonics (DC excluded).
struct MeasuredCompliance {
  std::vector<double> angular_frequencies;  // rad/s, strictly increasing, > 0
  std::vector<std::complex<double>> values; // l/mmHg
  double r_app = 0.0;                       // mmHg·s/ml
  std::size_t n_s = 0;
};

inline void validate(const MeasuredCompliance& m) {
  if (m.values.size() != m.angular_frequencies.size() || m.n_s != m.values.size())
    fail(errc::length_mismatch, "compliance arrays disagree in length");
  double prev = 0.0;
  for (double w : m.angular_frequencies) {
    if (!(w > prev)) fail(errc::invalid_argument, "angular frequencies must be strictly increasing and > 0");
    prev = w;
  }
}

/// C_app = (R_app - Z_in) / (j w R_app Z_in), evaluated per harmonic.
inline MeasuredCompliance apparent_compliance(const std::vector<std::complex<double>>& z_in,
                                              double r_app,
                                              const std::vector<double>& omega) {
  if (z_in.size() != omega.size())
    fail(errc::length_mismatch, "impedance and frequency arrays disagree in length");
  if (!(r_app > 0.0)) fail(errc::invalid_argument, "r_app must be > 0");
  MeasuredCompliance m;
  m.r_app = r_app;
  m.angular_frequencies = omega;
  m.values.resize(z_in.size());
  for (std::size_t i = 0; i < z_in.size(); ++i) {
    if (!(omega[i] > 0.0)) fail(errc::non_positive_frequency, "omega must be > 0 rad/s");
    if (!(std::abs(z_in[i]) > 0.0))
      fail(errc::zero_impedance_harmonic, "zero impedance at harmonic " + std::to_string(i + 1));
    const std::complex<double> jw(0.0, omega[i]);
    m.values[i] = (r_app - z_in[i]) / (jw * r_app * z_in[i]);
  }
  m.n_s = m.values.size();
  return m;
}

inline MeasuredCompliance apparent_compliance(const ImpedanceSpectrum& z, double r_app) {
  return apparent_compliance(z.values, r_app, z.angular_frequencies);
}

/// Full measurement front end: spectra, R_app, Z_in, C_app.
inline MeasuredCompliance measured_compliance(const Waveform& pressure, const Waveform& flow,
                                              double f_max = kDefaultFmaxHz) {
  if (pressure.kind != SignalKind::pressure || flow.kind != SignalKind::flow)
    fail(errc::invalid_argument, "expected a pressure waveform and a flow waveform");
  const HarmonicSpectrum p = compute_spectrum(pressure, f_max);
  const HarmonicSpectrum q = compute_spectrum(flow, f_max);
  const double r_app = apparent_resistance(p, q);
  const ImpedanceSpectrum z = input_impedance(p, q);
  return apparent_compliance(z, r_app);
}

}  // namespace fraccomp
