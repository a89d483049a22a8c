#pragma once

#include <cmath>
#include <complex>

#include "fraccomp/detail/math.hpp"
#include "fraccomp/error.hpp"

namespace fraccomp {

/// Fractional-order capacitor (constant phase element).
/// c_alpha is the pseudo-capacitance in l/mmHg·s^(1-alpha); alpha interpolates
/// between a resistor (alpha = 0) and an ideal capacitor (alpha = 1). Values
/// above 1 are legal; fits on some model structures land there.
struct FocParams {
  double c_alpha = 1.0;
  double alpha = 1.0;
};

inline void validate(const FocParams& p) {
  if (!(p.c_alpha > 0.0))
    fail(errc::non_positive_parameter, "pseudo-capacitance must be > 0");
  if (!(p.alpha >= 0.0))
    fail(errc::non_positive_parameter, "fractional order must be >= 0");
}

namespace detail {
inline void require_positive_frequency(double omega) {
  if (!(omega > 0.0)) fail(errc::non_positive_frequency, "omega must be > 0 rad/s");
}
}  // namespace detail

/// Z = 1/(C_a (jw)^a) = (1/(C_a w^a)) (cos(phi) - j sin(phi)), phi = a*pi/2.
inline std::complex<double> foc_impedance(const FocParams& p, double omega) {
  validate(p);
  detail::require_positive_frequency(omega);
  const double phi = p.alpha * detail::pi / 2.0;
  const double mag = 1.0 / (p.c_alpha * std::pow(omega, p.alpha));
  return {mag * std::cos(phi), -mag * std::sin(phi)};
}

/// Conventional capacitance at a given frequency: C = C_a w^(a-1).
inline double capacitance_from_pseudo(const FocParams& p, double omega) {
  validate(p);
  detail::require_positive_frequency(omega);
  return p.c_alpha * std::pow(omega, p.alpha - 1.0);
}

/// Frequency-independent viscous-to-elastic ratio eta = -cot(a*pi/2).
/// Undefined where sin(a*pi/2) vanishes (alpha an even integer; tested with
/// a small tolerance because sin(pi) does not round to zero).
inline double hysteresivity(double alpha) {
  const double phi = alpha * detail::pi / 2.0;
  const double s = std::sin(phi);
  if (std::fabs(s) < 1e-12) fail(errc::undefined_hysteresivity, "sin(alpha*pi/2) = 0");
  return -std::cos(phi) / s;
}

/// Biorheological decomposition of the FOC impedance: tissue damping G_r
/// (real part) and elastance H_r (imaginary part, negative by convention).
struct TissueMechanics {
  double damping_g_r = 0.0;
  double elastance_h_r = 0.0;
  double hysteresivity_eta_r = 0.0;
  double phase_phi = 0.0;  // rad
};

inline TissueMechanics tissue_mechanics(const FocParams& p, double omega) {
  validate(p);
  detail::require_positive_frequency(omega);
  const double phi = p.alpha * detail::pi / 2.0;
  const double mag = 1.0 / (p.c_alpha * std::pow(omega, p.alpha));
  TissueMechanics t;
  t.phase_phi = phi;
  t.damping_g_r = mag * std::cos(phi);
  t.elastance_h_r = -mag * std::sin(phi);
  t.hysteresivity_eta_r = hysteresivity(p.alpha);
  return t;
}

}  // namespace fraccomp
