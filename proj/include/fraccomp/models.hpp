#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fraccomp/detail/math.hpp"
#include "fraccomp/error.hpp"

namespace fraccomp {

/// The compliance-model zoo. A-E are the fractional structures, F is the
/// nine-parameter viscoelastic ladder, G is the integer-order Voigt cell.
enum class Model : char { A = 'A', B = 'B', C = 'C', D = 'D', E = 'E', F = 'F', G = 'G' };

inline constexpr std::array<Model, 7> kAllModels = {Model::A, Model::B, Model::C, Model::D,
                                                    Model::E, Model::F, Model::G};

inline char model_tag(Model m) { return static_cast<char>(m); }

inline Model model_from_tag(std::string_view tag) {
  if (tag.size() == 1) {
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(tag[0])));
    if (c >= 'A' && c <= 'G') return static_cast<Model>(c);
  }
  fail(errc::invalid_argument, "unknown model '" + std::string(tag) + "'");
}

struct ParamSpec {
  std::string name;
  std::string unit;
  double lower = 1e-8;
  double upper = 1e4;
  double init = 1.0;
  bool is_order = false;  // fractional differentiation order
};

struct ModelSpec {
  Model id;
  std::string description;
  std::vector<ParamSpec> params;
};

namespace detail {

inline constexpr double kMagLower = 1e-8;
inline constexpr double kMagUpper = 1e4;
inline constexpr double kAlphaInit = 0.8;
inline constexpr double kResistanceInit = 0.1;

inline ParamSpec mag(std::string name, std::string unit, double init) {
  return {std::move(name), std::move(unit), kMagLower, kMagUpper, init, false};
}
inline ParamSpec order(std::string name) {
  return {std::move(name), "-", 0.0, std::numeric_limits<double>::infinity(), kAlphaInit, true};
}

inline std::vector<ModelSpec> build_catalogue() {
  std::vector<ModelSpec> cat;
  cat.push_back({Model::A, "single fractional-order capacitor",
                 {mag("C_alpha", "l/mmHg/s^(1-alpha)", 1.0), order("alpha")}});
  cat.push_back({Model::B, "resistor in series with a FOC",
                 {mag("R", "mmHg.s/ml", kResistanceInit),
                  mag("C_alpha", "l/mmHg/s^(1-alpha)", 1.0), order("alpha")}});
  cat.push_back({Model::C, "static capacitor in series with a FOC (C_stat tied to C_alpha)",
                 {mag("C_alpha_stat", "l/mmHg", 1.0), order("alpha")}});
  cat.push_back({Model::D, "resistor, static capacitor and FOC in series (C_stat tied)",
                 {mag("R", "mmHg.s/ml", kResistanceInit),
                  mag("C_alpha_stat", "l/mmHg", 1.0), order("alpha")}});
  cat.push_back({Model::E, "resistor in parallel with series resistor + FOC",
                 {mag("R1", "mmHg.s/ml", kResistanceInit),
                  mag("R2", "mmHg.s/ml", kResistanceInit),
                  mag("C_alpha", "l/mmHg/s^(1-alpha)", 1.0), order("alpha")}});
  {
    ModelSpec f{Model::F, "four-branch viscoelastic ladder (Goedhard form)", {}};
    f.params.push_back(mag("C_stat", "l/mmHg", 1.0));
    // a_n / b_n pole-zero rates, log-spaced over [0.1, 100] rad/s at init
    for (int i = 0; i < 4; ++i)
      f.params.push_back(mag("a" + std::to_string(i + 1), "rad/s", std::pow(10.0, -1.0 + i)));
    for (int i = 0; i < 4; ++i)
      f.params.push_back(mag("b" + std::to_string(i + 1), "rad/s", std::pow(10.0, -1.0 + i)));
    cat.push_back(std::move(f));
  }
  cat.push_back({Model::G, "Voigt cell (resistor in series with an ideal capacitor)",
                 {mag("R", "mmHg.s/ml", kResistanceInit), mag("C", "l/mmHg", 1.0)}});
  return cat;
}

}  // namespace detail

inline const std::vector<ModelSpec>& model_catalogue() {
  static const std::vector<ModelSpec> cat = detail::build_catalogue();
  return cat;
}

inline const ModelSpec& model_spec(Model m) {
  return model_catalogue()[static_cast<std::size_t>(model_tag(m) - 'A')];
}

inline std::size_t parameter_count(Model m) { return model_spec(m).params.size(); }

/// Index of the fractional order within the parameter vector, -1 if the
/// model has none (F, G).
inline int alpha_index(Model m) {
  const auto& ps = model_spec(m).params;
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (ps[i].is_order) return static_cast<int>(i);
  return -1;
}

inline void validate_params(Model m, std::span<const double> theta) {
  const auto& spec = model_spec(m);
  if (theta.size() != spec.params.size())
    fail(errc::wrong_parameter_count, std::string("model ") + model_tag(m) + " takes " +
                                          std::to_string(spec.params.size()) + " parameters, got " +
                                          std::to_string(theta.size()));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const auto& p = spec.params[i];
    if (p.is_order) {
      if (!(theta[i] >= 0.0))
        fail(errc::non_positive_parameter, p.name + " must be >= 0");
    } else if (!(theta[i] > 0.0)) {
      fail(errc::non_positive_parameter, p.name + " must be > 0");
    }
  }
}

/// Closed-form complex compliance C_c(jw) of one model at one frequency.
/// Assumes validated parameters; s^a uses the principal branch w^a e^{j a pi/2}.
inline std::complex<double> evaluate_at(Model m, std::span<const double> t, double omega) {
  using detail::jw_pow;
  using cd = std::complex<double>;
  switch (m) {
    case Model::A:
      return t[0] * jw_pow(omega, t[1] - 1.0);
    case Model::B:
      return t[1] * jw_pow(omega, t[2] - 1.0) / (1.0 + t[0] * t[1] * jw_pow(omega, 1.0));
    case Model::C: {
      const double cs = t[0];  // C_stat tied equal to C_alpha
      const cd sa = jw_pow(omega, t[1]);
      const cd s1 = jw_pow(omega, 1.0);
      return (cs * cs * sa) / (cs * sa + cs * s1);
    }
    case Model::D: {
      const double r = t[0];
      const double cs = t[1];  // tied
      const double a = t[2];
      const cd sa = jw_pow(omega, a);
      const cd s1 = jw_pow(omega, 1.0);
      const cd sa1 = jw_pow(omega, a + 1.0);
      return (cs * cs * sa) / (cs * s1 + cs * sa + r * cs * cs * sa1);
    }
    case Model::E: {
      const double r1 = t[0], r2 = t[1], ca = t[2], a = t[3];
      return (1.0 + (r1 + r2) * ca * jw_pow(omega, a - 1.0)) /
             (r1 * (1.0 + r2 * ca * jw_pow(omega, a)));
    }
    case Model::F: {
      const cd jw(0.0, omega);
      cd num = t[0];
      cd den = 1.0;
      for (int n = 0; n < 4; ++n) {
        num *= t[1 + n] * (jw + t[5 + n]);
        den *= t[5 + n] * (jw + t[1 + n]);
      }
      return num / den;
    }
    case Model::G:
      return t[1] / (1.0 + t[0] * t[1] * jw_pow(omega, 1.0));
  }
  fail(errc::invalid_argument, "unreachable model tag");
}

inline std::vector<std::complex<double>> evaluate(Model m, std::span<const double> theta,
                                                  std::span<const double> omega) {
  validate_params(m, theta);
  std::vector<std::complex<double>> out(omega.size());
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (!(omega[i] > 0.0)) fail(errc::non_positive_frequency, "omega must be > 0 rad/s");
    out[i] = evaluate_at(m, theta, omega[i]);
  }
  return out;
}

/// Magnitude of C_c at a reference frequency, tagged with whether the
/// analytic w->0 limit of the structure is a finite nonzero compliance.
/// Limits that blow up or collapse to zero are both flagged divergent.
struct TotalComplianceEstimate {
  double magnitude_at_ref = 0.0;
  bool divergent = false;
  std::optional<double> limit;  // the analytic C_tot when finite
};

inline TotalComplianceEstimate total_compliance_estimate(Model m, std::span<const double> t,
                                                         double omega_ref) {
  validate_params(m, t);
  if (!(omega_ref > 0.0)) fail(errc::non_positive_frequency, "omega_ref must be > 0 rad/s");
  TotalComplianceEstimate e;
  e.magnitude_at_ref = std::abs(evaluate_at(m, t, omega_ref));
  switch (m) {
    case Model::A:
      if (t[1] == 1.0) e.limit = t[0];
      break;
    case Model::B:
      if (t[2] == 1.0) e.limit = t[1];
      break;
    case Model::C:
      // series FOC + capacitor: the slower pole dominates at DC
      if (t[1] < 1.0) e.limit = t[0];
      else if (t[1] == 1.0) e.limit = t[0] / 2.0;
      break;
    case Model::D:
      if (t[2] < 1.0) e.limit = t[1];
      else if (t[2] == 1.0) e.limit = t[1] / 2.0;
      break;
    case Model::E:
      if (t[3] > 1.0) e.limit = 1.0 / t[0];
      else if (t[3] == 1.0) e.limit = (1.0 + (t[0] + t[1]) * t[2]) / t[0];
      break;
    case Model::F:
      e.limit = t[0];
      break;
    case Model::G:
      e.limit = t[1];
      break;
  }
  e.divergent = !e.limit.has_value();
  return e;
}

struct BoundsAndInit {
  std::vector<double> lower, upper, init;
};

inline BoundsAndInit default_bounds_and_init(Model m) {
  BoundsAndInit b;
  for (const auto& p : model_spec(m).params) {
    b.lower.push_back(p.lower);
    b.upper.push_back(p.upper);
    b.init.push_back(p.init);
  }
  return b;
}

}  // namespace fraccomp
