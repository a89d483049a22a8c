#pragma once

#include <stdexcept>
#include <string>

namespace fraccomp {

/// Error conditions raised by the library. Each value maps onto one of the
/// documented failure modes of the public operations.
enum class errc {
  // spectral
  empty_waveform,
  non_positive_sample_period,
  fmax_below_fundamental,
  spectra_mismatch,
  zero_flow_harmonic,
  zero_mean_flow,
  zero_impedance_harmonic,
  // foc / models
  non_positive_frequency,
  undefined_hysteresivity,
  wrong_parameter_count,
  non_positive_parameter,
  // fitting
  too_few_harmonics,
  zero_normalizer,
  // metrics
  length_mismatch,
  zero_data_modulus,
  non_positive_rmse,
  degenerate_sample_size,
  // analysis
  empty_input,
  degenerate_variance,
  missing_metadata,
  // population / io
  parse_error,
  inconsistent_wave_lengths,
  divergent_compliance,
  // generic misuse
  invalid_argument,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::empty_waveform: return "EmptyWaveform";
    case errc::non_positive_sample_period: return "NonPositiveSamplePeriod";
    case errc::fmax_below_fundamental: return "FmaxBelowFundamental";
    case errc::spectra_mismatch: return "SpectraMismatch";
    case errc::zero_flow_harmonic: return "ZeroFlowHarmonic";
    case errc::zero_mean_flow: return "ZeroMeanFlow";
    case errc::zero_impedance_harmonic: return "ZeroImpedanceHarmonic";
    case errc::non_positive_frequency: return "NonPositiveFrequency";
    case errc::undefined_hysteresivity: return "UndefinedHysteresivity";
    case errc::wrong_parameter_count: return "WrongParameterCount";
    case errc::non_positive_parameter: return "NonPositiveParameter";
    case errc::too_few_harmonics: return "TooFewHarmonics";
    case errc::zero_normalizer: return "ZeroNormalizer";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::zero_data_modulus: return "ZeroDataModulus";
    case errc::non_positive_rmse: return "NonPositiveRmse";
    case errc::degenerate_sample_size: return "DegenerateSampleSize";
    case errc::empty_input: return "EmptyInput";
    case errc::degenerate_variance: return "DegenerateVariance";
    case errc::missing_metadata: return "MissingMetadata";
    case errc::parse_error: return "ParseError";
    case errc::inconsistent_wave_lengths: return "InconsistentWaveLengths";
    case errc::divergent_compliance: return "DivergentCompliance";
    case errc::invalid_argument: return "InvalidArgument";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const noexcept { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

}  // namespace fraccomp
