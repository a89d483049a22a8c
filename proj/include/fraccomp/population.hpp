#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "fraccomp/detail/math.hpp"
#include "fraccomp/error.hpp"
#include "fraccomp/fitting.hpp"
#include "fraccomp/models.hpp"
#include "fraccomp/spectral.hpp"

namespace fraccomp {

struct SubjectMeta {
  std::optional<double> age_group;   // years
  std::optional<double> heart_rate;  // bpm
  std::optional<double> sbp, dbp, mbp, app;  // mmHg
  std::optional<double> pwv_a, pwv_cf;       // m/s
};

struct SubjectRecord {
  std::string id;
  Waveform pressure;
  Waveform flow;
  SubjectMeta meta;
};

inline void validate(const SubjectRecord& s) {
  validate(s.pressure);
  validate(s.flow);
  if (s.pressure.samples.size() != s.flow.samples.size() ||
      s.pressure.sample_period != s.flow.sample_period)
    fail(errc::inconsistent_wave_lengths,
         "subject '" + s.id + "': pressure and flow must share length and sample period");
}

// ---------------------------------------------------------------------------
// Synthetic ground-truth generation
// ---------------------------------------------------------------------------

/// Recipe for a ground-truth subject: a prescribed flow spectrum plus a
/// compliance model. The pressure spectrum follows from inverting
/// C_app = (R_app - Z_in)/(jw R_app Z_in), i.e. Z_in = R_app/(1 + jw R_app C).
struct SyntheticSpec {
  Model model = Model::A;
  std::vector<double> theta;
  double r_app = 1.0;           // mmHg·s/ml
  double heart_rate_bpm = 60.0;
  std::vector<std::complex<double>> flow_harmonics;  // [0] = DC (ml/s), real > 0
  std::size_t samples_per_cycle = 512;
};

/// Analytic harmonic coefficients of a half-sine ejection profile occupying
/// systole_fraction of the cycle, scaled to the given peak flow. Exact zeros
/// occur where k * systole_fraction hits m + 1/2; downstream code drops them.
inline std::vector<std::complex<double>> half_sine_flow_spectrum(double peak_ml_s,
                                                                 double systole_fraction,
                                                                 std::size_t n_harmonics) {
  if (!(peak_ml_s > 0.0)) fail(errc::invalid_argument, "peak flow must be > 0");
  if (!(systole_fraction > 0.0 && systole_fraction < 1.0))
    fail(errc::invalid_argument, "systole fraction must lie in (0, 1)");
  std::vector<std::complex<double>> c(n_harmonics + 1);
  const double d = systole_fraction;
  c[0] = 2.0 * peak_ml_s * d / detail::pi;
  for (std::size_t k = 1; k <= n_harmonics; ++k) {
    const double x = 2.0 * static_cast<double>(k) * d;  // b*tau / pi
    if (std::fabs(x - 1.0) < 1e-12) {
      c[k] = std::complex<double>(0.0, -peak_ml_s * d / 2.0);
      continue;
    }
    // (1/T) * integral of sin(pi t / tau) e^{-j 2 pi k t / T} over systole
    const std::complex<double> e = std::polar(1.0, -detail::pi * x);
    c[k] = peak_ml_s * d / detail::pi * (1.0 + e) / (1.0 - x * x);
  }
  return c;
}

inline SubjectRecord synthesize_subject(const SyntheticSpec& spec, std::string id = "synth") {
  validate_params(spec.model, spec.theta);
  if (spec.samples_per_cycle < 64)
    fail(errc::invalid_argument, "samples_per_cycle must be >= 64");
  if (spec.flow_harmonics.empty() || !(spec.flow_harmonics[0].real() > 0.0) ||
      spec.flow_harmonics[0].imag() != 0.0)
    fail(errc::invalid_argument, "flow spectrum needs a positive real DC component");
  if (!(spec.heart_rate_bpm > 0.0)) fail(errc::invalid_argument, "heart rate must be > 0");
  if (!(spec.r_app > 0.0)) fail(errc::invalid_argument, "r_app must be > 0");
  const std::size_t n = spec.samples_per_cycle;
  const std::size_t k_count = spec.flow_harmonics.size() - 1;
  if (k_count > (n - 1) / 2)
    fail(errc::invalid_argument, "flow spectrum exceeds the Nyquist limit of samples_per_cycle");

  const double f0 = spec.heart_rate_bpm / 60.0;

  HarmonicSpectrum qs;
  qs.fundamental_hz = f0;
  qs.kind = SignalKind::flow;
  qs.coefficients = spec.flow_harmonics;

  HarmonicSpectrum ps;
  ps.fundamental_hz = f0;
  ps.kind = SignalKind::pressure;
  ps.coefficients.resize(k_count + 1);
  ps.coefficients[0] = spec.r_app * spec.flow_harmonics[0].real();
  for (std::size_t k = 1; k <= k_count; ++k) {
    const double w = 2.0 * detail::pi * f0 * static_cast<double>(k);
    const std::complex<double> c = evaluate_at(spec.model, spec.theta, w);
    const std::complex<double> z =
        spec.r_app / (1.0 + std::complex<double>(0.0, w) * spec.r_app * c);
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()) ||
        !std::isfinite(z.real()) || !std::isfinite(z.imag()))
      fail(errc::divergent_compliance,
           "model compliance not finite at harmonic " + std::to_string(k));
    ps.coefficients[k] = z * spec.flow_harmonics[k];
  }

  SubjectRecord s;
  s.id = std::move(id);
  const double dt = 1.0 / (f0 * static_cast<double>(n));
  s.pressure = {synthesize_cycle(ps, n), dt, SignalKind::pressure};
  s.flow = {synthesize_cycle(qs, n), dt, SignalKind::flow};
  s.meta.heart_rate = spec.heart_rate_bpm;
  const auto [mn, mx] = std::minmax_element(s.pressure.samples.begin(), s.pressure.samples.end());
  double mean = 0.0;
  for (double v : s.pressure.samples) mean += v;
  mean /= static_cast<double>(n);
  s.meta.sbp = *mx;
  s.meta.dbp = *mn;
  s.meta.app = *mx - *mn;
  s.meta.mbp = mean;
  return s;
}

// ---------------------------------------------------------------------------
// Subject CSV ingestion / export
// ---------------------------------------------------------------------------
// Header: id,age_group,heart_rate,sbp,dbp,mbp,app,pwv_a,pwv_cf,sample_period,pressure,flow
// Waveforms are ';'-joined numeric lists inside a single cell. Metadata cells
// may be empty; metadata columns may be missing entirely. Lines starting with
// '#' are provenance comments.

namespace detail {

inline double parse_double_cell(std::string_view cell, std::size_t row, std::size_t col) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || p != last)
    fail(errc::parse_error, "row " + std::to_string(row) + ", column " + std::to_string(col + 1) +
                                ": bad number '" + std::string(cell) + "'");
  return v;
}

inline std::vector<double> parse_wave_cell(std::string_view cell, std::size_t row, std::size_t col) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= cell.size()) {
    std::size_t next = cell.find(';', pos);
    if (next == std::string_view::npos) next = cell.size();
    const std::string_view tok = cell.substr(pos, next - pos);
    if (!tok.empty()) out.push_back(parse_double_cell(tok, row, col));
    pos = next + 1;
    if (next == cell.size()) break;
  }
  return out;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = line.find(',', pos);
    if (next == std::string_view::npos) {
      cells.push_back(line.substr(pos));
      break;
    }
    cells.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
  return cells;
}

inline std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string opt_cell(const std::optional<double>& v) {
  return v ? g17(*v) : std::string();
}

}  // namespace detail

inline std::vector<SubjectRecord> load_subjects_csv(std::istream& in) {
  std::string line;
  std::size_t row = 0;

  // header
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    for (auto c : detail::split_csv_line(line)) header.emplace_back(c);
    break;
  }
  if (header.empty()) fail(errc::parse_error, "missing header row");

  auto col_of = [&](std::string_view name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  };
  const int c_id = col_of("id"), c_dt = col_of("sample_period");
  const int c_p = col_of("pressure"), c_q = col_of("flow");
  if (c_id < 0 || c_dt < 0 || c_p < 0 || c_q < 0)
    fail(errc::parse_error, "header must contain id, sample_period, pressure and flow columns");
  const int c_age = col_of("age_group"), c_hr = col_of("heart_rate");
  const int c_sbp = col_of("sbp"), c_dbp = col_of("dbp"), c_mbp = col_of("mbp");
  const int c_app = col_of("app"), c_pwva = col_of("pwv_a"), c_pwvcf = col_of("pwv_cf");

  std::vector<SubjectRecord> subjects;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      fail(errc::parse_error, "row " + std::to_string(row) + ": expected " +
                                  std::to_string(header.size()) + " cells, got " +
                                  std::to_string(cells.size()));
    auto opt_at = [&](int c) -> std::optional<double> {
      if (c < 0 || cells[c].empty()) return std::nullopt;
      return detail::parse_double_cell(cells[c], row, static_cast<std::size_t>(c));
    };
    SubjectRecord s;
    s.id = std::string(cells[c_id]);
    const double dt = detail::parse_double_cell(cells[c_dt], row, c_dt);
    s.pressure = {detail::parse_wave_cell(cells[c_p], row, c_p), dt, SignalKind::pressure};
    s.flow = {detail::parse_wave_cell(cells[c_q], row, c_q), dt, SignalKind::flow};
    s.meta.age_group = opt_at(c_age);
    s.meta.heart_rate = opt_at(c_hr);
    s.meta.sbp = opt_at(c_sbp);
    s.meta.dbp = opt_at(c_dbp);
    s.meta.mbp = opt_at(c_mbp);
    s.meta.app = opt_at(c_app);
    s.meta.pwv_a = opt_at(c_pwva);
    s.meta.pwv_cf = opt_at(c_pwvcf);
    try {
      validate(s);
    } catch (const Error& e) {
      fail(e.code(), "row " + std::to_string(row) + ": " + e.what());
    }
    subjects.push_back(std::move(s));
  }
  return subjects;
}

inline std::vector<SubjectRecord> load_subjects_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::parse_error, "cannot open '" + path + "'");
  return load_subjects_csv(in);
}

inline void save_subjects_csv(std::ostream& out, std::span<const SubjectRecord> subjects,
                              const std::string& provenance = "") {
  if (!provenance.empty()) out << provenance;
  out << "id,age_group,heart_rate,sbp,dbp,mbp,app,pwv_a,pwv_cf,sample_period,pressure,flow\n";
  for (const auto& s : subjects) {
    out << s.id << ',' << detail::opt_cell(s.meta.age_group) << ','
        << detail::opt_cell(s.meta.heart_rate) << ',' << detail::opt_cell(s.meta.sbp) << ','
        << detail::opt_cell(s.meta.dbp) << ',' << detail::opt_cell(s.meta.mbp) << ','
        << detail::opt_cell(s.meta.app) << ',' << detail::opt_cell(s.meta.pwv_a) << ','
        << detail::opt_cell(s.meta.pwv_cf) << ',' << detail::g17(s.pressure.sample_period) << ',';
    for (std::size_t i = 0; i < s.pressure.samples.size(); ++i)
      out << (i ? ";" : "") << detail::g17(s.pressure.samples[i]);
    out << ',';
    for (std::size_t i = 0; i < s.flow.samples.size(); ++i)
      out << (i ? ";" : "") << detail::g17(s.flow.samples[i]);
    out << '\n';
  }
}

inline void save_subjects_csv(const std::string& path, std::span<const SubjectRecord> subjects,
                              const std::string& provenance = "") {
  std::ofstream out(path);
  if (!out) fail(errc::parse_error, "cannot open '" + path + "' for writing");
  save_subjects_csv(out, subjects, provenance);
}

// ---------------------------------------------------------------------------
// Cohort batch runs
// ---------------------------------------------------------------------------

struct SubjectModelRow {
  std::size_t subject_index = 0;
  std::string subject_id;
  Model model = Model::A;
  std::optional<FitResult> result;
  std::string error;
  double r_app = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_s = 0;
  bool ok() const { return result.has_value(); }
};

struct BatchOptions {
  double f_max = kDefaultFmaxHz;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct BatchResults {
  std::vector<Model> models;
  std::vector<SubjectModelRow> rows;  // subjects-major, models in given order
};

/// Runs the full identification pipeline per subject and model.
/// Work is distributed over subjects; every fit draws its randomness from a
/// seed mixed from (cfg.seed, subject id), so results do not depend on
/// scheduling, subject order or thread count.
inline BatchResults batch_fit(std::span<const SubjectRecord> subjects,
                              const std::vector<Model>& models, const FitConfig& cfg = {},
                              const BatchOptions& opt = {}) {
  if (subjects.empty() || models.empty())
    fail(errc::empty_input, "need at least one subject and one model");
  BatchResults out;
  out.models = models;
  out.rows.resize(subjects.size() * models.size());

  const auto run_subject = [&](std::size_t si) {
    const SubjectRecord& s = subjects[si];
    FitConfig sub_cfg = cfg;
    sub_cfg.seed = detail::mix_seed(cfg.seed, s.id);
    SubjectModelRow* rows = &out.rows[si * models.size()];
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      rows[mi].subject_index = si;
      rows[mi].subject_id = s.id;
      rows[mi].model = models[mi];
    }
    MeasuredCompliance data;
    try {
      validate(s);
      data = measured_compliance(s.pressure, s.flow, opt.f_max);
    } catch (const Error& e) {
      for (std::size_t mi = 0; mi < models.size(); ++mi) rows[mi].error = e.what();
      return;
    }
    auto outcomes = fit_models(data, models, sub_cfg);
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      rows[mi].r_app = data.r_app;
      rows[mi].n_s = data.n_s;
      rows[mi].result = std::move(outcomes[mi].result);
      rows[mi].error = std::move(outcomes[mi].error);
    }
  };

  unsigned n_threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(subjects.size()));
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < subjects.size(); ++i) run_subject(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < subjects.size(); i = next.fetch_add(1))
          run_subject(i);
      });
    for (auto& th : pool) th.join();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Group aggregates (age group x heart rate)
// ---------------------------------------------------------------------------

struct GroupStats {
  std::optional<double> age_group;
  std::optional<double> heart_rate;
  Model model = Model::A;
  std::size_t n = 0;  // successful fits aggregated
  double rmse_mean = 0, rmse_std = 0;
  double deviation_mean = 0, deviation_std = 0;
  double aicc_mean = 0, aicc_std = 0;
  std::vector<double> theta_mean, theta_std;
};

/// Mean and sample standard deviation of the fit metrics and parameter
/// estimates per (age group, heart rate) cell; subjects lacking either key
/// fall into a single unkeyed group.
inline std::vector<GroupStats> aggregate_groups(const BatchResults& batch,
                                                std::span<const SubjectRecord> subjects) {
  using Key = std::pair<double, double>;
  constexpr double kNoKey = std::numeric_limits<double>::lowest();
  std::map<Key, std::map<Model, std::vector<const SubjectModelRow*>>> cells;
  for (const auto& row : batch.rows) {
    if (!row.ok()) continue;
    const auto& meta = subjects[row.subject_index].meta;
    Key key{kNoKey, kNoKey};
    if (meta.age_group && meta.heart_rate) key = {*meta.age_group, *meta.heart_rate};
    cells[key][row.model].push_back(&row);
  }
  std::vector<GroupStats> out;
  for (const auto& [key, per_model] : cells) {
    for (Model m : batch.models) {
      auto it = per_model.find(m);
      if (it == per_model.end()) continue;
      const auto& rows = it->second;
      GroupStats g;
      if (key.first != kNoKey) {
        g.age_group = key.first;
        g.heart_rate = key.second;
      }
      g.model = m;
      g.n = rows.size();
      const std::size_t p = parameter_count(m);
      g.theta_mean.assign(p, 0.0);
      g.theta_std.assign(p, 0.0);
      auto accum = [&](auto get, double& mean, double& sd) {
        double s = 0.0;
        for (auto* r : rows) s += get(*r);
        mean = s / static_cast<double>(rows.size());
        double q = 0.0;
        for (auto* r : rows) q += (get(*r) - mean) * (get(*r) - mean);
        sd = rows.size() > 1 ? std::sqrt(q / static_cast<double>(rows.size() - 1)) : 0.0;
      };
      accum([](const SubjectModelRow& r) { return r.result->rmse; }, g.rmse_mean, g.rmse_std);
      accum([](const SubjectModelRow& r) { return r.result->deviation_pct; }, g.deviation_mean,
            g.deviation_std);
      accum([](const SubjectModelRow& r) { return r.result->aicc; }, g.aicc_mean, g.aicc_std);
      for (std::size_t j = 0; j < p; ++j)
        accum([j](const SubjectModelRow& r) { return r.result->theta_hat[j]; }, g.theta_mean[j],
              g.theta_std[j]);
      out.push_back(std::move(g));
    }
  }
  return out;
}

}  // namespace fraccomp
