#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fraccomp/detail/math.hpp"
#include "fraccomp/error.hpp"
#include "fraccomp/metrics.hpp"
#include "fraccomp/models.hpp"
#include "fraccomp/spectral.hpp"

namespace fraccomp {

struct FitConfig {
  int max_iterations = 500;
  double gradient_tolerance = 1e-10;
  double step_tolerance = 1e-12;
  int multistart_count = 5;
  double fd_relative_step = 1e-6;
  std::uint64_t seed = 1;
  /// Normalize imaginary residuals per-point by Im(C_app), reproducing the
  /// published identification recipe verbatim, instead of by max|Im| over
  /// harmonics. Ill-conditioned near zero crossings of Im; off by default.
  bool strict_paper_im_norm = false;
};

struct FitResult {
  Model model = Model::A;
  std::vector<double> theta_hat;
  double rmse = std::numeric_limits<double>::infinity();
  double aicc = std::numeric_limits<double>::quiet_NaN();
  double deviation_pct = std::numeric_limits<double>::quiet_NaN();
  double mean_abs_deviation_pct = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  int iterations = 0;
  std::vector<double> objective_history;  // accepted objective values, nonincreasing
  std::size_t n_s = 0;
};

namespace detail {

struct Normalizers {
  double re = 0.0;
  double im = 0.0;  // unused in strict mode
  bool strict = false;
};

inline Normalizers objective_normalizers(const MeasuredCompliance& data, bool strict) {
  Normalizers n;
  n.strict = strict;
  double re_max = -std::numeric_limits<double>::infinity();
  double im_max = 0.0;
  for (const auto& v : data.values) {
    re_max = std::max(re_max, v.real());
    im_max = std::max(im_max, std::fabs(v.imag()));
    if (strict && v.imag() == 0.0)
      fail(errc::zero_normalizer, "strict objective divides by a zero Im(C_app)");
  }
  if (re_max == 0.0) fail(errc::zero_normalizer, "max Re(C_app) is zero");
  if (!strict && im_max == 0.0) fail(errc::zero_normalizer, "imaginary part of C_app is identically zero");
  n.re = re_max;
  n.im = im_max;
  return n;
}

/// Normalized complex residuals, two per harmonic; RMSE = |r| / sqrt(N_s).
struct ResidualFn {
  Model model;
  const MeasuredCompliance* data;
  Normalizers norm;

  std::size_t size() const { return 2 * data->n_s; }

  void operator()(std::span<const double> theta, std::vector<double>& r) const {
    r.resize(size());
    for (std::size_t i = 0; i < data->n_s; ++i) {
      const std::complex<double> c = evaluate_at(model, theta, data->angular_frequencies[i]);
      const std::complex<double> d = data->values[i];
      r[2 * i] = (d.real() - c.real()) / norm.re;
      r[2 * i + 1] = (d.imag() - c.imag()) / (norm.strict ? d.imag() : norm.im);
    }
  }
};

inline double sse_to_rmse(double sse, std::size_t n_s) {
  return std::sqrt(std::max(sse, 0.0) / static_cast<double>(n_s));
}

struct LmOutcome {
  std::vector<double> theta;
  double sse = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  std::vector<double> sse_history;
};

/// Central finite-difference Jacobian of a residual vector, column-major in
/// `jac` (jac[j*m + i]). Falls back to a forward difference where a backward
/// probe would leave the domain of definition (a parameter crossing zero).
/// `r0` must hold the residuals at `theta`.
template <typename F>
void fd_jacobian(const F& residual, std::size_t m, std::span<const double> theta,
                 std::span<const double> lower, double fd_relative_step,
                 std::span<const double> r0, std::vector<double>& jac) {
  const std::size_t n = theta.size();
  jac.resize(m * n);
  std::vector<double> probe(theta.begin(), theta.end());
  std::vector<double> r_hi(m), r_lo(m);
  for (std::size_t j = 0; j < n; ++j) {
    const double h = fd_relative_step * std::max(std::fabs(theta[j]), 1e-2);
    probe[j] = theta[j] + h;
    residual(probe, r_hi);
    if (theta[j] - h > 0.0 || (theta[j] - h == 0.0 && lower[j] == 0.0)) {
      probe[j] = theta[j] - h;
      residual(probe, r_lo);
      const double inv = 1.0 / (2.0 * h);
      for (std::size_t i = 0; i < m; ++i) jac[j * m + i] = (r_hi[i] - r_lo[i]) * inv;
    } else {
      const double inv = 1.0 / h;
      for (std::size_t i = 0; i < m; ++i) jac[j * m + i] = (r_hi[i] - r0[i]) * inv;
    }
    probe[j] = theta[j];
  }
}

/// Dense Levenberg-Marquardt with box projection. Jacobian by central finite
/// differences (one-sided where a backward probe would leave the domain of
/// definition). Steps are accepted only on strict improvement.
template <typename F>
LmOutcome levenberg_marquardt(const F& residual, std::size_t m, std::vector<double> theta,
                              std::span<const double> lower, std::span<const double> upper,
                              const FitConfig& cfg) {
  const std::size_t n = theta.size();
  const auto clamp = [&](std::vector<double>& t) {
    for (std::size_t j = 0; j < n; ++j) t[j] = std::clamp(t[j], lower[j], upper[j]);
  };
  clamp(theta);

  std::vector<double> r(m), r_try(m);
  std::vector<double> jac(m * n);  // column-major: jac[j*m + i]
  std::vector<double> g(n), a(n * n), rhs(n), theta_try(n);

  residual(theta, r);
  double sse = std::inner_product(r.begin(), r.end(), r.begin(), 0.0);

  LmOutcome out;
  out.sse_history.push_back(sse);
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;

  while (iter < cfg.max_iterations && std::isfinite(sse)) {
    ++iter;

    fd_jacobian(residual, m, theta, lower, cfg.fd_relative_step, r, jac);

    // g = J^T r
    double g_inf = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += jac[j * m + i] * r[i];
      g[j] = s;
      g_inf = std::max(g_inf, std::fabs(s));
    }
    if (g_inf < cfg.gradient_tolerance) {
      converged = true;
      break;
    }

    // J^T J once per outer iteration
    std::vector<double> jtj(n * n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = j; k < n; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += jac[j * m + i] * jac[k * m + i];
        jtj[j * n + k] = jtj[k * n + j] = s;
      }

    bool accepted = false;
    bool step_converged = false;
    for (int damp = 0; damp < 64; ++damp) {
      a = jtj;
      for (std::size_t j = 0; j < n; ++j)
        a[j * n + j] += lambda * std::max(jtj[j * n + j], 1e-12);
      for (std::size_t j = 0; j < n; ++j) rhs[j] = -g[j];
      if (!solve_linear(a, rhs, n)) {
        lambda *= 10.0;
        continue;
      }
      for (std::size_t j = 0; j < n; ++j) theta_try[j] = theta[j] + rhs[j];
      clamp(theta_try);

      double step_norm = 0.0, theta_norm = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        step_norm += (theta_try[j] - theta[j]) * (theta_try[j] - theta[j]);
        theta_norm += theta[j] * theta[j];
      }
      step_norm = std::sqrt(step_norm);
      theta_norm = std::sqrt(theta_norm);
      if (step_norm <= cfg.step_tolerance * (theta_norm + cfg.step_tolerance)) {
        step_converged = true;
        break;
      }

      residual(theta_try, r_try);
      const double sse_try = std::inner_product(r_try.begin(), r_try.end(), r_try.begin(), 0.0);
      if (sse_try < sse && std::isfinite(sse_try)) {
        theta = theta_try;
        std::swap(r, r_try);
        sse = sse_try;
        out.sse_history.push_back(sse);
        lambda = std::max(lambda * 0.25, 1e-14);
        accepted = true;
        break;
      }
      lambda *= 4.0;
      if (lambda > 1e14) break;
    }
    if (step_converged) {
      converged = true;
      break;
    }
    if (!accepted) break;  // damping exhausted at a local floor
  }

  out.theta = std::move(theta);
  out.sse = sse;
  out.iterations = iter;
  out.converged = converged;
  return out;
}

/// Candidate start points: the base start followed by log-uniform
/// perturbations. Odd candidates jitter the base locally (a decade for
/// magnitudes, a factor of two for the order); even ones scatter over the
/// plausible physiological decades, which rescues structures whose optimum
/// sits far from the default init. Draw order is fixed, so a seed pins the
/// whole pool.
inline std::vector<std::vector<double>> make_start_candidates(Model m, const BoundsAndInit& b,
                                                              const FitConfig& cfg,
                                                              const std::vector<double>* init,
                                                              std::size_t pool_size) {
  std::vector<std::vector<double>> pool;
  const std::vector<double>& base = init ? *init : b.init;
  pool.push_back(base);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int ai = alpha_index(m);
  for (std::size_t s = 1; s < pool_size; ++s) {
    std::vector<double> t = base;
    for (std::size_t j = 0; j < t.size(); ++j) {
      const bool is_order = static_cast<int>(j) == ai;
      if (s % 2 == 1) {
        t[j] *= std::exp(u(rng) * (is_order ? std::log(2.0) : std::log(10.0)));
      } else if (is_order) {
        t[j] = 0.05 + u01(rng) * 1.85;  // anywhere in (0, 1.9]
      } else {
        t[j] = std::exp(std::log(1e-3) + u01(rng) * std::log(1e6));  // [1e-3, 1e3]
      }
      t[j] = std::clamp(t[j], b.lower[j], b.upper[j]);
    }
    pool.push_back(std::move(t));
  }
  return pool;
}

}  // namespace detail

/// Normalized complex-residual RMSE of a parameter vector against data.
/// A symmetric function of the (omega, value) pairs, so harmonic order does
/// not matter here; fit() additionally insists on sorted frequencies.
inline double objective(Model m, std::span<const double> theta, const MeasuredCompliance& data,
                        bool strict_paper_im_norm = false) {
  if (data.values.size() != data.angular_frequencies.size() || data.n_s != data.values.size())
    fail(errc::length_mismatch, "compliance arrays disagree in length");
  validate_params(m, theta);
  if (data.n_s < parameter_count(m) + 2)
    fail(errc::too_few_harmonics, "need at least p + 2 harmonics");
  const auto norm = detail::objective_normalizers(data, strict_paper_im_norm);
  detail::ResidualFn fn{m, &data, norm};
  std::vector<double> r;
  fn(theta, r);
  return detail::sse_to_rmse(std::inner_product(r.begin(), r.end(), r.begin(), 0.0), data.n_s);
}

/// Bounded nonlinear least-squares identification of one model.
/// extra_starts lets callers chain warm starts (e.g. a nested model's optimum).
inline FitResult fit(Model m, const MeasuredCompliance& data, const FitConfig& cfg = {},
                     const std::vector<double>* init = nullptr,
                     std::span<const std::vector<double>> extra_starts = {}) {
  validate(data);
  const std::size_t p = parameter_count(m);
  if (data.n_s < p + 2)
    fail(errc::too_few_harmonics, std::string("model ") + model_tag(m) + " needs at least " +
                                      std::to_string(p + 2) + " harmonics, got " +
                                      std::to_string(data.n_s));
  const BoundsAndInit bounds = default_bounds_and_init(m);
  if (init) {
    validate_params(m, *init);
    for (std::size_t j = 0; j < p; ++j)
      if ((*init)[j] < bounds.lower[j] || (*init)[j] > bounds.upper[j])
        fail(errc::invalid_argument, "initial point outside bounds");
  }

  const auto norm = detail::objective_normalizers(data, cfg.strict_paper_im_norm);
  detail::ResidualFn fn{m, &data, norm};
  const std::size_t m_res = fn.size();

  // Scatter a larger candidate pool, rank by the (cheap) objective at the
  // candidate itself, and spend the optimizer budget only on the base start
  // plus the most promising multistart_count - 1 perturbations.
  const std::size_t pool_size =
      cfg.multistart_count <= 1
          ? 1
          : std::max<std::size_t>(static_cast<std::size_t>(cfg.multistart_count) * 8, 40);
  auto pool = detail::make_start_candidates(m, bounds, cfg, init, pool_size);
  std::vector<double> r_tmp;
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 1; i < pool.size(); ++i) {
    fn(pool[i], r_tmp);
    double sse = std::inner_product(r_tmp.begin(), r_tmp.end(), r_tmp.begin(), 0.0);
    if (!std::isfinite(sse)) sse = std::numeric_limits<double>::infinity();
    ranked.emplace_back(sse, i);
  }
  std::sort(ranked.begin(), ranked.end());
  std::vector<std::vector<double>> starts;
  starts.push_back(pool[0]);
  for (std::size_t i = 0; i + 1 < static_cast<std::size_t>(cfg.multistart_count) && i < ranked.size();
       ++i)
    starts.push_back(std::move(pool[ranked[i].second]));
  for (const auto& s : extra_starts) {
    if (s.size() == p) starts.push_back(s);
  }

  detail::LmOutcome best;
  bool have = false;
  for (auto& s : starts) {
    auto o = detail::levenberg_marquardt(fn, m_res, s, bounds.lower, bounds.upper, cfg);
    // A stalled damping loop is not a stationary point; restarting from the
    // endpoint with fresh damping often walks out of shallow valleys.
    for (int restart = 0; restart < 2 && !o.converged && o.iterations < cfg.max_iterations;
         ++restart) {
      auto o2 = detail::levenberg_marquardt(fn, m_res, o.theta, bounds.lower, bounds.upper, cfg);
      if (!(o2.sse < o.sse) && !o2.converged) break;
      o2.iterations += o.iterations;
      o2.sse_history.erase(o2.sse_history.begin());  // duplicate of o's endpoint
      o2.sse_history.insert(o2.sse_history.begin(), o.sse_history.begin(), o.sse_history.end());
      const bool made_progress = o2.sse < o.sse;
      o = std::move(o2);
      if (!made_progress) break;
    }
    if (!have || o.sse < best.sse ||
        (o.sse == best.sse && o.iterations < best.iterations)) {
      best = std::move(o);
      have = true;
    }
  }

  FitResult res;
  res.model = m;
  res.theta_hat = best.theta;
  res.n_s = data.n_s;
  res.converged = best.converged;
  res.iterations = best.iterations;
  res.rmse = detail::sse_to_rmse(best.sse, data.n_s);
  res.objective_history.reserve(best.sse_history.size());
  for (double s : best.sse_history) res.objective_history.push_back(detail::sse_to_rmse(s, data.n_s));

  if (m == Model::F) {
    // a_n and b_n enter through separable products, so each group can be
    // reported sorted without changing the model value.
    std::sort(res.theta_hat.begin() + 1, res.theta_hat.begin() + 5);
    std::sort(res.theta_hat.begin() + 5, res.theta_hat.end());
  }

  res.aicc = res.rmse > 0.0 ? aicc(res.rmse, p, data.n_s)
                            : std::numeric_limits<double>::infinity();
  const auto model_vals = evaluate(m, res.theta_hat, data.angular_frequencies);
  res.deviation_pct = deviation_pct(model_vals, data.values);
  res.mean_abs_deviation_pct = mean_abs_deviation_pct(model_vals, data.values);
  return res;
}

/// One model's slot in a multi-model comparison; failures carry the error
/// text instead of aborting the batch.
struct ModelFitOutcome {
  Model model = Model::A;
  std::optional<FitResult> result;
  std::string error;
  bool ok() const { return result.has_value(); }
};

/// Fit a list of models against the same data, in the given order.
/// When a containing pair is present (A before B, C before D) the smaller
/// model's optimum seeds the larger one with the extra resistance at its
/// lower bound, so the nesting inequality survives the local optimizer.
inline std::vector<ModelFitOutcome> fit_models(const MeasuredCompliance& data,
                                               std::span<const Model> models,
                                               const FitConfig& cfg = {}) {
  std::vector<ModelFitOutcome> out;
  out.reserve(models.size());
  std::optional<std::vector<double>> theta_a, theta_c;
  for (Model m : models) {
    ModelFitOutcome o;
    o.model = m;
    std::vector<std::vector<double>> warm;
    if (m == Model::B && theta_a)
      warm.push_back({detail::kMagLower, (*theta_a)[0], (*theta_a)[1]});
    if (m == Model::D && theta_c)
      warm.push_back({detail::kMagLower, (*theta_c)[0], (*theta_c)[1]});
    try {
      o.result = fit(m, data, cfg, nullptr, warm);
    } catch (const Error& e) {
      o.error = e.what();
    }
    if (o.ok()) {
      if (m == Model::A) theta_a = o.result->theta_hat;
      if (m == Model::C) theta_c = o.result->theta_hat;
    }
    out.push_back(std::move(o));
  }
  return out;
}

/// Fit the whole zoo and rank by AICc (ascending); failed models sort last.
inline std::vector<ModelFitOutcome> fit_all(const MeasuredCompliance& data,
                                            const FitConfig& cfg = {}) {
  auto out = fit_models(data, kAllModels, cfg);
  std::stable_sort(out.begin(), out.end(), [](const ModelFitOutcome& x, const ModelFitOutcome& y) {
    if (x.ok() != y.ok()) return x.ok();
    if (!x.ok()) return false;
    return x.result->aicc < y.result->aicc;
  });
  return out;
}

}  // namespace fraccomp
