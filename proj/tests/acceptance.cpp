// Acceptance suite: one self-contained check per shipping criterion, each
// printing a single [PASS]/[FAIL] line. Exit status is the failure count.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fraccomp/fraccomp.hpp>

using namespace fraccomp;
using cd = std::complex<double>;
using clock_type = std::chrono::steady_clock;

namespace {

struct Check {
  int id;
  const char* name;
  double time_limit_s;
  std::function<bool(std::string&)> run;
};

// ---------------------------------------------------------------------------
// shared cohort builders
// ---------------------------------------------------------------------------

std::vector<SubjectRecord> mixed_cohort_50(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<SubjectRecord> cohort;
  const double ages[] = {25.0, 35.0, 45.0, 55.0, 65.0, 75.0};
  for (int i = 0; i < 50; ++i) {
    SyntheticSpec spec;
    if (i % 2 == 0) {
      spec.model = Model::G;
      spec.theta = {0.04 + 0.08 * u(rng), 0.7 + 1.2 * u(rng)};
    } else {
      spec.model = Model::E;
      spec.theta = {0.6 + 0.5 * u(rng), 15.0 + 40.0 * u(rng), 0.04 + 0.1 * u(rng),
                    1.15 + 0.25 * u(rng)};
    }
    spec.r_app = 0.9 + 0.4 * u(rng);
    spec.heart_rate_bpm = 58.0 + 30.0 * u(rng);
    spec.flow_harmonics = half_sine_flow_spectrum(320.0 + 120.0 * u(rng), 0.35, 11);
    spec.samples_per_cycle = 512;
    char id[16];
    std::snprintf(id, sizeof id, "m%02d", i);
    auto s = synthesize_subject(spec, id);
    s.meta.age_group = ages[i % 6];
    cohort.push_back(std::move(s));
  }
  return cohort;
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

bool criterion_1_foc_laws(std::string& detail) {
  const double alphas[] = {0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5};
  const double omegas[] = {0.1, 1.0, 10.0, 100.0};
  double worst_arg = 0.0, worst_slope = 0.0;
  for (double a : alphas) {
    const FocParams p{1.3, a};
    double prev_logz = 0.0, prev_logw = 0.0;
    bool first = true;
    for (double w : omegas) {
      const cd z = foc_impedance(p, w);
      worst_arg = std::max(worst_arg, std::fabs(std::arg(z) + a * std::numbers::pi / 2.0));
      const double logz = std::log(std::abs(z)), logw = std::log(w);
      if (!first)
        worst_slope =
            std::max(worst_slope, std::fabs((logz - prev_logz) / (logw - prev_logw) + a));
      prev_logz = logz;
      prev_logw = logw;
      first = false;
    }
  }
  std::ostringstream ss;
  ss << "max |arg error| = " << worst_arg << ", max |slope error| = " << worst_slope;
  detail = ss.str();
  return worst_arg <= 1e-12 && worst_slope <= 1e-9;
}

bool criterion_2_hand_values(std::string& detail) {
  bool ok = true;
  ok &= (aicc(1.0, 2, 25) == 100.0 / 22.0);

  const std::vector<cd> data = {cd(3.0, 4.0), cd(-1.0, 2.0), cd(0.5, -0.25), cd(2.0, 0.0)};
  std::vector<cd> scaled;
  for (const auto& v : data) scaled.push_back(1.1 * v);
  ok &= std::fabs(deviation_pct(scaled, data) - 10.0) <= 1e-12;

  ok &= std::fabs(hysteresivity(0.5) + 1.0) <= 1e-12;
  ok &= std::fabs(hysteresivity(1.0)) <= 1e-12;
  detail = "aicc(1,2,25), +10% deviation, eta_r(0.5), eta_r(1)";
  return ok;
}

bool criterion_3_pipeline_inversion(std::string& detail) {
  std::mt19937_64 rng(20250810);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Model models[] = {Model::A, Model::B, Model::C, Model::D, Model::E, Model::G};
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Model m = models[trial % 6];
    SyntheticSpec spec;
    spec.model = m;
    switch (m) {
      case Model::A: spec.theta = {0.8 + 2.0 * u(rng), 0.4 + 0.5 * u(rng)}; break;
      case Model::B: spec.theta = {0.03 + 0.05 * u(rng), 0.6 + u(rng), 1.1 + 0.3 * u(rng)}; break;
      case Model::C: spec.theta = {1.5 + 3.0 * u(rng), 0.3 + 0.4 * u(rng)}; break;
      case Model::D:
        spec.theta = {0.03 + 0.05 * u(rng), 1.0 + 1.5 * u(rng), 1.3 + 0.3 * u(rng)};
        break;
      case Model::E:
        spec.theta = {0.5 + u(rng), 15.0 + 40.0 * u(rng), 0.03 + 0.1 * u(rng),
                      1.15 + 0.3 * u(rng)};
        break;
      default: spec.theta = {0.05 + 0.1 * u(rng), 0.8 + u(rng)}; break;
    }
    spec.r_app = 0.8 + 0.6 * u(rng);
    spec.heart_rate_bpm = 55.0 + 40.0 * u(rng);
    spec.flow_harmonics = half_sine_flow_spectrum(300.0 + 150.0 * u(rng), 0.35, 12);
    spec.samples_per_cycle = 512;
    const auto subj = synthesize_subject(spec);
    const auto data = measured_compliance(subj.pressure, subj.flow);
    for (std::size_t i = 0; i < data.n_s; ++i) {
      const cd truth = evaluate_at(m, spec.theta, data.angular_frequencies[i]);
      worst = std::max(worst, std::abs(data.values[i] - truth) / std::abs(truth));
    }
  }
  std::ostringstream ss;
  ss << "20 specs across A,B,C,D,E,G; worst relative error = " << worst;
  detail = ss.str();
  return worst <= 1e-8;
}

bool criterion_4_parameter_recovery(std::string& detail) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FitConfig cfg;
  cfg.multistart_count = 10;
  struct Case {
    Model m;
    double tol;
  };
  const Case cases[] = {{Model::A, 1e-3}, {Model::B, 1e-3}, {Model::G, 1e-3},
                        {Model::C, 1e-2}, {Model::D, 1e-2}, {Model::E, 1e-2}};
  std::ostringstream ss;
  bool ok = true;
  for (const auto& c : cases) {
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> theta;
      switch (c.m) {
        case Model::A: theta = {2.0 * std::exp(0.5 * u(rng)), 0.55 + 0.15 * u(rng)}; break;
        case Model::B:
          theta = {0.05 * std::exp(0.4 * u(rng)), 0.9 * std::exp(0.3 * u(rng)),
                   1.25 + 0.08 * u(rng)};
          break;
        case Model::G: theta = {0.08 * std::exp(0.4 * u(rng)), 1.2 * std::exp(0.4 * u(rng))}; break;
        case Model::C: theta = {3.0 * std::exp(0.4 * u(rng)), 0.45 + 0.15 * u(rng)}; break;
        case Model::D:
          theta = {0.05 * std::exp(0.3 * u(rng)), 2.0 * std::exp(0.3 * u(rng)),
                   1.45 + 0.04 * u(rng)};
          break;
        default:
          theta = {0.74 * std::exp(0.2 * u(rng)), 37.91 * std::exp(0.3 * u(rng)),
                   0.08 * std::exp(0.3 * u(rng)), 1.29 + 0.05 * u(rng)};
          break;
      }
      SyntheticSpec spec{c.m, theta, 1.05, 64.0, half_sine_flow_spectrum(390.0, 0.35, 11), 512};
      const auto subj = synthesize_subject(spec);
      const auto data = measured_compliance(subj.pressure, subj.flow);
      cfg.seed = 1000 + 100 * (model_tag(c.m) - 'A') + trial;
      const auto r = fit(c.m, data, cfg);
      for (std::size_t j = 0; j < theta.size(); ++j)
        worst = std::max(worst, std::fabs(r.theta_hat[j] - theta[j]) / theta[j]);
    }
    ss << model_tag(c.m) << ": " << worst << (worst <= c.tol ? " " : " (over) ");
    ok &= (worst <= c.tol);
  }
  detail = "worst relative errors: " + ss.str();
  return ok;
}

bool criterion_5_nesting(std::string& detail) {
  const auto cohort = mixed_cohort_50(321);
  FitConfig cfg;
  cfg.seed = 99;
  const std::vector<Model> models = {Model::A, Model::B, Model::C, Model::D};
  const auto batch = batch_fit(cohort, models, cfg);
  double worst_ba = -1e300, worst_dc = -1e300;
  for (std::size_t si = 0; si < cohort.size(); ++si) {
    const auto& ra = batch.rows[si * 4 + 0];
    const auto& rb = batch.rows[si * 4 + 1];
    const auto& rc = batch.rows[si * 4 + 2];
    const auto& rd = batch.rows[si * 4 + 3];
    if (!(ra.ok() && rb.ok() && rc.ok() && rd.ok())) {
      detail = "a fit failed on subject " + ra.subject_id;
      return false;
    }
    worst_ba = std::max(worst_ba, rb.result->rmse - ra.result->rmse);
    worst_dc = std::max(worst_dc, rd.result->rmse - rc.result->rmse);
  }
  std::ostringstream ss;
  ss << "50 subjects; worst RMSE(B)-RMSE(A) = " << worst_ba << ", worst RMSE(D)-RMSE(C) = "
     << worst_dc;
  detail = ss.str();
  return worst_ba <= 1e-6 && worst_dc <= 1e-6;
}

bool criterion_6_comparison_shape(std::string& detail) {
  std::mt19937_64 rng(654);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<SubjectRecord> cohort;
  for (int i = 0; i < 50; ++i) {
    std::vector<double> theta = {0.74 * (1.0 + 0.1 * u(rng)), 37.91 * (1.0 + 0.1 * u(rng)),
                                 0.08 * (1.0 + 0.1 * u(rng)), 1.29 * (1.0 + 0.02 * u(rng))};
    SyntheticSpec spec{Model::E, theta, 0.95 + 0.1 * u(rng), 60.0 + 8.0 * u(rng),
                       half_sine_flow_spectrum(380.0 + 40.0 * u(rng), 0.35, 11), 512};
    cohort.push_back(synthesize_subject(spec, "e" + std::to_string(i)));
  }
  FitConfig cfg;
  cfg.seed = 31;
  cfg.multistart_count = 10;
  const auto batch = batch_fit(cohort, {Model::A, Model::B, Model::E}, cfg);
  const auto sums = summarize_models(batch);
  double mean_rmse[3] = {0, 0, 0}, mean_aicc[3] = {0, 0, 0};
  for (const auto& s : sums) {
    const int i = s.model == Model::A ? 0 : (s.model == Model::B ? 1 : 2);
    if (s.n_ok != 50) {
      detail = "not all fits succeeded";
      return false;
    }
    mean_rmse[i] = s.rmse_mean;
    mean_aicc[i] = s.aicc_mean;
  }
  std::ostringstream ss;
  ss << "mean RMSE A/B/E = " << mean_rmse[0] << "/" << mean_rmse[1] << "/" << mean_rmse[2]
     << "; mean AICc A/E = " << mean_aicc[0] << "/" << mean_aicc[2];
  detail = ss.str();
  return mean_rmse[2] <= mean_rmse[1] && mean_rmse[1] <= mean_rmse[0] &&
         mean_aicc[0] < mean_aicc[2];
}

bool criterion_7_correlation(std::string& detail) {
  std::mt19937_64 rng(20200505);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<SubjectRecord> cohort;
  for (int i = 0; i < 200; ++i) {
    const double sbp = 95.0 + 40.0 * double(i) / 199.0;
    const double alpha = (0.40 + 0.005 * (sbp - 95.0)) * (1.0 + noise(rng));
    SyntheticSpec spec{Model::A, {1.4, alpha}, 1.05, 66.0,
                       half_sine_flow_spectrum(380.0, 0.35, 10), 512};
    auto s = synthesize_subject(spec, "c" + std::to_string(i));
    s.meta.sbp = sbp;  // designed covariate
    cohort.push_back(std::move(s));
  }
  FitConfig cfg;
  cfg.seed = 7;
  const auto batch = batch_fit(cohort, {Model::A}, cfg);
  const auto rows = correlation_table(batch, cohort, CorrelationOptions{});
  for (const auto& row : rows) {
    if (row.determinant == Determinant::sbp && row.parameter == FracParameter::alpha) {
      std::ostringstream ss;
      ss << "r = " << row.r << " over " << row.n_bins << " bins of 5 mmHg";
      detail = ss.str();
      return std::fabs(row.r) >= 0.99;
    }
  }
  detail = "no (A, alpha, SBP) row produced";
  return false;
}

bool criterion_8_pwdb_shaped_aggregates(std::string& detail) {
  // Published cohort-level numbers need the external pwdb export; what ships
  // is the machinery: a metadata-complete CSV must come back out as
  // (age group x heart rate x model) aggregate rows with parameter means.
  std::vector<SubjectRecord> cohort;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int n = 0;
  for (double age : {25.0, 45.0}) {
    for (double hr : {61.72, 84.11}) {
      for (int i = 0; i < 3; ++i) {
        SyntheticSpec spec{Model::A, {1.2 + 0.4 * u(rng), 0.45 + 0.2 * u(rng)}, 1.0, hr,
                           half_sine_flow_spectrum(380.0, 0.35, 10), 512};
        auto s = synthesize_subject(spec, "p" + std::to_string(n++));
        s.meta.age_group = age;
        s.meta.heart_rate = hr;
        s.meta.pwv_a = 4.0 + 0.05 * age + 0.2 * u(rng);
        s.meta.pwv_cf = 6.0 + 0.06 * age + 0.2 * u(rng);
        cohort.push_back(std::move(s));
      }
    }
  }
  // through the documented CSV interface, as a pwdb export would arrive
  std::ostringstream csv;
  save_subjects_csv(csv, cohort);
  std::istringstream in(csv.str());
  const auto loaded = load_subjects_csv(in);

  const std::vector<Model> models = {Model::A, Model::B};
  const auto batch = batch_fit(loaded, models, FitConfig{});
  const auto groups = aggregate_groups(batch, loaded);
  if (groups.size() != 4 * models.size()) {
    detail = "expected one aggregate row per (age, heart rate, model) cell";
    return false;
  }
  for (const auto& g : groups) {
    if (!g.age_group || !g.heart_rate || g.n != 3) {
      detail = "aggregate keys incomplete";
      return false;
    }
    if (g.theta_mean.size() != parameter_count(g.model)) {
      detail = "parameter means missing";
      return false;
    }
  }
  RunManifest m;
  m.command = "batch";
  m.models = models;
  std::ostringstream agg;
  write_aggregates_csv(agg, groups, m);
  const bool header_ok =
      agg.str().find("age_group,heart_rate,model,n,rmse_mean,rmse_std,deviation_mean,"
                     "deviation_std,aicc_mean,aicc_std,param_names,theta_mean,theta_std") !=
      std::string::npos;
  detail = "aggregate rows over 2 ages x 2 heart rates x 2 models; published cohort-level "
           "values (e.g. mean single-FOC order near 0.58) stay external reference targets "
           "documented in the README";
  return header_ok;
}

bool criterion_9_determinism(std::string& detail) {
  const auto cohort = mixed_cohort_50(321);
  FitConfig cfg;
  cfg.seed = 99;
  const std::vector<Model> models = {Model::A, Model::B, Model::C, Model::D};
  BatchOptions one;
  one.threads = 1;
  BatchOptions three;
  three.threads = 3;
  const auto b1 = batch_fit(cohort, models, cfg, one);
  const auto b3 = batch_fit(cohort, models, cfg, three);
  RunManifest m;
  m.command = "batch";
  m.models = models;
  m.fit = cfg;
  const std::string t1 = results_csv_string(b1, m);
  const std::string t3 = results_csv_string(b3, m);
  detail = t1 == t3 ? "1-thread and 3-thread tables are byte-identical"
                    : "tables differ between thread counts";
  return t1 == t3;
}

}  // namespace

int main(int argc, char** argv) {
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  const Check checks[] = {
      {1, "FOC constant-phase and power-law laws", 1.0, criterion_1_foc_laws},
      {2, "hand-value regression (AICc, Deviation, eta_r)", 1.0, criterion_2_hand_values},
      {3, "pipeline inversion oracle", 5.0, criterion_3_pipeline_inversion},
      {4, "noiseless parameter recovery", 60.0, criterion_4_parameter_recovery},
      {5, "nesting monotonicity on a 50-subject cohort", 120.0, criterion_5_nesting},
      {6, "model-comparison shape on a Model-E cohort", 600.0, criterion_6_comparison_shape},
      {7, "binned correlation pipeline", 120.0, criterion_7_correlation},
      {8, "pwdb-shaped aggregate emission", 600.0, criterion_8_pwdb_shaped_aggregates},
      {9, "thread-count determinism", 600.0, criterion_9_determinism},
  };
  int failures = 0;
  for (const auto& c : checks) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = clock_type::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double dt = std::chrono::duration<double>(clock_type::now() - t0).count();
    if (dt > c.time_limit_s) {
      ok = false;
      detail += " [exceeded " + std::to_string(c.time_limit_s) + " s limit]";
    }
    std::printf("[%s] criterion %d: %s (%s; %.2f s)\n", ok ? "PASS" : "FAIL", c.id, c.name,
                detail.c_str(), dt);
    failures += !ok;
  }
  return failures;
}
