#pragma once

#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fraccomp/analysis.hpp"
#include "fraccomp/fitting.hpp"
#include "fraccomp/models.hpp"
#include "fraccomp/population.hpp"
#include "fraccomp/version.hpp"

namespace fraccomp {

/// Everything needed to reproduce a run. Serialized into every output file.
struct RunManifest {
  std::string command;  // fit | batch | compare | synth | correlate
  std::string input_path;
  std::string output_dir;
  double f_max = kDefaultFmaxHz;
  std::vector<Model> models;
  FitConfig fit;
  double bin_mmhg = kDefaultPressureBinMmHg;
  double bin_pwv = kDefaultPwvBinMs;
  double confidence = 0.95;
  bool raw_subjects = false;
  unsigned threads = 0;
};

inline nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["input"] = m.input_path;
  j["output_dir"] = m.output_dir;
  j["f_max_hz"] = m.f_max;
  std::string tags;
  for (Model mm : m.models) tags.push_back(model_tag(mm));
  j["models"] = tags;
  j["fit"] = {{"max_iterations", m.fit.max_iterations},
              {"gradient_tolerance", m.fit.gradient_tolerance},
              {"step_tolerance", m.fit.step_tolerance},
              {"multistart_count", m.fit.multistart_count},
              {"fd_relative_step", m.fit.fd_relative_step},
              {"seed", m.fit.seed},
              {"strict_paper_im_norm", m.fit.strict_paper_im_norm}};
  j["bin_mmhg"] = m.bin_mmhg;
  j["bin_pwv"] = m.bin_pwv;
  j["confidence"] = m.confidence;
  j["raw_subjects"] = m.raw_subjects;
  j["threads"] = m.threads;
  return j;
}

/// Comment block prepended to CSV outputs.
inline std::string provenance_comment(const RunManifest& m) {
  return std::string("# fraccomp ") + FRACCOMP_VERSION + "\n# manifest: " + to_json(m).dump() +
         "\n";
}

namespace detail {
inline std::string csv_safe(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n') c = ';';
  return s;
}

inline std::string theta_cell(const std::vector<double>& t) {
  std::string s;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) s.push_back(';');
    s += g17(t[i]);
  }
  return s;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Fit results
// ---------------------------------------------------------------------------

inline void write_results_csv(std::ostream& out, const BatchResults& batch,
                              const RunManifest& manifest) {
  out << provenance_comment(manifest);
  out << "subject_id,model,status,converged,iterations,n_s,r_app,rmse,aicc,"
         "deviation_pct,mean_abs_deviation_pct,theta,error\n";
  for (const auto& row : batch.rows) {
    out << detail::csv_safe(row.subject_id) << ',' << model_tag(row.model) << ',';
    if (row.ok()) {
      const FitResult& r = *row.result;
      out << "ok," << (r.converged ? 1 : 0) << ',' << r.iterations << ',' << r.n_s << ','
          << detail::g17(row.r_app) << ',' << detail::g17(r.rmse) << ',' << detail::g17(r.aicc)
          << ',' << detail::g17(r.deviation_pct) << ',' << detail::g17(r.mean_abs_deviation_pct)
          << ',' << detail::theta_cell(r.theta_hat) << ",\n";
    } else {
      out << "failed,,,,,,,,,," << detail::csv_safe(row.error) << '\n';
    }
  }
}

inline std::string results_csv_string(const BatchResults& batch, const RunManifest& manifest) {
  std::ostringstream ss;
  write_results_csv(ss, batch, manifest);
  return ss.str();
}

inline nlohmann::json fit_result_to_json(const FitResult& r) {
  nlohmann::json j;
  j["model"] = std::string(1, model_tag(r.model));
  const auto& spec = model_spec(r.model);
  nlohmann::json params = nlohmann::json::array();
  for (std::size_t i = 0; i < r.theta_hat.size(); ++i)
    params.push_back({{"name", spec.params[i].name},
                      {"unit", spec.params[i].unit},
                      {"value", r.theta_hat[i]}});
  j["parameters"] = params;
  j["rmse"] = r.rmse;
  j["aicc"] = r.aicc;
  j["deviation_pct"] = r.deviation_pct;
  j["mean_abs_deviation_pct"] = r.mean_abs_deviation_pct;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["n_s"] = r.n_s;
  j["objective_history"] = r.objective_history;
  return j;
}

inline void write_results_json(std::ostream& out, const BatchResults& batch,
                               const RunManifest& manifest) {
  nlohmann::json j;
  j["fraccomp_version"] = FRACCOMP_VERSION;
  j["manifest"] = to_json(manifest);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : batch.rows) {
    nlohmann::json rj;
    rj["subject_id"] = row.subject_id;
    rj["model"] = std::string(1, model_tag(row.model));
    if (row.ok()) {
      rj["status"] = "ok";
      rj["r_app"] = row.r_app;
      rj["fit"] = fit_result_to_json(*row.result);
    } else {
      rj["status"] = "failed";
      rj["error"] = row.error;
    }
    rows.push_back(std::move(rj));
  }
  j["results"] = rows;
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Group aggregates (age group x heart rate cells)
// ---------------------------------------------------------------------------

inline void write_aggregates_csv(std::ostream& out, std::span<const GroupStats> groups,
                                 const RunManifest& manifest) {
  out << provenance_comment(manifest);
  out << "age_group,heart_rate,model,n,rmse_mean,rmse_std,deviation_mean,deviation_std,"
         "aicc_mean,aicc_std,param_names,theta_mean,theta_std\n";
  for (const auto& g : groups) {
    out << detail::opt_cell(g.age_group) << ',' << detail::opt_cell(g.heart_rate) << ','
        << model_tag(g.model) << ',' << g.n << ',' << detail::g17(g.rmse_mean) << ','
        << detail::g17(g.rmse_std) << ',' << detail::g17(g.deviation_mean) << ','
        << detail::g17(g.deviation_std) << ',' << detail::g17(g.aicc_mean) << ','
        << detail::g17(g.aicc_std) << ',';
    const auto& spec = model_spec(g.model);
    for (std::size_t i = 0; i < spec.params.size(); ++i)
      out << (i ? ";" : "") << spec.params[i].name;
    out << ',' << detail::theta_cell(g.theta_mean) << ',' << detail::theta_cell(g.theta_std)
        << '\n';
  }
}

// ---------------------------------------------------------------------------
// Model comparison summary (per-model means across a cohort)
// ---------------------------------------------------------------------------

struct ModelSummary {
  Model model = Model::A;
  std::size_t n_subjects = 0;
  std::size_t n_ok = 0;
  double rmse_mean = 0, rmse_std = 0;
  double deviation_mean = 0, deviation_std = 0;
  double mean_abs_deviation_mean = 0;
  double aicc_mean = 0, aicc_std = 0;
};

inline std::vector<ModelSummary> summarize_models(const BatchResults& batch) {
  std::vector<ModelSummary> out;
  for (Model m : batch.models) {
    ModelSummary s;
    s.model = m;
    std::vector<const FitResult*> ok;
    for (const auto& row : batch.rows) {
      if (row.model != m) continue;
      ++s.n_subjects;
      if (row.ok()) ok.push_back(&*row.result);
    }
    s.n_ok = ok.size();
    if (!ok.empty()) {
      auto accum = [&](auto get, double& mean, double* sd) {
        double acc = 0.0;
        for (auto* r : ok) acc += get(*r);
        mean = acc / static_cast<double>(ok.size());
        if (sd) {
          double q = 0.0;
          for (auto* r : ok) q += (get(*r) - mean) * (get(*r) - mean);
          *sd = ok.size() > 1 ? std::sqrt(q / static_cast<double>(ok.size() - 1)) : 0.0;
        }
      };
      accum([](const FitResult& r) { return r.rmse; }, s.rmse_mean, &s.rmse_std);
      accum([](const FitResult& r) { return r.deviation_pct; }, s.deviation_mean,
            &s.deviation_std);
      accum([](const FitResult& r) { return r.mean_abs_deviation_pct; },
            s.mean_abs_deviation_mean, nullptr);
      accum([](const FitResult& r) { return r.aicc; }, s.aicc_mean, &s.aicc_std);
    }
    out.push_back(s);
  }
  return out;
}

inline void write_compare_csv(std::ostream& out, std::span<const ModelSummary> summaries,
                              const RunManifest& manifest) {
  out << provenance_comment(manifest);
  out << "model,n_subjects,n_ok,rmse_mean,rmse_std,deviation_mean,deviation_std,"
         "mean_abs_deviation_mean,aicc_mean,aicc_std\n";
  for (const auto& s : summaries) {
    out << model_tag(s.model) << ',' << s.n_subjects << ',' << s.n_ok << ','
        << detail::g17(s.rmse_mean) << ',' << detail::g17(s.rmse_std) << ','
        << detail::g17(s.deviation_mean) << ',' << detail::g17(s.deviation_std) << ','
        << detail::g17(s.mean_abs_deviation_mean) << ',' << detail::g17(s.aicc_mean) << ','
        << detail::g17(s.aicc_std) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Correlation table (model x parameter rows, determinant columns)
// ---------------------------------------------------------------------------

inline void write_correlation_csv(std::ostream& out, std::span<const CorrelationRow> rows,
                                  const RunManifest& manifest) {
  out << provenance_comment(manifest);
  out << "model,parameter";
  for (Determinant d : kAllDeterminants)
    out << ',' << determinant_name(d) << "_r," << determinant_name(d) << "_ci_low,"
        << determinant_name(d) << "_ci_high," << determinant_name(d) << "_n_bins";
  out << '\n';
  // group rows by (model, parameter) in first-seen order
  std::vector<std::pair<Model, FracParameter>> keys;
  for (const auto& r : rows) {
    const std::pair<Model, FracParameter> k{r.model, r.parameter};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  for (const auto& [m, par] : keys) {
    out << model_tag(m) << ',' << frac_parameter_name(par);
    for (Determinant d : kAllDeterminants) {
      const CorrelationRow* found = nullptr;
      for (const auto& r : rows)
        if (r.model == m && r.parameter == par && r.determinant == d) {
          found = &r;
          break;
        }
      if (found)
        out << ',' << detail::g17(found->r) << ',' << detail::g17(found->ci_low) << ','
            << detail::g17(found->ci_high) << ',' << found->n_bins;
      else
        out << ",,,,";
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Model catalogue (machine-readable listing for CLI discovery)
// ---------------------------------------------------------------------------

inline nlohmann::json catalogue_to_json() {
  nlohmann::json j;
  j["fraccomp_version"] = FRACCOMP_VERSION;
  nlohmann::json models = nlohmann::json::array();
  for (const auto& spec : model_catalogue()) {
    nlohmann::json mj;
    mj["tag"] = std::string(1, model_tag(spec.id));
    mj["description"] = spec.description;
    mj["parameter_count"] = spec.params.size();
    nlohmann::json params = nlohmann::json::array();
    for (const auto& p : spec.params)
      params.push_back({{"name", p.name},
                        {"unit", p.unit},
                        {"lower", p.lower},
                        {"upper", p.upper},
                        {"init", p.init},
                        {"is_order", p.is_order}});
    mj["parameters"] = params;
    models.push_back(std::move(mj));
  }
  j["models"] = models;
  return j;
}

}  // namespace fraccomp
