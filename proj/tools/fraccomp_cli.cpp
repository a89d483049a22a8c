// Command-line front end: identify apparent-compliance models from aortic
// pressure/flow cycles, run cohorts, compare model structures, synthesize
// ground-truth cohorts and emit binned correlation tables.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <fraccomp/fraccomp.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliOptions {
  std::string input;
  std::string out_dir;
  std::string models_csv = "A,B,C,D,E,F,G";
  std::string subject_id;  // fit: restrict to one subject
  double f_max = fraccomp::kDefaultFmaxHz;
  double bin_mmhg = fraccomp::kDefaultPressureBinMmHg;
  double bin_pwv = fraccomp::kDefaultPwvBinMs;
  double confidence = 0.95;
  bool raw_subjects = false;
  unsigned threads = 0;
  fraccomp::FitConfig fit;
};

std::vector<fraccomp::Model> parse_models(const std::string& csv) {
  std::vector<fraccomp::Model> models;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t next = csv.find(',', pos);
    if (next == std::string::npos) next = csv.size();
    const std::string tok = csv.substr(pos, next - pos);
    if (!tok.empty()) models.push_back(fraccomp::model_from_tag(tok));
    pos = next + 1;
    if (next == csv.size()) break;
  }
  if (models.empty()) fraccomp::fail(fraccomp::errc::invalid_argument, "empty model list");
  return models;
}

void add_common_options(CLI::App* cmd, CliOptions& opt, bool needs_input) {
  auto* in = cmd->add_option("--input,-i", opt.input, "input CSV (or synth spec JSON)");
  if (needs_input) in->required();
  cmd->add_option("--out,-o", opt.out_dir, "output directory")->required();
  cmd->add_option("--models,-m", opt.models_csv, "comma-separated model tags (A..G)");
  cmd->add_option("--fmax", opt.f_max, "spectral cutoff in Hz (default 12)");
  cmd->add_option("--seed", opt.fit.seed, "random seed for multistart draws");
  cmd->add_option("--threads", opt.threads, "worker threads (0 = all cores)");
  cmd->add_option("--max-iter", opt.fit.max_iterations, "optimizer iteration cap");
  cmd->add_option("--multistart", opt.fit.multistart_count, "number of optimizer starts");
  cmd->add_option("--grad-tol", opt.fit.gradient_tolerance, "gradient stop tolerance");
  cmd->add_option("--step-tol", opt.fit.step_tolerance, "step stop tolerance");
  cmd->add_option("--fd-step", opt.fit.fd_relative_step, "relative finite-difference step");
  cmd->add_flag("--strict-paper-objective", opt.fit.strict_paper_im_norm,
                "normalize Im residuals per-point instead of by max|Im|");
  cmd->add_option("--bin-mmhg", opt.bin_mmhg, "pressure bin width for correlations (mmHg)");
  cmd->add_option("--bin-pwv", opt.bin_pwv, "PWV bin width for correlations (m/s)");
  cmd->add_option("--confidence", opt.confidence, "confidence level for Fisher-z intervals");
  cmd->add_flag("--raw-subjects", opt.raw_subjects, "correlate raw subjects instead of binned means");
}

fraccomp::RunManifest make_manifest(const std::string& command, const CliOptions& opt,
                                    const std::vector<fraccomp::Model>& models) {
  fraccomp::RunManifest m;
  m.command = command;
  m.input_path = opt.input;
  m.output_dir = opt.out_dir;
  m.f_max = opt.f_max;
  m.models = models;
  m.fit = opt.fit;
  m.bin_mmhg = opt.bin_mmhg;
  m.bin_pwv = opt.bin_pwv;
  m.confidence = opt.confidence;
  m.raw_subjects = opt.raw_subjects;
  m.threads = opt.threads;
  return m;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) fraccomp::fail(fraccomp::errc::invalid_argument, "cannot write '" + p.string() + "'");
  return f;
}

// ---------------------------------------------------------------------------
// synth: build a ground-truth cohort from a JSON recipe
// ---------------------------------------------------------------------------

double draw_value(const json& v, std::mt19937_64& rng) {
  if (v.is_number()) return v.get<double>();
  if (v.is_array() && v.size() == 2) {
    std::uniform_real_distribution<double> u(v[0].get<double>(), v[1].get<double>());
    return u(rng);
  }
  fraccomp::fail(fraccomp::errc::parse_error, "expected a number or [lo, hi] range");
}

int run_synth(const CliOptions& opt) {
  std::ifstream in(opt.input);
  if (!in) fraccomp::fail(fraccomp::errc::parse_error, "cannot open '" + opt.input + "'");
  json spec = json::parse(in);

  const auto model = fraccomp::model_from_tag(spec.at("model").get<std::string>());
  const std::size_t count = spec.value("count", 1u);
  const std::uint64_t seed = spec.value("seed", 1u);
  std::mt19937_64 rng(seed);

  const json theta_spec = spec.at("theta");
  if (!theta_spec.is_array() || theta_spec.size() != fraccomp::parameter_count(model))
    fraccomp::fail(fraccomp::errc::parse_error, "theta must list one entry per model parameter");
  const json flow = spec.value("flow", json::object());
  const double systole_fraction = flow.value("systole_fraction", 0.35);
  const std::size_t n_harmonics = flow.value("n_harmonics", 12u);
  std::vector<double> ages;
  if (spec.contains("age_groups"))
    for (const auto& a : spec["age_groups"]) ages.push_back(a.get<double>());

  std::vector<fraccomp::SubjectRecord> subjects;
  for (std::size_t i = 0; i < count; ++i) {
    fraccomp::SyntheticSpec s;
    s.model = model;
    for (const auto& t : theta_spec) s.theta.push_back(draw_value(t, rng));
    s.r_app = draw_value(spec.value("r_app", json(1.0)), rng);
    s.heart_rate_bpm = draw_value(spec.value("heart_rate_bpm", json(60.0)), rng);
    s.samples_per_cycle = spec.value("samples_per_cycle", 512u);
    const double peak = draw_value(flow.value("peak_ml_s", json(400.0)), rng);
    s.flow_harmonics = fraccomp::half_sine_flow_spectrum(peak, systole_fraction, n_harmonics);
    char id[32];
    std::snprintf(id, sizeof id, "s%04zu", i + 1);
    auto subj = fraccomp::synthesize_subject(s, id);
    if (!ages.empty()) subj.meta.age_group = ages[i % ages.size()];
    subjects.push_back(std::move(subj));
  }

  const auto manifest = make_manifest("synth", opt, {model});
  auto out = open_out(fs::path(opt.out_dir) / "cohort.csv");
  fraccomp::save_subjects_csv(out, subjects, fraccomp::provenance_comment(manifest));
  std::cout << "wrote " << subjects.size() << " subjects to "
            << (fs::path(opt.out_dir) / "cohort.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fit / batch / compare / correlate
// ---------------------------------------------------------------------------

int run_fit(const CliOptions& opt, const std::vector<fraccomp::Model>& models) {
  auto subjects = fraccomp::load_subjects_csv(opt.input);
  if (subjects.empty()) fraccomp::fail(fraccomp::errc::empty_input, "no subjects in input");
  const fraccomp::SubjectRecord* chosen = &subjects.front();
  if (!opt.subject_id.empty()) {
    chosen = nullptr;
    for (const auto& s : subjects)
      if (s.id == opt.subject_id) chosen = &s;
    if (!chosen)
      fraccomp::fail(fraccomp::errc::invalid_argument, "subject '" + opt.subject_id + "' not found");
  }
  const auto manifest = make_manifest("fit", opt, models);
  const auto data = fraccomp::measured_compliance(chosen->pressure, chosen->flow, opt.f_max);
  auto outcomes = fraccomp::fit_models(data, models, opt.fit);
  for (const auto& o : outcomes) {
    json j;
    j["fraccomp_version"] = FRACCOMP_VERSION;
    j["manifest"] = fraccomp::to_json(manifest);
    j["subject_id"] = chosen->id;
    j["r_app"] = data.r_app;
    if (o.ok()) {
      j.update(fraccomp::fit_result_to_json(*o.result));
      std::cout << "model " << fraccomp::model_tag(o.model) << ": rmse=" << o.result->rmse
                << " aicc=" << o.result->aicc << " deviation=" << o.result->deviation_pct
                << "%\n";
    } else {
      j["model"] = std::string(1, fraccomp::model_tag(o.model));
      j["error"] = o.error;
      std::cout << "model " << fraccomp::model_tag(o.model) << ": failed (" << o.error << ")\n";
    }
    auto f = open_out(fs::path(opt.out_dir) /
                      ("fit_" + chosen->id + "_" + std::string(1, fraccomp::model_tag(o.model)) +
                       ".json"));
    f << j.dump(2) << '\n';
  }
  return 0;
}

int run_batch(const CliOptions& opt, const std::vector<fraccomp::Model>& models,
              const std::string& command) {
  auto subjects = fraccomp::load_subjects_csv(opt.input);
  const auto manifest = make_manifest(command, opt, models);
  fraccomp::BatchOptions bopt;
  bopt.f_max = opt.f_max;
  bopt.threads = opt.threads;
  const auto batch = fraccomp::batch_fit(subjects, models, opt.fit, bopt);

  if (command == "batch") {
    {
      auto f = open_out(fs::path(opt.out_dir) / "results.csv");
      fraccomp::write_results_csv(f, batch, manifest);
    }
    {
      auto f = open_out(fs::path(opt.out_dir) / "results.json");
      fraccomp::write_results_json(f, batch, manifest);
    }
    {
      const auto groups = fraccomp::aggregate_groups(batch, subjects);
      auto f = open_out(fs::path(opt.out_dir) / "aggregates.csv");
      fraccomp::write_aggregates_csv(f, groups, manifest);
    }
    std::size_t ok = 0;
    for (const auto& r : batch.rows) ok += r.ok();
    std::cout << "batch: " << subjects.size() << " subjects x " << models.size() << " models, "
              << ok << "/" << batch.rows.size() << " fits ok\n";
  } else if (command == "compare") {
    const auto summaries = fraccomp::summarize_models(batch);
    auto f = open_out(fs::path(opt.out_dir) / "compare.csv");
    fraccomp::write_compare_csv(f, summaries, manifest);
    for (const auto& s : summaries)
      std::cout << "model " << fraccomp::model_tag(s.model) << ": mean rmse=" << s.rmse_mean
                << " mean deviation=" << s.deviation_mean << "% mean aicc=" << s.aicc_mean
                << " (" << s.n_ok << "/" << s.n_subjects << " ok)\n";
  } else {  // correlate
    fraccomp::CorrelationOptions copt;
    copt.bin_mmhg = opt.bin_mmhg;
    copt.bin_pwv = opt.bin_pwv;
    copt.confidence = opt.confidence;
    copt.raw_subjects = opt.raw_subjects;
    std::vector<std::string> diagnostics;
    const auto rows = fraccomp::correlation_table(batch, subjects, copt, &diagnostics);
    auto f = open_out(fs::path(opt.out_dir) / "correlation.csv");
    fraccomp::write_correlation_csv(f, rows, manifest);
    for (const auto& d : diagnostics) std::cerr << "note: " << d << "\n";
    std::cout << "correlate: " << rows.size() << " table rows written\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fraccomp - fractional-order apparent arterial compliance toolkit"};
  app.require_subcommand(1);

  CliOptions opt;
  auto* c_fit = app.add_subcommand("fit", "fit models to one subject, one JSON per model");
  add_common_options(c_fit, opt, true);
  c_fit->add_option("--subject", opt.subject_id, "subject id (default: first in file)");
  auto* c_batch = app.add_subcommand("batch", "fit a cohort; results table + group aggregates");
  add_common_options(c_batch, opt, true);
  auto* c_compare = app.add_subcommand("compare", "per-model mean RMSE/Deviation/AICc summary");
  add_common_options(c_compare, opt, true);
  auto* c_synth = app.add_subcommand("synth", "generate a synthetic cohort from a JSON spec");
  add_common_options(c_synth, opt, true);
  auto* c_corr = app.add_subcommand("correlate", "binned correlation of alpha/eta_r vs hemodynamics");
  add_common_options(c_corr, opt, true);
  auto* c_models = app.add_subcommand("models", "print the model catalogue as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);  // CLI11 prints usage; nonzero on error
  }

  try {
    if (c_models->parsed()) {
      std::cout << fraccomp::catalogue_to_json().dump(2) << "\n";
      return 0;
    }
    const auto models = parse_models(opt.models_csv);
    fs::create_directories(opt.out_dir);
    if (c_synth->parsed()) return run_synth(opt);
    if (c_fit->parsed()) return run_fit(opt, models);
    if (c_batch->parsed()) return run_batch(opt, models, "batch");
    if (c_compare->parsed()) return run_batch(opt, models, "compare");
    if (c_corr->parsed()) return run_batch(opt, models, "correlate");
  } catch (const fraccomp::Error& e) {
    json err{{"error", e.what()}, {"code", fraccomp::errc_name(e.code())}};
    std::cerr << err.dump() << "\n";
    return e.code() == fraccomp::errc::invalid_argument ? 2 : 1;
  } catch (const std::exception& e) {
    json err{{"error", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
