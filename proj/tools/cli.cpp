#include "cli.hpp"

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "qtomo/diagnostics.hpp"
#include "qtomo/error.hpp"
#include "qtomo/experiments.hpp"
#include "qtomo/io.hpp"
#include "qtomo/measurement.hpp"
#include "qtomo/simulation.hpp"
#include "qtomo/version.hpp"

#ifndef QTOMO_EXPERIMENTS_DIR
#define QTOMO_EXPERIMENTS_DIR "experiments"
#endif

namespace qtomo::cli {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::uint64_t parse_seed(const std::string& text, const std::string& source) {
  try {
    size_t used = 0;
    const unsigned long long v = std::stoull(text, &used, 0);
    if (used != text.size() || text.front() == '-') throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError(source + ": '" + text + "' is not an unsigned 64-bit seed");
  }
}

// --seed, then TOMO_SEED, then fresh entropy.
std::uint64_t resolve_seed(const std::optional<std::string>& flag) {
  if (flag) return parse_seed(*flag, "--seed");
  if (const char* env = std::getenv("TOMO_SEED"); env && *env) return parse_seed(env, "TOMO_SEED");
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

Json load(const std::string& path) {
  try {
    return read_json_file(path);
  } catch (const IoError& e) {
    throw UsageError(e.what());
  }
}

// Unwraps files that carry the tool envelope around a single payload.
const Json& payload(const Json& j, const char* key) {
  if (j.is_object() && j.contains(key) && j.at(key).is_object()) return j.at(key);
  return j;
}

void emit(const Json& value, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-")
    out << value.dump(2) << '\n';
  else
    write_json_file(path, value);
}

// ---------------------------------------------------------------- sets

struct SetsArgs {
  std::string name;
  std::string out;
};

int cmd_sets(const SetsArgs& a, std::ostream& out) {
  if (a.name == "list") {
    for (const auto& name : catalogue_names()) {
      const ProjectorSet set = named_set(name);
      out << name << "  d=" << set.dim() << "  M=" << set.size() << "  " << to_string(classify_completeness(set))
          << '\n';
    }
    return kSuccess;
  }
  const ProjectorSet set = named_set(a.name);
  Json body = to_json(set);
  body["completeness"] = to_string(classify_completeness(set));
  emit(with_envelope(body, std::nullopt), a.out, out);
  return kSuccess;
}

// ------------------------------------------------------------ simulate

struct SimulateArgs {
  std::string state;
  std::string set;
  double flux = 2000.0;
  double drift = 0.0;
  double period = 9.5;
  std::optional<double> phase;
  std::optional<std::string> seed;
  std::string out;
};

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--state: '" + item + "' is not a number");
    }
  }
  return v;
}

// A JSON state file, or an ensemble draw written as kind[:p] or kind[:p_min,p_max].
DensityMatrix resolve_state(const std::string& spec, int dim, Rng& rng) {
  if (fs::exists(spec)) return density_matrix_from_json(payload(load(spec), "state"));
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::vector<double> args = colon == std::string::npos ? std::vector<double>{} : parse_numbers(spec.substr(colon + 1));
  if (kind == "maximally_mixed" && args.empty()) return maximally_mixed(dim);
  if (kind == "haar_pure" && args.empty()) return haar_pure(dim, rng);
  StateEnsembleSpec e;
  e.dim = dim;
  try {
    e.kind = ensemble_kind_from_string(kind);
  } catch (const DomainError&) {
    throw UsageError("--state: '" + spec + "' is neither a file nor a known ensemble");
  }
  if (args.size() == 1) {
    e.p_min = e.p_max = args[0];
  } else if (args.size() == 2) {
    e.p_min = args[0];
    e.p_max = args[1];
  } else if (!args.empty()) {
    throw UsageError("--state: expected kind:p or kind:p_min,p_max");
  }
  e.validate();
  return draw_state(e, rng).state;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(a.seed);
  out << "seed=" << seed << '\n';
  const ProjectorSet set = named_set(a.set);
  Rng rng(seed);
  const DensityMatrix state = resolve_state(a.state, set.dim(), rng);
  if (state.dim() != set.dim()) throw UsageError("state dimension does not match set '" + a.set + "'");
  NoiseConfig noise;
  noise.drift_ratio = a.drift;
  noise.drift_period = a.period;
  noise.drift_phase = a.phase;
  const CountDataset data = simulate_dataset(state, set, a.flux, noise, rng);
  write_json_file(a.out, with_envelope(to_json(data), seed));
  out << "wrote " << a.out << " (" << set.size() << " settings, " << static_cast<std::int64_t>(data.total_counts())
      << " counts)\n";
  return kSuccess;
}

// --------------------------------------------------------- reconstruct

struct ReconstructArgs {
  std::string data;
  std::string method = "mle";
  std::string out;
  int max_iterations = OptimizerOptions{}.max_iterations;
};

std::optional<std::uint64_t> dataset_seed(const CountDataset& data) {
  if (data.provenance && data.provenance->seed) return data.provenance->seed;
  return std::nullopt;
}

int cmd_reconstruct(const ReconstructArgs& a, std::ostream& out, std::ostream& err) {
  const CountDataset data = count_dataset_from_json(payload(load(a.data), "dataset"));
  const auto seed = dataset_seed(data);
  out << "seed=" << (seed ? std::to_string(*seed) : std::string("none")) << '\n';

  if (a.method == "linear") {
    const ComplexMatrix estimate = linear_inversion(data, data.set);
    Json body;
    body["method"] = "linear";
    body["dim"] = data.dim();
    body["estimate"] = matrix_to_json(estimate);
    body["trace"] = estimate.trace().real();
    body["min_eigenvalue"] = eigenvalues_hermitian(estimate).minCoeff();
    body["objective"] = objective(data, estimate, denominator_floor(data));
    write_json_file(a.out, with_envelope(body, seed));
    out << "trace=" << fmt("%.6g", body["trace"].get<double>())
        << " min_eigenvalue=" << fmt("%.6g", body["min_eigenvalue"].get<double>()) << '\n';
    return kSuccess;
  }
  if (a.method != "mle") throw UsageError("--method must be mle or linear");

  OptimizerOptions options;
  options.max_iterations = a.max_iterations;
  const ReconstructionResult result = mle_reconstruct(data, data.set, options);
  Json body = to_json(result);
  body["method"] = "mle";
  write_json_file(a.out, with_envelope(body, seed));
  out << "objective=" << fmt("%.6g", result.objective) << " iterations=" << result.iterations
      << " trace=" << fmt("%.6g", result.estimate.trace()) << " converged=" << (result.converged ? "yes" : "no")
      << '\n';
  if (!result.converged) {
    err << "qtomo: reconstruction did not converge within " << a.max_iterations << " iterations\n";
    return kNotConverged;
  }
  return kSuccess;
}

// ------------------------------------------------------------ diagnose

struct DiagnoseArgs {
  std::string data;
  std::string recon;
  std::string method = "rank";
  std::vector<double> confidence{0.95, 0.99};
  int mc_samples = 100;
  double threshold = kDefaultRankThreshold;
  std::optional<std::string> seed;
  std::string out;
};

std::string level_tag(double level) { return "p" + fmt("%g", level * 100.0); }

int cmd_diagnose(const DiagnoseArgs& a, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = resolve_seed(a.seed);
  out << "seed=" << seed << '\n';
  const CountDataset data = count_dataset_from_json(payload(load(a.data), "dataset"));
  const Json recon_json = load(a.recon);
  if (recon_json.value("method", std::string("mle")) != "mle")
    throw UsageError("diagnosis needs an MLE reconstruction, not '" + recon_json.value("method", std::string()) + "'");
  const ReconstructionResult recon = reconstruction_from_json(recon_json);
  if (!recon.converged) {
    err << "qtomo: the reconstruction in '" << a.recon << "' did not converge\n";
    return kNotConverged;
  }

  DiagnosisConfig config;
  config.method = diagnosis_method_from_string(a.method);
  config.confidence_levels = a.confidence;
  config.mc_samples = a.mc_samples;
  config.threshold = a.threshold;
  config.seed = seed;
  const DiagnosisReport report = diagnose(data, recon, config);

  out << "X2=" << fmt("%.3f", report.chi_squared) << " rank=" << report.effective_rank << " dof=" << report.dof
      << " Q=" << (report.quality ? fmt("%.3f", *report.quality) : std::string("n/a"));
  for (size_t i = 0; i < report.confidence_levels.size(); ++i)
    out << ' ' << level_tag(report.confidence_levels[i]) << '=' << (report.flagged[i] ? "FLAG" : "ok");
  if (report.p_value) out << " p=" << fmt("%.4f", *report.p_value);
  if (report.kappa_bar) out << " kappa_bar=" << fmt("%.3f", *report.kappa_bar);
  out << '\n';
  if (report.low_count_warning) err << "qtomo: warning: some expected counts are below 5\n";

  if (!a.out.empty()) write_json_file(a.out, with_envelope(to_json(report), seed));
  return kSuccess;
}

// ------------------------------------------------------------ ensemble

struct EnsembleArgs {
  std::string spec;
  int parallel = 1;
  std::optional<std::string> seed;
  std::string outdir = ".";
};

// Bare names such as "drift_sweep" resolve to the bundled experiment files.
std::string locate_spec(const std::string& spec) {
  if (fs::exists(spec)) return spec;
  const fs::path bundled = fs::path(QTOMO_EXPERIMENTS_DIR) / (spec + ".json");
  if (spec.find('/') == std::string::npos && fs::exists(bundled)) return bundled.string();
  throw UsageError("cannot open experiment spec '" + spec + "'");
}

bool wants(const ExperimentSpec& spec, const char* output) {
  return std::find(spec.outputs.begin(), spec.outputs.end(), output) != spec.outputs.end();
}

int cmd_ensemble(const EnsembleArgs& a, std::ostream& out) {
  if (a.parallel < 1) throw UsageError("--parallel must be at least 1");
  const std::uint64_t seed = resolve_seed(a.seed);
  out << "seed=" << seed << '\n';
  const StudySpec study = study_from_json(load(locate_spec(a.spec)));
  fs::create_directories(a.outdir);
  const fs::path dir(a.outdir);

  if (study.purity_sweep) {
    PuritySweepOptions options = study.purity_sweep->options;
    options.seed = seed;
    options.parallelism = a.parallel;
    const auto points = werner_purity_sweep(study.purity_sweep->sets, study.purity_sweep->p_grid, options);
    write_text_file((dir / (study.name + "_sweep.csv")).string(), purity_sweep_csv(points));
    Json body;
    body["name"] = study.name;
    body["points"] = to_json(points);
    write_json_file((dir / (study.name + "_summary.json")).string(), with_envelope(body, seed));
    for (const auto& p : points)
      out << p.set << " p=" << fmt("%.3g", p.p) << " mean_X2=" << fmt("%.3f", p.mean_chi_squared)
          << " full_rank=" << fmt("%.3f", p.full_rank_fraction) << " fidelity=" << fmt("%.4f", p.mean_fidelity) << '\n';
    return kSuccess;
  }

  for (size_t k = 0; k < study.experiments.size(); ++k) {
    const ExperimentSpec& spec = study.experiments[k];
    const std::uint64_t s = study.experiments.size() == 1 ? seed : derive_seed(seed, k);
    const ExperimentResult result = run_experiment(spec, a.parallel, s);
    if (wants(spec, "summary"))
      write_json_file((dir / (spec.name + "_summary.json")).string(), summary_to_json(result));
    if (wants(spec, "runs")) write_text_file((dir / (spec.name + "_runs.csv")).string(), runs_csv(result));
    for (const auto& p : result.points) {
      out << spec.name << " r=" << fmt("%g", p.drift_ratio) << " included=" << p.included << '/' << p.repetitions
          << " mean_X2=" << fmt("%.3f", p.mean_chi_squared) << " sd_X2=" << fmt("%.3f", p.sd_chi_squared)
          << " full_rank=" << fmt("%.3f", p.full_rank_fraction);
      for (const auto& f : p.flag_rates)
        for (size_t i = 0; i < f.levels.size(); ++i)
          out << ' ' << (f.method == DiagnosisMethod::rank_counting ? "rank"
                         : f.method == DiagnosisMethod::naive  ? "naive"
                                                               : "mc")
              << '_' << level_tag(f.levels[i]) << '=' << fmt("%.4f", f.rates[i]);
      out << '\n';
    }
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum state tomography with rank-aware goodness-of-fit diagnostics", "qtomo"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  SetsArgs sets;
  auto* sets_cmd = app.add_subcommand("sets", "Print a named projector set, or `list` for the catalogue");
  sets_cmd->add_option("name", sets.name, "Set expression or `list`")->required();
  sets_cmd->add_option("--out", sets.out, "Write the set JSON here instead of standard output");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a count dataset");
  sim_cmd->add_option("--state", sim.state, "State JSON file, or kind[:p] / kind[:pmin,pmax]")->required();
  sim_cmd->add_option("--set", sim.set, "Projector set expression")->required();
  sim_cmd->add_option("--flux", sim.flux, "Mean flux (trace of the unnormalised state)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sim_cmd->add_option("--drift", sim.drift, "Relative drift-noise ratio")->check(CLI::NonNegativeNumber)->capture_default_str();
  sim_cmd->add_option("--period", sim.period, "Drift period in settings")->check(CLI::PositiveNumber)->capture_default_str();
  sim_cmd->add_option("--phase", sim.phase, "Drift phase in radians (random when omitted)");
  sim_cmd->add_option("--seed", sim.seed, "Master seed (default: TOMO_SEED, then random)");
  sim_cmd->add_option("--out", sim.out, "Output dataset JSON")->required();

  ReconstructArgs rec;
  auto* rec_cmd = app.add_subcommand("reconstruct", "Reconstruct a density matrix from a dataset");
  rec_cmd->add_option("--data", rec.data, "Dataset JSON")->required();
  rec_cmd->add_option("--method", rec.method, "mle or linear")->check(CLI::IsMember({"mle", "linear"}))->capture_default_str();
  rec_cmd->add_option("--out", rec.out, "Output reconstruction JSON")->required();
  rec_cmd->add_option("--max-iterations", rec.max_iterations, "Optimizer iteration budget")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  DiagnoseArgs diag;
  auto* diag_cmd = app.add_subcommand("diagnose", "Grade a reconstruction with the X^2 test");
  diag_cmd->add_option("--data", diag.data, "Dataset JSON")->required();
  diag_cmd->add_option("--recon", diag.recon, "MLE reconstruction JSON")->required();
  diag_cmd->add_option("--method", diag.method, "rank, mc or naive")
      ->check(CLI::IsMember({"rank", "mc", "naive"}))
      ->capture_default_str();
  diag_cmd->add_option("--confidence", diag.confidence, "Comma-separated confidence levels")
      ->delimiter(',')
      ->capture_default_str();
  diag_cmd->add_option("--mc-samples", diag.mc_samples, "Monte-Carlo resimulations")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  diag_cmd->add_option("--threshold", diag.threshold, "Eigenvalue threshold for rank counting")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  diag_cmd->add_option("--seed", diag.seed, "Seed for Monte-Carlo resimulation");
  diag_cmd->add_option("--out", diag.out, "Output report JSON");

  EnsembleArgs ens;
  auto* ens_cmd = app.add_subcommand("ensemble", "Run an experiment spec");
  ens_cmd->add_option("--spec", ens.spec, "Experiment JSON, or a bundled name such as drift_sweep")->required();
  ens_cmd->add_option("--parallel", ens.parallel, "Worker threads")->capture_default_str();
  ens_cmd->add_option("--seed", ens.seed, "Master seed (default: TOMO_SEED, then random)");
  ens_cmd->add_option("--outdir", ens.outdir, "Directory for summary JSON and per-run CSV")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (sets_cmd->parsed()) return cmd_sets(sets, out);
    if (sim_cmd->parsed()) return cmd_simulate(sim, out);
    if (rec_cmd->parsed()) return cmd_reconstruct(rec, out, err);
    if (diag_cmd->parsed()) return cmd_diagnose(diag, out, err);
    if (ens_cmd->parsed()) return cmd_ensemble(ens, out);
  } catch (const UsageError& e) {
    err << "qtomo: " << e.what() << '\n';
    return kUsageError;
  } catch (const DomainError& e) {
    err << "qtomo: " << e.what() << '\n';
    return kUsageError;
  } catch (const Json::exception& e) {
    err << "qtomo: malformed input: " << e.what() << '\n';
    return kUsageError;
  } catch (const ConvergenceError& e) {
    err << "qtomo: " << e.what() << '\n';
    return kNotConverged;
  } catch (const std::exception& e) {
    err << "qtomo: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kUsageError;
}

}  // namespace qtomo::cli
