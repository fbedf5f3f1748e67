#include "qtomo/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "qtomo/error.hpp"
#include "qtomo/version.hpp"

namespace qtomo {

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw IoError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_json_file(const std::string& path, const Json& value) { write_text_file(path, value.dump(2) + "\n"); }

Json with_envelope(const Json& body, std::optional<std::uint64_t> seed) {
  Json out;
  out["tool_version"] = kVersion;
  out["seed"] = seed ? Json(*seed) : Json(nullptr);
  for (const auto& [key, value] : body.items())
    if (key != "tool_version" && key != "seed") out[key] = value;
  return out;
}

namespace {

// Field access with errors that name the missing key.
const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw DomainError(std::string("missing field '") + key + "'");
  return j.at(key);
}

template <typename T>
T get(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const Json::exception&) {
    throw DomainError(std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  return get<T>(j, key);
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& context) {
  if (!j.is_object()) throw DomainError(context + " must be a JSON object");
  std::set<std::string> ok;
  for (const char* k : allowed) ok.insert(k);
  for (const auto& [key, value] : j.items())
    if (!ok.count(key)) throw DomainError("unknown key '" + key + "' in " + context);
}

std::optional<double> optional_number(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get<double>(j, key);
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Json matrix_to_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw DomainError("matrix must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  ComplexMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j.at(static_cast<size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw DomainError("matrix rows differ in length");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& e = row.at(static_cast<size_t>(c));
      if (e.is_number()) {
        m(r, c) = Complex(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        throw DomainError("matrix entries must be numbers or [re, im] pairs");
      }
    }
  }
  return m;
}

Json to_json(const DensityMatrix& state) {
  Json j;
  j["dim"] = state.dim();
  j["trace"] = state.trace();
  j["matrix"] = matrix_to_json(state.matrix());
  return j;
}

DensityMatrix density_matrix_from_json(const Json& j) {
  const Json& m = j.is_object() ? field(j, "matrix") : j;
  ComplexMatrix matrix = matrix_from_json(m);
  if (matrix.rows() != matrix.cols()) throw DomainError("density matrix must be square");
  if (j.is_object() && j.contains("dim") && get<int>(j, "dim") != matrix.rows())
    throw DomainError("density matrix 'dim' does not match its entries");
  return DensityMatrix(matrix);
}

Json to_json(const ProjectorSet& set) {
  Json j;
  j["name"] = set.name();
  j["dim"] = set.dim();
  j["labels"] = set.labels();
  Json projectors = Json::array();
  for (const auto& p : set.projectors()) projectors.push_back(matrix_to_json(p));
  j["projectors"] = std::move(projectors);
  return j;
}

ProjectorSet projector_set_from_json(const Json& j) {
  const int dim = get<int>(j, "dim");
  const Json& list = field(j, "projectors");
  if (!list.is_array() || list.empty()) throw DomainError("'projectors' must be a non-empty array");
  std::vector<ComplexMatrix> projectors;
  for (const auto& p : list) {
    projectors.push_back(matrix_from_json(p));
    if (projectors.back().rows() != dim || projectors.back().cols() != dim)
      throw DomainError("projector dimension does not match 'dim'");
  }
  std::vector<std::string> labels;
  if (j.contains("labels")) {
    labels = get<std::vector<std::string>>(j, "labels");
  } else {
    for (size_t i = 0; i < projectors.size(); ++i) labels.push_back("P" + std::to_string(i));
  }
  if (labels.size() != projectors.size()) throw DomainError("one label per projector required");
  return ProjectorSet::from_projectors(dim, projectors, std::move(labels), get_or<std::string>(j, "name", ""));
}

namespace {

bool is_catalogue_set(const ProjectorSet& set) {
  if (set.name().empty()) return false;
  try {
    const ProjectorSet ref = named_set(set.name());
    if (ref.dim() != set.dim() || ref.size() != set.size()) return false;
    for (int i = 0; i < set.size(); ++i)
      if ((ref.projectors()[static_cast<size_t>(i)] - set.projectors()[static_cast<size_t>(i)]).norm() > 1e-12)
        return false;
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

ProjectorSet set_from_json(const Json& j) {
  if (j.is_string()) return named_set(j.get<std::string>());
  if (j.is_object() && j.contains("name") && !j.contains("projectors")) return named_set(get<std::string>(j, "name"));
  return projector_set_from_json(j);
}

}  // namespace

Json to_json(const CountDataset& dataset) {
  Json j;
  j["dim"] = dataset.dim();
  j["set"] = is_catalogue_set(dataset.set) ? Json{{"name", dataset.set.name()}} : to_json(dataset.set);
  j["counts"] = dataset.counts;
  j["mean_flux"] = optional_json(dataset.mean_flux);
  if (dataset.provenance) {
    const Provenance& p = *dataset.provenance;
    Json prov;
    prov["seed"] = p.seed ? Json(*p.seed) : Json(nullptr);
    prov["drift_ratio"] = p.drift_ratio;
    prov["drift_period"] = p.drift_period;
    prov["drift_phase"] = optional_json(p.drift_phase);
    prov["generator"] = p.generator;
    j["provenance"] = std::move(prov);
  } else {
    j["provenance"] = nullptr;
  }
  return j;
}

CountDataset count_dataset_from_json(const Json& j) {
  ProjectorSet set = set_from_json(field(j, "set"));
  if (j.contains("dim") && get<int>(j, "dim") != set.dim()) throw DomainError("dataset 'dim' does not match its set");
  CountDataset data{set, get<std::vector<std::int64_t>>(j, "counts"), optional_number(j, "mean_flux"), std::nullopt};
  if (j.contains("provenance") && !j.at("provenance").is_null()) {
    const Json& pj = j.at("provenance");
    Provenance p;
    if (pj.contains("seed") && !pj.at("seed").is_null()) p.seed = get<std::uint64_t>(pj, "seed");
    p.drift_ratio = get_or<double>(pj, "drift_ratio", 0.0);
    p.drift_period = get_or<double>(pj, "drift_period", 0.0);
    p.drift_phase = optional_number(pj, "drift_phase");
    p.generator = get_or<std::string>(pj, "generator", "");
    data.provenance = p;
  }
  data.validate();
  return data;
}

Json to_json(const ReconstructionResult& result) {
  Json j;
  j["dim"] = result.estimate.dim();
  j["estimate"] = matrix_to_json(result.estimate.matrix());
  j["trace"] = result.estimate.trace();
  j["objective"] = result.objective;
  j["residuals"] = result.residuals;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["gradient_mapping_norm"] = result.gradient_mapping_norm;
  return j;
}

ReconstructionResult reconstruction_from_json(const Json& j) {
  ReconstructionResult r{DensityMatrix(matrix_from_json(field(j, "estimate"))), {}, 0.0, 0, false, 0.0, {}};
  r.residuals = get_or<std::vector<double>>(j, "residuals", {});
  r.objective = get_or<double>(j, "objective", 0.0);
  r.iterations = get_or<int>(j, "iterations", 0);
  r.converged = get_or<bool>(j, "converged", false);
  r.gradient_mapping_norm = get_or<double>(j, "gradient_mapping_norm", 0.0);
  return r;
}

Json to_json(const DiagnosisReport& report) {
  Json j;
  j["method"] = to_string(report.method);
  j["dim"] = report.dim;
  j["settings"] = report.settings;
  j["chi_squared"] = report.chi_squared;
  j["effective_rank"] = report.effective_rank;
  j["constraints"] = report.constraints;
  j["dof"] = report.dof;
  j["quality"] = optional_json(report.quality);
  j["perfect_fit"] = report.perfect_fit;
  j["variance_corrected_width"] = report.variance_corrected_width;
  j["low_count_warning"] = report.low_count_warning;
  Json levels = Json::array();
  for (size_t i = 0; i < report.confidence_levels.size(); ++i)
    levels.push_back({{"confidence", report.confidence_levels[i]},
                      {"cutoff", report.cutoffs[i]},
                      {"flagged", static_cast<bool>(report.flagged[i])}});
  j["levels"] = std::move(levels);
  if (report.method == DiagnosisMethod::monte_carlo) {
    j["p_value"] = optional_json(report.p_value);
    j["kappa_bar"] = optional_json(report.kappa_bar);
    j["quality_bar"] = optional_json(report.quality_bar);
    if (report.weights) {
      j["weights"] = report.weights->weights;
      j["mc_samples"] = report.weights->samples;
      j["mc_excluded"] = report.weights->excluded;
    }
  }
  return j;
}

namespace {

Json noise_to_json(const NoiseConfig& n) {
  return Json{{"drift_ratio", n.drift_ratio},
              {"drift_period", n.drift_period},
              {"drift_phase", n.drift_phase ? Json(*n.drift_phase) : Json("random")}};
}

NoiseConfig noise_from_json(const Json& j) {
  check_keys(j, {"drift_ratio", "drift_period", "drift_phase"}, "noise");
  NoiseConfig n;
  n.drift_ratio = get_or<double>(j, "drift_ratio", n.drift_ratio);
  n.drift_period = get_or<double>(j, "drift_period", n.drift_period);
  if (j.contains("drift_phase") && !j.at("drift_phase").is_null() &&
      !(j.at("drift_phase").is_string() && j.at("drift_phase").get<std::string>() == "random"))
    n.drift_phase = get<double>(j, "drift_phase");
  n.validate();
  return n;
}

Json ensemble_to_json(const StateEnsembleSpec& e) {
  Json j{{"kind", to_string(e.kind)}, {"dim", e.dim}};
  if (e.kind != EnsembleKind::rank_biased) j["p_range"] = {e.p_min, e.p_max};
  return j;
}

StateEnsembleSpec ensemble_from_json(const Json& j) {
  check_keys(j, {"kind", "dim", "p_range"}, "ensemble");
  StateEnsembleSpec e;
  e.kind = ensemble_kind_from_string(get<std::string>(j, "kind"));
  e.dim = get_or<int>(j, "dim", e.kind == EnsembleKind::werner_two_qubit ? 4 : e.dim);
  if (j.contains("p_range")) {
    const auto range = get<std::vector<double>>(j, "p_range");
    if (range.size() != 2) throw DomainError("'p_range' must be [p_min, p_max]");
    e.p_min = range[0];
    e.p_max = range[1];
  }
  e.validate();
  return e;
}

std::string method_name(DiagnosisMethod m) {
  switch (m) {
    case DiagnosisMethod::rank_counting: return "rank";
    case DiagnosisMethod::naive: return "naive";
    case DiagnosisMethod::monte_carlo: return "mc";
  }
  return "unknown";
}

Json diagnostics_to_json(const std::vector<DiagnosisMethod>& methods, const DiagnosisConfig& c) {
  Json names = Json::array();
  for (auto m : methods) names.push_back(method_name(m));
  return Json{{"methods", names},
              {"confidence", c.confidence_levels},
              {"threshold", c.threshold},
              {"mc_samples", c.mc_samples}};
}

void diagnostics_from_json(const Json& j, std::vector<DiagnosisMethod>* methods, DiagnosisConfig& c) {
  check_keys(j, {"methods", "confidence", "threshold", "mc_samples"}, "diagnostics");
  if (methods && j.contains("methods")) {
    methods->clear();
    for (const auto& name : get<std::vector<std::string>>(j, "methods"))
      methods->push_back(diagnosis_method_from_string(name));
  }
  c.confidence_levels = get_or<std::vector<double>>(j, "confidence", c.confidence_levels);
  c.threshold = get_or<double>(j, "threshold", c.threshold);
  c.mc_samples = get_or<int>(j, "mc_samples", c.mc_samples);
  c.validate();
}

}  // namespace

Json to_json(const ExperimentSpec& spec) {
  Json j;
  j["name"] = spec.name;
  j["ensemble"] = ensemble_to_json(spec.ensemble);
  j["set"] = spec.set;
  j["mean_flux"] = spec.mean_flux;
  j["noise"] = noise_to_json(spec.noise);
  if (!spec.drift_ratios.empty()) j["drift_ratios"] = spec.drift_ratios;
  j["repetitions"] = spec.repetitions;
  j["diagnostics"] = diagnostics_to_json(spec.methods, spec.diagnostics);
  j["outputs"] = spec.outputs;
  return j;
}

ExperimentSpec experiment_spec_from_json(const Json& j) {
  check_keys(j, {"name", "ensemble", "set", "mean_flux", "noise", "drift_ratios", "repetitions", "diagnostics",
                 "outputs", "description"},
             "experiment");
  ExperimentSpec s;
  s.name = get<std::string>(j, "name");
  s.ensemble = ensemble_from_json(field(j, "ensemble"));
  s.set = get<std::string>(j, "set");
  s.mean_flux = get_or<double>(j, "mean_flux", s.mean_flux);
  if (j.contains("noise")) s.noise = noise_from_json(j.at("noise"));
  s.drift_ratios = get_or<std::vector<double>>(j, "drift_ratios", {});
  s.repetitions = get_or<int>(j, "repetitions", s.repetitions);
  if (j.contains("diagnostics")) diagnostics_from_json(j.at("diagnostics"), &s.methods, s.diagnostics);
  s.outputs = get_or<std::vector<std::string>>(j, "outputs", s.outputs);
  s.validate();
  return s;
}

StudySpec study_from_json(const Json& j) {
  if (!j.is_object()) throw DomainError("experiment file must hold a JSON object");
  StudySpec study;
  const std::string kind = get_or<std::string>(j, "kind", "ensemble");
  if (kind == "purity_sweep") {
    check_keys(j, {"kind", "name", "description", "sets", "p_grid", "repetitions", "baseline_flux",
                   "reference_settings", "diagnostics"},
               "purity sweep");
    PuritySweepSpec sweep;
    sweep.name = get<std::string>(j, "name");
    sweep.sets = get<std::vector<std::string>>(j, "sets");
    sweep.p_grid = get<std::vector<double>>(j, "p_grid");
    sweep.options.repetitions = get_or<int>(j, "repetitions", sweep.options.repetitions);
    sweep.options.baseline_flux = get_or<double>(j, "baseline_flux", sweep.options.baseline_flux);
    sweep.options.reference_settings = get_or<int>(j, "reference_settings", sweep.options.reference_settings);
    if (j.contains("diagnostics")) diagnostics_from_json(j.at("diagnostics"), nullptr, sweep.options.diagnostics);
    if (sweep.sets.empty() || sweep.p_grid.empty()) throw DomainError("purity sweep needs sets and a p grid");
    if (sweep.options.repetitions < 1) throw DomainError("repetitions must be at least 1");
    for (const auto& s : sweep.sets) named_set(s);
    study.name = sweep.name;
    study.purity_sweep = std::move(sweep);
    return study;
  }
  if (kind != "ensemble") throw DomainError("unknown experiment kind '" + kind + "'");
  if (j.contains("experiments")) {
    check_keys(j, {"kind", "name", "description", "experiments"}, "experiment batch");
    study.name = get<std::string>(j, "name");
    for (const auto& e : field(j, "experiments")) study.experiments.push_back(experiment_spec_from_json(e));
    if (study.experiments.empty()) throw DomainError("experiment batch is empty");
  } else {
    Json single = j;
    single.erase("kind");
    study.experiments.push_back(experiment_spec_from_json(single));
    study.name = study.experiments.front().name;
  }
  return study;
}

namespace {

Json histogram_json(const Histogram& h) { return Json{{"edges", h.edges}, {"counts", h.counts}}; }

Json summary_point_json(const EnsembleSummary& s) {
  Json j;
  j["drift_ratio"] = s.drift_ratio;
  j["repetitions"] = s.repetitions;
  j["included"] = s.included;
  j["excluded"] = s.excluded;
  j["exclusions"] = s.exclusions;
  j["mean_chi_squared"] = s.mean_chi_squared;
  j["sd_chi_squared"] = s.sd_chi_squared;
  j["full_rank_fraction"] = s.full_rank_fraction;
  j["mean_fidelity"] = s.mean_fidelity;
  j["mean_target_purity"] = s.mean_target_purity;
  j["chi_squared_edges"] = s.chi_squared_edges;
  Json ranks = Json::array();
  for (const auto& g : s.ranks)
    ranks.push_back({{"rank", g.rank},
                     {"dof", g.dof},
                     {"count", g.count},
                     {"mean_chi_squared", g.mean_chi_squared},
                     {"sd_chi_squared", g.sd_chi_squared},
                     {"histogram", g.histogram}});
  j["ranks"] = std::move(ranks);
  Json flags = Json::array();
  for (const auto& f : s.flag_rates) {
    Json levels = Json::array();
    for (size_t k = 0; k < f.levels.size(); ++k)
      levels.push_back({{"confidence", f.levels[k]}, {"flagged", f.flagged[k]}, {"rate", f.rates[k]}});
    flags.push_back({{"method", method_name(f.method)}, {"levels", levels}});
  }
  j["flag_rates"] = std::move(flags);
  j["eigenvalue_log10"] = histogram_json(s.eigenvalue_log10);
  j["eigenvalues_below"] = s.eigenvalues_below;
  return j;
}

}  // namespace

Json summary_to_json(const ExperimentResult& result) {
  Json j;
  j["experiment"] = to_json(result.spec);
  j["dim"] = result.dim;
  j["settings"] = result.settings;
  Json points = Json::array();
  for (const auto& p : result.points) points.push_back(summary_point_json(p));
  j["points"] = std::move(points);
  return with_envelope(j, result.seed);
}

Json to_json(const std::vector<PuritySweepPoint>& points) {
  Json arr = Json::array();
  for (const auto& p : points)
    arr.push_back({{"set", p.set},
                   {"settings", p.settings},
                   {"p", p.p},
                   {"mean_flux", p.mean_flux},
                   {"included", p.included},
                   {"mean_chi_squared", p.mean_chi_squared},
                   {"sd_chi_squared", p.sd_chi_squared},
                   {"full_rank_fraction", p.full_rank_fraction},
                   {"mean_fidelity", p.mean_fidelity}});
  return arr;
}

}  // namespace qtomo
