#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qtomo/diagnostics.hpp"
#include "qtomo/experiments.hpp"

namespace qtomo {

using Json = nlohmann::ordered_json;

// A file could not be read, parsed or written.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

Json read_json_file(const std::string& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const std::string& path, const Json& value);
void write_text_file(const std::string& path, const std::string& text);

/// Adds "tool_version" and "seed" (null when unknown) as the first keys.
Json with_envelope(const Json& body, std::optional<std::uint64_t> seed);

/// Complex matrices are nested [re, im] pairs, row-major.
Json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const Json& j);

Json to_json(const DensityMatrix& state);
DensityMatrix density_matrix_from_json(const Json& j);

/// {"name", "dim", "labels", "projectors"}.
Json to_json(const ProjectorSet& set);
ProjectorSet projector_set_from_json(const Json& j);

/// The "set" entry is {"name": expr} when the set is a catalogue expression
/// and the full inline form otherwise. Readers accept either, or a bare string.
Json to_json(const CountDataset& dataset);
CountDataset count_dataset_from_json(const Json& j);

Json to_json(const ReconstructionResult& result);
ReconstructionResult reconstruction_from_json(const Json& j);

Json to_json(const DiagnosisReport& report);

Json to_json(const ExperimentSpec& spec);
ExperimentSpec experiment_spec_from_json(const Json& j);

struct PuritySweepSpec {
  std::string name = "purity_sweep";
  std::vector<std::string> sets;
  std::vector<double> p_grid;
  PuritySweepOptions options;
};

/// Contents of an experiment file: one experiment, a batch under
/// "experiments", or a purity sweep ("kind": "purity_sweep").
struct StudySpec {
  std::string name;
  std::vector<ExperimentSpec> experiments;
  std::optional<PuritySweepSpec> purity_sweep;
};

StudySpec study_from_json(const Json& j);

/// Summaries for every sweep point, without the per-run records.
Json summary_to_json(const ExperimentResult& result);
Json to_json(const std::vector<PuritySweepPoint>& points);

}  // namespace qtomo
