// JSON run configuration: one section per pipeline. Missing keys keep the
// library defaults; unknown keys are rejected so typos do not pass silently.

#pragma once

#include "pedinav/pdr.hpp"
#include "pedinav/sim.hpp"
#include "pedinav/smins.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace pedinav::config {

using Json = nlohmann::json;

struct PdrSection {
  pdr::PdrOptions options;
  std::optional<std::string> gains_file;
  std::optional<double> reference_distance;  // m
  std::optional<std::string> reference_track;  // CSV t,x,y
  double fs_hint = 0.0;
};

struct SminsSection {
  smins::SminsOptions options;
  std::optional<std::string> truth_file;
  std::optional<std::string> mask_file;
  bool use_mask_as_detector = false;
  double fs_hint = 0.0;
};

struct SimSection {
  sim::Scenario scenario;
  smins::SensorErrorModel sensor_errors;
  std::uint64_t error_seed = 1;
};

struct AssessSection {
  sim::ErrorBudget budget;
  double t_end = 30.0;
  double t_step = 1.0;
};

Json load_json(const std::string& path);

/// Each parser starts from `base` (the pipeline default) and applies the
/// section. Throws ValidationError on unknown keys or wrong types.
PdrSection parse_pdr(const Json& section);
SminsSection parse_smins(const Json& section);
SimSection parse_sim(const Json& section, const sim::Scenario& base);
AssessSection parse_assess(const Json& section);

/// Section `name` of the document, or an empty object.
Json section(const Json& doc, const std::string& name);

pdr::StepModel parse_step_model(const std::string& s);
std::string to_string(pdr::StepModel m);

/// Weinberg / adaptive gains file written by `pdr calibrate`.
Json gains_to_json(const pdr::StepLengthGains& g, pdr::StepModel model);
pdr::StepLengthGains gains_from_json(const Json& j);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

}  // namespace pedinav::config
