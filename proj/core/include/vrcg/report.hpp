#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "vrcg/experiment.hpp"

namespace vrcg {

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
void write_trials_csv(std::ostream& out, const std::vector<TrialRow>& rows);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Writes `content` to `path`, throwing std::runtime_error on failure.
void write_text_file(const std::string& path, const std::string& content);

/// Parses `key = value` lines; blank lines and lines starting with '#' are
/// skipped. Keys may be written with dashes or underscores and an optional
/// leading "--". Throws std::runtime_error on a malformed line.
std::map<std::string, std::string> parse_key_values(const std::string& text);
std::map<std::string, std::string> read_key_value_file(const std::string& path);

/// Applies recognised keys to `config`; throws std::invalid_argument on an
/// unknown key or unparsable value.
void apply_config_values(const std::map<std::string, std::string>& values,
                         ExperimentConfig& config);

}  // namespace vrcg
