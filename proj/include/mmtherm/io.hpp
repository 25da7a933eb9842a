// SPDX-License-Identifier: Apache-2.0
//
// Run configuration for the command-line tool, key=value config files and
// file output.
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mmtherm/errors.hpp"
#include "mmtherm/measure.hpp"
#include "mmtherm/metric.hpp"

namespace mmtherm {

/// Malformed or out-of-range configuration value.
struct ConfigError : Error {
  using Error::Error;
};

struct RunConfig {
  std::string scenario;
  std::optional<MetricKind> kind;  // scenario default when empty
  std::string beta = "0:10:0.5";
  double h = 1.0;
  std::string format = "csv";
  std::string out;  // empty or "-" writes to stdout
  double tol = 1e-10;
  std::size_t grid = 201;
  bool shrink_limit = false;
  std::string sequence;

  std::vector<double> betas() const;
  /// Throws ConfigError unless β ≥ 0, step > 0, tol ∈ (0, 1e-2], grid ≥ 3 and format is csv or json.
  void validate() const;
};

/// Lines of `key = value`; blank lines and `#` comments are skipped.
std::map<std::string, std::string> parse_key_values(const std::string& text);

/// Overwrites the fields named in `kv`. Unknown keys are a ConfigError.
void apply_key_values(RunConfig& cfg, const std::map<std::string, std::string>& kv);

std::string read_text_file(const std::string& path);
void write_output(const std::string& path, const std::string& content);

/// n×n grid over the bounding box of a two-parameter prior: columns
/// `<name0>,<name1>,density`, zero outside the region.
std::string prior_grid_csv(const Prior& prior, std::size_t n, const std::vector<std::string>& extra = {});

}  // namespace mmtherm
