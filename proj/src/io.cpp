// SPDX-License-Identifier: Apache-2.0
#include "mmtherm/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mmtherm/thermo.hpp"

namespace mmtherm {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw ConfigError("config: '" + key + "' is not a number: " + v);
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("config: '" + key + "' is not a boolean: " + v);
}

}  // namespace

std::vector<double> RunConfig::betas() const {
  try {
    return parse_beta_grid(beta);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("--beta: ") + e.what());
  }
}

void RunConfig::validate() const {
  const auto grid_values = betas();
  for (double b : grid_values)
    if (!(b >= 0.0)) throw ConfigError("--beta: beta must be non-negative");
  if (!(tol > 0.0 && tol <= 1e-2)) throw ConfigError("--tol must lie in (0, 1e-2]");
  if (grid < 3) throw ConfigError("--grid must be at least 3");
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("--h must be positive");
  if (format != "csv" && format != "json") throw ConfigError("--format must be csv or json");
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(number) + ": empty key");
    // Accept flag spellings such as shrink-limit for shrink_limit.
    for (auto& c : key)
      if (c == '-') c = '_';
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

void apply_key_values(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, v] : kv) {
    if (key == "scenario") {
      cfg.scenario = v;
    } else if (key == "metric") {
      try {
        cfg.kind = parse_metric_kind(v);
      } catch (const DomainError& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
    } else if (key == "beta") {
      cfg.beta = v;
    } else if (key == "h") {
      cfg.h = to_double(key, v);
    } else if (key == "format") {
      cfg.format = v;
    } else if (key == "out") {
      cfg.out = v;
    } else if (key == "tol") {
      cfg.tol = to_double(key, v);
    } else if (key == "grid") {
      const double g = to_double(key, v);
      if (g < 0 || g != std::floor(g)) throw ConfigError("config: 'grid' must be a non-negative integer");
      cfg.grid = static_cast<std::size_t>(g);
    } else if (key == "shrink_limit") {
      cfg.shrink_limit = to_bool(key, v);
    } else if (key == "sequence") {
      cfg.sequence = v;
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << content;
  if (!out.flush()) throw ConfigError("write to '" + path + "' failed");
}

std::string prior_grid_csv(const Prior& prior, std::size_t n, const std::vector<std::string>& extra) {
  if (prior.dim() != 2) throw DomainError("prior_grid_csv: needs a two-parameter prior");
  if (n < 2) throw DomainError("prior_grid_csv: grid must have at least two points per axis");
  const Box box = bounding_box(prior.region());
  const auto& names = prior.names();
  std::ostringstream out;
  out.precision(17);
  for (const auto& line : extra) out << "# " << line << '\n';
  out << "# normalization " << prior.normalization() << '\n';
  out << (names.size() > 0 ? names[0] : "x") << ',' << (names.size() > 1 ? names[1] : "y") << ",density\n";
  Vector p(2);
  for (std::size_t i = 0; i < n; ++i) {
    p(0) = box.sides[0].a + (box.sides[0].b - box.sides[0].a) * static_cast<double>(i) / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      p(1) = box.sides[1].a + (box.sides[1].b - box.sides[1].a) * static_cast<double>(j) / static_cast<double>(n - 1);
      double d = 0.0;
      // Boundary points carry the integrable endpoint singularity; report them as empty.
      if (contains(prior.region(), p)) {
        try {
          d = prior.density(p);
        } catch (const InfeasibleError&) {
          d = 0.0;
        }
        if (!std::isfinite(d)) d = 0.0;
      }
      out << p(0) << ',' << p(1) << ',' << d << '\n';
    }
  }
  return out.str();
}

}  // namespace mmtherm
