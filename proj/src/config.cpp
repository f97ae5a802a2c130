// Copyright 2026 The SparseMesh Authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "sparsemesh/errors.hpp"
#include "sparsemesh/experiments.hpp"

namespace sparsemesh {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError("config key '" + std::string(key) + "': cannot parse '" + std::string(text) + "'");
  }
  return value;
}

bool is_none(std::string_view v) { return v == "none" || v == "None" || v == "off"; }

}  // namespace

std::vector<std::optional<double>> parse_snr_list(std::string_view text) {
  std::vector<std::optional<double>> out;
  for (auto item : split_list(text)) {
    if (is_none(item)) {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(parse_number<double>("snr_db", item));
    }
  }
  if (out.empty()) throw ParseError("config key 'snr_db': empty list");
  return out;
}

void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "L") {
    c.L = parse_number<std::size_t>(key, value);
  } else if (key == "M") {
    c.M.clear();
    for (auto item : split_list(value)) c.M.push_back(parse_number<std::size_t>(key, item));
  } else if (key == "N") {
    c.N = parse_number<std::size_t>(key, value);
  } else if (key == "s") {
    c.s = parse_number<std::size_t>(key, value);
  } else if (key == "s_assumed") {
    c.s_assumed = is_none(value) ? std::nullopt : std::optional(parse_number<std::size_t>(key, value));
  } else if (key == "snr_db") {
    c.snr_db = parse_snr_list(value);
  } else if (key == "trials") {
    c.trials = parse_number<std::size_t>(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "topology_degree") {
    c.topology_degree = parse_number<std::size_t>(key, value);
  } else if (key == "h_kind") {
    c.h_kind = std::string(value);
  } else if (key == "algorithms") {
    c.algorithms.clear();
    for (auto item : split_list(value)) c.algorithms.push_back(parse_algorithm(item));
  } else if (key == "max_iters") {
    c.max_iters = parse_number<std::size_t>(key, value);
  } else if (key == "support_stall") {
    c.support_stall = is_none(value) ? std::nullopt : std::optional(parse_number<std::size_t>(key, value));
  } else if (key == "threads") {
    c.threads = parse_number<std::size_t>(key, value);
  } else {
    throw ParseError("unknown config key '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v = line;
    if (const auto hash = v.find_first_of("#;"); hash != std::string_view::npos) v = v.substr(0, hash);
    v = trim(v);
    if (v.empty() || v.front() == '[') continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(base, trim(v.substr(0, eq)), v.substr(eq + 1));
  }
  base.check();
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

}  // namespace sparsemesh
