// Copyright 2026 The SparseMesh Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "sparsemesh/errors.hpp"
#include "sparsemesh/experiments.hpp"

namespace sparsemesh {

namespace {

constexpr std::string_view kCsvHeader =
    "algorithm,snr_db,s,s_assumed,trials,msenr_db,pse,mean_iters,mean_payload_scalars,failures";

std::string format_snr(const std::optional<double>& snr) { return snr ? format_real(*snr) : "none"; }

double parse_real(std::string_view text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const std::string s(text);
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParseError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw ParseError("not a number: '" + s + "'");
  return v;
}

std::optional<double> parse_snr(std::string_view text) {
  if (text == "none") return std::nullopt;
  return parse_real(text);
}

// Numbers in json-lines are emitted verbatim at 12 digits; non-finite values
// become strings so every line stays valid JSON.
std::string json_real(double v) {
  return std::isfinite(v) ? format_real(v) : "\"" + format_real(v) + "\"";
}

double json_to_real(const nlohmann::json& j) {
  return j.is_string() ? parse_real(j.get<std::string>()) : j.get<double>();
}

}  // namespace

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_results_csv(const ExperimentResult& result, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : result.rows) {
    out << to_string(r.algorithm) << ',' << format_snr(r.snr_db) << ',' << r.s << ',' << r.s_assumed << ','
        << r.trials << ',' << format_real(r.msenr_db) << ',' << format_real(r.pse) << ','
        << format_real(r.mean_iters) << ',' << format_real(r.mean_payload_scalars) << ',' << r.failures << '\n';
  }
}

void write_results_jsonl(const ExperimentResult& result, std::ostream& out) {
  // Keys in sorted order.
  for (const auto& r : result.rows) {
    out << "{\"algorithm\":\"" << to_string(r.algorithm) << "\",\"failures\":" << r.failures
        << ",\"mean_iters\":" << json_real(r.mean_iters)
        << ",\"mean_payload_scalars\":" << json_real(r.mean_payload_scalars)
        << ",\"msenr_db\":" << json_real(r.msenr_db) << ",\"pse\":" << json_real(r.pse) << ",\"s\":" << r.s
        << ",\"s_assumed\":" << r.s_assumed
        << ",\"snr_db\":" << (r.snr_db ? json_real(*r.snr_db) : std::string("null"))
        << ",\"trials\":" << r.trials << "}\n";
  }
}

void export_results(const ExperimentResult& result, const std::filesystem::path& path, ResultFormat format) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  if (format == ResultFormat::kCsv) {
    write_results_csv(result, out);
  } else {
    write_results_jsonl(result, out);
  }
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

ExperimentResult parse_results_csv(std::istream& in) {
  ExperimentResult result;
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw ParseError("results CSV: missing or wrong header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 10) throw ParseError("results CSV: expected 10 fields, got " + std::to_string(f.size()));
    AlgorithmResult r;
    r.algorithm = parse_algorithm(f[0]);
    r.snr_db = parse_snr(f[1]);
    r.s = std::stoull(f[2]);
    r.s_assumed = std::stoull(f[3]);
    r.trials = std::stoull(f[4]);
    r.msenr_db = parse_real(f[5]);
    r.pse = parse_real(f[6]);
    r.mean_iters = parse_real(f[7]);
    r.mean_payload_scalars = parse_real(f[8]);
    r.failures = std::stoull(f[9]);
    result.rows.push_back(std::move(r));
  }
  return result;
}

ExperimentResult parse_results_jsonl(std::istream& in) {
  ExperimentResult result;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("results json-lines: ") + e.what());
    }
    AlgorithmResult r;
    r.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    if (!j.at("snr_db").is_null()) r.snr_db = json_to_real(j.at("snr_db"));
    r.s = j.at("s").get<std::size_t>();
    r.s_assumed = j.at("s_assumed").get<std::size_t>();
    r.trials = j.at("trials").get<std::size_t>();
    r.msenr_db = json_to_real(j.at("msenr_db"));
    r.pse = json_to_real(j.at("pse"));
    r.mean_iters = json_to_real(j.at("mean_iters"));
    r.mean_payload_scalars = json_to_real(j.at("mean_payload_scalars"));
    r.failures = j.at("failures").get<std::size_t>();
    result.rows.push_back(std::move(r));
  }
  return result;
}

}  // namespace sparsemesh
