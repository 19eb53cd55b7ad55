#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nlsstab/acceptance.hpp"
#include "nlsstab/dcurve.hpp"
#include "nlsstab/dynamics.hpp"
#include "nlsstab/spectral.hpp"

namespace nlsstab::io {

using json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

inline json document(const std::string& command) {
  json j;
  j["schema_version"] = schema_version;
  j["command"] = command;
  return j;
}

/// Writes through a sibling temporary file and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp" + std::to_string(std::random_device{}());
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  write_atomic(path, j.dump(2) + "\n");
}

inline std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// RFC 4180 quoting.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { row(header); }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw std::logic_error("csv row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += csv_field(cells[i]);
    }
    text_ += "\r\n";
  }
  const std::string& str() const { return text_; }

 private:
  std::size_t width_;
  std::string text_;
};

inline std::string cell(const std::optional<double>& v) { return v ? number(*v) : ""; }

// ---------------------------------------------------------------------------------------------

inline json to_json(const ConditionReport& r) {
  json j;
  j["condition"] = r.condition;
  j["holds"] = r.holds;
  json s = json::object();
  for (const auto& [k, v] : r.scalars) s[k] = v;
  j["scalars"] = s;
  if (!r.note.empty()) j["note"] = r.note;
  j["has_witness"] = r.witness.has_value();
  return j;
}

inline json to_json(const std::vector<ConditionReport>& rs) {
  json a = json::array();
  for (const auto& r : rs) a.push_back(to_json(r));
  return a;
}

inline json to_json(const SpectrumReport& r) {
  json j;
  j["sector"] = r.sector;
  j["eigenvalues"] = std::vector<double>(r.eigenvalues.data(), r.eigenvalues.data() + r.eigenvalues.size());
  j["n_negative"] = r.n_negative;
  j["kernel_dim_est"] = r.kernel_dim_est;
  j["tol_kernel"] = r.tol_kernel;
  return j;
}

inline json to_json(const CriticalOmega& c) {
  json j;
  j["omega_star"] = c.omega_star;
  j["bracket"] = {c.bracket.first, c.bracket.second};
  j["d"] = c.d;
  j["d2"] = c.d2;
  j["d3_stencil"] = c.d3_stencil;
  j["d3_identity"] = c.d3_identity;
  return j;
}

inline std::vector<std::string> dcurve_header() {
  return {"omega", "d", "d1", "d2", "d3", "charge", "d2_identity", "d3_identity",
          "resid_d1", "resid_d2", "resid_d3", "d2_sign", "sign_change", "error"};
}

inline json to_json(const DCurveRow& r) {
  return json{{"omega", r.omega},       {"d", r.d},
              {"d1", r.d1},             {"d2", r.d2},
              {"d3", r.d3},             {"charge", r.charge},
              {"d2_identity", r.d2_identity}, {"d3_identity", r.d3_identity},
              {"resid_d1", r.resid_d1}, {"resid_d2", r.resid_d2},
              {"resid_d3", r.resid_d3}};
}

inline std::string sign_name(Sign s) {
  return s == Sign::positive ? "+" : (s == Sign::negative ? "-" : "0");
}

inline json to_json(const TrajectoryDiagnostics& d) {
  json j;
  j["steps"] = d.steps;
  j["samples"] = d.times.size();
  j["exit_time"] = d.exit_time ? json(*d.exit_time) : json(nullptr);
  j["boundary_time"] = d.boundary_time ? json(*d.boundary_time) : json(nullptr);
  j["energy_drift"] = d.energy_drift;
  j["charge_drift"] = d.charge_drift;
  j["valid"] = d.valid;
  j["max_fp_iterations"] = d.max_fp_iterations;
  double far = 0.0;
  for (double x : d.tube_distance) far = std::max(far, x);
  j["max_tube_distance"] = d.tube_distance.empty() ? json(nullptr) : json(far);
  return j;
}

/// Time series with centred dA/dt + P where three consecutive in-tube samples exist.
inline Csv trajectory_csv(const TrajectoryDiagnostics& d) {
  Csv csv({"t", "E", "Q", "A", "Lambda", "P", "tube_dist", "identity_residual"});
  const std::size_t n = d.times.size();
  for (std::size_t k = 0; k < n; ++k) {
    auto at = [&](const std::vector<std::optional<double>>& s) -> std::optional<double> {
      return k < s.size() ? s[k] : std::nullopt;
    };
    std::optional<double> res;
    if (k > 0 && k + 1 < n && k + 1 < d.a_series.size() && d.a_series[k - 1] && d.a_series[k + 1] &&
        d.p_series[k]) {
      const double da = (*d.a_series[k + 1] - *d.a_series[k - 1]) / (d.times[k + 1] - d.times[k - 1]);
      res = std::abs(da + *d.p_series[k]);
    }
    csv.row({number(d.times[k]), number(d.energy[k]), number(d.charge[k]), cell(at(d.a_series)),
             cell(at(d.lambda_series)), cell(at(d.p_series)),
             k < d.tube_distance.size() ? number(d.tube_distance[k]) : "", cell(res)});
  }
  return csv;
}

inline json to_json(const acceptance::CriterionResult& r) {
  json j;
  j["id"] = r.id;
  j["title"] = r.title;
  j["passed"] = r.passed;
  if (!r.error.empty()) j["error"] = r.error;
  json checks = json::array();
  for (const auto& c : r.checks) {
    json k{{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"bound", c.bound}};
    if (c.relation == "in") k["bound_hi"] = c.bound_hi;
    k["ok"] = c.ok;
    checks.push_back(k);
  }
  j["checks"] = checks;
  return j;
}

}  // namespace nlsstab::io
