#include "fracspace/report.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace fracspace {

Cell& VerificationReport::add_cell(json fields, double tolerance, bool pass) {
  cells.push_back(Cell{std::move(fields), tolerance, pass});
  return cells.back();
}

void VerificationReport::merge(const VerificationReport& other) {
  cells.insert(cells.end(), other.cells.begin(), other.cells.end());
  notes.insert(notes.end(), other.notes.begin(), other.notes.end());
}

Summary VerificationReport::summary() const {
  Summary s;
  s.cell_count = cells.size();
  for (const auto& c : cells) {
    if (c.pass) ++s.pass_count;
    auto it = c.fields.find("ratio");
    if (it != c.fields.end() && it->is_number()) {
      const double r = it->get<double>();
      if (!s.worst_ratio || std::abs(r - 1.0) > std::abs(*s.worst_ratio - 1.0)) s.worst_ratio = r;
    }
  }
  return s;
}

json VerificationReport::to_json() const {
  json j;
  j["experiment"] = experiment;
  j["parameters"] = parameters;
  json arr = json::array();
  for (const auto& c : cells) {
    json cj = c.fields;
    cj["tolerance"] = c.tolerance;
    cj["pass"] = c.pass;
    arr.push_back(std::move(cj));
  }
  j["cells"] = std::move(arr);
  const Summary s = summary();
  j["summary"] = {{"cell_count", s.cell_count},
                  {"pass_count", s.pass_count},
                  {"all_pass", s.all_pass()},
                  {"worst_ratio", s.worst_ratio ? json(*s.worst_ratio) : json(nullptr)}};
  j["provenance"] = {{"seed", provenance.seed},
                     {"config_hash", provenance.config_hash},
                     {"version", provenance.version}};
  j["notes"] = notes;
  return j;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

namespace {

std::string scalar_to_csv(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number()) return format_double(v.get<double>());
  if (v.is_string()) return csv_escape(v.get<std::string>());
  return csv_escape(v.dump());
}

}  // namespace

std::string VerificationReport::to_csv() const {
  std::set<std::string> keys;
  for (const auto& c : cells)
    for (auto it = c.fields.begin(); it != c.fields.end(); ++it) keys.insert(it.key());
  keys.erase("tolerance");
  keys.erase("pass");

  std::ostringstream out;
  out << "experiment,cell";
  for (const auto& k : keys) out << ',' << csv_escape(k);
  out << ",tolerance,pass\r\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    out << csv_escape(experiment) << ',' << i;
    for (const auto& k : keys) {
      out << ',';
      auto it = c.fields.find(k);
      if (it != c.fields.end()) out << scalar_to_csv(*it);
    }
    out << ',' << format_double(c.tolerance) << ',' << (c.pass ? "true" : "false") << "\r\n";
  }
  return out.str();
}

}  // namespace fracspace
