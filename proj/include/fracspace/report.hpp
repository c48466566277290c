#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fracspace {

using json = nlohmann::json;

/// One checked quantity. `fields` is a flat object of scalars (numbers,
/// strings, booleans); `metric` is the quantity compared against
/// `tolerance` when the check is a single scalar comparison.
struct Cell {
  json fields = json::object();
  double tolerance = 0.0;
  bool pass = false;
};

struct Provenance {
  std::uint64_t seed = 42;
  std::string config_hash;
  std::string version;
};

struct Summary {
  std::size_t cell_count = 0;
  std::size_t pass_count = 0;
  std::optional<double> worst_ratio;  // "ratio" field farthest from 1

  bool all_pass() const { return pass_count == cell_count; }
};

struct VerificationReport {
  std::string experiment;
  json parameters = json::object();
  std::vector<Cell> cells;
  Provenance provenance;
  std::vector<std::string> notes;

  Cell& add_cell(json fields, double tolerance, bool pass);
  /// Appends all cells (and notes) of another report, keeping order.
  void merge(const VerificationReport& other);

  Summary summary() const;
  bool all_pass() const { return summary().all_pass(); }

  json to_json() const;
  /// RFC-4180 CSV: header is `experiment,cell,` followed by the sorted
  /// union of field keys, then `tolerance,pass`. Doubles use %.17g.
  std::string to_csv() const;
};

/// CSV-quotes a field when it contains a comma, quote, CR or LF.
std::string csv_escape(const std::string& field);

/// Shortest-exact formatting for doubles (%.17g) used by every CSV writer.
std::string format_double(double value);

}  // namespace fracspace
