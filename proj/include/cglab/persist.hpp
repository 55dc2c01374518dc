#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cglab/bounds.hpp"
#include "cglab/experiments.hpp"

namespace cglab {

inline constexpr int kSchemaVersion = 1;

/// A document on disk does not have the expected shape; field() names the
/// offending key path.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& field, const std::string& what)
      : std::runtime_error("schema error at '" + field + "': " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

using nlohmann::json;

/// Doubles in JSON: finite values as numbers, ±∞ and NaN as "inf", "-inf", "nan".
json num(double v);
double get_num(const json& j, const std::string& key, const std::string& path = "");

std::string format_double(double v);  // %.17g

// Tabular series. The twelve core columns come first
// (t dt mass energy i_val linf variance diss_cum mass_cum imqu var1_rhs
// tail_mag), then grad, lp_alpha2 and the per-weight terms.
void write_trajectory_csv(const std::filesystem::path& path, std::span<const TrajectorySample> s);
std::vector<TrajectorySample> read_trajectory_csv(const std::filesystem::path& path);

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRecord> records);

void write_identity_csv(const std::filesystem::path& path, std::span<const IdentityReport> reports);

json to_json(const BoundsReport& b);
BoundsReport bounds_from_json(const json& j);

json to_json(const BlowupEstimate& e);
BlowupEstimate estimate_from_json(const json& j, const std::string& path = "estimate");

json to_json(const SweepRecord& r);
SweepRecord sweep_record_from_json(const json& j, const std::string& path = "record");

json identity_summary(std::span<const IdentityReport> reports);
json to_json(const NecessityTable& t);
json to_json(const Lemma71Result& r);
json to_json(const Lemma71Sweep& s);

/// {"schema_version", "kind", ...payload}; dumped with two-space indent and a
/// trailing newline.
json make_document(const std::string& kind, json payload);
void write_json(const std::filesystem::path& path, const json& doc);
/// Parses and checks schema_version and kind ("" accepts any kind).
json read_json(const std::filesystem::path& path, const std::string& kind = "");

json sweep_document(std::span<const SweepRecord> records, bool any_truncation);
std::vector<SweepRecord> sweep_records_from_document(const json& doc);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_x = false;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

/// Static SVG line plot; points that cannot be drawn (non-finite, or ≤ 0 on
/// a log axis) are skipped.
void write_svg_plot(const std::filesystem::path& path, const PlotSpec& spec);

}  // namespace cglab
