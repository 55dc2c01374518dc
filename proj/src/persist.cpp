#include "cglab/persist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cglab {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

struct Column {
  const char* name;
  double TrajectorySample::*field;
};

constexpr Column kCore[] = {
    {"t", &TrajectorySample::t},
    {"dt", &TrajectorySample::dt},
    {"mass", &TrajectorySample::mass},
    {"energy", &TrajectorySample::energy},
    {"i_val", &TrajectorySample::i_val},
    {"linf", &TrajectorySample::linf},
    {"variance", &TrajectorySample::variance},
    {"diss_cum", &TrajectorySample::diss_cum},
    {"mass_cum", &TrajectorySample::mass_cum},
    {"imqu", &TrajectorySample::imqu},
    {"var1_rhs", &TrajectorySample::var1_rhs},
    {"tail_mag", &TrajectorySample::tail_mag},
    {"grad", &TrajectorySample::grad},
    {"lp_alpha2", &TrajectorySample::lp_alpha2},
};
constexpr std::size_t kRequiredCore = 12;

struct WeightColumn {
  const char* name;
  double WeightTerms::*field;
};

constexpr WeightColumn kWeight[] = {
    {"wmass", &WeightTerms::wmass},
    {"var1_rhs", &WeightTerms::var1_rhs},
    {"defect_grad", &WeightTerms::defect_grad},
    {"defect_lp", &WeightTerms::defect_lp},
    {"bilap_mass", &WeightTerms::bilap_mass},
    {"j_val", &WeightTerms::j_val},
    {"psi_ut2", &WeightTerms::psi_ut2},
};

double parse_double(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw SchemaError(where, "not a number: '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double get_num(const json& j, const std::string& key, const std::string& path) {
  const std::string where = path.empty() ? key : path + "." + key;
  if (!j.is_object() || !j.contains(key)) throw SchemaError(where, "missing");
  const json& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s == "inf") return kInfinity;
    if (s == "-inf") return -kInfinity;
    if (s == "nan") return std::nan("");
  }
  throw SchemaError(where, "expected a number or one of \"inf\", \"-inf\", \"nan\"");
}

namespace {

const json& get_field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(path + "." + key, "missing");
  return j.at(key);
}

std::string get_str(const json& j, const std::string& key, const std::string& path) {
  const json& v = get_field(j, key, path);
  if (!v.is_string()) throw SchemaError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

bool get_bool(const json& j, const std::string& key, const std::string& path) {
  const json& v = get_field(j, key, path);
  if (!v.is_boolean()) throw SchemaError(path + "." + key, "expected a boolean");
  return v.get<bool>();
}

long long get_int(const json& j, const std::string& key, const std::string& path) {
  const json& v = get_field(j, key, path);
  if (!v.is_number_integer()) throw SchemaError(path + "." + key, "expected an integer");
  return v.get<long long>();
}

}  // namespace

void write_trajectory_csv(const fs::path& path, std::span<const TrajectorySample> samples) {
  const bool weighted =
      std::any_of(samples.begin(), samples.end(), [](const auto& s) { return s.weighted.has_value(); });
  auto out = open_out(path);
  std::string line;
  for (const auto& c : kCore) {
    if (!line.empty()) line += ',';
    line += c.name;
  }
  for (const auto& c : kWeight) line += std::string(",q_") + c.name;
  if (weighted) {
    for (const auto& c : kWeight) line += std::string(",w_") + c.name;
  }
  out << line << '\n';
  for (const auto& s : samples) {
    line.clear();
    for (const auto& c : kCore) {
      if (!line.empty()) line += ',';
      line += format_double(s.*c.field);
    }
    for (const auto& c : kWeight) line += ',' + format_double(s.quad.*c.field);
    if (weighted) {
      const WeightTerms w = s.weighted.value_or(WeightTerms{});
      for (const auto& c : kWeight) line += ',' + format_double(w.*c.field);
    }
    out << line << '\n';
  }
  finish(out, path);
}

std::vector<TrajectorySample> read_trajectory_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path.string() + ":header", "empty file");
  const auto header = split(line, ',');
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index[header[i]] = i;
  for (std::size_t k = 0; k < kRequiredCore; ++k) {
    if (!index.count(kCore[k].name)) {
      throw SchemaError(path.string() + ":" + kCore[k].name, "column missing");
    }
  }
  const bool weighted = index.count("w_wmass") > 0;

  std::vector<TrajectorySample> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) {
      throw SchemaError(path.string() + ":" + std::to_string(row),
                        "expected " + std::to_string(header.size()) + " cells");
    }
    auto cell = [&](const std::string& name) -> const std::string* {
      auto it = index.find(name);
      return it == index.end() ? nullptr : &cells[it->second];
    };
    TrajectorySample s;
    for (const auto& c : kCore) {
      if (const auto* v = cell(c.name)) s.*c.field = parse_double(*v, path.string() + ":" + c.name);
    }
    for (const auto& c : kWeight) {
      if (const auto* v = cell(std::string("q_") + c.name)) {
        s.quad.*c.field = parse_double(*v, path.string() + ":q_" + c.name);
      }
    }
    if (weighted) {
      WeightTerms w;
      for (const auto& c : kWeight) {
        if (const auto* v = cell(std::string("w_") + c.name)) {
          w.*c.field = parse_double(*v, path.string() + ":w_" + c.name);
        }
      }
      s.weighted = w;
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_sweep_csv(const fs::path& path, std::span<const SweepRecord> records) {
  std::set<std::string> names;
  for (const auto& r : records) {
    for (const auto& [k, v] : r.identity_max_residuals) names.insert(k);
  }
  auto out = open_out(path);
  out << "theta,cos_theta,status,blowup_detected,t_lo,t_hi,t_fit,thm1_upper,thm2_lower,tau,"
         "k_tau_bound,r_max,m,mass0,e0";
  for (const auto& n : names) out << ",residual_" << n;
  out << '\n';
  for (const auto& r : records) {
    out << format_double(r.theta) << ',' << format_double(r.cos_theta) << ',' << to_string(r.status)
        << ',' << (r.blowup_detected ? 1 : 0) << ',' << format_double(r.t_lo) << ','
        << format_double(r.t_hi) << ',' << format_double(r.t_fit) << ','
        << format_double(r.thm1_upper) << ',' << format_double(r.thm2_lower) << ','
        << format_double(r.tau) << ',' << format_double(r.k_tau_bound) << ','
        << format_double(r.r_max) << ',' << r.m << ',' << format_double(r.mass0) << ','
        << format_double(r.e0);
    for (const auto& n : names) {
      auto it = r.identity_max_residuals.find(n);
      out << ',' << (it == r.identity_max_residuals.end() ? "nan" : format_double(it->second));
    }
    out << '\n';
  }
  finish(out, path);
}

void write_identity_csv(const fs::path& path, std::span<const IdentityReport> reports) {
  auto out = open_out(path);
  out << "identity,t,residual\n";
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.t.size(); ++i) {
      out << r.name << ',' << format_double(r.t[i]) << ',' << format_double(r.residual[i]) << '\n';
    }
  }
  finish(out, path);
}

json to_json(const BoundsReport& b) {
  return json{{"dim", b.dim},
              {"alpha", num(b.alpha)},
              {"theta", num(b.theta)},
              {"mass0", num(b.mass0)},
              {"e0", num(b.e0)},
              {"thm1_upper", num(b.thm1_upper)},
              {"eta", num(b.eta)},
              {"k_const", num(b.k_const)},
              {"c_gn_input", num(b.c_gn_input)},
              {"cgn", num(b.cgn)},
              {"thm2_lower", num(b.thm2_lower)},
              {"loweru", num(b.loweru)},
              {"remark_envelope_coeff",
               json::array({num(b.remark_envelope_coeff[0]), num(b.remark_envelope_coeff[1])})}};
}

BoundsReport bounds_from_json(const json& j) {
  const std::string p = "bounds";
  BoundsReport b;
  b.dim = static_cast<int>(get_int(j, "dim", p));
  b.alpha = get_num(j, "alpha", p);
  b.theta = get_num(j, "theta", p);
  b.mass0 = get_num(j, "mass0", p);
  b.e0 = get_num(j, "e0", p);
  b.thm1_upper = get_num(j, "thm1_upper", p);
  b.eta = get_num(j, "eta", p);
  b.k_const = get_num(j, "k_const", p);
  b.c_gn_input = get_num(j, "c_gn_input", p);
  b.cgn = get_num(j, "cgn", p);
  b.thm2_lower = get_num(j, "thm2_lower", p);
  b.loweru = get_num(j, "loweru", p);
  const json& env = get_field(j, "remark_envelope_coeff", p);
  if (!env.is_array() || env.size() != 2) {
    throw SchemaError(p + ".remark_envelope_coeff", "expected an array of two numbers");
  }
  json wrap{{"a", env[0]}, {"b", env[1]}};
  b.remark_envelope_coeff[0] = get_num(wrap, "a", p + ".remark_envelope_coeff[0]");
  b.remark_envelope_coeff[1] = get_num(wrap, "b", p + ".remark_envelope_coeff[1]");
  return b;
}

json to_json(const BlowupEstimate& e) {
  return json{{"status", to_string(e.status)},
              {"blowup_detected", e.blowup_detected},
              {"trigger", e.trigger},
              {"t_last", num(e.t_last)},
              {"t_lo", num(e.t_lo)},
              {"t_hi", num(e.t_hi)},
              {"t_fit", num(e.t_fit)},
              {"fit_exponent", num(e.fit_exponent)},
              {"t_truncation", num(e.t_truncation)},
              {"accepted", e.accepted},
              {"rejected", e.rejected}};
}

BlowupEstimate estimate_from_json(const json& j, const std::string& p) {
  BlowupEstimate e;
  try {
    e.status = run_status_from_string(get_str(j, "status", p));
  } catch (const std::invalid_argument& ex) {
    throw SchemaError(p + ".status", ex.what());
  }
  e.blowup_detected = get_bool(j, "blowup_detected", p);
  e.trigger = get_str(j, "trigger", p);
  e.t_last = get_num(j, "t_last", p);
  e.t_lo = get_num(j, "t_lo", p);
  e.t_hi = get_num(j, "t_hi", p);
  e.t_fit = get_num(j, "t_fit", p);
  e.fit_exponent = get_num(j, "fit_exponent", p);
  e.t_truncation = get_num(j, "t_truncation", p);
  e.accepted = static_cast<std::size_t>(get_int(j, "accepted", p));
  e.rejected = static_cast<std::size_t>(get_int(j, "rejected", p));
  return e;
}

json to_json(const SweepRecord& r) {
  json res = json::object();
  for (const auto& [k, v] : r.identity_max_residuals) res[k] = num(v);
  return json{{"theta", num(r.theta)},
              {"cos_theta", num(r.cos_theta)},
              {"status", to_string(r.status)},
              {"blowup_detected", r.blowup_detected},
              {"t_lo", num(r.t_lo)},
              {"t_hi", num(r.t_hi)},
              {"t_fit", num(r.t_fit)},
              {"thm1_upper", num(r.thm1_upper)},
              {"thm2_lower", num(r.thm2_lower)},
              {"tau", num(r.tau)},
              {"k_tau_bound", num(r.k_tau_bound)},
              {"identity_max_residuals", res},
              {"r_max", num(r.r_max)},
              {"m", r.m},
              {"mass0", num(r.mass0)},
              {"e0", num(r.e0)}};
}

SweepRecord sweep_record_from_json(const json& j, const std::string& p) {
  SweepRecord r;
  r.theta = get_num(j, "theta", p);
  r.cos_theta = get_num(j, "cos_theta", p);
  try {
    r.status = run_status_from_string(get_str(j, "status", p));
  } catch (const std::invalid_argument& ex) {
    throw SchemaError(p + ".status", ex.what());
  }
  r.blowup_detected = get_bool(j, "blowup_detected", p);
  r.t_lo = get_num(j, "t_lo", p);
  r.t_hi = get_num(j, "t_hi", p);
  r.t_fit = get_num(j, "t_fit", p);
  r.thm1_upper = get_num(j, "thm1_upper", p);
  r.thm2_lower = get_num(j, "thm2_lower", p);
  r.tau = get_num(j, "tau", p);
  r.k_tau_bound = get_num(j, "k_tau_bound", p);
  const json& res = get_field(j, "identity_max_residuals", p);
  if (!res.is_object()) throw SchemaError(p + ".identity_max_residuals", "expected an object");
  for (const auto& [k, v] : res.items()) {
    r.identity_max_residuals[k] = get_num(res, k, p + ".identity_max_residuals");
  }
  r.r_max = get_num(j, "r_max", p);
  r.m = static_cast<int>(get_int(j, "m", p));
  r.mass0 = get_num(j, "mass0", p);
  r.e0 = get_num(j, "e0", p);
  return r;
}

json identity_summary(std::span<const IdentityReport> reports) {
  json out = json::array();
  for (const auto& r : reports) {
    out.push_back(json{{"name", r.name},
                       {"max_abs_residual", num(r.max_abs_residual)},
                       {"max_rel_residual", num(r.max_rel_residual)},
                       {"worst_time", num(r.worst_time)},
                       {"samples", r.t.size()}});
  }
  return out;
}

json to_json(const NecessityTable& t) {
  json q = json::array();
  for (const auto& s : t.quantities) {
    json vals = json::array();
    for (double v : s.values) vals.push_back(num(v));
    q.push_back(json{{"name", s.name},
                     {"predicted", num(s.predicted)},
                     {"fitted", num(s.fitted)},
                     {"deviation", num(s.fitted - s.predicted)},
                     {"values", vals}});
  }
  json lambdas = json::array();
  for (double l : t.lambdas) lambdas.push_back(num(l));
  return json{{"family", t.family},
              {"dim", t.dim},
              {"alpha", num(t.alpha)},
              {"offset", num(t.offset)},
              {"tolerance", num(t.tolerance)},
              {"lambdas", lambdas},
              {"quantities", q},
              {"weighted_gap", num(t.weighted_gap())},
              {"all_match", t.all_match()}};
}

json to_json(const Lemma71Result& r) {
  json fields = json::array();
  for (const auto& f : r.fields) {
    fields.push_back(json{{"label", f.label},
                          {"mass", num(f.mass)},
                          {"lp", num(f.lp)},
                          {"weighted_lp", num(f.weighted_lp)},
                          {"weighted_grad", num(f.weighted_grad)},
                          {"c_needed", num(f.c_needed)},
                          {"pointwise_sup", num(f.pointwise_sup)},
                          {"pointwise_margin", num(f.pointwise_margin)},
                          {"pointwise_margin_sharp", num(f.pointwise_margin_sharp)}});
  }
  return json{{"c_min_found", num(r.c_min_found)},
              {"c_needed_max", num(r.c_needed_max)},
              {"hypotheses_overridden", r.hypotheses_overridden},
              {"fields", fields}};
}

json to_json(const Lemma71Sweep& s) {
  json rows = json::array();
  for (std::size_t k = 0; k < s.lambdas.size(); ++k) {
    rows.push_back(json{{"lambda", num(s.lambdas[k])},
                        {"r0", num(s.r0[k])},
                        {"c_needed", num(s.c_needed[k])},
                        {"c_min_cumulative", num(s.c_min_cumulative[k])}});
  }
  return rows;
}

json make_document(const std::string& kind, json payload) {
  json doc{{"schema_version", kSchemaVersion}, {"kind", kind}};
  for (auto& [k, v] : payload.items()) doc[k] = v;
  return doc;
}

void write_json(const fs::path& path, const json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  finish(out, path);
}

json read_json(const fs::path& path, const std::string& kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string(), std::string("malformed JSON: ") + e.what());
  }
  const long long v = get_int(doc, "schema_version", "");
  if (v != kSchemaVersion) {
    throw SchemaError("schema_version", "unsupported version " + std::to_string(v));
  }
  const std::string k = get_str(doc, "kind", "");
  if (!kind.empty() && k != kind) throw SchemaError("kind", "expected '" + kind + "', got '" + k + "'");
  return doc;
}

json sweep_document(std::span<const SweepRecord> records, bool any_truncation) {
  json recs = json::array();
  for (const auto& r : records) recs.push_back(to_json(r));
  return make_document("sweep", json{{"any_truncation", any_truncation}, {"records", recs}});
}

std::vector<SweepRecord> sweep_records_from_document(const json& doc) {
  const json& recs = get_field(doc, "records", "");
  if (!recs.is_array()) throw SchemaError("records", "expected an array");
  std::vector<SweepRecord> out;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    out.push_back(sweep_record_from_json(recs[i], "records[" + std::to_string(i) + "]"));
  }
  return out;
}

// ---- SVG ------------------------------------------------------------------

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v, int prec = 4) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

}  // namespace

void write_svg_plot(const fs::path& path, const PlotSpec& spec) {
  const double W = 640, H = 420, L = 80, R = 20, T = 40, B = 60;
  auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
  auto drawable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.log_x || x > 0) && (!spec.log_y || y > 0);
  };

  double x0 = kInfinity, x1 = -kInfinity, y0 = kInfinity, y1 = -kInfinity;
  for (const auto& s : spec.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!drawable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-300) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-300) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - T - B); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(spec.title) << "</text>\n";
  out << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
      << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto axis_label = [&](double v, bool log) { return log ? "1e" + fmt(v, 3) : fmt(v); };
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0, fy = y0 + (y1 - y0) * k / 4.0;
    const double sx = L + (W - L - R) * k / 4.0, sy = H - B - (H - T - B) * k / 4.0;
    out << "<text x=\"" << sx << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
        << axis_label(fx, spec.log_x) << "</text>\n";
    out << "<text x=\"" << L - 6 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\">"
        << axis_label(fy, spec.log_y) << "</text>\n";
  }
  out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">"
      << escape(spec.xlabel) << "</text>\n";
  out << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (T + H - B) / 2 << ")\">" << escape(spec.ylabel) << "</text>\n";

  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& s = spec.series[k];
    const char* color = colors[k % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!drawable(s.x[i], s.y[i])) continue;
      out << (first ? "" : " ") << fmt(px(s.x[i]), 6) << ',' << fmt(py(s.y[i]), 6);
      first = false;
    }
    out << "\"/>\n";
    out << "<text x=\"" << L + 10 << "\" y=\"" << T + 16 + 14 * k << "\" fill=\"" << color << "\">"
        << escape(s.name) << "</text>\n";
  }
  out << "</svg>\n";
  finish(out, path);
}

}  // namespace cglab
