#pragma once

// Symbol-spec parsing, deterministic JSON/CSV emission and run manifests.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "focklab/counterexample.hpp"
#include "focklab/errors.hpp"
#include "focklab/irreversibility.hpp"
#include "focklab/kernel_tests.hpp"
#include "focklab/spectrum.hpp"
#include "focklab/symbols.hpp"

#ifndef FOCKLAB_VERSION
#define FOCKLAB_VERSION "0.0.0"
#endif

namespace focklab {

using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Parsing

using SymbolSpec = std::variant<RadialSymbol, AnnuliConfig>;

namespace detail {

inline void reject_unknown(const ojson& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) throw ParseError(path + "." + it.key(), "unknown key");
  }
}

inline double get_number(const ojson& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) throw ParseError(path + "." + key, "missing required number");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ParseError(path + "." + key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ParseError(path + "." + key, "number must be finite");
  return x;
}

inline double get_number_or(const ojson& obj, const std::string& path, const char* key, double fallback) {
  return obj.contains(key) ? get_number(obj, path, key) : fallback;
}

inline int get_int_or(const ojson& obj, const std::string& path, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ParseError(path + "." + key, "expected an integer");
  const auto x = v.get<long long>();
  if (x < -2147483647LL || x > 2147483647LL) throw ParseError(path + "." + key, "integer out of range");
  return static_cast<int>(x);
}

inline bool get_bool_or(const ojson& obj, const std::string& path, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) throw ParseError(path + "." + key, "expected a boolean");
  return v.get<bool>();
}

inline AnnuliConfig parse_annuli(const ojson& p, const std::string& path) {
  reject_unknown(p, path, {"kind", "n_min", "n_max", "c", "smooth", "truncated"});
  AnnuliConfig c;
  c.n_min = get_int_or(p, path, "n_min", 2);
  c.n_max = get_int_or(p, path, "n_max", 200);
  c.c = get_number_or(p, path, "c", 1e-3);
  c.smooth = get_bool_or(p, path, "smooth", false);
  c.truncated = get_bool_or(p, path, "truncated", false);
  c.validate();
  return c;
}

}  // namespace detail

/// Parses the JSON symbol specification. A spec whose only piece is an
/// annuli family yields its AnnuliConfig; anything else yields a RadialSymbol.
inline SymbolSpec parse_symbol_spec(const std::string& text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const ojson::exception& e) {
    throw ParseError("$", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("$", "expected an object");
  detail::reject_unknown(doc, "$", {"name", "pieces"});
  std::string name = "symbol";
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw ParseError("$.name", "expected a string");
    name = doc["name"].get<std::string>();
  }
  if (!doc.contains("pieces") || !doc["pieces"].is_array()) throw ParseError("$.pieces", "expected an array");
  const auto& pieces = doc["pieces"];
  std::vector<SymbolTerm> terms;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const std::string path = "$.pieces[" + std::to_string(i) + "]";
    const auto& p = pieces[i];
    if (!p.is_object()) throw ParseError(path, "expected an object");
    if (!p.contains("kind") || !p["kind"].is_string()) throw ParseError(path + ".kind", "expected a string");
    const std::string kind = p["kind"].get<std::string>();
    if (kind == "power") {
      detail::reject_unknown(p, path, {"kind", "alpha", "support", "amplitude"});
      PowerPiece pp;
      pp.alpha = detail::get_number(p, path, "alpha");
      pp.amplitude = detail::get_number_or(p, path, "amplitude", 1.0);
      if (p.contains("support") && !p["support"].is_null()) {
        const auto& s = p["support"];
        if (!s.is_array() || s.size() != 2) throw ParseError(path + ".support", "expected [lo, hi] or null");
        if (!s[0].is_number()) throw ParseError(path + ".support[0]", "expected a number");
        pp.lo = s[0].get<double>();
        if (s[1].is_null())
          pp.hi = kInf;
        else if (s[1].is_number())
          pp.hi = s[1].get<double>();
        else
          throw ParseError(path + ".support[1]", "expected a number or null");
        if (!std::isfinite(pp.lo)) throw ParseError(path + ".support[0]", "number must be finite");
      }
      terms.emplace_back(pp);
    } else if (kind == "annuli") {
      terms.emplace_back(AnnuliFamily{detail::parse_annuli(p, path), 1});
    } else if (kind == "annulus") {
      detail::reject_unknown(p, path, {"kind", "a", "rho", "d", "smooth"});
      AnnulusPiece a;
      a.center = detail::get_number(p, path, "a");
      a.half_width = detail::get_number(p, path, "rho");
      a.amplitude = detail::get_number(p, path, "d");
      a.smooth = detail::get_bool_or(p, path, "smooth", false);
      terms.emplace_back(a);
    } else {
      throw ParseError(path + ".kind", "unknown piece kind '" + kind + "'");
    }
  }
  if (terms.size() == 1)
    if (const auto* f = std::get_if<AnnuliFamily>(&terms.front())) return f->cfg;
  return RadialSymbol(name, std::move(terms));
}

/// Builds the evaluable symbol for either spec alternative.
inline RadialSymbol as_symbol(const SymbolSpec& spec) {
  if (const auto* s = std::get_if<RadialSymbol>(&spec)) return *s;
  return build_annuli_symbol(std::get<AnnuliConfig>(spec));
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline SymbolSpec load_symbol_spec(const std::string& path) {
  try {
    return parse_symbol_spec(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ":" + e.path(), e.message());
  }
}

// ---------------------------------------------------------------------------
// Serialization of specs

inline ojson to_json(const AnnuliConfig& c) {
  ojson j;
  j["kind"] = "annuli";
  j["n_min"] = c.n_min;
  j["n_max"] = c.n_max;
  j["c"] = c.c;
  j["smooth"] = c.smooth;
  j["truncated"] = c.truncated;
  return j;
}

inline ojson to_json(const SymbolTerm& t) {
  if (const auto* p = std::get_if<PowerPiece>(&t)) {
    ojson j;
    j["kind"] = "power";
    j["alpha"] = p->alpha;
    if (p->amplitude != 1.0) j["amplitude"] = p->amplitude;
    if (p->whole_plane())
      j["support"] = nullptr;
    else
      j["support"] = ojson::array({p->lo, p->hi == kInf ? ojson(nullptr) : ojson(p->hi)});
    return j;
  }
  if (const auto* a = std::get_if<AnnulusPiece>(&t)) {
    if (a->profile_power != 1) throw ValidationError("to_json: squared annulus pieces have no spec form");
    ojson j;
    j["kind"] = "annulus";
    j["a"] = a->center;
    j["rho"] = a->half_width;
    j["d"] = a->amplitude;
    j["smooth"] = a->smooth;
    return j;
  }
  const auto& f = std::get<AnnuliFamily>(t);
  if (f.power != 1) throw ValidationError("to_json: squared annuli families have no spec form");
  return to_json(f.cfg);
}

inline ojson to_json(const SymbolSpec& spec) {
  ojson j;
  if (const auto* c = std::get_if<AnnuliConfig>(&spec)) {
    j["name"] = c->smooth ? "annuli-smooth" : "annuli";
    j["pieces"] = ojson::array({to_json(*c)});
    return j;
  }
  const auto& s = std::get<RadialSymbol>(spec);
  j["name"] = s.name();
  j["pieces"] = ojson::array();
  for (const auto& t : s.terms()) j["pieces"].push_back(to_json(t));
  return j;
}

// ---------------------------------------------------------------------------
// Deterministic emission

inline std::string format_double(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void emit(const ojson& j, std::string& out, int indent) {
  const std::string pad(std::size_t(indent) * 2, ' ');
  const std::string pad_in(std::size_t(indent + 1) * 2, ' ');
  switch (j.type()) {
    case ojson::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in + ojson(it.key()).dump() + ": ";
        emit(it.value(), out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case ojson::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad_in;
        emit(j[i], out, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case ojson::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Pretty JSON with insertion-ordered keys and %.17g floats.
inline std::string dump_json(const ojson& j) {
  std::string out;
  detail::emit(j, out, 0);
  out += "\n";
  return out;
}

/// RFC-4180 field quoting.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw ValidationError("csv: row width does not match header");
    rows_.push_back(std::move(row));
  }
  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out += ',';
        out += csv_field(r[i]);
      }
      out += "\r\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(path + ": cannot open for writing");
  out << content;
  if (!out) throw Error(path + ": write failed");
}

// ---------------------------------------------------------------------------
// Manifest

inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::string tool_version = FOCKLAB_VERSION;
  std::string started_utc;
  std::string finished_utc;
  std::map<std::string, double> tolerances;

  /// Fields that depend only on the configuration; embedded in artifacts.
  ojson deterministic_json() const {
    ojson j;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["tool_version"] = tool_version;
    ojson t = ojson::object();
    for (const auto& [k, v] : tolerances) t[k] = v;
    j["tolerances"] = t;
    return j;
  }
  ojson full_json() const {
    ojson j = deterministic_json();
    j["started_utc"] = started_utc;
    j["finished_utc"] = finished_utc;
    return j;
  }
};

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline RunManifest make_manifest(const std::string& command, const ojson& config, double tol) {
  RunManifest m;
  m.command = command;
  m.config_hash = fnv1a_hex(config.dump());
  m.started_utc = utc_now();
  m.tolerances["tol"] = tol;
  return m;
}

// ---------------------------------------------------------------------------
// Report serialization

inline ojson to_json(const KernelScan& s) {
  ojson j;
  j["order"] = to_string(s.order);
  j["verdict"] = to_string(s.verdict);
  j["sup"] = s.sup;
  j["tail_bound"] = s.tail_bound;
  j["last_third_increasing"] = s.last_third_increasing;
  j["growth_ratio"] = s.growth_ratio;
  ojson rows = ojson::array();
  for (std::size_t i = 0; i < s.centers.size(); ++i) {
    ojson r;
    r["center"] = s.centers[i];
    r["value"] = s.values[i];
    r["tail_bound"] = s.tail_bounds[i];
    r["cumulative_sup"] = s.cumulative_sup[i];
    rows.push_back(r);
  }
  j["scan"] = rows;
  return j;
}

inline CsvTable to_csv(const KernelScan& s) {
  CsvTable t({"center", "value", "tail_bound", "cumulative_sup"});
  for (std::size_t i = 0; i < s.centers.size(); ++i)
    t.add_row({csv_number(s.centers[i]), csv_number(s.values[i]), csv_number(s.tail_bounds[i]),
               csv_number(s.cumulative_sup[i])});
  return t;
}

inline ojson to_json(const FitRecord& f) {
  ojson j;
  j["model"] = to_string(f.model);
  j["exponent"] = f.exponent;
  j["constant"] = f.constant;
  j["c_lo"] = f.c_lo;
  j["c_hi"] = f.c_hi;
  return j;
}

inline ojson to_json(const SpectralProfile& p) {
  ojson j;
  j["mode"] = to_string(p.mode);
  j["m_max"] = p.m_max;
  j["verdict"] = p.bounded ? "Bounded" : "Unbounded";
  j["evidence"] = p.evidence;
  j["tail_exponent"] = p.tail_exponent;
  j["sup"] = p.sup;
  j["sup_index"] = p.sup_index;
  j["sup_near_horizon"] = p.sup_near_horizon;
  j["first_divergent"] = p.first_divergent;
  ojson ev = ojson::array();
  for (std::size_t m = 0; m < p.eigenvalues.size(); ++m) {
    const auto& e = p.eigenvalues[m];
    ojson r;
    r["m"] = m;
    r["lambda"] = e.value;
    r["log_lambda"] = e.log().log_abs;
    ev.push_back(r);
  }
  j["eigenvalues"] = ev;
  return j;
}

inline CsvTable to_csv(const SpectralProfile& p) {
  CsvTable t({"m", "lambda", "log_lambda"});
  for (std::size_t m = 0; m < p.eigenvalues.size(); ++m) {
    const auto& e = p.eigenvalues[m];
    t.add_row({std::to_string(m), csv_number(e.value), csv_number(e.log().log_abs)});
  }
  return t;
}

inline ojson to_json(const std::vector<PowerVerdict>& rows) {
  ojson arr = ojson::array();
  auto word = [](bool b) { return b ? "bounded" : "unbounded"; };
  for (const auto& v : rows) {
    ojson r;
    r["alpha"] = v.alpha;
    r["heat"] = word(v.heat_bounded);
    r["T"] = word(v.t_bounded);
    r["U"] = word(v.u_bounded);
    r["heat_evidence"] = v.heat_evidence;
    r["T_evidence"] = v.t_evidence;
    r["U_evidence"] = v.u_evidence;
    arr.push_back(r);
  }
  return arr;
}

inline CsvTable to_csv(const std::vector<PowerVerdict>& rows) {
  CsvTable t({"alpha", "heat", "T", "U"});
  auto word = [](bool b) { return std::string(b ? "bounded" : "unbounded"); };
  for (const auto& v : rows) t.add_row({csv_number(v.alpha), word(v.heat_bounded), word(v.t_bounded), word(v.u_bounded)});
  return t;
}

inline ojson to_json(const CounterexampleReport& R) {
  ojson j;
  j["config"] = to_json(R.config);
  j["probes"] = R.probes;
  ojson adm = ojson::array();
  for (const auto& a : R.admissibility) {
    ojson r;
    r["center"] = a.center;
    r["admissible"] = a.result.admissible;
    r["value"] = a.result.value;
    r["tail_bound"] = a.result.tail_bound;
    adm.push_back(r);
  }
  j["admissibility"] = adm;
  ojson heat = ojson::array();
  for (const auto& h : R.heat) {
    ojson r;
    r["t"] = h.t;
    r["x"] = h.x;
    r["value"] = h.value;
    r["bound"] = h.bound;
    r["ok"] = h.ok;
    heat.push_back(r);
  }
  j["heat"] = heat;
  ojson t;
  t["sup"] = R.t_scan.sup;
  t["ceiling"] = R.t_ceiling;
  t["tail"] = R.l1.tail_bound;
  t["l1_partial"] = R.l1.partial;
  t["verdict"] = to_string(R.t_scan.verdict);
  t["ok"] = R.t_ok;
  j["t_side"] = t;
  ojson u;
  u["scan"] = to_json(R.u_scan)["scan"];
  u["verdict"] = to_string(R.u_scan.verdict);
  u["growth_ratio"] = R.u_scan.growth_ratio;
  u["growth_50_to_max"] = R.u_growth_50_to_max;
  u["floors_ok"] = R.u_floors_ok;
  ojson fr = ojson::array();
  for (const auto& e : R.fn_ratios) {
    ojson r;
    r["n"] = e.n;
    r["ug_norm_sq"] = e.ug_norm_sq;
    r["fn_norm_sq"] = e.fn_norm_sq;
    r["ratio"] = e.ratio;
    r["floor"] = e.floor;
    r["ratio_over_log_sq"] = e.over_log_sq;
    fr.push_back(r);
  }
  u["fn_ratios"] = fr;
  u["fn_band"] = R.fn_band;
  u["fn_ratios_ok"] = R.fn_ratios_ok;
  u["fit"] = R.fit_ok ? to_json(R.fit) : ojson(nullptr);
  u["log_squared_fit"] = R.log_squared_fit;
  u["insufficient_range"] = R.insufficient_range;
  u["ok"] = R.u_ok;
  j["u_side"] = u;
  j["failures"] = R.failures;
  j["passed"] = R.passed;
  return j;
}

inline ojson to_json(const BumpFamily& f, const ConstraintCheck& c, const IrreversibilityReport& R) {
  ojson j;
  j["t0"] = f.times.t0;
  j["t1"] = f.times.t1;
  ojson bumps = ojson::array();
  for (std::size_t i = 0; i < f.bumps.size(); ++i) {
    const auto& b = f.bumps[i];
    ojson r;
    r["xi"] = ojson::array({b.xi.real(), b.xi.imag()});
    r["z"] = ojson::array({b.z.real(), b.z.imag()});
    r["log_amplitude"] = b.log_amp;
    r["tail_term"] = c.tail_terms[i];
    r["overlap_sum"] = c.overlap_sums[i];
    r["g_t1_at_center"] = R.values_t1[i];
    r["floor_t1"] = R.floors_t1[i];
    bumps.push_back(r);
  }
  j["bumps"] = bumps;
  ojson cons;
  cons["min_separation"] = c.min_separation;
  cons["separation_ok"] = c.separation_ok;
  cons["tail_sum"] = c.tail_sum;
  cons["tail_ok"] = c.tail_ok;
  cons["overlap_ok"] = c.overlap_ok;
  j["constraints"] = cons;
  j["sup_t0"] = R.sup_t0;
  j["ceiling_t0"] = R.ceiling_t0;
  j["bounded_ok"] = R.bounded_ok;
  j["floors_ok"] = R.floors_ok;
  ojson adm = ojson::array();
  for (std::size_t i = 0; i < R.probe_centers.size(); ++i) {
    ojson r;
    r["a"] = ojson::array({R.probe_centers[i].real(), R.probe_centers[i].imag()});
    r["norm_sq"] = R.coherent_norms[i];
    adm.push_back(r);
  }
  j["admissibility"] = adm;
  j["growth_ratio"] = R.growth_ratio;
  j["failures"] = R.failures;
  j["passed"] = R.passed && c.all();
  return j;
}

}  // namespace focklab
