#include "fractal_lab/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <set>
#include <sstream>

#include "fractal_lab/errors.hpp"
#include "fractal_lab/io.hpp"

namespace fractal_lab {

std::vector<Experiment> builtin_experiments();  // experiments.cpp

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool parse_int(const std::string& s, long long& v) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  return !s.empty() && r.ec == std::errc() && r.ptr == s.data() + s.size();
}

bool parse_uint(const std::string& s, std::uint64_t& v) {
  if (s.empty() || s[0] == '-' || s[0] == '+') return false;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

bool parse_real(const std::string& s, double& v) {
  const char* b = s.data();
  if (!s.empty() && s[0] == '+') ++b;
  const auto r = std::from_chars(b, s.data() + s.size(), v);
  return !s.empty() && r.ec == std::errc() && r.ptr == s.data() + s.size() && std::isfinite(v);
}

bool parse_bool(const std::string& s, bool& v) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") {
    v = true;
    return true;
  }
  if (s == "false" || s == "0" || s == "no" || s == "off") {
    v = false;
    return true;
  }
  return false;
}

std::string format_bound(double x) {
  std::ostringstream ss;
  ss << x;
  return ss.str();
}

// Empty string when valid.
std::string check_value(const ConfigField& f, const std::string& raw) {
  const std::string where = "field '" + f.key + "': ";
  auto in_range = [&](double x) -> std::string {
    if (x < f.min || x > f.max)
      return where + "value " + format_bound(x) + " outside [" + format_bound(f.min) + ", " + format_bound(f.max) + "]";
    return "";
  };
  switch (f.kind) {
    case FieldKind::Int: {
      long long v;
      if (!parse_int(raw, v)) return where + "expected an integer, got '" + raw + "'";
      return in_range(static_cast<double>(v));
    }
    case FieldKind::UInt: {
      std::uint64_t v;
      if (!parse_uint(raw, v)) return where + "expected an unsigned 64-bit integer, got '" + raw + "'";
      return in_range(static_cast<double>(v));
    }
    case FieldKind::Real: {
      double v;
      if (!parse_real(raw, v)) return where + "expected a finite number, got '" + raw + "'";
      return in_range(v);
    }
    case FieldKind::Bool: {
      bool v;
      if (!parse_bool(raw, v)) return where + "expected true or false, got '" + raw + "'";
      return "";
    }
    case FieldKind::IntList:
    case FieldKind::RealList: {
      for (const auto& item : split_list(raw)) {
        double v;
        long long iv;
        if (f.kind == FieldKind::IntList ? !parse_int(item, iv) : !parse_real(item, v))
          return where + "bad list element '" + item + "' in '" + raw + "'";
        if (f.kind == FieldKind::IntList) v = static_cast<double>(iv);
        if (auto e = in_range(v); !e.empty()) return e;
      }
      return "";
    }
    case FieldKind::Choice:
      if (std::find(f.choices.begin(), f.choices.end(), raw) == f.choices.end()) {
        std::string all;
        for (const auto& c : f.choices) all += (all.empty() ? "" : ", ") + c;
        return where + "expected one of {" + all + "}, got '" + raw + "'";
      }
      return "";
  }
  return "";
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool valid_artifact_name(const std::string& name) {
  if (name.empty() || name == "result.json" || name == "manifest.json") return false;
  return std::all_of(name.begin(), name.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'; });
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::vector<std::string> validate_config(const std::vector<ConfigField>& schema, const ConfigMap& values) {
  std::vector<std::string> errors;
  std::set<std::string> known;
  for (const auto& f : schema) {
    known.insert(f.key);
    const auto it = values.find(f.key);
    const std::string& raw = it == values.end() ? f.default_value : it->second;
    if (auto e = check_value(f, raw); !e.empty()) errors.push_back(e);
  }
  for (const auto& [k, v] : values)
    if (!known.count(k)) errors.push_back("field '" + k + "': unknown key");
  return errors;
}

Config::Config(std::vector<ConfigField> schema, ConfigMap values) : schema_(std::move(schema)), values_(std::move(values)) {
  const auto errors = validate_config(schema_, values_);
  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  for (const auto& f : schema_)
    if (!values_.count(f.key)) values_[f.key] = f.default_value;
}

const ConfigField& Config::field(const std::string& key, FieldKind kind) const {
  for (const auto& f : schema_)
    if (f.key == key) {
      if (f.kind != kind) throw ConfigError("field '" + key + "' read with the wrong type");
      return f;
    }
  throw ConfigError("field '" + key + "' is not in the schema");
}

long long Config::integer(const std::string& key) const {
  field(key, FieldKind::Int);
  long long v = 0;
  parse_int(values_.at(key), v);
  return v;
}

std::uint64_t Config::uinteger(const std::string& key) const {
  field(key, FieldKind::UInt);
  std::uint64_t v = 0;
  parse_uint(values_.at(key), v);
  return v;
}

double Config::real(const std::string& key) const {
  field(key, FieldKind::Real);
  double v = 0;
  parse_real(values_.at(key), v);
  return v;
}

bool Config::flag(const std::string& key) const {
  field(key, FieldKind::Bool);
  bool v = false;
  parse_bool(values_.at(key), v);
  return v;
}

std::vector<long long> Config::integers(const std::string& key) const {
  field(key, FieldKind::IntList);
  std::vector<long long> out;
  for (const auto& s : split_list(values_.at(key))) {
    long long v = 0;
    parse_int(s, v);
    out.push_back(v);
  }
  return out;
}

std::vector<double> Config::reals(const std::string& key) const {
  field(key, FieldKind::RealList);
  std::vector<double> out;
  for (const auto& s : split_list(values_.at(key))) {
    double v = 0;
    parse_real(s, v);
    out.push_back(v);
  }
  return out;
}

const std::string& Config::text(const std::string& key) const {
  field(key, FieldKind::Choice);
  return values_.at(key);
}

std::vector<std::pair<std::string, std::string>> Config::record() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : schema_) out.emplace_back(f.key, values_.at(f.key));
  return out;
}

RunContext::RunContext(std::filesystem::path out_dir, std::uint64_t master_seed)
    : out_(std::move(out_dir)), seed_(master_seed) {}

void RunContext::artifact(const std::string& name, const std::string& bytes) {
  if (!valid_artifact_name(name)) throw InvalidArgument("artifact: bad file name '" + name + "'");
  if (std::find(artifacts_.begin(), artifacts_.end(), name) != artifacts_.end())
    throw InvalidArgument("artifact: '" + name + "' written twice");
  write_file(out_ / name, bytes);
  artifacts_.push_back(name);
}

void RunContext::metric(const std::string& key, double value) { metrics_[key] = value; }

void RunContext::verdict(const std::string& predicate, bool pass) { verdicts_[predicate] = pass; }

const std::vector<Experiment>& experiment_registry() {
  static const std::vector<Experiment> registry = [] {
    auto v = builtin_experiments();
    std::sort(v.begin(), v.end(), [](const Experiment& a, const Experiment& b) { return a.name < b.name; });
    return v;
  }();
  return registry;
}

const Experiment& find_experiment(const std::string& name) {
  for (const auto& e : experiment_registry())
    if (e.name == name) return e;
  throw UnknownExperiment("unknown experiment '" + name + "' (try 'list')");
}

std::vector<ListingEntry> list_experiments() {
  std::vector<ListingEntry> out;
  for (const auto& e : experiment_registry()) {
    ListingEntry entry{e.name, e.description, {}};
    for (const auto& f : e.schema) entry.defaults.emplace_back(f.key, f.default_value);
    out.push_back(std::move(entry));
  }
  return out;
}

bool ExperimentResult::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& kv) { return kv.second; });
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("sha256: digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

namespace {

Json manifest_json(const RunManifest& m) {
  Json j;
  j["experiment"] = m.experiment;
  Json params = Json::object();
  for (const auto& [k, v] : m.parameters) params[k] = v;
  j["parameters"] = params;
  j["master_seed"] = m.master_seed;
  j["tool_version"] = m.tool_version;
  j["started"] = m.started;
  j["finished"] = m.finished;
  Json files = Json::array();
  for (const auto& f : m.files) files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  j["files"] = files;
  return j;
}

}  // namespace

ExperimentResult run_experiment(const std::string& name, const ConfigMap& overrides, std::uint64_t master_seed,
                                const std::filesystem::path& out_dir) {
  const Experiment& exp = find_experiment(name);
  const Config config(exp.schema, overrides);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  RunManifest manifest;
  manifest.experiment = name;
  manifest.parameters = config.record();
  manifest.master_seed = master_seed;
  manifest.tool_version = kToolVersion;
  manifest.started = utc_now();

  RunContext ctx(out_dir, master_seed);
  exp.body(config, ctx);

  ExperimentResult result{name, ctx.metrics(), ctx.verdicts(), ctx.artifacts()};
  for (const auto& p : exp.predicates)
    if (!result.verdicts.count(p)) throw std::logic_error("experiment " + name + " gave no verdict for " + p);

  Json r;
  r["name"] = name;
  r["master_seed"] = master_seed;
  Json params = Json::object();
  for (const auto& [k, v] : manifest.parameters) params[k] = v;
  r["parameters"] = params;
  Json metrics = Json::object();
  for (const auto& [k, v] : result.metrics) metrics[k] = v;
  r["metrics"] = metrics;
  Json verdicts = Json::object();
  for (const auto& [k, v] : result.verdicts) verdicts[k] = v;
  r["verdicts"] = verdicts;
  r["passed"] = result.passed();
  r["artifacts"] = result.artifacts;
  write_file(out_dir / "result.json", r.dump(2) + "\n");

  for (const auto& a : result.artifacts) {
    const std::string bytes = read_file(out_dir / a);
    manifest.files.push_back({a, sha256_hex(bytes), bytes.size()});
  }
  const std::string rbytes = read_file(out_dir / "result.json");
  manifest.files.push_back({"result.json", sha256_hex(rbytes), rbytes.size()});
  manifest.finished = utc_now();
  write_file(out_dir / "manifest.json", manifest_json(manifest).dump(2) + "\n");
  if (!verify_manifest(out_dir)) throw IoError("manifest digests do not match the files in " + out_dir.string());
  return result;
}

bool verify_manifest(const std::filesystem::path& out_dir) {
  const Json m = Json::parse(read_file(out_dir / "manifest.json"));
  for (const auto& f : m.at("files")) {
    const std::string bytes = read_file(out_dir / f.at("path").get<std::string>());
    if (bytes.size() != f.at("bytes").get<std::uint64_t>()) return false;
    if (sha256_hex(bytes) != f.at("sha256").get<std::string>()) return false;
  }
  return true;
}

}  // namespace fractal_lab
