#include "symbiosim/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "symbiosim/parallel.hpp"

namespace symbiosim {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_real(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

std::uint64_t parse_count(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

bool parse_flag(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

struct Field {
  std::string key;
  void (*set)(RunConfig&, const std::string& key, const std::string& value);
  std::string (*get)(const RunConfig&);
};

#define REAL_FIELD(KEY, MEMBER)                                                                \
  Field {                                                                                      \
    KEY, [](RunConfig& c, const std::string& k, const std::string& v) {                        \
      c.MEMBER = parse_real(k, v);                                                             \
    },                                                                                         \
        [](const RunConfig& c) { return format_double(c.MEMBER); }                             \
  }
#define COUNT_FIELD(KEY, MEMBER)                                                               \
  Field {                                                                                      \
    KEY, [](RunConfig& c, const std::string& k, const std::string& v) {                        \
      c.MEMBER = static_cast<decltype(c.MEMBER)>(parse_count(k, v));                           \
    },                                                                                         \
        [](const RunConfig& c) { return std::to_string(c.MEMBER); }                            \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      REAL_FIELD("market.p_m", params.p_m),
      REAL_FIELD("market.c_t", params.c_t),
      REAL_FIELD("market.c_d", params.c_d),
      REAL_FIELD("market.s", params.s),
      REAL_FIELD("market.rho", params.rho),
      REAL_FIELD("market.cs", params.cs),
      COUNT_FIELD("population.n_firms", params.n_firms),
      COUNT_FIELD("population.n_clusters", params.n_clusters),
      REAL_FIELD("population.buyer_fraction", params.buyer_fraction),
      REAL_FIELD("population.beta_min", params.beta_range.first),
      REAL_FIELD("population.beta_max", params.beta_range.second),
      REAL_FIELD("population.demand_min", params.demand_range.first),
      REAL_FIELD("population.demand_max", params.demand_range.second),
      COUNT_FIELD("learning.K", params.K),
      REAL_FIELD("learning.alpha", params.alpha),
      REAL_FIELD("learning.tau_0", params.tau_0),
      REAL_FIELD("learning.tau_min", params.tau_min),
      REAL_FIELD("learning.decay", params.decay),
      COUNT_FIELD("run.horizon", params.horizon),
      COUNT_FIELD("run.seed", params.seed),
      Field{"run.record_contracts",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.record_contracts = parse_flag(k, v);
            },
            [](const RunConfig& c) { return std::string(c.record_contracts ? "true" : "false"); }},
      Field{"run.regret_mode",
            [](RunConfig& c, const std::string&, const std::string& v) {
              c.regret = RegretSchedule::parse(v);
            },
            [](const RunConfig& c) { return c.regret.to_string(); }},
      COUNT_FIELD("run.snapshot_interval", snapshot_interval),
  };
  return table;
}

#undef REAL_FIELD
#undef COUNT_FIELD

const Field& field(const std::string& canonical) {
  for (const auto& f : fields()) {
    if (f.key == canonical) return f;
  }
  throw ConfigError(canonical + ": unknown configuration key");
}

void finalize(const RunConfig& config) {
  config.params.validate();
  if (config.params.horizon < 1) throw ConfigError("run.horizon: must be >= 1");
}

}  // namespace

std::span<const std::string> config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

std::string canonical_key(const std::string& key) {
  std::string match;
  for (const auto& f : fields()) {
    if (f.key == key) return key;
    const auto dot = f.key.rfind('.');
    if (f.key.substr(dot + 1) == key) {
      if (!match.empty()) throw ConfigError(key + ": ambiguous configuration key");
      match = f.key;
    }
  }
  if (match.empty()) throw ConfigError(key + ": unknown configuration key");
  return match;
}

RunConfig parse_config(const std::string& text, const std::string& source,
                       std::span<const std::string> overrides) {
  RunConfig config;
  std::map<std::string, std::size_t> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string value = trim(line.substr(eq + 1));
    try {
      const std::string key = canonical_key(trim(line.substr(0, eq)));
      if (seen.contains(key)) {
        throw ConfigError(key + ": duplicate key (first set on line " +
                          std::to_string(seen[key]) + ")");
      }
      seen[key] = line_no;
      field(key).set(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  for (const char* key : kRequiredKeys) {
    if (!seen.contains(key)) {
      throw ConfigError(source + ": " + key + ": missing required field");
    }
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--override " + ov + ": expected key=value");
    }
    try {
      const std::string key = canonical_key(trim(ov.substr(0, eq)));
      field(key).set(config, key, trim(ov.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("--override: ") + e.what());
    }
  }
  try {
    finalize(config);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot read configuration file");
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  if (path.extension() == ".json") {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
    if (!doc.contains("config") || !doc["config"].is_object()) {
      throw ConfigError(path.string() + ": manifest has no 'config' object");
    }
    std::string flat;
    for (const auto& [key, value] : doc["config"].items()) {
      flat += key + " = " + (value.is_string() ? value.get<std::string>() : value.dump()) + "\n";
    }
    text = std::move(flat);
  }
  return parse_config(text, path.string(), overrides);
}

std::map<std::string, std::string> config_entries(const RunConfig& config) {
  std::map<std::string, std::string> out;
  for (const auto& f : fields()) out[f.key] = f.get(config);
  return out;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  const std::string canonical = canonical_key(key);
  field(canonical).set(config, canonical, value);
}

nlohmann::json config_to_json(const RunConfig& config) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& f : fields()) doc[f.key] = f.get(config);
  return doc;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot read");
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::string timeseries_csv(std::span<const TimestepRecord> records) {
  std::string out = "t,mean_price,si,traded_qty,total_reward,total_regret,tau\n";
  for (const auto& r : records) {
    out += std::to_string(r.t);
    out += ',';
    if (r.mean_price) out += format_double(*r.mean_price);
    out += ',' + format_double(r.si);
    out += ',' + format_double(r.traded_qty);
    out += ',' + format_double(r.total_reward());
    out += ',';
    if (const auto regret = r.total_regret()) out += format_double(*regret);
    out += ',' + format_double(r.tau);
    out += '\n';
  }
  return out;
}

std::string regret_csv(std::span<const TimestepRecord> records, std::size_t n_sellers,
                       std::size_t window) {
  std::string out = "t";
  for (std::size_t j = 0; j < n_sellers; ++j) out += ",regret_" + std::to_string(j);
  out += ",total_regret,mean_regret,rolling_median_total\n";
  std::vector<const TimestepRecord*> rows;
  std::vector<double> totals;
  for (const auto& r : records) {
    if (!r.regret) continue;
    rows.push_back(&r);
    totals.push_back(r.regret->total_regret);
  }
  const std::vector<double> median = rolling_median(totals, window);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RegretRecord& rec = *rows[i]->regret;
    out += std::to_string(rows[i]->t);
    for (double v : rec.per_seller_regret) out += ',' + format_double(v);
    out += ',' + format_double(rec.total_regret);
    out += ',' + format_double(rec.mean_regret());
    out += ',' + format_double(median[i]);
    out += '\n';
  }
  return out;
}

std::string contracts_jsonl(std::span<const std::vector<Contract>> per_step) {
  std::string out;
  for (std::size_t t = 0; t < per_step.size(); ++t) {
    for (const auto& c : per_step[t]) {
      const nlohmann::json row = {{"t", t},           {"round", c.round},
                                  {"buyer", c.buyer_id}, {"seller", c.seller_id},
                                  {"qty", c.qty},     {"unit_price", c.unit_price}};
      out += row.dump() + "\n";
    }
  }
  return out;
}

std::string snapshots_jsonl(std::span<const PolicySnapshot> snapshots) {
  std::string out;
  for (const auto& snap : snapshots) {
    nlohmann::json row = {{"t", snap.t}};
    auto& sellers = row["sellers"] = nlohmann::json::array();
    for (const auto& p : snap.policies) sellers.push_back(to_json(p));
    out += row.dump() + "\n";
  }
  return out;
}

Manifest::Manifest(std::string command, std::filesystem::path out_dir)
    : out_dir_(std::move(out_dir)), start_(std::chrono::steady_clock::now()) {
  doc_["tool"] = kToolName;
  doc_["version"] = kToolVersion;
  doc_["schema_version"] = kSchemaVersion;
  doc_["command"] = std::move(command);
  doc_["files"] = nlohmann::json::array();
  doc_["runs"] = nlohmann::json::array();
}

void Manifest::set(const std::string& key, nlohmann::json value) { doc_[key] = std::move(value); }

void Manifest::emit(const std::string& relative, const std::string& content) {
  write_file(out_dir_ / relative, content);
  doc_["files"].push_back(
      {{"path", relative}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
}

void Manifest::add_file(const std::string& relative, std::size_t bytes, const std::string& sha256) {
  doc_["files"].push_back({{"path", relative}, {"bytes", bytes}, {"sha256", sha256}});
}

void Manifest::add_run(nlohmann::json run) { doc_["runs"].push_back(std::move(run)); }

void Manifest::finish() {
  doc_["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  write_file(out_dir_ / "manifest.json", doc_.dump(2) + "\n");
}

std::vector<BatchOutcome> run_batch(std::size_t n, std::size_t workers,
                                    const std::function<void(std::size_t)>& job) {
  std::vector<BatchOutcome> outcomes(n);
  parallel_for(n, workers, [&](std::size_t i) {
    BatchOutcome& o = outcomes[i];
    o.index = i;
    const auto start = std::chrono::steady_clock::now();
    try {
      job(i);
      o.ok = true;
    } catch (const std::exception& e) {
      o.error = e.what();
    }
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  return outcomes;
}

GridAxis parse_grid_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("--grid " + text + ": expected key=values");
  GridAxis axis;
  axis.key = canonical_key(trim(text.substr(0, eq)));
  const std::string spec = trim(text.substr(eq + 1));
  if (spec.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(parse_real(axis.key, trim(item)));
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
      throw ConfigError("--grid " + text + ": expected start:stop:step with step > 0");
    }
    const auto steps = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    for (std::size_t k = 0; k <= steps; ++k) {
      axis.values.push_back(parts[0] + static_cast<double>(k) * parts[2]);
    }
  } else {
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) axis.values.push_back(parse_real(axis.key, trim(item)));
  }
  if (axis.values.empty()) throw ConfigError("--grid " + text + ": no values");
  return axis;
}

}  // namespace symbiosim
