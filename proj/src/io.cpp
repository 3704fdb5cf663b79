#include "qecho/io.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace qecho {

using nlohmann::json;

namespace {

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

const char* engine_name(Engine e) { return e == Engine::mps ? "mps" : "statevec"; }

}  // namespace

QubitLayout RunConfig::layout() const {
  return lattice == Lattice::grid ? build_grid(rows, cols) : build_chain(n);
}

int RunConfig::num_qubits() const { return lattice == Lattice::grid ? rows * cols : n; }

json RunConfig::to_json() const {
  json lat = lattice == Lattice::grid ? json{{"type", "grid"}, {"rows", rows}, {"cols", cols}}
                                      : json{{"type", "chain"}, {"n", n}};
  json j = {{"lattice", lat},     {"p2", p2},
            {"q", q},             {"d_max", d_max},
            {"n_traj", n_traj},   {"master_seed", master_seed},
            {"noise_seed", noise_seed}, {"engine", engine_name(engine)},
            {"generator_scale", generator_scale}};
  j["chi"] = chi == kUnboundedBond ? json(nullptr) : json(chi);
  if (!output_dir.empty()) j["output_dir"] = output_dir;
  return j;
}

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what(), line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object", 1);

  static const std::set<std::string> known = {"lattice", "p2",   "q",          "d_max",  "n_traj",         "chi",
                                              "master_seed", "noise_seed", "engine", "output_dir", "generator_scale"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "'", line_of_key(text, key));
  }
  auto fail = [&](const std::string& key, const std::string& message) -> ConfigError {
    return ConfigError(key + ": " + message, line_of_key(text, key));
  };
  auto require = [&](const std::string& key) -> const json& {
    if (!j.contains(key)) throw ConfigError("missing required key '" + key + "'", 0);
    return j.at(key);
  };
  auto number = [&](const std::string& key) {
    const json& v = require(key);
    if (!v.is_number()) throw fail(key, "expected a number");
    return v.get<double>();
  };
  auto integer = [&](const std::string& key) {
    const json& v = require(key);
    if (!v.is_number_integer()) throw fail(key, "expected an integer");
    return v.get<std::int64_t>();
  };
  auto unsigned_integer = [&](const std::string& key) {
    const json& v = require(key);
    if (!v.is_number_unsigned()) throw fail(key, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  };

  RunConfig c;
  const json& lat = require("lattice");
  if (!lat.is_object() || !lat.contains("type") || !lat.at("type").is_string()) {
    throw fail("lattice", "expected {\"type\": \"chain\"|\"grid\", ...}");
  }
  const std::string type = lat.at("type").get<std::string>();
  auto lattice_int = [&](const char* key) {
    if (!lat.contains(key) || !lat.at(key).is_number_integer()) {
      throw fail("lattice", std::string("needs integer '") + key + "'");
    }
    return lat.at(key).get<int>();
  };
  if (type == "chain") {
    c.lattice = Lattice::chain;
    c.n = lattice_int("n");
    if (c.n < 2) throw fail("lattice", "chain needs n >= 2");
  } else if (type == "grid") {
    c.lattice = Lattice::grid;
    c.rows = lattice_int("rows");
    c.cols = lattice_int("cols");
    if (c.rows < 2 || c.cols < 2) throw fail("lattice", "grid needs rows >= 2 and cols >= 2");
    c.n = c.rows * c.cols;
  } else {
    throw fail("lattice", "unknown lattice type '" + type + "'");
  }

  c.p2 = number("p2");
  if (!(c.p2 >= 0.0 && c.p2 <= 0.1)) throw fail("p2", "must lie in [0, 0.1]");
  c.q = j.contains("q") ? number("q") : 0.0;
  if (!(c.q >= 0.0 && c.q < 0.5)) throw fail("q", "must lie in [0, 0.5)");
  const auto d_max = integer("d_max");
  if (d_max < 0 || d_max > 1000000) throw fail("d_max", "must lie in [0, 10^6]");
  c.d_max = static_cast<int>(d_max);
  c.n_traj = unsigned_integer("n_traj");
  if (c.n_traj < 2) throw fail("n_traj", "needs at least 2 trajectories for standard errors");
  c.master_seed = unsigned_integer("master_seed");
  c.noise_seed = j.contains("noise_seed") ? unsigned_integer("noise_seed") : c.master_seed;

  const std::string engine = j.contains("engine") ? j.at("engine").get<std::string>() : "statevec";
  if (engine == "statevec") {
    c.engine = Engine::statevec;
  } else if (engine == "mps") {
    c.engine = Engine::mps;
  } else {
    throw fail("engine", "expected \"statevec\" or \"mps\"");
  }
  if (j.contains("chi") && !j.at("chi").is_null()) {
    const auto chi = integer("chi");
    if (chi < 1 || chi > 1 << 20) throw fail("chi", "must lie in [1, 2^20]");
    c.chi = static_cast<int>(chi);
  }
  if (c.engine == Engine::mps && c.lattice != Lattice::chain) throw fail("engine", "mps requires chain");
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) throw fail("output_dir", "expected a string");
    c.output_dir = j.at("output_dir").get<std::string>();
  }
  if (j.contains("generator_scale")) {
    c.generator_scale = number("generator_scale");
    if (!(c.generator_scale > 0.0)) throw fail("generator_scale", "must be positive");
  }
  return c;
}

std::string content_digest(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_digest(const RunConfig& config) {
  json j = config.to_json();
  j.erase("output_dir");
  j["code_version"] = kCodeVersion;
  return content_digest(j.dump());
}

NoiseModel noise_model_for(const RunConfig& config) {
  NoiseModelOptions options;
  options.channel.generator_scale = config.generator_scale;
  options.spam_q = config.q;
  return build_noise_model(config.layout(), config.p2, config.noise_seed, options);
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_results_csv(std::ostream& os, const FidelityTable& table, bool with_truncation) {
  os << "depth,count,mean,stderr" << (with_truncation ? ",trunc_weight" : "") << '\n';
  for (const TableRow& r : table.rows) {
    os << r.depth << ',' << r.count << ',' << format_double(r.mean) << ',' << format_double(r.std_error);
    if (with_truncation) os << ',' << format_double(r.trunc_weight);
    os << '\n';
  }
}

FidelityTable read_results_csv(std::istream& is, int num_qubits) {
  FidelityTable table;
  table.num_qubits = num_qubits;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  bool with_trunc = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line == "depth,count,mean,stderr") {
        with_trunc = false;
      } else if (line == "depth,count,mean,stderr,trunc_weight") {
        with_trunc = true;
      } else {
        throw ConfigError("unexpected CSV header '" + line + "'", line_no);
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != (with_trunc ? 5u : 4u)) throw ConfigError("wrong number of CSV fields", line_no);
    TableRow r;
    try {
      std::size_t used = 0;
      r.depth = std::stoi(fields[0], &used);
      if (used != fields[0].size()) throw std::invalid_argument("depth");
      r.count = std::stoull(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("count");
      r.mean = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("mean");
      r.std_error = std::stod(fields[3], &used);
      if (used != fields[3].size()) throw std::invalid_argument("stderr");
      if (with_trunc) r.trunc_weight = std::stod(fields[4]);
    } catch (const std::logic_error&) {
      throw ConfigError("malformed CSV number", line_no);
    }
    if (!table.rows.empty() && r.depth <= table.rows.back().depth) {
      throw ConfigError("depths must be strictly increasing", line_no);
    }
    if (r.depth < 0 || r.std_error < 0.0) throw ConfigError("negative depth or stderr", line_no);
    table.rows.push_back(r);
  }
  if (!header_seen) throw ConfigError("missing CSV header", line_no);
  return table;
}

json campaign_manifest(const RunConfig& config) {
  return {{"format", "qecho-manifest"},
          {"code_version", kCodeVersion},
          {"config", config.to_json()},
          {"config_digest", config_digest(config)},
          {"master_seed", config.master_seed},
          {"noise_seed", config.noise_seed},
          {"num_qubits", config.num_qubits()},
          {"results", "results.csv"}};
}

json fit_to_json(const FitResult& fit) {
  json points = json::array();
  for (const FitPoint& p : fit.points) {
    points.push_back({{"depth", p.depth}, {"y", p.y}, {"sigma", p.sigma}, {"fitted", p.fitted}, {"residual", p.residual}});
  }
  return {{"f0_tilde", fit.f0_tilde},
          {"lambda", fit.lambda},
          {"f0_tilde_stderr", fit.f0_tilde_stderr},
          {"lambda_stderr", fit.lambda_stderr},
          {"d_lo", fit.d_lo},
          {"d_hi", fit.d_hi},
          {"chi2_per_dof", fit.chi2_per_dof},
          {"floor_subtracted", fit.floor_subtracted},
          {"floor", fit.floor},
          {"weighted", fit.weighted},
          {"points", std::move(points)}};
}

FitResult fit_from_json(const json& j) {
  FitResult fit;
  fit.f0_tilde = j.at("f0_tilde").get<double>();
  fit.lambda = j.at("lambda").get<double>();
  fit.f0_tilde_stderr = j.value("f0_tilde_stderr", 0.0);
  fit.lambda_stderr = j.value("lambda_stderr", 0.0);
  fit.d_lo = j.value("d_lo", 0);
  fit.d_hi = j.value("d_hi", 0);
  fit.chi2_per_dof = j.value("chi2_per_dof", 0.0);
  fit.floor_subtracted = j.value("floor_subtracted", false);
  fit.floor = j.value("floor", 0.0);
  fit.weighted = j.value("weighted", false);
  if (j.contains("points")) {
    for (const json& p : j.at("points")) {
      fit.points.push_back({p.at("depth").get<int>(), p.at("y").get<double>(), p.at("sigma").get<double>(),
                            p.at("fitted").get<double>(), p.at("residual").get<double>()});
    }
  }
  return fit;
}

json two_regime_to_json(const TwoRegimeFit& fit) {
  return {{"d_star", fit.d_star},       {"lambda1", fit.lambda1},   {"lambda2", fit.lambda2},
          {"intercept", fit.intercept}, {"delta_bic", fit.delta_bic}, {"significant", fit.significant},
          {"d_lo", fit.d_lo},           {"d_hi", fit.d_hi},           {"ssr_line", fit.ssr_line},
          {"ssr_two", fit.ssr_two}};
}

json prediction_to_json(const DecayPrediction& p) {
  json j = {{"method", p.method == PredictionMethod::twirl ? "twirl" : "mean_gate"},
            {"f0_tilde", p.f0_tilde},
            {"lambda", p.lambda},
            {"period", p.period}};
  if (p.method == PredictionMethod::mean_gate) {
    j["mean_gate_fidelity"] = p.mean_gate_fidelity;
    j["position_fidelity_sq"] = p.position_fidelity_sq;
  } else {
    j["layer_fidelities"] = p.layer_fidelities;
    j["turning_point_fidelity"] = p.turning_point_fidelity;
  }
  return j;
}

}  // namespace qecho
