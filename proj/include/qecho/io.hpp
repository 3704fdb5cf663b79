#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "qecho/analysis.hpp"
#include "qecho/geometry.hpp"
#include "qecho/mps.hpp"
#include "qecho/record.hpp"
#include "qecho/twirl.hpp"

namespace qecho {

inline constexpr const char* kCodeVersion = "0.1.0";

enum class Engine { statevec, mps };

struct RunConfig {
  Lattice lattice = Lattice::chain;
  int n = 0;
  int rows = 0;
  int cols = 0;
  double p2 = 0.0;
  double q = 0.0;
  int d_max = 0;
  std::uint64_t n_traj = 0;
  int chi = kUnboundedBond;
  std::uint64_t master_seed = 0;
  std::uint64_t noise_seed = 0;
  Engine engine = Engine::statevec;
  std::string output_dir;
  double generator_scale = kDefaultGeneratorScale;

  QubitLayout layout() const;
  int num_qubits() const;
  nlohmann::json to_json() const;
};

// Config error with the 1-based line of the offending key (0 if unknown).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Parses and validates against every module precondition.
RunConfig parse_run_config(const std::string& text);

// FNV-1a 64 of the canonical JSON, hex encoded.
std::string content_digest(const std::string& text);
std::string config_digest(const RunConfig& config);

// Builds the noise model a config describes (deterministic in the config).
NoiseModel noise_model_for(const RunConfig& config);

// depth,count,mean,stderr[,trunc_weight]; 17 significant digits.
void write_results_csv(std::ostream& os, const FidelityTable& table, bool with_truncation);
// Throws std::runtime_error on schema violations.
FidelityTable read_results_csv(std::istream& is, int num_qubits);

// No timing data: reruns on the same inputs produce identical manifests.
nlohmann::json campaign_manifest(const RunConfig& config);

nlohmann::json fit_to_json(const FitResult& fit);
FitResult fit_from_json(const nlohmann::json& j);
nlohmann::json two_regime_to_json(const TwoRegimeFit& fit);
nlohmann::json prediction_to_json(const DecayPrediction& prediction);

std::string format_double(double value);

}  // namespace qecho
