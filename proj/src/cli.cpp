#include "qecho/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "qecho/bounds.hpp"
#include "qecho/io.hpp"
#include "qecho/statevec.hpp"

namespace qecho::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot write '" + path.string() + "'");
  os << content;
  if (!os) throw UsageError("failed writing '" + path.string() + "'");
}

// "# key=value" lines written ahead of the CSV header.
std::optional<std::string> csv_tag(const std::string& csv, const std::string& key) {
  std::istringstream is(csv);
  std::string line;
  const std::string prefix = "# " + key + "=";
  while (std::getline(is, line)) {
    if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
    if (!line.empty() && line[0] != '#') break;
  }
  return std::nullopt;
}

struct RunArgs {
  std::string config;
  int workers = 1;
  std::string output_dir;
};

int cmd_run(const RunArgs& args, std::ostream& out) {
  const RunConfig config = parse_run_config(read_file(args.config));
  fs::path dir = args.output_dir;
  if (dir.empty()) dir = config.output_dir;
  if (dir.empty()) {
    const char* env = std::getenv(kOutputDirEnv);
    dir = env && *env ? env : ".";
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory '" + dir.string() + "'");

  const auto start = std::chrono::steady_clock::now();
  const NoiseModel model = noise_model_for(config);
  FidelityRecord record;
  if (config.engine == Engine::mps) {
    MpsCampaignOptions o;
    o.d_max = config.d_max;
    o.chi = config.chi;
    o.n_traj = config.n_traj;
    o.master_seed = config.master_seed;
    o.workers = args.workers;
    record = run_mps_campaign(model, o);
  } else {
    CampaignOptions o;
    o.d_max = config.d_max;
    o.n_traj = config.n_traj;
    o.master_seed = config.master_seed;
    o.workers = args.workers;
    record = run_campaign(model, o);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string digest = config_digest(config);
  record.config_digest = digest;

  std::ostringstream csv;
  csv << "# config_digest=" << digest << '\n' << "# master_seed=" << config.master_seed << '\n';
  write_results_csv(csv, tabulate(record, config.num_qubits()), config.engine == Engine::mps);
  write_file(dir / "results.csv", csv.str());
  write_file(dir / "manifest.json", campaign_manifest(config).dump(2) + "\n");

  out << "n=" << config.num_qubits() << " d_max=" << config.d_max << " n_traj=" << config.n_traj
      << " engine=" << (config.engine == Engine::mps ? "mps" : "statevec") << " wall=" << std::fixed
      << std::setprecision(2) << wall << "s digest=" << digest << " out=" << dir.string() << '\n';
  return kOk;
}

struct FitArgs {
  std::string csv;
  std::string manifest;
  std::string output;
  int n = 0;
  bool subtract_floor = false;
  bool two_regime = false;
  int min_depth = 0;
  int max_depth = INT_MAX;
};

int cmd_fit(const FitArgs& args, std::ostream& out) {
  const std::string csv_text = read_file(args.csv);
  json manifest;
  int n = args.n;
  if (!args.manifest.empty()) {
    try {
      manifest = json::parse(read_file(args.manifest));
      if (n == 0) n = manifest.at("num_qubits").get<int>();
    } catch (const json::exception& e) {
      throw UsageError(std::string("malformed manifest: ") + e.what());
    }
  }
  if (args.subtract_floor && n < 1) throw UsageError("--subtract-floor needs --n or --manifest");
  std::istringstream is(csv_text);
  const FidelityTable table = read_results_csv(is, n);

  FitOptions fo;
  fo.subtract_floor = args.subtract_floor;
  fo.min_depth = args.min_depth;
  fo.max_depth = args.max_depth;
  json report = {{"fit", fit_to_json(fit_exponential(table, fo))}, {"table_digest", content_digest(csv_text)}};
  if (args.two_regime) {
    TwoRegimeOptions to;
    to.subtract_floor = args.subtract_floor;
    to.min_depth = args.min_depth;
    to.max_depth = args.max_depth;
    report["two_regime"] = two_regime_to_json(detect_two_regime(table, to));
  }
  if (auto tag = csv_tag(csv_text, "config_digest")) report["config_digest"] = *tag;
  if (auto tag = csv_tag(csv_text, "master_seed")) report["master_seed"] = std::stoull(*tag);
  if (!manifest.is_null()) {
    const RunConfig config = parse_run_config(manifest.at("config").dump());
    const NoiseModel model = noise_model_for(config);
    json predictions = json::array();
    predictions.push_back(prediction_to_json(mean_gate_prediction(model)));
    if (config.num_qubits() <= kMaxTwirlQubits) predictions.push_back(prediction_to_json(twirl_prediction(model)));
    report["predictions"] = std::move(predictions);
    report["config_digest"] = config_digest(config);
    report["master_seed"] = config.master_seed;
  }
  const std::string text = report.dump(2) + "\n";
  if (args.output.empty()) {
    out << text;
  } else {
    write_file(args.output, text);
  }
  return kOk;
}

struct PlanArgs {
  std::optional<double> ns, eps, f;
  std::optional<int> n, dimension;
  std::optional<double> t_qpu, l_qpu, t_emqm, l_emqm;
  std::optional<int> d_emqm;
  bool emqm = false;
};

int cmd_plan(const PlanArgs& a, std::ostream& out, const std::string& usage) {
  const bool reach_any = a.ns || a.eps || a.f;
  const bool reach_all = a.ns && a.eps && a.f;
  const bool depth_any = a.n || a.dimension;
  const bool depth_all = a.n && a.dimension;
  const bool bound = a.emqm || a.t_qpu || a.l_qpu || a.t_emqm || a.l_emqm || a.d_emqm;
  if ((reach_any && !reach_all) || (depth_any && !depth_all) || (!reach_any && !depth_any && !bound)) {
    throw UsageError("plan needs --ns --eps --f, --n --D, or EmQM scale flags\n" + usage);
  }
  auto row = [&](const std::string& key, double value) {
    out << std::left << std::setw(18) << key << format_double(value) << '\n';
  };
  if (reach_all) {
    const StatisticalReach r = statistical_reach(*a.ns, *a.eps, *a.f);
    row("F_min", r.f_min);
    row("max_nd", r.max_nd);
    if (a.n) row("max_d", r.max_nd / *a.n);
  }
  if (depth_all) row("d_max", recommended_max_depth(*a.n, *a.dimension));
  if (bound) {
    EmqmScales s;
    if (a.t_qpu) s.t_qpu = *a.t_qpu;
    if (a.l_qpu) s.l_qpu = *a.l_qpu;
    if (a.t_emqm) s.t_emqm = *a.t_emqm;
    if (a.l_emqm) s.l_emqm = *a.l_emqm;
    if (a.d_emqm) s.d_emqm = *a.d_emqm;
    row("time_term", std::log2(s.t_qpu / s.t_emqm));
    row("length_term", std::log2(s.l_qpu / s.l_emqm));
    row("n_star", emqm_qubit_bound(s));
  }
  return kOk;
}

struct ReportArgs {
  std::string csv;
  std::string fit;
  std::string output;
};

int cmd_report(const ReportArgs& args, std::ostream& out) {
  std::istringstream is(read_file(args.csv));
  const FidelityTable table = read_results_csv(is, 0);
  FitResult fit;
  try {
    const json j = json::parse(read_file(args.fit));
    fit = fit_from_json(j.contains("fit") ? j.at("fit") : j);
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed fit report: ") + e.what());
  }
  std::ostringstream csv;
  csv << "depth,mean,stderr,fit_value,residual\n";
  for (const TableRow& r : table.rows) {
    const double v = fit.value_at(r.depth);
    csv << r.depth << ',' << format_double(r.mean) << ',' << format_double(r.std_error) << ',' << format_double(v)
        << ',' << format_double(r.mean - v) << '\n';
  }
  if (args.output.empty()) {
    out << csv.str();
  } else {
    write_file(args.output, csv.str());
  }
  return kOk;
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Echo-fidelity simulations of noisy random circuits", "qecho"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run a fidelity campaign from a JSON config");
  run->add_option("config", run_args.config, "Config file")->required();
  run->add_option("--workers", run_args.workers, "Worker threads")->check(CLI::Range(1, 1024));
  run->add_option("--output-dir", run_args.output_dir, "Output directory");

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit a results CSV");
  fit->add_option("csv", fit_args.csv, "Results CSV")->required();
  fit->add_option("--manifest", fit_args.manifest, "Campaign manifest (adds predictions)");
  fit->add_option("--n", fit_args.n, "Qubit count for the 2^-n floor")->check(CLI::Range(1, 64));
  fit->add_flag("--subtract-floor", fit_args.subtract_floor, "Subtract 2^-n before fitting");
  fit->add_flag("--two-regime", fit_args.two_regime, "Also fit a two-regime decay");
  fit->add_option("--min-depth", fit_args.min_depth, "Smallest depth to fit");
  fit->add_option("--max-depth", fit_args.max_depth, "Largest depth to fit");
  fit->add_option("-o,--output", fit_args.output, "Report path (default stdout)");

  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "Experiment planning numbers");
  plan->add_option("--ns", plan_args.ns, "Number of fidelity samples");
  plan->add_option("--eps", plan_args.eps, "Target relative error");
  plan->add_option("--f", plan_args.f, "Gate entanglement fidelity");
  plan->add_option("--n", plan_args.n, "Qubit count");
  plan->add_option("--D", plan_args.dimension, "Lattice dimension");
  plan->add_flag("--emqm", plan_args.emqm, "Print the EmQM qubit bound at default scales");
  plan->add_option("--t-qpu", plan_args.t_qpu, "QPU time scale [s]");
  plan->add_option("--l-qpu", plan_args.l_qpu, "QPU length scale [m]");
  plan->add_option("--t-emqm", plan_args.t_emqm, "EmQM time scale [s]");
  plan->add_option("--l-emqm", plan_args.l_emqm, "EmQM length scale [m]");
  plan->add_option("--d-emqm", plan_args.d_emqm, "EmQM spatial dimension");

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Join a results CSV with a fit into plot-ready CSV");
  report->add_option("csv", report_args.csv, "Results CSV")->required();
  report->add_option("fit", report_args.fit, "Fit report JSON")->required();
  report->add_option("-o,--output", report_args.output, "Output path (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (run->parsed()) return cmd_run(run_args, out);
    if (fit->parsed()) return cmd_fit(fit_args, out);
    if (plan->parsed()) return cmd_plan(plan_args, out, plan->help());
    if (report->parsed()) return cmd_report(report_args, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ResourceLimit& e) {
    err << "resource limit: " << e.what() << '\n';
    return kResources;
  } catch (const std::bad_alloc&) {
    err << "resource limit: out of memory\n";
    return kResources;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const InsufficientData& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace qecho::cli
