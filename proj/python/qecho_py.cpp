#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qecho/analysis.hpp"
#include "qecho/bounds.hpp"
#include "qecho/cli.hpp"
#include "qecho/io.hpp"
#include "qecho/mps.hpp"
#include "qecho/statevec.hpp"
#include "qecho/twirl.hpp"

namespace py = pybind11;
using namespace qecho;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::dict table_dict(const FidelityTable& t) {
  std::vector<double> depth, count, mean, se, trunc;
  for (const TableRow& r : t.rows) {
    depth.push_back(r.depth);
    count.push_back(static_cast<double>(r.count));
    mean.push_back(r.mean);
    se.push_back(r.std_error);
    trunc.push_back(r.trunc_weight);
  }
  py::dict d;
  d["num_qubits"] = t.num_qubits;
  d["depth"] = py::array_t<double>(depth.size(), depth.data()).attr("astype")("int64");
  d["count"] = py::array_t<double>(count.size(), count.data()).attr("astype")("int64");
  d["mean"] = to_array(mean);
  d["stderr"] = to_array(se);
  d["trunc_weight"] = to_array(trunc);
  return d;
}

FidelityTable table_from(const std::vector<int>& depth, const std::vector<double>& mean,
                         const std::vector<double>& stderr_, int num_qubits) {
  if (depth.size() != mean.size() || depth.size() != stderr_.size()) {
    throw InvalidArgument("depth, mean and stderr must have equal length");
  }
  FidelityTable t;
  t.num_qubits = num_qubits;
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (i > 0 && depth[i] <= depth[i - 1]) throw InvalidArgument("depths must be strictly increasing");
    t.rows.push_back({depth[i], 0, mean[i], stderr_[i], 0.0});
  }
  return t;
}

py::dict prediction_dict(const DecayPrediction& p) {
  py::dict d;
  d["method"] = p.method == PredictionMethod::twirl ? "twirl" : "mean_gate";
  d["f0_tilde"] = p.f0_tilde;
  d["lambda"] = p.lambda;
  d["period"] = p.period;
  d["mean_gate_fidelity"] = p.mean_gate_fidelity;
  d["layer_fidelities"] = to_array(p.layer_fidelities);
  return d;
}

py::dict fit_dict(const FitResult& f) {
  py::dict d;
  d["f0_tilde"] = f.f0_tilde;
  d["lambda"] = f.lambda;
  d["f0_tilde_stderr"] = f.f0_tilde_stderr;
  d["lambda_stderr"] = f.lambda_stderr;
  d["d_lo"] = f.d_lo;
  d["d_hi"] = f.d_hi;
  d["chi2_per_dof"] = f.chi2_per_dof;
  d["floor"] = f.floor;
  d["floor_subtracted"] = f.floor_subtracted;
  std::vector<double> depth, residual, sigma;
  for (const FitPoint& p : f.points) {
    depth.push_back(p.depth);
    residual.push_back(p.residual);
    sigma.push_back(p.sigma);
  }
  d["depth"] = to_array(depth);
  d["residual"] = to_array(residual);
  d["sigma"] = to_array(sigma);
  return d;
}

}  // namespace

PYBIND11_MODULE(_qecho, m) {
  m.doc() = "Echo-fidelity simulations of noisy random circuits";

  py::register_exception<ResourceLimit>(m, "ResourceLimit", PyExc_RuntimeError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_RuntimeError);
  py::register_exception<InsufficientData>(m, "InsufficientData", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<QubitLayout>(m, "Layout")
      .def_property_readonly("num_qubits", &QubitLayout::num_qubits)
      .def_property_readonly("dimension", &QubitLayout::dimension)
      .def_property_readonly("period", &QubitLayout::period)
      .def("layer", [](const QubitLayout& l, int t) {
        std::vector<std::pair<int, int>> out;
        for (int pos : l.layer_positions(t)) out.emplace_back(l.positions()[pos].a, l.positions()[pos].b);
        return out;
      }, py::arg("t"), "Qubit pairs acting at circuit layer t (1-based)")
      .def("__repr__", &QubitLayout::describe);
  m.def("chain", &build_chain, py::arg("n"));
  m.def("grid", &build_grid, py::arg("rows"), py::arg("cols"));
  m.def("recommended_max_depth", &recommended_max_depth, py::arg("n"), py::arg("dimension"));

  py::class_<NoiseModel>(m, "NoiseModel")
      .def_property_readonly("layout", [](const NoiseModel& nm) { return nm.layout; })
      .def_readonly("seed", &NoiseModel::seed)
      .def("to_json", [](const NoiseModel& nm) { return noise_model_to_json(nm).dump(); });
  m.def(
      "noise_model",
      [](const QubitLayout& layout, double p2, std::uint64_t seed, double q, bool coherent, bool incoherent) {
        NoiseModelOptions o;
        o.spam_q = q;
        o.channel.coherent = coherent;
        o.channel.incoherent = incoherent;
        return build_noise_model(layout, p2, seed, o);
      },
      py::arg("layout"), py::arg("p2"), py::arg("seed"), py::arg("q") = 0.0, py::arg("coherent") = true,
      py::arg("incoherent") = true);
  m.def("noise_model_from_json", [](const std::string& s) { return noise_model_from_json(nlohmann::json::parse(s)); });

  m.def(
      "run_campaign",
      [](const NoiseModel& model, int d_max, std::uint64_t n_traj, std::uint64_t master_seed, int workers) {
        FidelityRecord rec;
        {
          py::gil_scoped_release release;
          CampaignOptions o;
          o.d_max = d_max;
          o.n_traj = n_traj;
          o.master_seed = master_seed;
          o.workers = workers;
          rec = run_campaign(model, o);
        }
        return table_dict(tabulate(rec, model.layout.num_qubits()));
      },
      py::arg("model"), py::arg("d_max"), py::arg("n_traj"), py::arg("master_seed"), py::arg("workers") = 1);
  m.def(
      "run_mps_campaign",
      [](const NoiseModel& model, int d_max, int chi, std::uint64_t n_traj, std::uint64_t master_seed, int workers) {
        FidelityRecord rec;
        {
          py::gil_scoped_release release;
          MpsCampaignOptions o;
          o.d_max = d_max;
          o.chi = chi;
          o.n_traj = n_traj;
          o.master_seed = master_seed;
          o.workers = workers;
          rec = run_mps_campaign(model, o);
        }
        return table_dict(tabulate(rec, model.layout.num_qubits()));
      },
      py::arg("model"), py::arg("d_max"), py::arg("chi"), py::arg("n_traj"), py::arg("master_seed"),
      py::arg("workers") = 1);

  m.def("mean_gate_prediction", [](const NoiseModel& nm) { return prediction_dict(mean_gate_prediction(nm)); });
  m.def("twirl_prediction", [](const NoiseModel& nm) { return prediction_dict(twirl_prediction(nm)); });

  m.def(
      "fit_exponential",
      [](const std::vector<int>& depth, const std::vector<double>& mean, const std::vector<double>& se, int n,
         bool subtract_floor, int min_depth, int max_depth) {
        FitOptions o;
        o.subtract_floor = subtract_floor;
        o.min_depth = min_depth;
        o.max_depth = max_depth;
        return fit_dict(fit_exponential(table_from(depth, mean, se, n), o));
      },
      py::arg("depth"), py::arg("mean"), py::arg("stderr"), py::arg("num_qubits") = 0, py::arg("subtract_floor") = false,
      py::arg("min_depth") = 0, py::arg("max_depth") = INT_MAX);
  m.def(
      "detect_two_regime",
      [](const std::vector<int>& depth, const std::vector<double>& mean, const std::vector<double>& se, int n,
         bool subtract_floor, int min_depth, int max_depth) {
        TwoRegimeOptions o;
        o.subtract_floor = subtract_floor;
        o.min_depth = min_depth;
        o.max_depth = max_depth;
        const TwoRegimeFit f = detect_two_regime(table_from(depth, mean, se, n), o);
        py::dict d;
        d["d_star"] = f.d_star;
        d["lambda1"] = f.lambda1;
        d["lambda2"] = f.lambda2;
        d["intercept"] = f.intercept;
        d["delta_bic"] = f.delta_bic;
        d["significant"] = f.significant;
        return d;
      },
      py::arg("depth"), py::arg("mean"), py::arg("stderr"), py::arg("num_qubits") = 0, py::arg("subtract_floor") = false,
      py::arg("min_depth") = 0, py::arg("max_depth") = INT_MAX);
  m.def("drift_fidelity", &drift_fidelity, py::arg("lambda1"), py::arg("lambda2"), py::arg("d"));

  m.def(
      "statistical_reach",
      [](double ns, double eps, double f) {
        const StatisticalReach r = statistical_reach(ns, eps, f);
        return py::make_tuple(r.f_min, r.max_nd);
      },
      py::arg("n_samples"), py::arg("eps"), py::arg("f"), "Returns (F_min, max n*d).");
  m.def(
      "emqm_qubit_bound",
      [](double t_qpu, double l_qpu, double t_emqm, double l_emqm, int d_emqm) {
        EmqmScales s;
        s.t_qpu = t_qpu;
        s.l_qpu = l_qpu;
        s.t_emqm = t_emqm;
        s.l_emqm = l_emqm;
        s.d_emqm = d_emqm;
        return emqm_qubit_bound(s);
      },
      py::arg("t_qpu") = EmqmScales{}.t_qpu, py::arg("l_qpu") = EmqmScales{}.l_qpu,
      py::arg("t_emqm") = constants::planck_time, py::arg("l_emqm") = constants::planck_length,
      py::arg("d_emqm") = EmqmScales{}.d_emqm);
  m.attr("PLANCK_TIME") = constants::planck_time;
  m.attr("PLANCK_LENGTH") = constants::planck_length;

  m.def("haar_unitary", [](int dim, std::uint64_t seed) {
    Rng rng(seed);
    return haar_unitary(dim, rng);
  }, py::arg("dim"), py::arg("seed"));
  m.def(
      "noise_channel",
      [](int dim, double p, std::uint64_t seed) {
        Rng rng(seed);
        return noise_channel(dim, p, rng).ops();
      },
      py::arg("dim"), py::arg("p"), py::arg("seed"), "Kraus operators of a random noise channel (uniform weights).");
  m.def("entanglement_fidelity", [](const std::vector<Matrix>& ops) { return entanglement_fidelity(KrausChannel(ops)); },
        py::arg("kraus"));
  m.def("equal_trace_basis", [](const std::vector<Matrix>& ops) { return equal_trace_basis(KrausChannel(ops)).ops(); },
        py::arg("kraus"));
  m.def("superoperator", [](const std::vector<Matrix>& ops) { return superoperator(KrausChannel(ops)); },
        py::arg("kraus"));

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::main(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (exit code, stdout, stderr).");
  m.attr("__version__") = kCodeVersion;
}
