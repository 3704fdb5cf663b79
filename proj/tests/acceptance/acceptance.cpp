// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
// Usage: qecho_acceptance [--xfail NAME]... [--report FILE] [NAME]...
// With no names every criterion runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "oracle.hpp"
#include "qecho/analysis.hpp"
#include "qecho/bounds.hpp"
#include "qecho/mps.hpp"
#include "qecho/statevec.hpp"
#include "qecho/twirl.hpp"

using namespace qecho;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

double mean_at(const FidelityRecord& r, int d) { return r.sum[d] / static_cast<double>(r.count[d]); }

double stderr_at(const FidelityRecord& r, int d) {
  const double n = static_cast<double>(r.count[d]);
  const double m = r.sum[d] / n;
  return std::sqrt(std::max(0.0, r.sum_sq[d] / n - m * m) / (n - 1.0));
}

// ---------------------------------------------------------------------------
// 3x3 grid, p2 = 0.01: one campaign to depth 250 serves A1, A2 and A3. The
// trajectories are depth-sequential, so its first 40 depths are exactly the
// d_max = 40 campaign.

constexpr std::uint64_t kGridNoiseSeed = 1;
constexpr std::uint64_t kGridMasterSeed = 20240601;
constexpr std::uint64_t kGridTrajectories = 100000;
constexpr int kGridDepth = 250;
constexpr int kFitDepth = 40;

struct GridCampaign {
  NoiseModel model;
  FidelityRecord record;
  std::vector<double> window;  // per-trajectory mean F over d in [200, 250]
  FitResult fit;
  DecayPrediction prediction;
};

const GridCampaign& grid_campaign() {
  static const GridCampaign c = [] {
    GridCampaign g{build_noise_model(build_grid(3, 3), 0.01, kGridNoiseSeed), {}, {}, {}, {}};
    const EchoModel echo(g.model);
    g.window.assign(kGridTrajectories, 0.0);
    g.record = run_chunked(kGridDepth, 0, kGridTrajectories, 1, [&](std::uint64_t j) {
      TrajectoryRow row = run_trajectory(echo, kGridDepth, trajectory_seeds(kGridMasterSeed, j));
      double s = 0.0;
      for (int d = 200; d <= 250; ++d) s += row.fidelity[static_cast<std::size_t>(d)];
      g.window[j] = s / 51.0;
      return row;
    });
    g.fit = fit_exponential(tabulate(g.record, 9), {.subtract_floor = true, .max_depth = kFitDepth});
    g.prediction = mean_gate_prediction(g.model);
    return g;
  }();
  return c;
}

Outcome a1() {
  const GridCampaign& g = grid_campaign();
  const double ratio = g.fit.lambda / g.prediction.lambda;
  const double f = g.prediction.mean_gate_fidelity;
  const bool pass = std::abs(ratio - 1.0) <= 0.10 && f >= 0.983 && f <= 0.991;
  return {pass, "lambda_fit=" + fmt(g.fit.lambda, 5) + "+-" + fmt(g.fit.lambda_stderr, 2) +
                    " lambda_mean_gate=" + fmt(g.prediction.lambda, 5) + " ratio=" + fmt(ratio, 4) +
                    " f=" + fmt(f, 5) + " F0~=" + fmt(g.fit.f0_tilde, 4) + " fit depths " +
                    std::to_string(g.fit.d_lo) + ".." + std::to_string(g.fit.d_hi)};
}

Outcome a2() {
  const GridCampaign& g = grid_campaign();
  const double n = static_cast<double>(g.window.size());
  const double mean = std::accumulate(g.window.begin(), g.window.end(), 0.0) / n;
  double ss = 0.0;
  for (double w : g.window) ss += (w - mean) * (w - mean);
  const double se = std::sqrt(ss / (n - 1.0) / n);
  const double floor = std::ldexp(1.0, -9);
  const double z = (mean - floor) / se;
  return {std::abs(z) <= 3.0, "mean F[200,250]=" + fmt(mean, 6) + " stderr=" + fmt(se, 3) + " 2^-9=" +
                                  fmt(floor, 6) + " z=" + fmt(z, 3)};
}

std::pair<std::size_t, std::size_t> residuals_within_3se(const FitResult& fit) {
  std::size_t inside = 0, total = 0;
  for (const FitPoint& p : fit.points) {
    if (!(p.sigma > 0.0)) continue;  // exact rows (depth 0 with q = 0) carry no error bar
    ++total;
    inside += std::abs(p.residual) <= 3.0 * p.sigma ? 1 : 0;
  }
  return {inside, total};
}

Outcome a3() {
  const GridCampaign& g = grid_campaign();
  const auto [inside, total] = residuals_within_3se(g.fit);
  const double frac = static_cast<double>(inside) / static_cast<double>(total);

  // Diagnostic only: the same data sampled once per layout period.
  const int period = g.model.layout.period();
  FidelityTable sampled = tabulate(g.record, 9);
  std::erase_if(sampled.rows, [&](const TableRow& r) { return r.depth % period != 0 || r.depth > kFitDepth; });
  const FitResult coarse = fit_exponential(sampled, {.subtract_floor = true});
  const auto [in_p, tot_p] = residuals_within_3se(coarse);

  return {frac >= 0.9, std::to_string(inside) + "/" + std::to_string(total) + " residuals within 3 stderr (" +
                           fmt(100 * frac, 3) + "%), chi2/dof=" + fmt(g.fit.chi2_per_dof, 3) +
                           "; diagnostic at multiples of the period " + std::to_string(period) + ": " +
                           std::to_string(in_p) + "/" + std::to_string(tot_p) + " within 3 stderr, chi2/dof=" +
                           fmt(coarse.chi2_per_dof, 3)};
}

// ---------------------------------------------------------------------------
// MPS toy model. Past the kink the truncated echo falls far below 2^-n and
// its log keeps bending, so the two-regime fit looks at the first 16 depths.

Outcome a4() {
  constexpr int kBatches = 4;
  constexpr std::uint64_t kPerBatch = 2500;
  constexpr int kWindow = 16;
  const NoiseModel model = build_noise_model(build_chain(12), 0.005, 1);
  std::vector<double> mean_star;
  std::ostringstream detail;
  bool significant8 = false;
  for (int chi : {4, 8, 16}) {
    FidelityRecord pooled(60);
    double sum_star = 0.0;
    std::string stars;
    for (int b = 0; b < kBatches; ++b) {
      const FidelityRecord rec = run_mps_campaign(
          model, {.d_max = 60, .chi = chi, .n_traj = kPerBatch, .master_seed = 7000 + static_cast<std::uint64_t>(b)});
      pooled.merge(rec);
      const TwoRegimeFit fit = detect_two_regime(tabulate(rec, 12), {.max_depth = kWindow});
      sum_star += fit.d_star;
      stars += (b ? "," : "") + fmt(fit.d_star, 3);
    }
    mean_star.push_back(sum_star / kBatches);
    const TwoRegimeFit all = detect_two_regime(tabulate(pooled, 12), {.max_depth = kWindow});
    if (chi == 8) significant8 = all.significant && all.lambda2 > all.lambda1;
    detail << " chi=" << chi << ": d*={" << stars << "} pooled d*=" << all.d_star << " l1=" << fmt(all.lambda1, 3)
           << " l2=" << fmt(all.lambda2, 3) << " dBIC=" << fmt(all.delta_bic, 3)
           << (all.significant ? " sig" : " not-sig") << ";";
  }
  const bool increasing = mean_star[0] < mean_star[1] && mean_star[1] < mean_star[2];
  return {significant8 && increasing, "mean d*=" + fmt(mean_star[0], 3) + "," + fmt(mean_star[1], 3) + "," +
                                          fmt(mean_star[2], 3) + ";" + detail.str()};
}

// ---------------------------------------------------------------------------

QubitLayout single_pair() { return QubitLayout(Lattice::custom, 2, 1, 1, 2, {{{0, 1}}}); }

Outcome a5() {
  std::ostringstream detail;
  bool pass = true;

  // gate-independent incoherent noise: one fixed channel after every gate
  {
    Rng rng(17);
    NoiseModel model = uniform_noise_model(build_chain(2), noise_channel(4, 0.02, rng, {.coherent = false}),
                                           KrausChannel::identity(2));
    std::tie(model.spam_init, model.spam_fin) = default_spam(2, 0.01);
    const DecayPrediction tw = twirl_prediction(model);
    const FidelityRecord rec = run_campaign(model, {.d_max = 12, .n_traj = 100000, .master_seed = 51});
    double worst = 0.0;
    for (int d = 2; d <= 12; d += 2) {
      const double predicted = tw.f0_tilde * std::exp(-tw.lambda * d);
      const double excess = std::abs(mean_at(rec, d) - predicted) - 3.0 * stderr_at(rec, d);
      worst = std::max(worst, excess);
      if (excess > 0.25) pass = false;
    }
    detail << "incoherent: F0~=" << fmt(tw.f0_tilde) << " lambda=" << fmt(tw.lambda) << " F12 mc=" << fmt(mean_at(rec, 12))
           << " twirl=" << fmt(tw.f0_tilde * std::exp(-12 * tw.lambda)) << " worst |dF|-3se=" << fmt(worst, 3) << ";";
  }

  // V after the forward gate, V^dag in the backward frame
  {
    Rng rng(8);
    const Matrix2 va = coherent_unitary(2, 0.05, rng);
    const Matrix2 vb = coherent_unitary(2, 0.05, rng);
    NoiseModel model = uniform_noise_model(single_pair(), KrausChannel::unitary(Matrix(Eigen::kroneckerProduct(va, vb))),
                                           KrausChannel::identity(2));
    model.two_qubit_backward[0] = KrausChannel::identity(4);
    for (int l = 3; l < kNumGateLabels; ++l) {
      model.one_qubit[0][static_cast<std::size_t>(l)] = KrausChannel::unitary(va.adjoint());
      model.one_qubit[1][static_cast<std::size_t>(l)] = KrausChannel::unitary(vb.adjoint());
    }
    const DecayPrediction tw = twirl_prediction(model);
    const DecayPrediction mg = mean_gate_prediction(model);
    const FidelityRecord rec = run_campaign(model, {.d_max = 12, .n_traj = 100000, .master_seed = 52});
    const FitResult fit = fit_exponential(tabulate(rec, 2), {.subtract_floor = true, .min_depth = 2});
    double worst = 0.0;
    for (int d = 2; d <= 12; d += 2) {
      const double excess = std::abs(mean_at(rec, d) - tw.f0_tilde * std::exp(-tw.lambda * d)) - 3.0 * stderr_at(rec, d);
      worst = std::max(worst, excess);
      if (excess > 0.25) pass = false;
    }
    const bool exact = std::abs(tw.layer_fidelities[0] - 1.0) < 1e-12 && std::abs(tw.lambda) < 1e-12;
    const bool flat = fit.lambda < 0.05 * mg.lambda;
    pass = pass && exact && flat;
    detail << " frame pair: hF=" << fmt(tw.layer_fidelities[0], 15) << " mc lambda=" << fmt(fit.lambda, 3) << "+-"
           << fmt(fit.lambda_stderr, 2) << " vs per-gate " << fmt(mg.lambda, 3) << " worst |dF|-3se=" << fmt(worst, 3)
           << ";";
  }

  // physically mirrored pair: the backward gate carries iSWAP V^dag iSWAP^dag
  {
    Rng rng(9);
    const Matrix4 v = haar_unitary(4, rng);
    NoiseModel model = uniform_noise_model(single_pair(), KrausChannel::unitary(v), KrausChannel::identity(2));
    model.two_qubit_backward[0] = KrausChannel::unitary(Matrix(iswap() * v.adjoint() * iswap().adjoint()));
    const FidelityRecord rec = run_campaign(model, {.d_max = 12, .n_traj = 2000, .master_seed = 53});
    double dev = 0.0;
    for (int d = 0; d <= 12; ++d) dev = std::max(dev, std::abs(mean_at(rec, d) - 1.0));
    pass = pass && dev < 1e-10;
    detail << " mirrored pair: max|F-1|=" << fmt(dev, 2);
  }
  return {pass, detail.str()};
}

Outcome a6() {
  // the pair layout puts a gate in both layers; on a 2-qubit chain depth 2 would be empty
  const NoiseModel model = build_noise_model(single_pair(), 0.05, 3, {.spam_q = 0.02});
  const std::vector<double> exact = oracle::exact_echo_fidelity(model, 2);
  const FidelityRecord rec = run_campaign(model, {.d_max = 2, .n_traj = 1000000, .master_seed = 61});
  bool pass = true;
  std::ostringstream detail;
  for (int d = 0; d <= 2; ++d) {
    const double z = (mean_at(rec, d) - exact[static_cast<std::size_t>(d)]) / stderr_at(rec, d);
    pass = pass && std::abs(z) <= 3.0;
    detail << "d=" << d << " mc=" << fmt(mean_at(rec, d), 7) << " exact=" << fmt(exact[static_cast<std::size_t>(d)], 7)
           << " z=" << fmt(z, 3) << (d < 2 ? "; " : "");
  }
  return {pass, detail.str()};
}

Outcome a7() {
  double quad_err = 0.0;
  for (auto [l1, l2] : std::vector<std::pair<double, double>>{{0.01, 0.03}, {0.02, 0.05}, {0.1, 0.4}}) {
    for (double d : {0.5, 5.0, 40.0, 100.0}) {
      constexpr int grid = 20000;
      const double h = (l2 - l1) / grid;
      double s = std::exp(-l1 * d) + std::exp(-l2 * d);
      for (int i = 1; i < grid; ++i) s += (i % 2 ? 4.0 : 2.0) * std::exp(-(l1 + i * h) * d);
      quad_err = std::max(quad_err, std::abs(drift_fidelity(l1, l2, d) - s * h / 3.0 / (l2 - l1)));
    }
  }

  double min_second = HUGE_VAL;
  for (auto [l1, l2] : std::vector<std::pair<double, double>>{{0.01, 0.03}, {0.2 / 3, 0.4 / 3}, {0.001, 0.5}}) {
    std::vector<double> lf;
    for (int i = 0; i <= 1000; ++i) lf.push_back(std::log(drift_fidelity(l1, l2, 0.1 * i)));
    for (std::size_t i = 1; i + 1 < lf.size(); ++i) min_second = std::min(min_second, lf[i + 1] - 2 * lf[i] + lf[i - 1]);
  }
  Rng rng(71);
  std::uniform_real_distribution<double> u(0.001, 0.2);
  std::vector<double> rates(50), depths;
  for (double& r : rates) r = u(rng);
  for (int i = 0; i <= 200; ++i) depths.push_back(0.5 * i);
  const DriftReport sampled = drift_curve_properties(rates, depths);
  for (double s : sampled.second_difference) min_second = std::min(min_second, s);

  const double lambda = 0.05;
  bool above = true;
  for (int i = 1; i <= 10000; ++i) {
    const double d = 0.01 * i;
    above = above && drift_fidelity(2 * lambda / 3, 4 * lambda / 3, d) > std::exp(-lambda * d);
  }
  const bool pass = quad_err <= 1e-10 && min_second >= -1e-10 && sampled.convex && above;
  return {pass, "max |closed form - quadrature|=" + fmt(quad_err, 3) + " min second difference of ln F=" +
                    fmt(min_second, 3) + (above ? " two-rate curve above exp(-lambda d)" : " two-rate curve dips below")};
}

Outcome a8() {
  const double nd1 = statistical_reach(1e8, 0.1, 1.0 - 1e-3).max_nd;
  const double nd2 = statistical_reach(1e8, 0.1, 1.0 - 0.8e-5).max_nd;
  EmqmScales s;
  s.t_emqm = constants::planck_time * 1e-50;
  s.l_emqm = constants::planck_length * 1e-50;
  s.d_emqm = 6;
  const double n_star = emqm_qubit_bound(s);
  const EmqmScales def;
  const double time_term = std::log2(def.t_qpu / constants::planck_time);
  const double length_term = std::log2(def.l_qpu / constants::planck_length);
  const bool pass = nd1 >= 6800 && nd1 <= 7000 && nd2 >= 8.5e5 && nd2 <= 8.7e5 && n_star >= 1900 && n_star <= 2000 &&
                    std::abs(time_term - 130) <= 5 && std::abs(length_term - 110) <= 5;
  return {pass, "max_nd=" + fmt(nd1, 6) + "," + fmt(nd2, 6) + " n*=" + fmt(n_star, 6) + " time term=" +
                    fmt(time_term, 5) + " length term=" + fmt(length_term, 5)};
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Outcome a9() {
  double completeness = 0.0, superop = 0.0, spread = 0.0;
  for (int dim : {2, 4}) {
    Rng rng(90 + static_cast<std::uint64_t>(dim));
    for (int i = 0; i < 1000; ++i) {
      const KrausChannel ch = random_mixed_channel(dim, rng);
      completeness = std::max(completeness, ch.completeness_error());
      const KrausChannel et = equal_trace_basis(ch);
      completeness = std::max(completeness, et.completeness_error());
      superop = std::max(superop, max_abs(superoperator(et) - superoperator(ch)));
      double lo = HUGE_VAL, hi = 0.0;
      for (const Matrix& k : et.ops()) {
        lo = std::min(lo, std::abs(k.trace()));
        hi = std::max(hi, std::abs(k.trace()));
      }
      spread = std::max(spread, (hi - lo) / hi);
    }
  }
  bool band = true;
  std::ostringstream fid;
  for (int dim : {2, 4}) {
    for (double p : {0.005, 0.01}) {
      Rng rng(95 + static_cast<std::uint64_t>(dim * 1000 * p));
      double sum = 0.0;
      for (int i = 0; i < 1000; ++i) sum += entanglement_fidelity(noise_channel(dim, p, rng));
      const double mean = sum / 1000.0;
      band = band && mean >= 1.0 - 1.4 * p && mean <= 1.0 - 0.6 * p;
      fid << " f(d=" << dim << ",p=" << p << ")=1-" << fmt((1.0 - mean) / p, 4) << "p";
    }
  }
  const bool pass = completeness <= 1e-10 && superop <= 1e-10 && spread <= 1e-9 && band;
  return {pass, "completeness=" + fmt(completeness, 2) + " superop diff=" + fmt(superop, 2) + " trace spread=" +
                    fmt(spread, 2) + fid.str()};
}

Outcome a10() {
  const NoiseModel model = build_noise_model(build_chain(8), 0.01, 4, {.spam_q = 0.01});
  const EchoModel echo(model);
  double diff = 0.0;
  for (std::uint64_t j = 0; j < 100; ++j) {
    const TrajectorySeeds seeds = trajectory_seeds(101, j);
    const TrajectoryRow sv = run_trajectory(echo, 30, seeds);
    const TrajectoryRow mps = run_mps_trajectory(echo, 30, 16, seeds);
    for (std::size_t d = 0; d < sv.fidelity.size(); ++d) diff = std::max(diff, std::abs(sv.fidelity[d] - mps.fidelity[d]));
  }
  const cplx ghz0 = overlap(product_mps(3), ghz_mps());
  MpsState e001 = product_mps(3);
  Eigen::Vector2cd zero(1.0, 0.0), one(0.0, 1.0);
  const std::vector<Eigen::Vector2cd> f001{one, zero, zero};  // qubit 0 is the low bit
  e001.set_product(f001);
  const cplx ghz1 = overlap(e001, ghz_mps());
  const bool pass = diff <= 1e-8 && ghz0 == cplx(1.0 / std::sqrt(2.0), 0.0) && ghz1 == cplx(0.0, 0.0);
  return {pass, "max per-trajectory |F_mps - F_sv|=" + fmt(diff, 3) + " over 100 trajectories, d<=30; <000|GHZ>=" +
                    fmt(ghz0.real(), 17) + " <001|GHZ>=" + fmt(std::abs(ghz1), 3)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5},
      {"A6", a6}, {"A7", a7}, {"A8", a8}, {"A9", a9}, {"A10", a10}};
  auto known = [&](const std::string& name) {
    return std::any_of(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == name; });
  };

  // --xfail NAME marks a criterion that is known not to hold; the exit code
  // is 0 only if the failures are exactly the declared ones.
  std::set<std::string> wanted, xfail;
  std::ofstream report;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--xfail" && i + 1 < argc) {
      xfail.insert(argv[++i]);
    } else if (arg == "--report" && i + 1 < argc) {
      report.open(argv[++i]);
      if (!report) {
        std::cerr << "cannot write " << argv[i] << '\n';
        return 2;
      }
    } else {
      wanted.insert(arg);
    }
  }
  for (const auto& w : wanted) {
    if (!known(w)) {
      std::cerr << "unknown criterion " << w << '\n';
      return 2;
    }
  }
  for (const auto& w : xfail) {
    if (!known(w)) {
      std::cerr << "unknown criterion " << w << '\n';
      return 2;
    }
  }

  int unexpected = 0;
  for (const auto& [name, run] : criteria) {
    if (!wanted.empty() && !wanted.count(name)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool expected_fail = xfail.count(name) > 0;
    std::string tag;
    if (o.pass && expected_fail) tag = " (unexpected pass)";
    if (!o.pass && expected_fail) tag = " (expected)";
    unexpected += o.pass == expected_fail ? 1 : 0;
    std::ostringstream line;
    line << std::left << std::setw(4) << name << (o.pass ? "PASS" : "FAIL") << tag << "  " << o.detail << "  ["
         << std::fixed << std::setprecision(1) << secs << "s]";
    std::cout << line.str() << std::endl;
    if (report.is_open()) report << line.str() << std::endl;
  }
  return unexpected == 0 ? 0 : 1;
}
