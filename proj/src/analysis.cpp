#include "qecho/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qecho/common.hpp"

namespace qecho {

double FidelityTable::floor() const { return num_qubits > 0 ? std::ldexp(1.0, -num_qubits) : 0.0; }

FidelityTable tabulate(const FidelityRecord& record, int num_qubits) {
  FidelityTable table;
  table.num_qubits = num_qubits;
  for (std::size_t d = 0; d < record.count.size(); ++d) {
    const std::uint64_t c = record.count[d];
    if (c < 2) throw InsufficientData("depth " + std::to_string(d) + " has fewer than 2 samples");
    const double n = static_cast<double>(c);
    const double mean = record.sum[d] / n;
    const double var = std::max(0.0, (record.sum_sq[d] - record.sum[d] * mean) / (n - 1.0));
    table.rows.push_back({static_cast<int>(d), c, mean, std::sqrt(var / n), record.trunc_sum[d] / n});
  }
  return table;
}

namespace {

struct Sample {
  int depth;
  double y;
  double sigma;
};

// Leading contiguous run of rows in [min_depth, max_depth] that clear the floor by trim_sigmas.
std::vector<Sample> usable_run(const FidelityTable& table, double floor, int min_depth, int max_depth,
                               double trim_sigmas) {
  std::vector<Sample> run;
  for (const TableRow& r : table.rows) {
    if (r.depth < min_depth || r.depth > max_depth) continue;
    const double excess = r.mean - floor;
    const bool ok = excess > 0.0 && excess > trim_sigmas * r.std_error;
    if (!ok) {
      if (run.empty()) continue;
      break;
    }
    run.push_back({r.depth, std::log(excess), r.std_error / excess});
  }
  return run;
}

// Weights 1/sigma^2; rows with zero sigma drop out unless every sigma is zero.
std::vector<double> weights_for(const std::vector<Sample>& run, bool& weighted) {
  weighted = std::any_of(run.begin(), run.end(), [](const Sample& s) { return s.sigma > 0.0; });
  std::vector<double> w(run.size(), 1.0);
  if (weighted) {
    for (std::size_t i = 0; i < run.size(); ++i) w[i] = run[i].sigma > 0.0 ? 1.0 / (run[i].sigma * run[i].sigma) : 0.0;
  }
  return w;
}

std::size_t active(const std::vector<double>& w) {
  return static_cast<std::size_t>(std::count_if(w.begin(), w.end(), [](double x) { return x > 0.0; }));
}

struct LinearFit {
  Eigen::VectorXd beta;
  Eigen::MatrixXd cov;  // (X^T W X)^-1
  double ssr = 0.0;     // weighted
};

LinearFit weighted_lsq(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<double>& w) {
  const Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  const Eigen::MatrixXd xtw = x.transpose() * wv.asDiagonal();
  const Eigen::MatrixXd normal = xtw * x;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw NumericalFailure("singular least-squares system");
  LinearFit fit;
  // Solve via QR of the scaled design for accuracy; covariance via the normal matrix.
  const Eigen::VectorXd sw = wv.cwiseSqrt();
  fit.beta = (sw.asDiagonal() * x).colPivHouseholderQr().solve(sw.cwiseProduct(y));
  fit.cov = ldlt.solve(Eigen::MatrixXd::Identity(x.cols(), x.cols()));
  const Eigen::VectorXd r = y - x * fit.beta;
  fit.ssr = (r.array().square() * wv.array()).sum();
  return fit;
}

}  // namespace

double FitResult::value_at(double depth) const { return floor + f0_tilde * std::exp(-lambda * depth); }

FitResult fit_exponential(const FidelityTable& table, const FitOptions& options) {
  FitResult out;
  out.floor_subtracted = options.subtract_floor;
  out.floor = options.subtract_floor ? table.floor() : 0.0;
  const auto run = usable_run(table, out.floor, options.min_depth, options.max_depth, options.trim_sigmas);
  bool weighted = false;
  const auto w = weights_for(run, weighted);
  const std::size_t n = active(w);
  if (n < 3) throw InsufficientData("fewer than 3 usable depths for an exponential fit");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(run.size()), 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(run.size()));
  for (std::size_t i = 0; i < run.size(); ++i) {
    x(static_cast<Eigen::Index>(i), 0) = 1.0;
    x(static_cast<Eigen::Index>(i), 1) = -static_cast<double>(run[i].depth);
    y(static_cast<Eigen::Index>(i)) = run[i].y;
  }
  const LinearFit fit = weighted_lsq(x, y, w);
  const double dof = static_cast<double>(n) - 2.0;
  const double scale = weighted ? 1.0 : (dof > 0.0 ? fit.ssr / dof : 0.0);
  out.weighted = weighted;
  out.f0_tilde = std::exp(fit.beta(0));
  out.lambda = fit.beta(1);
  out.f0_tilde_stderr = out.f0_tilde * std::sqrt(std::max(0.0, fit.cov(0, 0) * scale));
  out.lambda_stderr = std::sqrt(std::max(0.0, fit.cov(1, 1) * scale));
  out.chi2_per_dof = dof > 0.0 ? fit.ssr / dof : 0.0;
  out.d_lo = run.front().depth;
  out.d_hi = run.back().depth;
  for (std::size_t i = 0; i < run.size(); ++i) {
    const double fitted = fit.beta(0) - fit.beta(1) * run[i].depth;
    out.points.push_back({run[i].depth, run[i].y, run[i].sigma, fitted, run[i].y - fitted});
  }
  return out;
}

TwoRegimeFit detect_two_regime(const FidelityTable& table, const TwoRegimeOptions& options) {
  const double floor = options.subtract_floor ? table.floor() : 0.0;
  const auto run = usable_run(table, floor, options.min_depth, options.max_depth, options.trim_sigmas);
  bool weighted = false;
  const auto w = weights_for(run, weighted);
  const std::size_t n = active(w);
  if (n < 6) throw InsufficientData("fewer than 6 usable depths for a two-regime fit");

  const auto rows = static_cast<Eigen::Index>(run.size());
  Eigen::VectorXd y(rows), d(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    y(i) = run[static_cast<std::size_t>(i)].y;
    d(i) = run[static_cast<std::size_t>(i)].depth;
  }
  Eigen::MatrixXd x1(rows, 2);
  x1.col(0).setOnes();
  x1.col(1) = -d;
  const LinearFit line = weighted_lsq(x1, y, w);

  TwoRegimeFit out;
  out.d_lo = run.front().depth;
  out.d_hi = run.back().depth;
  out.ssr_line = line.ssr;
  out.lambda1 = out.lambda2 = line.beta(1);
  out.intercept = line.beta(0);
  out.ssr_two = line.ssr;
  out.d_star = out.d_hi;

  bool found = false;
  for (Eigen::Index k = 0; k < rows; ++k) {
    const double brk = d(k);
    int left = 0, right = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (w[static_cast<std::size_t>(i)] <= 0.0) continue;
      (d(i) <= brk ? left : right) += 1;
    }
    if (left < options.min_points_per_side || right < options.min_points_per_side) continue;
    Eigen::MatrixXd x2(rows, 3);
    x2.col(0).setOnes();
    x2.col(1) = -d;
    x2.col(2) = -(d.array() - brk).cwiseMax(0.0).matrix();
    LinearFit hinge;
    try {
      hinge = weighted_lsq(x2, y, w);
    } catch (const NumericalFailure&) {
      continue;
    }
    if (!found || hinge.ssr < out.ssr_two) {
      found = true;
      out.ssr_two = hinge.ssr;
      out.d_star = brk;
      out.intercept = hinge.beta(0);
      out.lambda1 = hinge.beta(1);
      out.lambda2 = hinge.beta(1) + hinge.beta(2);
    }
  }
  if (!found) throw InsufficientData("no admissible breakpoint for a two-regime fit");

  const double penalty = 2.0 * std::log(static_cast<double>(n));
  if (weighted) {
    out.delta_bic = out.ssr_line - out.ssr_two - penalty;
  } else {
    const double ratio = out.ssr_two > 0.0 ? out.ssr_line / out.ssr_two : HUGE_VAL;
    out.delta_bic = static_cast<double>(n) * std::log(ratio) - penalty;
  }
  out.significant = out.delta_bic > options.delta_bic_threshold && out.lambda2 > out.lambda1;
  return out;
}

double drift_fidelity(double lambda1, double lambda2, double d) {
  if (!(lambda1 > 0.0 && lambda2 >= lambda1)) throw InvalidArgument("drift needs 0 < lambda1 <= lambda2");
  if (!(d >= 0.0)) throw InvalidArgument("depth must be nonnegative");
  if (d == 0.0) return 1.0;
  const double spread = (lambda2 - lambda1) * d;
  const double base = std::exp(-lambda1 * d);
  if (spread == 0.0) return base;
  return base * -std::expm1(-spread) / spread;
}

DriftReport drift_curve_properties(std::span<const double> lambdas, std::span<const double> depths) {
  if (lambdas.empty()) throw InvalidArgument("drift needs at least one rate sample");
  for (double l : lambdas)
    if (!(l > 0.0)) throw InvalidArgument("rate samples must be positive");
  for (std::size_t i = 1; i < depths.size(); ++i)
    if (!(depths[i] > depths[i - 1])) throw InvalidArgument("depths must be strictly increasing");

  DriftReport r;
  r.depths.assign(depths.begin(), depths.end());
  const double lmin = *std::min_element(lambdas.begin(), lambdas.end());
  const double count = static_cast<double>(lambdas.size());
  std::vector<double> tilted_mean;
  for (double d : depths) {
    // shift by the smallest rate so the largest weight is exactly 1
    double z = 0.0, m1 = 0.0, m2 = 0.0;
    for (double l : lambdas) {
      const double wgt = std::exp(-(l - lmin) * d);
      z += wgt;
      m1 += wgt * l;
      m2 += wgt * l * l;
    }
    r.log_fidelity.push_back(-lmin * d + std::log(z / count));
    const double mean = m1 / z;
    tilted_mean.push_back(mean);
    r.tilted_variance.push_back(std::max(0.0, m2 / z - mean * mean));
  }
  for (std::size_t i = 1; i < depths.size(); ++i) {
    r.slopes.push_back(-(r.log_fidelity[i] - r.log_fidelity[i - 1]) / (depths[i] - depths[i - 1]));
  }
  std::vector<double> interior;
  for (std::size_t i = 1; i + 1 < depths.size(); ++i) {
    const double h1 = depths[i] - depths[i - 1];
    const double h2 = depths[i + 1] - depths[i];
    const double s1 = (r.log_fidelity[i] - r.log_fidelity[i - 1]) / h1;
    const double s2 = (r.log_fidelity[i + 1] - r.log_fidelity[i]) / h2;
    const double second = 2.0 * (s2 - s1) / (h1 + h2);
    r.second_difference.push_back(second);
    interior.push_back(r.tilted_variance[i]);
    if (second < -1e-10) r.convex = false;
  }
  r.tilted_variance = std::move(interior);
  return r;
}

std::vector<std::uint64_t> allocate_samples(const FidelityTable& table, std::uint64_t budget) {
  if (table.rows.empty()) throw InvalidArgument("allocation needs at least one depth");
  const double floor = table.floor();
  std::vector<double> weight;
  for (const TableRow& r : table.rows) {
    if (!(r.mean > 0.0)) throw InvalidArgument("allocation needs positive mean fidelities");
    const double f = std::max(r.mean, floor);
    weight.push_back(1.0 / (f * f));
  }
  const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
  std::vector<std::uint64_t> counts(weight.size());
  std::vector<std::pair<double, std::size_t>> remainder;
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    const double quota = static_cast<double>(budget) * weight[i] / total;
    counts[i] = static_cast<std::uint64_t>(std::floor(quota));
    assigned += counts[i];
    remainder.emplace_back(quota - std::floor(quota), i);
  }
  std::stable_sort(remainder.begin(), remainder.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < budget && k < remainder.size(); ++k, ++assigned) ++counts[remainder[k].second];
  return counts;
}

}  // namespace qecho
