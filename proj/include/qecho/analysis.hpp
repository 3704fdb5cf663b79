#pragma once

#include <climits>
#include <cstdint>
#include <span>
#include <vector>

#include "qecho/record.hpp"

namespace qecho {

struct TableRow {
  int depth = 0;
  std::uint64_t count = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double trunc_weight = 0.0;
};

struct FidelityTable {
  int num_qubits = 0;
  std::vector<TableRow> rows;  // strictly increasing depth

  double floor() const;  // 2^-n
};

// Means and standard errors (sample std / sqrt(count)); needs count >= 2.
FidelityTable tabulate(const FidelityRecord& record, int num_qubits);

struct FitOptions {
  bool subtract_floor = false;
  int min_depth = 0;
  int max_depth = INT_MAX;
  double trim_sigmas = 3.0;
};

struct FitPoint {
  int depth = 0;
  double y = 0.0;       // ln(mean - floor)
  double sigma = 0.0;   // stderr / (mean - floor)
  double fitted = 0.0;
  double residual = 0.0;
};

struct FitResult {
  double f0_tilde = 0.0;
  double lambda = 0.0;
  double f0_tilde_stderr = 0.0;
  double lambda_stderr = 0.0;
  int d_lo = 0;
  int d_hi = 0;
  std::vector<FitPoint> points;  // exactly the fit range
  double chi2_per_dof = 0.0;
  bool floor_subtracted = false;
  bool weighted = false;
  double floor = 0.0;

  double value_at(double depth) const;  // floor + f0_tilde exp(-lambda d)
};

// Weighted least squares of ln(mean - floor) against depth over the leading
// run of depths with mean - floor > trim_sigmas * stderr. Rows with zero
// stderr carry no scatter information and are left out of a weighted fit;
// if every row has zero stderr the fit is unweighted.
FitResult fit_exponential(const FidelityTable& table, const FitOptions& options = {});

struct TwoRegimeOptions {
  bool subtract_floor = false;
  int min_depth = 0;
  int max_depth = INT_MAX;
  double trim_sigmas = 3.0;
  double delta_bic_threshold = 10.0;
  int min_points_per_side = 2;
};

struct TwoRegimeFit {
  double d_star = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double intercept = 0.0;  // ln F at d = 0 of the first segment
  double delta_bic = 0.0;
  bool significant = false;
  int d_lo = 0;
  int d_hi = 0;
  double ssr_line = 0.0;
  double ssr_two = 0.0;
};

// Continuous two-piece line in (d, ln(mean - floor)); the breakpoint is
// scanned over interior depths and chosen by minimal weighted SSR.
// significant = delta BIC > threshold and lambda2 > lambda1.
TwoRegimeFit detect_two_regime(const FidelityTable& table, const TwoRegimeOptions& options = {});

// Uniform drift of the decay rate on [lambda1, lambda2]:
//   (e^{-lambda1 d} - e^{-lambda2 d}) / (d (lambda2 - lambda1)).
double drift_fidelity(double lambda1, double lambda2, double d);

struct DriftReport {
  std::vector<double> depths;
  std::vector<double> log_fidelity;
  std::vector<double> slopes;             // -(delta ln F / delta d), size n - 1
  std::vector<double> second_difference;  // at interior depths, size n - 2
  std::vector<double> tilted_variance;    // Var_d(lambda) at interior depths
  bool convex = true;                     // every second difference >= -1e-10
};

// F_d = mean over samples of e^{-lambda d}.
DriftReport drift_curve_properties(std::span<const double> lambdas, std::span<const double> depths);

// Per-depth sample counts proportional to max(mean, 2^-n)^-2, summing to
// budget exactly (largest remainder).
std::vector<std::uint64_t> allocate_samples(const FidelityTable& table, std::uint64_t budget);

}  // namespace qecho
