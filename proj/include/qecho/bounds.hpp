#pragma once

namespace qecho {

namespace constants {
inline constexpr double planck_time = 5.391247e-44;    // s (CODATA 2018)
inline constexpr double planck_length = 1.616255e-35;  // m (CODATA 2018)
inline constexpr double julian_year = 365.25 * 86400.0;             // s
inline constexpr double light_year = 299792458.0 * julian_year;     // m
}  // namespace constants

struct EmqmScales {
  double t_qpu = 1e-3;
  double l_qpu = 1e-2;
  double t_emqm = constants::planck_time;
  double l_emqm = constants::planck_length;
  int d_emqm = 3;
};

// log2(T_qpu / T_emqm) + D log2(L_qpu / L_emqm).
double emqm_qubit_bound(const EmqmScales& scales);

struct StatisticalReach {
  double f_min = 1.0;
  double max_nd = 0.0;
};

// F_min = N_s^{-1/2} / eps_r and max n*d = ln(1 / F_min) / (1 - f).
StatisticalReach statistical_reach(double n_samples, double eps_r, double gate_fidelity);

}  // namespace qecho
