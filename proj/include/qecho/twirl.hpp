#pragma once

#include <vector>

#include "qecho/channels.hpp"
#include "qecho/gates.hpp"

namespace qecho {

enum class Direction { forward, backward };
enum class PredictionMethod { mean_gate, twirl };

// F_d ~ f0_tilde * exp(-lambda d).
struct DecayPrediction {
  double f0_tilde = 1.0;
  double lambda = 0.0;
  PredictionMethod method = PredictionMethod::mean_gate;
  int period = 1;
  // mean_gate: average gate fidelity f with f^(2 n_g) = prod_i f_i^2
  double mean_gate_fidelity = 1.0;
  std::vector<double> position_fidelity_sq;  // f_i^2 per position
  // twirl: hat F_t for t = 1..p and the turning-point fidelity hat F_d
  std::vector<double> layer_fidelities;
  double turning_point_fidelity = 1.0;
};

// Entanglement fidelity of N_u, where the noisy gate is Phi_u = N_u o Ad(u).
// Forward: Phi_u = N2 o Ad(iSWAP) o (N1_a (x) N1_b) o Ad(g_a (x) g_b).
// Backward: Phi_{u^dag} = (N1'_a (x) N1'_b) o Ad(h_a (x) h_b) o N2' o Ad(iSWAP).
double composed_gate_fidelity(const NoiseModel& model, int position, Dressing a, Dressing b,
                              Direction direction);

// lambda = -(2 n_g / p) ln f with f_i^2 = E_u[f_u f_{u^dag}] over the nine
// dressings and f^(2 n_g) = prod_i f_i^2; f0_tilde = tr(rho_fin rho_init).
DecayPrediction mean_gate_prediction(const NoiseModel& model);

inline constexpr int kMaxTwirlQubits = 4;

// n-qubit noise superoperator N_t (forward) or N'_t (backward) of circuit
// layer t >= 1, with the layer unitary commuted out. Dressing-dependent
// pieces are averaged over the nine dressings.
Matrix layer_noise_superoperator(const NoiseModel& model, int t, Direction direction);

// 2-design twirl: hat F_t = 2^-2n tr(N'_{t+1} o N_t), lambda = -(1/p) ln prod_t hat F_t,
// f0_tilde = tr[N'_1^dag(rho_fin) rho_init] tr(N_p) / tr(N'_{p+1} o N_p).
// Valid at depths that are multiples of the period.
DecayPrediction twirl_prediction(const NoiseModel& model);

}  // namespace qecho
