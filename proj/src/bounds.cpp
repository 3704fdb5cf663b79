#include "qecho/bounds.hpp"

#include <cmath>

#include "qecho/common.hpp"

namespace qecho {

double emqm_qubit_bound(const EmqmScales& s) {
  if (!(s.t_qpu > 0.0 && s.l_qpu > 0.0 && s.t_emqm > 0.0 && s.l_emqm > 0.0)) {
    throw InvalidArgument("EmQM scales must be positive");
  }
  if (s.d_emqm < 1) throw InvalidArgument("EmQM dimension must be at least 1");
  return std::log2(s.t_qpu / s.t_emqm) + s.d_emqm * std::log2(s.l_qpu / s.l_emqm);
}

StatisticalReach statistical_reach(double n_samples, double eps_r, double gate_fidelity) {
  if (!(n_samples >= 1.0) || !std::isfinite(n_samples)) throw InvalidArgument("sample count must be >= 1");
  if (!(eps_r > 0.0 && eps_r <= 1.0)) throw InvalidArgument("relative error must lie in (0, 1]");
  if (!(gate_fidelity > 0.0 && gate_fidelity < 1.0)) throw InvalidArgument("gate fidelity must lie in (0, 1)");
  StatisticalReach r;
  r.f_min = 1.0 / (std::sqrt(n_samples) * eps_r);
  r.max_nd = std::max(0.0, -std::log(r.f_min) / (1.0 - gate_fidelity));
  return r;
}

}  // namespace qecho
