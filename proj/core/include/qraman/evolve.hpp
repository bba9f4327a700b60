#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qraman/matrix.hpp"
#include "qraman/system.hpp"

namespace qraman {

struct IntegratorConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  // must resolve the e^{i(Delta12+delta)t/hbar} oscillation, period ~0.95 ps
  // at the default energies
  double max_step = 0.02;                // ps
  std::vector<double> sample_times;      // ps; empty -> final time only
};

struct SimResult {
  std::vector<double> times;
  // populations[level][i] at times[i]
  std::vector<std::vector<double>> populations;
  std::vector<cplx> coherence_h1h2;
  CMat final_rho;
  std::vector<std::string> labels;  // optional, set by callers that know them

  // diagnostics
  double final_trace_defect = 0.0;
  double max_trace_defect = 0.0;
  double max_positivity_defect = 0.0;  // max over samples of (-min eigenvalue, clamped at 0)
  double min_purity = 1.0;             // min over samples of tr(rho^2)
  long long steps_accepted = 0;
  long long steps_rejected = 0;
};

class EvolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Integrates d rho/dt = -i [H(t), rho] + sum_k (gamma_k/2) L[A_k] rho with an
// embedded Dormand-Prince 5(4) pair, PI step control, dense output at
// cfg.sample_times, and re-symmetrization of rho after each accepted step.
// coh_i/coh_j choose the tracked coherence element (default h1 = 0, last level).
SimResult evolve(const HamFn& hamiltonian, int dim,
                 std::span<const DissipatorSpec> dissipators,
                 const DensityMatrix& rho0, double t_begin, double t_end,
                 const IntegratorConfig& cfg, int coh_i = 0, int coh_j = -1);

// population of the labeled level at the last sample time
double final_population(const SimResult& result, std::string_view label);

}  // namespace qraman
