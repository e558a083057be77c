#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "oscq/harmonic_schrodingerization.hpp"
#include "oscq/linalg.hpp"
#include "oscq/nls_carleman.hpp"
#include "oscq/nls_system.hpp"
#include "oscq/oscillator_model.hpp"
#include "oscq/reference_integrator.hpp"

namespace oscq {

// Spring graph implied by a stiffness matrix: off-diagonal springs −K₁(j,i),
// wall springs from the row sums.
Mat graph_from_stiffness(const Mat& k1);

// Quadratic oscillator rewritten as ψ̇ = −iH̄₁ψ + H̄₂(ψ⊗ψ) on ψ = [u̇; −iB†u], u = √M x.
struct NLSReduction {
  explicit NLSReduction(NLSSystem system) : nls(std::move(system)) {}

  NLSSystem nls;
  std::size_t n = 0;
  std::size_t pairs = 0;
  Mat a1;
  Mat a2;
  Mat b;
  // D₂ maps (B†u ⊗ B†u) to u ⊗ u; size n² × pairs².
  Mat d2;
  // P₂: position of the (s ⊗ s) entry (a, b) inside ψ ⊗ ψ, indexed a·pairs + b.
  std::vector<std::size_t> p2;
  Vec inv_sqrt_mass;
  Vec sqrt_mass;
  Mat a1_inv_b;

  int d = 0;
  double k1_min = 0.0;  // min_j K₁-wall spring / m_j
  double k2_max = 0.0;
  double m_min = 0.0;
  double d2_norm = 0.0;
  double a2_norm = 0.0;
  double a2_bound = 0.0;  // ‖K₂‖‖√M⁻¹‖³
  double h2_norm = 0.0;
  double h2_bound = 0.0;  // d k²_max / (k¹_min m_min^{3/2})

  CVec encode(const Vec& x, const Vec& v) const;
  DecodedState decode(const CVec& psi) const;
  // Positive eigenfrequencies √λ(A₁).
  Vec frequencies() const;
};

NLSReduction reduce_to_nls(const NonlinearOscillatorSystem& system);

// Right side [ü; −iB†u̇] computed straight from the oscillator ODE.
CVec direct_derivative(const NLSReduction& red, const NonlinearOscillatorSystem& system, const Vec& x,
                       const Vec& v);

struct NonlinearSimulationReport {
  int k = 0;
  int k_formula = 0;
  double eta = 0.0;
  double delta = 0.0;
  double r_r = 0.0;
  double c_const = 0.0;
  double c_bound = 0.0;
  double beta = 0.0;
  double truncation_estimate = 0.0;
  double max_error = 0.0;
  double max_sym_error = 0.0;
  double epsilon = 0.0;
  Regime regime = Regime::NoResonance;
  bool pass = false;
  std::vector<double> errors;  // ‖(x, ẋ)_pipeline − (x, ẋ)_oracle‖ per grid point
};

struct NonlinearSimulation {
  Trajectory trajectory;
  Trajectory reference;
  NonlinearSimulationReport report;
};

NonlinearSimulation simulate_nonlinear_oscillator(const NonlinearOscillatorSystem& system,
                                                  const std::vector<double>& t_grid, double epsilon,
                                                  Regime regime = Regime::NoResonance,
                                                  const IntegratorConfig& cfg = {});

}  // namespace oscq
