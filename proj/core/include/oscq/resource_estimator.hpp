#pragma once

#include <map>
#include <optional>
#include <string>

#include "oscq/linalg.hpp"
#include "oscq/nls_carleman.hpp"
#include "oscq/nls_system.hpp"
#include "oscq/nonlinear_reduction.hpp"
#include "oscq/oscillator_model.hpp"

namespace oscq {

// A claimed subnormalization constant next to the spectral norm it must dominate.
struct ConstantCheck {
  double claimed = 0.0;
  double norm = 0.0;
  bool holds() const { return norm <= claimed * (1.0 + 1e-12); }
};

struct ResourceReport {
  int k = 0;
  double eta = 0.0;
  double aleph = 0.0;
  double alpha = 0.0;  // d · max entry of (H₁, H₂)
  int d = 0;
  double t = 0.0;
  double epsilon = 0.0;
  // Asymptotic estimate αk²t + (k−1)/2 · log(η²) with all O(·) constants set to one.
  double g_queries = 0.0;
  Regime regime = Regime::SmallT;
  bool small_t_ok = false;
  bool no_resonance_ok = false;
  bool truncation_condition = false;
  double delta = 0.0;
  double r_r = 0.0;
  double c_const = 0.0;
  std::map<std::string, double> alpha_constants;
  std::map<std::string, ConstantCheck> checks;

  bool all_constants_hold() const;
};

// `k_override` replaces the selected truncation order; regime guards still apply.
ResourceReport estimate_resources(const NLSSystem& nls, double t, double epsilon, Regime regime,
                                  std::optional<int> k_override = std::nullopt);

// √(2αd) against ‖H‖ for the harmonic block Hamiltonian, α = max_jk G_jk / m_j.
ConstantCheck harmonic_constant(const OscillatorSystem& system);
// ‖H̄₂‖ against d k²_max / (k¹_min m_min^{3/2}).
ConstantCheck reduced_quadratic_constant(const NLSReduction& red);

struct Dilation {
  CMat unitary;
  double unitarity_defect = 0.0;  // ‖U†U − I‖
  double block_defect = 0.0;      // ‖top-left block − A/α‖
};

// U = [[A/α, √(I − AA†/α²)], [√(I − A†A/α²), −A†/α]].
Dilation dilation_block_encode(const CMat& a, double alpha);

}  // namespace oscq
