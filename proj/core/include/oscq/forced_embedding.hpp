#pragma once

#include <cstddef>
#include <vector>

#include "oscq/linalg.hpp"
#include "oscq/oscillator_model.hpp"
#include "oscq/reference_integrator.hpp"

namespace oscq {

struct EmbeddingBoundTerms {
  double norm_khat = 0.0;        // ‖K̂‖, the γ-coefficient of K′
  double norm_k0 = 0.0;          // ‖K₀′‖
  double norm_t = 0.0;           // ‖T‖ of the γ = 0 block-diagonal generator
  double norm_inv_sqrt_m = 0.0;  // ‖√M̂⁻¹‖ with M̂ = diag(M, I)
  double norm_sqrt_a = 0.0;
  double norm_sqrt_m = 0.0;
  double xi0 = 0.0;
};

struct MfSelection {
  double m_f = 0.0;
  EmbeddingBoundTerms terms;
};

// Smallest m_f with m_f ≥ t‖K̂‖‖T‖‖√M̂⁻¹‖(1 + Ξ(0)/ε).
MfSelection select_m_f(const OscillatorSystem& system, const ForcingSpec& forcing, double t_horizon,
                       double epsilon);

struct ForcedEmbedding {
  OscillatorSystem original;
  ForcingSpec forcing;
  OscillatorSystem enlarged;  // dimension N(l+1); masses diag(M, m_f I)
  std::size_t n = 0;
  std::size_t l = 0;
  double m_f = 0.0;
  double gamma = 0.0;
  // M̂ z̈ = −(K₀′ + γK̂) z with M̂ = diag(M, I)
  Mat k0_prime;
  Mat k_hat;
  Vec mass_hat;
  double norm_kp = 0.0;  // ‖K′‖ of the enlarged incidence matrix
};

// Index of the q-th auxiliary of mass j inside the enlarged system.
std::size_t auxiliary_index(std::size_t j, std::size_t q, std::size_t n, std::size_t l);

ForcedEmbedding build_embedding(const OscillatorSystem& system, const ForcingSpec& forcing, double m_f);

struct EmbeddingReport {
  double m_f = 0.0;
  double xi0 = 0.0;
  double norm_kp = 0.0;
  double max_error = 0.0;
  double epsilon_target = 0.0;
  bool pass = false;
  std::vector<double> times;
  std::vector<double> errors;
  Trajectory enlarged_trajectory;
  Trajectory reference_trajectory;
};

EmbeddingReport verify_embedding(const ForcedEmbedding& emb, const std::vector<double>& t_grid, double epsilon,
                                 const IntegratorConfig& cfg = {});

struct GammaSweepPoint {
  double m_f;
  double gamma;
  double max_error;
};

struct GammaSweep {
  std::vector<GammaSweepPoint> points;
  double slope = 0.0;  // least-squares slope of log(error) against log(m_f)
};

GammaSweep gamma_sweep(const OscillatorSystem& system, const ForcingSpec& forcing,
                       const std::vector<double>& t_grid, const std::vector<double>& m_f_values,
                       const IntegratorConfig& cfg = {});

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

std::vector<double> kinetic_energy_fraction(const Trajectory& traj, const std::vector<std::size_t>& subset,
                                            const Vec& masses, double e_sys);

}  // namespace oscq
