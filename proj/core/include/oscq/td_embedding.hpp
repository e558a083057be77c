#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "oscq/linalg.hpp"
#include "oscq/oscillator_model.hpp"
#include "oscq/reference_integrator.hpp"

namespace oscq {

// Lexicographic rank of the one-based pair (i, j), i ≤ j ≤ n, counted from zero.
std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n);
// Inverse of pair_index, returning one-based (i, j).
std::pair<std::size_t, std::size_t> pair_from_index(std::size_t index, std::size_t n);

// Index of (a, b) ↦ (b, a) inside a d² tensor register.
std::size_t register_swap(std::size_t index, std::size_t d);
// Columns of k2 (rows × d²) permuted by the register swap.
Mat apply_register_swap(const Mat& k2, std::size_t d);

// Auxiliary oscillator y(t) = amplitude · cos(ω t + φ) with unit mass.
struct AuxiliaryOscillator {
  std::size_t index = 0;
  double amplitude = 0.0;
  double omega = 1.0;
  double phase = 0.0;

  double value(double t) const;
  double rate(double t) const;
};

// z = [x; y-blocks; (w-blocks; p)] with M′ z̈ = −K₁ z + K₂ (z ⊗ z).
struct TDEmbedding {
  NonlinearOscillatorSystem enlarged;
  TimeDependentStiffnessSpec td;
  std::optional<ForcingSpec> forcing;
  std::size_t n = 0;
  std::size_t slots = 0;         // y-slots per pair
  std::size_t forced_slots = 0;  // w-slots per mass
  std::size_t y_offset = 0;
  std::size_t w_offset = 0;
  std::size_t p_offset = 0;
  std::vector<AuxiliaryOscillator> auxiliaries;

  std::size_t dim() const { return enlarged.dim(); }
  std::size_t y_index(std::size_t pair, std::size_t slot) const { return y_offset + pair * slots + slot; }
  std::size_t w_index(std::size_t mass, std::size_t slot) const { return w_offset + mass * forced_slots + slot; }
  Vec project(const Vec& z) const { return z.head(static_cast<Eigen::Index>(n)); }
  // Enlarged state with the physical block `x` and closed-form auxiliaries at time t.
  Vec closed_form_state(const Vec& x, double t) const;
};

TDEmbedding build_td_embedding(const Vec& masses, const TimeDependentStiffnessSpec& td, const Vec& x0,
                               const Vec& v0);
TDEmbedding build_td_forced_embedding(const Vec& masses, const TimeDependentStiffnessSpec& td,
                                      const ForcingSpec& forcing, const Vec& x0, const Vec& v0);

// max over samples of |(−K₁z + K₂(z⊗z))_x − (−K(t)x + f(t))| with closed-form auxiliaries.
double symbolic_check(const TDEmbedding& emb, const Vec& x_probe, double horizon, int samples = 200);

struct TDVerification {
  double max_x_error = 0.0;
  double max_aux_error = 0.0;
  double p_drift = 0.0;
  bool pass = false;
  std::vector<double> times;
  std::vector<double> errors;
  Trajectory enlarged_trajectory;
};

inline constexpr double kTdSubspaceTol = 1e-6;
inline constexpr double kTdAuxTol = 1e-8;
inline constexpr double kTdRegisterTol = 1e-10;

TDVerification verify_td_embedding(const TDEmbedding& emb, const Trajectory& reference,
                                   const std::vector<double>& t_grid, const IntegratorConfig& cfg = {});

}  // namespace oscq
