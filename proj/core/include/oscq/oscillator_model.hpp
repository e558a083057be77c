#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "oscq/linalg.hpp"

namespace oscq {

inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;

Mat build_incidence(const Mat& g);

// Mass-spring network M ẍ = −K x. Validated on construction and immutable.
class OscillatorSystem {
 public:
  OscillatorSystem(Vec masses, Mat stiffness_graph, Vec x0, Vec v0);

  std::size_t dim() const { return static_cast<std::size_t>(masses_.size()); }
  const Vec& masses() const { return masses_; }
  const Mat& stiffness_graph() const { return g_; }
  const Mat& incidence() const { return k_; }
  const Vec& x0() const { return x0_; }
  const Vec& v0() const { return v0_; }

  Vec sqrt_mass() const { return masses_.cwiseSqrt(); }
  Vec inv_sqrt_mass() const { return masses_.cwiseSqrt().cwiseInverse(); }
  // A = √M⁻¹ K √M⁻¹
  Mat mass_scaled_stiffness() const;
  double energy() const;
  bool positive_definite() const;

 private:
  Vec masses_;
  Mat g_;
  Mat k_;
  Vec x0_;
  Vec v0_;
};

std::size_t pair_count(std::size_t n);

// Column index of the pair (j, k), j ≤ k, zero-based, lexicographic.
std::size_t pair_column(std::size_t j, std::size_t k, std::size_t n);

Mat build_b_factor(const OscillatorSystem& system);

struct AmplitudePhase {
  double amplitude;
  double phase;
};

AmplitudePhase amplitude_phase_from_ic(double x0, double v0, double omega);

struct FourierTerm {
  double amplitude;
  double omega;
  double phase;
};

// f_i(t) = Σ_j amplitude_ij cos(ω_ij t + φ_ij); every mass carries the same
// number of terms (zero-amplitude padding).
class ForcingSpec {
 public:
  ForcingSpec() = default;
  explicit ForcingSpec(std::vector<std::vector<FourierTerm>> per_mass);

  std::size_t dim() const { return terms_.size(); }
  std::size_t terms_per_mass() const { return l_; }
  const std::vector<std::vector<FourierTerm>>& terms() const { return terms_; }
  Vec evaluate(double t) const;
  double max_frequency() const;
  bool is_zero() const;

 private:
  std::vector<std::vector<FourierTerm>> terms_;
  std::size_t l_ = 0;
};

// M ẍ = −K₁ x + K₂ (x ⊗ x)
class NonlinearOscillatorSystem {
 public:
  NonlinearOscillatorSystem(Vec masses, Mat k1, Mat k2, Vec x0, Vec v0, double energy_bound);
  // Energy bound defaults to the initial energy.
  NonlinearOscillatorSystem(Vec masses, Mat k1, Mat k2, Vec x0, Vec v0);

  std::size_t dim() const { return static_cast<std::size_t>(masses_.size()); }
  const Vec& masses() const { return masses_; }
  const Mat& k1() const { return k1_; }
  const Mat& k2() const { return k2_; }
  const Vec& x0() const { return x0_; }
  const Vec& v0() const { return v0_; }
  double energy_bound() const { return e_; }
  double initial_energy() const;

 private:
  Vec masses_;
  Mat k1_;
  Mat k2_;
  Vec x0_;
  Vec v0_;
  double e_;
};

struct TdPairSpec {
  std::size_t i;  // zero-based, i ≤ j
  std::size_t j;
  double constant = 0.0;
  std::vector<FourierTerm> terms;
};

// Time-dependent stiffness graph G(t); K(t) is its incidence matrix.
class TimeDependentStiffnessSpec {
 public:
  TimeDependentStiffnessSpec() = default;
  TimeDependentStiffnessSpec(std::size_t n, std::vector<TdPairSpec> pairs);

  std::size_t dim() const { return n_; }
  std::size_t terms_per_pair() const { return l_; }
  const std::vector<TdPairSpec>& pairs() const { return pairs_; }
  const TdPairSpec& pair(std::size_t i, std::size_t j) const;

  Mat graph_at(double t) const;
  Mat incidence_at(double t) const;
  double max_frequency() const;
  double max_stiffness_bound() const;
  // Throws InvalidSystem if K(t) leaves the PSD cone on `samples` points.
  void check_psd(double horizon, int samples = 200) const;

 private:
  std::size_t n_ = 0;
  std::size_t l_ = 0;
  std::vector<TdPairSpec> pairs_;
};

}  // namespace oscq
