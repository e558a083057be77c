#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oscq/linalg.hpp"
#include "oscq/nls_system.hpp"
#include "oscq/reference_integrator.hpp"

namespace oscq {

inline constexpr std::size_t kCarlemanBudget = 65536;

// Truncated Carleman system ṗ = C p on p = [ψ; ψ^{⊗2}; …; ψ^{⊗k}].
struct CarlemanGenerator {
  int k = 0;
  std::size_t n = 0;
  CMat c;
  std::vector<std::size_t> offsets;  // start of block i (zero-based) inside p
  std::vector<std::size_t> sizes;

  CMat drift_block(int i) const;     // A_i = Kronecker sum of i copies of H₁ (Hermitian)
  CMat coupling_block(int i) const;  // B_i : n^{i+1} → n^i
  CVec unroll(const CVec& psi) const;
  std::size_t dim() const { return static_cast<std::size_t>(c.rows()); }

  CMat h1;
  CMat h2;
};

CarlemanGenerator build_carleman_generator(const NLSSystem& nls, int k);

// Register-shaped layout of dimension k·n^k with w_i = |0⟩^{⊗(k−i)} ψ^{⊗i}.
CMat build_padded_generator(const CarlemanGenerator& gen);
CVec padded_state(const CVec& psi, int k);

enum class Regime { SmallT, NoResonance };

Regime parse_regime(const std::string& name);
std::string regime_name(Regime r);

double compute_delta(const Vec& eigenvalues, int order_cap);

struct TruncationDiagnostics {
  int k = 0;
  Regime regime = Regime::SmallT;
  double h2_norm = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  double r_r = 0.0;
  double c_const = 0.0;
  double bound_value = 0.0;  // the real-valued lower bound on k before rounding up
};

// `frequencies` overrides the spectrum used for the gap Δ (defaults to eig(H₁)).
TruncationDiagnostics select_truncation_order(const NLSSystem& nls, double t, double epsilon, Regime regime,
                                              const std::optional<Vec>& frequencies = std::nullopt);

struct SymmetrizedGenerator {
  int k = 0;
  std::size_t n = 0;
  double eta = 1.0;
  double beta = 0.0;
  CMat qhat;
  Vec d_scale;  // per-block factor of D = diag(η^{k−1}, …, 1)
  double aleph = 0.0;
  double hhat_norm_bound = 0.0;
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> sizes;
  CVec p_hat0;
  std::shared_ptr<const HermitianPropagator> propagator;

  CVec evolve(double t) const;
  // η^{k−1} × (first block of p̂)
  CVec decode(const CVec& p_hat) const;
  CVec apply_d(const CVec& p_hat) const;
};

SymmetrizedGenerator build_symmetrized(const CarlemanGenerator& gen, const NLSSystem& nls, double eta);

// ℵ² = Σ_{i=1..k} β^i / η^{2(k−i)}
double aleph_direct(double beta, double eta, int k);
double aleph_closed_form(double beta, double eta, int k);
double p1_closed_form(double beta, double eta, int k);

double select_eta(const NLSSystem& nls, int k, double t, double epsilon);

struct CarlemanRun {
  Trajectory decoded;
  std::vector<double> p1;         // ‖first block of φ‖²
  std::vector<double> p1_formula; // ⟨ψ̃|ψ̃⟩ / (η^{2(k−1)} ℵ²)
  std::vector<double> errors;     // ‖ψ̃(t) − ψ_oracle(t)‖
  std::vector<double> sym_errors; // ‖D p̂(t) − p(t)‖ against the truncated Carleman flow
  double max_error = 0.0;
  double max_sym_error = 0.0;
};

CarlemanRun evolve_and_decode(const SymmetrizedGenerator& sym, const CarlemanGenerator& gen, const NLSSystem& nls,
                              const std::vector<double>& t_grid, const Trajectory* oracle = nullptr,
                              const IntegratorConfig& cfg = {});

// e^{C t} p(0) on every grid point.
std::vector<CVec> carleman_flow(const CarlemanGenerator& gen, const CVec& p0, const std::vector<double>& t_grid);

struct TruncationStudyRow {
  int k = 0;
  double t = 0.0;
  double measured_error = 0.0;     // whole stacked vector [ψ; ψ^{⊗2}; …]
  double first_block_error = 0.0;  // ψ block only, the part that is decoded
  double bound = 0.0;
  bool bound_applies = false;
  bool pass = false;
};

std::vector<TruncationStudyRow> truncation_error_study(const NLSSystem& nls, const std::vector<int>& k_list,
                                                       double t, const IntegratorConfig& oracle_cfg = {});

double truncation_error_bound(const NLSSystem& nls, int k, double t);
bool truncation_bound_condition(const NLSSystem& nls, double t);

struct Expectation {
  cplx normalized;  // ⟨φ|Ô|φ⟩ on the normalized symmetrized state
  cplx rescaled;    // ⟨ψ̃|O|ψ̃⟩, comparable with the oracle ⟨ψ|O|ψ⟩
};

Expectation expectation_value(const SymmetrizedGenerator& sym, const CVec& p_hat_t, const CMat& observable);

}  // namespace oscq
