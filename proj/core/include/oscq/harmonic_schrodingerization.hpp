#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "oscq/linalg.hpp"
#include "oscq/oscillator_model.hpp"
#include "oscq/reference_integrator.hpp"

namespace oscq {

// State ψ = [√M ẋ; i B†√M x] / √(2E) evolving under H = −[[0, B], [B†, 0]].
struct QuantumEncoding {
  std::size_t n = 0;      // number of masses
  std::size_t pairs = 0;  // columns of B
  CMat hamiltonian;
  CVec psi0;
  double energy = 0.0;
  Mat b;
  Vec inv_sqrt_mass;
  Mat a_inv_b;  // A⁻¹B, recovers w from B†w
};

QuantumEncoding encode(const OscillatorSystem& system);

CVec evolve_hermitian(const CMat& h, const CVec& psi0, double t);

struct DecodedState {
  Vec x;
  Vec v;
};

DecodedState decode(const QuantumEncoding& enc, const CVec& psi_t);

// encode → evolve → decode on every grid point, sharing one eigendecomposition.
Trajectory simulate_harmonic(const QuantumEncoding& enc, const std::vector<double>& t_grid);

}  // namespace oscq
