#pragma once

#include <cstddef>

#include "oscq/linalg.hpp"

namespace oscq {

// ψ̇ = −iH₁ψ + H₂(ψ ⊗ ψ), β = ⟨ψ0|ψ0⟩.
struct NLSSystem {
  CMat h1;
  CMat h2;
  CVec psi0;

  NLSSystem(CMat h1_in, CMat h2_in, CVec psi0_in);

  std::size_t dim() const { return static_cast<std::size_t>(h1.rows()); }
  double beta() const { return psi0.squaredNorm(); }
  CVec rhs(const CVec& psi) const;
  // Max row/column nonzeros over H₁ and H₂.
  int sparsity_d() const;
  double max_entry() const;
};

}  // namespace oscq
