#include "oscq/resource_estimator.hpp"

#include <algorithm>
#include <cmath>

#include "oscq/errors.hpp"

namespace oscq {

bool ResourceReport::all_constants_hold() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& kv) { return kv.second.holds(); });
}

ResourceReport estimate_resources(const NLSSystem& nls, double t, double epsilon, Regime regime,
                                  std::optional<int> k_override) {
  const TruncationDiagnostics diag = select_truncation_order(nls, t, epsilon, regime);
  ResourceReport rep;
  rep.k = k_override.value_or(diag.k);
  if (rep.k < 1) raise(ErrorCode::OutOfRange, "truncation order must be at least 1");
  rep.regime = regime;
  rep.t = t;
  rep.epsilon = epsilon;
  rep.delta = diag.delta;
  rep.r_r = diag.r_r;
  rep.c_const = diag.c_const;
  rep.eta = select_eta(nls, rep.k, t, epsilon);
  rep.aleph = aleph_direct(nls.beta(), rep.eta, rep.k);
  rep.d = nls.sparsity_d();
  rep.alpha = rep.d * nls.max_entry();

  const double h2 = spectral_norm(nls.h2);
  rep.small_t_ok = h2 * t < 1.0 && nls.beta() * h2 * t < 1.0;
  rep.no_resonance_ok = regime == Regime::NoResonance || h2 == 0.0;
  if (regime == Regime::SmallT && h2 > 0.0) {
    Eigen::SelfAdjointEigenSolver<CMat> es(nls.h1, Eigen::EigenvaluesOnly);
    const double delta = compute_delta(es.eigenvalues(), std::max(2, 2 * rep.k));
    rep.no_resonance_ok = delta > 0.0 && 4.0 * std::exp(1.0) * nls.beta() * h2 / delta < 1.0;
  }
  rep.truncation_condition = truncation_bound_condition(nls, t);

  const double k = rep.k;
  rep.alpha_constants["alpha_k"] = rep.alpha * k;
  rep.alpha_constants["2_alpha_k"] = 2.0 * rep.alpha * k;
  rep.alpha_constants["6_alpha_k2"] = 6.0 * rep.alpha * k * k;
  rep.g_queries = rep.alpha * k * k * t;
  if (rep.k > 1) rep.g_queries += 0.5 * (k - 1.0) * std::log(rep.eta * rep.eta);

  const CarlemanGenerator gen = build_carleman_generator(nls, rep.k);
  double a_max = 0.0;
  double b_max = 0.0;
  for (int i = 1; i <= rep.k; ++i) {
    a_max = std::max(a_max, spectral_norm(gen.drift_block(i)));
    if (i < rep.k) b_max = std::max(b_max, spectral_norm(gen.coupling_block(i)));
  }
  const SymmetrizedGenerator sym = build_symmetrized(gen, nls, rep.eta);
  rep.checks["A_i"] = {rep.alpha_constants["2_alpha_k"], a_max};
  rep.checks["B_i"] = {rep.alpha_constants["2_alpha_k"], b_max};
  rep.checks["Q_hat"] = {rep.alpha_constants["6_alpha_k2"], spectral_norm(sym.qhat)};
  return rep;
}

ConstantCheck harmonic_constant(const OscillatorSystem& system) {
  const Mat& g = system.stiffness_graph();
  const Vec& m = system.masses();
  double alpha = 0.0;
  for (Eigen::Index j = 0; j < g.rows(); ++j) {
    for (Eigen::Index i = 0; i < g.cols(); ++i) alpha = std::max(alpha, g(j, i) / m(j));
  }
  const int d = sparsity(g);
  const Mat b = build_b_factor(system);
  const auto n = b.rows();
  const auto p = b.cols();
  Mat h = Mat::Zero(n + p, n + p);
  h.topRightCorner(n, p) = b;
  h.bottomLeftCorner(p, n) = b.transpose();
  return {std::sqrt(2.0 * alpha * d), spectral_norm(h)};
}

ConstantCheck reduced_quadratic_constant(const NLSReduction& red) { return {red.h2_bound, red.h2_norm}; }

Dilation dilation_block_encode(const CMat& a, double alpha) {
  if (!(alpha > 0.0)) raise(ErrorCode::SubnormalizationViolated, "alpha must be positive");
  const double norm = spectral_norm(a);
  if (norm > alpha * (1.0 + 1e-12)) {
    raise(ErrorCode::SubnormalizationViolated, "matrix norm exceeds the subnormalization constant");
  }
  const CMat s = a / alpha;
  const Eigen::Index m = s.rows();
  const Eigen::Index n = s.cols();
  Dilation out;
  out.unitary = CMat::Zero(m + n, m + n);
  out.unitary.topLeftCorner(m, n) = s;
  out.unitary.topRightCorner(m, m) = herm_sqrt_psd(CMat::Identity(m, m) - s * s.adjoint());
  out.unitary.bottomLeftCorner(n, n) = herm_sqrt_psd(CMat::Identity(n, n) - s.adjoint() * s);
  out.unitary.bottomRightCorner(n, m) = -s.adjoint();
  const CMat gram = out.unitary.adjoint() * out.unitary - CMat::Identity(m + n, m + n);
  out.unitarity_defect = spectral_norm(gram);
  out.block_defect = spectral_norm(CMat(out.unitary.topLeftCorner(m, n) - s));
  return out;
}

}  // namespace oscq
