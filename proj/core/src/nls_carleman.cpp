#include "oscq/nls_carleman.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "oscq/errors.hpp"

namespace oscq {

NLSSystem::NLSSystem(CMat h1_in, CMat h2_in, CVec psi0_in)
    : h1(std::move(h1_in)), h2(std::move(h2_in)), psi0(std::move(psi0_in)) {
  const Eigen::Index n = h1.rows();
  if (n == 0 || h1.cols() != n || h2.rows() != n || h2.cols() != n * n || psi0.size() != n) {
    raise(ErrorCode::DimensionMismatch, "NLS system needs H1 n×n, H2 n×n², psi0 of length n");
  }
  if (!h1.allFinite() || !h2.allFinite() || !psi0.allFinite()) {
    raise(ErrorCode::InvalidSystem, "NLS system has non-finite entries");
  }
  if (!is_hermitian(h1)) raise(ErrorCode::NotHermitian, "H1 must be Hermitian");
  if (!(beta() > 0.0)) raise(ErrorCode::InvalidSystem, "initial state must be nonzero");
}

CVec NLSSystem::rhs(const CVec& psi) const {
  CVec out = -I_UNIT * (h1 * psi);
  out.noalias() += h2 * kron(psi, psi);
  return out;
}

int NLSSystem::sparsity_d() const { return std::max(sparsity(h1), sparsity(h2)); }

double NLSSystem::max_entry() const { return std::max(max_abs_entry(h1), max_abs_entry(h2)); }

namespace {

std::size_t ipow(std::size_t base, int exp) {
  std::size_t out = 1;
  for (int e = 0; e < exp; ++e) {
    if (out > std::numeric_limits<std::size_t>::max() / std::max<std::size_t>(base, 1)) {
      return std::numeric_limits<std::size_t>::max();
    }
    out *= base;
  }
  return out;
}

void check_budget(std::size_t n, int k) {
  if (k < 1) raise(ErrorCode::OutOfRange, "truncation order must be at least 1");
  std::size_t total = 0;
  for (int i = 1; i <= k; ++i) {
    const std::size_t block = ipow(n, i);
    if (block > kCarlemanBudget || total + block > kCarlemanBudget) {
      raise(ErrorCode::DimensionBudget, "Carleman state exceeds the dimension budget");
    }
    total += block;
  }
  const std::size_t padded = ipow(n, k);
  if (padded > kCarlemanBudget / static_cast<std::size_t>(k)) {
    raise(ErrorCode::DimensionBudget, "padded Carleman layout exceeds the dimension budget");
  }
}

}  // namespace

CMat CarlemanGenerator::drift_block(int i) const { return kronecker_sum(h1, i); }

CMat CarlemanGenerator::coupling_block(int i) const { return kronecker_lift(h2, n, i); }

CVec CarlemanGenerator::unroll(const CVec& psi) const {
  CVec p(static_cast<Eigen::Index>(dim()));
  CVec power = psi;
  for (int i = 1; i <= k; ++i) {
    p.segment(static_cast<Eigen::Index>(offsets[i - 1]), static_cast<Eigen::Index>(sizes[i - 1])) = power;
    if (i < k) power = kron(power, psi);
  }
  return p;
}

CarlemanGenerator build_carleman_generator(const NLSSystem& nls, int k) {
  const std::size_t n = nls.dim();
  check_budget(n, k);
  CarlemanGenerator gen;
  gen.k = k;
  gen.n = n;
  gen.h1 = nls.h1;
  gen.h2 = nls.h2;
  std::size_t total = 0;
  for (int i = 1; i <= k; ++i) {
    gen.offsets.push_back(total);
    gen.sizes.push_back(ipow(n, i));
    total += gen.sizes.back();
  }
  const auto dim = static_cast<Eigen::Index>(total);
  gen.c = CMat::Zero(dim, dim);
  for (int i = 1; i <= k; ++i) {
    const auto off = static_cast<Eigen::Index>(gen.offsets[i - 1]);
    const auto sz = static_cast<Eigen::Index>(gen.sizes[i - 1]);
    gen.c.block(off, off, sz, sz) = -I_UNIT * gen.drift_block(i);
    if (i < k) {
      const auto off_next = static_cast<Eigen::Index>(gen.offsets[i]);
      const auto sz_next = static_cast<Eigen::Index>(gen.sizes[i]);
      gen.c.block(off, off_next, sz, sz_next) = gen.coupling_block(i);
    }
  }
  return gen;
}

CMat build_padded_generator(const CarlemanGenerator& gen) {
  // |0⟩^{⊗(k−i)} ⊗ v places v in the leading n^i entries of an n^k register.
  const std::size_t reg = ipow(gen.n, gen.k);
  const auto r = static_cast<Eigen::Index>(reg);
  CMat out = CMat::Zero(r * gen.k, r * gen.k);
  for (int i = 1; i <= gen.k; ++i) {
    const auto row = static_cast<Eigen::Index>(i - 1) * r;
    const auto sz = static_cast<Eigen::Index>(gen.sizes[i - 1]);
    out.block(row, row, sz, sz) = -I_UNIT * gen.drift_block(i);
    if (i < gen.k) {
      const auto sz_next = static_cast<Eigen::Index>(gen.sizes[i]);
      out.block(row, row + r, sz, sz_next) = gen.coupling_block(i);
    }
  }
  return out;
}

CVec padded_state(const CVec& psi, int k) {
  const std::size_t reg = ipow(static_cast<std::size_t>(psi.size()), k);
  const auto r = static_cast<Eigen::Index>(reg);
  CVec out = CVec::Zero(r * k);
  CVec power = psi;
  for (int i = 1; i <= k; ++i) {
    out.segment(static_cast<Eigen::Index>(i - 1) * r, power.size()) = power;
    if (i < k) power = kron(power, psi);
  }
  return out;
}

Regime parse_regime(const std::string& name) {
  if (name == "small-t") return Regime::SmallT;
  if (name == "no-resonance") return Regime::NoResonance;
  raise(ErrorCode::ConfigInvalid, "unknown regime '" + name + "'");
}

std::string regime_name(Regime r) { return r == Regime::SmallT ? "small-t" : "no-resonance"; }

double compute_delta(const Vec& eigenvalues, int order_cap) {
  if (order_cap < 2) raise(ErrorCode::OutOfRange, "order cap must be at least 2");
  if (eigenvalues.size() == 0) raise(ErrorCode::OutOfRange, "no eigenvalues supplied");
  std::vector<double> uniq(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
  std::sort(uniq.begin(), uniq.end());
  std::vector<double> lam;
  for (const double v : uniq) {
    if (lam.empty() || std::abs(v - lam.back()) > 1e-12 * std::max(1.0, std::abs(v))) lam.push_back(v);
  }
  // Sums reachable with exactly w unit weights, for w = 0..cap.
  std::vector<std::set<double>> by_weight(static_cast<std::size_t>(order_cap) + 1);
  by_weight[0].insert(0.0);
  for (int w = 1; w <= order_cap; ++w) {
    for (const double s : by_weight[static_cast<std::size_t>(w) - 1]) {
      for (const double l : lam) by_weight[static_cast<std::size_t>(w)].insert(s + l);
    }
    if (by_weight[static_cast<std::size_t>(w)].size() > 20'000'000) {
      raise(ErrorCode::DimensionBudget, "resonance enumeration too large");
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (int w = 2; w <= order_cap; ++w) {
    for (const double s : by_weight[static_cast<std::size_t>(w)]) {
      for (const double l : lam) best = std::min(best, std::abs(l - s));
    }
  }
  return best;
}

TruncationDiagnostics select_truncation_order(const NLSSystem& nls, double t, double epsilon, Regime regime,
                                              const std::optional<Vec>& frequencies) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) raise(ErrorCode::OutOfRange, "epsilon must lie in (0, 1)");
  if (!(t > 0.0)) raise(ErrorCode::OutOfRange, "time must be positive");
  TruncationDiagnostics d;
  d.regime = regime;
  d.h2_norm = spectral_norm(nls.h2);
  d.beta = nls.beta();
  if (d.h2_norm == 0.0) {
    d.k = 1;
    d.bound_value = 1.0;
    d.delta = std::numeric_limits<double>::infinity();
    return d;
  }
  if (regime == Regime::SmallT) {
    const double x = d.h2_norm * t;
    if (!(x < 1.0)) raise(ErrorCode::RegimeViolated, "small-t regime needs ||H2|| t < 1");
    if (!(d.beta * x < 1.0)) raise(ErrorCode::RegimeViolated, "small-t regime needs beta ||H2|| t < 1");
    d.bound_value = std::log(1.0 / epsilon) / std::log(1.0 / x);
    d.k = std::max(1, static_cast<int>(std::ceil(d.bound_value - 1e-12)));
    return d;
  }

  Vec lam;
  if (frequencies) {
    lam = *frequencies;
  } else {
    Eigen::SelfAdjointEigenSolver<CMat> es(nls.h1, Eigen::EigenvaluesOnly);
    lam = es.eigenvalues();
  }
  d.c_const = 0.5 * d.h2_norm * d.beta * d.beta;
  int k = 1;
  for (int iter = 0; iter < 64; ++iter) {
    d.delta = compute_delta(lam, 2 * k);
    if (!(d.delta > 0.0)) raise(ErrorCode::RegimeViolated, "no-resonance regime needs Delta > 0 (exact resonance)");
    d.r_r = 4.0 * std::exp(1.0) * d.beta * d.h2_norm / d.delta;
    if (!(d.r_r < 1.0)) raise(ErrorCode::RegimeViolated, "no-resonance regime needs R_r < 1");
    const double numer = std::log(d.c_const * t / epsilon);
    d.bound_value = numer <= 0.0 ? 1.0 : numer / std::log(1.0 / d.r_r);
    const int next = std::max(1, static_cast<int>(std::ceil(d.bound_value - 1e-12)));
    if (next <= k) {
      d.k = std::max(next, 1);
      return d;
    }
    k = next;
  }
  raise(ErrorCode::RegimeViolated, "truncation order did not settle");
}

double aleph_direct(double beta, double eta, int k) {
  double sum = 0.0;
  for (int i = 1; i <= k; ++i) sum += std::pow(beta, i) / std::pow(eta, 2 * (k - i));
  return std::sqrt(sum);
}

double aleph_closed_form(double beta, double eta, int k) {
  const double r = beta * eta * eta;
  return std::sqrt(r * (1.0 - std::pow(r, k)) / (1.0 - r)) / std::pow(eta, k);
}

double p1_closed_form(double beta, double eta, int k) {
  const double r = beta * eta * eta;
  if (std::abs(1.0 - r) < 1e-14) return 1.0 / k;
  return (1.0 - r) / (1.0 - std::pow(r, k));
}

CVec SymmetrizedGenerator::evolve(double t) const {
  if (t == 0.0) return p_hat0;
  return propagator->apply(p_hat0, t);
}

CVec SymmetrizedGenerator::decode(const CVec& p_hat) const {
  return std::pow(eta, k - 1) * p_hat.head(static_cast<Eigen::Index>(n));
}

CVec SymmetrizedGenerator::apply_d(const CVec& p_hat) const {
  CVec out = p_hat;
  for (int i = 1; i <= k; ++i) {
    out.segment(static_cast<Eigen::Index>(offsets[i - 1]), static_cast<Eigen::Index>(sizes[i - 1])) *=
        d_scale(i - 1);
  }
  return out;
}

SymmetrizedGenerator build_symmetrized(const CarlemanGenerator& gen, const NLSSystem& nls, double eta) {
  if (!(eta > 0.0)) raise(ErrorCode::OutOfRange, "eta must be positive");
  SymmetrizedGenerator sym;
  sym.k = gen.k;
  sym.n = gen.n;
  sym.eta = eta;
  sym.beta = nls.beta();
  sym.offsets = gen.offsets;
  sym.sizes = gen.sizes;
  const auto dim = static_cast<Eigen::Index>(gen.dim());
  sym.qhat = CMat::Zero(dim, dim);
  sym.d_scale.resize(gen.k);
  sym.p_hat0.resize(dim);
  CVec power = nls.psi0;
  for (int i = 1; i <= gen.k; ++i) {
    const auto off = static_cast<Eigen::Index>(gen.offsets[i - 1]);
    const auto sz = static_cast<Eigen::Index>(gen.sizes[i - 1]);
    sym.qhat.block(off, off, sz, sz) = gen.drift_block(i);
    if (i < gen.k) {
      const auto off_next = static_cast<Eigen::Index>(gen.offsets[i]);
      const auto sz_next = static_cast<Eigen::Index>(gen.sizes[i]);
      const CMat upper = (I_UNIT / eta) * gen.coupling_block(i);
      sym.qhat.block(off, off_next, sz, sz_next) = upper;
      sym.qhat.block(off_next, off, sz_next, sz) = upper.adjoint();
    }
    sym.d_scale(i - 1) = std::pow(eta, gen.k - i);
    sym.p_hat0.segment(off, sz) = power / sym.d_scale(i - 1);
    if (i < gen.k) power = kron(power, nls.psi0);
  }
  sym.aleph = sym.p_hat0.norm();
  sym.hhat_norm_bound = spectral_norm(nls.h2) * gen.k * (gen.k + 1) / 2.0;
  sym.propagator = std::make_shared<const HermitianPropagator>(sym.qhat);
  return sym;
}

double select_eta(const NLSSystem& nls, int k, double t, double epsilon) {
  if (!(epsilon > 0.0)) raise(ErrorCode::OutOfRange, "epsilon must be positive");
  const double h2 = spectral_norm(nls.h2);
  if (h2 == 0.0) return 1.0;
  const double beta = nls.beta();
  double s = 0.0;
  for (int i = 1; i <= k; ++i) s += std::pow(beta, i);
  const double eta = std::sqrt(h2 * k * (k + 1) / 2.0 * (1.0 + s / epsilon) * t);
  return eta > 0.0 ? eta : 1.0;
}

std::vector<CVec> carleman_flow(const CarlemanGenerator& gen, const CVec& p0, const std::vector<double>& t_grid) {
  std::vector<CVec> out;
  out.reserve(t_grid.size());
  std::map<double, CMat> cache;
  double t_prev = 0.0;
  CVec p = p0;
  for (const double t : t_grid) {
    const double dt = t - t_prev;
    if (dt != 0.0) {
      auto it = cache.find(dt);
      if (it == cache.end()) it = cache.emplace(dt, CMat((gen.c * dt).exp())).first;
      p = it->second * p;
    }
    out.push_back(p);
    t_prev = t;
  }
  return out;
}

CarlemanRun evolve_and_decode(const SymmetrizedGenerator& sym, const CarlemanGenerator& gen, const NLSSystem& nls,
                              const std::vector<double>& t_grid, const Trajectory* oracle,
                              const IntegratorConfig& cfg) {
  if (sym.qhat.rows() != gen.c.rows() || gen.n != nls.dim()) {
    raise(ErrorCode::DimensionMismatch, "symmetrized and Carleman generators disagree");
  }
  Trajectory own;
  if (oracle == nullptr) {
    own = integrate_nls(nls, t_grid, cfg);
    oracle = &own;
  }
  if (oracle->size() != t_grid.size()) raise(ErrorCode::DimensionMismatch, "oracle grid differs");
  const std::vector<CVec> exact = carleman_flow(gen, gen.unroll(nls.psi0), t_grid);

  CarlemanRun run;
  run.decoded.kind = TrajectoryKind::ComplexState;
  run.decoded.dim = sym.n;
  run.decoded.times = t_grid;
  run.decoded.complex_states.resize(static_cast<Eigen::Index>(t_grid.size()), static_cast<Eigen::Index>(sym.n));
  const double aleph2 = sym.aleph * sym.aleph;
  const double eta_pow = std::pow(sym.eta, 2 * (sym.k - 1));
  for (std::size_t r = 0; r < t_grid.size(); ++r) {
    const CVec p_hat = sym.evolve(t_grid[r]);
    const CVec psi = sym.decode(p_hat);
    run.decoded.complex_states.row(static_cast<Eigen::Index>(r)) = psi.transpose();
    run.p1.push_back(p_hat.head(static_cast<Eigen::Index>(sym.n)).squaredNorm() / aleph2);
    run.p1_formula.push_back(psi.squaredNorm() / (eta_pow * aleph2));
    run.errors.push_back((psi - oracle->psi(r)).norm());
    run.sym_errors.push_back((sym.apply_d(p_hat) - exact[r]).norm());
    run.max_error = std::max(run.max_error, run.errors.back());
    run.max_sym_error = std::max(run.max_sym_error, run.sym_errors.back());
  }
  return run;
}

double truncation_error_bound(const NLSSystem& nls, int k, double t) {
  const double beta = nls.beta();
  const double h2 = spectral_norm(nls.h2);
  const double a = 2.0 * k * sparsity(nls.h2) * max_abs_entry(nls.h2);
  const double growth = a == 0.0 ? t : std::expm1(a * t) / a;
  return k * std::pow(beta, k) * h2 * growth;
}

bool truncation_bound_condition(const NLSSystem& nls, double t) {
  return std::exp(2.0 * sparsity(nls.h2) * max_abs_entry(nls.h2) * t) * nls.beta() < 1.0;
}

std::vector<TruncationStudyRow> truncation_error_study(const NLSSystem& nls, const std::vector<int>& k_list,
                                                       double t, const IntegratorConfig& oracle_cfg) {
  const std::vector<double> grid{0.0, t};
  const Trajectory oracle = integrate_nls(nls, grid, oracle_cfg);
  const CVec psi_t = oracle.psi(1);
  const bool applies = truncation_bound_condition(nls, t);
  std::vector<TruncationStudyRow> rows;
  for (const int k : k_list) {
    const CarlemanGenerator gen = build_carleman_generator(nls, k);
    const std::vector<CVec> flow = carleman_flow(gen, gen.unroll(nls.psi0), grid);
    TruncationStudyRow row;
    row.k = k;
    row.t = t;
    const CVec diff = flow.back() - gen.unroll(psi_t);
    row.measured_error = diff.norm();
    row.first_block_error = diff.head(static_cast<Eigen::Index>(gen.n)).norm();
    row.bound = truncation_error_bound(nls, k, t);
    row.bound_applies = applies;
    row.pass = !applies || row.measured_error <= row.bound;
    rows.push_back(row);
  }
  return rows;
}

Expectation expectation_value(const SymmetrizedGenerator& sym, const CVec& p_hat_t, const CMat& observable) {
  if (observable.rows() != static_cast<Eigen::Index>(sym.n) || observable.cols() != observable.rows()) {
    raise(ErrorCode::DimensionMismatch, "observable must act on the physical block");
  }
  if (!is_hermitian(observable)) raise(ErrorCode::NotHermitianObservable, "observable is not Hermitian");
  const CVec psi = sym.decode(p_hat_t);
  const cplx rescaled = psi.dot(observable * psi);
  const double norm = sym.aleph * sym.aleph * std::pow(sym.eta, 2 * (sym.k - 1));
  return {rescaled / norm, rescaled};
}

}  // namespace oscq
