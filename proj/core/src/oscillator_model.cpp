#include "oscq/oscillator_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oscq/errors.hpp"

namespace oscq {

namespace {

void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) raise(ErrorCode::InvalidSystem, std::string(what) + " has non-finite entries");
}

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) raise(ErrorCode::InvalidSystem, std::string(what) + " has non-finite entries");
}

void check_psd(const Mat& k, const char* what) {
  if (k.size() == 0) return;
  const double scale = spectral_norm(k);
  if (min_eigenvalue(k) < -kPsdTol * scale) {
    raise(ErrorCode::InvalidSystem, std::string(what) + " is not positive semidefinite");
  }
}

}  // namespace

Mat build_incidence(const Mat& g) {
  if (g.rows() != g.cols()) raise(ErrorCode::NonSymmetric, "stiffness graph is not square");
  require_finite(g, "stiffness graph");
  const double scale = std::max(g.cwiseAbs().maxCoeff(), 1e-300);
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    raise(ErrorCode::NonSymmetric, "stiffness graph is not symmetric");
  }
  if (g.size() > 0 && g.minCoeff() < 0.0) {
    raise(ErrorCode::NegativeEntry, "stiffness graph has a negative spring constant");
  }
  const Mat gs = 0.5 * (g + g.transpose());
  Mat k = -gs;
  for (Eigen::Index j = 0; j < gs.rows(); ++j) k(j, j) = gs.row(j).sum();
  return k;
}

OscillatorSystem::OscillatorSystem(Vec masses, Mat stiffness_graph, Vec x0, Vec v0)
    : masses_(std::move(masses)), g_(std::move(stiffness_graph)), x0_(std::move(x0)), v0_(std::move(v0)) {
  const auto n = masses_.size();
  if (n == 0) raise(ErrorCode::InvalidSystem, "system needs at least one mass");
  if (g_.rows() != n || g_.cols() != n || x0_.size() != n || v0_.size() != n) {
    raise(ErrorCode::DimensionMismatch, "masses, stiffness, x0 and v0 disagree in size");
  }
  require_finite(masses_, "masses");
  require_finite(x0_, "x0");
  require_finite(v0_, "v0");
  if (masses_.minCoeff() <= 0.0) raise(ErrorCode::InvalidSystem, "masses must be strictly positive");
  k_ = build_incidence(g_);
  g_ = 0.5 * (g_ + g_.transpose());
  check_psd(k_, "incidence matrix");
}

Mat OscillatorSystem::mass_scaled_stiffness() const {
  const Vec s = inv_sqrt_mass();
  return s.asDiagonal() * k_ * s.asDiagonal();
}

double OscillatorSystem::energy() const {
  return 0.5 * (v0_.dot(masses_.cwiseProduct(v0_)) + x0_.dot(k_ * x0_));
}

bool OscillatorSystem::positive_definite() const {
  const Mat a = mass_scaled_stiffness();
  return min_eigenvalue(a) > kPsdTol * std::max(spectral_norm(a), 1e-300);
}

std::size_t pair_count(std::size_t n) { return n * (n + 1) / 2; }

std::size_t pair_column(std::size_t j, std::size_t k, std::size_t n) {
  if (j > k || k >= n) raise(ErrorCode::OutOfRange, "pair index requires j <= k < n");
  // Rows before j contribute n, n-1, ..., n-j+1 pairs.
  return j * n - j * (j - 1) / 2 + (k - j);
}

Mat build_b_factor(const OscillatorSystem& system) {
  const std::size_t n = system.dim();
  const Mat& g = system.stiffness_graph();
  const Vec s = system.inv_sqrt_mass();
  Mat b = Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(pair_count(n)));
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    b(jj, static_cast<Eigen::Index>(pair_column(j, j, n))) = std::sqrt(g(jj, jj)) * s(jj);
    for (std::size_t k = j + 1; k < n; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      const auto col = static_cast<Eigen::Index>(pair_column(j, k, n));
      const double root = std::sqrt(g(jj, kk));
      b(jj, col) = root * s(jj);
      b(kk, col) = -root * s(kk);
    }
  }
  return b;
}

AmplitudePhase amplitude_phase_from_ic(double x0, double v0, double omega) {
  if (!(omega > 0.0)) raise(ErrorCode::ZeroFrequency, "angular frequency must be positive");
  const double s = v0 / omega;
  return {std::hypot(x0, s), -std::atan2(s, x0)};
}

ForcingSpec::ForcingSpec(std::vector<std::vector<FourierTerm>> per_mass) : terms_(std::move(per_mass)) {
  for (const auto& row : terms_) l_ = std::max(l_, row.size());
  for (auto& row : terms_) {
    for (const auto& term : row) {
      if (!(term.omega > 0.0)) raise(ErrorCode::ZeroFrequency, "forcing frequencies must be positive");
      if (!std::isfinite(term.amplitude) || !std::isfinite(term.phase)) {
        raise(ErrorCode::InvalidSystem, "forcing term has non-finite entries");
      }
    }
    while (row.size() < l_) row.push_back({0.0, 1.0, 0.0});
  }
}

Vec ForcingSpec::evaluate(double t) const {
  Vec f = Vec::Zero(static_cast<Eigen::Index>(terms_.size()));
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    for (const auto& term : terms_[i]) {
      f(static_cast<Eigen::Index>(i)) += term.amplitude * std::cos(term.omega * t + term.phase);
    }
  }
  return f;
}

double ForcingSpec::max_frequency() const {
  double w = 0.0;
  for (const auto& row : terms_) {
    for (const auto& term : row) {
      if (term.amplitude != 0.0) w = std::max(w, term.omega);
    }
  }
  return w;
}

bool ForcingSpec::is_zero() const {
  for (const auto& row : terms_) {
    for (const auto& term : row) {
      if (term.amplitude != 0.0) return false;
    }
  }
  return true;
}

NonlinearOscillatorSystem::NonlinearOscillatorSystem(Vec masses, Mat k1, Mat k2, Vec x0, Vec v0,
                                                     double energy_bound)
    : masses_(std::move(masses)), k1_(std::move(k1)), k2_(std::move(k2)), x0_(std::move(x0)),
      v0_(std::move(v0)), e_(energy_bound) {
  const auto n = masses_.size();
  if (n == 0) raise(ErrorCode::InvalidSystem, "system needs at least one mass");
  if (k1_.rows() != n || k1_.cols() != n || k2_.rows() != n || k2_.cols() != n * n ||
      x0_.size() != n || v0_.size() != n) {
    raise(ErrorCode::DimensionMismatch, "nonlinear system blocks disagree in size");
  }
  require_finite(masses_, "masses");
  require_finite(k1_, "K1");
  require_finite(k2_, "K2");
  if (masses_.minCoeff() <= 0.0) raise(ErrorCode::InvalidSystem, "masses must be strictly positive");
  const double scale = std::max(k1_.cwiseAbs().maxCoeff(), 1e-300);
  if ((k1_ - k1_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    raise(ErrorCode::NonSymmetric, "K1 is not symmetric");
  }
  check_psd(k1_, "K1");
  const double e0 = initial_energy();
  if (e_ < e0 - 1e-12 * std::max(1.0, std::abs(e0))) {
    raise(ErrorCode::InvalidSystem, "energy bound is below the initial energy");
  }
}

NonlinearOscillatorSystem::NonlinearOscillatorSystem(Vec masses, Mat k1, Mat k2, Vec x0, Vec v0)
    : NonlinearOscillatorSystem(masses, k1, k2, x0, v0,
                                0.5 * (v0.dot(masses.cwiseProduct(v0)) + x0.dot(k1 * x0))) {}

double NonlinearOscillatorSystem::initial_energy() const {
  return 0.5 * (v0_.dot(masses_.cwiseProduct(v0_)) + x0_.dot(k1_ * x0_));
}

TimeDependentStiffnessSpec::TimeDependentStiffnessSpec(std::size_t n, std::vector<TdPairSpec> pairs) : n_(n) {
  if (n == 0) raise(ErrorCode::InvalidSystem, "time-dependent stiffness needs at least one mass");
  pairs_.resize(pair_count(n));
  std::vector<bool> seen(pairs_.size(), false);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      auto& slot = pairs_[pair_column(i, j, n)];
      slot.i = i;
      slot.j = j;
    }
  }
  for (auto& p : pairs) {
    if (p.i > p.j) std::swap(p.i, p.j);
    if (p.j >= n) raise(ErrorCode::OutOfRange, "stiffness pair refers to a missing mass");
    const std::size_t col = pair_column(p.i, p.j, n);
    if (seen[col]) raise(ErrorCode::InvalidSystem, "stiffness pair listed twice");
    seen[col] = true;
    if (p.i != p.j && p.constant != 0.0) {
      raise(ErrorCode::InvalidSystem, "off-diagonal stiffness pairs must have zero constant term");
    }
    for (const auto& term : p.terms) {
      if (!(term.omega > 0.0)) raise(ErrorCode::ZeroFrequency, "stiffness frequencies must be positive");
    }
    pairs_[col] = p;
  }
  for (const auto& p : pairs_) l_ = std::max(l_, p.terms.size());
  for (auto& p : pairs_) {
    while (p.terms.size() < l_) p.terms.push_back({0.0, 1.0, 0.0});
  }
}

const TdPairSpec& TimeDependentStiffnessSpec::pair(std::size_t i, std::size_t j) const {
  return pairs_[pair_column(std::min(i, j), std::max(i, j), n_)];
}

Mat TimeDependentStiffnessSpec::graph_at(double t) const {
  const auto n = static_cast<Eigen::Index>(n_);
  Mat g = Mat::Zero(n, n);
  for (const auto& p : pairs_) {
    double value = p.constant;
    for (const auto& term : p.terms) value += term.amplitude * std::cos(term.omega * t + term.phase);
    const auto a = static_cast<Eigen::Index>(p.i);
    const auto b = static_cast<Eigen::Index>(p.j);
    g(a, b) = value;
    g(b, a) = value;
  }
  return g;
}

Mat TimeDependentStiffnessSpec::incidence_at(double t) const {
  // Oscillating springs may dip negative while K(t) stays PSD, so the
  // incidence map is applied without the nonnegativity guard.
  const Mat g = graph_at(t);
  Mat k = -g;
  for (Eigen::Index j = 0; j < g.rows(); ++j) k(j, j) = g.row(j).sum();
  return k;
}

double TimeDependentStiffnessSpec::max_frequency() const {
  double w = 0.0;
  for (const auto& p : pairs_) {
    for (const auto& term : p.terms) {
      if (term.amplitude != 0.0) w = std::max(w, term.omega);
    }
  }
  return w;
}

double TimeDependentStiffnessSpec::max_stiffness_bound() const {
  // Upper bound on ‖K(t)‖ via Gershgorin with |cos| ≤ 1.
  Mat g = Mat::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
  for (const auto& p : pairs_) {
    double v = std::abs(p.constant);
    for (const auto& term : p.terms) v += std::abs(term.amplitude);
    g(static_cast<Eigen::Index>(p.i), static_cast<Eigen::Index>(p.j)) = v;
    g(static_cast<Eigen::Index>(p.j), static_cast<Eigen::Index>(p.i)) = v;
  }
  return 2.0 * g.rowwise().sum().maxCoeff();
}

void TimeDependentStiffnessSpec::check_psd(double horizon, int samples) const {
  const int count = std::max(samples, 2);
  for (int s = 0; s < count; ++s) {
    const double t = horizon * s / (count - 1);
    const Mat k = incidence_at(t);
    const double scale = std::max(spectral_norm(k), 1e-300);
    if (min_eigenvalue(k) < -kPsdTol * scale) {
      raise(ErrorCode::InvalidSystem, "K(t) is not positive semidefinite at t = " + std::to_string(t));
    }
  }
}

}  // namespace oscq
