#include "oscq/forced_embedding.hpp"

#include <algorithm>
#include <cmath>

#include "oscq/errors.hpp"

namespace oscq {

namespace {

// Forcing with at least one (possibly zero-amplitude) term per mass.
ForcingSpec normalized_forcing(const OscillatorSystem& system, const ForcingSpec& forcing) {
  if (forcing.dim() == 0) {
    return ForcingSpec(std::vector<std::vector<FourierTerm>>(system.dim(), {FourierTerm{0.0, 1.0, 0.0}}));
  }
  if (forcing.dim() != system.dim()) raise(ErrorCode::DimensionMismatch, "forcing length differs from system");
  if (forcing.terms_per_mass() == 0) {
    return ForcingSpec(std::vector<std::vector<FourierTerm>>(system.dim(), {FourierTerm{0.0, 1.0, 0.0}}));
  }
  return forcing;
}

void check_walls(const OscillatorSystem& system, const ForcingSpec& forcing) {
  const Mat& g = system.stiffness_graph();
  for (std::size_t j = 0; j < system.dim(); ++j) {
    bool forced = false;
    for (const auto& term : forcing.terms()[j]) forced = forced || term.amplitude != 0.0;
    const auto jj = static_cast<Eigen::Index>(j);
    if (forced && !(g(jj, jj) > 0.0)) {
      raise(ErrorCode::ZeroWallSpring, "forced mass " + std::to_string(j) + " has no wall spring");
    }
  }
}

struct InitialAux {
  Vec z0;
  Vec zdot0;
};

InitialAux auxiliary_initial_data(const OscillatorSystem& system, const ForcingSpec& forcing) {
  const std::size_t n = system.dim();
  const std::size_t l = forcing.terms_per_mass();
  const auto dim = static_cast<Eigen::Index>(n * (l + 1));
  InitialAux out{Vec::Zero(dim), Vec::Zero(dim)};
  out.z0.head(static_cast<Eigen::Index>(n)) = system.x0();
  out.zdot0.head(static_cast<Eigen::Index>(n)) = system.v0();
  const Mat& g = system.stiffness_graph();
  for (std::size_t j = 0; j < n; ++j) {
    const double kjj = g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
    for (std::size_t q = 0; q < l; ++q) {
      const FourierTerm& term = forcing.terms()[j][q];
      if (term.amplitude == 0.0) continue;
      const double scale = 2.0 * static_cast<double>(l) * term.amplitude / kjj;
      const auto idx = static_cast<Eigen::Index>(auxiliary_index(j, q, n, l));
      out.z0(idx) = scale * std::cos(term.phase);
      out.zdot0(idx) = -scale * term.omega * std::sin(term.phase);
    }
  }
  return out;
}

struct Decomposition {
  Mat k0;
  Mat khat;
  Vec mass_hat;
};

// γ-independent split of the enlarged dynamics in the rescaled masses.
Decomposition decompose(const OscillatorSystem& system, const ForcingSpec& forcing) {
  const std::size_t n = system.dim();
  const std::size_t l = forcing.terms_per_mass();
  const auto dim = static_cast<Eigen::Index>(n * (l + 1));
  const auto nn = static_cast<Eigen::Index>(n);
  Decomposition d{Mat::Zero(dim, dim), Mat::Zero(dim, dim), Vec::Ones(dim)};
  d.mass_hat.head(nn) = system.masses();
  d.k0.topLeftCorner(nn, nn) = system.incidence();
  const Mat& g = system.stiffness_graph();
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double c = g(jj, jj) / (2.0 * static_cast<double>(l));
    for (std::size_t q = 0; q < l; ++q) {
      const auto a = static_cast<Eigen::Index>(auxiliary_index(j, q, n, l));
      const double w = forcing.terms()[j][q].omega;
      d.k0(jj, a) = -c;
      d.k0(a, a) = w * w;
      d.khat(a, jj) = -c;
      d.khat(a, a) = c;
    }
  }
  return d;
}

}  // namespace

std::size_t auxiliary_index(std::size_t j, std::size_t q, std::size_t n, std::size_t l) {
  if (j >= n || q >= l) raise(ErrorCode::OutOfRange, "auxiliary index out of range");
  return n + j * l + q;
}

MfSelection select_m_f(const OscillatorSystem& system, const ForcingSpec& forcing_in, double t_horizon,
                       double epsilon) {
  if (!(epsilon > 0.0) || !(t_horizon > 0.0)) {
    raise(ErrorCode::OutOfRange, "epsilon and horizon must be positive");
  }
  const ForcingSpec forcing = normalized_forcing(system, forcing_in);
  check_walls(system, forcing);
  const Decomposition d = decompose(system, forcing);
  const InitialAux init = auxiliary_initial_data(system, forcing);

  // Block-diagonal γ = 0 generator: A_x on the physical block, ω² on the
  // auxiliaries; the upper coupling block does not enter T.
  const Mat a_x = system.mass_scaled_stiffness();
  const double a_norm = spectral_norm(a_x);
  const Mat inv_sqrt_ax = sym_inv_sqrt(a_x, kPsdTol * std::max(a_norm, 1e-300));
  const Vec s = system.inv_sqrt_mass();
  double min_omega = std::numeric_limits<double>::infinity();
  double max_omega = 0.0;
  for (const auto& row : forcing.terms()) {
    for (const auto& term : row) {
      min_omega = std::min(min_omega, term.omega);
      max_omega = std::max(max_omega, term.omega);
    }
  }
  const double inv_sqrt_m_norm = std::max(s.maxCoeff(), 1.0);
  const double upper = std::max(spectral_norm(Mat(s.asDiagonal() * inv_sqrt_ax)), 1.0 / min_omega);

  MfSelection out;
  EmbeddingBoundTerms& bt = out.terms;
  bt.norm_khat = spectral_norm(d.khat);
  bt.norm_k0 = spectral_norm(d.k0);
  bt.norm_t = std::max(upper, inv_sqrt_m_norm);
  bt.norm_inv_sqrt_m = inv_sqrt_m_norm;
  bt.norm_sqrt_a = std::max(std::sqrt(a_norm), max_omega);
  bt.norm_sqrt_m = std::max(std::sqrt(system.masses().maxCoeff()), 1.0);
  bt.xi0 = bt.norm_sqrt_a * bt.norm_sqrt_m * init.z0.norm() + bt.norm_sqrt_m * init.zdot0.norm();
  out.m_f = t_horizon * bt.norm_khat * bt.norm_t * bt.norm_inv_sqrt_m * (1.0 + bt.xi0 / epsilon);
  return out;
}

ForcedEmbedding build_embedding(const OscillatorSystem& system, const ForcingSpec& forcing_in, double m_f) {
  if (!(m_f > 0.0)) raise(ErrorCode::OutOfRange, "fictitious mass must be positive");
  const ForcingSpec forcing = normalized_forcing(system, forcing_in);
  check_walls(system, forcing);
  const std::size_t n = system.dim();
  const std::size_t l = forcing.terms_per_mass();
  const auto dim = static_cast<Eigen::Index>(n * (l + 1));
  const auto nn = static_cast<Eigen::Index>(n);

  Mat g = Mat::Zero(dim, dim);
  g.topLeftCorner(nn, nn) = system.stiffness_graph();
  Vec masses = Vec::Constant(dim, m_f);
  masses.head(nn) = system.masses();
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double kjj = system.stiffness_graph()(jj, jj);
    g(jj, jj) = 0.5 * kjj;
    for (std::size_t q = 0; q < l; ++q) {
      const auto a = static_cast<Eigen::Index>(auxiliary_index(j, q, n, l));
      const double w = forcing.terms()[j][q].omega;
      g(jj, a) = kjj / (2.0 * static_cast<double>(l));
      g(a, jj) = g(jj, a);
      g(a, a) = m_f * w * w;
    }
  }
  const InitialAux init = auxiliary_initial_data(system, forcing);
  OscillatorSystem enlarged(masses, g, init.z0, init.zdot0);
  const Decomposition d = decompose(system, forcing);

  ForcedEmbedding emb{system, forcing, enlarged, n, l, m_f, 1.0 / m_f, d.k0, d.khat, d.mass_hat, 0.0};
  emb.norm_kp = spectral_norm(enlarged.incidence());
  return emb;
}

EmbeddingReport verify_embedding(const ForcedEmbedding& emb, const std::vector<double>& t_grid, double epsilon,
                                 const IntegratorConfig& cfg) {
  EmbeddingReport rep;
  rep.m_f = emb.m_f;
  rep.norm_kp = emb.norm_kp;
  rep.epsilon_target = epsilon;
  rep.enlarged_trajectory = integrate_linear(emb.enlarged, t_grid, cfg);
  rep.reference_trajectory = integrate_forced(emb.original, emb.forcing, t_grid, cfg);
  rep.times = t_grid;
  rep.errors.resize(t_grid.size());
  const auto n = static_cast<Eigen::Index>(emb.n);
  for (std::size_t r = 0; r < t_grid.size(); ++r) {
    const Vec pz = rep.enlarged_trajectory.x(r).head(n);
    rep.errors[r] = (pz - rep.reference_trajectory.x(r)).norm();
    rep.max_error = std::max(rep.max_error, rep.errors[r]);
  }
  rep.pass = rep.max_error <= epsilon;
  return rep;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) raise(ErrorCode::OutOfRange, "slope fit needs two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

GammaSweep gamma_sweep(const OscillatorSystem& system, const ForcingSpec& forcing,
                       const std::vector<double>& t_grid, const std::vector<double>& m_f_values,
                       const IntegratorConfig& cfg) {
  GammaSweep sweep;
  std::vector<double> xs, ys;
  for (const double m_f : m_f_values) {
    const ForcedEmbedding emb = build_embedding(system, forcing, m_f);
    const EmbeddingReport rep = verify_embedding(emb, t_grid, std::numeric_limits<double>::infinity(), cfg);
    sweep.points.push_back({m_f, 1.0 / m_f, rep.max_error});
    xs.push_back(m_f);
    ys.push_back(rep.max_error);
  }
  sweep.slope = loglog_slope(xs, ys);
  return sweep;
}

std::vector<double> kinetic_energy_fraction(const Trajectory& traj, const std::vector<std::size_t>& subset,
                                            const Vec& masses, double e_sys) {
  if (subset.empty()) raise(ErrorCode::EmptySubset, "kinetic energy subset is empty");
  if (traj.kind != TrajectoryKind::PositionVelocity) {
    raise(ErrorCode::DimensionMismatch, "kinetic energy needs velocities");
  }
  if (!(e_sys > 0.0)) raise(ErrorCode::ZeroEnergy, "system energy must be positive");
  for (const std::size_t i : subset) {
    if (i >= traj.dim || static_cast<Eigen::Index>(i) >= masses.size()) {
      raise(ErrorCode::OutOfRange, "subset index outside the system");
    }
  }
  std::vector<double> out(traj.size());
  for (std::size_t r = 0; r < traj.size(); ++r) {
    const Vec v = traj.v(r);
    double kin = 0.0;
    for (const std::size_t i : subset) {
      const auto ii = static_cast<Eigen::Index>(i);
      kin += 0.5 * masses(ii) * v(ii) * v(ii);
    }
    out[r] = kin / e_sys;
  }
  return out;
}

}  // namespace oscq
