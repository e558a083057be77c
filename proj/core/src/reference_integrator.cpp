#include "oscq/reference_integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "oscq/errors.hpp"

namespace oscq {

Vec Trajectory::x(std::size_t row) const {
  return real_states.row(static_cast<Eigen::Index>(row)).head(static_cast<Eigen::Index>(dim)).transpose();
}

Vec Trajectory::v(std::size_t row) const {
  return real_states.row(static_cast<Eigen::Index>(row))
      .segment(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))
      .transpose();
}

CVec Trajectory::psi(std::size_t row) const {
  return complex_states.row(static_cast<Eigen::Index>(row)).transpose();
}

std::vector<double> linspace(double t0, double t1, std::size_t samples) {
  if (samples < 2) raise(ErrorCode::OutOfRange, "a time grid needs at least two samples");
  std::vector<double> out(samples);
  const double span = t1 - t0;
  for (std::size_t i = 0; i < samples; ++i) {
    out[i] = t0 + span * static_cast<double>(i) / static_cast<double>(samples - 1);
  }
  out.back() = t1;
  return out;
}

namespace {

void check_grid(const std::vector<double>& t_grid) {
  if (t_grid.empty()) raise(ErrorCode::OutOfRange, "empty time grid");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) raise(ErrorCode::OutOfRange, "time grid must be strictly increasing");
  }
}

template <typename V>
struct Stepper {
  std::function<void(double, const V&, V&)> rhs;
  V k1, k2, k3, k4, k5, k6, k7, tmp;

  void rk4(double t, V& y, double h) {
    rhs(t, y, k1);
    tmp = y + (0.5 * h) * k1;
    rhs(t + 0.5 * h, tmp, k2);
    tmp = y + (0.5 * h) * k2;
    rhs(t + 0.5 * h, tmp, k3);
    tmp = y + h * k3;
    rhs(t + h, tmp, k4);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  // Dormand–Prince 5(4); returns the scaled error norm, writes the 5th order
  // solution into `out`. k1 must hold f(t, y) on entry (FSAL).
  double dopri(double t, const V& y, double h, V& out, double rtol, double atol) {
    constexpr double a21 = 1.0 / 5.0;
    constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                     a54 = -212.0 / 729.0;
    constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                     a65 = -5103.0 / 18656.0;
    constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                     b6 = 11.0 / 84.0;
    constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                     e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
    tmp = y + h * (a21 * k1);
    rhs(t + h / 5.0, tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + 3.0 * h / 10.0, tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + 4.0 * h / 5.0, tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + 8.0 * h / 9.0, tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, tmp, k6);
    out = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + h, out, k7);
    V err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double scale = atol + rtol * std::max(std::abs(y(i)), std::abs(out(i)));
      const double r = std::abs(err(i)) / scale;
      acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(y.size(), 1)));
  }
};

template <typename V, typename M>
M integrate_generic(const std::function<void(double, const V&, V&)>& rhs, const V& y0,
                    const std::vector<double>& t_grid, double rate, const IntegratorConfig& cfg,
                    const std::function<void(double, const V&)>& guard) {
  check_grid(t_grid);
  M out(static_cast<Eigen::Index>(t_grid.size()), y0.size());
  out.row(0) = y0.transpose();
  Stepper<V> st{rhs, {}, {}, {}, {}, {}, {}, {}, {}};
  V y = y0;
  long long steps = 0;

  if (cfg.method == IntegratorMethod::Rk4Fixed) {
    double h_max = cfg.step;
    if (!(h_max > 0.0)) {
      if (!(cfg.step_fraction > 0.0)) raise(ErrorCode::OutOfRange, "step fraction must be positive");
      h_max = cfg.step_fraction / std::max(rate, 1.0);
    }
    for (std::size_t s = 1; s < t_grid.size(); ++s) {
      const double t0 = t_grid[s - 1];
      const double span = t_grid[s] - t0;
      const auto n = static_cast<long long>(std::ceil(span / h_max - 1e-12));
      const long long substeps = std::max<long long>(n, 1);
      const double h = span / static_cast<double>(substeps);
      for (long long k = 0; k < substeps; ++k) {
        if (++steps > cfg.max_steps) raise(ErrorCode::StepLimitExceeded, "fixed-step budget exhausted");
        st.rk4(t0 + static_cast<double>(k) * h, y, h);
        if (guard) guard(t0 + static_cast<double>(k + 1) * h, y);
      }
      out.row(static_cast<Eigen::Index>(s)) = y.transpose();
    }
    return out;
  }

  if (!(cfg.rtol > 0.0) || !(cfg.atol > 0.0)) raise(ErrorCode::OutOfRange, "tolerances must be positive");
  double t = t_grid.front();
  double h = 0.01 / std::max(rate, 1.0);
  V next;
  rhs(t, y, st.k1);
  for (std::size_t s = 1; s < t_grid.size(); ++s) {
    const double target = t_grid[s];
    while (t < target) {
      if (++steps > cfg.max_steps) raise(ErrorCode::StepLimitExceeded, "adaptive step budget exhausted");
      bool last = false;
      double step = h;
      if (t + step >= target) {
        step = target - t;
        last = true;
      }
      const double err = st.dopri(t, y, step, next, cfg.rtol, cfg.atol);
      if (!std::isfinite(err)) raise(ErrorCode::Blowup, "non-finite state in adaptive integration");
      if (err <= 1.0) {
        t = last ? target : t + step;
        y = next;
        st.k1 = st.k7;
        if (guard) guard(t, y);
      }
      const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (!last || err > 1.0) h = step * factor;
      if (h < 1e-14 * std::max(1.0, std::abs(t))) raise(ErrorCode::StepLimitExceeded, "step size underflow");
    }
    out.row(static_cast<Eigen::Index>(s)) = y.transpose();
  }
  return out;
}

Trajectory pv_trajectory(std::size_t n, const std::vector<double>& t_grid, Mat states) {
  Trajectory tr;
  tr.kind = TrajectoryKind::PositionVelocity;
  tr.dim = n;
  tr.times = t_grid;
  tr.real_states = std::move(states);
  return tr;
}

Vec stack(const Vec& a, const Vec& b) {
  Vec y(a.size() + b.size());
  y << a, b;
  return y;
}

std::function<void(double, const Vec&)> position_guard(std::size_t n, double reference) {
  const double limit = 1e6 * std::max(reference, 1e-12);
  return [n, limit](double t, const Vec& y) {
    const double norm = y.head(static_cast<Eigen::Index>(n)).norm();
    if (!std::isfinite(norm) || norm > limit) {
      raise(ErrorCode::Blowup, "trajectory escaped at t = " + std::to_string(t));
    }
  };
}

}  // namespace

Mat integrate_real(const RealRhs& rhs, const Vec& y0, const std::vector<double>& t_grid, double rate,
                   const IntegratorConfig& cfg, const std::function<void(double, const Vec&)>& guard) {
  return integrate_generic<Vec, Mat>(rhs, y0, t_grid, rate, cfg, guard);
}

CMat integrate_complex(const ComplexRhs& rhs, const CVec& y0, const std::vector<double>& t_grid, double rate,
                       const IntegratorConfig& cfg, const std::function<void(double, const CVec&)>& guard) {
  return integrate_generic<CVec, CMat>(rhs, y0, t_grid, rate, cfg, guard);
}

Trajectory integrate_linear(const OscillatorSystem& system, const std::vector<double>& t_grid,
                            const IntegratorConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(system.dim());
  const Mat minv_k = system.masses().cwiseInverse().asDiagonal() * system.incidence();
  const double rate = std::max(1.0, spectral_norm(system.mass_scaled_stiffness()));
  RealRhs rhs = [&minv_k, n](double, const Vec& y, Vec& dy) {
    dy.resize(2 * n);
    dy.head(n) = y.tail(n);
    dy.tail(n).noalias() = -minv_k * y.head(n);
  };
  Mat states = integrate_real(rhs, stack(system.x0(), system.v0()), t_grid, rate, cfg);
  return pv_trajectory(system.dim(), t_grid, std::move(states));
}

Trajectory integrate_forced(const OscillatorSystem& system, const ForcingSpec& forcing,
                            const std::vector<double>& t_grid, const IntegratorConfig& cfg) {
  if (forcing.dim() != system.dim()) raise(ErrorCode::DimensionMismatch, "forcing length differs from system");
  const auto n = static_cast<Eigen::Index>(system.dim());
  const Mat minv_k = system.masses().cwiseInverse().asDiagonal() * system.incidence();
  const Vec minv = system.masses().cwiseInverse();
  const double rate =
      std::max({1.0, spectral_norm(system.mass_scaled_stiffness()), forcing.max_frequency()});
  RealRhs rhs = [&](double t, const Vec& y, Vec& dy) {
    dy.resize(2 * n);
    dy.head(n) = y.tail(n);
    dy.tail(n).noalias() = -minv_k * y.head(n);
    dy.tail(n) += minv.cwiseProduct(forcing.evaluate(t));
  };
  Mat states = integrate_real(rhs, stack(system.x0(), system.v0()), t_grid, rate, cfg);
  return pv_trajectory(system.dim(), t_grid, std::move(states));
}

Trajectory integrate_nonlinear(const NonlinearOscillatorSystem& system, const std::vector<double>& t_grid,
                               const IntegratorConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(system.dim());
  const Vec minv = system.masses().cwiseInverse();
  const Mat minv_k1 = minv.asDiagonal() * system.k1();
  const Mat minv_k2 = minv.asDiagonal() * system.k2();
  const Vec y0 = stack(system.x0(), system.v0());
  const Vec s = minv.cwiseSqrt();
  const double a1 = spectral_norm(Mat(s.asDiagonal() * system.k1() * s.asDiagonal()));
  const double rate = std::max({1.0, a1, 2.0 * spectral_norm(minv_k2) * y0.norm()});
  RealRhs rhs = [&minv_k1, &minv_k2, n](double, const Vec& y, Vec& dy) {
    dy.resize(2 * n);
    const Vec x = y.head(n);
    dy.head(n) = y.tail(n);
    dy.tail(n).noalias() = -minv_k1 * x;
    if (minv_k2.size() > 0) dy.tail(n).noalias() += minv_k2 * kron(x, x);
  };
  Mat states = integrate_real(rhs, y0, t_grid, rate, cfg, position_guard(system.dim(), system.x0().norm()));
  return pv_trajectory(system.dim(), t_grid, std::move(states));
}

Trajectory integrate_time_dependent(const Vec& masses, const TimeDependentStiffnessSpec& td,
                                    const ForcingSpec* forcing, const Vec& x0, const Vec& v0,
                                    const std::vector<double>& t_grid, const IntegratorConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(td.dim());
  if (masses.size() != n || x0.size() != n || v0.size() != n) {
    raise(ErrorCode::DimensionMismatch, "time-dependent system blocks disagree in size");
  }
  if (forcing && forcing->dim() != td.dim()) raise(ErrorCode::DimensionMismatch, "forcing length differs");
  if (masses.minCoeff() <= 0.0) raise(ErrorCode::InvalidSystem, "masses must be strictly positive");
  const Vec minv = masses.cwiseInverse();
  double rate = std::max({1.0, td.max_stiffness_bound() * minv.maxCoeff(), td.max_frequency()});
  if (forcing) rate = std::max(rate, forcing->max_frequency());
  RealRhs rhs = [&](double t, const Vec& y, Vec& dy) {
    dy.resize(2 * n);
    dy.head(n) = y.tail(n);
    Vec force = -(td.incidence_at(t) * y.head(n));
    if (forcing) force += forcing->evaluate(t);
    dy.tail(n) = minv.cwiseProduct(force);
  };
  Mat states = integrate_real(rhs, stack(x0, v0), t_grid, rate, cfg);
  return pv_trajectory(td.dim(), t_grid, std::move(states));
}

Trajectory integrate_nls(const NLSSystem& nls, const std::vector<double>& t_grid, const IntegratorConfig& cfg) {
  if (!is_hermitian(nls.h1)) raise(ErrorCode::NotHermitian, "H1 must be Hermitian");
  const double rate = std::max(1.0, spectral_norm(nls.h1) + 2.0 * spectral_norm(nls.h2) * nls.psi0.norm());
  const double limit = 1e6 * std::max(nls.psi0.norm(), 1e-12);
  ComplexRhs rhs = [&nls](double, const CVec& psi, CVec& dpsi) { dpsi = nls.rhs(psi); };
  auto guard = [limit](double t, const CVec& psi) {
    const double norm = psi.norm();
    if (!std::isfinite(norm) || norm > limit) {
      raise(ErrorCode::Blowup, "wavefunction escaped at t = " + std::to_string(t));
    }
  };
  Trajectory tr;
  tr.kind = TrajectoryKind::ComplexState;
  tr.dim = nls.dim();
  tr.times = t_grid;
  tr.complex_states = integrate_complex(rhs, nls.psi0, t_grid, rate, cfg, guard);
  return tr;
}

double log_norm_inf(const Mat& a) { return log_norm_inf(CMat(a.cast<cplx>())); }

double log_norm_inf(const CMat& a) {
  if (a.rows() != a.cols()) raise(ErrorCode::DimensionMismatch, "logarithmic norm needs a square matrix");
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double row = a(i, i).real();
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j != i) row += std::abs(a(i, j));
    }
    best = std::max(best, row);
  }
  return best;
}

double log_norm_2(const Mat& a) { return log_norm_2(CMat(a.cast<cplx>())); }

double log_norm_2(const CMat& a) {
  if (a.rows() != a.cols()) raise(ErrorCode::DimensionMismatch, "logarithmic norm needs a square matrix");
  const CMat sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double decoder_norm(const OscillatorSystem& system) {
  const Mat a = system.mass_scaled_stiffness();
  const Mat inv_sqrt_a = sym_inv_sqrt(a, kPsdTol * std::max(spectral_norm(a), 1e-300));
  const Vec s = system.inv_sqrt_mass();
  const double upper = spectral_norm(Mat(s.asDiagonal() * inv_sqrt_a));
  return std::max(upper, s.maxCoeff());
}

double displacement_bound(const OscillatorSystem& system) {
  const double sqrt_a = std::sqrt(std::max(spectral_norm(system.mass_scaled_stiffness()), 0.0));
  const double sqrt_m = system.sqrt_mass().maxCoeff();
  return decoder_norm(system) * sqrt_m * (sqrt_a * system.x0().norm() + system.v0().norm());
}

double forced_displacement_bound(const OscillatorSystem& system, double t, double max_forcing_norm) {
  const double sqrt_a = std::sqrt(std::max(spectral_norm(system.mass_scaled_stiffness()), 0.0));
  const double sqrt_m = system.sqrt_mass().maxCoeff();
  return decoder_norm(system) *
         (sqrt_a * sqrt_m * system.x0().norm() + sqrt_m * system.v0().norm() + t * max_forcing_norm);
}

namespace {

constexpr int kDenseSubsamples = 16;
constexpr double kBoundRoundoff = 1e-12;

void record(NormBoundReport& rep, double t, double norm, double bound, std::size_t index) {
  const double slack = bound - norm;
  if (index == 0 || slack < rep.min_slack) {
    rep.min_slack = slack;
    rep.worst_t = t;
  }
  rep.max_norm = std::max(rep.max_norm, norm);
  if (norm > bound * (1.0 + kBoundRoundoff) + 1e-300) {
    raise(ErrorCode::BoundViolated, rep.name + " violated at t = " + std::to_string(t) + " (norm " +
                                        std::to_string(norm) + " > bound " + std::to_string(bound) + ")");
  }
}

}  // namespace

NormBoundReport check_norm_bounds(const Trajectory& traj, const OscillatorSystem& system,
                                  const ForcingSpec* forcing) {
  if (traj.kind != TrajectoryKind::PositionVelocity || traj.dim != system.dim()) {
    raise(ErrorCode::DimensionMismatch, "trajectory does not belong to this system");
  }
  NormBoundReport rep;
  rep.samples = traj.size();
  const bool forced = forcing != nullptr && !forcing->is_zero();
  rep.name = forced ? "forced_displacement" : "displacement";
  const Vec s = system.inv_sqrt_mass();
  const double static_bound = forced ? 0.0 : displacement_bound(system);
  double max_f = 0.0;
  for (std::size_t r = 0; r < traj.size(); ++r) {
    const double t = traj.times[r];
    double bound = static_bound;
    if (forced) {
      // Running sup of ‖√M⁻¹ f‖ on a dense sub-grid of the elapsed interval.
      const double t_prev = r == 0 ? t : traj.times[r - 1];
      for (int k = 0; k <= kDenseSubsamples; ++k) {
        const double tau = t_prev + (t - t_prev) * k / kDenseSubsamples;
        max_f = std::max(max_f, s.cwiseProduct(forcing->evaluate(tau)).norm());
      }
      bound = forced_displacement_bound(system, t, max_f);
    }
    record(rep, t, traj.x(r).norm(), bound, r);
  }
  return rep;
}

NormBoundReport check_lognorm_bound(const Trajectory& traj, const Vec& masses,
                                    const TimeDependentStiffnessSpec& td) {
  if (traj.kind != TrajectoryKind::PositionVelocity || traj.dim != td.dim()) {
    raise(ErrorCode::DimensionMismatch, "trajectory does not belong to this system");
  }
  const auto n = static_cast<Eigen::Index>(td.dim());
  const Vec minv = masses.cwiseInverse();
  auto mu_at = [&](double t) {
    Mat a = Mat::Zero(2 * n, 2 * n);
    a.topRightCorner(n, n) = Mat::Identity(n, n);
    a.bottomLeftCorner(n, n) = -(minv.asDiagonal() * td.incidence_at(t));
    return log_norm_2(a);
  };
  NormBoundReport rep;
  rep.name = "log_norm";
  rep.samples = traj.size();
  const double y0 = traj.real_states.row(0).norm();
  double integral = 0.0;
  for (std::size_t r = 0; r < traj.size(); ++r) {
    const double t = traj.times[r];
    if (r > 0) {
      const double t_prev = traj.times[r - 1];
      double mu_max = -std::numeric_limits<double>::infinity();
      for (int k = 0; k <= kDenseSubsamples; ++k) {
        mu_max = std::max(mu_max, mu_at(t_prev + (t - t_prev) * k / kDenseSubsamples));
      }
      integral += mu_max * (t - t_prev);
    }
    record(rep, t, traj.x(r).norm(), y0 * std::exp(integral), r);
  }
  return rep;
}

}  // namespace oscq
