#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "oscq/linalg.hpp"
#include "oscq/nls_system.hpp"
#include "oscq/oscillator_model.hpp"

namespace oscq {

enum class TrajectoryKind { PositionVelocity, ComplexState };

// Sampled solution. PositionVelocity rows hold [x, ẋ] (2·dim columns);
// ComplexState rows hold ψ (dim columns).
struct Trajectory {
  TrajectoryKind kind = TrajectoryKind::PositionVelocity;
  std::size_t dim = 0;
  std::vector<double> times;
  Mat real_states;
  CMat complex_states;

  std::size_t size() const { return times.size(); }
  Vec x(std::size_t row) const;
  Vec v(std::size_t row) const;
  CVec psi(std::size_t row) const;
};

enum class IntegratorMethod { Rk4Fixed, Rk45Adaptive };

struct IntegratorConfig {
  IntegratorMethod method = IntegratorMethod::Rk4Fixed;
  // Explicit RK4 step; zero selects step_fraction / (generator norm estimate).
  double step = 0.0;
  double step_fraction = 0.01;
  double rtol = 1e-10;
  double atol = 1e-13;
  long long max_steps = 50'000'000;
};

std::vector<double> linspace(double t0, double t1, std::size_t samples);

using RealRhs = std::function<void(double, const Vec&, Vec&)>;
using ComplexRhs = std::function<void(double, const CVec&, CVec&)>;

// Generic drivers. `rate` is an estimate of the generator norm used to size
// the fixed step; `guard` may throw to abort (e.g. blowup detection).
Mat integrate_real(const RealRhs& rhs, const Vec& y0, const std::vector<double>& t_grid, double rate,
                   const IntegratorConfig& cfg, const std::function<void(double, const Vec&)>& guard = {});
CMat integrate_complex(const ComplexRhs& rhs, const CVec& y0, const std::vector<double>& t_grid, double rate,
                       const IntegratorConfig& cfg,
                       const std::function<void(double, const CVec&)>& guard = {});

Trajectory integrate_linear(const OscillatorSystem& system, const std::vector<double>& t_grid,
                            const IntegratorConfig& cfg = {});
Trajectory integrate_forced(const OscillatorSystem& system, const ForcingSpec& forcing,
                            const std::vector<double>& t_grid, const IntegratorConfig& cfg = {});
Trajectory integrate_nonlinear(const NonlinearOscillatorSystem& system, const std::vector<double>& t_grid,
                               const IntegratorConfig& cfg = {});
Trajectory integrate_time_dependent(const Vec& masses, const TimeDependentStiffnessSpec& td,
                                    const ForcingSpec* forcing, const Vec& x0, const Vec& v0,
                                    const std::vector<double>& t_grid, const IntegratorConfig& cfg = {});


Trajectory integrate_nls(const NLSSystem& nls, const std::vector<double>& t_grid, const IntegratorConfig& cfg = {});

double log_norm_inf(const Mat& a);
double log_norm_inf(const CMat& a);
double log_norm_2(const Mat& a);
double log_norm_2(const CMat& a);

// ‖T‖ with T = −i|0⟩⟨0| ⊗ √M⁻¹√A⁻¹ + |1⟩⟨1| ⊗ √M⁻¹.
double decoder_norm(const OscillatorSystem& system);
// ‖T‖‖√M‖(‖√A‖‖x0‖ + ‖v0‖)
double displacement_bound(const OscillatorSystem& system);
// ‖T‖(‖√A‖‖√M‖‖x0‖ + ‖√M‖‖v0‖ + t·max‖F̂‖)
double forced_displacement_bound(const OscillatorSystem& system, double t, double max_forcing_norm);

struct NormBoundReport {
  std::string name;
  std::size_t samples = 0;
  double max_norm = 0.0;
  double min_slack = 0.0;  // min over samples of bound − ‖x(t)‖
  double worst_t = 0.0;
};

// Asserts the displacement bound (or its forced variant) at every sample; throws
// BoundViolated naming the first offending time.
NormBoundReport check_norm_bounds(const Trajectory& traj, const OscillatorSystem& system,
                                  const ForcingSpec* forcing = nullptr);

// ‖x(t)‖ ≤ ‖(x0, ẋ0)‖ exp(∫ μ₂(A(s)) ds) with A(t) = [[0, I], [−M⁻¹K(t), 0]].
NormBoundReport check_lognorm_bound(const Trajectory& traj, const Vec& masses,
                                    const TimeDependentStiffnessSpec& td);

}  // namespace oscq
