#include <cmath>

#include "doctest.h"
#include "oscq/errors.hpp"
#include "oscq/reference_integrator.hpp"
#include "support.hpp"

using namespace oscq;

namespace {

OscillatorSystem unit_oscillator(double x0, double v0) {
  return OscillatorSystem(Vec::Ones(1), Mat::Ones(1, 1), Vec::Constant(1, x0), Vec::Constant(1, v0));
}

// x(t) = √M⁻¹ [cos(√A t) u0 + sin(√A t) √A⁻¹ u̇0] with u = √M x
Vec spectral_solution(const OscillatorSystem& s, double t) {
  Eigen::SelfAdjointEigenSolver<Mat> es(s.mass_scaled_stiffness());
  const Vec w = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Mat& v = es.eigenvectors();
  const Vec u0 = v.transpose() * s.sqrt_mass().asDiagonal() * s.x0();
  const Vec du0 = v.transpose() * s.sqrt_mass().asDiagonal() * s.v0();
  Vec modal(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    modal(i) = std::cos(w(i) * t) * u0(i) + (w(i) > 0 ? std::sin(w(i) * t) / w(i) : t) * du0(i);
  }
  return s.inv_sqrt_mass().asDiagonal() * (v * modal);
}

}  // namespace

TEST_CASE("linspace endpoints and spacing") {
  const auto g = linspace(0.0, 2.0, 5);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 2.0);
  CHECK(g[2] == doctest::Approx(1.0));
}

TEST_CASE("unit harmonic oscillator follows cos t") {
  const auto traj = integrate_linear(unit_oscillator(1.0, 0.0), {0.0, 1.0, M_PI, 10.0});
  for (std::size_t i = 0; i < traj.size(); ++i) {
    CHECK(std::abs(traj.x(i)(0) - std::cos(traj.times[i])) <= 1e-8);
    CHECK(std::abs(traj.v(i)(0) + std::sin(traj.times[i])) <= 1e-8);
  }
}

TEST_CASE("free motion is exact") {
  Vec x0(2), v0(2);
  x0 << 1.0, -2.0;
  v0 << 0.5, 0.25;
  const OscillatorSystem s(Vec::Ones(2), Mat::Zero(2, 2), x0, v0);
  const auto traj = integrate_linear(s, linspace(0.0, 4.0, 9));
  for (std::size_t i = 0; i < traj.size(); ++i) {
    CHECK((traj.x(i) - (x0 + v0 * traj.times[i])).norm() <= 1e-12);
  }
}

TEST_CASE("four-mass chain matches the spectral closed form") {
  auto rng = testing::make_rng(20);
  const OscillatorSystem s = testing::random_system(rng, 4);
  const auto grid = linspace(0.0, 10.0, 21);
  const auto traj = integrate_linear(s, grid);
  for (std::size_t i = 0; i < traj.size(); ++i) CHECK((traj.x(i) - spectral_solution(s, grid[i])).norm() <= 1e-7);
}

TEST_CASE("zero forcing reproduces the unforced integrator") {
  auto rng = testing::make_rng(21);
  const OscillatorSystem s = testing::random_system(rng, 3);
  const ForcingSpec zero({{{0.0, 1.0, 0.0}}, {{0.0, 1.0, 0.0}}, {{0.0, 1.0, 0.0}}});
  const auto grid = linspace(0.0, 5.0, 11);
  const auto a = integrate_linear(s, grid);
  const auto b = integrate_forced(s, zero, grid);
  CHECK((a.real_states - b.real_states).norm() <= 1e-12);
}

TEST_CASE("steady forced response by undetermined coefficients") {
  const double c = -0.1 / 3.0;
  const auto traj = integrate_forced(unit_oscillator(c, 0.0), ForcingSpec({{{0.1, 2.0, 0.0}}}), linspace(0.0, 10.0, 11));
  for (std::size_t i = 0; i < traj.size(); ++i) CHECK(std::abs(traj.x(i)(0) - c * std::cos(2 * traj.times[i])) <= 1e-7);
}

TEST_CASE("resonant forcing grows as t sin t / 2") {
  const auto traj = integrate_forced(unit_oscillator(0.0, 0.0), ForcingSpec({{{1.0, 1.0, 0.0}}}), {0.0, 5.0});
  CHECK(std::abs(traj.x(1)(0) - 5.0 * std::sin(5.0) / 2.0) <= 1e-6);
}

TEST_CASE("nonlinear integrator with K2 = 0 matches the linear one") {
  auto rng = testing::make_rng(22);
  const OscillatorSystem s = testing::random_system(rng, 2);
  const NonlinearOscillatorSystem ns(s.masses(), s.incidence(), Mat::Zero(2, 4), s.x0(), s.v0());
  const auto grid = linspace(0.0, 3.0, 7);
  CHECK((integrate_linear(s, grid).real_states - integrate_nonlinear(ns, grid).real_states).norm() <= 1e-12);
}

TEST_CASE("constant time-dependent spec matches the linear integrator") {
  auto rng = testing::make_rng(23);
  Mat g = Mat::Zero(2, 2);
  g(0, 0) = testing::uniform(rng, 0.5, 2.0);
  g(1, 1) = testing::uniform(rng, 0.5, 2.0);
  const OscillatorSystem s(Vec::Ones(2), g, testing::normal_vec(rng, 2), testing::normal_vec(rng, 2));
  const TimeDependentStiffnessSpec td(2, {{0, 0, g(0, 0), {{0.0, 1.0, 0.0}}}, {1, 1, g(1, 1), {{0.0, 1.0, 0.0}}}});
  const auto grid = linspace(0.0, 4.0, 9);
  IntegratorConfig fine;
  fine.step = 1e-3;
  const auto a = integrate_linear(s, grid, fine);
  const auto b = integrate_time_dependent(s.masses(), td, nullptr, s.x0(), s.v0(), grid, fine);
  CHECK((a.real_states - b.real_states).norm() <= 1e-10);
}

TEST_CASE("Mathieu-type run converges at fourth order under step halving") {
  const TimeDependentStiffnessSpec td(1, {{0, 0, 2.0, {{1.0, 1.0, 0.0}}}});
  const Vec m = Vec::Ones(1), x0 = Vec::Ones(1), v0 = Vec::Zero(1);
  const std::vector<double> grid{0.0, 5.0};
  auto run = [&](double h) {
    IntegratorConfig cfg;
    cfg.step = h;
    return integrate_time_dependent(m, td, nullptr, x0, v0, grid, cfg).x(1)(0);
  };
  const double a = run(0.01), b = run(0.005), c = run(0.0025);
  const double ratio = (a - b) / (b - c);
  CHECK(ratio == doctest::Approx(16.0).epsilon(0.1));
}

TEST_CASE("vanishing forcing on a time-dependent spec matches the unforced run") {
  const TimeDependentStiffnessSpec td(1, {{0, 0, 2.0, {{1.0, 1.0, 0.0}}}});
  const ForcingSpec f({{{0.0, 2.0, 0.0}}});
  const Vec m = Vec::Ones(1), x0 = Vec::Ones(1), v0 = Vec::Zero(1);
  const auto grid = linspace(0.0, 5.0, 11);
  const auto a = integrate_time_dependent(m, td, nullptr, x0, v0, grid);
  const auto b = integrate_time_dependent(m, td, &f, x0, v0, grid);
  CHECK((a.real_states - b.real_states).norm() <= 1e-10);
}

TEST_CASE("diagonal NLS without coupling is a phase rotation") {
  CMat h1 = CMat::Zero(2, 2);
  h1(0, 0) = 1.0;
  h1(1, 1) = 2.0;
  CVec psi0(2);
  psi0 << 1.0, 0.0;
  const NLSSystem nls(h1, CMat::Zero(2, 4), psi0);
  const auto traj = integrate_nls(nls, {0.0, 1.5});
  CHECK(std::abs(traj.psi(1)(0) - std::exp(cplx(0, -1.5))) <= 1e-10);
  CHECK(std::abs(traj.psi(1)(1)) <= 1e-14);
}

TEST_CASE("logarithmic norms") {
  CHECK(log_norm_2(Mat(-Mat::Identity(3, 3))) == doctest::Approx(-1.0));
  CHECK(log_norm_inf(Mat(-Mat::Identity(3, 3))) == doctest::Approx(-1.0));
  Mat rot(2, 2);
  rot << 0, 1, -1, 0;
  CHECK(log_norm_inf(rot) == doctest::Approx(1.0));
  CHECK(log_norm_2(rot) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("displacement bounds hold with zero violations on random systems") {
  auto rng = testing::make_rng(24);
  const auto grid = linspace(0.0, 5.0, 26);
  for (int trial = 0; trial < 25; ++trial) {
    const OscillatorSystem s = testing::random_system(rng, 3);
    const auto traj = integrate_linear(s, grid);
    const auto rep = check_norm_bounds(traj, s);
    CHECK(rep.name == "displacement");
    CHECK(rep.min_slack >= 0.0);
  }
  const OscillatorSystem still(Vec::Ones(2), testing::random_graph(rng, 2), Vec::Zero(2), Vec::Zero(2));
  CHECK(displacement_bound(still) == 0.0);
}

TEST_CASE("forced displacement bound holds on random forced systems") {
  auto rng = testing::make_rng(25);
  const auto grid = linspace(0.0, 4.0, 21);
  for (int trial = 0; trial < 20; ++trial) {
    const OscillatorSystem s = testing::random_system(rng, 4);
    std::vector<std::vector<FourierTerm>> terms(4);
    for (auto& t : terms) t.push_back({testing::uniform(rng, 0, 1), testing::uniform(rng, 0.2, 3), testing::uniform(rng, 0, 6)});
    const ForcingSpec f(terms);
    const auto rep = check_norm_bounds(integrate_forced(s, f, grid), s, &f);
    CHECK(rep.name == "forced_displacement");
    CHECK(rep.min_slack >= 0.0);
  }
}

TEST_CASE("log-norm bound holds for time-dependent stiffness") {
  auto rng = testing::make_rng(26);
  const auto grid = linspace(0.0, 3.0, 31);
  for (int trial = 0; trial < 10; ++trial) {
    const double a0 = testing::uniform(rng, 1.5, 3.0);
    const TimeDependentStiffnessSpec td(1, {{0, 0, a0, {{testing::uniform(rng, 0, 1), testing::uniform(rng, 0.5, 3), 0.0}}}});
    const Vec m = Vec::Constant(1, testing::uniform(rng, 0.5, 2.0));
    const Vec x0 = testing::normal_vec(rng, 1), v0 = testing::normal_vec(rng, 1);
    const auto traj = integrate_time_dependent(m, td, nullptr, x0, v0, grid);
    const auto rep = check_lognorm_bound(traj, m, td);
    CHECK(rep.name == "log_norm");
    CHECK(rep.min_slack >= 0.0);
  }
}

TEST_CASE("runaway integration raises Blowup or a step-limit error") {
  const NonlinearOscillatorSystem s(Vec::Ones(1), Mat::Identity(1, 1), Mat::Constant(1, 1, 5.0), Vec::Constant(1, 3.0),
                                    Vec::Zero(1), 1e6);
  bool threw = false;
  try {
    integrate_nonlinear(s, {0.0, 20.0});
  } catch (const Error& e) {
    threw = e.code() == ErrorCode::Blowup || e.code() == ErrorCode::StepLimitExceeded;
  }
  CHECK(threw);

  IntegratorConfig tight;
  tight.max_steps = 3;
  CHECK_THROWS_AS(integrate_linear(unit_oscillator(1.0, 0.0), {0.0, 10.0}, tight), Error);
}
