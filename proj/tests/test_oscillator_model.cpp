#include <cmath>

#include "doctest.h"
#include "oscq/errors.hpp"
#include "oscq/oscillator_model.hpp"
#include "support.hpp"

using namespace oscq;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an oscq::Error");
  return ErrorCode::InvalidSystem;
}

}  // namespace

TEST_CASE("incidence matrix of a two-mass graph") {
  Mat g(2, 2);
  g << 1, 1, 1, 0;
  Mat expected(2, 2);
  expected << 2, -1, -1, 1;
  CHECK((build_incidence(g) - expected).norm() == 0.0);
  CHECK(build_incidence(Mat::Zero(3, 3)).norm() == 0.0);
}

TEST_CASE("incidence matrix rejects asymmetric or negative graphs") {
  Mat g(2, 2);
  g << 1, 1, 0.5, 0;
  CHECK(code_of([&] { build_incidence(g); }) == ErrorCode::NonSymmetric);
  g << 1, -1, -1, 0;
  CHECK(code_of([&] { build_incidence(g); }) == ErrorCode::NegativeEntry);
}

TEST_CASE("incidence matrices of random graphs are PSD with wall springs on the row sums") {
  auto rng = testing::make_rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat g = testing::random_graph(rng, 4);
    const Mat k = build_incidence(g);
    CHECK((k - k.transpose()).norm() == 0.0);
    CHECK(min_eigenvalue(k) >= -1e-12);
    const Vec rows = k.rowwise().sum();
    CHECK((rows - g.diagonal()).norm() < 1e-12);
  }
}

TEST_CASE("system validation") {
  Vec m(1);
  m << -1.0;
  CHECK(code_of([&] { OscillatorSystem(m, Mat::Ones(1, 1), Vec::Zero(1), Vec::Zero(1)); }) ==
        ErrorCode::InvalidSystem);
  CHECK(code_of([&] { OscillatorSystem(Vec::Ones(2), Mat::Ones(1, 1), Vec::Zero(2), Vec::Zero(2)); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("B factor worked examples") {
  SUBCASE("scalar") {
    Vec m(1);
    m << 2.0;
    Mat g(1, 1);
    g << 4.0;
    const OscillatorSystem s(m, g, Vec::Ones(1), Vec::Zero(1));
    const Mat b = build_b_factor(s);
    CHECK(b(0, 0) == doctest::Approx(std::sqrt(2.0)));
    CHECK((b * b.transpose())(0, 0) == doctest::Approx(2.0));
  }
  SUBCASE("two unit masses with one wall") {
    Mat g(2, 2);
    g << 1, 1, 1, 0;
    const OscillatorSystem s(Vec::Ones(2), g, Vec::Ones(2), Vec::Zero(2));
    Mat expected(2, 3);
    expected << 1, 1, 0, 0, -1, 0;
    const Mat b = build_b_factor(s);
    CHECK((b - expected).norm() < 1e-15);
    CHECK((b * b.transpose() - s.incidence()).norm() < 1e-14);
  }
  SUBCASE("unequal masses use each endpoint's own mass") {
    Vec m(2);
    m << 1.0, 4.0;
    Mat g(2, 2);
    g << 0, 1, 1, 0;
    const OscillatorSystem s(m, g, Vec::Ones(2), Vec::Zero(2));
    const Mat b = build_b_factor(s);
    CHECK(b(0, 1) == doctest::Approx(1.0));
    CHECK(b(1, 1) == doctest::Approx(-0.5));
    Mat a(2, 2);
    a << 1, -0.5, -0.5, 0.25;
    CHECK((b * b.transpose() - a).norm() < 1e-14);
  }
}

TEST_CASE("B factor reconstructs the mass-scaled stiffness for random systems") {
  auto rng = testing::make_rng(11);
  for (Eigen::Index n = 1; n <= 8; ++n) {
    for (int trial = 0; trial < 5; ++trial) {
      const OscillatorSystem s = testing::random_system(rng, n);
      const Mat a = s.mass_scaled_stiffness();
      const Mat b = build_b_factor(s);
      CHECK(b.cols() == static_cast<Eigen::Index>(pair_count(static_cast<std::size_t>(n))));
      CHECK((b * b.transpose() - a).norm() <= 1e-10 * a.norm());
    }
  }
}

TEST_CASE("pair columns enumerate pairs lexicographically") {
  CHECK(pair_column(0, 0, 3) == 0);
  CHECK(pair_column(0, 2, 3) == 2);
  CHECK(pair_column(1, 1, 3) == 3);
  CHECK(pair_column(2, 2, 3) == 5);
  CHECK(code_of([] { pair_column(2, 1, 3); }) == ErrorCode::OutOfRange);
}

TEST_CASE("amplitude and phase from initial conditions") {
  auto ap = amplitude_phase_from_ic(1.0, 0.0, 3.0);
  CHECK(ap.amplitude == doctest::Approx(1.0));
  CHECK(ap.phase == doctest::Approx(0.0));
  ap = amplitude_phase_from_ic(0.0, 1.0, 1.0);
  CHECK(ap.amplitude == doctest::Approx(1.0));
  CHECK(ap.phase == doctest::Approx(-M_PI / 2));
  ap = amplitude_phase_from_ic(0.3, -0.4, 2.0);
  CHECK(ap.amplitude == doctest::Approx(std::sqrt(0.13)));
  CHECK(code_of([] { amplitude_phase_from_ic(1.0, 0.0, 0.0); }) == ErrorCode::ZeroFrequency);

  auto rng = testing::make_rng(12);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x0 = testing::uniform(rng, -5, 5);
    const double v0 = testing::uniform(rng, -5, 5);
    const double w = testing::uniform(rng, 0.1, 10);
    const auto r = amplitude_phase_from_ic(x0, v0, w);
    worst = std::max({worst, std::abs(r.amplitude * std::cos(r.phase) - x0),
                      std::abs(-r.amplitude * w * std::sin(r.phase) - v0)});
  }
  CHECK(worst <= 1e-12 * 50);
}

TEST_CASE("forcing spec pads to a uniform term count and evaluates cosines") {
  ForcingSpec f({{{0.1, 2.0, 0.0}, {0.2, 1.0, 0.5}}, {}});
  CHECK(f.terms_per_mass() == 2);
  CHECK(f.terms()[1].size() == 2);
  CHECK(f.terms()[1][0].amplitude == 0.0);
  const Vec v = f.evaluate(0.7);
  CHECK(v(0) == doctest::Approx(0.1 * std::cos(1.4) + 0.2 * std::cos(1.2)));
  CHECK(v(1) == 0.0);
  CHECK(f.max_frequency() == doctest::Approx(2.0));
  CHECK_FALSE(f.is_zero());
  CHECK(code_of([] { ForcingSpec({{{1.0, 0.0, 0.0}}}); }) == ErrorCode::ZeroFrequency);
}

TEST_CASE("nonlinear system invariants") {
  const Mat k1 = Mat::Identity(1, 1);
  const Mat k2 = Mat::Constant(1, 1, 0.02);
  const NonlinearOscillatorSystem s(Vec::Ones(1), k1, k2, Vec::Constant(1, 0.4), Vec::Zero(1));
  CHECK(s.energy_bound() == doctest::Approx(0.08));
  CHECK(code_of([&] { NonlinearOscillatorSystem(Vec::Ones(1), k1, k2, Vec::Ones(1), Vec::Zero(1), 0.1); }) ==
        ErrorCode::InvalidSystem);
  CHECK(code_of([&] { NonlinearOscillatorSystem(Vec::Ones(1), -k1, k2, Vec::Ones(1), Vec::Zero(1)); }) ==
        ErrorCode::InvalidSystem);
}

TEST_CASE("time-dependent stiffness spec") {
  const TimeDependentStiffnessSpec td(2, {{0, 0, 2.0, {{1.0, 1.0, 0.0}}}, {0, 1, 0.0, {{0.3, 2.0, 0.1}}}, {1, 1, 2.0, {}}});
  CHECK(td.terms_per_pair() == 1);
  const Mat g = td.graph_at(0.5);
  CHECK(g(0, 0) == doctest::Approx(2.0 + std::cos(0.5)));
  CHECK(g(0, 1) == doctest::Approx(0.3 * std::cos(1.1)));
  CHECK(g(1, 1) == doctest::Approx(2.0));
  const Mat k = td.incidence_at(0.5);
  CHECK(k(0, 0) == doctest::Approx(g(0, 0) + g(0, 1)));
  CHECK(k(0, 1) == doctest::Approx(-g(0, 1)));
  CHECK_NOTHROW(td.check_psd(10.0));
  CHECK(code_of([] { TimeDependentStiffnessSpec(2, {{0, 1, 1.0, {}}}); }) == ErrorCode::InvalidSystem);
  CHECK(code_of([] { TimeDependentStiffnessSpec(1, {{0, 0, 1.0, {{1.0, 0.0, 0.0}}}}); }) == ErrorCode::ZeroFrequency);
  const TimeDependentStiffnessSpec bad(1, {{0, 0, 0.5, {{1.0, 1.0, 0.0}}}});
  CHECK(code_of([&] { bad.check_psd(10.0); }) == ErrorCode::InvalidSystem);
}
