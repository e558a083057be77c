#include <cmath>

#include "doctest.h"
#include "oscq/errors.hpp"
#include "oscq/forced_embedding.hpp"
#include "support.hpp"

using namespace oscq;

namespace {

OscillatorSystem unit_oscillator() {
  return OscillatorSystem(Vec::Ones(1), Mat::Ones(1, 1), Vec::Ones(1), Vec::Zero(1));
}

ForcingSpec worked_forcing() { return ForcingSpec({{{0.1, 2.0, 0.0}}}); }

}  // namespace

TEST_CASE("scalar worked embedding layout") {
  const double mf = 50.0;
  const ForcedEmbedding emb = build_embedding(unit_oscillator(), worked_forcing(), mf);
  CHECK(emb.enlarged.dim() == 2);
  Mat g(2, 2);
  g << 0.5, 0.5, 0.5, 4 * mf;
  CHECK((emb.enlarged.stiffness_graph() - g).norm() <= 1e-12);
  CHECK(emb.enlarged.masses()(1) == doctest::Approx(mf));
  CHECK(emb.enlarged.x0()(1) == doctest::Approx(0.2));
  CHECK(emb.enlarged.v0()(1) == doctest::Approx(0.0));
  CHECK(emb.gamma == doctest::Approx(1.0 / mf));
  CHECK(auxiliary_index(0, 0, 1, 1) == 1);
}

TEST_CASE("unforced embedding keeps auxiliaries at rest and its error vanishes with m_f") {
  const ForcingSpec zero({{{0.0, 2.0, 0.0}}});
  const ForcedEmbedding emb = build_embedding(unit_oscillator(), zero, 10.0);
  CHECK(emb.enlarged.x0()(1) == 0.0);
  CHECK(emb.enlarged.v0()(1) == 0.0);
  const auto grid = linspace(0.0, 5.0, 51);
  const double e3 = verify_embedding(build_embedding(unit_oscillator(), zero, 1e3), grid, 1e-2).max_error;
  const double e5 = verify_embedding(build_embedding(unit_oscillator(), zero, 1e5), grid, 1e-2).max_error;
  CHECK(e5 <= 1e-4);
  CHECK(e3 / e5 == doctest::Approx(100.0).epsilon(0.2));
}

TEST_CASE("random embeddings have symmetric graphs and PSD stiffness") {
  auto rng = testing::make_rng(40);
  for (int trial = 0; trial < 10; ++trial) {
    const OscillatorSystem s = testing::random_system(rng, 3);
    std::vector<std::vector<FourierTerm>> terms(3);
    for (auto& t : terms) {
      for (int l = 0; l < 2; ++l) t.push_back({testing::uniform(rng, 0, 1), testing::uniform(rng, 0.5, 3), 0.3});
    }
    const ForcedEmbedding emb = build_embedding(s, ForcingSpec(terms), testing::uniform(rng, 5, 50));
    CHECK(emb.enlarged.dim() == 9);
    const Mat& g = emb.enlarged.stiffness_graph();
    CHECK((g - g.transpose()).norm() == 0.0);
    CHECK(min_eigenvalue(emb.enlarged.incidence()) >= -1e-10 * emb.norm_kp);
    Vec row_scale = Vec::Constant(9, emb.m_f);
    row_scale.head(3).setOnes();
    const Mat rebuilt = row_scale.asDiagonal() * (emb.k0_prime + emb.gamma * emb.k_hat);
    CHECK((rebuilt - emb.enlarged.incidence()).norm() <= 1e-12 * emb.norm_kp);
  }
}

TEST_CASE("missing wall spring is rejected") {
  Mat g(2, 2);
  g << 1, 1, 1, 0;
  const OscillatorSystem s(Vec::Ones(2), g, Vec::Ones(2), Vec::Zero(2));
  const ForcingSpec f({{{0.1, 2.0, 0.0}}, {{0.1, 1.0, 0.0}}});
  try {
    build_embedding(s, f, 10.0);
    FAIL("expected ZeroWallSpring");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroWallSpring);
  }
}

TEST_CASE("m_f selection satisfies its defining inequality and grows with the horizon") {
  const auto sel = select_m_f(unit_oscillator(), worked_forcing(), 5.0, 1e-2);
  const auto& b = sel.terms;
  const double recomputed = 5.0 * b.norm_khat * b.norm_t * b.norm_inv_sqrt_m * (1.0 + b.xi0 / 1e-2);
  CHECK(sel.m_f >= recomputed * (1 - 1e-12));
  CHECK(sel.m_f == doctest::Approx(recomputed));
  const auto twice = select_m_f(unit_oscillator(), worked_forcing(), 10.0, 1e-2);
  CHECK(twice.m_f >= 2.0 * sel.m_f * (1 - 1e-12));
  const auto unforced = select_m_f(unit_oscillator(), ForcingSpec({{{0.0, 2.0, 0.0}}}), 5.0, 1e-2);
  CHECK(std::isfinite(unforced.terms.xi0));
}

TEST_CASE("worked forced case reaches the target accuracy") {
  const auto sel = select_m_f(unit_oscillator(), worked_forcing(), 5.0, 1e-2);
  const auto emb = build_embedding(unit_oscillator(), worked_forcing(), sel.m_f);
  const auto rep = verify_embedding(emb, linspace(0.0, 5.0, 101), 1e-2);
  CHECK(rep.pass);
  CHECK(rep.max_error <= 1e-2);
}

TEST_CASE("embedding error is first order in the inverse fictitious mass") {
  const std::vector<double> mfs{10.0, 100.0, 1000.0, 10000.0};
  const auto sweep = gamma_sweep(unit_oscillator(), worked_forcing(), linspace(0.0, 5.0, 51), mfs);
  REQUIRE(sweep.points.size() == mfs.size());
  for (std::size_t i = 1; i < mfs.size(); ++i) CHECK(sweep.points[i].max_error < sweep.points[i - 1].max_error);
  CHECK(sweep.slope >= -1.3);
  CHECK(sweep.slope <= -0.7);
}

TEST_CASE("log-log slope of an exact power law") {
  CHECK(loglog_slope({1, 10, 100}, {1, 0.01, 1e-4}) == doctest::Approx(-2.0));
}

TEST_CASE("kinetic energy fraction of the unit oscillator is sin squared") {
  const OscillatorSystem s = unit_oscillator();
  const auto traj = integrate_linear(s, linspace(0.0, 6.0, 25));
  const auto frac = kinetic_energy_fraction(traj, {0}, s.masses(), s.energy());
  CHECK(frac.front() == 0.0);
  for (std::size_t i = 0; i < frac.size(); ++i) {
    CHECK(std::abs(frac[i] - std::pow(std::sin(traj.times[i]), 2)) <= 1e-7);
    CHECK(frac[i] <= 1.0 + 1e-9);
  }
  try {
    kinetic_energy_fraction(traj, {}, s.masses(), s.energy());
    FAIL("expected EmptySubset");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySubset);
  }
}
