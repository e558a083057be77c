#include <cmath>

#include "doctest.h"
#include "oscq/errors.hpp"
#include "oscq/resource_estimator.hpp"
#include "support.hpp"

using namespace oscq;

namespace {

NLSSystem scalar(double omega, double g, double beta) {
  return NLSSystem(CMat::Constant(1, 1, omega), CMat::Constant(1, 1, g), CVec::Constant(1, std::sqrt(beta)));
}

}  // namespace

TEST_CASE("linear NLS needs a single order and only the time term") {
  const auto rep = estimate_resources(scalar(1.5, 0.0, 0.5), 2.0, 1e-3, Regime::SmallT);
  CHECK(rep.k == 1);
  CHECK(rep.g_queries == doctest::Approx(rep.alpha * 2.0));
  CHECK(rep.all_constants_hold());
}

TEST_CASE("report echoes the worked symmetrization example") {
  const auto rep = estimate_resources(scalar(1.0, 0.1, 0.5), 1.0, 0.01, Regime::SmallT, 3);
  CHECK(rep.k == 3);
  CHECK(rep.eta == doctest::Approx(7.29).epsilon(1e-3));
  CHECK(rep.aleph == doctest::Approx(aleph_direct(0.5, rep.eta, 3)));
  CHECK(rep.small_t_ok);
  CHECK(rep.alpha_constants.at("6_alpha_k2") == doctest::Approx(6 * rep.alpha * 9));
  CHECK(rep.alpha_constants.at("alpha_k") == doctest::Approx(rep.alpha * 3));
  CHECK(rep.g_queries == doctest::Approx(rep.alpha * 9 + std::log(rep.eta * rep.eta)));
  CHECK(rep.all_constants_hold());
}

TEST_CASE("claimed constants dominate the computed norms on random instances") {
  auto rng = testing::make_rng(80);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 1 + trial % 3;
    CMat h2 = testing::random_complex(rng, n, n * n);
    h2 *= testing::uniform(rng, 0.01, 0.2) / spectral_norm(h2);
    CVec psi = testing::normal_cvec(rng, n);
    psi *= testing::uniform(rng, 0.2, 0.7) / psi.norm();
    const NLSSystem nls(testing::random_hermitian(rng, n), h2, psi);
    const auto rep = estimate_resources(nls, 0.5, 1e-2, Regime::SmallT, 1 + trial % 4);
    for (const auto& [name, check] : rep.checks) {
      INFO(name);
      CHECK(check.holds());
    }
  }
  for (int trial = 0; trial < 20; ++trial) {
    const OscillatorSystem s = testing::random_system(rng, 1 + trial % 5);
    CHECK(harmonic_constant(s).holds());
  }
}

TEST_CASE("reduced quadratic constant dominates the computed norm") {
  auto rng = testing::make_rng(81);
  for (int trial = 0; trial < 10; ++trial) {
    const OscillatorSystem base = testing::random_system(rng, 2);
    Mat k2 = Mat::Zero(2, 4);
    for (Eigen::Index c = 0; c < 4; ++c) k2(c % 2, c) = testing::uniform(rng, -0.3, 0.3);
    const NonlinearOscillatorSystem sys(base.masses(), base.incidence(), k2, base.x0(), base.v0());
    CHECK(reduced_quadratic_constant(reduce_to_nls(sys)).holds());
  }
}

TEST_CASE("regime violation propagates") {
  CHECK_THROWS_AS(estimate_resources(scalar(1.0, 0.5, 0.5), 3.0, 1e-3, Regime::SmallT), Error);
}

TEST_CASE("dilation of the zero matrix is block anti-diagonal") {
  const Dilation d = dilation_block_encode(CMat::Zero(2, 2), 1.0);
  CHECK(d.unitary.topLeftCorner(2, 2).norm() == 0.0);
  CHECK(d.unitary.bottomRightCorner(2, 2).norm() == 0.0);
  CHECK(d.unitarity_defect <= 1e-12);
}

TEST_CASE("dilation of the identity at half scale") {
  const Dilation d = dilation_block_encode(CMat::Identity(2, 2), 2.0);
  CHECK((d.unitary.topLeftCorner(2, 2) - 0.5 * CMat::Identity(2, 2)).norm() <= 1e-15);
  CHECK(std::abs(d.unitary(0, 2) - std::sqrt(3.0) / 2) <= 1e-14);
  CHECK(std::abs(d.unitary(2, 0) - std::sqrt(3.0) / 2) <= 1e-14);
  CHECK(d.unitarity_defect <= 1e-12);
}

TEST_CASE("dilation contract on random matrices") {
  auto rng = testing::make_rng(82);
  for (int trial = 0; trial < 20; ++trial) {
    const CMat a = testing::random_complex(rng, 4, 4);
    const Dilation d = dilation_block_encode(a, 2.0 * spectral_norm(a));
    CHECK(d.unitarity_defect <= 1e-10);
    CHECK(d.block_defect <= 1e-10);
  }
  const CMat a = testing::random_complex(rng, 3, 3);
  const Dilation tight = dilation_block_encode(a, spectral_norm(a));
  CHECK(tight.unitarity_defect <= 1e-10);
  try {
    dilation_block_encode(a, 0.5 * spectral_norm(a));
    FAIL("expected SubnormalizationViolated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SubnormalizationViolated);
  }
}
