#include "support.hpp"

#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <cstring>
#include <string>
#include <vector>

namespace oscq::testing {

namespace {
std::uint64_t g_seed = 42;
}

std::uint64_t seed() { return g_seed; }

std::mt19937_64 make_rng(std::uint64_t salt) { return std::mt19937_64(g_seed * 1000003ULL + salt); }

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec normal_vec(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> d(0.0, 1.0);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

CVec normal_cvec(std::mt19937_64& rng, Eigen::Index n) {
  CVec v(n);
  v.real() = normal_vec(rng, n);
  v.imag() = normal_vec(rng, n);
  return v;
}

CMat random_complex(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> d(0.0, 1.0);
  CMat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = cplx(d(rng), d(rng));
  }
  return m;
}

CMat random_hermitian(std::mt19937_64& rng, Eigen::Index n) {
  const CMat a = random_complex(rng, n, n);
  return 0.5 * (a + a.adjoint());
}

Mat random_graph(std::mt19937_64& rng, Eigen::Index n, double density) {
  Mat g = Mat::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    g(j, j) = uniform(rng, 0.2, 1.5);
    for (Eigen::Index k = j + 1; k < n; ++k) {
      if (uniform(rng, 0.0, 1.0) < density) g(j, k) = g(k, j) = uniform(rng, 0.1, 1.0);
    }
  }
  return g;
}

OscillatorSystem random_system(std::mt19937_64& rng, Eigen::Index n) {
  Vec m(n);
  for (Eigen::Index i = 0; i < n; ++i) m(i) = uniform(rng, 0.5, 2.0);
  return OscillatorSystem(m, random_graph(rng, n), normal_vec(rng, n), normal_vec(rng, n));
}

}  // namespace oscq::testing

int main(int argc, char** argv) {
  std::vector<char*> rest;
  for (int i = 0; i < argc; ++i) {
    if (std::strncmp(argv[i], "--seed=", 7) == 0) {
      oscq::testing::g_seed = std::stoull(argv[i] + 7);
    } else {
      rest.push_back(argv[i]);
    }
  }
  doctest::Context ctx(static_cast<int>(rest.size()), rest.data());
  return ctx.run();
}
