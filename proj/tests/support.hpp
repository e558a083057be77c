#pragma once

#include <cstdint>
#include <random>

#include "oscq/linalg.hpp"
#include "oscq/oscillator_model.hpp"

namespace oscq::testing {

// Seed shared by every randomized test; set with --seed=N, default 42.
std::uint64_t seed();
std::mt19937_64 make_rng(std::uint64_t salt = 0);

double uniform(std::mt19937_64& rng, double lo, double hi);
Vec normal_vec(std::mt19937_64& rng, Eigen::Index n);
CVec normal_cvec(std::mt19937_64& rng, Eigen::Index n);
CMat random_hermitian(std::mt19937_64& rng, Eigen::Index n);
CMat random_complex(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols);

// Symmetric nonnegative graph with positive wall springs, so K is positive definite.
Mat random_graph(std::mt19937_64& rng, Eigen::Index n, double density = 0.7);
OscillatorSystem random_system(std::mt19937_64& rng, Eigen::Index n);

}  // namespace oscq::testing
