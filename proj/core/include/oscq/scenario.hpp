#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "oscq/errors.hpp"
#include "oscq/nls_carleman.hpp"
#include "oscq/nls_system.hpp"
#include "oscq/oscillator_model.hpp"
#include "oscq/reference_integrator.hpp"

namespace oscq {

enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitConfigError = 2, kExitInternalError = 3 };

enum class Pipeline { Linear, Forced, Nonlinear, TdStiffness, TdForced, NlsDirect, NlsCarleman };

// ConfigInvalid → 2; failed checks and violated guards → 1; anything else → 3.
int exit_code_for(const Error& e);

Pipeline parse_pipeline(const std::string& tag);
std::string pipeline_name(Pipeline p);

struct Scenario {
  std::string name;
  Pipeline pipeline = Pipeline::Linear;
  double t = 0.0;
  std::size_t samples = 0;
  double epsilon = 0.0;
  Regime regime = Regime::SmallT;
  std::optional<int> k;
  std::optional<double> eta;
  std::optional<double> m_f;
  IntegratorConfig integrator;

  Vec masses;
  Vec x0;
  Vec v0;
  std::optional<OscillatorSystem> linear;
  std::optional<ForcingSpec> forcing;
  std::optional<NonlinearOscillatorSystem> nonlinear;
  std::optional<TimeDependentStiffnessSpec> td;
  std::optional<NLSSystem> nls;

  std::vector<double> grid() const { return linspace(0.0, t, samples); }
};

// Throws Error(ConfigInvalid) naming the offending field.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);

struct RunResult {
  int exit_code = kExitPass;
  bool pass = true;
  std::string summary;
  std::vector<std::filesystem::path> files;
};

RunResult run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir);

enum class SweepParam { Eta, K, MF, Gamma };
SweepParam parse_sweep_param(const std::string& name);
std::string sweep_param_name(SweepParam p);

// One row per value: param, value, k, eta, t, measured_error, bound, pass, first_block_error.
RunResult run_sweep(const Scenario& scenario, SweepParam param, const std::vector<double>& values,
                    const std::filesystem::path& out_dir);

// Construction checks plus seeded randomized consistency probes; writes nothing.
RunResult validate_scenario(const Scenario& scenario, std::uint64_t seed);

}  // namespace oscq
