#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "oscq/errors.hpp"
#include "oscq/scenario.hpp"

namespace {

struct Outcome {
  int code = oscq::kExitPass;
  std::string message;
};

// Severity order used when several scenarios finish with different codes.
int rank(int code) {
  switch (code) {
    case oscq::kExitInternalError: return 3;
    case oscq::kExitConfigError: return 2;
    case oscq::kExitCheckFailed: return 1;
    default: return 0;
  }
}

template <typename F>
Outcome guarded(const std::string& label, F&& body) {
  try {
    return body();
  } catch (const oscq::Error& e) {
    return {oscq::exit_code_for(e), fmt::format("{}: {}", label, e.what())};
  } catch (const std::exception& e) {
    return {oscq::kExitInternalError, fmt::format("{}: internal error: {}", label, e.what())};
  }
}

Outcome report(const oscq::RunResult& r) {
  std::string msg = r.summary;
  for (const auto& f : r.files) msg += "\n  wrote " + f.string();
  return {r.exit_code, msg};
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) oscq::raise(oscq::ErrorCode::ConfigInvalid, "bad sweep value '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) oscq::raise(oscq::ErrorCode::ConfigInvalid, "sweep needs at least one value");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-encoding simulator for classical oscillator networks"};
  app.require_subcommand(1);

  std::vector<std::string> configs;
  std::string out_dir = ".";
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* simulate = app.add_subcommand("simulate", "Run one or more scenario configs");
  simulate->add_option("configs", configs, "Scenario JSON files")->required();
  simulate->add_option("--out", out_dir, "Output directory");
  simulate->add_option("--jobs", jobs, "Worker threads for batches")->check(CLI::PositiveNumber);

  std::string sweep_config;
  std::string sweep_param;
  std::string sweep_values;
  auto* sweep = app.add_subcommand("sweep", "Sweep one parameter of a scenario");
  sweep->add_option("config", sweep_config, "Scenario JSON file")->required();
  sweep->add_option("--param", sweep_param, "eta, k, m_f or gamma")->required();
  sweep->add_option("--values", sweep_values, "Comma-separated values")->required();
  sweep->add_option("--out", out_dir, "Output directory");

  std::string validate_config;
  std::uint64_t seed = 42;
  auto* validate = app.add_subcommand("validate", "Check a config and run seeded consistency probes");
  validate->add_option("config", validate_config, "Scenario JSON file")->required();
  for (auto* sub : {simulate, sweep, validate}) sub->add_option("--seed", seed, "Seed for randomized probes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : oscq::kExitConfigError;
  }

  if (*simulate) {
    std::vector<Outcome> outcomes(configs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < configs.size(); i = next++) {
        outcomes[i] = guarded(configs[i], [&] { return report(oscq::run_scenario(oscq::load_scenario(configs[i]), out_dir)); });
      }
    };
    const unsigned pool = std::min<unsigned>(jobs, static_cast<unsigned>(configs.size()));
    std::vector<std::thread> threads;
    for (unsigned t = 1; t < pool; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    int code = oscq::kExitPass;
    for (const auto& o : outcomes) {
      (o.code == oscq::kExitPass ? std::cout : std::cerr) << o.message << '\n';
      if (rank(o.code) > rank(code)) code = o.code;
    }
    return code;
  }

  Outcome outcome;
  if (*sweep) {
    outcome = guarded(sweep_config, [&] {
      const auto sc = oscq::load_scenario(sweep_config);
      return report(oscq::run_sweep(sc, oscq::parse_sweep_param(sweep_param), parse_values(sweep_values), out_dir));
    });
  } else {
    outcome = guarded(validate_config, [&] {
      return report(oscq::validate_scenario(oscq::load_scenario(validate_config), seed));
    });
  }
  (outcome.code == oscq::kExitPass ? std::cout : std::cerr) << outcome.message << '\n';
  return outcome.code;
}
