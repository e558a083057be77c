#include "oscq/scenario.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "json.hpp"
#include "oscq/errors.hpp"
#include "oscq/forced_embedding.hpp"
#include "oscq/harmonic_schrodingerization.hpp"
#include "oscq/io.hpp"
#include "oscq/nonlinear_reduction.hpp"
#include "oscq/resource_estimator.hpp"
#include "oscq/td_embedding.hpp"

namespace oscq {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  raise(ErrorCode::ConfigInvalid, "field '" + field + "': " + why);
}

const json& need(const json& obj, const std::string& key, const std::string& path) {
  const std::string full = path.empty() ? key : path + "." + key;
  if (!obj.is_object() || !obj.contains(key)) bad_field(full, "missing");
  return obj.at(key);
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) bad_field(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
  }
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) bad_field(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad_field(path, "must be finite");
  return v;
}

Vec get_vector(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) bad_field(path, "expected a non-empty array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = get_number(j[i], fmt::format("{}[{}]", path, i));
  return v;
}

Mat get_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) bad_field(path, "expected a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) bad_field(path, "rows must be non-empty arrays");
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string row_path = fmt::format("{}[{}]", path, r);
    if (!j[r].is_array() || j[r].size() != cols) bad_field(row_path, "ragged matrix row");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = get_number(j[r][c], fmt::format("{}[{}]", row_path, c));
    }
  }
  return m;
}

CMat get_cmatrix(const json& j, const std::string& path) {
  if (!j.is_object()) bad_field(path, "expected an object with 're' (and optional 'im')");
  check_keys(j, {"re", "im"}, path);
  const Mat re = get_matrix(need(j, "re", path), path + ".re");
  Mat im = Mat::Zero(re.rows(), re.cols());
  if (j.contains("im")) {
    im = get_matrix(j.at("im"), path + ".im");
    if (im.rows() != re.rows() || im.cols() != re.cols()) bad_field(path + ".im", "shape differs from re");
  }
  CMat out(re.rows(), re.cols());
  out.real() = re;
  out.imag() = im;
  return out;
}

CVec get_cvector(const json& j, const std::string& path) {
  if (!j.is_object()) bad_field(path, "expected an object with 're' (and optional 'im')");
  check_keys(j, {"re", "im"}, path);
  const Vec re = get_vector(need(j, "re", path), path + ".re");
  Vec im = Vec::Zero(re.size());
  if (j.contains("im")) {
    im = get_vector(j.at("im"), path + ".im");
    if (im.size() != re.size()) bad_field(path + ".im", "length differs from re");
  }
  CVec out(re.size());
  out.real() = re;
  out.imag() = im;
  return out;
}

FourierTerm get_term(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) bad_field(path, "expected [amplitude, omega, phase]");
  return {get_number(j[0], path + "[0]"), get_number(j[1], path + "[1]"), get_number(j[2], path + "[2]")};
}

std::vector<FourierTerm> get_terms(const json& j, const std::string& path) {
  if (!j.is_array()) bad_field(path, "expected an array of [amplitude, omega, phase]");
  std::vector<FourierTerm> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_term(j[i], fmt::format("{}[{}]", path, i)));
  return out;
}

ForcingSpec get_forcing(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) bad_field(path, "expected one term list per mass");
  std::vector<std::vector<FourierTerm>> per_mass;
  for (std::size_t i = 0; i < j.size(); ++i) per_mass.push_back(get_terms(j[i], fmt::format("{}[{}]", path, i)));
  return ForcingSpec(std::move(per_mass));
}

std::size_t get_index(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 1) bad_field(path, "expected a one-based positive integer");
  return static_cast<std::size_t>(j.get<long long>());
}

TimeDependentStiffnessSpec get_td(const json& j, std::size_t n, const std::string& path) {
  if (!j.is_array()) bad_field(path, "expected an array of pair objects");
  std::vector<TdPairSpec> pairs;
  for (std::size_t q = 0; q < j.size(); ++q) {
    const std::string p = fmt::format("{}[{}]", path, q);
    check_keys(j[q], {"i", "j", "constant", "terms"}, p);
    TdPairSpec spec;
    spec.i = get_index(need(j[q], "i", p), p + ".i") - 1;
    spec.j = get_index(need(j[q], "j", p), p + ".j") - 1;
    if (j[q].contains("constant")) spec.constant = get_number(j[q].at("constant"), p + ".constant");
    if (j[q].contains("terms")) spec.terms = get_terms(j[q].at("terms"), p + ".terms");
    pairs.push_back(std::move(spec));
  }
  return TimeDependentStiffnessSpec(n, std::move(pairs));
}

template <typename F>
auto build_checked(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    raise(ErrorCode::ConfigInvalid, fmt::format("{} rejected ({}: {})", what, error_name(e.code()), e.what()));
  }
}

bool is_oscillator(Pipeline p) { return p != Pipeline::NlsDirect && p != Pipeline::NlsCarleman; }

}  // namespace

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ConfigInvalid: return kExitConfigError;
    case ErrorCode::BoundViolated:
    case ErrorCode::RegimeViolated:
    case ErrorCode::SubnormalizationViolated:
    case ErrorCode::Blowup:
    case ErrorCode::StepLimitExceeded: return kExitCheckFailed;
    default: return kExitInternalError;
  }
}

Pipeline parse_pipeline(const std::string& tag) {
  if (tag == "linear") return Pipeline::Linear;
  if (tag == "forced") return Pipeline::Forced;
  if (tag == "nonlinear") return Pipeline::Nonlinear;
  if (tag == "td-stiffness") return Pipeline::TdStiffness;
  if (tag == "td-forced") return Pipeline::TdForced;
  if (tag == "nls-direct") return Pipeline::NlsDirect;
  if (tag == "nls-carleman") return Pipeline::NlsCarleman;
  bad_field("pipeline", "unknown pipeline '" + tag + "'");
}

std::string pipeline_name(Pipeline p) {
  switch (p) {
    case Pipeline::Linear: return "linear";
    case Pipeline::Forced: return "forced";
    case Pipeline::Nonlinear: return "nonlinear";
    case Pipeline::TdStiffness: return "td-stiffness";
    case Pipeline::TdForced: return "td-forced";
    case Pipeline::NlsDirect: return "nls-direct";
    case Pipeline::NlsCarleman: return "nls-carleman";
  }
  return "unknown";
}

Scenario parse_scenario(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    raise(ErrorCode::ConfigInvalid, std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) raise(ErrorCode::ConfigInvalid, "top level must be a JSON object");
  check_keys(root, {"name", "pipeline", "t", "samples", "epsilon", "regime", "k", "eta", "m_f", "integrator",
                    "system", "nls"},
             "");

  Scenario sc;
  const json& name = need(root, "name", "");
  if (!name.is_string() || name.get<std::string>().empty()) bad_field("name", "expected a non-empty string");
  sc.name = name.get<std::string>();
  if (sc.name.find_first_of("/\\") != std::string::npos) bad_field("name", "must not contain path separators");
  const json& pipe = need(root, "pipeline", "");
  if (!pipe.is_string()) bad_field("pipeline", "expected a string");
  sc.pipeline = parse_pipeline(pipe.get<std::string>());
  sc.t = get_number(need(root, "t", ""), "t");
  if (!(sc.t > 0.0)) bad_field("t", "horizon must be positive");
  const json& samples = need(root, "samples", "");
  if (!samples.is_number_integer() || samples.get<long long>() < 2) bad_field("samples", "expected an integer >= 2");
  sc.samples = static_cast<std::size_t>(samples.get<long long>());
  sc.epsilon = get_number(need(root, "epsilon", ""), "epsilon");
  if (!(sc.epsilon > 0.0 && sc.epsilon < 1.0)) bad_field("epsilon", "must lie in (0, 1)");
  if (root.contains("regime")) {
    if (!root["regime"].is_string()) bad_field("regime", "expected 'small-t' or 'no-resonance'");
    const std::string r = root["regime"].get<std::string>();
    if (r != "small-t" && r != "no-resonance") bad_field("regime", "expected 'small-t' or 'no-resonance'");
    sc.regime = parse_regime(r);
  } else {
    sc.regime = sc.pipeline == Pipeline::Nonlinear ? Regime::NoResonance : Regime::SmallT;
  }
  if (root.contains("k")) {
    if (!root["k"].is_number_integer() || root["k"].get<long long>() < 1) bad_field("k", "expected an integer >= 1");
    sc.k = static_cast<int>(root["k"].get<long long>());
  }
  if (root.contains("eta")) {
    sc.eta = get_number(root["eta"], "eta");
    if (!(*sc.eta > 0.0)) bad_field("eta", "must be positive");
  }
  if (root.contains("m_f")) {
    sc.m_f = get_number(root["m_f"], "m_f");
    if (!(*sc.m_f > 0.0)) bad_field("m_f", "must be positive");
  }
  if (root.contains("integrator")) {
    const json& in = root["integrator"];
    check_keys(in, {"method", "step", "step_fraction", "rtol", "atol", "max_steps"}, "integrator");
    if (in.contains("method")) {
      const std::string m = in["method"].is_string() ? in["method"].get<std::string>() : "";
      if (m == "rk4") {
        sc.integrator.method = IntegratorMethod::Rk4Fixed;
      } else if (m == "rk45") {
        sc.integrator.method = IntegratorMethod::Rk45Adaptive;
      } else {
        bad_field("integrator.method", "expected 'rk4' or 'rk45'");
      }
    }
    if (in.contains("step")) sc.integrator.step = get_number(in["step"], "integrator.step");
    if (in.contains("step_fraction")) sc.integrator.step_fraction = get_number(in["step_fraction"], "integrator.step_fraction");
    if (in.contains("rtol")) sc.integrator.rtol = get_number(in["rtol"], "integrator.rtol");
    if (in.contains("atol")) sc.integrator.atol = get_number(in["atol"], "integrator.atol");
    if (in.contains("max_steps")) sc.integrator.max_steps = static_cast<long long>(get_number(in["max_steps"], "integrator.max_steps"));
    if (sc.integrator.step < 0.0 || !(sc.integrator.step_fraction > 0.0) || !(sc.integrator.rtol > 0.0) ||
        !(sc.integrator.atol > 0.0) || sc.integrator.max_steps < 1) {
      bad_field("integrator", "step settings must be positive");
    }
  }

  if (is_oscillator(sc.pipeline)) {
    if (root.contains("nls")) bad_field("nls", "not used by pipeline '" + pipeline_name(sc.pipeline) + "'");
    const json& sys = need(root, "system", "");
    check_keys(sys, {"masses", "stiffness", "x0", "v0", "forcing", "td_stiffness", "K1", "K2"}, "system");
    sc.masses = get_vector(need(sys, "masses", "system"), "system.masses");
    sc.x0 = get_vector(need(sys, "x0", "system"), "system.x0");
    sc.v0 = get_vector(need(sys, "v0", "system"), "system.v0");
    const auto n = static_cast<std::size_t>(sc.masses.size());
    if (static_cast<std::size_t>(sc.x0.size()) != n) bad_field("system.x0", "length differs from masses");
    if (static_cast<std::size_t>(sc.v0.size()) != n) bad_field("system.v0", "length differs from masses");

    const bool wants_forcing = sc.pipeline == Pipeline::Forced || sc.pipeline == Pipeline::TdForced;
    const bool wants_graph = sc.pipeline == Pipeline::Linear || sc.pipeline == Pipeline::Forced;
    const bool wants_td = sc.pipeline == Pipeline::TdStiffness || sc.pipeline == Pipeline::TdForced;
    const bool wants_quadratic = sc.pipeline == Pipeline::Nonlinear;
    auto forbid = [&](const char* key, bool wanted) {
      if (!wanted && sys.contains(key)) {
        bad_field(std::string("system.") + key, "not used by pipeline '" + pipeline_name(sc.pipeline) + "'");
      }
    };
    forbid("forcing", wants_forcing);
    forbid("stiffness", wants_graph);
    forbid("td_stiffness", wants_td);
    forbid("K1", wants_quadratic);
    forbid("K2", wants_quadratic);

    if (wants_forcing) {
      sc.forcing = get_forcing(need(sys, "forcing", "system"), "system.forcing");
      if (sc.forcing->dim() != n) bad_field("system.forcing", "needs one term list per mass");
    }
    if (wants_graph) {
      const Mat g = get_matrix(need(sys, "stiffness", "system"), "system.stiffness");
      sc.linear = build_checked("system", [&] { return OscillatorSystem(sc.masses, g, sc.x0, sc.v0); });
    }
    if (wants_td) {
      sc.td = build_checked("system.td_stiffness",
                            [&] { auto td = get_td(need(sys, "td_stiffness", "system"), n, "system.td_stiffness");
        td.check_psd(sc.t);
        return td;
      });
    }
    if (wants_quadratic) {
      const Mat k1 = get_matrix(need(sys, "K1", "system"), "system.K1");
      const Mat k2 = get_matrix(need(sys, "K2", "system"), "system.K2");
      sc.nonlinear = build_checked("system", [&] { return NonlinearOscillatorSystem(sc.masses, k1, k2, sc.x0, sc.v0); });
    }
    if (sc.masses.minCoeff() <= 0.0) bad_field("system.masses", "masses must be strictly positive");
  } else {
    if (root.contains("system")) bad_field("system", "not used by pipeline '" + pipeline_name(sc.pipeline) + "'");
    const json& nl = need(root, "nls", "");
    check_keys(nl, {"H1", "H2", "psi0"}, "nls");
    const CMat h1 = get_cmatrix(need(nl, "H1", "nls"), "nls.H1");
    const CMat h2 = get_cmatrix(need(nl, "H2", "nls"), "nls.H2");
    const CVec psi0 = get_cvector(need(nl, "psi0", "nls"), "nls.psi0");
    sc.nls = build_checked("nls", [&] { return NLSSystem(h1, h2, psi0); });
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_text_file(path)); }

namespace {

// JSON has no NaN/inf; those map to null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json norm_report_json(const NormBoundReport& r) {
  return json{{"bound", r.name}, {"samples", r.samples}, {"max_norm", num(r.max_norm)},
              {"min_slack", num(r.min_slack)}, {"worst_t", num(r.worst_t)}};
}

Trajectory project_pv(const Trajectory& full, std::size_t n) {
  Trajectory out;
  out.kind = TrajectoryKind::PositionVelocity;
  out.dim = n;
  out.times = full.times;
  const auto ni = static_cast<Eigen::Index>(n);
  const auto total = static_cast<Eigen::Index>(full.dim);
  out.real_states.resize(full.real_states.rows(), 2 * ni);
  out.real_states.leftCols(ni) = full.real_states.leftCols(ni);
  out.real_states.rightCols(ni) = full.real_states.middleCols(total, ni);
  return out;
}

std::vector<double> row_errors(const Mat& a, const Mat& b) {
  std::vector<double> out;
  for (Eigen::Index r = 0; r < a.rows(); ++r) out.push_back((a.row(r) - b.row(r)).norm());
  return out;
}

std::vector<double> row_errors(const CMat& a, const CMat& b) {
  std::vector<double> out;
  for (Eigen::Index r = 0; r < a.rows(); ++r) out.push_back((a.row(r) - b.row(r)).norm());
  return out;
}

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

IntegratorConfig oracle_config(const IntegratorConfig& base) {
  IntegratorConfig cfg = base;
  cfg.step_fraction = std::min(base.step_fraction, 0.001);
  return cfg;
}

struct Emitter {
  const Scenario& sc;
  std::filesystem::path dir;
  RunResult result;

  std::filesystem::path path(const std::string& suffix) const { return dir / (sc.name + suffix); }

  void trajectory(const Trajectory& traj) {
    write_trajectory_csv(path("_trajectory.csv"), traj);
    result.files.push_back(path("_trajectory.csv"));
  }
  void errors(const std::vector<double>& times, const std::vector<double>& errs) {
    write_error_csv(path("_error.csv"), times, errs);
    result.files.push_back(path("_error.csv"));
  }
  void report(bool pass, json metrics) {
    json rep{{"name", sc.name},       {"pipeline", pipeline_name(sc.pipeline)},
             {"t", sc.t},             {"samples", sc.samples},
             {"epsilon", sc.epsilon}, {"pass", pass},
             {"metrics", std::move(metrics)}};
    write_text_file(path("_report.json"), rep.dump(2) + "\n");
    result.files.push_back(path("_report.json"));
    result.pass = pass;
    result.exit_code = pass ? kExitPass : kExitCheckFailed;
  }
};

void run_linear(const Scenario& sc, Emitter& out) {
  const auto grid = sc.grid();
  const OscillatorSystem& sys = *sc.linear;
  const QuantumEncoding enc = encode(sys);
  const Trajectory traj = simulate_harmonic(enc, grid);
  const Trajectory ref = integrate_linear(sys, grid, oracle_config(sc.integrator));
  const auto errs = row_errors(traj.real_states, ref.real_states);
  const double max_err = max_of(errs);

  json metrics{{"energy", enc.energy}, {"hilbert_dim", enc.psi0.size()}, {"max_error", max_err}};
  bool bound_ok = true;
  try {
    metrics["norm_bound"] = norm_report_json(check_norm_bounds(ref, sys));
  } catch (const Error& e) {
    bound_ok = false;
    metrics["norm_bound_violation"] = e.what();
  }
  const ConstantCheck hc = harmonic_constant(sys);
  metrics["subnormalization"] = {{"claimed", hc.claimed}, {"norm", hc.norm}, {"holds", hc.holds()}};
  out.trajectory(traj);
  out.errors(grid, errs);
  out.report(max_err <= sc.epsilon && bound_ok && hc.holds(), std::move(metrics));
}

void run_forced(const Scenario& sc, Emitter& out) {
  const auto grid = sc.grid();
  const OscillatorSystem& sys = *sc.linear;
  const MfSelection sel = select_m_f(sys, *sc.forcing, sc.t, sc.epsilon);
  const double m_f = sc.m_f.value_or(sel.m_f);
  const ForcedEmbedding emb = build_embedding(sys, *sc.forcing, m_f);
  EmbeddingReport rep = verify_embedding(emb, grid, sc.epsilon, sc.integrator);
  rep.xi0 = sel.terms.xi0;
  json metrics{{"m_f", m_f},
               {"m_f_selected", sel.m_f},
               {"gamma", emb.gamma},
               {"enlarged_dim", emb.enlarged.dim()},
               {"xi0", rep.xi0},
               {"norm_kp", rep.norm_kp},
               {"norm_khat", sel.terms.norm_khat},
               {"norm_t", sel.terms.norm_t},
               {"max_error", rep.max_error}};
  out.trajectory(project_pv(rep.enlarged_trajectory, emb.n));
  out.errors(rep.times, rep.errors);
  out.report(rep.pass, std::move(metrics));
}

void run_nonlinear(const Scenario& sc, Emitter& out) {
  const auto grid = sc.grid();
  const NonlinearSimulation sim = simulate_nonlinear_oscillator(*sc.nonlinear, grid, sc.epsilon, sc.regime, sc.integrator);
  const auto& r = sim.report;
  const NLSReduction red = reduce_to_nls(*sc.nonlinear);
  json metrics{{"regime", regime_name(r.regime)},
               {"k", r.k},
               {"k_formula", r.k_formula},
               {"eta", r.eta},
               {"delta", num(r.delta)},
               {"R_r", r.r_r},
               {"C", r.c_const},
               {"C_bound", r.c_bound},
               {"beta", r.beta},
               {"truncation_estimate", r.truncation_estimate},
               {"max_sym_error", r.max_sym_error},
               {"max_error", r.max_error},
               {"h2_norm", red.h2_norm},
               {"h2_bound", red.h2_bound},
               {"nls_dim", red.nls.dim()}};
  out.trajectory(sim.trajectory);
  out.errors(grid, r.errors);
  out.report(r.pass, std::move(metrics));
}

void run_td(const Scenario& sc, Emitter& out) {
  const auto grid = sc.grid();
  const ForcingSpec* forcing = sc.forcing ? &*sc.forcing : nullptr;
  const TDEmbedding emb = forcing ? build_td_forced_embedding(sc.masses, *sc.td, *forcing, sc.x0, sc.v0)
                                  : build_td_embedding(sc.masses, *sc.td, sc.x0, sc.v0);
  const Trajectory ref = integrate_time_dependent(sc.masses, *sc.td, forcing, sc.x0, sc.v0, grid, oracle_config(sc.integrator));
  const TDVerification ver = verify_td_embedding(emb, ref, grid, sc.integrator);
  Vec probe = sc.x0;
  if (probe.norm() == 0.0) probe.setOnes();
  const double sym = symbolic_check(emb, probe, sc.t);
  json metrics{{"enlarged_dim", emb.dim()},
               {"embedding",
                {{"n", emb.n},
                 {"slots", emb.slots},
                 {"forced_slots", emb.forced_slots},
                 {"y_offset", emb.y_offset},
                 {"w_offset", emb.w_offset},
                 {"p_offset", emb.p_offset},
                 {"auxiliaries", emb.auxiliaries.size()}}},
               {"symbolic_check", sym},
               {"max_x_error", ver.max_x_error},
               {"max_aux_error", ver.max_aux_error},
               {"p_drift", ver.p_drift}};
  try {
    metrics["lognorm_bound"] = norm_report_json(check_lognorm_bound(ref, sc.masses, *sc.td));
  } catch (const Error& e) {
    metrics["lognorm_bound_violation"] = e.what();
  }
  out.trajectory(project_pv(ver.enlarged_trajectory, emb.n));
  out.errors(ver.times, ver.errors);
  out.report(ver.pass && sym <= 1e-10 && !metrics.contains("lognorm_bound_violation"), std::move(metrics));
}

void run_nls_direct(const Scenario& sc, Emitter& out) {
  const auto grid = sc.grid();
  const Trajectory traj = integrate_nls(*sc.nls, grid, sc.integrator);
  IntegratorConfig check = sc.integrator;
  check.method = IntegratorMethod::Rk45Adaptive;
  check.rtol = 1e-12;
  check.atol = 1e-14;
  const Trajectory cross = integrate_nls(*sc.nls, grid, check);
  const auto errs = row_errors(traj.complex_states, cross.complex_states);
  const double max_err = max_of(errs);
  json metrics{{"beta", sc.nls->beta()},
               {"h1_norm", spectral_norm(sc.nls->h1)},
               {"h2_norm", spectral_norm(sc.nls->h2)},
               {"d", sc.nls->sparsity_d()},
               {"max_error", max_err}};
  out.trajectory(traj);
  out.errors(grid, errs);
  out.report(max_err <= sc.epsilon, std::move(metrics));
}

void run_nls_carleman(const Scenario& sc, Emitter& out) {
  const auto grid = sc.grid();
  const NLSSystem& nls = *sc.nls;
  int k = 0;
  json metrics;
  if (sc.k) {
    k = *sc.k;
  } else {
    const TruncationDiagnostics d = select_truncation_order(nls, sc.t, sc.epsilon, sc.regime);
    k = d.k;
    metrics["truncation"] = {{"regime", regime_name(d.regime)}, {"bound_value", d.bound_value},
                             {"h2_norm", d.h2_norm},            {"delta", num(d.delta)},
                             {"R_r", d.r_r}};
  }
  const double eta = sc.eta.value_or(select_eta(nls, k, sc.t, sc.epsilon));
  const CarlemanGenerator gen = build_carleman_generator(nls, k);
  const SymmetrizedGenerator sym = build_symmetrized(gen, nls, eta);
  const CarlemanRun run = evolve_and_decode(sym, gen, nls, grid, nullptr, oracle_config(sc.integrator));
  metrics["k"] = k;
  metrics["eta"] = eta;
  metrics["aleph"] = sym.aleph;
  metrics["carleman_dim"] = gen.dim();
  metrics["p1_initial"] = run.p1.front();
  metrics["p1_closed_form"] = p1_closed_form(nls.beta(), eta, k);
  metrics["max_sym_error"] = run.max_sym_error;
  metrics["max_error"] = run.max_error;
  try {
    const ResourceReport rr = estimate_resources(nls, sc.t, sc.epsilon, sc.regime, k);
    json consts = json::object();
    for (const auto& [name, value] : rr.alpha_constants) consts[name] = value;
    json checks = json::object();
    for (const auto& [name, c] : rr.checks) checks[name] = {{"claimed", c.claimed}, {"norm", c.norm}, {"holds", c.holds()}};
    metrics["resources"] = {{"alpha", rr.alpha},
                            {"d", rr.d},
                            {"G_queries_asymptotic_estimate", rr.g_queries},
                            {"small_t_ok", rr.small_t_ok},
                            {"no_resonance_ok", rr.no_resonance_ok},
                            {"truncation_condition", rr.truncation_condition},
                            {"alpha_constants", consts},
                            {"checks", checks}};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::RegimeViolated) throw;
    metrics["resources_unavailable"] = e.what();
  }
  out.trajectory(run.decoded);
  out.errors(grid, run.errors);
  out.report(run.max_error <= sc.epsilon, std::move(metrics));
}

}  // namespace

RunResult run_scenario(const Scenario& sc, const std::filesystem::path& out_dir) {
  Emitter out{sc, out_dir, {}};
  switch (sc.pipeline) {
    case Pipeline::Linear: run_linear(sc, out); break;
    case Pipeline::Forced: run_forced(sc, out); break;
    case Pipeline::Nonlinear: run_nonlinear(sc, out); break;
    case Pipeline::TdStiffness:
    case Pipeline::TdForced: run_td(sc, out); break;
    case Pipeline::NlsDirect: run_nls_direct(sc, out); break;
    case Pipeline::NlsCarleman: run_nls_carleman(sc, out); break;
  }
  out.result.summary = fmt::format("{} [{}]: {}", sc.name, pipeline_name(sc.pipeline), out.result.pass ? "PASS" : "FAIL");
  return out.result;
}

SweepParam parse_sweep_param(const std::string& name) {
  if (name == "eta") return SweepParam::Eta;
  if (name == "k") return SweepParam::K;
  if (name == "m_f") return SweepParam::MF;
  if (name == "gamma") return SweepParam::Gamma;
  raise(ErrorCode::ConfigInvalid, "unknown sweep parameter '" + name + "' (expected eta, k, m_f or gamma)");
}

std::string sweep_param_name(SweepParam p) {
  switch (p) {
    case SweepParam::Eta: return "eta";
    case SweepParam::K: return "k";
    case SweepParam::MF: return "m_f";
    case SweepParam::Gamma: return "gamma";
  }
  return "unknown";
}

RunResult run_sweep(const Scenario& sc, SweepParam param, const std::vector<double>& values,
                    const std::filesystem::path& out_dir) {
  if (values.empty()) raise(ErrorCode::ConfigInvalid, "sweep needs at least one value");
  for (const double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) raise(ErrorCode::ConfigInvalid, "sweep values must be positive and finite");
  }
  const std::string pname = sweep_param_name(param);
  const bool nls_param = param == SweepParam::Eta || param == SweepParam::K;
  if (nls_param && sc.pipeline != Pipeline::NlsCarleman) {
    raise(ErrorCode::ConfigInvalid, "sweep over " + pname + " needs pipeline 'nls-carleman'");
  }
  if (!nls_param && sc.pipeline != Pipeline::Forced) {
    raise(ErrorCode::ConfigInvalid, "sweep over " + pname + " needs pipeline 'forced'");
  }

  CsvTable table({"param", "value", "k", "eta", "t", "measured_error", "bound", "pass", "first_block_error"});
  bool all_pass = true;
  std::vector<double> xs;
  std::vector<double> ys;
  const auto grid = sc.grid();
  const std::string nan = format_number(std::numeric_limits<double>::quiet_NaN());

  if (param == SweepParam::K) {
    std::vector<int> ks;
    for (const double v : values) {
      if (v != std::floor(v)) raise(ErrorCode::ConfigInvalid, "k values must be integers");
      ks.push_back(static_cast<int>(v));
    }
    for (const auto& row : truncation_error_study(*sc.nls, ks, sc.t, oracle_config(sc.integrator))) {
      all_pass = all_pass && row.pass;
      table.add_row({pname, format_number(row.k), format_number(row.k), nan, format_number(row.t),
                     format_number(row.measured_error), format_number(row.bound_applies ? row.bound : NAN),
                     row.pass ? "true" : "false", format_number(row.first_block_error)});
      xs.push_back(row.k);
      ys.push_back(row.measured_error);
    }
  } else if (param == SweepParam::Eta) {
    const NLSSystem& nls = *sc.nls;
    const int k = sc.k.value_or(select_truncation_order(nls, sc.t, sc.epsilon, sc.regime).k);
    const CarlemanGenerator gen = build_carleman_generator(nls, k);
    const Trajectory oracle = integrate_nls(nls, grid, oracle_config(sc.integrator));
    double s = 0.0;
    for (int i = 1; i <= k; ++i) s += std::pow(nls.beta(), i);
    const double c = spectral_norm(nls.h2) * k * (k + 1) / 2.0 * sc.t;
    for (const double eta : values) {
      const SymmetrizedGenerator sym = build_symmetrized(gen, nls, eta);
      const CarlemanRun run = evolve_and_decode(sym, gen, nls, grid, &oracle, sc.integrator);
      const double ratio = c > 0.0 ? eta * eta / c : std::numeric_limits<double>::infinity();
      const double bound = ratio > 1.0 ? s / (ratio - 1.0) : std::numeric_limits<double>::infinity();
      const bool pass = run.max_sym_error <= bound;
      all_pass = all_pass && pass;
      table.add_row({pname, format_number(eta), format_number(k), format_number(eta), format_number(sc.t),
                     format_number(run.max_sym_error), format_number(bound), pass ? "true" : "false",
                     format_number(run.max_error)});
      xs.push_back(eta);
      ys.push_back(run.max_sym_error);
    }
  } else {
    const OscillatorSystem& sys = *sc.linear;
    const MfSelection sel = select_m_f(sys, *sc.forcing, sc.t, sc.epsilon);
    const double c = sc.t * sel.terms.norm_khat * sel.terms.norm_t * sel.terms.norm_inv_sqrt_m;
    for (const double v : values) {
      const double m_f = param == SweepParam::MF ? v : 1.0 / v;
      const ForcedEmbedding emb = build_embedding(sys, *sc.forcing, m_f);
      const EmbeddingReport rep = verify_embedding(emb, grid, std::numeric_limits<double>::infinity(), sc.integrator);
      const double ratio = c > 0.0 ? m_f / c : std::numeric_limits<double>::infinity();
      const double bound = ratio > 1.0 ? sel.terms.xi0 / (ratio - 1.0) : std::numeric_limits<double>::infinity();
      const bool pass = rep.max_error <= bound;
      all_pass = all_pass && pass;
      table.add_row({pname, format_number(v), nan, nan, format_number(sc.t), format_number(rep.max_error),
                     format_number(bound), pass ? "true" : "false", nan});
      xs.push_back(m_f);
      ys.push_back(rep.max_error);
    }
  }

  RunResult result;
  const auto path = out_dir / (sc.name + "_sweep_" + pname + ".csv");
  table.write(path);
  result.files.push_back(path);
  result.pass = all_pass;
  result.exit_code = all_pass ? kExitPass : kExitCheckFailed;
  std::string slope = "n/a";
  if (xs.size() >= 2 && std::all_of(ys.begin(), ys.end(), [](double y) { return y > 0.0; })) {
    slope = format_number(loglog_slope(xs, ys));
  }
  result.summary = fmt::format("{} sweep over {}: {} rows, log-log slope {}, {}", sc.name, pname, values.size(), slope,
                               all_pass ? "PASS" : "FAIL");
  return result;
}

RunResult validate_scenario(const Scenario& sc, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_vec = [&](Eigen::Index n) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
    return v;
  };
  constexpr int kProbes = 20;
  double worst = 0.0;
  std::string probe;

  switch (sc.pipeline) {
    case Pipeline::Linear:
    case Pipeline::Forced: {
      probe = "encode/decode round trip";
      const auto n = static_cast<Eigen::Index>(sc.masses.size());
      for (int i = 0; i < kProbes; ++i) {
        const OscillatorSystem s(sc.masses, sc.linear->stiffness_graph(), random_vec(n), random_vec(n));
        const QuantumEncoding enc = encode(s);
        const DecodedState d = decode(enc, enc.psi0);
        const double scale = std::max(1.0, s.x0().norm() + s.v0().norm());
        worst = std::max(worst, ((d.x - s.x0()).norm() + (d.v - s.v0()).norm()) / scale);
      }
      break;
    }
    case Pipeline::Nonlinear: {
      probe = "reduced right side against the oscillator ODE";
      const NLSReduction red = reduce_to_nls(*sc.nonlinear);
      const auto n = static_cast<Eigen::Index>(red.n);
      for (int i = 0; i < kProbes; ++i) {
        const Vec x = random_vec(n);
        const Vec v = random_vec(n);
        const CVec lhs = red.nls.rhs(red.encode(x, v));
        const CVec rhs = direct_derivative(red, *sc.nonlinear, x, v);
        worst = std::max(worst, (lhs - rhs).norm() / std::max(1.0, rhs.norm()));
      }
      break;
    }
    case Pipeline::TdStiffness:
    case Pipeline::TdForced: {
      probe = "closed-form auxiliary substitution";
      const auto n = static_cast<Eigen::Index>(sc.masses.size());
      const TDEmbedding emb = sc.forcing ? build_td_forced_embedding(sc.masses, *sc.td, *sc.forcing, sc.x0, sc.v0)
                                         : build_td_embedding(sc.masses, *sc.td, sc.x0, sc.v0);
      for (int i = 0; i < kProbes; ++i) worst = std::max(worst, symbolic_check(emb, random_vec(n), sc.t, 50));
      break;
    }
    case Pipeline::NlsDirect:
    case Pipeline::NlsCarleman: {
      probe = "first Carleman block against the NLS right side";
      const NLSSystem& nls = *sc.nls;
      const CarlemanGenerator gen = build_carleman_generator(nls, 2);
      const auto n = static_cast<Eigen::Index>(nls.dim());
      for (int i = 0; i < kProbes; ++i) {
        CVec psi(n);
        psi.real() = random_vec(n);
        psi.imag() = random_vec(n);
        const CVec lhs = (gen.c * gen.unroll(psi)).head(n);
        const CVec rhs = nls.rhs(psi);
        worst = std::max(worst, (lhs - rhs).norm() / std::max(1.0, rhs.norm()));
      }
      break;
    }
  }
  RunResult result;
  result.pass = worst <= 1e-9;
  result.exit_code = result.pass ? kExitPass : kExitCheckFailed;
  result.summary = fmt::format("{} [{}]: config ok; {} probes of {} (seed {}), worst relative defect {}: {}", sc.name,
                               pipeline_name(sc.pipeline), kProbes, probe, seed, format_number(worst),
                               result.pass ? "PASS" : "FAIL");
  return result;
}

}  // namespace oscq
