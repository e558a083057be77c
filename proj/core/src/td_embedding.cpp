#include "oscq/td_embedding.hpp"

#include <algorithm>
#include <cmath>

#include "oscq/errors.hpp"

namespace oscq {

std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n) {
  if (i < 1 || i > j || j > n) raise(ErrorCode::OutOfRange, "pair index needs 1 <= i <= j <= n");
  return pair_column(i - 1, j - 1, n);
}

std::pair<std::size_t, std::size_t> pair_from_index(std::size_t index, std::size_t n) {
  if (index >= pair_count(n)) raise(ErrorCode::OutOfRange, "pair index beyond the pair count");
  std::size_t i = 0;
  while (index >= n - i) {
    index -= n - i;
    ++i;
  }
  return {i + 1, i + index + 1};
}

std::size_t register_swap(std::size_t index, std::size_t d) { return (index % d) * d + index / d; }

Mat apply_register_swap(const Mat& k2, std::size_t d) {
  if (static_cast<std::size_t>(k2.cols()) != d * d) raise(ErrorCode::DimensionMismatch, "register swap size");
  Mat out(k2.rows(), k2.cols());
  for (std::size_t c = 0; c < d * d; ++c) {
    out.col(static_cast<Eigen::Index>(c)) = k2.col(static_cast<Eigen::Index>(register_swap(c, d)));
  }
  return out;
}

double AuxiliaryOscillator::value(double t) const { return amplitude * std::cos(omega * t + phase); }

double AuxiliaryOscillator::rate(double t) const { return -amplitude * omega * std::sin(omega * t + phase); }

Vec TDEmbedding::closed_form_state(const Vec& x, double t) const {
  Vec z = Vec::Zero(static_cast<Eigen::Index>(dim()));
  z.head(static_cast<Eigen::Index>(n)) = x;
  for (const auto& aux : auxiliaries) z(static_cast<Eigen::Index>(aux.index)) = aux.value(t);
  if (forcing) z(static_cast<Eigen::Index>(p_offset)) = 1.0;
  return z;
}

namespace {

struct Layout {
  std::size_t n, slots, forced_slots, y_offset, w_offset, p_offset, dim;
};

Layout make_layout(std::size_t n, std::size_t terms, const ForcingSpec* forcing) {
  Layout lay{};
  lay.n = n;
  lay.slots = std::max(n, terms);
  lay.y_offset = n;
  lay.w_offset = n + pair_count(n) * lay.slots;
  lay.forced_slots = forcing ? std::max(n, forcing->terms_per_mass()) : 0;
  lay.p_offset = lay.w_offset + n * lay.forced_slots;
  lay.dim = lay.p_offset + (forcing ? n : 0);
  return lay;
}

TDEmbedding assemble(const Vec& masses, const TimeDependentStiffnessSpec& td, const ForcingSpec* forcing,
                     const Vec& x0, const Vec& v0) {
  const std::size_t n = td.dim();
  if (static_cast<std::size_t>(masses.size()) != n || static_cast<std::size_t>(x0.size()) != n ||
      static_cast<std::size_t>(v0.size()) != n) {
    raise(ErrorCode::DimensionMismatch, "embedding inputs disagree in size");
  }
  if (forcing && forcing->dim() != n) raise(ErrorCode::DimensionMismatch, "forcing length differs");
  const Layout lay = make_layout(n, td.terms_per_pair(), forcing);
  const auto d = static_cast<Eigen::Index>(lay.dim);
  auto col = [&](std::size_t a, std::size_t b) { return static_cast<Eigen::Index>(a * lay.dim + b); };

  Vec m_enl = Vec::Ones(d);
  m_enl.head(static_cast<Eigen::Index>(n)) = masses;
  Mat k1 = Mat::Zero(d, d);
  Mat k2 = Mat::Zero(d, d * d);
  Vec z0 = Vec::Zero(d);
  Vec zd0 = Vec::Zero(d);
  z0.head(static_cast<Eigen::Index>(n)) = x0;
  zd0.head(static_cast<Eigen::Index>(n)) = v0;
  std::vector<AuxiliaryOscillator> aux;

  for (std::size_t i = 0; i < n; ++i) {
    k1(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = td.pair(i, i).constant;
  }
  auto add_aux = [&](std::size_t idx, const FourierTerm* term) {
    AuxiliaryOscillator a;
    a.index = idx;
    if (term) {
      if (!(term->omega > 0.0)) raise(ErrorCode::ZeroFrequency, "auxiliary frequencies must be positive");
      a.amplitude = term->amplitude == 0.0 ? 0.0 : 1.0;
      a.omega = term->omega;
      a.phase = term->phase;
    }
    const auto e = static_cast<Eigen::Index>(idx);
    k1(e, e) = a.omega * a.omega;
    z0(e) = a.value(0.0);
    zd0(e) = a.rate(0.0);
    aux.push_back(a);
  };

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const std::size_t p = pair_column(i, j, n);
      const auto& spec = td.pair(i, j);
      for (std::size_t l = 0; l < lay.slots; ++l) {
        const std::size_t y = lay.y_offset + p * lay.slots + l;
        const FourierTerm* term = l < spec.terms.size() ? &spec.terms[l] : nullptr;
        add_aux(y, term);
        if (!term || term->amplitude == 0.0) continue;
        const double alpha = term->amplitude;
        const auto ri = static_cast<Eigen::Index>(i);
        const auto rj = static_cast<Eigen::Index>(j);
        k2(ri, col(i, y)) -= alpha;
        if (i != j) {
          k2(ri, col(j, y)) += alpha;
          k2(rj, col(j, y)) -= alpha;
          k2(rj, col(i, y)) += alpha;
        }
      }
    }
  }

  if (forcing) {
    for (std::size_t k = 0; k < n; ++k) {
      const auto& terms = forcing->terms()[k];
      for (std::size_t l = 0; l < lay.forced_slots; ++l) {
        const std::size_t w = lay.w_offset + k * lay.forced_slots + l;
        const FourierTerm* term = l < terms.size() ? &terms[l] : nullptr;
        add_aux(w, term);
        if (!term || term->amplitude == 0.0) continue;
        // p stays at e₁, so p₁·w acts as a linear drive on mass k.
        k2(static_cast<Eigen::Index>(k), col(lay.p_offset, w)) += term->amplitude;
      }
    }
    z0(static_cast<Eigen::Index>(lay.p_offset)) = 1.0;
  }

  // The enlarged energy bound is the initial energy of z; only dynamics are needed downstream.
  TDEmbedding emb{NonlinearOscillatorSystem(m_enl, k1, k2, z0, zd0), td,
                  forcing ? std::optional<ForcingSpec>(*forcing) : std::nullopt,
                  n, lay.slots, lay.forced_slots, lay.y_offset, lay.w_offset, lay.p_offset, std::move(aux)};
  return emb;
}

}  // namespace

TDEmbedding build_td_embedding(const Vec& masses, const TimeDependentStiffnessSpec& td, const Vec& x0,
                               const Vec& v0) {
  return assemble(masses, td, nullptr, x0, v0);
}

TDEmbedding build_td_forced_embedding(const Vec& masses, const TimeDependentStiffnessSpec& td,
                                      const ForcingSpec& forcing, const Vec& x0, const Vec& v0) {
  return assemble(masses, td, &forcing, x0, v0);
}

double symbolic_check(const TDEmbedding& emb, const Vec& x_probe, double horizon, int samples) {
  const auto n = static_cast<Eigen::Index>(emb.n);
  if (x_probe.size() != n) raise(ErrorCode::DimensionMismatch, "probe vector length differs");
  double worst = 0.0;
  for (const double t : linspace(0.0, horizon, static_cast<std::size_t>(std::max(samples, 2)))) {
    const Vec z = emb.closed_form_state(x_probe, t);
    const Vec lhs = (-emb.enlarged.k1() * z + emb.enlarged.k2() * kron(z, z)).head(n);
    Vec rhs = -(emb.td.incidence_at(t) * x_probe);
    if (emb.forcing) rhs += emb.forcing->evaluate(t);
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

TDVerification verify_td_embedding(const TDEmbedding& emb, const Trajectory& reference,
                                   const std::vector<double>& t_grid, const IntegratorConfig& cfg) {
  if (reference.size() != t_grid.size() || reference.dim != emb.n) {
    raise(ErrorCode::DimensionMismatch, "reference trajectory does not match the embedding");
  }
  TDVerification rep;
  rep.times = t_grid;
  rep.enlarged_trajectory = integrate_nonlinear(emb.enlarged, t_grid, cfg);
  const Eigen::Index p = static_cast<Eigen::Index>(emb.p_offset);
  for (std::size_t r = 0; r < t_grid.size(); ++r) {
    const Vec z = rep.enlarged_trajectory.x(r);
    const double err = (emb.project(z) - reference.x(r)).norm();
    rep.errors.push_back(err);
    rep.max_x_error = std::max(rep.max_x_error, err);
    for (const auto& aux : emb.auxiliaries) {
      rep.max_aux_error = std::max(rep.max_aux_error,
                                   std::abs(z(static_cast<Eigen::Index>(aux.index)) - aux.value(t_grid[r])));
    }
    if (emb.forcing) {
      Vec e1 = Vec::Zero(static_cast<Eigen::Index>(emb.n));
      e1(0) = 1.0;
      rep.p_drift = std::max(rep.p_drift, (z.segment(p, static_cast<Eigen::Index>(emb.n)) - e1).norm());
    }
  }
  rep.pass = rep.max_x_error <= kTdSubspaceTol && rep.max_aux_error <= kTdAuxTol && rep.p_drift <= kTdRegisterTol;
  return rep;
}

}  // namespace oscq
