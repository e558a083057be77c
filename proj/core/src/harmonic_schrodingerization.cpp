#include "oscq/harmonic_schrodingerization.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "oscq/errors.hpp"

namespace oscq {

QuantumEncoding encode(const OscillatorSystem& system) {
  if (!system.positive_definite()) {
    raise(ErrorCode::SingularStiffness, "decoder needs a positive definite stiffness matrix");
  }
  const double e = system.energy();
  if (!(e > 0.0)) raise(ErrorCode::ZeroEnergy, "initial energy is zero");

  QuantumEncoding enc;
  enc.n = system.dim();
  enc.b = build_b_factor(system);
  enc.pairs = static_cast<std::size_t>(enc.b.cols());
  enc.energy = e;
  enc.inv_sqrt_mass = system.inv_sqrt_mass();

  const auto n = static_cast<Eigen::Index>(enc.n);
  const auto p = static_cast<Eigen::Index>(enc.pairs);
  enc.hamiltonian = CMat::Zero(n + p, n + p);
  enc.hamiltonian.topRightCorner(n, p) = -enc.b.cast<cplx>();
  enc.hamiltonian.bottomLeftCorner(p, n) = -enc.b.transpose().cast<cplx>();

  const Vec sqrt_m = system.sqrt_mass();
  const Vec w0 = sqrt_m.cwiseProduct(system.x0());
  const Vec wdot0 = sqrt_m.cwiseProduct(system.v0());
  const double scale = 1.0 / std::sqrt(2.0 * e);
  enc.psi0.resize(n + p);
  enc.psi0.head(n) = wdot0.cast<cplx>() * scale;
  enc.psi0.tail(p) = (enc.b.transpose() * w0).cast<cplx>() * (I_UNIT * scale);

  const Mat a = enc.b * enc.b.transpose();
  enc.a_inv_b = a.llt().solve(enc.b);
  return enc;
}

CVec evolve_hermitian(const CMat& h, const CVec& psi0, double t) {
  if (!is_hermitian(h)) raise(ErrorCode::NotHermitian, "Hamiltonian is not Hermitian");
  if (t == 0.0) return psi0;
  return HermitianPropagator(h).apply(psi0, t);
}

DecodedState decode(const QuantumEncoding& enc, const CVec& psi_t) {
  const auto n = static_cast<Eigen::Index>(enc.n);
  const auto p = static_cast<Eigen::Index>(enc.pairs);
  if (psi_t.size() != n + p) raise(ErrorCode::DimensionMismatch, "state length does not match the encoding");
  const double scale = std::sqrt(2.0 * enc.energy);
  const Vec wdot = psi_t.head(n).real() * scale;
  // Lower block is i·B†w, so B†w = −i·(lower block).
  const Vec bt_w = (-I_UNIT * psi_t.tail(p)).real() * scale;
  const Vec w = enc.a_inv_b * bt_w;
  return {enc.inv_sqrt_mass.cwiseProduct(w), enc.inv_sqrt_mass.cwiseProduct(wdot)};
}

Trajectory simulate_harmonic(const QuantumEncoding& enc, const std::vector<double>& t_grid) {
  if (!is_hermitian(enc.hamiltonian)) raise(ErrorCode::NotHermitian, "Hamiltonian is not Hermitian");
  const auto n = static_cast<Eigen::Index>(enc.n);
  const auto p = static_cast<Eigen::Index>(enc.pairs);

  // H = -[[0, B], [B^T, 0]] is block off-diagonal, so with B = U S V^T the
  // propagator acts as a rotation on each singular pair and as the identity
  // on the complement of range(V). This avoids diagonalizing all n + p rows.
  const Eigen::BDCSVD<Mat> svd(enc.b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const CMat u = svd.matrixU().cast<cplx>();
  const CMat v = svd.matrixV().cast<cplx>();
  const Vec sigma = svd.singularValues();
  const CVec top0 = enc.psi0.head(n);
  const CVec bottom0 = enc.psi0.tail(p);
  const CVec ua = u.adjoint() * top0;
  const CVec vb = v.adjoint() * bottom0;
  const CVec kernel_part = bottom0 - v * vb;

  Trajectory tr;
  tr.kind = TrajectoryKind::PositionVelocity;
  tr.dim = enc.n;
  tr.times = t_grid;
  tr.real_states.resize(static_cast<Eigen::Index>(t_grid.size()), 2 * n);
  CVec psi(n + p);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    if (t == 0.0) {
      psi = enc.psi0;
    } else {
      CVec c(sigma.size()), s(sigma.size());
      for (Eigen::Index j = 0; j < sigma.size(); ++j) {
        const double cs = std::cos(sigma(j) * t);
        const double sn = std::sin(sigma(j) * t);
        c(j) = cs * ua(j) + I_UNIT * sn * vb(j);
        s(j) = I_UNIT * sn * ua(j) + cs * vb(j);
      }
      psi.head(n) = u * c;
      psi.tail(p) = v * s + kernel_part;
    }
    const DecodedState d = decode(enc, psi);
    tr.real_states.row(static_cast<Eigen::Index>(i)) << d.x.transpose(), d.v.transpose();
  }
  return tr;
}

}  // namespace oscq
