#include "oscq/linalg.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>

#include "oscq/errors.hpp"

namespace oscq {

Mat kron(const Mat& a, const Mat& b) { return Eigen::kroneckerProduct(a, b).eval(); }
CMat kron(const CMat& a, const CMat& b) { return Eigen::kroneckerProduct(a, b).eval(); }
Vec kron(const Vec& a, const Vec& b) { return Eigen::kroneckerProduct(a, b).eval(); }
CVec kron(const CVec& a, const CVec& b) { return Eigen::kroneckerProduct(a, b).eval(); }

CVec kron_power(const CVec& v, int power) {
  CVec out = CVec::Ones(1);
  for (int p = 0; p < power; ++p) out = kron(out, v);
  return out;
}

namespace {

CMat identity_power(std::size_t n, int copies) {
  std::size_t dim = 1;
  for (int c = 0; c < copies; ++c) dim *= n;
  return CMat::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

}  // namespace

CMat kronecker_sum(const CMat& h, int copies) {
  const auto n = static_cast<std::size_t>(h.rows());
  CMat total;
  for (int j = 1; j <= copies; ++j) {
    CMat term = kron(kron(identity_power(n, copies - j), h), identity_power(n, j - 1));
    if (j == 1) {
      total = std::move(term);
    } else {
      total += term;
    }
  }
  return total;
}

CMat kronecker_lift(const CMat& r, std::size_t n, int copies) {
  CMat total;
  for (int j = 1; j <= copies; ++j) {
    CMat term = kron(kron(identity_power(n, copies - j), r), identity_power(n, j - 1));
    if (j == 1) {
      total = std::move(term);
    } else {
      total += term;
    }
  }
  return total;
}

double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

double spectral_norm(const CMat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<CMat> svd(a);
  return svd.singularValues()(0);
}

double max_abs_entry(const Mat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }
double max_abs_entry(const CMat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

namespace {

template <typename M>
int sparsity_impl(const M& a, double zero_tol) {
  int best = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    int count = 0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) count += std::abs(a(i, j)) > zero_tol ? 1 : 0;
    best = std::max(best, count);
  }
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    int count = 0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) count += std::abs(a(i, j)) > zero_tol ? 1 : 0;
    best = std::max(best, count);
  }
  return best;
}

}  // namespace

int sparsity(const Mat& a, double zero_tol) { return sparsity_impl(a, zero_tol); }
int sparsity(const CMat& a, double zero_tol) { return sparsity_impl(a, zero_tol); }

double hermiticity_defect(const CMat& h) { return (h - h.adjoint()).norm(); }

bool is_hermitian(const CMat& h, double rel_tol) {
  if (h.rows() != h.cols()) return false;
  const double scale = std::max(h.norm(), 1e-300);
  return hermiticity_defect(h) <= rel_tol * scale;
}

Mat sym_sqrt(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  Vec roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

Mat sym_inv_sqrt(const Mat& a, double floor) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  if (es.eigenvalues().minCoeff() <= floor) {
    raise(ErrorCode::SingularStiffness, "matrix is not positive definite");
  }
  Vec inv = es.eigenvalues().cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

CMat herm_sqrt_psd(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(a);
  Vec roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

double min_eigenvalue(const Mat& sym) {
  if (sym.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

HermitianPropagator::HermitianPropagator(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  evals_ = es.eigenvalues();
  evecs_ = es.eigenvectors();
}

CVec HermitianPropagator::apply(const CVec& psi0, double t) const {
  if (psi0.size() != evals_.size()) {
    raise(ErrorCode::DimensionMismatch, "state length does not match the Hamiltonian");
  }
  CVec coeffs = evecs_.adjoint() * psi0;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    coeffs(i) *= std::exp(-I_UNIT * (evals_(i) * t));
  }
  return evecs_ * coeffs;
}

}  // namespace oscq
