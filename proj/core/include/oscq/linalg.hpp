#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>

namespace oscq {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr cplx I_UNIT{0.0, 1.0};

Mat kron(const Mat& a, const Mat& b);
CMat kron(const CMat& a, const CMat& b);
Vec kron(const Vec& a, const Vec& b);
CVec kron(const CVec& a, const CVec& b);

// v ⊗ v ⊗ ... (power copies); power 0 gives the scalar 1.
CVec kron_power(const CVec& v, int power);

// Σ_{j=1..i} I^{⊗(i−j)} ⊗ H ⊗ I^{⊗(j−1)} for square H.
CMat kronecker_sum(const CMat& h, int copies);

// Σ_{j=1..i} I^{⊗(i−j)} ⊗ R ⊗ I^{⊗(j−1)} for rectangular R (n × n²),
// mapping n^{i+1} → n^i.
CMat kronecker_lift(const CMat& r, std::size_t n, int copies);

double spectral_norm(const Mat& a);
double spectral_norm(const CMat& a);

double max_abs_entry(const Mat& a);
double max_abs_entry(const CMat& a);

// Maximum count of entries above `zero_tol` in any row or column.
int sparsity(const Mat& a, double zero_tol = 0.0);
int sparsity(const CMat& a, double zero_tol = 0.0);

bool is_hermitian(const CMat& h, double rel_tol = 1e-12);
double hermiticity_defect(const CMat& h);

// Principal square root and inverse square root of a symmetric PSD matrix.
// Eigenvalues below `floor` are clamped to zero in the square root; the
// inverse square root rejects them.
Mat sym_sqrt(const Mat& a);
Mat sym_inv_sqrt(const Mat& a, double floor);
CMat herm_sqrt_psd(const CMat& a);

double min_eigenvalue(const Mat& sym);

// Cached eigendecomposition H = VΛV† used for repeated e^{−iHt} products.
class HermitianPropagator {
 public:
  explicit HermitianPropagator(const CMat& h);
  CVec apply(const CVec& psi0, double t) const;
  const Vec& eigenvalues() const { return evals_; }
  std::size_t dim() const { return static_cast<std::size_t>(evals_.size()); }

 private:
  Vec evals_;
  CMat evecs_;
};

}  // namespace oscq
