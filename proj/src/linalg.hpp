#ifndef SDEFIT_LINALG_HPP
#define SDEFIT_LINALG_HPP

#include <Eigen/Dense>

namespace sdefit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Column-major vectorization: vec(X) stacks the columns of X top to bottom.
/// This orientation is fixed project-wide; it is what makes
/// vec(A X B) = kron(Bᵀ, A) vec(X) hold for kron() below.
Vector vectorize(const Matrix& x);

/// Inverse of vectorize for a rows×cols target.
Matrix unvectorize(const Vector& v, Eigen::Index rows, Eigen::Index cols);

/// Kronecker product, block (i,j) = a(i,j)·B.
Matrix kron(const Matrix& a, const Matrix& b);

/// Kronecker sum. Both arguments square of equal size d:
///   A ⊕ B = A⊗I_d + I_d⊗B            (d²×d²)
/// or both d-column-vectors:
///   a ⊕ b = a⊗I_d + I_d⊗b            (d²×d)
/// Mixed vector/matrix arguments are rejected.
Matrix kron_sum(const Matrix& a, const Matrix& b);

/// Matrix exponential by diagonal Padé approximation of order 6 with
/// scaling and squaring; the scaled 1-norm is brought below 0.5 before the
/// Padé evaluation. Throws NumericError if the result overflows while
/// squaring or the input is not finite.
Matrix expm(const Matrix& a);

/// Nearest-PSD repair: symmetrize, clip eigenvalues at zero, add jitter·I.
/// Idempotent (to roundoff) on PSD inputs with jitter = 0.
Matrix psd_repair(const Matrix& s, double jitter);

} // namespace sdefit

#endif
