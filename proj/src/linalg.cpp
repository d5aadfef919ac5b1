#include "linalg.hpp"

#include <cmath>
#include <stdexcept>

#include "errors.hpp"

namespace sdefit {

Vector vectorize(const Matrix& x) {
  return Eigen::Map<const Vector>(x.data(), x.size());
}

Matrix unvectorize(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols)
    throw std::invalid_argument("unvectorize: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix kron_sum(const Matrix& a, const Matrix& b) {
  const bool square = a.rows() == a.cols() && b.rows() == b.cols();
  if (square && a.rows() == b.rows()) {
    const Matrix id = Matrix::Identity(a.rows(), a.rows());
    return kron(a, id) + kron(id, b);
  }
  const bool vectors = a.cols() == 1 && b.cols() == 1;
  if (vectors && a.rows() == b.rows()) {
    const Matrix id = Matrix::Identity(a.rows(), a.rows());
    return kron(a, id) + kron(id, b);
  }
  throw std::invalid_argument(
      "kron_sum: arguments must be two equal-size square matrices or two "
      "equal-length vectors");
}

Matrix expm(const Matrix& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("expm: matrix must be square");
  if (!a.allFinite())
    throw NumericError("expm: non-finite input");

  const Eigen::Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5)
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));

  const Matrix as = a / std::ldexp(1.0, squarings);

  // Diagonal Padé [6/6]: c_k = 6!(12-k)! / (12! k! (6-k)!).
  static const double c[7] = {1.0,        1.0 / 2.0,     5.0 / 44.0, 1.0 / 66.0,
                              1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};
  const Matrix a2 = as * as;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const Matrix u = as * (c[1] * id + c[3] * a2 + c[5] * a4);
  const Matrix v = c[0] * id + c[2] * a2 + c[4] * a4 + c[6] * a6;

  Matrix r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) {
    r = r * r;
    if (!r.allFinite())
      throw NumericError("expm: overflow while squaring");
  }
  return r;
}

Matrix psd_repair(const Matrix& s, double jitter) {
  if (s.rows() != s.cols())
    throw std::invalid_argument("psd_repair: matrix must be square");
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success)
    throw NumericError("psd_repair: eigendecomposition failed");
  const Vector ev = es.eigenvalues().cwiseMax(0.0);
  Matrix out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  out = 0.5 * (out + out.transpose());
  if (jitter > 0.0)
    out += jitter * Matrix::Identity(s.rows(), s.cols());
  return out;
}

} // namespace sdefit
