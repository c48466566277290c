#include "fracspace/linalg.hpp"

#include <cmath>

namespace fracspace {

double asymmetry(const Matrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

double orthonormality_defect(const Matrix& q, const std::optional<Matrix>& gram) {
  const Matrix g = gram ? Matrix(q.transpose() * (*gram) * q) : Matrix(q.transpose() * q);
  return (g - Matrix::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

Matrix gram_schmidt(const Matrix& columns, const std::optional<Matrix>& gram) {
  Matrix q = columns;
  // gq caches G q_j for finished columns so each projection is O(rows)
  Matrix gq(q.rows(), q.cols());
  for (Eigen::Index k = 0; k < q.cols(); ++k) {
    Vector v = q.col(k);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < k; ++j) v -= gq.col(j).dot(v) * q.col(j);
    }
    Vector gv = gram ? Vector((*gram) * v) : v;
    const double nrm = std::sqrt(v.dot(gv));
    q.col(k) = v / nrm;
    gq.col(k) = gv / nrm;
  }
  return q;
}

bool is_positive_definite(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  return llt.info() == Eigen::Success;
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform(double lo, double hi) {
  // 53 high bits -> [0, 1)
  const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

Vector Rng::uniform_vector(Eigen::Index n, double lo, double hi) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
  return v;
}

}  // namespace fracspace
