#include "fracspace/spectral_core.hpp"

#include "fracspace/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace fracspace {

namespace {

std::uint64_t next_model_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

void check_coeffs(const SpectralModel& model, const CoeffVector& u) {
  if (u.coeffs.size() != model.dim())
    throw Error(ErrorCode::DimensionMismatch, "coefficient vector has length " +
                                                  std::to_string(u.coeffs.size()) + ", model dim " +
                                                  std::to_string(model.dim()));
  if (u.model_id != 0 && u.model_id != model.id())
    throw Error(ErrorCode::DimensionMismatch, "coefficients belong to a different model");
}

}  // namespace

SpectralModel SpectralModel::build(Vector eigenvalues, Matrix basis,
                                   std::optional<Matrix> ambient_gram) {
  const Eigen::Index n = eigenvalues.size();
  if (n == 0) throw Error(ErrorCode::DimensionMismatch, "empty spectrum");
  if (basis.cols() != n)
    throw Error(ErrorCode::DimensionMismatch, "basis has " + std::to_string(basis.cols()) +
                                                  " columns for " + std::to_string(n) +
                                                  " eigenvalues");
  if (ambient_gram && (ambient_gram->rows() != basis.rows() || ambient_gram->cols() != basis.rows()))
    throw Error(ErrorCode::DimensionMismatch, "ambient Gram does not match basis rows");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(eigenvalues[j] > 0.0) || !std::isfinite(eigenvalues[j]))
      throw Error(ErrorCode::NonPositiveEigenvalue,
                  "eigenvalue " + std::to_string(j) + " = " + std::to_string(eigenvalues[j]));
  }
  const double defect = orthonormality_defect(basis, ambient_gram);
  if (!(defect <= kOrthonormalTol))
    throw Error(ErrorCode::NotOrthonormal, "Gram deviation " + std::to_string(defect));

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return eigenvalues[a] < eigenvalues[b]; });

  SpectralModel m;
  m.eigenvalues_.resize(n);
  m.basis_.resize(basis.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    m.eigenvalues_[j] = eigenvalues[order[j]];
    m.basis_.col(j) = basis.col(order[j]);
  }
  m.gram_ = std::move(ambient_gram);
  m.id_ = next_model_id();
  return m;
}

SpectralModel SpectralModel::diagonal(Vector eigenvalues) {
  const auto n = eigenvalues.size();
  return build(std::move(eigenvalues), Matrix::Identity(n, n));
}

SpectralModel SpectralModel::with_power(double power) const {
  SpectralModel m = *this;
  m.eigenvalues_ = eigenvalues_.array().pow(power).matrix();
  m.id_ = next_model_id();
  return m;
}

CoeffVector make_coeffs(const SpectralModel& model, Vector coeffs) {
  CoeffVector u{std::move(coeffs), model.id()};
  check_coeffs(model, u);
  return u;
}

CoeffVector to_coeffs(const SpectralModel& model, const Vector& ambient_vector) {
  if (ambient_vector.size() != model.ambient_dim())
    throw Error(ErrorCode::DimensionMismatch, "ambient vector has length " +
                                                  std::to_string(ambient_vector.size()) +
                                                  ", expected " +
                                                  std::to_string(model.ambient_dim()));
  const auto& gram = model.ambient_gram();
  Vector c = gram ? Vector(model.basis().transpose() * ((*gram) * ambient_vector))
                  : Vector(model.basis().transpose() * ambient_vector);
  return CoeffVector{std::move(c), model.id()};
}

Vector from_coeffs(const SpectralModel& model, const CoeffVector& u) {
  check_coeffs(model, u);
  return model.basis() * u.coeffs;
}

CoeffVector apply_fractional_power(const SpectralModel& model, double alpha, const CoeffVector& u) {
  check_coeffs(model, u);
  if (alpha == 0.0) return CoeffVector{u.coeffs, model.id()};
  Vector c = model.eigenvalues().array().pow(alpha) * u.coeffs.array();
  return CoeffVector{std::move(c), model.id()};
}

double frac_inner(const SpectralModel& model, double alpha, const CoeffVector& u,
                  const CoeffVector& v) {
  check_coeffs(model, u);
  check_coeffs(model, v);
  const auto& lam = model.eigenvalues();
  double s = 0.0;
  for (Eigen::Index j = 0; j < model.dim(); ++j) s += std::pow(lam[j], 2.0 * alpha) * u.coeffs[j] * v.coeffs[j];
  return s;
}

double frac_norm(const SpectralModel& model, double alpha, const CoeffVector& u) {
  check_coeffs(model, u);
  const auto& lam = model.eigenvalues();
  // scaled sum of squares to avoid overflow for large |alpha|
  double scale = 0.0, ssq = 1.0;
  for (Eigen::Index j = 0; j < model.dim(); ++j) {
    const double a = std::abs(std::pow(lam[j], alpha) * u.coeffs[j]);
    if (a == 0.0) continue;
    if (scale < a) {
      ssq = 1.0 + ssq * (scale / a) * (scale / a);
      scale = a;
    } else {
      ssq += (a / scale) * (a / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

VerificationReport higher_power_decomposition_check(const SpectralModel& model, double alpha,
                                                    double beta, const CoeffVector& u) {
  if (alpha < 0.0 || beta < alpha)
    throw Error(ErrorCode::InvalidExponentOrder,
                "need beta >= alpha >= 0, got alpha=" + std::to_string(alpha) +
                    " beta=" + std::to_string(beta));
  const double direct = frac_norm(model, beta, u);
  const double stepped = frac_norm(model, alpha, apply_fractional_power(model, beta - alpha, u));
  const double diff = std::abs(direct - stepped);
  const double tol = 1e-10 * direct;

  VerificationReport r;
  r.experiment = "higher-power";
  r.add_cell({{"alpha", alpha},
              {"beta", beta},
              {"norm_beta", direct},
              {"norm_alpha_of_power", stepped},
              {"abs_diff", diff}},
             tol, diff <= tol);
  return r;
}

namespace {

json matrix_rows(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_rows(const json& rows) {
  if (!rows.is_array()) throw Error(ErrorCode::InvalidConfig, "matrix must be an array of rows");
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(rows[0].size());
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (!rows[i].is_array() || static_cast<Eigen::Index>(rows[i].size()) != c)
      throw Error(ErrorCode::InvalidConfig, "ragged matrix row " + std::to_string(i));
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidConfig, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace

json to_json(const SpectralModel& model) {
  json j;
  j["eigenvalues"] = std::vector<double>(model.eigenvalues().data(),
                                         model.eigenvalues().data() + model.dim());
  j["basis"] = matrix_rows(model.basis());
  j["ambient_gram"] = model.ambient_gram() ? matrix_rows(*model.ambient_gram()) : json(nullptr);
  return j;
}

SpectralModel spectral_model_from_json(const json& j) {
  try {
    std::optional<Matrix> gram;
    if (j.contains("ambient_gram") && !j.at("ambient_gram").is_null())
      gram = matrix_from_rows(j.at("ambient_gram"));
    return SpectralModel::build(vector_from_json(j.at("eigenvalues")),
                                matrix_from_rows(j.at("basis")), std::move(gram));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("spectral model JSON: ") + e.what());
  }
}

json to_json(const CoeffVector& u) {
  return json{{"coeffs", std::vector<double>(u.coeffs.data(), u.coeffs.data() + u.coeffs.size())}};
}

CoeffVector coeff_vector_from_json(const json& j) {
  try {
    return CoeffVector{vector_from_json(j.at("coeffs")), 0};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("coeff vector JSON: ") + e.what());
  }
}

}  // namespace fracspace
