#include "fracspace/discrete_operators.hpp"

#include "fracspace/error.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

namespace fracspace {

GridDomain GridDomain::make(int dimension, int n) {
  if (dimension != 1 && dimension != 2)
    throw Error(ErrorCode::InvalidGrid, "dimension must be 1 or 2, got " + std::to_string(dimension));
  if (n < 2) throw Error(ErrorCode::InvalidGrid, "need n >= 2, got " + std::to_string(n));
  const int cap = dimension == 1 ? kMax1d : kMax2d;
  if (n > cap)
    throw Error(ErrorCode::InvalidGrid,
                "n = " + std::to_string(n) + " exceeds the cap " + std::to_string(cap));
  return GridDomain{dimension, n, 1.0 / (n + 1)};
}

Eigen::Index GridDomain::interior_count() const {
  return dimension == 1 ? Eigen::Index{n} : Eigen::Index{n} * n;
}

Eigen::Index GridDomain::node_count() const {
  const Eigen::Index m = n + 2;
  return dimension == 1 ? m : m * m;
}

SpectralModel symmetric_model(const Matrix& op) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(op);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::EigensolveFailure, "symmetric eigensolve failed");
  return SpectralModel::build(es.eigenvalues(), es.eigenvectors());
}

SpectralModel laplacian_1d_analytic(int n_modes, int grid_intervals) {
  if (n_modes < 1) throw Error(ErrorCode::InvalidGrid, "need at least one mode");
  const int m = grid_intervals > 0 ? grid_intervals : std::max(16, 4 * n_modes);
  if (m <= n_modes)
    throw Error(ErrorCode::InvalidGrid, "grid_intervals must exceed n_modes");
  const double h = 1.0 / m;
  Matrix mass = Matrix::Zero(m + 1, m + 1);
  for (int i = 0; i <= m; ++i) mass(i, i) = (i == 0 || i == m) ? 0.5 * h : h;

  Matrix basis(m + 1, n_modes);
  Vector lam(n_modes);
  for (int k = 1; k <= n_modes; ++k) {
    lam[k - 1] = (k * std::numbers::pi) * (k * std::numbers::pi);
    for (int i = 0; i <= m; ++i)
      basis(i, k - 1) = std::numbers::sqrt2 * std::sin(k * std::numbers::pi * i * h);
  }
  Matrix q = gram_schmidt(basis, mass);
  return SpectralModel::build(std::move(lam), std::move(q), std::move(mass));
}

Matrix laplacian_fd_matrix(const GridDomain& domain) {
  const int n = domain.n;
  const double s = 1.0 / (domain.h * domain.h);
  Matrix t = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    t(i, i) = 2.0 * s;
    if (i > 0) t(i, i - 1) = -s;
    if (i + 1 < n) t(i, i + 1) = -s;
  }
  if (domain.dimension == 1) return t;
  // Kronecker sum T (x) I + I (x) T, index = j * n + i
  const Eigen::Index nn = Eigen::Index{n} * n;
  Matrix a = Matrix::Zero(nn, nn);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Eigen::Index r = Eigen::Index{j} * n + i;
      for (int k = 0; k < n; ++k) {
        if (t(i, k) != 0.0) a(r, Eigen::Index{j} * n + k) += t(i, k);
        if (t(j, k) != 0.0) a(r, Eigen::Index{k} * n + i) += t(j, k);
      }
    }
  return a;
}

SpectralModel laplacian_fd(const GridDomain& domain) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(laplacian_fd_matrix(domain));
  if (es.info() != Eigen::Success) throw Error(ErrorCode::EigensolveFailure, "FD Laplacian eigensolve failed");
  const double cell = domain.dimension == 1 ? domain.h : domain.h * domain.h;
  const Eigen::Index n = es.eigenvalues().size();
  Matrix gram = cell * Matrix::Identity(n, n);
  return SpectralModel::build(es.eigenvalues(), es.eigenvectors() / std::sqrt(cell), std::move(gram));
}

// ------------------------------------------------------------ Sobolev forms

std::vector<Eigen::Index> SobolevGrams::interior_nodes() const {
  const int m = domain.n + 2;
  std::vector<Eigen::Index> idx;
  if (domain.dimension == 1) {
    for (int i = 1; i <= domain.n; ++i) idx.push_back(i);
  } else {
    for (int j = 1; j <= domain.n; ++j)
      for (int i = 1; i <= domain.n; ++i) idx.push_back(Eigen::Index{j} * m + i);
  }
  return idx;
}

Matrix SobolevGrams::interior_basis() const {
  const auto idx = interior_nodes();
  Matrix z = Matrix::Zero(g0.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k], static_cast<Eigen::Index>(k)) = 1.0;
  return z;
}

namespace {

// Accumulates weight * (sum_k c_k u_{i_k})^2 into a Gram matrix.
void add_stencil(Matrix& g, double weight, std::initializer_list<std::pair<Eigen::Index, double>> st) {
  for (const auto& [i, ci] : st)
    for (const auto& [j, cj] : st) g(i, j) += weight * ci * cj;
}

}  // namespace

SobolevGrams sobolev_grams(const GridDomain& domain) {
  const double h = domain.h;
  const int m = domain.n + 2;  // nodes per axis
  const Eigen::Index nodes = domain.node_count();
  SobolevGrams g;
  g.domain = domain;
  g.g0 = Matrix::Zero(nodes, nodes);
  g.stiffness = Matrix::Zero(nodes, nodes);
  Matrix second = Matrix::Zero(nodes, nodes);

  if (domain.dimension == 1) {
    for (int i = 0; i < m; ++i) g.g0(i, i) = (i == 0 || i == m - 1) ? 0.5 * h : h;
    for (int i = 0; i + 1 < m; ++i) add_stencil(g.stiffness, 1.0 / h, {{i, -1.0}, {i + 1, 1.0}});
    const double w = h / (h * h * h * h);
    for (int i = 1; i + 1 < m; ++i) add_stencil(second, w, {{i - 1, 1.0}, {i, -2.0}, {i + 1, 1.0}});
  } else {
    auto id = [m](int i, int j) { return Eigen::Index{j} * m + i; };
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) {
        const double wx = (i == 0 || i == m - 1) ? 0.5 : 1.0;
        const double wy = (j == 0 || j == m - 1) ? 0.5 : 1.0;
        g.g0(id(i, j), id(i, j)) = wx * wy * h * h;
      }
    // h^2 |du/h|^2 = |du|^2 per edge
    for (int j = 0; j < m; ++j)
      for (int i = 0; i + 1 < m; ++i) {
        add_stencil(g.stiffness, 1.0, {{id(i, j), -1.0}, {id(i + 1, j), 1.0}});
        add_stencil(g.stiffness, 1.0, {{id(j, i), -1.0}, {id(j, i + 1), 1.0}});
      }
    const double w = 1.0 / (h * h);  // h^2 * (1/h^2)^2
    for (int j = 1; j + 1 < m; ++j)
      for (int i = 1; i + 1 < m; ++i) {
        add_stencil(second, w, {{id(i - 1, j), 1.0}, {id(i, j), -2.0}, {id(i + 1, j), 1.0}});
        add_stencil(second, w, {{id(i, j - 1), 1.0}, {id(i, j), -2.0}, {id(i, j + 1), 1.0}});
      }
    for (int j = 0; j + 1 < m; ++j)
      for (int i = 0; i + 1 < m; ++i)
        add_stencil(second, 2.0 * w,
                    {{id(i, j), 1.0}, {id(i + 1, j), -1.0}, {id(i, j + 1), -1.0}, {id(i + 1, j + 1), 1.0}});
  }
  g.g1 = g.g0 + g.stiffness;
  g.g2 = g.g1 + second;
  return g;
}

// ------------------------------------------------------------ Stokes (MAC)

StokesSystem build_stokes(const GridDomain& domain) {
  if (domain.dimension != 2) throw Error(ErrorCode::InvalidGrid, "Stokes system needs a 2D domain");
  if (domain.n < 3) throw Error(ErrorCode::InvalidGrid, "Stokes system needs n >= 3");
  const int n = domain.n;
  const int m = n + 1;  // cells per axis
  const double h = domain.h;
  const double s = 1.0 / (h * h);
  const Eigen::Index nu = Eigen::Index{n} * m;  // u faces
  const Eigen::Index nv = nu;                   // v faces
  const Eigen::Index nvel = nu + nv;

  auto uid = [n](int i, int j) { return Eigen::Index{j} * n + (i - 1); };        // i in 1..m-1, j in 0..m-1
  auto vid = [nu, m](int i, int j) { return nu + Eigen::Index{j - 1} * m + i; };  // i in 0..m-1, j in 1..m-1

  StokesSystem sys;
  sys.domain = domain;
  Matrix& a = sys.vector_laplacian;
  a = Matrix::Zero(nvel, nvel);

  for (int j = 0; j < m; ++j)
    for (int i = 1; i < m; ++i) {
      const Eigen::Index r = uid(i, j);
      double diag = 2.0 * s;  // x-direction: normal walls carry u = 0
      if (i - 1 >= 1) a(r, uid(i - 1, j)) = -s;
      if (i + 1 <= m - 1) a(r, uid(i + 1, j)) = -s;
      for (int dj : {-1, 1}) {
        const int jj = j + dj;
        if (jj >= 0 && jj < m) {
          a(r, uid(i, jj)) = -s;
          diag += s;
        } else {
          diag += 2.0 * s;  // wall ghost u = -u gives 3s in this direction
        }
      }
      a(r, r) = diag;
    }
  for (int j = 1; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const Eigen::Index r = vid(i, j);
      double diag = 2.0 * s;
      if (j - 1 >= 1) a(r, vid(i, j - 1)) = -s;
      if (j + 1 <= m - 1) a(r, vid(i, j + 1)) = -s;
      for (int di : {-1, 1}) {
        const int ii = i + di;
        if (ii >= 0 && ii < m) {
          a(r, vid(ii, j)) = -s;
          diag += s;
        } else {
          diag += 2.0 * s;
        }
      }
      a(r, r) = diag;
    }

  Matrix& d = sys.divergence;
  d = Matrix::Zero(Eigen::Index{m} * m, nvel);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const Eigen::Index c = Eigen::Index{j} * m + i;
      if (i + 1 <= m - 1) d(c, uid(i + 1, j)) += 1.0 / h;
      if (i >= 1) d(c, uid(i, j)) -= 1.0 / h;
      if (j + 1 <= m - 1) d(c, vid(i, j + 1)) += 1.0 / h;
      if (j >= 1) d(c, vid(i, j)) -= 1.0 / h;
    }

  Eigen::ColPivHouseholderQR<Matrix> qr(d.transpose());
  qr.setThreshold(1e-10);
  if (qr.info() != Eigen::Success) throw Error(ErrorCode::FactorizationFailure, "QR of D^T failed");
  sys.divergence_rank = qr.rank();
  const Eigen::Index kdim = nvel - sys.divergence_rank;
  if (kdim <= 0) throw Error(ErrorCode::EmptyNullspace, "divergence has full column rank");
  const Matrix q = qr.householderQ();
  sys.nullbasis = q.rightCols(kdim);
  sys.projector = sys.nullbasis * sys.nullbasis.transpose();
  Matrix op = sys.nullbasis.transpose() * a * sys.nullbasis;
  const double scale = op.cwiseAbs().maxCoeff();
  if (asymmetry(op) > 1e-12 * scale)
    throw Error(ErrorCode::FactorizationFailure, "constrained operator not symmetric");
  sys.constrained_op = 0.5 * (op + op.transpose());

  if ((d * sys.nullbasis).cwiseAbs().maxCoeff() > 1e-10)
    throw Error(ErrorCode::FactorizationFailure, "null basis not annihilated by D_h");
  if ((sys.projector * sys.projector - sys.projector).cwiseAbs().maxCoeff() > 1e-10 ||
      asymmetry(sys.projector) > 1e-10)
    throw Error(ErrorCode::FactorizationFailure, "projector is not an orthogonal projection");
  if (!is_positive_definite(sys.constrained_op))
    throw Error(ErrorCode::FactorizationFailure, "constrained operator not positive definite");
  return sys;
}

SpectralModel stokes_spectral_model(const StokesSystem& sys) { return symmetric_model(sys.constrained_op); }

SpectralModel vector_laplacian_model(const StokesSystem& sys) { return symmetric_model(sys.vector_laplacian); }

// ------------------------------------------------------------ export

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << "\r\n";
  }
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

}  // namespace fracspace
