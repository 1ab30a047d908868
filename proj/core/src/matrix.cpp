#include "qcompat/matrix.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <stdexcept>

#include "qcompat/rng.hpp"

namespace qcompat {

bool is_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.adjoint()) <= tol;
}

ComplexMatrix hermitize(const ComplexMatrix& m) {
  return 0.5 * (m + m.adjoint());
}

double max_abs(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

double spectral_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

double min_eigenvalue(const ComplexMatrix& herm) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm,
                                                  Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

EigResult eig_hermitian(const ComplexMatrix& m, const Tolerances& tol) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("eig_hermitian: matrix must be square");
  }
  const double scale = std::max(1.0, max_abs(m));
  if (max_abs(m - m.adjoint()) > tol.herm * scale) {
    throw std::invalid_argument("eig_hermitian: matrix is not self-adjoint");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(m));
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("eig_hermitian: eigensolver failed");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

Isometry::Isometry(ComplexMatrix v, const Tolerances& tol) : v_(std::move(v)) {
  if (v_.cols() > v_.rows()) {
    throw std::invalid_argument("Isometry: more columns than rows");
  }
  const ComplexMatrix gram = v_.adjoint() * v_;
  const ComplexMatrix eye = ComplexMatrix::Identity(v_.cols(), v_.cols());
  if (max_abs(gram - eye) > tol.iso) {
    throw std::invalid_argument("Isometry: columns are not orthonormal");
  }
}

Subspace kernel(const ComplexMatrix& m, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("kernel: tol must be positive");
  const int d = static_cast<int>(m.cols());
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol * smax) ++rank;
  }
  Subspace out;
  out.ambient_dim = d;
  out.basis = svd.matrixV().rightCols(d - rank);
  return out;
}

Subspace orthonormal_complement(const std::vector<ComplexVector>& vectors,
                                int ambient_dim, const Tolerances& tol) {
  Subspace out;
  out.ambient_dim = ambient_dim;
  if (vectors.empty()) {
    out.basis = ComplexMatrix::Identity(ambient_dim, ambient_dim);
    return out;
  }
  ComplexMatrix m(ambient_dim, static_cast<int>(vectors.size()));
  for (int j = 0; j < m.cols(); ++j) {
    if (vectors[j].size() != ambient_dim) {
      throw std::invalid_argument("orthonormal_complement: dim mismatch");
    }
    m.col(j) = vectors[j];
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol.rank_rel * std::max(1.0, smax)) ++rank;
  }
  out.basis = svd.matrixU().rightCols(ambient_dim - rank);
  return out;
}

ComplexMatrix orthonormalize(const ComplexMatrix& m) {
  Eigen::HouseholderQR<ComplexMatrix> qr(m);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(m.rows(), m.cols());
  const ComplexMatrix r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  for (int j = 0; j < m.cols(); ++j) {
    const Complex rjj = r(j, j);
    const double a = std::abs(rjj);
    if (a < 1e-300) {
      throw std::invalid_argument("orthonormalize: rank deficient input");
    }
    q.col(j) *= rjj / a;
  }
  return q;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

namespace {

struct FactorIndexer {
  std::vector<int> dims, keep, rest;
  int keep_dim = 1, rest_dim = 1;

  FactorIndexer(const std::vector<int>& dims_, const std::vector<int>& keep_)
      : dims(dims_), keep(keep_) {
    std::vector<bool> kept(dims.size(), false);
    for (int k : keep) {
      if (k < 0 || k >= static_cast<int>(dims.size())) {
        throw std::invalid_argument("partial_trace: bad factor index");
      }
      kept[k] = true;
      keep_dim *= dims[k];
    }
    for (int f = 0; f < static_cast<int>(dims.size()); ++f) {
      if (!kept[f]) {
        rest.push_back(f);
        rest_dim *= dims[f];
      }
    }
  }

  // Full-space index from (kept multi-index, rest multi-index).
  int full_index(int ikeep, int irest) const {
    std::vector<int> digits(dims.size(), 0);
    for (int pos = static_cast<int>(keep.size()) - 1; pos >= 0; --pos) {
      digits[keep[pos]] = ikeep % dims[keep[pos]];
      ikeep /= dims[keep[pos]];
    }
    for (int pos = static_cast<int>(rest.size()) - 1; pos >= 0; --pos) {
      digits[rest[pos]] = irest % dims[rest[pos]];
      irest /= dims[rest[pos]];
    }
    int full = 0;
    for (std::size_t f = 0; f < dims.size(); ++f) {
      full = full * dims[f] + digits[f];
    }
    return full;
  }
};

}  // namespace

ComplexMatrix partial_trace(const ComplexMatrix& m,
                            const std::vector<int>& dims,
                            const std::vector<int>& keep) {
  long total = 1;
  for (int d : dims) total *= d;
  if (m.rows() != total || m.cols() != total) {
    throw std::invalid_argument("partial_trace: matrix/factor size mismatch");
  }
  FactorIndexer ix(dims, keep);
  ComplexMatrix out = ComplexMatrix::Zero(ix.keep_dim, ix.keep_dim);
  for (int i = 0; i < ix.keep_dim; ++i) {
    for (int j = 0; j < ix.keep_dim; ++j) {
      Complex acc = 0.0;
      for (int t = 0; t < ix.rest_dim; ++t) {
        acc += m(ix.full_index(i, t), ix.full_index(j, t));
      }
      out(i, j) = acc;
    }
  }
  return out;
}

ComplexMatrix lift_to_factors(const ComplexMatrix& op,
                              const std::vector<int>& dims,
                              const std::vector<int>& keep) {
  long total = 1;
  for (int d : dims) total *= d;
  FactorIndexer ix(dims, keep);
  if (op.rows() != ix.keep_dim || op.cols() != ix.keep_dim) {
    throw std::invalid_argument("lift_to_factors: operator size mismatch");
  }
  ComplexMatrix out = ComplexMatrix::Zero(total, total);
  for (int i = 0; i < ix.keep_dim; ++i) {
    for (int j = 0; j < ix.keep_dim; ++j) {
      const Complex v = op(i, j);
      if (v == Complex(0.0, 0.0)) continue;
      for (int t = 0; t < ix.rest_dim; ++t) {
        out(ix.full_index(i, t), ix.full_index(j, t)) = v;
      }
    }
  }
  return out;
}

Isometry haar_isometry(int d, int r, std::uint64_t seed,
                       const Tolerances& tol) {
  if (r > d || r < 1) {
    throw std::invalid_argument("haar_isometry: need 1 <= r <= d");
  }
  Rng rng(seed);
  ComplexMatrix g(d, r);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < r; ++j) {
      g(i, j) = rng.complex_gaussian();
    }
  }
  return Isometry(orthonormalize(g), tol);
}

}  // namespace qcompat
