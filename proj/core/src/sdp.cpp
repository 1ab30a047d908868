#include "qcompat/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace qcompat {

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::Infeasible: return "infeasible";
    case SdpStatus::Unbounded: return "unbounded";
    case SdpStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

int SdpInstance::add_block(std::string name, int dim) {
  if (dim < 1) throw std::invalid_argument("add_block: dim must be >= 1");
  block_dims_.push_back(dim);
  block_names_.push_back(std::move(name));
  return static_cast<int>(block_dims_.size()) - 1;
}

int SdpInstance::add_scalar(std::string name) {
  scalar_names_.push_back(std::move(name));
  return static_cast<int>(scalar_names_.size()) - 1;
}

void SdpInstance::add_constraint(SdpConstraint c) {
  for (const auto& t : c.block_terms) {
    if (t.block < 0 || t.block >= block_count()) {
      throw std::invalid_argument("add_constraint: bad block index");
    }
    if (t.coeff.rows() != block_dims_[t.block] ||
        t.coeff.cols() != block_dims_[t.block]) {
      throw std::invalid_argument("add_constraint: coefficient dim mismatch");
    }
    if (!is_hermitian(t.coeff, 1e-9 * std::max(1.0, max_abs(t.coeff)))) {
      throw std::invalid_argument(
          "add_constraint: coefficient must be Hermitian");
    }
  }
  for (const auto& t : c.scalar_terms) {
    if (t.scalar < 0 || t.scalar >= scalar_count()) {
      throw std::invalid_argument("add_constraint: bad scalar index");
    }
  }
  constraints_.push_back(std::move(c));
}

void SdpInstance::add_matrix_equality(
    const std::vector<std::pair<int, double>>& blocks,
    const std::vector<std::pair<int, ComplexMatrix>>& scalars,
    const ComplexMatrix& rhs) {
  const int d = static_cast<int>(rhs.rows());
  if (rhs.cols() != d) {
    throw std::invalid_argument("add_matrix_equality: rhs must be square");
  }
  // One real constraint per element of an orthonormal Hermitian basis.
  auto pairing = [&](const ComplexMatrix& basis_elem) {
    SdpConstraint c;
    for (const auto& [j, coeff] : blocks) {
      c.block_terms.push_back({j, coeff * basis_elem});
    }
    for (const auto& [k, mat] : scalars) {
      const double g = (mat.cwiseProduct(basis_elem.conjugate())).sum().real();
      c.scalar_terms.push_back({k, g});
    }
    c.rhs = (rhs.cwiseProduct(basis_elem.conjugate())).sum().real();
    add_constraint(std::move(c));
  };
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int q = 0; q < d; ++q) {
    ComplexMatrix e = ComplexMatrix::Zero(d, d);
    e(q, q) = 1.0;
    pairing(e);
  }
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < j; ++i) {
      ComplexMatrix re = ComplexMatrix::Zero(d, d);
      re(i, j) = inv_sqrt2;
      re(j, i) = inv_sqrt2;
      pairing(re);
      ComplexMatrix im = ComplexMatrix::Zero(d, d);
      im(i, j) = Complex(0.0, inv_sqrt2);
      im(j, i) = Complex(0.0, -inv_sqrt2);
      pairing(im);
    }
  }
}

void SdpInstance::set_objective(SdpSense sense, SdpObjective objective) {
  sense_ = sense;
  objective_ = std::move(objective);
}

int SdpInstance::total_variable_dim() const {
  int total = scalar_count();
  for (int d : block_dims_) total += d;
  return total;
}

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

double herm_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.cwiseProduct(b.conjugate())).sum().real();
}

// Orthonormal real coordinates of a Hermitian matrix. Order: for each column
// j, the strictly-upper entries (sqrt2*Re, sqrt2*Im) for i < j, then the
// diagonal entry (j, j).
void hvec_scatter(const ComplexMatrix& a, double* out) {
  const int m = static_cast<int>(a.rows());
  int k = 0;
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < j; ++i) {
      out[k++] = kSqrt2 * a(i, j).real();
      out[k++] = kSqrt2 * a(i, j).imag();
    }
    out[k++] = a(j, j).real();
  }
}

ComplexMatrix hvec_gather(const double* x, int m) {
  ComplexMatrix a(m, m);
  int k = 0;
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < j; ++i) {
      const Complex v(x[k] / kSqrt2, x[k + 1] / kSqrt2);
      k += 2;
      a(i, j) = v;
      a(j, i) = std::conj(v);
    }
    a(j, j) = x[k++];
  }
  return a;
}

struct Assembled {
  int nb = 0;
  std::vector<int> dims;
  std::vector<int> offs;  // x-offset of each block's parameters
  int nscal = 0;
  int scal_off = 0;
  int n = 0;
  int p = 0;
  RealMatrix A;
  RealVector b;
  RealVector c;
  double obj_const = 0.0;
  bool maximize = false;
  std::vector<double> row_scale;  // original row i was multiplied by this
  std::vector<int> kept_rows;     // indices into the original constraint list
  int p_full = 0;
};

struct BlockScaling {
  ComplexMatrix R, Rinv, Sigma;
  RealVector lambda;
  Eigen::LLT<ComplexMatrix> llt_s, llt_z;
};

struct ConeVec {
  std::vector<ComplexMatrix> m;

  ConeVec() = default;
  explicit ConeVec(const std::vector<int>& dims) {
    m.reserve(dims.size());
    for (int d : dims) m.push_back(ComplexMatrix::Zero(d, d));
  }
};

struct Direction {
  RealVector dx, dy;
  ConeVec dz, ds;
  double dtau = 0.0, dkappa = 0.0;
};

// Right-hand side of the linearized self-dual system:
//   A^T dy + G^T dz + c dtau                  = rx
//   A dx - b dtau                             = ry
//   G dx + ds - h dtau                        = rz
//   c^T dx + b^T dy + h^T dz + dkappa         = rtau
//   lambda o (W^{-T} ds + W dz)               = rs   (scaled frame)
//   tau dkappa + kappa dtau                   = rkappa
struct NewtonRhs {
  RealVector rx, ry;
  ConeVec rz, rs;
  double rtau = 0.0, rkappa = 0.0;
};

class Solver {
 public:
  // The reduced (Schur-complement) KKT solve squares the scaling's condition
  // number; the augmented form keeps the scaled cone rows explicit and is the
  // accurate-but-slower retry path.
  Solver(const SdpInstance& inst, const SdpOptions& opts,
         bool augmented = false)
      : inst_(inst), opts_(opts), augmented_(augmented) {}

  SdpSolution run();

 private:
  void assemble();
  void preprocess_rows();
  ConeVec cone_from_x(const RealVector& x) const;
  RealVector cone_adjoint(const ConeVec& w) const;
  bool update_scalings();
  void build_kkt();
  bool solve_k3(const RealVector& bx, const RealVector& by, const ConeVec* bz,
                RealVector& dx, RealVector& dy, ConeVec& dz) const;
  bool newton_solve(const NewtonRhs& rhs, const RealVector& u1x,
                    const RealVector& u1y, const ConeVec& u1z,
                    Direction& out) const;
  NewtonRhs newton_residual(const NewtonRhs& rhs, const Direction& d) const;
  bool direction(double sigma, const ConeVec* gamma, double corr_tk,
                 const RealVector& u1x, const RealVector& u1y,
                 const ConeVec& u1z, Direction& out) const;
  double max_step(const Direction& d) const;
  void refresh_residuals();
  SdpSolution fail_with_best(SdpStatus status, const std::string& message);
  SdpSolution finalize(SdpStatus status, const std::string& message);

  struct Snapshot {
    RealVector x, y;
    ConeVec s, z;
    double tau = 1.0, kappa = 1.0;
    double score = std::numeric_limits<double>::infinity();
  };
  Snapshot best_;

  const SdpInstance& inst_;
  SdpOptions opts_;
  bool augmented_ = false;
  int q_total_ = 0;  // sum of block parameter counts (augmented rows)
  Assembled a_;

  // iterate
  RealVector x_, y_;
  ConeVec s_, z_;
  double tau_ = 1.0, kappa_ = 1.0;
  double mu_ = 0.0;
  int nu_ = 0;
  int iters_ = 0;

  std::vector<BlockScaling> scal_;
  RealMatrix kkt_;
  Eigen::PartialPivLU<RealMatrix> kkt_lu_;
  RealMatrix kkt_unreg_;

  // residuals of the self-dual system, refreshed each iteration
  RealVector rx_, ry_;
  ConeVec rz_;
  double rtau_ = 0.0;
  double norm_c_ = 1.0, norm_b_ = 1.0;
};

void Solver::assemble() {
  a_.nb = inst_.block_count();
  a_.dims.resize(a_.nb);
  a_.offs.resize(a_.nb);
  int off = 0;
  for (int j = 0; j < a_.nb; ++j) {
    a_.dims[j] = inst_.block_dim(j);
    a_.offs[j] = off;
    off += a_.dims[j] * a_.dims[j];
  }
  a_.scal_off = off;
  a_.nscal = inst_.scalar_count();
  a_.n = off + a_.nscal;
  a_.maximize = inst_.sense() == SdpSense::Max;

  const auto& rows = inst_.constraints();
  a_.p_full = static_cast<int>(rows.size());
  RealMatrix A_full = RealMatrix::Zero(a_.p_full, a_.n);
  RealVector b_full = RealVector::Zero(a_.p_full);
  std::vector<double> buf;
  for (int i = 0; i < a_.p_full; ++i) {
    const auto& row = rows[i];
    for (const auto& t : row.block_terms) {
      const int m = a_.dims[t.block];
      buf.resize(m * m);
      hvec_scatter(t.coeff, buf.data());
      for (int k = 0; k < m * m; ++k) {
        A_full(i, a_.offs[t.block] + k) += buf[k];
      }
    }
    for (const auto& t : row.scalar_terms) {
      A_full(i, a_.scal_off + t.scalar) += t.coeff;
    }
    b_full(i) = row.rhs;
  }

  a_.A = std::move(A_full);
  a_.b = std::move(b_full);

  a_.c = RealVector::Zero(a_.n);
  const auto& obj = inst_.objective();
  for (const auto& t : obj.block_terms) {
    const int m = a_.dims[t.block];
    buf.resize(m * m);
    hvec_scatter(t.coeff, buf.data());
    for (int k = 0; k < m * m; ++k) a_.c(a_.offs[t.block] + k) += buf[k];
  }
  for (const auto& t : obj.scalar_terms) {
    a_.c(a_.scal_off + t.scalar) += t.coeff;
  }
  a_.obj_const = obj.constant;
  if (a_.maximize) a_.c = -a_.c;
}

void Solver::preprocess_rows() {
  const int p_full = static_cast<int>(a_.A.rows());
  a_.row_scale.assign(p_full, 1.0);
  for (int i = 0; i < p_full; ++i) {
    const double nrm = a_.A.row(i).norm();
    if (nrm > 1e-300) {
      a_.row_scale[i] = 1.0 / nrm;
      a_.A.row(i) *= a_.row_scale[i];
      a_.b(i) *= a_.row_scale[i];
    }
  }
  if (p_full == 0) {
    a_.p = 0;
    return;
  }
  // Drop linearly dependent rows (marginal constraints are redundant across
  // axes); consistency of the dropped rows is re-checked on the solution.
  Eigen::ColPivHouseholderQR<RealMatrix> qr(a_.A.transpose());
  qr.setThreshold(1e-12);
  const int rank = static_cast<int>(qr.rank());
  if (rank < p_full) {
    std::vector<int> keep(qr.colsPermutation().indices().data(),
                          qr.colsPermutation().indices().data() + rank);
    std::sort(keep.begin(), keep.end());
    RealMatrix A2(rank, a_.n);
    RealVector b2(rank);
    for (int i = 0; i < rank; ++i) {
      A2.row(i) = a_.A.row(keep[i]);
      b2(i) = a_.b(keep[i]);
    }
    a_.kept_rows = std::move(keep);
    a_.A = std::move(A2);
    a_.b = std::move(b2);
  } else {
    a_.kept_rows.resize(p_full);
    for (int i = 0; i < p_full; ++i) a_.kept_rows[i] = i;
  }
  a_.p = static_cast<int>(a_.A.rows());
}

ConeVec Solver::cone_from_x(const RealVector& x) const {
  ConeVec out(a_.dims);
  for (int j = 0; j < a_.nb; ++j) {
    out.m[j] = hvec_gather(x.data() + a_.offs[j], a_.dims[j]);
  }
  return out;
}

RealVector Solver::cone_adjoint(const ConeVec& w) const {
  RealVector out = RealVector::Zero(a_.n);
  for (int j = 0; j < a_.nb; ++j) {
    hvec_scatter(w.m[j], out.data() + a_.offs[j]);
  }
  return out;
}

bool Solver::update_scalings() {
  scal_.resize(a_.nb);
  for (int j = 0; j < a_.nb; ++j) {
    BlockScaling& sc = scal_[j];
    sc.llt_s.compute(s_.m[j]);
    sc.llt_z.compute(z_.m[j]);
    if (sc.llt_s.info() != Eigen::Success ||
        sc.llt_z.info() != Eigen::Success) {
      return false;
    }
    const ComplexMatrix ls = sc.llt_s.matrixL();
    const ComplexMatrix lz = sc.llt_z.matrixL();
    Eigen::JacobiSVD<ComplexMatrix> svd(
        lz.adjoint() * ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
    sc.lambda = svd.singularValues();
    if (sc.lambda.minCoeff() <= 0.0) return false;
    const RealVector inv_sqrt = sc.lambda.cwiseSqrt().cwiseInverse();
    sc.R = ls * svd.matrixV() * inv_sqrt.asDiagonal();
    sc.Rinv = inv_sqrt.asDiagonal() * svd.matrixU().adjoint() * lz.adjoint();
    sc.Sigma = sc.Rinv.adjoint() * sc.Rinv;
  }
  return true;
}

// Reduced KKT matrix [[H, A^T], [A, 0]] with H = G~^T G~ assembled per block
// from Sigma: H_{ab} = Re Tr[H_a Sigma H_b Sigma]. In augmented mode the
// scaled cone rows stay explicit:
//   [ 0   A^T  G~^T ] [dx ]   [bx ]
//   [ A   0    0    ] [dy ] = [by ]
//   [ G~  0   -I    ] [dz~]   [bz~]
// with G~ = W^{-T} G and dz recovered from dz~ = W(dz).
void Solver::build_kkt() {
  const int n = a_.n, p = a_.p;
  if (augmented_) {
    const int q = q_total_;
    kkt_unreg_ = RealMatrix::Zero(n + p + q, n + p + q);
    if (p > 0) {
      kkt_unreg_.block(n, 0, p, n) = a_.A;
      kkt_unreg_.block(0, n, n, p) = a_.A.transpose();
    }
    std::vector<double> buf;
    for (int j = 0; j < a_.nb; ++j) {
      const int m = a_.dims[j];
      const int xoff = a_.offs[j];
      const int roff = n + p + a_.offs[j];
      const ComplexMatrix& rinv = scal_[j].Rinv;
      buf.resize(m * m);
      ComplexMatrix basis = ComplexMatrix::Zero(m, m);
      int k = 0;
      auto emit = [&](const ComplexMatrix& h) {
        const ComplexMatrix scaled = -(rinv * h * rinv.adjoint());
        hvec_scatter(scaled, buf.data());
        for (int r = 0; r < m * m; ++r) {
          kkt_unreg_(roff + r, xoff + k) = buf[r];
          kkt_unreg_(xoff + k, roff + r) = buf[r];
        }
        ++k;
      };
      for (int col = 0; col < m; ++col) {
        for (int row = 0; row < col; ++row) {
          basis.setZero();
          basis(row, col) = 1.0 / kSqrt2;
          basis(col, row) = 1.0 / kSqrt2;
          emit(basis);
          basis.setZero();
          basis(row, col) = Complex(0.0, 1.0 / kSqrt2);
          basis(col, row) = Complex(0.0, -1.0 / kSqrt2);
          emit(basis);
        }
        basis.setZero();
        basis(col, col) = 1.0;
        emit(basis);
      }
      for (int r = 0; r < m * m; ++r) {
        kkt_unreg_(roff + r, roff + r) = -1.0;
      }
    }
    kkt_lu_.compute(kkt_unreg_);
    return;
  }
  kkt_unreg_ = RealMatrix::Zero(n + p, n + p);
  std::vector<double> buf;
  for (int j = 0; j < a_.nb; ++j) {
    const int m = a_.dims[j];
    const int off = a_.offs[j];
    const ComplexMatrix& sig = scal_[j].Sigma;
    buf.resize(m * m);
    int beta = 0;
    ComplexMatrix nmat(m, m);
    for (int col = 0; col < m; ++col) {
      for (int row = 0; row < col; ++row) {
        // real part basis element
        nmat.noalias() = sig.col(row) * sig.col(col).adjoint();
        nmat += sig.col(col) * sig.col(row).adjoint();
        nmat /= kSqrt2;
        hvec_scatter(nmat, buf.data());
        for (int k = 0; k < m * m; ++k) kkt_unreg_(off + k, off + beta) = buf[k];
        ++beta;
        // imaginary part basis element
        nmat.noalias() = sig.col(row) * sig.col(col).adjoint();
        nmat -= sig.col(col) * sig.col(row).adjoint();
        nmat *= Complex(0.0, 1.0) / kSqrt2;
        hvec_scatter(nmat, buf.data());
        for (int k = 0; k < m * m; ++k) kkt_unreg_(off + k, off + beta) = buf[k];
        ++beta;
      }
      nmat.noalias() = sig.col(col) * sig.col(col).adjoint();
      hvec_scatter(nmat, buf.data());
      for (int k = 0; k < m * m; ++k) kkt_unreg_(off + k, off + beta) = buf[k];
      ++beta;
    }
  }
  if (p > 0) {
    kkt_unreg_.block(n, 0, p, n) = a_.A;
    kkt_unreg_.block(0, n, n, p) = a_.A.transpose();
  }
  kkt_unreg_ = 0.5 * (kkt_unreg_ + kkt_unreg_.transpose().eval());

  // Factor the exact saddle matrix; dependent equality rows were dropped in
  // preprocessing, so it is nonsingular on the instances we build. A tiny
  // static shift is applied only if the factorization produces garbage.
  kkt_lu_.compute(kkt_unreg_);
  RealVector probe = RealVector::Ones(n + p);
  if (!kkt_lu_.solve(probe).allFinite()) {
    kkt_ = kkt_unreg_;
    for (int k = 0; k < n; ++k) kkt_(k, k) += 1e-10;
    for (int k = n; k < n + p; ++k) kkt_(k, k) -= 1e-10;
    kkt_lu_.compute(kkt_);
  }
}

bool Solver::solve_k3(const RealVector& bx, const RealVector& by,
                      const ConeVec* bz, RealVector& dx, RealVector& dy,
                      ConeVec& dz) const {
  const int n = a_.n, p = a_.p;
  if (augmented_) {
    const int q = q_total_;
    RealVector rhs = RealVector::Zero(n + p + q);
    rhs.head(n) = bx;
    if (p > 0) rhs.segment(n, p) = by;
    if (bz != nullptr) {
      std::vector<double> buf;
      for (int j = 0; j < a_.nb; ++j) {
        const int m = a_.dims[j];
        buf.resize(m * m);
        const ComplexMatrix scaled =
            scal_[j].Rinv * bz->m[j] * scal_[j].Rinv.adjoint();
        hvec_scatter(scaled, buf.data());
        for (int r = 0; r < m * m; ++r) {
          rhs(n + p + a_.offs[j] + r) = buf[r];
        }
      }
    }
    RealVector sol = kkt_lu_.solve(rhs);
    for (int pass = 0; pass < 2; ++pass) {
      RealVector resid = rhs - kkt_unreg_ * sol;
      sol += kkt_lu_.solve(resid);
    }
    if (!sol.allFinite()) return false;
    dx = sol.head(n);
    dy = p > 0 ? RealVector(sol.segment(n, p)) : RealVector();
    dz = ConeVec(a_.dims);
    for (int j = 0; j < a_.nb; ++j) {
      const ComplexMatrix ztilde =
          hvec_gather(sol.data() + n + p + a_.offs[j], a_.dims[j]);
      dz.m[j] = scal_[j].Rinv.adjoint() * ztilde * scal_[j].Rinv;
    }
    return true;
  }

  RealVector rhs(n + p);
  ConeVec sand(a_.dims);
  if (bz != nullptr) {
    for (int j = 0; j < a_.nb; ++j) {
      sand.m[j] = scal_[j].Sigma * bz->m[j] * scal_[j].Sigma;
    }
    rhs.head(n) = bx - cone_adjoint(sand);
  } else {
    rhs.head(n) = bx;
  }
  if (p > 0) rhs.tail(p) = by;

  RealVector sol = kkt_lu_.solve(rhs);
  for (int pass = 0; pass < 2; ++pass) {
    RealVector resid = rhs - kkt_unreg_ * sol;
    sol += kkt_lu_.solve(resid);
  }
  if (!sol.allFinite()) return false;
  dx = sol.head(n);
  dy = p > 0 ? RealVector(sol.tail(p)) : RealVector();

  const ConeVec px = cone_from_x(dx);
  dz = ConeVec(a_.dims);
  for (int j = 0; j < a_.nb; ++j) {
    ComplexMatrix t = -px.m[j];
    if (bz != nullptr) t -= bz->m[j];
    dz.m[j] = scal_[j].Sigma * t * scal_[j].Sigma;
  }
  return true;
}

bool Solver::newton_solve(const NewtonRhs& rhs, const RealVector& u1x,
                          const RealVector& u1y, const ConeVec& u1z,
                          Direction& out) const {
  ConeVec jinv(a_.dims);  // lambda \ rs per block
  ConeVec bz(a_.dims);
  for (int j = 0; j < a_.nb; ++j) {
    const int m = a_.dims[j];
    const RealVector& lam = scal_[j].lambda;
    ComplexMatrix ji(m, m);
    for (int r = 0; r < m; ++r) {
      for (int cidx = 0; cidx < m; ++cidx) {
        ji(r, cidx) = 2.0 * rhs.rs.m[j](r, cidx) / (lam(r) + lam(cidx));
      }
    }
    bz.m[j] = rhs.rz.m[j] - scal_[j].R * ji * scal_[j].R.adjoint();
    jinv.m[j] = std::move(ji);
  }

  RealVector u2x, u2y;
  ConeVec u2z;
  if (!solve_k3(rhs.rx, rhs.ry, &bz, u2x, u2y, u2z)) return false;

  const double denom = a_.c.dot(u1x) +
                       (a_.p > 0 ? a_.b.dot(u1y) : 0.0) - kappa_ / tau_;
  if (std::abs(denom) < 1e-300) return false;
  const double numer = rhs.rtau - rhs.rkappa / tau_ - a_.c.dot(u2x) -
                       (a_.p > 0 ? a_.b.dot(u2y) : 0.0);
  const double dtau = numer / denom;

  out.dx = u2x + dtau * u1x;
  out.dy = a_.p > 0 ? RealVector(u2y + dtau * u1y) : RealVector();
  out.dz = ConeVec(a_.dims);
  out.ds = ConeVec(a_.dims);
  const ConeVec pdx = cone_from_x(out.dx);
  for (int j = 0; j < a_.nb; ++j) {
    out.dz.m[j] = u2z.m[j] + dtau * u1z.m[j];
    // W^T W dz = -P(dx) - bz  (cone row of the reduced system)
    const ComplexMatrix wtwdz = -pdx.m[j] - bz.m[j];
    out.ds.m[j] = scal_[j].R * jinv.m[j] * scal_[j].R.adjoint() - wtwdz;
  }
  out.dtau = dtau;
  out.dkappa = (rhs.rkappa - kappa_ * dtau) / tau_;
  return true;
}

NewtonRhs Solver::newton_residual(const NewtonRhs& rhs,
                                  const Direction& d) const {
  NewtonRhs res;
  res.rx = rhs.rx - a_.c * d.dtau + cone_adjoint(d.dz);
  if (a_.p > 0) res.rx -= a_.A.transpose() * d.dy;
  res.ry = a_.p > 0 ? RealVector(rhs.ry - a_.A * d.dx + a_.b * d.dtau)
                    : RealVector();
  const ConeVec pdx = cone_from_x(d.dx);
  res.rz = ConeVec(a_.dims);
  res.rs = ConeVec(a_.dims);
  for (int j = 0; j < a_.nb; ++j) {
    res.rz.m[j] = rhs.rz.m[j] + pdx.m[j] - d.ds.m[j];
    const ComplexMatrix scaled =
        scal_[j].Rinv * d.ds.m[j] * scal_[j].Rinv.adjoint() +
        scal_[j].R.adjoint() * d.dz.m[j] * scal_[j].R;
    const ComplexMatrix lam_jordan =
        0.5 * (scal_[j].lambda.asDiagonal() * scaled +
               scaled * scal_[j].lambda.asDiagonal());
    res.rs.m[j] = rhs.rs.m[j] - lam_jordan;
  }
  res.rtau = rhs.rtau - a_.c.dot(d.dx) -
             (a_.p > 0 ? a_.b.dot(d.dy) : 0.0) - d.dkappa;
  res.rkappa = rhs.rkappa - tau_ * d.dkappa - kappa_ * d.dtau;
  return res;
}

bool Solver::direction(double sigma, const ConeVec* gamma, double corr_tk,
                       const RealVector& u1x, const RealVector& u1y,
                       const ConeVec& u1z, Direction& out) const {
  const double eta = 1.0 - sigma;
  NewtonRhs rhs;
  rhs.rx = -eta * rx_;
  rhs.ry = a_.p > 0 ? RealVector(-eta * ry_) : RealVector();
  rhs.rz = ConeVec(a_.dims);
  rhs.rs = ConeVec(a_.dims);
  for (int j = 0; j < a_.nb; ++j) {
    const int m = a_.dims[j];
    rhs.rz.m[j] = -eta * rz_.m[j];
    ComplexMatrix d = ComplexMatrix::Zero(m, m);
    for (int q = 0; q < m; ++q) {
      d(q, q) = sigma * mu_ - scal_[j].lambda(q) * scal_[j].lambda(q);
    }
    if (gamma != nullptr) d -= gamma->m[j];
    rhs.rs.m[j] = std::move(d);
  }
  rhs.rtau = -eta * rtau_;
  rhs.rkappa = sigma * mu_ - tau_ * kappa_ - corr_tk;

  if (!newton_solve(rhs, u1x, u1y, u1z, out)) return false;
  // Refine against the full linearized system; the tau recovery in
  // particular suffers cancellation near the central path's end.
  for (int pass = 0; pass < 3; ++pass) {
    const NewtonRhs res = newton_residual(rhs, out);
    double rnorm = std::abs(res.rtau) + std::abs(res.rkappa) + res.rx.norm();
    if (a_.p > 0) rnorm += res.ry.norm();
    for (int j = 0; j < a_.nb; ++j) {
      rnorm += res.rz.m[j].norm() + res.rs.m[j].norm();
    }
    double scale = std::abs(rhs.rtau) + std::abs(rhs.rkappa) + rhs.rx.norm();
    if (a_.p > 0) scale += rhs.ry.norm();
    for (int j = 0; j < a_.nb; ++j) {
      scale += rhs.rz.m[j].norm() + rhs.rs.m[j].norm();
    }
    if (rnorm <= 1e-13 * std::max(1.0, scale)) break;
    Direction corr;
    if (!newton_solve(res, u1x, u1y, u1z, corr)) break;
    out.dx += corr.dx;
    if (a_.p > 0) out.dy += corr.dy;
    for (int j = 0; j < a_.nb; ++j) {
      out.dz.m[j] += corr.dz.m[j];
      out.ds.m[j] += corr.ds.m[j];
    }
    out.dtau += corr.dtau;
    out.dkappa += corr.dkappa;
  }
  return true;
}

double Solver::max_step(const Direction& d) const {
  double alpha = std::numeric_limits<double>::infinity();
  auto cone_limit = [&](const Eigen::LLT<ComplexMatrix>& llt,
                        const ComplexMatrix& dir) {
    const auto& l = llt.matrixL();
    ComplexMatrix t = l.solve(dir);
    t = l.solve(t.adjoint()).adjoint();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(
        0.5 * (t + t.adjoint()), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    if (lmin < 0.0) alpha = std::min(alpha, -1.0 / lmin);
  };
  for (int j = 0; j < a_.nb; ++j) {
    cone_limit(scal_[j].llt_s, d.ds.m[j]);
    cone_limit(scal_[j].llt_z, d.dz.m[j]);
  }
  if (d.dtau < 0.0) alpha = std::min(alpha, -tau_ / d.dtau);
  if (d.dkappa < 0.0) alpha = std::min(alpha, -kappa_ / d.dkappa);
  return alpha;
}

void Solver::refresh_residuals() {
  rx_ = -cone_adjoint(z_) + a_.c * tau_;
  if (a_.p > 0) rx_ += a_.A.transpose() * y_;
  if (a_.p > 0) ry_ = a_.A * x_ - a_.b * tau_;
  const ConeVec px = cone_from_x(x_);
  rz_ = ConeVec(a_.dims);
  for (int j = 0; j < a_.nb; ++j) rz_.m[j] = s_.m[j] - px.m[j];
  rtau_ = a_.c.dot(x_) + (a_.p > 0 ? a_.b.dot(y_) : 0.0) + kappa_;
}

// On a numerical dead end, fall back to the best iterate seen; if it already
// met the tolerances (e.g. the final unchecked update), report it as optimal.
SdpSolution Solver::fail_with_best(SdpStatus status,
                                   const std::string& message) {
  if (best_.score < std::numeric_limits<double>::infinity()) {
    x_ = best_.x;
    y_ = best_.y;
    s_ = best_.s;
    z_ = best_.z;
    tau_ = best_.tau;
    kappa_ = best_.kappa;
    refresh_residuals();
    if (best_.score <= opts_.tol) {
      return finalize(SdpStatus::Optimal, "converged (best iterate)");
    }
  }
  return finalize(status, message);
}

SdpSolution Solver::finalize(SdpStatus status, const std::string& message) {
  SdpSolution sol;
  sol.status = status;
  sol.iterations = iters_;
  sol.message = message;
  const double t = tau_ > 1e-300 ? tau_ : 1.0;

  sol.blocks.reserve(a_.nb);
  const ConeVec px = cone_from_x(x_);
  for (int j = 0; j < a_.nb; ++j) sol.blocks.push_back(px.m[j] / t);
  sol.scalars.resize(a_.nscal);
  for (int k = 0; k < a_.nscal; ++k) sol.scalars[k] = x_(a_.scal_off + k) / t;

  // Equality multipliers in the convention Z_j = Cmin_j - sum_i y_i F_ij,
  // reported against the original (pre-scaling, pre-deduplication) rows.
  sol.eq_duals.assign(a_.p_full, 0.0);
  for (int i = 0; i < a_.p; ++i) {
    const int orig = a_.kept_rows[i];
    sol.eq_duals[orig] = -y_(i) / t * a_.row_scale[orig];
  }
  sol.block_duals.reserve(a_.nb);
  for (int j = 0; j < a_.nb; ++j) sol.block_duals.push_back(z_.m[j] / t);

  const double pobj = a_.c.dot(x_) / t;
  const double dobj = a_.p > 0 ? -a_.b.dot(y_) / t : 0.0;
  sol.value = a_.maximize ? a_.obj_const - pobj : a_.obj_const + pobj;
  sol.dual_value = a_.maximize ? a_.obj_const - dobj : a_.obj_const + dobj;

  double gap_c = tau_ * kappa_;
  for (int j = 0; j < a_.nb; ++j) gap_c += herm_inner(s_.m[j], z_.m[j]);
  gap_c = (gap_c - tau_ * kappa_) / (t * t);
  sol.gap = gap_c / std::max({1.0, std::abs(pobj), std::abs(dobj)});
  sol.primal_residual =
      std::max(a_.p > 0 ? ry_.norm() / (t * norm_b_) : 0.0, [&] {
        double rznorm = 0.0;
        for (const auto& mtx : rz_.m) rznorm += mtx.squaredNorm();
        return std::sqrt(rznorm) / t;
      }());
  sol.dual_residual = rx_.norm() / (t * norm_c_);
  return sol;
}

SdpSolution Solver::run() {
  if (inst_.total_variable_dim() > opts_.variable_dim_cap) {
    SdpSolution sol;
    sol.status = SdpStatus::NumericalFailure;
    sol.message = "variable dimension " +
                  std::to_string(inst_.total_variable_dim()) +
                  " exceeds cap " + std::to_string(opts_.variable_dim_cap);
    return sol;
  }
  if (inst_.block_count() == 0) {
    SdpSolution sol;
    sol.status = SdpStatus::NumericalFailure;
    sol.message = "instance has no PSD blocks";
    return sol;
  }
  assemble();
  preprocess_rows();
  q_total_ = a_.scal_off;

  nu_ = 0;
  for (int d : a_.dims) nu_ += d;
  norm_c_ = std::max(1.0, a_.c.norm());
  norm_b_ = std::max(1.0, a_.p > 0 ? a_.b.norm() : 0.0);

  // Unit-scaling least-squares start, shifted into the cone interior.
  s_ = ConeVec(a_.dims);
  z_ = ConeVec(a_.dims);
  for (int j = 0; j < a_.nb; ++j) {
    s_.m[j] = ComplexMatrix::Identity(a_.dims[j], a_.dims[j]);
    z_.m[j] = ComplexMatrix::Identity(a_.dims[j], a_.dims[j]);
  }
  x_ = RealVector::Zero(a_.n);
  y_ = RealVector::Zero(a_.p);
  if (!update_scalings()) {
    return finalize(SdpStatus::NumericalFailure, "initial scaling failed");
  }
  build_kkt();
  {
    RealVector px, py, dxv, dyv;
    ConeVec pz;
    // primal start: min ||P(x)||^2 s.t. Ax = b  ->  s = P(x)
    if (solve_k3(RealVector::Zero(a_.n), a_.b, nullptr, px, py, pz)) {
      ConeVec shat = cone_from_x(px);
      double alpha_p = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < a_.nb; ++j) {
        alpha_p = std::max(alpha_p, -min_eigenvalue(shat.m[j]));
      }
      x_ = px;
      for (int j = 0; j < a_.nb; ++j) {
        s_.m[j] = shat.m[j];
        if (alpha_p >= -1e-8) {
          s_.m[j] += (1.0 + alpha_p) *
                     ComplexMatrix::Identity(a_.dims[j], a_.dims[j]);
        }
      }
    }
    // dual start: A^T y + G^T z = -c with z = P(xaux)
    if (solve_k3(-a_.c, RealVector::Zero(a_.p), nullptr, dxv, dyv, pz)) {
      ConeVec zhat = cone_from_x(dxv);
      for (auto& mtx : zhat.m) mtx = -mtx;
      double alpha_d = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < a_.nb; ++j) {
        alpha_d = std::max(alpha_d, -min_eigenvalue(zhat.m[j]));
      }
      y_ = dyv;
      for (int j = 0; j < a_.nb; ++j) {
        z_.m[j] = zhat.m[j];
        if (alpha_d >= -1e-8) {
          z_.m[j] += (1.0 + alpha_d) *
                     ComplexMatrix::Identity(a_.dims[j], a_.dims[j]);
        }
      }
    }
  }
  tau_ = 1.0;
  kappa_ = 1.0;

  const double tol = opts_.tol;
  int tiny_steps = 0;
  std::string stall_msg;

  for (iters_ = 0; iters_ < opts_.max_iterations; ++iters_) {
    refresh_residuals();
    const ConeVec px = cone_from_x(x_);

    double sz = 0.0;
    for (int j = 0; j < a_.nb; ++j) sz += herm_inner(s_.m[j], z_.m[j]);
    mu_ = (sz + tau_ * kappa_) / (nu_ + 1);

    // convergence
    const double pres =
        std::max(a_.p > 0 ? ry_.norm() / norm_b_ : 0.0, [&] {
          double acc = 0.0;
          for (const auto& mtx : rz_.m) acc += mtx.squaredNorm();
          return std::sqrt(acc);
        }()) / tau_;
    const double dres = rx_.norm() / (tau_ * norm_c_);
    const double pobj = a_.c.dot(x_) / tau_;
    const double dobj = a_.p > 0 ? -a_.b.dot(y_) / tau_ : 0.0;
    const double relgap =
        (sz / (tau_ * tau_)) / std::max({1.0, std::abs(pobj), std::abs(dobj)});
    if (opts_.debug) {
      std::fprintf(stderr,
                   "[sdp] it=%2d mu=%9.2e pres=%9.2e dres=%9.2e gap=%9.2e "
                   "tau=%9.2e kappa=%9.2e pobj=%+.9e\n",
                   iters_, mu_, pres, dres, relgap, tau_, kappa_, pobj);
    }
    if (pres <= tol && dres <= tol && relgap <= tol) {
      return finalize(SdpStatus::Optimal, "converged");
    }
    const double score = std::max({pres, dres, relgap});
    if (score < best_.score) {
      best_.x = x_;
      best_.y = y_;
      best_.s = s_;
      best_.z = z_;
      best_.tau = tau_;
      best_.kappa = kappa_;
      best_.score = score;
    }

    // infeasibility / unboundedness certificates from the embedding ray
    const double improve_p = -((a_.p > 0 ? a_.b.dot(y_) : 0.0));
    if (improve_p > 0.0) {
      double ray_norm = y_.norm();
      for (const auto& mtx : z_.m) ray_norm += mtx.norm();
      if (ray_norm > 1e-300 &&
          improve_p / ray_norm > opts_.certificate_ratio * tol) {
        RealVector cert = -cone_adjoint(z_);
        if (a_.p > 0) cert += a_.A.transpose() * y_;
        if (cert.norm() / (improve_p * norm_c_) <= tol) {
          return finalize(SdpStatus::Infeasible,
                          "primal infeasibility certificate found");
        }
      }
    }
    const double improve_d = -a_.c.dot(x_);
    if (improve_d > 0.0 && x_.norm() > 1e-300 &&
        improve_d / x_.norm() > opts_.certificate_ratio * tol) {
      const double eqres = a_.p > 0 ? (a_.A * x_).norm() : 0.0;
      double cone_viol = 0.0;
      for (int j = 0; j < a_.nb; ++j) {
        cone_viol = std::max(cone_viol, -min_eigenvalue(px.m[j]));
      }
      double sviol = 0.0;
      for (int j = 0; j < a_.nb; ++j) {
        sviol += (s_.m[j] - px.m[j]).norm();
      }
      if ((eqres + sviol) / improve_d <= tol &&
          cone_viol / improve_d <= tol) {
        return finalize(SdpStatus::Unbounded,
                        "dual infeasibility certificate found");
      }
    }

    if (!update_scalings()) {
      return fail_with_best(SdpStatus::NumericalFailure,
                             "iterate left the cone interior");
    }
    build_kkt();

    RealVector u1x, u1y;
    ConeVec u1z;
    if (!solve_k3(-a_.c, a_.b, nullptr, u1x, u1y, u1z)) {
      return fail_with_best(SdpStatus::NumericalFailure, "KKT solve failed");
    }

    Direction aff;
    if (!direction(0.0, nullptr, 0.0, u1x, u1y, u1z, aff)) {
      return fail_with_best(SdpStatus::NumericalFailure,
                             "affine direction failed");
    }
    const double alpha_aff = std::min(1.0, max_step(aff));

    double mu_aff = (tau_ + alpha_aff * aff.dtau) *
                    (kappa_ + alpha_aff * aff.dkappa);
    ConeVec gamma(a_.dims);
    for (int j = 0; j < a_.nb; ++j) {
      const ComplexMatrix s_new = s_.m[j] + alpha_aff * aff.ds.m[j];
      const ComplexMatrix z_new = z_.m[j] + alpha_aff * aff.dz.m[j];
      mu_aff += herm_inner(s_new, z_new);
      // Mehrotra correction in the scaled frame
      const ComplexMatrix dst =
          scal_[j].Rinv * aff.ds.m[j] * scal_[j].Rinv.adjoint();
      const ComplexMatrix dzt =
          scal_[j].R.adjoint() * aff.dz.m[j] * scal_[j].R;
      gamma.m[j] = 0.5 * (dst * dzt + dzt * dst);
    }
    mu_aff /= (nu_ + 1);
    double sigma = std::pow(std::max(0.0, mu_aff / mu_), 3.0);
    sigma = std::min(1.0, sigma);

    Direction dir;
    if (!direction(sigma, &gamma, aff.dtau * aff.dkappa, u1x, u1y, u1z,
                   dir)) {
      return fail_with_best(SdpStatus::NumericalFailure, "corrector failed");
    }
    const double alpha = std::min(1.0, 0.99 * max_step(dir));
    if (!std::isfinite(alpha) || alpha <= 1e-10) {
      if (++tiny_steps >= 3) {
        return fail_with_best(
            SdpStatus::NumericalFailure,
            "step size collapsed (ill-conditioned instance?)");
      }
    } else {
      tiny_steps = 0;
    }

    x_ += alpha * dir.dx;
    if (a_.p > 0) y_ += alpha * dir.dy;
    tau_ += alpha * dir.dtau;
    kappa_ += alpha * dir.dkappa;
    for (int j = 0; j < a_.nb; ++j) {
      s_.m[j] = hermitize(s_.m[j] + alpha * dir.ds.m[j]);
      z_.m[j] = hermitize(z_.m[j] + alpha * dir.dz.m[j]);
    }
    if (tau_ < 1e-12 || !std::isfinite(tau_) || !std::isfinite(kappa_)) {
      return fail_with_best(
          SdpStatus::NumericalFailure,
          "embedding variable tau collapsed without certificate");
    }
  }
  return fail_with_best(SdpStatus::NumericalFailure,
                         "iteration limit reached");
}

}  // namespace

SdpSolution solve(const SdpInstance& instance, const SdpOptions& options) {
  Solver solver(instance, options);
  SdpSolution sol = solver.run();
  if (sol.status == SdpStatus::NumericalFailure) {
    // Retry with the augmented KKT form unless the instance is so large that
    // the unreduced system would be impractical.
    long aug_dim = instance.scalar_count();
    for (int j = 0; j < instance.block_count(); ++j) {
      const long m = instance.block_dim(j);
      aug_dim += 2 * m * m;
    }
    for (const auto& c : instance.constraints()) {
      (void)c;
      ++aug_dim;
    }
    if (aug_dim <= 4000) {
      Solver retry(instance, options, /*augmented=*/true);
      SdpSolution sol2 = retry.run();
      if (sol2.status != SdpStatus::NumericalFailure ||
          std::max({sol2.primal_residual, sol2.dual_residual, sol2.gap}) <
              std::max({sol.primal_residual, sol.dual_residual, sol.gap})) {
        sol = std::move(sol2);
      }
      sol.message += " [augmented retry]";
    }
  }
  // Post-check: dropped redundant equality rows must be consistent.
  if (sol.status == SdpStatus::Optimal) {
    const auto& rows = instance.constraints();
    double worst = 0.0;
    for (const auto& row : rows) {
      double lhs = 0.0;
      for (const auto& t : row.block_terms) {
        lhs += (t.coeff.cwiseProduct(sol.blocks[t.block].conjugate()))
                   .sum()
                   .real();
      }
      for (const auto& t : row.scalar_terms) {
        lhs += t.coeff * sol.scalars[t.scalar];
      }
      worst = std::max(worst, std::abs(lhs - row.rhs));
    }
    const double scale = 1.0 + std::abs(sol.value);
    if (worst > 1e3 * options.tol * scale) {
      sol.status = SdpStatus::NumericalFailure;
      sol.message = "solution violates a dependent equality row by " +
                    std::to_string(worst) +
                    " (inconsistent constraint system?)";
    }
  }
  return sol;
}

FeasibilityResult feasibility(const SdpInstance& instance,
                              const SdpOptions& options) {
  SdpInstance phase1;
  for (int j = 0; j < instance.block_count(); ++j) {
    phase1.add_block(instance.block_name(j), instance.block_dim(j));
  }
  for (int k = 0; k < instance.scalar_count(); ++k) {
    phase1.add_scalar(instance.scalar_name(k));
  }
  const int alpha = phase1.add_scalar("feas_margin");
  const int cap_slack = phase1.add_block("feas_cap_slack", 1);

  // Substitute X_j = X'_j + alpha I into every row.
  for (const auto& row : instance.constraints()) {
    SdpConstraint shifted = row;
    double alpha_coeff = 0.0;
    for (const auto& t : row.block_terms) {
      alpha_coeff += t.coeff.trace().real();
    }
    if (alpha_coeff != 0.0) {
      shifted.scalar_terms.push_back({alpha, alpha_coeff});
    }
    phase1.add_constraint(std::move(shifted));
  }
  // alpha <= 1 so the margin program is always bounded
  {
    SdpConstraint cap;
    cap.block_terms.push_back({cap_slack, ComplexMatrix::Ones(1, 1)});
    cap.scalar_terms.push_back({alpha, 1.0});
    cap.rhs = 1.0;
    phase1.add_constraint(std::move(cap));
  }
  SdpObjective obj;
  obj.scalar_terms.push_back({alpha, 1.0});
  phase1.set_objective(SdpSense::Max, obj);

  FeasibilityResult out;
  out.raw = solve(phase1, options);
  if (out.raw.status != SdpStatus::Optimal) {
    out.verdict = FeasVerdict::Undecided;
    return out;
  }
  out.margin = out.raw.value;
  out.scalars.assign(out.raw.scalars.begin(), out.raw.scalars.end() - 1);
  out.blocks.reserve(instance.block_count());
  for (int j = 0; j < instance.block_count(); ++j) {
    out.blocks.push_back(out.raw.blocks[j] +
                         out.margin * ComplexMatrix::Identity(
                                          instance.block_dim(j),
                                          instance.block_dim(j)));
  }
  const double band = options.certificate_ratio * options.tol;
  if (out.margin >= -band) {
    out.verdict = FeasVerdict::Feasible;
  } else {
    out.verdict = FeasVerdict::Infeasible;
    // Flip to the Farkas orientation: sum_i y_i F_ij >= 0, y.b < 0.
    out.ray_eq_duals.reserve(out.raw.eq_duals.size() - 1);
    for (std::size_t i = 0; i + 1 < out.raw.eq_duals.size(); ++i) {
      out.ray_eq_duals.push_back(-out.raw.eq_duals[i]);
    }
    out.ray_block_duals.assign(out.raw.block_duals.begin(),
                               out.raw.block_duals.begin() +
                                   instance.block_count());
  }
  return out;
}

}  // namespace qcompat
