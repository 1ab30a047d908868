#include "qcompat/constructions.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qcompat/cloning.hpp"
#include "qcompat/compat.hpp"
#include "qcompat/rng.hpp"

namespace qcompat {

ComplexMatrix GeneralizedPermutation::matrix() const {
  ComplexMatrix p = ComplexMatrix::Zero(dim, dim);
  for (int j = 0; j < dim; ++j) p(sigma[j], j) = z(j);
  return p;
}

double MubFamily::unbiasedness_defect() const {
  double worst = 0.0;
  const double target = 1.0 / dim;
  for (std::size_t x = 0; x < bases.size(); ++x) {
    for (std::size_t y = x + 1; y < bases.size(); ++y) {
      const ComplexMatrix overlaps = bases[x].adjoint() * bases[y];
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
          worst = std::max(worst, std::abs(std::norm(overlaps(i, j)) - target));
        }
      }
    }
  }
  return worst;
}

ComplexMatrix fourier_matrix(int d) {
  if (d < 1) throw std::invalid_argument("fourier_matrix: d >= 1");
  ComplexMatrix f(d, d);
  const double step = 2.0 * M_PI / d;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      f(a, b) = std::polar(scale, step * a * b);
    }
  }
  return f;
}

namespace {

bool is_prime(int d) {
  if (d < 2) return false;
  for (int q = 2; q * q <= d; ++q) {
    if (d % q == 0) return false;
  }
  return true;
}

}  // namespace

MubFamily mub_family(int d, int count, const Tolerances& tol) {
  if (!is_prime(d)) {
    throw std::invalid_argument("mub_family: implemented for prime d only");
  }
  if (count < 1 || count > d + 1) {
    throw std::invalid_argument("mub_family: need 1 <= count <= d+1");
  }
  MubFamily fam;
  fam.dim = d;
  fam.bases.push_back(ComplexMatrix::Identity(d, d));
  if (d == 2) {
    ComplexMatrix x(2, 2), y(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    x << s, s, s, -s;
    y << s, s, Complex(0, s), Complex(0, -s);
    fam.bases.push_back(x);
    fam.bases.push_back(y);
  } else {
    // b_t(l, j) = w^{t l^2 + j l} / sqrt(d); t = 0 is the Fourier basis
    const double step = 2.0 * M_PI / d;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (int t = 0; t < d && static_cast<int>(fam.bases.size()) < count; ++t) {
      ComplexMatrix b(d, d);
      for (int l = 0; l < d; ++l) {
        for (int j = 0; j < d; ++j) {
          b(l, j) = std::polar(scale, step * ((t * l * l + j * l) % d));
        }
      }
      fam.bases.push_back(std::move(b));
    }
  }
  fam.bases.resize(count);
  if (fam.unbiasedness_defect() > 1e-9) {
    throw std::logic_error("mub_family: construction violates unbiasedness");
  }
  for (const auto& b : fam.bases) {
    if (max_abs(b.adjoint() * b - ComplexMatrix::Identity(d, d)) > tol.iso) {
      throw std::logic_error("mub_family: basis is not unitary");
    }
  }
  return fam;
}

namespace {

std::vector<GeneralizedPermutation> zeta_candidates(const ComplexMatrix& u,
                                                    ZetaStrategy strategy) {
  const int d = static_cast<int>(u.rows());
  std::vector<GeneralizedPermutation> cands;
  std::vector<int> id(d);
  for (int j = 0; j < d; ++j) id[j] = j;

  const bool all = strategy == ZetaStrategy::All;
  if (all || strategy == ZetaStrategy::EigenvalueClusters) {
    Eigen::ComplexEigenSolver<ComplexMatrix> es(u);
    std::vector<Complex> eigs(es.eigenvalues().data(),
                              es.eigenvalues().data() + d);
    std::sort(eigs.begin(), eigs.end(), [](Complex a, Complex b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    for (std::size_t i = 0; i < eigs.size(); ++i) {
      if (i > 0 && std::abs(eigs[i] - eigs[i - 1]) <= 1e-8) continue;
      GeneralizedPermutation g;
      g.dim = d;
      g.sigma = id;
      g.z = ComplexVector::Constant(d, eigs[i]);
      cands.push_back(std::move(g));
    }
  }
  if (all || strategy == ZetaStrategy::DiagonalPhases) {
    GeneralizedPermutation g;
    g.dim = d;
    g.sigma = id;
    g.z = ComplexVector::Ones(d);
    for (int j = 0; j < d; ++j) {
      if (std::abs(u(j, j)) > 1e-12) g.z(j) = u(j, j) / std::abs(u(j, j));
    }
    cands.push_back(std::move(g));
  }
  if ((all || strategy == ZetaStrategy::ExhaustivePermutations) && d <= 6) {
    std::vector<int> sigma = id;
    do {
      bool usable = true;
      for (int j = 0; j < d && usable; ++j) {
        usable = std::abs(u(sigma[j], j)) > 1e-12;
      }
      if (!usable) continue;
      GeneralizedPermutation g;
      g.dim = d;
      g.sigma = sigma;
      g.z = ComplexVector(d);
      for (int j = 0; j < d; ++j) {
        g.z(j) = u(sigma[j], j) / std::abs(u(sigma[j], j));
      }
      cands.push_back(std::move(g));
    } while (std::next_permutation(sigma.begin(), sigma.end()));
  }
  return cands;
}

}  // namespace

ZetaCertificate zeta_lower_bound(const ComplexMatrix& u, ZetaStrategy strategy,
                                 const Tolerances& tol) {
  const int d = static_cast<int>(u.rows());
  if (u.cols() != d ||
      max_abs(u.adjoint() * u - ComplexMatrix::Identity(d, d)) > tol.iso) {
    throw std::invalid_argument("zeta_lower_bound: input must be unitary");
  }
  ZetaCertificate best;
  for (auto& cand : zeta_candidates(u, strategy)) {
    const ComplexMatrix diff = (cand.matrix() - u).adjoint();
    Subspace k = kernel(diff, 1e-8);
    if (k.dim() > best.bound) {
      best.bound = k.dim();
      best.gperm = std::move(cand);
      best.subspace = std::move(k);
    }
  }
  return best;
}

double zeta_certificate_defect(const ComplexMatrix& u,
                               const ZetaCertificate& cert) {
  if (cert.bound == 0) return 0.0;
  const ComplexMatrix& v = cert.subspace.basis;
  const ComplexMatrix resid =
      v.adjoint() * (cert.gperm.matrix() - u);  // = [z_j V*e_sigma(j) - V*u_j]
  double worst = 0.0;
  for (int j = 0; j < resid.cols(); ++j) {
    worst = std::max(worst, resid.col(j).norm());
  }
  return worst;
}

SpinSystem spin_system(int level) {
  if (level < 1) throw std::invalid_argument("spin_system: level >= 1");
  ComplexMatrix sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, Complex(0, -1), Complex(0, 1), 0;
  sz << 1, 0, 0, -1;
  SpinSystem sys;
  sys.level = 1;
  sys.matrices = {sx, sy, sz};
  while (sys.level < level) {
    const long sz_prev = sys.matrices[0].rows();
    std::vector<ComplexMatrix> next;
    next.reserve(sys.matrices.size() + 2);
    for (const auto& f : sys.matrices) next.push_back(kron(sx, f));
    next.push_back(kron(sy, ComplexMatrix::Identity(sz_prev, sz_prev)));
    next.push_back(kron(sz, ComplexMatrix::Identity(sz_prev, sz_prev)));
    sys.matrices = std::move(next);
    ++sys.level;
  }
  return sys;
}

PovmTuple spin_povms(int level) {
  const SpinSystem sys = spin_system(level);
  const int d = static_cast<int>(sys.matrices[0].rows());
  const ComplexMatrix eye = ComplexMatrix::Identity(d, d);
  PovmTuple tuple;
  tuple.dim = d;
  for (const auto& f : sys.matrices) {
    Povm p;
    p.dim = d;
    p.effects = {0.5 * (eye + f), 0.5 * (eye - f)};
    tuple.povms.push_back(std::move(p));
  }
  TupleMetadata meta;
  meta.spin = SpinMetadata{level, std::vector<double>(sys.matrices.size(), 1.0)};
  tuple.metadata = std::move(meta);
  return tuple;
}

Isometry mub_truncation_isometry(const ComplexMatrix& basis, int r,
                                 const Tolerances& tol) {
  const int d = static_cast<int>(basis.rows());
  if (r < 1 || r > d) {
    throw std::invalid_argument("mub_truncation_isometry: need 1 <= r <= d");
  }
  return Isometry(basis.leftCols(r), tol);
}

LambdaInterval lambda_interval(int r, int d) {
  if (r < 2) throw std::invalid_argument("lambda_interval: r >= 2 required");
  if (d < 2) throw std::invalid_argument("lambda_interval: d >= 2 required");
  LambdaInterval out;
  const double sq = std::sqrt(static_cast<double>(d));
  out.lo = (2.0 + sq) / (2.0 * (1.0 + sq));
  out.hi = (2.0 + r) / (2.0 * (1.0 + r));
  return out;
}

namespace {

RealVector herm_coords(const ComplexMatrix& a) {
  const int d = static_cast<int>(a.rows());
  RealVector v(d * d);
  int k = 0;
  const double s2 = std::sqrt(2.0);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < j; ++i) {
      v(k++) = s2 * a(i, j).real();
      v(k++) = s2 * a(i, j).imag();
    }
    v(k++) = a(j, j).real();
  }
  return v;
}

ComplexMatrix herm_from_coords(const RealVector& v, int d) {
  ComplexMatrix a(d, d);
  int k = 0;
  const double s2 = std::sqrt(2.0);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < j; ++i) {
      const Complex e(v(k) / s2, v(k + 1) / s2);
      k += 2;
      a(i, j) = e;
      a(j, i) = std::conj(e);
    }
    a(j, j) = v(k++);
  }
  return a;
}

// Orthonormal basis (as matrices) of span_R{I, effects...}; the identity
// direction is always the first element.
std::vector<ComplexMatrix> hermitian_span_basis(
    const std::vector<ComplexMatrix>& effects, int d) {
  std::vector<RealVector> coords;
  coords.push_back(herm_coords(ComplexMatrix::Identity(d, d)));
  coords[0].normalize();
  for (const auto& a : effects) {
    RealVector v = herm_coords(hermitize(a));
    for (const auto& b : coords) v -= b.dot(v) * b;
    for (const auto& b : coords) v -= b.dot(v) * b;  // second MGS pass
    if (v.norm() > 1e-10) {
      v.normalize();
      coords.push_back(std::move(v));
    }
  }
  std::vector<ComplexMatrix> basis;
  basis.reserve(coords.size());
  for (const auto& v : coords) basis.push_back(herm_from_coords(v, d));
  return basis;
}

// r orthonormal vectors whose cross matrix elements vanish for every basis
// element; the greedy step picks from the orthocomplement of {B_s x_j}.
std::optional<ComplexMatrix> diagonalizing_frame(
    const std::vector<ComplexMatrix>& basis,
    const std::vector<ComplexMatrix>& effects, int d, int count,
    const ReductionOptions& opts, const Tolerances& tol) {
  const int nspan = static_cast<int>(basis.size());
  if (d < nspan * (count - 1)) return std::nullopt;

  auto attempt_run = [&](int attempt) -> std::optional<ComplexMatrix> {
    Rng rng = Rng::derive(opts.seed, attempt);
    ComplexMatrix frame(d, count);
    ComplexMatrix constraints(d, 0);
    for (int step = 0; step < count; ++step) {
      ComplexMatrix q;
      if (constraints.cols() == 0) {
        q = ComplexMatrix::Identity(d, d);
      } else {
        Eigen::JacobiSVD<ComplexMatrix> svd(constraints,
                                            Eigen::ComputeFullU);
        const auto& sv = svd.singularValues();
        int rank = 0;
        for (int i = 0; i < sv.size(); ++i) {
          if (sv(i) > 1e-11 * std::max(1.0, sv(0))) ++rank;
        }
        if (rank >= d) return std::nullopt;
        q = svd.matrixU().rightCols(d - rank);
      }
      ComplexVector x;
      if (attempt == 0 || nspan == 1) {
        x = q.col(0);
      } else {
        // Seed with an eigenvector of a random combination of the span
        // basis compressed to the complement; at the tight dimension bound
        // this aligns the new constraint directions with the old ones.
        ComplexMatrix m = ComplexMatrix::Zero(d, d);
        for (int s = 1; s < nspan; ++s) m += rng.gaussian() * basis[s];
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(
            hermitize(q.adjoint() * m * q));
        const int pick = static_cast<int>(rng.integer() %
                                          static_cast<std::uint64_t>(q.cols()));
        x = q * es.eigenvectors().col(pick);
      }
      x.normalize();
      frame.col(step) = x;
      ComplexMatrix grown(d, constraints.cols() + nspan);
      grown.leftCols(constraints.cols()) = constraints;
      for (int s = 0; s < nspan; ++s) {
        grown.col(constraints.cols() + s) = basis[s] * x;
      }
      constraints = std::move(grown);
    }
    // verify the cross elements against the actual effects
    for (int i = 0; i < count; ++i) {
      for (int j = 0; j < count; ++j) {
        if (i == j) continue;
        for (const auto& a : effects) {
          if (std::abs(frame.col(i).dot((a * frame.col(j)).eval())) >
              tol.commute) {
            return std::nullopt;
          }
        }
      }
    }
    const ComplexMatrix gram = frame.adjoint() * frame;
    if (max_abs(gram - ComplexMatrix::Identity(count, count)) > tol.iso) {
      return std::nullopt;
    }
    return frame;
  };

  auto first = attempt_run(0);
  if (first) return first;
  const int restarts = std::max(1, opts.restarts);
  for (int attempt = 1; attempt <= restarts; ++attempt) {
    auto got = attempt_run(attempt);
    if (got) return got;
  }
  return std::nullopt;
}

}  // namespace

Isometry commutative_reduction(const std::vector<ComplexMatrix>& effects,
                               int r, const ReductionOptions& opts,
                               const Tolerances& tol) {
  if (effects.empty()) {
    throw std::invalid_argument("commutative_reduction: no effects");
  }
  const int d = static_cast<int>(effects[0].rows());
  if (r < 1 || r > d) {
    throw std::invalid_argument("commutative_reduction: need 1 <= r <= d");
  }
  const auto basis = hermitian_span_basis(effects, d);
  const int nspan = static_cast<int>(basis.size());
  auto frame = diagonalizing_frame(basis, effects, d, r, opts, tol);
  if (!frame) {
    const int r_max = 1 + (d - 1) / nspan;
    throw std::invalid_argument(
        "commutative_reduction: dimension precondition unmet (span dim " +
        std::to_string(nspan) + ", largest guaranteed r = " +
        std::to_string(r_max) + ")");
  }
  return Isometry(*frame, tol);
}

ScalarReduction scalar_reduction(const std::vector<ComplexMatrix>& effects,
                                 int r, const ReductionOptions& opts,
                                 const Tolerances& tol) {
  if (effects.empty()) {
    throw std::invalid_argument("scalar_reduction: no effects");
  }
  const int d = static_cast<int>(effects[0].rows());
  if (r < 1 || r > d) {
    throw std::invalid_argument("scalar_reduction: need 1 <= r <= d");
  }
  const auto basis = hermitian_span_basis(effects, d);
  const int nspan = static_cast<int>(basis.size());

  ScalarReduction out{Isometry(ComplexMatrix::Identity(d, 1)), {}};
  if (nspan == 1) {  // every effect is a multiple of the identity
    ComplexMatrix v = ComplexMatrix::Identity(d, d).leftCols(r);
    out.isometry = Isometry(std::move(v), tol);
  } else {
    const int m_pts = (r - 1) * nspan + 1;
    auto frame = diagonalizing_frame(basis, effects, d, m_pts, opts, tol);
    if (!frame) {
      throw std::invalid_argument(
          "scalar_reduction: dimension precondition unmet (need d >= " +
          std::to_string(nspan * (m_pts - 1) + 1) + ", have " +
          std::to_string(d) + ")");
    }
    std::vector<RealVector> points;
    points.reserve(m_pts);
    for (int j = 0; j < m_pts; ++j) {
      RealVector p(nspan - 1);
      for (int s = 1; s < nspan; ++s) {
        p(s - 1) = frame->col(j).dot((basis[s] * frame->col(j)).eval()).real();
      }
      points.push_back(std::move(p));
    }
    const auto part = tverberg_partition(points, r);
    ComplexMatrix v = ComplexMatrix::Zero(d, r);
    for (int l = 0; l < r; ++l) {
      for (int j : part.parts[l]) {
        v.col(l) += std::sqrt(std::max(0.0, part.weights[j])) * frame->col(j);
      }
    }
    out.isometry = Isometry(std::move(v), tol);
  }

  const ComplexMatrix& v = out.isometry.matrix();
  for (const auto& a : effects) {
    const ComplexMatrix reduced = v.adjoint() * a * v;
    const double lambda = reduced.trace().real() / r;
    if (max_abs(reduced - lambda * ComplexMatrix::Identity(r, r)) >
        tol.scalar_red) {
      throw std::runtime_error(
          "scalar_reduction: reduced effect is not scalar within tolerance");
    }
    out.scalars.push_back(lambda);
  }
  return out;
}

TverbergResult tverberg_partition(const std::vector<RealVector>& points,
                                  int r, long budget,
                                  const SdpOptions& options) {
  const int m = static_cast<int>(points.size());
  if (m < r || r < 1) {
    throw std::invalid_argument("tverberg_partition: need #points >= r >= 1");
  }
  const int n = m > 0 ? static_cast<int>(points[0].size()) : 0;

  TverbergResult out;
  if (r == 1) {
    out.parts = {std::vector<int>(m)};
    for (int j = 0; j < m; ++j) out.parts[0][j] = j;
    out.point = RealVector::Zero(n);
    for (const auto& p : points) out.point += p / m;
    out.weights.assign(m, 1.0 / m);
    return out;
  }

  auto certify = [&](const std::vector<std::vector<int>>& parts)
      -> std::optional<TverbergResult> {
    SdpInstance inst;
    std::vector<int> wblocks(m, -1);
    for (const auto& part : parts) {
      for (int j : part) {
        wblocks[j] = inst.add_block("w" + std::to_string(j), 1);
      }
    }
    std::vector<int> mu(n);
    for (int c = 0; c < n; ++c) mu[c] = inst.add_scalar("mu" + std::to_string(c));
    for (const auto& part : parts) {
      SdpConstraint norm;
      for (int j : part) {
        norm.block_terms.push_back({wblocks[j], ComplexMatrix::Ones(1, 1)});
      }
      norm.rhs = 1.0;
      inst.add_constraint(std::move(norm));
      for (int c = 0; c < n; ++c) {
        SdpConstraint row;
        for (int j : part) {
          row.block_terms.push_back(
              {wblocks[j], points[j](c) * ComplexMatrix::Ones(1, 1)});
        }
        row.scalar_terms.push_back({mu[c], -1.0});
        inst.add_constraint(std::move(row));
      }
    }
    const auto feas = feasibility(inst, options);
    if (feas.verdict != FeasVerdict::Feasible) return std::nullopt;

    TverbergResult res;
    res.parts = parts;
    res.weights.assign(m, 0.0);
    for (int j = 0; j < m; ++j) {
      if (wblocks[j] >= 0) {
        res.weights[j] = std::max(0.0, feas.blocks[wblocks[j]](0, 0).real());
      }
    }
    for (const auto& part : parts) {
      double total = 0.0;
      for (int j : part) total += res.weights[j];
      if (total <= 1e-12) return std::nullopt;
      for (int j : part) res.weights[j] /= total;
    }
    res.point = RealVector::Zero(n);
    for (int j : parts[0]) res.point += res.weights[j] * points[j];
    // verified common point: every part must reproduce it
    for (const auto& part : parts) {
      RealVector p = RealVector::Zero(n);
      for (int j : part) p += res.weights[j] * points[j];
      if ((p - res.point).norm() > 1e-8) return std::nullopt;
    }
    return res;
  };

  // enumerate set partitions into exactly r nonempty parts in restricted
  // growth order; first certified partition wins
  std::vector<int> assign(m, 0);
  long examined = 0;
  std::optional<TverbergResult> found;

  std::function<bool(int, int)> recurse = [&](int pos, int maxseen) -> bool {
    if (found) return true;
    if (m - pos < r - (maxseen + 1)) return false;  // cannot reach r parts
    if (pos == m) {
      if (maxseen + 1 != r) return false;
      if (++examined > budget) {
        throw std::runtime_error(
            "tverberg_partition: enumeration budget exhausted after " +
            std::to_string(budget) + " candidates");
      }
      std::vector<std::vector<int>> parts(r);
      for (int j = 0; j < m; ++j) parts[assign[j]].push_back(j);
      found = certify(parts);
      return found.has_value();
    }
    const int limit = std::min(maxseen + 1, r - 1);
    for (int b = 0; b <= limit; ++b) {
      assign[pos] = b;
      if (recurse(pos + 1, std::max(maxseen, b))) return true;
    }
    return false;
  };
  assign[0] = 0;
  recurse(1, 0);
  if (!found) {
    throw std::runtime_error(
        "tverberg_partition: no partition with intersecting hulls found");
  }
  return *found;
}

DeltaVerdict delta_region_member(
    const MubFamily& family, int g, int r, const std::vector<double>& s,
    const std::function<bool(const PovmTuple&, int)>& search_fallback,
    const SdpOptions& options) {
  if (static_cast<int>(family.bases.size()) < g + 1) {
    throw std::invalid_argument(
        "delta_region_member: need g+1 bases (the extra one is truncated)");
  }
  if (static_cast<int>(s.size()) != g) {
    throw std::invalid_argument("delta_region_member: s must have g entries");
  }
  const int d = family.dim;
  if (r < 1 || r > d) {
    throw std::invalid_argument("delta_region_member: need 1 <= r <= d");
  }

  PovmTuple tuple;
  tuple.dim = d;
  for (int x = 0; x < g; ++x) {
    tuple.povms.push_back(von_neumann_povm(family.bases[x]));
  }
  tuple = apply_noise(tuple, s);

  bool member = false;
  double smax = 0.0;
  for (double v : s) smax = std::max(smax, v);
  if (smax == 0.0 || r == 1) {
    member = true;
  } else if (r >= 2 && in_gamma_clone({g, r, s}, options).member) {
    member = true;
  }
  if (member) {
    // re-verify through the truncation isometry when the SDP fits
    long joint_size = r;
    for (int x = 0; x < g; ++x) joint_size *= d;
    if (joint_size <= options.variable_dim_cap) {
      const Isometry v = mub_truncation_isometry(family.bases[g], r);
      CompatOptions copts;
      copts.sdp = options;
      const auto report = joint_measurability(reduce(tuple, v), copts);
      if (report.verdict != CompatVerdict::Compatible) {
        return DeltaVerdict::Unknown;
      }
    }
    return DeltaVerdict::Member;
  }
  if (search_fallback && search_fallback(tuple, r)) {
    return DeltaVerdict::Member;
  }
  return DeltaVerdict::Unknown;
}

}  // namespace qcompat
