#include "qcompat/povm.hpp"

#include <cstdio>
#include <stdexcept>

namespace qcompat {

int JointPovm::flat_index(const std::vector<int>& multi) const {
  if (multi.size() != shape.size()) {
    throw std::invalid_argument("JointPovm: multi-index rank mismatch");
  }
  int flat = 0;
  for (std::size_t x = 0; x < shape.size(); ++x) {
    if (multi[x] < 0 || multi[x] >= shape[x]) {
      throw std::out_of_range("JointPovm: multi-index out of range");
    }
    flat = flat * shape[x] + multi[x];
  }
  return flat;
}

std::vector<int> JointPovm::multi_index(int flat) const {
  std::vector<int> multi(shape.size(), 0);
  for (int x = static_cast<int>(shape.size()) - 1; x >= 0; --x) {
    multi[x] = flat % shape[x];
    flat /= shape[x];
  }
  return multi;
}

namespace {

ValidationReport validate_effects(const std::vector<ComplexMatrix>& effects,
                                  int dim, const Tolerances& tol) {
  ValidationReport report;
  if (effects.empty()) {
    report.message = "no effects";
    return report;
  }
  ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
  double worst = 0.0;
  int worst_idx = -1;
  for (std::size_t i = 0; i < effects.size(); ++i) {
    const auto& e = effects[i];
    if (e.rows() != dim || e.cols() != dim) {
      report.message = "effect dimension mismatch";
      return report;
    }
    if (!is_hermitian(e, tol.herm * std::max(1.0, max_abs(e)))) {
      report.message = "effect " + std::to_string(i) + " is not self-adjoint";
      return report;
    }
    const double deficit = std::max(0.0, -min_eigenvalue(hermitize(e)));
    if (deficit > worst) {
      worst = deficit;
      worst_idx = static_cast<int>(i);
    }
    sum += e;
  }
  report.psd_violation = worst;
  report.worst_effect = worst_idx;
  report.sum_residual =
      max_abs(sum - ComplexMatrix::Identity(dim, dim));
  report.ok =
      report.psd_violation <= tol.psd && report.sum_residual <= tol.povm_sum;
  if (!report.ok) {
    report.message = "psd violation " + std::to_string(report.psd_violation) +
                     ", normalization residual " +
                     std::to_string(report.sum_residual);
  }
  return report;
}

}  // namespace

ValidationReport validate(const Povm& p, const Tolerances& tol) {
  return validate_effects(p.effects, p.dim, tol);
}

ValidationReport validate(const JointPovm& j, const Tolerances& tol) {
  std::size_t expected = 1;
  for (int k : j.shape) expected *= static_cast<std::size_t>(k);
  if (expected != j.effects.size()) {
    ValidationReport report;
    report.message = "effect count does not match outcome shape";
    return report;
  }
  return validate_effects(j.effects, j.dim, tol);
}

Povm apply_noise(const Povm& p, double t) {
  if (t < 0.0 || t > 1.0) {
    throw std::invalid_argument("apply_noise: t must lie in [0,1]");
  }
  const int k = p.outcomes();
  Povm out;
  out.dim = p.dim;
  out.effects.reserve(k);
  const ComplexMatrix uniform =
      ComplexMatrix::Identity(p.dim, p.dim) / static_cast<double>(k);
  for (const auto& e : p.effects) {
    out.effects.push_back(t * e + (1.0 - t) * uniform);
  }
  return out;
}

PovmTuple apply_noise(const PovmTuple& tuple, const std::vector<double>& t) {
  if (t.size() != tuple.povms.size()) {
    throw std::invalid_argument("apply_noise: weight count mismatch");
  }
  PovmTuple out;
  out.dim = tuple.dim;
  out.povms.reserve(tuple.povms.size());
  for (std::size_t x = 0; x < tuple.povms.size(); ++x) {
    out.povms.push_back(apply_noise(tuple.povms[x], t[x]));
  }
  return out;
}

Povm reduce(const Povm& p, const Isometry& v) {
  if (v.ambient_dim() != p.dim) {
    throw std::invalid_argument("reduce: isometry ambient dim mismatch");
  }
  Povm out;
  out.dim = v.reduced_dim();
  out.effects.reserve(p.effects.size());
  const ComplexMatrix& m = v.matrix();
  for (const auto& e : p.effects) {
    out.effects.push_back(m.adjoint() * e * m);
  }
  return out;
}

PovmTuple reduce(const PovmTuple& tuple, const Isometry& v) {
  if (v.ambient_dim() != tuple.dim) {
    throw std::invalid_argument("reduce: isometry ambient dim mismatch");
  }
  PovmTuple out;
  out.dim = v.reduced_dim();
  out.povms.reserve(tuple.povms.size());
  for (const auto& p : tuple.povms) out.povms.push_back(reduce(p, v));
  return out;
}

Povm marginal(const JointPovm& joint, int axis) {
  const int g = static_cast<int>(joint.shape.size());
  if (axis < 0 || axis >= g) {
    throw std::out_of_range("marginal: axis out of range");
  }
  Povm out;
  out.dim = joint.dim;
  out.effects.assign(joint.shape[axis],
                     ComplexMatrix::Zero(joint.dim, joint.dim));
  for (std::size_t flat = 0; flat < joint.effects.size(); ++flat) {
    const auto multi = joint.multi_index(static_cast<int>(flat));
    out.effects[multi[axis]] += joint.effects[flat];
  }
  return out;
}

double pairwise_commutator_norm(const PovmTuple& tuple, bool cross_only) {
  double worst = 0.0;
  const int g = tuple.count();
  for (int x = 0; x < g; ++x) {
    for (int y = x; y < g; ++y) {
      if (cross_only && x == y) continue;
      for (std::size_t i = 0; i < tuple.povms[x].effects.size(); ++i) {
        const std::size_t j0 = (x == y) ? i + 1 : 0;
        for (std::size_t j = j0; j < tuple.povms[y].effects.size(); ++j) {
          const ComplexMatrix& a = tuple.povms[x].effects[i];
          const ComplexMatrix& b = tuple.povms[y].effects[j];
          worst = std::max(worst, spectral_norm(a * b - b * a));
        }
      }
    }
  }
  return worst;
}

Povm von_neumann_povm(const ComplexMatrix& basis, const Tolerances& tol) {
  if (basis.rows() != basis.cols()) {
    throw std::invalid_argument("von_neumann_povm: basis must be square");
  }
  const int d = static_cast<int>(basis.rows());
  const ComplexMatrix gram = basis.adjoint() * basis;
  if (max_abs(gram - ComplexMatrix::Identity(d, d)) > tol.iso) {
    throw std::invalid_argument("von_neumann_povm: basis is not unitary");
  }
  Povm out;
  out.dim = d;
  out.effects.reserve(d);
  for (int i = 0; i < d; ++i) {
    out.effects.push_back(basis.col(i) * basis.col(i).adjoint());
  }
  return out;
}

std::string tuple_hash(const PovmTuple& tuple) {
  std::string canon = "tuple/" + std::to_string(tuple.dim);
  char buf[64];
  for (const auto& p : tuple.povms) {
    canon += "|povm/" + std::to_string(p.outcomes());
    for (const auto& e : p.effects) {
      for (int i = 0; i < e.rows(); ++i) {
        for (int j = 0; j < e.cols(); ++j) {
          std::snprintf(buf, sizeof(buf), ";%.12g,%.12g", e(i, j).real(),
                        e(i, j).imag());
          canon += buf;
        }
      }
    }
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

JointPovm joint_from_commuting(const PovmTuple& tuple, const Tolerances& tol) {
  if (pairwise_commutator_norm(tuple, true) > tol.commute) {
    throw std::invalid_argument(
        "joint_from_commuting: cross pairs do not commute");
  }
  JointPovm joint;
  joint.dim = tuple.dim;
  joint.shape = tuple.outcome_counts();
  std::size_t total = 1;
  for (int k : joint.shape) total *= static_cast<std::size_t>(k);
  joint.effects.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::vector<int> multi(joint.shape.size());
    std::size_t rest = flat;
    for (int x = static_cast<int>(joint.shape.size()) - 1; x >= 0; --x) {
      multi[x] = static_cast<int>(rest % joint.shape[x]);
      rest /= joint.shape[x];
    }
    ComplexMatrix prod = ComplexMatrix::Identity(tuple.dim, tuple.dim);
    for (std::size_t x = 0; x < multi.size(); ++x) {
      prod = prod * tuple.povms[x].effects[multi[x]];
    }
    joint.effects.push_back(hermitize(prod));
  }
  return joint;
}

}  // namespace qcompat
