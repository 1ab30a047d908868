#include "qcompat/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace qcompat::io {

double round12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return std::strtod(buf, nullptr);
}

json to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) {
      row.push_back({round12(m(i, j).real()), round12(m(i, j).imag())});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument("matrix json: expected a nonempty array");
  }
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  ComplexMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols) {
      throw std::invalid_argument("matrix json: ragged rows");
    }
    for (int c = 0; c < cols; ++c) {
      const auto& e = j[r][c];
      if (!e.is_array() || e.size() != 2) {
        throw std::invalid_argument("matrix json: entries are [re, im]");
      }
      m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

json to_json(const Povm& p) {
  json effects = json::array();
  for (const auto& e : p.effects) effects.push_back(to_json(e));
  return {{"dim", p.dim}, {"effects", std::move(effects)}};
}

Povm povm_from_json(const json& j) {
  Povm p;
  p.dim = j.at("dim").get<int>();
  for (const auto& e : j.at("effects")) {
    p.effects.push_back(matrix_from_json(e));
  }
  return p;
}

json to_json(const PovmTuple& t) {
  json povms = json::array();
  for (const auto& p : t.povms) povms.push_back(to_json(p));
  json out = {{"dim", t.dim}, {"povms", std::move(povms)}};
  if (t.metadata) {
    json meta = json::object();
    if (t.metadata->mub) {
      json bases = json::array();
      for (const auto& b : t.metadata->mub->bases) bases.push_back(to_json(b));
      json noise = json::array();
      for (double v : t.metadata->mub->noise) noise.push_back(round12(v));
      meta["mub"] = {{"bases", std::move(bases)}, {"noise", std::move(noise)}};
    }
    if (t.metadata->spin) {
      json noise = json::array();
      for (double v : t.metadata->spin->noise) noise.push_back(round12(v));
      meta["spin"] = {{"level", t.metadata->spin->level},
                      {"noise", std::move(noise)}};
    }
    out["metadata"] = std::move(meta);
  }
  return out;
}

PovmTuple tuple_from_json(const json& j) {
  PovmTuple t;
  t.dim = j.at("dim").get<int>();
  for (const auto& p : j.at("povms")) t.povms.push_back(povm_from_json(p));
  if (j.contains("metadata")) {
    TupleMetadata meta;
    const auto& m = j.at("metadata");
    if (m.contains("mub")) {
      MubMetadata mub;
      for (const auto& b : m.at("mub").at("bases")) {
        mub.bases.push_back(matrix_from_json(b));
      }
      mub.noise = m.at("mub").at("noise").get<std::vector<double>>();
      meta.mub = std::move(mub);
    }
    if (m.contains("spin")) {
      SpinMetadata spin;
      spin.level = m.at("spin").at("level").get<int>();
      spin.noise = m.at("spin").at("noise").get<std::vector<double>>();
      meta.spin = std::move(spin);
    }
    t.metadata = std::move(meta);
  }
  return t;
}

json to_json(const JointPovm& t) {
  json effects = json::array();
  for (const auto& e : t.effects) effects.push_back(to_json(e));
  return {{"dim", t.dim}, {"shape", t.shape}, {"effects", std::move(effects)}};
}

JointPovm joint_from_json(const json& j) {
  JointPovm t;
  t.dim = j.at("dim").get<int>();
  t.shape = j.at("shape").get<std::vector<int>>();
  for (const auto& e : j.at("effects")) {
    t.effects.push_back(matrix_from_json(e));
  }
  return t;
}

json to_json(const Isometry& v) {
  return {{"ambient_dim", v.ambient_dim()},
          {"reduced_dim", v.reduced_dim()},
          {"entries", to_json(v.matrix())}};
}

Isometry isometry_from_json(const json& j) {
  const ComplexMatrix m = matrix_from_json(j.at("entries"));
  if (m.rows() != j.at("ambient_dim").get<int>() ||
      m.cols() != j.at("reduced_dim").get<int>()) {
    throw std::invalid_argument("isometry json: declared shape mismatch");
  }
  return Isometry(m);
}

json to_json(const Subspace& s) {
  return {{"ambient_dim", s.ambient_dim}, {"vectors", to_json(s.basis)}};
}

Subspace subspace_from_json(const json& j) {
  Subspace s;
  s.ambient_dim = j.at("ambient_dim").get<int>();
  s.basis = matrix_from_json(j.at("vectors"));
  if (s.basis.rows() != s.ambient_dim) {
    throw std::invalid_argument("subspace json: ambient dim mismatch");
  }
  return s;
}

json to_json(const SuperEnsemble& se) {
  json ensembles = json::array();
  for (const auto& e : se.ensembles) {
    json states = json::array();
    for (const auto& s : e.states) states.push_back(to_json(s));
    json probs = json::array();
    for (double p : e.probs) probs.push_back(round12(p));
    ensembles.push_back(
        {{"states", std::move(states)}, {"probs", std::move(probs)}});
  }
  json probs = json::array();
  for (double q : se.probs) probs.push_back(round12(q));
  return {{"dim", se.dim()},
          {"ensembles", std::move(ensembles)},
          {"probs", std::move(probs)}};
}

SuperEnsemble super_ensemble_from_json(const json& j) {
  SuperEnsemble se;
  const int dim = j.at("dim").get<int>();
  for (const auto& ej : j.at("ensembles")) {
    Ensemble e;
    e.dim = dim;
    for (const auto& s : ej.at("states")) {
      e.states.push_back(matrix_from_json(s));
    }
    e.probs = ej.at("probs").get<std::vector<double>>();
    se.ensembles.push_back(std::move(e));
  }
  se.probs = j.at("probs").get<std::vector<double>>();
  return se;
}

json to_json(const CompatReport& report) {
  json out = {{"verdict", to_string(report.verdict)},
              {"robustness", round12(report.robustness)},
              {"margin", round12(report.margin)},
              {"marginal_residual", round12(report.marginal_residual)}};
  if (!report.diagnostics.empty()) out["diagnostics"] = report.diagnostics;
  if (report.joint) out["joint"] = to_json(*report.joint);
  return out;
}

json to_json(const BoundEntry& entry) {
  json out = {{"value", entry.value},
              {"provenance", entry.provenance},
              {"verified", entry.verified}};
  if (entry.certificate) out["certificate"] = to_json(*entry.certificate);
  return out;
}

json to_json(const DimensionBounds& bounds) {
  return {{"tuple_hash", bounds.hash},
          {"r_lower", to_json(bounds.r_lower)},
          {"r_bar_lower", to_json(bounds.r_bar_lower)},
          {"r_bar_upper", to_json(bounds.r_bar_upper)}};
}

json to_json(const CertificateFile& c) {
  return {{"tuple_hash", c.tuple_hash},
          {"kind", c.kind},
          {"rank", c.rank},
          {"isometry", to_json(c.isometry)}};
}

CertificateFile certificate_from_json(const json& j) {
  CertificateFile c;
  c.tuple_hash = j.at("tuple_hash").get<std::string>();
  c.kind = j.at("kind").get<std::string>();
  c.rank = j.at("rank").get<int>();
  c.isometry = isometry_from_json(j.at("isometry"));
  return c;
}

json to_json(const SdpInstance& inst) {
  json blocks = json::array();
  for (int b = 0; b < inst.block_count(); ++b) {
    blocks.push_back({{"name", inst.block_name(b)}, {"dim", inst.block_dim(b)}});
  }
  json scalars = json::array();
  for (int s = 0; s < inst.scalar_count(); ++s) {
    scalars.push_back(inst.scalar_name(s));
  }
  auto terms_to_json = [&](const std::vector<SdpBlockTerm>& bt,
                           const std::vector<SdpScalarTerm>& st) {
    json out = json::object();
    json jb = json::array();
    for (const auto& t : bt) {
      jb.push_back({{"block", t.block}, {"coeff", to_json(t.coeff)}});
    }
    json js = json::array();
    for (const auto& t : st) {
      js.push_back({{"scalar", t.scalar}, {"coeff", round12(t.coeff)}});
    }
    out["blocks"] = std::move(jb);
    out["scalars"] = std::move(js);
    return out;
  };
  json rows = json::array();
  for (const auto& c : inst.constraints()) {
    json row = terms_to_json(c.block_terms, c.scalar_terms);
    row["rhs"] = round12(c.rhs);
    rows.push_back(std::move(row));
  }
  json obj = terms_to_json(inst.objective().block_terms,
                           inst.objective().scalar_terms);
  obj["constant"] = round12(inst.objective().constant);
  return {{"blocks", std::move(blocks)},
          {"scalars", std::move(scalars)},
          {"constraints", std::move(rows)},
          {"objective", std::move(obj)},
          {"sense", inst.sense() == SdpSense::Max ? "max" : "min"}};
}

SdpInstance sdp_instance_from_json(const json& j) {
  SdpInstance inst;
  for (const auto& b : j.at("blocks")) {
    inst.add_block(b.at("name").get<std::string>(), b.at("dim").get<int>());
  }
  for (const auto& s : j.at("scalars")) {
    inst.add_scalar(s.get<std::string>());
  }
  auto terms_from_json = [&](const json& row, std::vector<SdpBlockTerm>& bt,
                             std::vector<SdpScalarTerm>& st) {
    for (const auto& t : row.at("blocks")) {
      bt.push_back(
          {t.at("block").get<int>(), matrix_from_json(t.at("coeff"))});
    }
    for (const auto& t : row.at("scalars")) {
      st.push_back({t.at("scalar").get<int>(), t.at("coeff").get<double>()});
    }
  };
  for (const auto& row : j.at("constraints")) {
    SdpConstraint c;
    terms_from_json(row, c.block_terms, c.scalar_terms);
    c.rhs = row.at("rhs").get<double>();
    inst.add_constraint(std::move(c));
  }
  SdpObjective obj;
  terms_from_json(j.at("objective"), obj.block_terms, obj.scalar_terms);
  obj.constant = j.at("objective").at("constant").get<double>();
  inst.set_objective(
      j.at("sense").get<std::string>() == "max" ? SdpSense::Max : SdpSense::Min,
      std::move(obj));
  return inst;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace qcompat::io
