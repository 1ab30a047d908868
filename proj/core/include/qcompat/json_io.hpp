#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "qcompat/compat.hpp"
#include "qcompat/dim_search.hpp"
#include "qcompat/povm.hpp"
#include "qcompat/sdp.hpp"

// JSON interchange used by the CLI and the certificate files. Matrices are
// nested arrays of [re, im] pairs in row-major order; every float is written
// with 12 significant digits.

namespace qcompat::io {

using nlohmann::json;

double round12(double x);

json to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const json& j);

json to_json(const Povm& p);
Povm povm_from_json(const json& j);

json to_json(const PovmTuple& t);
PovmTuple tuple_from_json(const json& j);

json to_json(const JointPovm& t);
JointPovm joint_from_json(const json& j);

json to_json(const Isometry& v);
Isometry isometry_from_json(const json& j);

json to_json(const Subspace& s);
Subspace subspace_from_json(const json& j);

json to_json(const SuperEnsemble& se);
SuperEnsemble super_ensemble_from_json(const json& j);

json to_json(const CompatReport& report);

json to_json(const BoundEntry& entry);
json to_json(const DimensionBounds& bounds);

// certificate files carry the digest of the tuple they certify; loading
// against a different tuple is refused by the CLI
struct CertificateFile {
  std::string tuple_hash;
  std::string kind;  // "certify" or "falsify"
  int rank = 0;
  Isometry isometry{ComplexMatrix::Identity(1, 1)};
};

json to_json(const CertificateFile& c);
CertificateFile certificate_from_json(const json& j);

// self-describing instance dump for solver debugging
json to_json(const SdpInstance& inst);
SdpInstance sdp_instance_from_json(const json& j);

json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);

}  // namespace qcompat::io
