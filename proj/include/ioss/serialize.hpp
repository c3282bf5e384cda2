#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ioss/certcore.hpp"
#include "ioss/discretize.hpp"
#include "ioss/lmi.hpp"
#include "ioss/synth.hpp"
#include "ioss/transfer.hpp"

namespace ioss {

using json = nlohmann::json;

std::string version();

/// Row-major array of arrays.
json to_json(const Eigen::MatrixXd& m);
json to_json(const Eigen::VectorXd& v);
json to_json(const SymMatrix& m);
/// Requires a square, symmetric (to 1e-12 relative) array of arrays.
SymMatrix sym_from_json(const json& j);

/// Keys P, Q, R, kappa.
json to_json(const Certificate& c);
Certificate certificate_from_json(const json& j);

/// Keys P, Qt, Rt, eta, tau, tau1 plus a "source" record.
json to_json(const DtCertificate& dc);
DtCertificate dt_certificate_from_json(const json& j);

/// Splits a stacked point z into {"x":..,"u":..,"d":..}.
json point_json(const Dims& dims, const Eigen::VectorXd& z);

json to_json(const CheckReport& r, const Dims& dims);
json to_json(const ConsistencyReport& r, const Dims& dims);
json to_json(const ConsistencyBound& b);
json to_json(const Tau1Result& t);
json to_json(const EtaRange& e);
json to_json(const LyapunovReport& r);
json to_json(const TransferReport& r, const Dims& dims);
json to_json(const SynthResult& r);

/// inf/nan have no JSON number form; they become the strings "inf", "-inf", "nan".
json number(double v);

json read_json_file(const std::filesystem::path& path);

}  // namespace ioss
