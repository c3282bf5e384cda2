#include "ioss/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "ioss/error.hpp"

namespace ioss {

std::string version() { return IOSS_VERSION; }

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

namespace {

double read_number(const json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw Error(std::string("expected a number for '") + what + "'");
}

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(std::string("missing key '") + key + "'");
  return j.at(key);
}

json strings(const std::vector<std::string>& v) { return json(v); }

}  // namespace

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

json to_json(const SymMatrix& m) { return to_json(m.dense()); }

SymMatrix sym_from_json(const json& j) {
  if (!j.is_array()) throw Error("matrix must be an array of rows");
  const std::size_t k = j.size();
  Eigen::MatrixXd m(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!j[i].is_array() || j[i].size() != k) throw Error("matrix must be square");
    for (std::size_t c = 0; c < k; ++c) m(i, c) = read_number(j[i][c], "matrix entry");
  }
  return SymMatrix::from_dense(m);
}

json to_json(const Certificate& c) {
  return {{"P", to_json(c.P())}, {"Q", to_json(c.Q())}, {"R", to_json(c.R())},
          {"kappa", c.kappa()}};
}

Certificate certificate_from_json(const json& j) {
  return Certificate::create(sym_from_json(require(j, "P")), sym_from_json(require(j, "Q")),
                             sym_from_json(require(j, "R")),
                             read_number(require(j, "kappa"), "kappa"));
}

json to_json(const DtCertificate& dc) {
  return {{"P", to_json(dc.P)},
          {"Qt", to_json(dc.Qt)},
          {"Rt", to_json(dc.Rt)},
          {"eta", dc.eta},
          {"tau", dc.tau},
          {"tau1", number(dc.tau1)},
          {"source",
           {{"scheme", std::string(to_string(dc.source.scheme))},
            {"lipschitz_f", dc.source.lipschitz_f},
            {"sigma_slope", dc.source.sigma_slope},
            {"tau0", number(dc.source.tau0)}}}};
}

DtCertificate dt_certificate_from_json(const json& j) {
  DtCertificate dc;
  dc.P = sym_from_json(require(j, "P"));
  dc.Qt = sym_from_json(require(j, "Qt"));
  dc.Rt = sym_from_json(require(j, "Rt"));
  dc.eta = read_number(require(j, "eta"), "eta");
  dc.tau = read_number(require(j, "tau"), "tau");
  dc.tau1 = read_number(require(j, "tau1"), "tau1");
  if (j.contains("source")) {
    const json& s = j.at("source");
    if (s.contains("scheme")) dc.source.scheme = parse_scheme(s.at("scheme").get<std::string>());
    if (s.contains("lipschitz_f")) dc.source.lipschitz_f = read_number(s.at("lipschitz_f"), "lipschitz_f");
    if (s.contains("sigma_slope")) dc.source.sigma_slope = read_number(s.at("sigma_slope"), "sigma_slope");
    if (s.contains("tau0")) dc.source.tau0 = read_number(s.at("tau0"), "tau0");
  }
  return dc;
}

json point_json(const Dims& dims, const Eigen::VectorXd& z) {
  if (z.size() != dims.nz()) return nullptr;
  return {{"x", to_json(Eigen::VectorXd(z.head(dims.n)))},
          {"u", to_json(Eigen::VectorXd(z.segment(dims.n, dims.q)))},
          {"d", to_json(Eigen::VectorXd(z.tail(dims.m)))}};
}

json to_json(const CheckReport& r, const Dims& dims) {
  json j = {{"total_points", r.total_points},
            {"violations", r.violations},
            {"worst_lambda_max", number(r.worst_lambda_max)},
            {"worst_normalized_lambda_max", number(r.worst_normalized_lambda_max)},
            {"argmax_index", r.argmax_index},
            {"argmax_point", point_json(dims, r.argmax_point)},
            {"lambda_max_min", number(r.lambda_max_min)},
            {"lambda_max_median", number(r.lambda_max_median)},
            {"lambda_max_max", number(r.worst_lambda_max)},
            {"tolerance", r.tolerance},
            {"wall_time_s", r.wall_time_s},
            {"domain_errors", r.domain_errors},
            {"complete", r.complete},
            {"certified", r.certified()},
            {"grid_spacing", r.grid_spacing},
            {"warnings", strings(r.warnings)}};
  if (!r.first_domain_error.empty()) j["first_domain_error"] = r.first_domain_error;
  if (r.out_of_certificate) j["out_of_certificate"] = true;
  return j;
}

json to_json(const ConsistencyReport& r, const Dims& dims) {
  return {{"scheme", std::string(to_string(r.scheme))},
          {"tau", r.tau},
          {"max_defect", r.max_defect},
          {"rho_of_tau", r.rho_of_tau},
          {"bound_satisfied", r.bound_satisfied},
          {"tau_within_tau0", r.tau_within_tau0},
          {"argmax_point", point_json(dims, r.argmax_point)},
          {"total_points", r.total_points},
          {"violations", r.violations},
          {"defect_tol", r.defect_tol},
          {"wall_time_s", r.wall_time_s}};
}

json to_json(const ConsistencyBound& b) {
  return {{"scheme", std::string(to_string(b.scheme))},
          {"tau0", number(b.tau0)},
          {"sigma_slope", b.sigma_slope},
          {"lipschitz_f", b.lipschitz_f}};
}

json to_json(const Tau1Result& t) {
  return {{"tau1", number(t.tau1)},
          {"binding_constraint", t.binding},
          {"inv_kappa", number(t.inv_kappa)},
          {"tau0", number(t.tau0)},
          {"alpha_inv", number(t.alpha_inv)},
          {"bisection_steps", t.bisection_steps}};
}

json to_json(const EtaRange& e) {
  return {{"count", e.count},   {"tau_lo", e.tau_lo},   {"tau_hi", e.tau_hi},
          {"eta_min", number(e.eta_min)}, {"eta_max", number(e.eta_max)},
          {"outside", e.outside}, {"holds", e.holds()}};
}

json to_json(const LyapunovReport& r) {
  json j = {{"samples", r.samples},
            {"violations", r.violations},
            {"domain_errors", r.domain_errors},
            {"worst_slack", number(r.worst_slack)},
            {"worst_index", r.worst_index},
            {"tolerance", r.tolerance},
            {"seed", r.seed},
            {"output_affine", r.output_affine},
            {"holds", r.holds()},
            {"wall_time_s", r.wall_time_s},
            {"warnings", strings(r.warnings)}};
  if (r.worst_x.size() > 0) {
    j["worst_sample"] = {{"x", to_json(r.worst_x)},   {"xt", to_json(r.worst_xt)},
                         {"u", to_json(r.worst_u)},   {"ut", to_json(r.worst_ut)},
                         {"d", to_json(r.worst_d)}};
  }
  return j;
}

json to_json(const TransferReport& r, const Dims& dims) {
  json j = {{"tau", r.tau},
            {"tau1", number(r.t1.tau1)},
            {"binding_constraint", r.t1.binding},
            {"tau1_detail", to_json(r.t1)},
            {"tau_admissible", r.tau_admissible},
            {"alpha_at_tau", r.alpha_at_tau},
            {"constants",
             {{"lipschitz_f", r.lipschitz_f},
              {"c_f", r.c_f},
              {"lipschitz_df", r.lipschitz_df},
              {"lipschitz_df_estimated", r.ldf_estimated}}},
            {"bound", to_json(r.bound)},
            {"holds", r.holds()},
            {"warnings", strings(r.warnings)}};
  if (r.etas) j["eta_range"] = to_json(*r.etas);
  if (r.dt) {
    j["eta"] = r.dt->eta;
    j["Qt"] = to_json(r.dt->Qt);
    j["Rt"] = to_json(r.dt->Rt);
    j["dt_certificate"] = to_json(*r.dt);
  }
  if (r.consistency) j["consistency"] = to_json(*r.consistency, dims);
  if (r.dt_check) j["dt_check"] = to_json(*r.dt_check, dims);
  if (r.lyapunov) j["lyapunov"] = to_json(*r.lyapunov);
  return j;
}

json to_json(const SynthResult& r) {
  json log = json::array();
  for (const SynthLogEntry& e : r.log) {
    log.push_back({{"kappa", e.kappa},
                   {"iterations", e.iterations},
                   {"best_phi", number(e.best_phi)},
                   {"reached_margin", e.reached_margin},
                   {"verified", e.verified}});
  }
  json j = {{"feasible", r.feasible()},
            {"synth_log", std::move(log)},
            {"feasible_kappas", r.feasible_kappas},
            {"unique_linearizations", r.unique_linearizations},
            {"rejected_candidates", r.rejected_candidates},
            {"wall_time_s", r.wall_time_s}};
  if (r.certificate) j["certificate"] = to_json(*r.certificate);
  if (!r.feasible()) {
    j["note"] = "no certificate found on this grid; this is not a proof that the system lacks the property";
  }
  return j;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace ioss
