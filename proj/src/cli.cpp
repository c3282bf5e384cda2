#include "ioss/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ioss/builtins.hpp"
#include "ioss/constants.hpp"
#include "ioss/error.hpp"
#include "ioss/serialize.hpp"

namespace ioss {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double spread(const std::vector<double>& v, double med) {
  if (v.empty() || med <= 0.0) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return (*hi - *lo) / med;
}

GridSpec sweep_grid(const Dims& dims, const std::vector<bool>& deps, const Eigen::VectorXd& lo,
                    const Eigen::VectorXd& hi, std::uint64_t points) {
  std::vector<Axis> axes;
  for (int i = 0; i < dims.nz(); ++i)
    axes.push_back({lo[i], hi[i], deps[i] ? points : std::uint64_t{1}});
  return GridSpec(dims, std::move(axes));
}

std::vector<int> coords_of(const std::vector<bool>& deps) {
  std::vector<int> out;
  for (std::size_t i = 0; i < deps.size(); ++i)
    if (deps[i]) out.push_back(static_cast<int>(i));
  return out;
}

}  // namespace

BenchReport run_linearization_bench(const SystemSpec& sys, const Eigen::VectorXd& lo,
                                    const Eigen::VectorXd& hi, std::uint64_t points, double tau,
                                    int repeats) {
  if (points < 1) throw Error("bench needs at least one point per direction");
  if (repeats < 1) throw Error("bench needs at least one repeat");
  if (!(tau > 0.0)) throw Error("bench tau must be positive");
  const Dims& dims = sys.dims();
  const std::vector<bool> ct_deps = ct_jacobian_dependencies(sys);
  const std::vector<bool> rk_deps = rk2_jacobian_dependencies(sys);
  const GridSpec ct_grid = sweep_grid(dims, ct_deps, lo, hi, points);
  const GridSpec rk_grid = sweep_grid(dims, rk_deps, lo, hi, points);

  BenchReport r;
  r.ct_coords = coords_of(ct_deps);
  r.rk2_coords = coords_of(rk_deps);
  r.ct_points = ct_grid.size();
  r.rk2_points = rk_grid.size();
  r.points_per_direction = points;
  r.tau = tau;
  r.repeats = repeats;

  using clock = std::chrono::steady_clock;
  Eigen::VectorXd z(dims.nz());
  for (int rep = 0; rep < repeats; ++rep) {
    auto t0 = clock::now();
    double acc = 0.0;
    for (std::uint64_t i = 0; i < ct_grid.size(); ++i) {
      ct_grid.point(i, z);
      const PointEval pe = eval_point(sys, z);
      acc += pe.A.sum() + pe.B.sum();
    }
    r.ct_times_s.push_back(std::chrono::duration<double>(clock::now() - t0).count());

    t0 = clock::now();
    for (std::uint64_t i = 0; i < rk_grid.size(); ++i) {
      rk_grid.point(i, z);
      const SchemeJacobians j = jacobians_rk2(sys, eval_point(sys, z), tau);
      acc += j.a_tilde.sum() + j.b_tilde.sum();
    }
    r.rk2_times_s.push_back(std::chrono::duration<double>(clock::now() - t0).count());
    r.checksum += acc;
  }
  r.ct_median_s = median(r.ct_times_s);
  r.rk2_median_s = median(r.rk2_times_s);
  r.ratio = r.rk2_median_s / std::max(r.ct_median_s, 1e-9);
  r.ct_relative_spread = spread(r.ct_times_s, r.ct_median_s);
  r.rk2_relative_spread = spread(r.rk2_times_s, r.rk2_median_s);
  return r;
}

namespace {

struct RunConfig {
  std::string command;
  std::string model;
  std::string builtin;
  std::string grid;
  std::string cert;
  std::vector<double> taus;
  std::string scheme = "euler";
  double tol = kDefaultNsdTol;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::optional<double> lf;
  std::optional<double> ldf;
  std::optional<double> sigma_slope;
  double delta0 = kDefaultDelta0;
  std::uint64_t samples = 10000;
  std::uint64_t ldf_pairs = 20000;
  std::uint64_t points = 21;
  int repeats = 5;
  std::vector<double> kappas;
  int max_iterations = 400;
  bool scan_all = false;
};

json config_json(const RunConfig& c) {
  json j = {{"command", c.command}, {"scheme", c.scheme},   {"tol", c.tol},
            {"threads", c.threads}, {"seed", c.seed},       {"taus", c.taus},
            {"delta0", c.delta0},   {"samples", c.samples}, {"ldf_pairs", c.ldf_pairs},
            {"points", c.points}};
  if (!c.model.empty()) j["model"] = c.model;
  if (!c.builtin.empty()) j["builtin"] = c.builtin;
  if (!c.grid.empty()) j["grid"] = c.grid;
  if (!c.cert.empty()) j["cert"] = c.cert;
  if (c.lf) j["lf"] = *c.lf;
  if (c.ldf) j["ldf"] = *c.ldf;
  if (c.sigma_slope) j["sigma_slope"] = *c.sigma_slope;
  if (c.command == "bench") j["repeats"] = c.repeats;
  if (c.command == "synth") {
    j["kappas"] = c.kappas;
    j["max_iterations"] = c.max_iterations;
    j["scan_all"] = c.scan_all;
  }
  return j;
}

SystemSpec resolve_model(const RunConfig& c) {
  if (c.model.empty() == c.builtin.empty()) {
    throw Error("exactly one of --model or --builtin is required");
  }
  return c.builtin.empty() ? load_model(c.model) : builtin_model(c.builtin);
}

GridSpec resolve_grid(const RunConfig& c, const SystemSpec& sys) {
  if (!c.grid.empty()) return load_grid(c.grid, sys.dims());
  if (!c.builtin.empty()) return builtin_grid(c.builtin, c.points);
  throw Error("--grid is required with --model");
}

double single_tau(const RunConfig& c) {
  if (c.taus.size() != 1) throw Error("exactly one --tau is required");
  return c.taus.front();
}

void emit(const RunConfig& c, json report, std::ostream& out) {
  report["version"] = version();
  report["command"] = c.command;
  report["config"] = config_json(c);
  report["seed"] = c.seed;
  const std::string text = report.dump(2) + "\n";
  if (c.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw Error("cannot write " + c.out);
  f << text;
}

int cmd_check_ct(const RunConfig& c, std::ostream& out) {
  const SystemSpec sys = resolve_model(c);
  const GridSpec g = resolve_grid(c, sys);
  if (c.cert.empty()) throw Error("--cert is required");
  const Certificate cert = certificate_from_json(read_json_file(c.cert));
  const CheckReport r = check_ct_grid(sys, g, cert, c.tol, c.threads);
  emit(c, to_json(r, sys.dims()), out);
  if (!r.complete) return kExitError;
  return r.certified() ? kExitHolds : kExitViolated;
}

int cmd_check_dt(const RunConfig& c, std::ostream& out) {
  const SystemSpec sys = resolve_model(c);
  const GridSpec g = resolve_grid(c, sys);
  if (c.cert.empty()) throw Error("--cert is required");
  const DtCertificate dc = dt_certificate_from_json(read_json_file(c.cert));
  const CheckReport r = check_dt_grid(sys, parse_scheme(c.scheme), g, dc, c.tol, c.threads);
  json j = to_json(r, sys.dims());
  j["certificate_issues"] = dt_certificate_issues(dc);
  emit(c, std::move(j), out);
  if (!r.complete) return kExitError;
  return r.certified() && !r.out_of_certificate ? kExitHolds : kExitViolated;
}

int cmd_transfer(const RunConfig& c, std::ostream& out) {
  const SystemSpec sys = resolve_model(c);
  const GridSpec g = resolve_grid(c, sys);
  if (c.cert.empty()) throw Error("--cert is required");
  const Certificate cert = certificate_from_json(read_json_file(c.cert));
  TransferOptions o;
  o.scheme = parse_scheme(c.scheme);
  o.tau = single_tau(c);
  o.lipschitz_f = c.lf;
  o.lipschitz_df = c.ldf;
  o.sigma_slope = c.sigma_slope;
  o.delta0 = c.delta0;
  o.ldf_pairs = c.ldf_pairs;
  o.lyapunov_samples = c.samples;
  o.seed = c.seed;
  o.tol = c.tol;
  o.threads = c.threads;
  const TransferReport r = run_transfer(sys, g, cert, o);
  emit(c, to_json(r, sys.dims()), out);
  if (r.dt_check && !r.dt_check->complete) return kExitError;
  return r.holds() ? kExitHolds : kExitViolated;
}

int cmd_consistency(const RunConfig& c, std::ostream& out) {
  const SystemSpec sys = resolve_model(c);
  const GridSpec g = resolve_grid(c, sys);
  if (c.taus.empty()) throw Error("at least one --tau is required");
  const Scheme scheme = parse_scheme(c.scheme);

  json constants;
  const double lf = c.lf ? *c.lf : estimate_Lf(sys, g, c.threads);
  constants["lipschitz_f"] = lf;
  ConsistencyBound bound;
  if (scheme == Scheme::RK2 && c.sigma_slope) {
    bound = consistency_bound_with_slope(scheme, lf, *c.sigma_slope, c.delta0);
  } else if (scheme == Scheme::RK2) {
    const double cf = estimate_cf(sys, g, c.threads);
    const double ldf = c.ldf ? *c.ldf : estimate_Ldf(sys, g, c.ldf_pairs, c.seed);
    constants["c_f"] = cf;
    constants["lipschitz_df"] = ldf;
    constants["lipschitz_df_estimated"] = !c.ldf;
    bound = consistency_bound(scheme, lf, ldf, cf, c.delta0);
  } else {
    bound = consistency_bound(scheme, lf);
  }

  json runs = json::array();
  bool all = true;
  for (double tau : c.taus) {
    const ConsistencyReport r = check_consistency_grid(sys, g, tau, bound, kDefaultDefectTol,
                                                       c.threads);
    all = all && r.bound_satisfied;
    runs.push_back(to_json(r, sys.dims()));
  }
  json j = {{"bound", to_json(bound)},
            {"constants", constants},
            {"runs", std::move(runs)},
            {"bound_satisfied", all}};
  if (constants.contains("lipschitz_df_estimated") && constants["lipschitz_df_estimated"]) {
    j["warnings"] = {"L_df is a sampled estimate, not a proven bound"};
  }
  emit(c, std::move(j), out);
  return all ? kExitHolds : kExitViolated;
}

int cmd_synth(const RunConfig& c, std::ostream& out) {
  const SystemSpec sys = resolve_model(c);
  const GridSpec g = resolve_grid(c, sys);
  SynthOptions o;
  if (!c.kappas.empty()) o.kappas = c.kappas;
  o.max_iterations = c.max_iterations;
  o.seed = c.seed;
  o.tol = c.tol;
  o.threads = c.threads;
  o.scan_all = c.scan_all;
  const SynthResult r = synthesize_certificate(sys, g, o);
  json j = to_json(r);
  // Top-level P, Q, R, kappa so the output can be fed back as --cert.
  if (r.certificate) j.update(to_json(*r.certificate));
  if (r.verification) j["verification"] = to_json(*r.verification, sys.dims());
  emit(c, std::move(j), out);
  return r.feasible() ? kExitHolds : kExitViolated;
}

int cmd_bench(const RunConfig& c, std::ostream& out) {
  RunConfig cc = c;
  if (cc.model.empty() && cc.builtin.empty()) cc.builtin = "reactor";
  const SystemSpec sys = resolve_model(cc);
  const GridSpec box = cc.grid.empty() && !cc.builtin.empty() ? builtin_grid(cc.builtin, 2)
                                                             : resolve_grid(cc, sys);
  const double tau = c.taus.empty() ? 0.1 : single_tau(c);
  const BenchReport b =
      run_linearization_bench(sys, box.lower(), box.upper(), cc.points, tau, cc.repeats);
  auto names = [&](const std::vector<int>& idx) {
    std::vector<std::string> s;
    for (int i : idx) s.push_back(coordinate_name(sys.dims(), i));
    return s;
  };
  json j = {{"ct_coordinates", names(b.ct_coords)},
            {"rk2_coordinates", names(b.rk2_coords)},
            {"points_per_direction", b.points_per_direction},
            {"ct_points", b.ct_points},
            {"rk2_points", b.rk2_points},
            {"tau", b.tau},
            {"repeats", b.repeats},
            {"ct_times_s", b.ct_times_s},
            {"rk2_times_s", b.rk2_times_s},
            {"ct_median_s", b.ct_median_s},
            {"rk2_median_s", b.rk2_median_s},
            {"ratio", b.ratio},
            {"ct_relative_spread", b.ct_relative_spread},
            {"rk2_relative_spread", b.rk2_relative_spread},
            {"checksum", b.checksum}};
  emit(cc, std::move(j), out);
  return kExitHolds;
}

int cmd_builtins(const RunConfig& c, std::ostream& out) {
  json list = json::array();
  for (const std::string& name : builtin_names()) {
    const SystemSpec s = builtin_model(name);
    const Dims& d = s.dims();
    list.push_back({{"name", name},
                    {"dims", {{"n", d.n}, {"q", d.q}, {"m", d.m}, {"p", d.p}}},
                    {"source", std::string(builtin_source(name))}});
  }
  emit(c, {{"builtins", std::move(list)}}, out);
  return kExitHolds;
}

void add_model_flags(CLI::App* sub, RunConfig& c) {
  sub->add_option("--model", c.model, "model file");
  sub->add_option("--builtin", c.builtin, "builtin model name");
  sub->add_option("--grid", c.grid, "grid file");
  sub->add_option("--points", c.points, "points per axis for a builtin's default grid");
  sub->add_option("--threads", c.threads, "worker threads (0 = hardware)");
  sub->add_option("--seed", c.seed, "seed");
  sub->add_option("--out", c.out, "output path (default stdout)");
  sub->add_option("--tol", c.tol, "relative NSD tolerance");
}

void add_constant_flags(CLI::App* sub, RunConfig& c) {
  sub->add_option("--scheme", c.scheme, "euler or rk2");
  sub->add_option("--lf", c.lf, "L_f override");
  sub->add_option("--ldf", c.ldf, "L_df override");
  sub->add_option("--sigma-slope", c.sigma_slope, "slope of sigma, overrides L_df * c_f");
  sub->add_option("--delta0", c.delta0, "RK2 delta0 (tau0 = 2 delta0)");
  sub->add_option("--ldf-pairs", c.ldf_pairs, "sample pairs for the L_df estimate");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Gridded i-IOSS certificates for continuous-time models and their Euler/RK2 "
               "discretizations",
               "ioss-cert"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  CLI::App* check_ct = app.add_subcommand("check-ct", "check a CT certificate on a grid");
  add_model_flags(check_ct, c);
  check_ct->add_option("--cert", c.cert, "certificate JSON");

  CLI::App* check_dt = app.add_subcommand("check-dt", "check a DT certificate on a grid");
  add_model_flags(check_dt, c);
  check_dt->add_option("--cert", c.cert, "DT certificate JSON");
  check_dt->add_option("--scheme", c.scheme, "euler or rk2");

  CLI::App* transfer = app.add_subcommand("transfer", "transfer a CT certificate to period tau");
  add_model_flags(transfer, c);
  add_constant_flags(transfer, c);
  transfer->add_option("--cert", c.cert, "CT certificate JSON");
  transfer->add_option("--tau", c.taus, "sampling period");
  transfer->add_option("--samples", c.samples, "Lyapunov samples");

  CLI::App* consistency = app.add_subcommand("consistency", "consistency defect versus rho(tau)");
  add_model_flags(consistency, c);
  add_constant_flags(consistency, c);
  consistency->add_option("--tau", c.taus, "sampling period(s)");

  CLI::App* synth = app.add_subcommand("synth", "search for a CT certificate");
  add_model_flags(synth, c);
  synth->add_option("--kappa", c.kappas, "kappa candidates, tried in order");
  synth->add_option("--max-iter", c.max_iterations, "iterations per kappa");
  synth->add_flag("--scan-all", c.scan_all, "try every kappa");

  CLI::App* bench = app.add_subcommand("bench", "CT versus RK2 linearization timing");
  add_model_flags(bench, c);
  bench->add_option("--tau", c.taus, "sampling period (default 0.1)");
  bench->add_option("--repeats", c.repeats, "timed repeats (median reported)");

  CLI::App* builtins = app.add_subcommand("builtins", "list builtin models");
  builtins->add_option("--out", c.out, "output path (default stdout)");

  // Defaults that differ per subcommand.
  bench->preparse_callback([&](std::size_t) { c.points = 100; });

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitHolds;
  } catch (const CLI::CallForVersion&) {
    out << version() << "\n";
    return kExitHolds;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (*check_ct) {
      c.command = "check-ct";
      return cmd_check_ct(c, out);
    }
    if (*check_dt) {
      c.command = "check-dt";
      return cmd_check_dt(c, out);
    }
    if (*transfer) {
      c.command = "transfer";
      return cmd_transfer(c, out);
    }
    if (*consistency) {
      c.command = "consistency";
      return cmd_consistency(c, out);
    }
    if (*synth) {
      c.command = "synth";
      return cmd_synth(c, out);
    }
    if (*bench) {
      c.command = "bench";
      return cmd_bench(c, out);
    }
    c.command = "builtins";
    return cmd_builtins(c, out);
  } catch (const TransferError& e) {
    err << "error: " << e.what() << " [binding: " << e.binding() << "]\n";
    return kExitViolated;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace ioss
