#include "ioss/transfer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "ioss/constants.hpp"
#include "ioss/error.hpp"
#include "ioss/parallel.hpp"

namespace ioss {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool alpha_vanishes(const TransferInput& ti) {
  const ConsistencyBound& b = ti.bound;
  return b.lipschitz_f == 0.0 && (b.scheme == Scheme::Euler || b.sigma_slope == 0.0);
}

}  // namespace

TransferInput make_transfer_input(const Certificate& cert, const ConsistencyBound& bound) {
  const EigExtents e = eig_extents(cert.P());
  return TransferInput{cert, bound, e.min, e.max};
}

double alpha(double tau, const TransferInput& ti) {
  const double L = ti.bound.lipschitz_f;
  const double rho = ti.bound.rho(tau);
  const double ratio = ti.lambda_max_P / ti.lambda_min_P;
  return ratio * (4.0 * rho * (1.0 + tau * L + tau * rho) + tau * L * L);
}

Tau1Result tau1(const TransferInput& ti) {
  Tau1Result r;
  const double kappa = ti.cert.kappa();
  r.inv_kappa = 1.0 / kappa;
  r.tau0 = ti.bound.tau0;
  r.alpha_inv = kInf;

  if (!alpha_vanishes(ti)) {
    double lo = 0.0;
    double hi = r.inv_kappa;
    int doublings = 0;
    while (alpha(hi, ti) <= kappa) {
      lo = hi;
      hi *= 2.0;
      if (++doublings > 2000 || !std::isfinite(hi)) {
        throw Error("alpha^-1(kappa): could not bracket, alpha does not grow");
      }
    }
    // invariant: alpha(lo) <= kappa < alpha(hi)
    int steps = 0;
    while (hi - lo > 1e-10 * hi && steps < 200) {
      const double mid = lo + 0.5 * (hi - lo);
      if (alpha(mid, ti) <= kappa)
        lo = mid;
      else
        hi = mid;
      ++steps;
    }
    r.alpha_inv = lo;
    r.bisection_steps = steps;
  }

  r.tau1 = r.inv_kappa;
  r.binding = "1/kappa";
  if (r.tau0 < r.tau1) {
    r.tau1 = r.tau0;
    r.binding = "tau0";
  }
  if (r.alpha_inv < r.tau1) {
    r.tau1 = r.alpha_inv;
    r.binding = "alpha_inv";
  }
  return r;
}

DtCertificate dt_certificate(const TransferInput& ti, double tau) {
  return dt_certificate(ti, tau1(ti), tau);
}

DtCertificate dt_certificate(const TransferInput& ti, const Tau1Result& t1, double tau) {
  if (!(tau > 0.0)) throw TransferError(t1.binding, "sampling period must be positive");
  if (!(tau < t1.tau1)) {
    throw TransferError(t1.binding, "tau = " + std::to_string(tau) + " is not below tau1 = " +
                                        std::to_string(t1.tau1) + " (binding: " + t1.binding +
                                        ")");
  }
  const Certificate& c = ti.cert;
  const double a = alpha(tau, ti);

  DtCertificate dc;
  dc.P = c.P();
  dc.tau = tau;
  dc.tau1 = t1.tau1;
  Eigen::MatrixXd qt = c.Q().dense();
  qt.diagonal().array() += a * ti.lambda_min_P;
  dc.Qt = SymMatrix::from_lower(tau * qt);
  dc.Rt = c.R().scaled(tau);
  dc.eta = tau * (a - c.kappa()) + 1.0;
  dc.source = TransferDescriptor{ti.bound.scheme, ti.bound.lipschitz_f, ti.bound.sigma_slope,
                                 ti.bound.tau0};
  if (!(dc.eta > 0.0 && dc.eta < 1.0)) {
    throw CertificateError("eta(tau) = " + std::to_string(dc.eta) +
                           " left (0, 1) below tau1; tau is too close to tau1 for double precision");
  }
  return dc;
}

double lyap_value(const Eigen::VectorXd& x, const Eigen::VectorXd& xt, const SymMatrix& P) {
  if (x.size() != xt.size()) throw DimensionError("lyap_value: x and xt differ in length");
  return weighted_norm_sq(x - xt, P);
}

EtaRange eta_range(const TransferInput& ti, const Tau1Result& t1, std::size_t count) {
  EtaRange r;
  if (count == 0 || !std::isfinite(t1.tau1)) return r;
  r.count = count;
  r.tau_lo = 1e-9 * t1.tau1;
  r.tau_hi = (1.0 - 1e-9) * t1.tau1;
  r.eta_min = kInf;
  r.eta_max = -kInf;
  const double llo = std::log(r.tau_lo);
  const double lhi = std::log(r.tau_hi);
  for (std::size_t k = 0; k < count; ++k) {
    const double f = count == 1 ? 1.0 : static_cast<double>(k) / static_cast<double>(count - 1);
    const double tau = k + 1 == count ? r.tau_hi : std::exp(llo + f * (lhi - llo));
    const double eta = tau * (alpha(tau, ti) - ti.cert.kappa()) + 1.0;
    r.eta_min = std::min(r.eta_min, eta);
    r.eta_max = std::max(r.eta_max, eta);
    if (!(eta > 0.0 && eta < 1.0)) ++r.outside;
  }
  return r;
}

LyapunovReport check_lyapunov_sampled(const SystemSpec& sys, Scheme scheme,
                                      const DtCertificate& dc, const GridSpec& g,
                                      std::uint64_t n_samples, std::uint64_t seed, double tol,
                                      unsigned threads) {
  if (n_samples < 1) throw Error("need at least one Lyapunov sample");
  const Dims& dims = sys.dims();
  if (!(g.dims() == dims)) throw DimensionError("grid dimensions do not match the model");
  if (dc.P.dim() != static_cast<std::size_t>(dims.n) ||
      dc.Qt.dim() != static_cast<std::size_t>(dims.q) ||
      dc.Rt.dim() != static_cast<std::size_t>(dims.p)) {
    throw DimensionError("DT certificate dimensions do not match the model");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::VectorXd lo = g.lower();
  const Eigen::VectorXd hi = g.upper();

  struct Sample {
    Eigen::VectorXd x, xt, u, ut, d;
  };
  auto draw = [&](std::uint64_t i) {
    std::mt19937_64 rng(seed + i);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto coord = [&](int slot) { return lo[slot] + unit(rng) * (hi[slot] - lo[slot]); };
    Sample s{Eigen::VectorXd(dims.n), Eigen::VectorXd(dims.n), Eigen::VectorXd(dims.q),
             Eigen::VectorXd(dims.q), Eigen::VectorXd(dims.m)};
    for (int k = 0; k < dims.n; ++k) s.x[k] = coord(k);
    for (int k = 0; k < dims.n; ++k) s.xt[k] = coord(k);
    for (int k = 0; k < dims.q; ++k) s.u[k] = coord(dims.n + k);
    for (int k = 0; k < dims.q; ++k) s.ut[k] = coord(dims.n + k);
    for (int k = 0; k < dims.m; ++k) s.d[k] = coord(dims.n + dims.q + k);
    return s;
  };

  struct Partial {
    std::uint64_t violations = 0;
    std::uint64_t domain_errors = 0;
    double worst = -kInf;
    std::uint64_t worst_index = 0;
  };
  const Partial agg = parallel_reduce<Partial>(
      n_samples, threads,
      [&](std::uint64_t begin, std::uint64_t end) {
        Partial p;
        for (std::uint64_t i = begin; i < end; ++i) {
          const Sample s = draw(i);
          double lhs = 0.0;
          double rhs = 0.0;
          try {
            const Eigen::VectorXd fx = step(sys, scheme, s.x, s.u, s.d, dc.tau);
            const Eigen::VectorXd fxt = step(sys, scheme, s.xt, s.ut, s.d, dc.tau);
            const Eigen::VectorXd h = eval_h(sys, stack_point(dims, s.x, s.u, s.d));
            const Eigen::VectorXd ht = eval_h(sys, stack_point(dims, s.xt, s.ut, s.d));
            lhs = lyap_value(fx, fxt, dc.P);
            rhs = dc.eta * lyap_value(s.x, s.xt, dc.P) + weighted_norm_sq(s.u - s.ut, dc.Qt) +
                  weighted_norm_sq(h - ht, dc.Rt);
          } catch (const DomainError&) {
            ++p.domain_errors;
            continue;
          }
          const double slack = lhs - rhs;
          if (slack > tol * std::max(std::abs(lhs), std::abs(rhs))) ++p.violations;
          if (slack > p.worst) {
            p.worst = slack;
            p.worst_index = i;
          }
        }
        return p;
      },
      [](Partial a, Partial b) {
        a.violations += b.violations;
        a.domain_errors += b.domain_errors;
        if (b.worst > a.worst) {
          a.worst = b.worst;
          a.worst_index = b.worst_index;
        }
        return a;
      });

  LyapunovReport r;
  r.samples = n_samples;
  r.violations = agg.violations;
  r.domain_errors = agg.domain_errors;
  r.tolerance = tol;
  r.seed = seed;
  r.output_affine = sys.output_is_affine();
  if (agg.domain_errors < n_samples) {
    r.worst_slack = agg.worst;
    r.worst_index = agg.worst_index;
    const Sample s = draw(agg.worst_index);
    r.worst_x = s.x;
    r.worst_xt = s.xt;
    r.worst_u = s.u;
    r.worst_ut = s.ut;
    r.worst_d = s.d;
  }
  if (!r.output_affine) {
    r.warnings.emplace_back(
        "output map is not affine in (x, u): the sampled inequality is an empirical check only");
  }
  if (agg.domain_errors > 0) {
    r.warnings.push_back(std::to_string(agg.domain_errors) + " sample(s) hit a domain error");
  }
  if (!dt_certificate_issues(dc).empty()) {
    r.warnings.emplace_back("DT certificate violates its own invariants; see certificate issues");
  }
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

TransferReport run_transfer(const SystemSpec& sys, const GridSpec& g, const Certificate& cert,
                            const TransferOptions& opts) {
  TransferReport rep;
  rep.tau = opts.tau;

  rep.lipschitz_f = opts.lipschitz_f ? *opts.lipschitz_f : estimate_Lf(sys, g, opts.threads);
  if (opts.scheme == Scheme::RK2) {
    if (opts.sigma_slope) {
      rep.bound = consistency_bound_with_slope(Scheme::RK2, rep.lipschitz_f, *opts.sigma_slope,
                                               opts.delta0);
    } else {
      rep.c_f = estimate_cf(sys, g, opts.threads);
      if (opts.lipschitz_df) {
        rep.lipschitz_df = *opts.lipschitz_df;
      } else {
        rep.lipschitz_df = estimate_Ldf(sys, g, opts.ldf_pairs, opts.seed);
        rep.ldf_estimated = true;
        rep.warnings.emplace_back(
            "L_df is a sampled estimate (x1.1 safety factor), not a proven bound; rho(tau) "
            "inherits that gap");
      }
      rep.bound =
          consistency_bound(Scheme::RK2, rep.lipschitz_f, rep.lipschitz_df, rep.c_f, opts.delta0);
    }
  } else {
    rep.bound = consistency_bound(Scheme::Euler, rep.lipschitz_f);
  }
  if (!opts.lipschitz_f) {
    rep.warnings.emplace_back("L_f is the maximum of |[A B]|_2 over grid points only");
  }

  const TransferInput ti = make_transfer_input(cert, rep.bound);
  rep.t1 = tau1(ti);
  rep.etas = eta_range(ti, rep.t1);
  rep.alpha_at_tau = opts.tau > 0.0 ? alpha(opts.tau, ti) : 0.0;
  rep.tau_admissible = opts.tau > 0.0 && opts.tau < rep.t1.tau1;
  if (!rep.tau_admissible) {
    rep.warnings.push_back("tau is not in (0, tau1); binding constraint: " + rep.t1.binding);
    return rep;
  }

  rep.dt = dt_certificate(ti, rep.t1, opts.tau);
  rep.consistency = check_consistency_grid(sys, g, opts.tau, rep.bound, kDefaultDefectTol,
                                           opts.threads);
  rep.dt_check = check_dt_grid(sys, opts.scheme, g, *rep.dt, opts.tol, opts.threads);
  if (opts.lyapunov_samples > 0) {
    rep.lyapunov = check_lyapunov_sampled(sys, opts.scheme, *rep.dt, g, opts.lyapunov_samples,
                                          opts.seed, opts.tol, opts.threads);
  }
  if (!rep.consistency->bound_satisfied) {
    rep.warnings.emplace_back("consistency bound violated on the grid; tau1 is not backed");
  }
  return rep;
}

}  // namespace ioss
