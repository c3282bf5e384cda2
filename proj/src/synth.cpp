#include "ioss/synth.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "ioss/error.hpp"
#include "ioss/parallel.hpp"

namespace ioss {

std::vector<double> default_kappa_grid() {
  std::vector<double> k(16);
  for (int i = 0; i < 16; ++i) k[i] = std::pow(10.0, 1.0 - 4.0 * i / 15.0);
  return k;
}

namespace {

struct Linearization {
  Eigen::MatrixXd A, B, C, D;
};

std::vector<Linearization> unique_linearizations(const SystemSpec& sys, const GridSpec& g) {
  std::map<std::vector<double>, std::size_t> seen;
  std::vector<Linearization> out;
  Eigen::VectorXd z(g.dims().nz());
  for (std::uint64_t i = 0; i < g.size(); ++i) {
    g.point(i, z);
    PointEval pe = eval_point(sys, z);
    std::vector<double> key;
    key.reserve(pe.A.size() + pe.B.size() + pe.C.size() + pe.D.size());
    for (const Eigen::MatrixXd* m : {&pe.A, &pe.B, &pe.C, &pe.D})
      key.insert(key.end(), m->data(), m->data() + m->size());
    if (seen.emplace(std::move(key), out.size()).second) {
      out.push_back({std::move(pe.A), std::move(pe.B), std::move(pe.C), std::move(pe.D)});
    }
  }
  return out;
}

struct Worst {
  double lambda = -std::numeric_limits<double>::infinity();
  std::size_t index = 0;
  Eigen::VectorXd v;
};

Worst worst_point(const std::vector<Linearization>& lins, const Eigen::MatrixXd& P,
                  const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R, double kappa,
                  unsigned threads) {
  return parallel_reduce<Worst>(
      lins.size(), threads,
      [&](std::uint64_t begin, std::uint64_t end) {
        Worst w;
        for (std::uint64_t i = begin; i < end; ++i) {
          const Linearization& l = lins[i];
          const Eigen::MatrixXd M = assemble_ct_lmi(l.A, l.B, l.C, l.D, P, Q, R, kappa).dense();
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
          const Eigen::Index top = M.rows() - 1;
          if (es.eigenvalues()[top] > w.lambda) {
            w.lambda = es.eigenvalues()[top];
            w.index = i;
            w.v = es.eigenvectors().col(top);
          }
        }
        return w;
      },
      [](Worst a, Worst b) { return b.lambda > a.lambda ? b : a; });
}

Eigen::MatrixXd clip_psd(const Eigen::MatrixXd& X, double eps) {
  if (X.rows() == 0) return X;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X);
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(eps);
  Eigen::MatrixXd Y = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (Y + Y.transpose());
}

Eigen::MatrixXd clip_diag(const Eigen::MatrixXd& X, double eps) {
  return X.diagonal().cwiseMax(eps).asDiagonal();
}

// Relative step: X moves by t |X|_F along -G/|G|_F.
void relative_step(Eigen::MatrixXd& X, const Eigen::MatrixXd& G, double t) {
  const double gn = G.norm();
  if (gn == 0.0 || X.size() == 0) return;
  X -= (t * std::max(X.norm(), 1e-12) / gn) * G;
}

struct Iterate {
  Eigen::MatrixXd P, Q, R;
};

void project(Iterate& it, int n, const SynthOptions& o) {
  it.P = clip_psd(it.P, o.floor_eps);
  // Trace normalization; the LMI is jointly homogeneous so Q, R follow.
  const double s = n / it.P.trace();
  it.P *= s;
  it.Q *= s;
  it.R *= s;
  it.P = clip_psd(it.P, o.floor_eps);
  it.Q = o.full_qr ? clip_psd(it.Q, o.floor_eps) : clip_diag(it.Q, o.floor_eps);
  it.R = o.full_qr ? clip_psd(it.R, o.floor_eps) : clip_diag(it.R, o.floor_eps);
}

}  // namespace

SynthResult synthesize_certificate(const SystemSpec& sys, const GridSpec& g,
                                   const SynthOptions& opts) {
  if (g.size() == 0) throw Error("grid is empty");
  if (!(opts.margin > 0.0) || !(opts.floor_eps > 0.0)) {
    throw Error("synth margin and floor must be positive");
  }
  if (opts.kappas.empty()) throw Error("no kappa candidates");
  const auto t0 = std::chrono::steady_clock::now();
  const Dims& dims = sys.dims();
  const int n = dims.n, q = dims.q, p = dims.p;

  SynthResult res;
  const std::vector<Linearization> lins = unique_linearizations(sys, g);
  res.unique_linearizations = lins.size();

  // Jittered identity start; the jitter only breaks symmetric ties.
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> jitter(-1e-3, 1e-3);
  Iterate start{Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Identity(q, q),
                Eigen::MatrixXd::Identity(p, p)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double e = jitter(rng);
      start.P(i, j) += e;
      if (i != j) start.P(j, i) += e;
    }

  bool have_warm = false;
  Iterate warm;

  for (double kappa : opts.kappas) {
    if (!(kappa > 0.0)) throw Error("kappa candidates must be positive");
    SynthLogEntry entry;
    entry.kappa = kappa;

    Iterate it = have_warm ? warm : start;
    {
      // Coarse common rescaling of Q and R before refining: the smallest
      // scale that already meets the margin, else the best one seen.
      double best = std::numeric_limits<double>::infinity();
      double best_s = 1.0;
      for (double s = 1e-2; s <= 1e6; s *= 10.0) {
        const double phi = worst_point(lins, it.P, s * it.Q, s * it.R, kappa, opts.threads).lambda;
        if (phi < best) {
          best = phi;
          best_s = s;
        }
        if (phi <= -opts.margin) break;
      }
      it.Q *= best_s;
      it.R *= best_s;
    }
    project(it, n, opts);

    Iterate best_it = it;
    double best_phi = std::numeric_limits<double>::infinity();
    int k = 0;
    for (; k < opts.max_iterations; ++k) {
      const Worst w = worst_point(lins, it.P, it.Q, it.R, kappa, opts.threads);
      if (w.lambda < best_phi) {
        best_phi = w.lambda;
        best_it = it;
      }
      entry.best_phi_history.push_back(best_phi);
      if (best_phi <= -opts.margin) break;

      const Linearization& l = lins[w.index];
      const Eigen::VectorXd v1 = w.v.head(n);
      const Eigen::VectorXd v2 = w.v.tail(q);
      const Eigen::VectorXd wv = l.A * v1 + l.B * v2;
      const Eigen::VectorXd y = l.C * v1 + l.D * v2;
      const Eigen::MatrixXd GP = v1 * wv.transpose() + wv * v1.transpose() + kappa * v1 * v1.transpose();
      Eigen::MatrixXd GQ = -v2 * v2.transpose();
      Eigen::MatrixXd GR = -y * y.transpose();
      if (!opts.full_qr) {
        GQ = Eigen::MatrixXd(GQ.diagonal().asDiagonal());
        GR = Eigen::MatrixXd(GR.diagonal().asDiagonal());
      }
      const double t = opts.step0 / std::sqrt(static_cast<double>(k) + 1.0);
      relative_step(it.P, GP, t);
      relative_step(it.Q, GQ, t);
      relative_step(it.R, GR, t);
      project(it, n, opts);
    }
    entry.iterations = std::min(k + 1, opts.max_iterations);
    entry.best_phi = best_phi;
    entry.reached_margin = best_phi <= -opts.margin;

    warm = best_it;
    have_warm = true;
    if (entry.reached_margin) {
      Eigen::MatrixXd P = best_it.P, Q = best_it.Q, R = best_it.R;
      double kap = kappa;
      if (opts.candidate_hook) opts.candidate_hook(P, Q, R, kap);
      // The verifier, not the optimizer, decides.
      try {
        Certificate cert = Certificate::create(SymMatrix::from_dense(P), SymMatrix::from_dense(Q),
                                               SymMatrix::from_dense(R), kap);
        CheckReport rep = check_ct_grid(sys, g, cert, opts.tol, opts.threads);
        if (rep.certified()) {
          entry.verified = true;
          res.feasible_kappas.push_back(kap);
          if (!res.certificate) {
            res.certificate = std::move(cert);
            res.verification = std::move(rep);
          }
        } else {
          ++res.rejected_candidates;
        }
      } catch (const Error&) {
        ++res.rejected_candidates;
      }
    }
    res.log.push_back(std::move(entry));
    if (res.certificate && !opts.scan_all) break;
  }
  res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace ioss
