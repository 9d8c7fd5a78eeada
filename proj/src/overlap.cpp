#include "aqs/overlap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "aqs/evolve.hpp"

namespace aqs {

namespace {

void check_state(const DenseState& state, const HamiltonianTerms& terms, int max_sites) {
  if (state.n != terms.num_sites)
    throw std::invalid_argument("overlap: state/terms size mismatch");
  if (state.n < 1 || state.n > max_sites)
    throw std::invalid_argument("overlap: unsupported system size");
  if (std::abs(state.amp.squaredNorm() - 1.0) > 1e-8)
    throw std::invalid_argument("overlap: state must be normalized");
}

// One Lanczos pass from `start` (unit norm). Converged Ritz pairs are exact
// atoms of the spectral measure; the rest form its Gauss-quadrature remainder.
struct MeasureRound {
  std::vector<double> energies, weights;       // converged atoms
  std::vector<Eigen::VectorXcd> vectors;       // their Ritz vectors, for deflation
  std::vector<double> rest_energies, rest_weights;
  bool exhausted = false;                      // Krylov space closed: round is exact
};

MeasureRound lanczos_measure_round(const DenseOp& op, const Eigen::VectorXcd& start, int m_max) {
  const std::int64_t dim = start.size();
  const int m_cap = static_cast<int>(std::min<std::int64_t>(m_max, dim));
  std::vector<Eigen::VectorXcd> basis;
  basis.reserve(m_cap);
  std::vector<double> alphas, betas;
  Eigen::VectorXcd v = start, w(dim);
  MeasureRound out;
  double last_beta = 0.0;
  for (int it = 0; it < m_cap; ++it) {
    basis.push_back(v);
    w.setZero();
    op.apply_add(v, w, 1.0);
    alphas.push_back(std::real(v.dot(w)));
    w -= alphas.back() * v;
    if (it > 0) w -= betas[static_cast<std::size_t>(it) - 1] * basis[static_cast<std::size_t>(it) - 1];
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) w -= b.dot(w) * b;
    last_beta = w.norm();
    if (last_beta < 1e-13) {
      out.exhausted = true;
      break;
    }
    if (it + 1 < m_cap) {
      betas.push_back(last_beta);
      v = w / last_beta;
    }
  }
  const int m = static_cast<int>(alphas.size());
  if (out.exhausted) last_beta = 0.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(Eigen::Map<Eigen::VectorXd>(alphas.data(), m),
                            Eigen::Map<Eigen::VectorXd>(betas.data(), m - 1 > 0 ? m - 1 : 0));
  const Eigen::VectorXd& theta = es.eigenvalues();
  const Eigen::MatrixXd& u = es.eigenvectors();
  for (int k = 0; k < m; ++k) {
    const double weight = u(0, k) * u(0, k);
    if (weight < 1e-16) continue;
    const double resid = last_beta * std::abs(u(m - 1, k));
    if (resid <= 1e-9 * std::max(1.0, std::abs(theta[k]))) {
      out.energies.push_back(theta[k]);
      out.weights.push_back(weight);
      Eigen::VectorXcd y = Eigen::VectorXcd::Zero(dim);
      for (int j = 0; j < m; ++j) y += u(j, k) * basis[static_cast<std::size_t>(j)];
      out.vectors.push_back(std::move(y));
    } else {
      out.rest_energies.push_back(theta[k]);
      out.rest_weights.push_back(weight);
    }
  }
  return out;
}

}  // namespace

SpectralWeights spectral_weights(const DenseState& state, const HamiltonianTerms& terms) {
  check_state(state, terms, 14);
  const std::int64_t dim = state.dim();
  DenseOp op(terms);
  std::vector<double> en, wt;
  if (dim <= 256) {
    Eigen::MatrixXcd h(dim, dim);
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim), col(dim);
    for (std::int64_t j = 0; j < dim; ++j) {
      e[j] = 1.0;
      col.setZero();
      op.apply_add(e, col, 1.0);
      h.col(j) = col;
      e[j] = 0.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd amps = es.eigenvectors().adjoint() * state.amp;
    for (std::int64_t j = 0; j < dim; ++j) {
      const double w = std::norm(amps[j]);
      if (w > 1e-14) {
        en.push_back(es.eigenvalues()[j]);
        wt.push_back(w);
      }
    }
  } else {
    // Peel the measure off round by round: converged Ritz atoms are removed
    // from the residual, whatever mass is left when progress stalls enters as
    // the quadrature of the unresolved remainder (moment-exact, so the error
    // on alpha is bounded by that remaining mass).
    Eigen::VectorXcd resid = state.amp;
    const int max_rounds = 5;
    for (int round = 0; round < max_rounds; ++round) {
      const double mass = resid.squaredNorm();
      if (mass < 1e-11) break;
      auto r = lanczos_measure_round(op, resid / std::sqrt(mass), 320);
      for (std::size_t i = 0; i < r.energies.size(); ++i) {
        en.push_back(r.energies[i]);
        wt.push_back(mass * r.weights[i]);
      }
      for (const auto& y : r.vectors) resid -= y * y.dot(resid);
      if (r.exhausted) break;
      if (r.vectors.empty() || round == max_rounds - 1) {
        for (std::size_t i = 0; i < r.rest_energies.size(); ++i) {
          en.push_back(r.rest_energies[i]);
          wt.push_back(mass * r.rest_weights[i]);
        }
        break;
      }
    }
  }
  std::vector<std::size_t> order(en.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return en[a] < en[b]; });
  SpectralWeights out;
  out.energies.resize(static_cast<Eigen::Index>(en.size()));
  out.weights.resize(static_cast<Eigen::Index>(en.size()));
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.energies[static_cast<Eigen::Index>(i)] = en[order[i]];
    out.weights[static_cast<Eigen::Index>(i)] = wt[order[i]];
  }
  return out;
}

cplx alpha_from_weights(const SpectralWeights& w, double tau) {
  cplx out = 0.0;
  for (Eigen::Index j = 0; j < w.energies.size(); ++j)
    out += w.weights[j] * std::exp(cplx(0.0, -w.energies[j] * tau));
  return out;
}

double e2_exact(const SpectralWeights& w) { return w.weights.squaredNorm(); }

cplx alpha(const DenseState& state, const HamiltonianTerms& terms, double tau) {
  return alpha_from_weights(spectral_weights(state, terms), tau);
}

cplx alpha(const Mps& state, const HamiltonianTerms& terms, double tau, double dt,
           int trotter_substeps) {
  if (!(dt > 0.0)) throw std::invalid_argument("alpha: dt must be positive");
  if (state.num_sites != terms.num_sites)
    throw std::invalid_argument("alpha: state/terms size mismatch");
  const double t = std::abs(tau);
  if (t == 0.0) return 1.0;
  Mps evolved = state;
  const int steps = std::max(1, static_cast<int>(std::ceil(t / dt - 1e-12)));
  double done = 0.0;
  for (int k = 0; k < steps; ++k) {
    const double step_dt = (k + 1 == steps) ? t - done : dt;
    trotter_step(evolved, terms, step_dt, trotter_substeps);
    done += step_dt;
  }
  const cplx a = overlap(state, evolved);
  return tau < 0.0 ? std::conj(a) : a;
}

double sample_tau(double delta_estimate, int k_max, std::mt19937_64& rng) {
  if (!(delta_estimate > 0.0))
    throw std::invalid_argument("sample_tau: gap estimate must be positive");
  if (k_max < 1) throw std::invalid_argument("sample_tau: k_max must be >= 1");
  std::uniform_int_distribution<int> pick(1, k_max);
  return M_PI * pick(rng) / delta_estimate;
}

double e2_average(const DenseState& state, const HamiltonianTerms& terms,
                  const std::vector<double>& taus) {
  if (taus.empty()) throw std::invalid_argument("e2_average: no tau samples");
  const SpectralWeights w = spectral_weights(state, terms);
  double acc = 0.0;
  for (double tau : taus) acc += std::norm(alpha_from_weights(w, tau));
  return acc / static_cast<double>(taus.size());
}

double e2_average(const Mps& state, const HamiltonianTerms& terms, const std::vector<double>& taus,
                  double dt, int trotter_substeps) {
  if (taus.empty()) throw std::invalid_argument("e2_average: no tau samples");
  double acc = 0.0;
  for (double tau : taus) acc += std::norm(alpha(state, terms, tau, dt, trotter_substeps));
  return acc / static_cast<double>(taus.size());
}

double ground_population_bound(double e2) {
  if (e2 < -1e-12 || e2 > 1.0 + 1e-12)
    throw std::invalid_argument("ground_population_bound: e2 outside [0, 1]");
  e2 = std::min(std::max(e2, 0.0), 1.0);
  if (e2 < 0.5) return 0.0;
  return 0.5 + 0.5 * std::sqrt(2.0 * e2 - 1.0);
}

double bell_expectation(double alpha_abs2) {
  if (alpha_abs2 < -1e-12 || alpha_abs2 > 1.0 + 1e-12)
    throw std::invalid_argument("bell_expectation: |alpha|^2 outside [0, 1]");
  alpha_abs2 = std::min(std::max(alpha_abs2, 0.0), 1.0);
  return 0.25 * (1.0 - alpha_abs2);
}

Mat2 ancilla_density_matrix(const DenseState& state, const HamiltonianTerms& terms, double tau) {
  const cplx a = alpha(state, terms, tau);
  Mat2 rho;
  rho << 0.5, 0.5 * std::conj(a), 0.5 * a, 0.5;
  return rho;
}

OverlapEstimate measure_overlap(double true_expectation, int samples, std::mt19937_64& rng,
                                OverlapKind kind) {
  if (true_expectation < -1e-12 || true_expectation > 1.0 + 1e-12)
    throw std::invalid_argument("measure_overlap: probability outside [0, 1]");
  if (samples < 1) throw std::invalid_argument("measure_overlap: need at least one sample");
  const double p = std::min(std::max(true_expectation, 0.0), 1.0);
  std::bernoulli_distribution shot(p);
  int hits = 0;
  for (int i = 0; i < samples; ++i) hits += shot(rng) ? 1 : 0;
  OverlapEstimate est;
  est.value = static_cast<double>(hits) / samples;
  est.kind = kind;
  est.samples = samples;
  est.std_err = std::sqrt(est.value * (1.0 - est.value) / samples);
  return est;
}

cplx explicit_ancilla_reference(const DenseState& state, const HamiltonianTerms& terms,
                                double tau) {
  check_state(state, terms, 10);
  DenseOp op(terms);
  // The conditioned branch carries the inverse-sign evolution, so X - iY on
  // the ancilla reads out <psi| exp(-i H tau) |psi> directly rather than its
  // conjugate.
  Eigen::VectorXcd branch = state.amp;
  ApplyFn apply = [&op](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    op.apply_add(x, y, 1.0);
  };
  if (tau != 0.0) krylov_expm_apply(apply, op.norm_bound(), -tau, branch);
  DenseState full;
  full.n = state.n + 1;
  full.amp.resize(2 * state.dim());
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::int64_t idx = 0; idx < state.dim(); ++idx) {
    full.amp[2 * idx] = inv_sqrt2 * state.amp[idx];      // ancilla |0>: untouched
    full.amp[2 * idx + 1] = inv_sqrt2 * branch[idx];     // ancilla |1>: evolved
  }
  const double sx = std::real(dense_expectation_single_site(full, pauli_x(), state.n));
  const double sy = std::real(dense_expectation_single_site(full, pauli_y(), state.n));
  return cplx(sx, -sy);
}

}  // namespace aqs
