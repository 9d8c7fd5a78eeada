#include "aqs/evolve.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace aqs {

void validate_schedule(const Schedule& sched) {
  if (sched.chunk_lengths.empty() || sched.chunk_lengths.size() != sched.chunk_times.size())
    throw std::invalid_argument("schedule: lengths/times size mismatch");
  double sum = 0.0;
  for (double l : sched.chunk_lengths) {
    if (l < 0.0) throw std::invalid_argument("schedule: negative chunk length");
    sum += l;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("schedule: chunk lengths must sum to 1");
  for (double t : sched.chunk_times)
    if (!(t > 0.0)) throw std::invalid_argument("schedule: chunk times must be positive");
  if (!(sched.dt > 0.0)) throw std::invalid_argument("schedule: dt must be positive");
  if (sched.trotter_substeps < 1) throw std::invalid_argument("schedule: substeps < 1");
}

Schedule naive_schedule(int num_chunks, double total_time, RampKind ramp) {
  if (num_chunks < 1) throw std::invalid_argument("naive_schedule: num_chunks < 1");
  if (!(total_time > 0.0)) throw std::invalid_argument("naive_schedule: total_time <= 0");
  Schedule s;
  s.chunk_lengths.assign(num_chunks, 1.0 / num_chunks);
  s.chunk_times.assign(num_chunks, total_time / num_chunks);
  s.ramp = ramp;
  return s;
}

Schedule make_backward_schedule(const Schedule& forward, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("make_backward_schedule: factor <= 0");
  Schedule back = forward;
  for (double& t : back.chunk_times) t *= factor;
  return back;
}

std::vector<double> chunk_boundaries(const Schedule& sched) {
  std::vector<double> bounds(sched.chunk_lengths.size() + 1, 0.0);
  for (std::size_t i = 0; i < sched.chunk_lengths.size(); ++i)
    bounds[i + 1] = bounds[i] + sched.chunk_lengths[i];
  bounds.back() = 1.0;  // absorb the summation roundoff
  return bounds;
}

Mat4 bond_gate(const Mat4& bond_h, double time) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(bond_h);
  Eigen::Vector4cd phases;
  for (int i = 0; i < 4; ++i) phases[i] = std::exp(cplx(0.0, -time * es.eigenvalues()[i]));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

namespace {

void trotter_bonds(Mps& state, const std::vector<Mat4>& bonds, double dt, int K) {
  auto layer = [&](std::size_t parity, double t) {
    for (std::size_t b = parity; b < bonds.size(); b += 2)
      apply_two_site_gate(state, bond_gate(bonds[b], t), (int)b, state.max_bond,
                          default_svd_cutoff);
  };
  const double half = dt / (2.0 * K), full = dt / K;
  layer(0, half);
  for (int k = 0; k < K; ++k) {
    layer(1, full);
    layer(0, k + 1 < K ? full : half);
  }
}

double checked_endpoint(double s, const char* what) {
  if (s < -1e-9 || s > 1.0 + 1e-9) throw std::invalid_argument(std::string("evolve_chunk: ") + what);
  return std::min(1.0, std::max(0.0, s));
}

}  // namespace

void trotter_step(Mps& state, const HamiltonianTerms& terms, double dt, int K) {
  if (!(dt > 0.0)) throw std::invalid_argument("trotter_step: dt <= 0");
  if (K < 1) throw std::invalid_argument("trotter_step: K < 1");
  trotter_bonds(state, bond_hamiltonians(terms), dt, K);
}

void evolve_chunk(Mps& state, const HamiltonianTerms& h0, const HamiltonianTerms& ht,
                  double s_start, double s_end, double time, const Schedule& sched) {
  if (!(time > 0.0)) throw std::invalid_argument("evolve_chunk: time <= 0");
  if (!(sched.dt > 0.0) || sched.trotter_substeps < 1)
    throw std::invalid_argument("evolve_chunk: bad step settings");
  s_start = checked_endpoint(s_start, "s_start out of [0,1]");
  s_end = checked_endpoint(s_end, "s_end out of [0,1]");

  const auto bonds0 = bond_hamiltonians(h0);
  const auto bonds_t = bond_hamiltonians(ht);
  std::vector<Mat4> bonds(bonds0.size());

  const int steps = std::max(1, (int)std::ceil(time / sched.dt - 1e-12));
  double t0 = 0.0;
  for (int m = 0; m < steps; ++m) {
    const double step_dt = (m + 1 == steps) ? time - t0 : sched.dt;
    const double u = (t0 + 0.5 * step_dt) / time;
    const double s_mid = s_start + (s_end - s_start) * u;
    const double lam = ramp_value(sched.ramp, s_mid, 0.0, 1.0);
    for (std::size_t b = 0; b < bonds.size(); ++b)
      bonds[b] = (1.0 - lam) * bonds0[b] + lam * bonds_t[b];
    trotter_bonds(state, bonds, step_dt, sched.trotter_substeps);
    t0 += step_dt;
  }
}

void evolve_chunk(DenseState& state, const DensePath& path, double s_start, double s_end,
                  double time, const Schedule& sched) {
  s_start = checked_endpoint(s_start, "s_start out of [0,1]");
  s_end = checked_endpoint(s_end, "s_end out of [0,1]");
  dense_evolve_interval(state, path, sched.ramp, s_start, s_end, time, sched.dt);
}

namespace {

int resolve_stop(const Schedule& sched, int stop_chunk) {
  const int total = (int)sched.chunk_lengths.size();
  const int upto = stop_chunk < 0 ? total : stop_chunk;
  if (upto < 1 || upto > total)
    throw std::invalid_argument("evolve_schedule: stop_chunk out of range");
  return upto;
}

}  // namespace

Mps evolve_schedule(Mps psi, const HamiltonianTerms& h0, const HamiltonianTerms& ht,
                    const Schedule& sched, Direction direction, int stop_chunk) {
  validate_schedule(sched);
  const int upto = resolve_stop(sched, stop_chunk);
  const auto bounds = chunk_boundaries(sched);
  if (direction == Direction::forward) {
    for (int j = 0; j < upto; ++j)
      evolve_chunk(psi, h0, ht, bounds[j], bounds[j + 1], sched.chunk_times[j], sched);
  } else {
    for (int j = upto - 1; j >= 0; --j)
      evolve_chunk(psi, h0, ht, bounds[j + 1], bounds[j], sched.chunk_times[j], sched);
  }
  return psi;
}

DenseState evolve_schedule(DenseState psi, const DensePath& path, const Schedule& sched,
                           Direction direction, int stop_chunk) {
  validate_schedule(sched);
  const int upto = resolve_stop(sched, stop_chunk);
  const auto bounds = chunk_boundaries(sched);
  if (direction == Direction::forward) {
    for (int j = 0; j < upto; ++j)
      evolve_chunk(psi, path, bounds[j], bounds[j + 1], sched.chunk_times[j], sched);
  } else {
    for (int j = upto - 1; j >= 0; --j)
      evolve_chunk(psi, path, bounds[j + 1], bounds[j], sched.chunk_times[j], sched);
  }
  return psi;
}

}  // namespace aqs
