#include "aqs/noise.hpp"

#include <cmath>
#include <stdexcept>

#include "aqs/dmrg.hpp"
#include "aqs/overlap.hpp"

namespace aqs {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

const Mat2& pauli_of(PauliKind k) {
  switch (k) {
    case PauliKind::x: return pauli_x();
    case PauliKind::y: return pauli_y();
    default: return pauli_z();
  }
}

Eigen::Vector2cd minus_local() {
  Eigen::Vector2cd v;
  v << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  return v;
}

void check_probability(double p) {
  if (!(p >= 0.0) || !(p <= 1.0))
    throw std::invalid_argument("noise: probability outside [0, 1]");
}

// Shared stepping: pre-sweep exposure layers, then one Trotter step per dt
// slice (remainder last) with a noise layer after each. `touch(layer, psi)`
// is called once per noise-layer slot.
template <typename Touch>
Mps run_layers(const NoisyRunConfig& cfg, Touch&& touch) {
  validate_params(cfg.params);
  validate_schedule(cfg.schedule);
  if (cfg.max_bond < 1) throw std::invalid_argument("noise: max_bond must be positive");
  auto built = build_zzxz(cfg.params);
  const HamiltonianTerms& h0 = built.first;
  const HamiltonianTerms& ht = built.second;
  Mps psi = product_state(
      std::vector<Eigen::Vector2cd>(cfg.params.num_sites, minus_local()), cfg.max_bond);

  const double dt = cfg.schedule.dt;
  const long exposure = std::lround(1.0 / dt);
  int layer = 0;
  for (long k = 0; k < exposure; ++k) touch(layer++, psi);

  const auto bounds = chunk_boundaries(cfg.schedule);
  const int L = static_cast<int>(cfg.schedule.chunk_lengths.size());
  for (int i = 0; i < L; ++i) {
    const double t_i = cfg.schedule.chunk_times[i];
    const double s_a = bounds[i], s_b = bounds[i + 1];
    const long steps = std::max<long>(1, static_cast<long>(std::ceil(t_i / dt - 1e-12)));
    for (long k = 0; k < steps; ++k) {
      const double ta = k * dt;
      const double tb = (k + 1 == steps) ? t_i : (k + 1) * dt;
      const double sa = s_a + (s_b - s_a) * ta / t_i;
      const double sb = s_a + (s_b - s_a) * tb / t_i;
      evolve_chunk(psi, h0, ht, sa, sb, tb - ta, cfg.schedule);
      touch(layer++, psi);
    }
  }
  return psi;
}

}  // namespace

std::mt19937_64 noise_stream(std::uint64_t seed, long trajectory) {
  return std::mt19937_64(splitmix64(seed) ^ splitmix64(0x51ab5e1ULL + trajectory));
}

std::vector<std::pair<int, PauliKind>> apply_pauli_noise_layer(Mps& state, double p,
                                                               std::mt19937_64& rng) {
  check_probability(p);
  std::vector<std::pair<int, PauliKind>> events;
  std::bernoulli_distribution hit(p);
  std::uniform_int_distribution<int> which(0, 2);
  for (int site = 0; site < state.num_sites; ++site) {
    if (p > 0.0 && hit(rng)) {
      const auto kind = static_cast<PauliKind>(which(rng));
      apply_single_site(state, pauli_of(kind), site);
      events.emplace_back(site, kind);
    }
  }
  return events;
}

long noise_layer_count(double total_time, double dt) {
  if (!(total_time >= 0.0) || !(dt > 0.0))
    throw std::invalid_argument("noise_layer_count: bad time settings");
  return std::lround((1.0 + total_time) / dt);
}

TrajectoryResult noisy_trajectory(const NoisyRunConfig& cfg, double p, std::mt19937_64& rng) {
  check_probability(p);
  TrajectoryResult out;
  out.state = run_layers(cfg, [&](int layer, Mps& psi) {
    for (const auto& [site, kind] : apply_pauli_noise_layer(psi, p, rng))
      out.events.push_back({layer, site, kind});
  });
  return out;
}

std::pair<double, double> noisy_ensemble_run(const NoisyRunConfig& cfg, const NoiseConfig& noise,
                                             const std::function<double(const Mps&)>& observable) {
  check_probability(noise.p);
  if (noise.n_trajectories < 1)
    throw std::invalid_argument("noisy_ensemble_run: need at least one trajectory");
  if (noise.shot_m < 0) throw std::invalid_argument("noisy_ensemble_run: negative shot count");

  double sum = 0.0, sumsq = 0.0;
  for (int t = 0; t < noise.n_trajectories; ++t) {
    auto rng = noise_stream(noise.seed, t);
    const auto traj = noisy_trajectory(cfg, noise.p, rng);
    double v = observable(traj.state);
    if (noise.shot_m > 0) {
      if (!(v >= 0.0) || !(v <= 1.0))
        throw std::invalid_argument("noisy_ensemble_run: shot sampling needs a probability");
      v = measure_overlap(v, noise.shot_m, rng).value;
    }
    sum += v;
    sumsq += v * v;
  }
  const double n = noise.n_trajectories;
  const double mean = sum / n;
  double std_err = 0.0;
  if (noise.n_trajectories > 1) {
    const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
    std_err = std::sqrt(var / n);
  }
  return {mean, std_err};
}

std::vector<long> dry_run_event_counts(const NoiseConfig& noise, int num_sites, long num_layers) {
  check_probability(noise.p);
  if (noise.n_trajectories < 1 || num_sites < 1 || num_layers < 0)
    throw std::invalid_argument("dry_run_event_counts: bad settings");
  std::vector<long> counts(noise.n_trajectories);
  const long slots = static_cast<long>(num_sites) * num_layers;
  for (int t = 0; t < noise.n_trajectories; ++t) {
    auto rng = noise_stream(noise.seed, t);
    std::binomial_distribution<long> binom(slots, noise.p);
    counts[t] = binom(rng);
  }
  return counts;
}

double deliberate_flip_run(const NoisyRunConfig& cfg, int site, int layer, PauliKind pauli) {
  if (site < 0 || site >= cfg.params.num_sites)
    throw std::invalid_argument("deliberate_flip_run: site out of range");
  Mps psi = run_layers(cfg, [&](int at, Mps& state) {
    if (at == layer) apply_single_site(state, pauli_of(pauli), site);
  });

  auto built = build_zzxz(cfg.params);
  const double e_final = energy(psi, built.second);
  const auto gs = dmrg_ground_state(built.second, std::max(cfg.max_bond, 32), 24, 1e-11);
  return (e_final - gs.energy) / std::abs(gs.energy);
}

}  // namespace aqs
