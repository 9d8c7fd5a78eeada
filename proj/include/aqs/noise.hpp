#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "aqs/evolve.hpp"
#include "aqs/mps.hpp"

namespace aqs {

enum class PauliKind { x = 0, y = 1, z = 2 };

struct NoiseEvent {
  int layer = 0;  // noise-layer index: [0, 1/dt) is the pre-sweep exposure
  int site = 0;
  PauliKind pauli = PauliKind::x;
};

struct NoiseConfig {
  double p = 1e-4;          // per-site per-layer event probability
  int n_trajectories = 100;
  int shot_m = 0;           // > 0: binomial-sample each reading with m shots
  std::uint64_t seed = 1;
};

// One noise layer: each site independently hit with probability p, the Pauli
// uniform over {x, y, z}. Returns the (site, pauli) hits in site order.
std::vector<std::pair<int, PauliKind>> apply_pauli_noise_layer(Mps& state, double p,
                                                               std::mt19937_64& rng);

// The RNG stream trajectory `t` of an ensemble draws from; exposed so drivers
// can replay individual trajectories of a seeded ensemble.
std::mt19937_64 noise_stream(std::uint64_t seed, long trajectory);

// Noise-layer budget of a duration-T sweep at 1/dt steps per time unit: the
// prepared state sits exposed for one unit's worth of layers before the first
// step, then one layer follows every step, so the total spans 1 + T units.
long noise_layer_count(double total_time, double dt);

struct NoisyRunConfig {
  ModelParams params;
  Schedule schedule;
  int max_bond = 64;
};

struct TrajectoryResult {
  Mps state;
  std::vector<NoiseEvent> events;
};

// One noisy sweep: pre-sweep exposure layers, then Trotter step / noise layer
// alternation along the schedule.
TrajectoryResult noisy_trajectory(const NoisyRunConfig& cfg, double p, std::mt19937_64& rng);

// Trajectory mean and standard error of the observable over independent noise
// streams derived from (seed, trajectory index). With shot_m > 0 every
// reading is replaced by an m-shot binomial average, so the observable must
// return a probability.
std::pair<double, double> noisy_ensemble_run(const NoisyRunConfig& cfg, const NoiseConfig& noise,
                                             const std::function<double(const Mps&)>& observable);

// Event-count bookkeeping with the gates skipped: one Binomial(sites x
// layers, p) count per trajectory, same per-trajectory streams as real runs.
std::vector<long> dry_run_event_counts(const NoiseConfig& noise, int num_sites, long num_layers);

// One trajectory with exactly one injected Pauli at the given noise-layer
// index (layer < 0 injects nothing: the Trotter-residual control). Returns
// the relative energy error (E_final - E_gs) / |E_gs| against a DMRG ground
// energy.
double deliberate_flip_run(const NoisyRunConfig& cfg, int site, int layer, PauliKind pauli);

}  // namespace aqs
