#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "aqs/evolve.hpp"
#include "aqs/inference.hpp"
#include "aqs/model.hpp"

namespace aqs {

enum class ObjectiveKind { final_overlap, ratio_smoothness, profile_follow };
enum class RatioMode { ancilla_free, forward_only };
enum class ObjectiveMode { oracle, certified_bound };
enum class OptimizerKind { nelder_mead, quasi_newton, cobyla_like };
enum class InitKind { naive, warm_start };

struct TraceEntry {
  std::vector<double> lengths;
  std::vector<double> times;
  double objective = 0.0;
  long overlap_evals = 0;  // cumulative
  long measurements = 0;   // cumulative simulated shots
};

struct OptimizationTrace {
  std::vector<TraceEntry> iterations;
  Schedule best;
  double best_objective = 0.0;
  ObjectiveKind objective_kind = ObjectiveKind::final_overlap;
  bool degraded = false;  // budget exhaustion / pinned chunk / dead overlap
};

// Euclidean projection onto {x >= min_len, sum x = 1} (sort-based active-set).
std::vector<double> project_simplex(std::vector<double> x, double min_len = 1e-4);

// Multiplicative rebalance of path-chunk lengths from consecutive overlap
// ratios R_i = O_i / O_{i-1} (O_0 = 1): chunks where fidelity dropped hardest
// (R_i below the mean) shrink so the fixed per-chunk time budget concentrates
// there. Result is floored at min_len and renormalized. A zero overlap pins
// its chunk at min_len and sets *zero_overlap if given.
std::vector<double> ratio_rebalance_step(const std::vector<double>& overlaps,
                                         const std::vector<double>& lengths, double step,
                                         double min_len = 1e-4, bool* zero_overlap = nullptr);

struct RatioVqaaConfig {
  ModelParams params;
  int num_chunks = 5;
  double total_time = 10.0;
  RatioMode mode = RatioMode::forward_only;
  int max_iters = 20;
  double step = 0.3;
  double min_len = 1e-4;
  double dt = 1.0 / 16.0;
  int trotter_substeps = 2;
  double backward_factor = 4.0;  // ancilla-free echo return leg
  double backward_floor = 20.0;
};

// Iterates evolve -> measure chunk-end overlaps -> rebalance until the lengths
// settle (max change < 1e-3) or max_iters. Times stay total_time/num_chunks.
OptimizationTrace run_ratio_vqaa(const RatioVqaaConfig& cfg);

struct BlackboxConfig {
  ModelParams params;
  int num_chunks = 5;
  double total_time = 10.0;
  ObjectiveMode mode = ObjectiveMode::oracle;
  int shots = 200;      // per tau draw, certified mode
  int tau_draws = 32;   // spectral-measure samples, certified mode
  double delta_estimate = 1.0;
  int k_max = 20;
  unsigned long long seed = 1;
  double min_len = 1e-4;
  double dt = 1.0 / 16.0;
  int trotter_substeps = 2;
};

// Final ground-state overlap of the schedule with the given chunk lengths
// (projected onto the constrained simplex first). Oracle mode reads the exact
// overlap; certified mode returns the population lower bound reconstructed
// from simulated Bell sampling, with shot noise frozen per lengths vector.
double blackbox_objective(const std::vector<double>& lengths, const BlackboxConfig& cfg);

struct OptimResult {
  std::vector<double> x;
  double value = 0.0;
  int evals = 0;
  bool exhausted = false;  // eval budget hit or line search stalled
  std::vector<std::pair<std::vector<double>, double>> history;  // every evaluation
};

struct NelderMeadConfig {
  double simplex_scale = 0.1;
  int max_evals = 500;
  double xtol = 1e-6;
  double ftol = 1e-9;
  double min_len = 1e-4;
};

// Downhill simplex minimizer constrained to {x >= min_len, sum x = 1}: every
// candidate (including the initial simplex) is projected before evaluation.
OptimResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                        const std::vector<double>& x0, const NelderMeadConfig& cfg = {});

struct QuasiNewtonConfig {
  double min_rel_step = 0.01;  // finite-difference step, relative floor
  int memory = 5;
  int max_iters = 50;
  double gtol = 1e-8;
};

// Box-bounded limited-memory quasi-Newton minimizer with forward-difference
// gradients (per-coordinate step max(min_rel_step * |x_i|, 1e-4)).
OptimResult bounded_quasi_newton(const std::function<double(const std::vector<double>&)>& f,
                                 const std::vector<double>& x0, const std::vector<double>& lower,
                                 const std::vector<double>& upper,
                                 const QuasiNewtonConfig& cfg = {});

struct CobylaConfig {
  double rho_begin = 0.1;
  double rho_end = 1e-4;
  int max_evals = 300;
  double min_len = 1e-4;
};

// Derivative-free linear-model trust-region minimizer on the constrained
// simplex: fits a linear model through a working simplex of points, steps
// against its gradient within the trust radius, projects, and adapts the
// radius on success/failure.
OptimResult cobyla_like(const std::function<double(const std::vector<double>&)>& f,
                        const std::vector<double>& x0, const CobylaConfig& cfg = {});

struct BlackboxRunConfig {
  BlackboxConfig objective;
  OptimizerKind optimizer = OptimizerKind::nelder_mead;
  int eval_budget = 200;
  InitKind init = InitKind::naive;
};

// Maximizes blackbox_objective over chunk lengths; the naive uniform schedule
// is evaluated first and kept as the incumbent. Every evaluation lands in the
// trace.
OptimizationTrace run_blackbox_vqaa(const BlackboxRunConfig& cfg);

struct ProfileVqaaConfig {
  ModelParams params;
  int num_chunks = 5;
  double theta0 = 0.5;       // overlap target at the first chunk end
  double thetaL = 0.99;      // overlap target at s = 1
  double time_cap = 20.0;    // per-chunk evolution-time ceiling
  double time_tol = 0.25;    // bisection resolution on each T_i
  double eps = 0.002;        // hypothesis-test indifference half-width
  double threshold = 0.05;   // error budget per tail
  int max_samples = 4000;
  BetaPosterior prior{10.0, 2.0};
  double delta_estimate = 1.0;  // gap guess driving the tau harmonics
  int k_max = 20;
  unsigned long long seed = 1;
  double dt = 1.0 / 16.0;
  int trotter_substeps = 2;
};

// Sequentially fixes each chunk time by bisection until the instantaneous
// ground-state overlap clears a threshold interpolated from theta0 to thetaL,
// certified by the sequential Bell test (Undecided counts as not cleared).
// Chunks that cannot clear within time_cap are pinned there and flagged.
OptimizationTrace run_profile_vqaa(const ProfileVqaaConfig& cfg);

}  // namespace aqs
