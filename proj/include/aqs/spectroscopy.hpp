#pragma once

#include <map>
#include <optional>
#include <vector>

#include "aqs/dense.hpp"
#include "aqs/evolve.hpp"
#include "aqs/model.hpp"
#include "aqs/mps.hpp"

namespace aqs {

enum class SpectroscopyMethod { forward_backward, ancilla };
enum class BackendKind { dense, mps };

struct SpectroscopyConfig {
  ModelParams params;
  SpectroscopyMethod method = SpectroscopyMethod::forward_backward;
  BackendKind backend = BackendKind::dense;
  RampKind ramp = RampKind::linear;
  double dt = 1.0 / 16.0;
  int trotter_substeps = 2;  // MPS backend only
  int max_bond = 64;         // MPS backend only
  double backward_factor = 4.0;   // forward_backward: T_B = max(factor*T, floor)
  double backward_floor = 20.0;
  double slow_window = 0.1;    // half-width of the slow segment around a detected gap
  double slow_fraction = 0.6;  // share of the evolution time spent inside that segment
};

struct SearchParams {
  double t_lo = 0.0;  // <= 0: start from a single dt step
  double t_hi = 8.0;
  double time_tol = 0.25;
  double overlap_tol = 0.005;
  int max_doublings = 12;
  int max_bisect = 60;
};

struct RequiredTime {
  double time = 0.0;
  double overlap_achieved = 0.0;
  int iters = 0;  // overlap evaluations spent
  bool bracket_failed = false;
  bool multi_crossing = false;
};

// Evaluates preparation overlaps at (s, T) and searches the evolution time
// reaching a target overlap. Ground states for the ancilla readout are cached
// per grid point; a slow segment around a detected gap can be switched on to
// reshape all later evolutions.
class Spectrometer {
 public:
  explicit Spectrometer(const SpectroscopyConfig& cfg);

  double overlap_at(double s, double time) const;
  RequiredTime required_time(double s_target, double o_target,
                             const SearchParams& search = {}) const;

  void set_slow_center(double s_star);  // negative disables
  double slow_center() const { return slow_center_; }

 private:
  struct Leg {
    double s0, s1, time;
  };
  std::vector<Leg> forward_legs(double s_end, double total_time) const;
  const Eigen::VectorXcd& ground_dense(double s) const;
  const Mps& ground_mps(double s) const;
  HamiltonianTerms terms_at(double s) const;

  SpectroscopyConfig cfg_;
  HamiltonianTerms h0_, ht_;
  Schedule proto_;  // carries ramp/dt/substeps for evolve_chunk calls
  std::optional<DensePath> path_;
  DenseState psi0_dense_;
  Mps psi0_mps_;
  double slow_center_ = -1.0;
  mutable std::map<long long, Eigen::VectorXcd> gs_dense_;
  mutable std::map<long long, Mps> gs_mps_;
};

struct SpectroscopyCurve {
  std::vector<double> grid;   // strictly increasing, in (0, 1]
  std::vector<double> times;  // positive
  double target_overlap = 0.0;
  SpectroscopyMethod method = SpectroscopyMethod::forward_backward;
  std::vector<double> spline_derivative;  // dT/ds at grid points (4+ points)
  std::vector<RequiredTime> details;
  int slow_from = -1;          // first grid index evolved with the slowed schedule
  double slow_center = -1.0;
};

void validate_curve(const SpectroscopyCurve& curve);

SpectroscopyCurve run_spectroscopy(const SpectroscopyConfig& cfg, const std::vector<double>& grid,
                                   double o_target, bool reuse_gap_info = false,
                                   const SearchParams& search = {});

// natural cubic spline through (xs, ys), evaluated at x
struct SplinePoint {
  double value, deriv;
};
SplinePoint spline_at(const std::vector<double>& xs, const std::vector<double>& ys, double x);

struct GapEstimate {
  std::vector<double> s;            // dense resample across the grid span
  std::vector<double> minus_dt_ds;  // -dT/ds clipped to <= 0
  double s_star = 0.0;              // deepest dip: gap-position estimate
};

GapEstimate gap_profile_estimate(const SpectroscopyCurve& curve);

// leading-order sweep-induced excitation probability for a two-level crossing
// with coupling g and ramp rate delta_rate at time t from the crossing
double lz_transition_probability(double delta_rate, double g, double t);

}  // namespace aqs
