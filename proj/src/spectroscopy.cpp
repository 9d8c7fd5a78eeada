#include "aqs/spectroscopy.hpp"

#include <gsl/gsl_interp.h>
#include <gsl/gsl_spline.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aqs/dmrg.hpp"

namespace aqs {

namespace {

long long grid_key(double s) { return std::llround(s * 1e12); }

Eigen::Vector2cd minus_local() {
  Eigen::Vector2cd v;
  v << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  return v;
}

// RAII natural cubic spline over (xs, ys)
class NaturalSpline {
 public:
  NaturalSpline(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("spline: size mismatch");
    if (xs.size() < gsl_interp_type_min_size(gsl_interp_cspline))
      throw std::invalid_argument("spline: too few points");
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
      if (!(xs[i] < xs[i + 1])) throw std::invalid_argument("spline: abscissae not increasing");
    acc_ = gsl_interp_accel_alloc();
    spline_ = gsl_spline_alloc(gsl_interp_cspline, xs.size());
    gsl_spline_init(spline_, xs.data(), ys.data(), xs.size());
  }
  ~NaturalSpline() {
    gsl_spline_free(spline_);
    gsl_interp_accel_free(acc_);
  }
  NaturalSpline(const NaturalSpline&) = delete;
  NaturalSpline& operator=(const NaturalSpline&) = delete;

  double value(double x) const { return gsl_spline_eval(spline_, x, acc_); }
  double deriv(double x) const { return gsl_spline_eval_deriv(spline_, x, acc_); }

 private:
  gsl_interp_accel* acc_ = nullptr;
  gsl_spline* spline_ = nullptr;
};

}  // namespace

Spectrometer::Spectrometer(const SpectroscopyConfig& cfg) : cfg_(cfg) {
  validate_params(cfg.params);
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("spectroscopy: dt must be positive");
  if (cfg.trotter_substeps < 1 || cfg.max_bond < 1)
    throw std::invalid_argument("spectroscopy: bad MPS settings");
  if (!(cfg.backward_factor > 0.0) || !(cfg.backward_floor > 0.0))
    throw std::invalid_argument("spectroscopy: backward times must be positive");
  if (!(cfg.slow_window > 0.0) || !(cfg.slow_fraction > 0.0) || !(cfg.slow_fraction < 1.0))
    throw std::invalid_argument("spectroscopy: bad slow-down settings");
  auto built = build_zzxz(cfg.params);
  h0_ = built.first;
  ht_ = built.second;
  proto_.ramp = cfg.ramp;
  proto_.dt = cfg.dt;
  proto_.trotter_substeps = cfg.trotter_substeps;
  const int n = cfg.params.num_sites;
  if (cfg.backend == BackendKind::dense) {
    if (n > 14) throw std::invalid_argument("spectroscopy: dense backend capped at 14 sites");
    path_.emplace(h0_, ht_);
    psi0_dense_ = dense_product_state(std::vector<Eigen::Vector2cd>(n, minus_local()));
  } else {
    psi0_mps_ = product_state(std::vector<Eigen::Vector2cd>(n, minus_local()), cfg.max_bond);
  }
}

void Spectrometer::set_slow_center(double s_star) { slow_center_ = s_star; }

HamiltonianTerms Spectrometer::terms_at(double s) const {
  return interpolate(h0_, ht_, ramp_value(cfg_.ramp, s, 0.0, 1.0));
}

const Eigen::VectorXcd& Spectrometer::ground_dense(double s) const {
  auto it = gs_dense_.find(grid_key(s));
  if (it == gs_dense_.end()) {
    auto pairs = exact_spectrum(terms_at(s), 1);
    it = gs_dense_.emplace(grid_key(s), std::move(pairs[0].vector)).first;
  }
  return it->second;
}

const Mps& Spectrometer::ground_mps(double s) const {
  auto it = gs_mps_.find(grid_key(s));
  if (it == gs_mps_.end()) {
    auto res = dmrg_ground_state(terms_at(s), cfg_.max_bond, 14, 1e-10);
    it = gs_mps_.emplace(grid_key(s), std::move(res.state)).first;
  }
  return it->second;
}

std::vector<Spectrometer::Leg> Spectrometer::forward_legs(double s_end, double total_time) const {
  if (slow_center_ >= 0.0) {
    const double a = std::clamp(slow_center_ - cfg_.slow_window, 0.0, s_end);
    const double b = std::clamp(slow_center_ + cfg_.slow_window, 0.0, s_end);
    if (b - a > 1e-12) {
      const double len_out = a + (s_end - b);
      if (len_out < 1e-12) return {{0.0, s_end, total_time}};  // window spans the whole path
      const double t_slow = cfg_.slow_fraction * total_time;
      const double t_out = total_time - t_slow;
      std::vector<Leg> legs;
      if (a > 1e-12) legs.push_back({0.0, a, t_out * a / len_out});
      legs.push_back({a, b, t_slow});
      if (s_end - b > 1e-12) legs.push_back({b, s_end, t_out * (s_end - b) / len_out});
      return legs;
    }
  }
  return {{0.0, s_end, total_time}};
}

double Spectrometer::overlap_at(double s, double time) const {
  if (!(s > 0.0) || s > 1.0 + 1e-12)
    throw std::invalid_argument("spectroscopy: s must lie in (0, 1]");
  if (!(time > 0.0)) throw std::invalid_argument("spectroscopy: time must be positive");
  s = std::min(s, 1.0);
  const auto legs = forward_legs(s, time);
  if (cfg_.backend == BackendKind::dense) {
    DenseState psi = psi0_dense_;
    for (const auto& leg : legs) evolve_chunk(psi, *path_, leg.s0, leg.s1, leg.time, proto_);
    if (cfg_.method == SpectroscopyMethod::forward_backward) {
      const double t_back = std::max(cfg_.backward_factor * time, cfg_.backward_floor);
      evolve_chunk(psi, *path_, s, 0.0, t_back, proto_);
      return std::abs(dense_overlap(psi0_dense_, psi));
    }
    DenseState gs;
    gs.n = psi.n;
    gs.amp = ground_dense(s);
    return std::abs(dense_overlap(gs, psi));
  }
  Mps psi = psi0_mps_;
  for (const auto& leg : legs) evolve_chunk(psi, h0_, ht_, leg.s0, leg.s1, leg.time, proto_);
  if (cfg_.method == SpectroscopyMethod::forward_backward) {
    const double t_back = std::max(cfg_.backward_factor * time, cfg_.backward_floor);
    evolve_chunk(psi, h0_, ht_, s, 0.0, t_back, proto_);
    return std::abs(overlap(psi0_mps_, psi));
  }
  return std::abs(overlap(ground_mps(s), psi));
}

RequiredTime Spectrometer::required_time(double s_target, double o_target,
                                         const SearchParams& search) const {
  if (!(o_target > 0.0) || !(o_target < 1.0))
    throw std::invalid_argument("required_time: target overlap must lie in (0, 1)");
  if (search.max_doublings < 0 || search.max_bisect < 1 || !(search.time_tol > 0.0) ||
      !(search.overlap_tol > 0.0))
    throw std::invalid_argument("required_time: bad search settings");

  RequiredTime out;
  std::vector<std::pair<double, double>> evals;  // (T, overlap), for crossing counting
  auto eval = [&](double t) {
    const double o = overlap_at(s_target, t);
    ++out.iters;
    evals.emplace_back(t, o);
    return o;
  };
  auto count_crossings = [&]() {
    std::sort(evals.begin(), evals.end());
    int crossings = 0;
    for (std::size_t i = 0; i + 1 < evals.size(); ++i)
      if ((evals[i].second < o_target) != (evals[i + 1].second < o_target)) ++crossings;
    return crossings;
  };

  double t_lo = search.t_lo > 0.0 ? search.t_lo : cfg_.dt;
  double o_lo = eval(t_lo);
  if (o_lo >= o_target) {
    out.time = t_lo;
    out.overlap_achieved = o_lo;
    return out;  // already there: the s -> 0 limit lands here
  }
  double best_t = t_lo, best_o = o_lo;

  double t_hi = std::max(search.t_hi, 2.0 * t_lo);
  double o_hi = eval(t_hi);
  int doublings = 0;
  while (o_hi < o_target && doublings < search.max_doublings) {
    if (o_hi > best_o) {
      best_o = o_hi;
      best_t = t_hi;
    }
    t_lo = t_hi;  // no crossing seen below: keep hunting the first one from below
    o_lo = o_hi;
    t_hi *= 2.0;
    o_hi = eval(t_hi);
    ++doublings;
  }
  if (o_hi < o_target) {
    if (o_hi > best_o) {
      best_o = o_hi;
      best_t = t_hi;
    }
    out.time = best_t;
    out.overlap_achieved = best_o;
    out.bracket_failed = true;
    out.multi_crossing = count_crossings() > 1;
    return out;
  }

  while (t_hi - t_lo > search.time_tol && out.iters < search.max_bisect) {
    const double mid = 0.5 * (t_lo + t_hi);
    const double o_mid = eval(mid);
    if (std::abs(o_mid - o_target) <= search.overlap_tol) {
      out.time = mid;
      out.overlap_achieved = o_mid;
      out.multi_crossing = count_crossings() > 1;
      return out;
    }
    if (o_mid >= o_target) {
      t_hi = mid;
      o_hi = o_mid;
    } else {
      t_lo = mid;
      o_lo = o_mid;
    }
  }
  out.time = t_hi;  // smallest bracketed time still meeting the target
  out.overlap_achieved = o_hi;
  out.multi_crossing = count_crossings() > 1;
  return out;
}

void validate_curve(const SpectroscopyCurve& curve) {
  if (curve.grid.empty() || curve.grid.size() != curve.times.size())
    throw std::invalid_argument("spectroscopy curve: grid/times size mismatch");
  if (!(curve.grid.front() > 0.0) || curve.grid.back() > 1.0 + 1e-12)
    throw std::invalid_argument("spectroscopy curve: grid must lie in (0, 1]");
  for (std::size_t i = 0; i + 1 < curve.grid.size(); ++i)
    if (!(curve.grid[i] < curve.grid[i + 1]))
      throw std::invalid_argument("spectroscopy curve: grid must be strictly increasing");
  for (double t : curve.times)
    if (!(t > 0.0)) throw std::invalid_argument("spectroscopy curve: times must be positive");
}

SpectroscopyCurve run_spectroscopy(const SpectroscopyConfig& cfg, const std::vector<double>& grid,
                                   double o_target, bool reuse_gap_info,
                                   const SearchParams& search) {
  Spectrometer spec(cfg);
  SpectroscopyCurve curve;
  curve.grid = grid;
  curve.target_overlap = o_target;
  curve.method = cfg.method;
  curve.times.reserve(grid.size());
  curve.details.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto res = spec.required_time(grid[i], o_target, search);
    curve.times.push_back(res.time);
    curve.details.push_back(res);
    if (reuse_gap_info && curve.slow_from < 0 && i >= 1 && res.time > 2.0 * curve.times[i - 1] &&
        res.time > 1.0) {
      // A sharp rise in T flags a gap crossed between the last two points:
      // evolve all later points slowly around it.
      curve.slow_center = 0.5 * (grid[i - 1] + grid[i]);
      spec.set_slow_center(curve.slow_center);
      curve.slow_from = static_cast<int>(i) + 1;
    }
  }
  validate_curve(curve);
  if (grid.size() >= 4) {
    NaturalSpline fit(curve.grid, curve.times);
    curve.spline_derivative.reserve(grid.size());
    for (double s : grid) curve.spline_derivative.push_back(fit.deriv(s));
  }
  return curve;
}

SplinePoint spline_at(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  NaturalSpline fit(xs, ys);
  return {fit.value(x), fit.deriv(x)};
}

GapEstimate gap_profile_estimate(const SpectroscopyCurve& curve) {
  validate_curve(curve);
  if (curve.grid.size() < 4)
    throw std::invalid_argument("gap_profile_estimate: need at least 4 grid points");
  NaturalSpline fit(curve.grid, curve.times);
  const int m = 401;
  const double lo = curve.grid.front(), hi = curve.grid.back();
  GapEstimate est;
  est.s.reserve(m);
  est.minus_dt_ds.reserve(m);
  int argmin = 0;
  for (int i = 0; i < m; ++i) {
    // lo + (hi - lo) can overshoot hi by an ulp, which GSL treats as a hard
    // range error; keep the sample inside the fitted interval.
    const double x = std::clamp(lo + (hi - lo) * i / (m - 1), lo, hi);
    const double v = std::min(0.0, -fit.deriv(x));
    est.s.push_back(x);
    est.minus_dt_ds.push_back(v);
    if (v < est.minus_dt_ds[argmin]) argmin = i;
  }
  est.s_star = est.s[argmin];
  return est;
}

double lz_transition_probability(double delta_rate, double g, double t) {
  if (g == 0.0) throw std::invalid_argument("lz_transition_probability: g must be nonzero");
  const double e2 = delta_rate * delta_rate * t * t + g * g;
  return delta_rate * delta_rate * g * g / (16.0 * e2 * e2 * e2);
}

}  // namespace aqs
