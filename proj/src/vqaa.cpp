#include "aqs/vqaa.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>

#include "aqs/overlap.hpp"

namespace aqs {

namespace {

constexpr double kLengthSettleTol = 1e-3;

long long grid_key(double s) { return std::llround(s * 1e12); }

Eigen::Vector2cd minus_local() {
  Eigen::Vector2cd v;
  v << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  return v;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void check_chunk_geometry(int L, double min_len) {
  if (L < 1) throw std::invalid_argument("vqaa: need at least one chunk");
  if (!(min_len >= 0.0) || min_len * L >= 1.0)
    throw std::invalid_argument("vqaa: min_len incompatible with chunk count");
}

// Shared dense engine: path, start state, per-s ground-state cache.
struct DenseEngine {
  DenseEngine(const ModelParams& params, double dt, int substeps) {
    validate_params(params);
    if (params.num_sites > 14) throw std::invalid_argument("vqaa: dense engine capped at 14 sites");
    if (!(dt > 0.0) || substeps < 1) throw std::invalid_argument("vqaa: bad evolution settings");
    auto built = build_zzxz(params);
    h0 = built.first;
    ht = built.second;
    path.emplace(h0, ht);
    psi0 = dense_product_state(
        std::vector<Eigen::Vector2cd>(params.num_sites, minus_local()));
    proto.dt = dt;
    proto.trotter_substeps = substeps;
  }

  HamiltonianTerms terms_at(double s) const { return interpolate(h0, ht, s); }

  const Eigen::VectorXcd& ground(double s) const {
    auto it = gs.find(grid_key(s));
    if (it == gs.end()) {
      auto pairs = exact_spectrum(terms_at(s), 1);
      it = gs.emplace(grid_key(s), std::move(pairs[0].vector)).first;
    }
    return it->second;
  }

  double ground_overlap(const DenseState& psi, double s) const {
    DenseState g;
    g.n = psi.n;
    g.amp = ground(s);
    return std::abs(dense_overlap(g, psi));
  }

  const EigenSystem& spectrum(double s) const {
    auto it = spectra.find(grid_key(s));
    if (it == spectra.end()) it = spectra.emplace(grid_key(s), full_spectrum(terms_at(s))).first;
    return it->second;
  }

  HamiltonianTerms h0, ht;
  std::optional<DensePath> path;
  DenseState psi0;
  Schedule proto;  // ramp/dt/substeps carrier for evolve_chunk
  mutable std::map<long long, Eigen::VectorXcd> gs;
  mutable std::map<long long, EigenSystem> spectra;
};

// Optimizers re-evaluate the objective hundreds of times with an unchanged
// model; keep the most recent engine (and its cached spectra) alive between
// plain blackbox_objective calls.
DenseEngine& cached_engine(const ModelParams& p, double dt, int substeps) {
  struct Key {
    int n;
    double J, h, g, dt;
    int substeps;
    bool operator==(const Key&) const = default;
  };
  static thread_local std::optional<Key> held;
  static thread_local std::optional<DenseEngine> engine;
  const Key want{p.num_sites, p.coupling_J, p.field_h, p.field_g, dt, substeps};
  if (!engine || !(held == want)) {
    engine.emplace(p, dt, substeps);
    held = want;
  }
  return *engine;
}

}  // namespace

std::vector<double> project_simplex(std::vector<double> x, double min_len) {
  const int n = static_cast<int>(x.size());
  check_chunk_geometry(n, min_len);
  const double budget = 1.0 - n * min_len;
  std::vector<double> z(n);
  for (int i = 0; i < n; ++i) z[i] = x[i] - min_len;
  std::vector<double> sorted = z;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  for (int k = 0; k < n; ++k) {
    cum += sorted[k];
    const double t = (cum - budget) / (k + 1);
    if (sorted[k] - t > 0.0) theta = t;
  }
  for (int i = 0; i < n; ++i) x[i] = min_len + std::max(0.0, z[i] - theta);
  return x;
}

std::vector<double> ratio_rebalance_step(const std::vector<double>& overlaps,
                                         const std::vector<double>& lengths, double step,
                                         double min_len, bool* zero_overlap) {
  const int L = static_cast<int>(lengths.size());
  if (overlaps.size() != lengths.size() || L < 1)
    throw std::invalid_argument("ratio_rebalance_step: size mismatch");
  check_chunk_geometry(L, min_len);
  if (!(step > 0.0)) throw std::invalid_argument("ratio_rebalance_step: step must be positive");
  double sum = 0.0;
  for (double l : lengths) {
    if (!(l >= 0.0)) throw std::invalid_argument("ratio_rebalance_step: negative length");
    sum += l;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw std::invalid_argument("ratio_rebalance_step: lengths must sum to one");
  for (double o : overlaps)
    if (o < 0.0 || o > 1.0 + 1e-9)
      throw std::invalid_argument("ratio_rebalance_step: overlap outside [0, 1]");

  // R_i = O_i / O_{i-1}, O_0 = 1. Dead chunks (zero overlap) pin at the floor;
  // ratios with a dead denominator drop out of the mean and leave their chunk
  // untouched.
  std::vector<double> ratio(L, -1.0);
  double prev = 1.0, rbar = 0.0;
  int defined = 0;
  for (int i = 0; i < L; ++i) {
    if (overlaps[i] > 0.0 && prev > 0.0) {
      ratio[i] = overlaps[i] / prev;
      rbar += ratio[i];
      ++defined;
    }
    prev = overlaps[i];
  }
  std::vector<double> out = lengths;
  bool dead = false;
  if (defined > 0) {
    rbar /= defined;
    for (int i = 0; i < L; ++i)
      if (ratio[i] >= 0.0) out[i] = lengths[i] * (1.0 + step * (ratio[i] - rbar) / rbar);
  }
  for (int i = 0; i < L; ++i) {
    if (overlaps[i] <= 0.0) {
      out[i] = min_len;
      dead = true;
    }
    out[i] = std::max(out[i], min_len);
  }
  if (zero_overlap) *zero_overlap = dead;

  // Renormalize the mass above the floor so floors survive exactly.
  double excess = 0.0;
  for (double l : out) excess += l - min_len;
  const double target = 1.0 - L * min_len;
  if (excess <= 1e-15) return std::vector<double>(L, 1.0 / L);
  for (double& l : out) l = min_len + (l - min_len) * (target / excess);
  return out;
}

OptimizationTrace run_ratio_vqaa(const RatioVqaaConfig& cfg) {
  const int L = cfg.num_chunks;
  if (L < 2) throw std::invalid_argument("run_ratio_vqaa: need at least two chunks");
  check_chunk_geometry(L, cfg.min_len);
  if (!(cfg.total_time > 0.0)) throw std::invalid_argument("run_ratio_vqaa: bad total time");
  if (cfg.max_iters < 1) throw std::invalid_argument("run_ratio_vqaa: need at least one iteration");
  if (!(cfg.step > 0.0)) throw std::invalid_argument("run_ratio_vqaa: step must be positive");
  if (!(cfg.backward_factor > 0.0) || !(cfg.backward_floor > 0.0))
    throw std::invalid_argument("run_ratio_vqaa: backward times must be positive");
  DenseEngine eng(cfg.params, cfg.dt, cfg.trotter_substeps);
  const double t_chunk = cfg.total_time / L;

  OptimizationTrace trace;
  trace.objective_kind = ObjectiveKind::ratio_smoothness;
  long evals = 0;

  auto measure = [&](const std::vector<double>& lengths) {
    std::vector<double> overlaps(L);
    DenseState psi = eng.psi0;
    double s = 0.0, elapsed = 0.0;
    for (int i = 0; i < L; ++i) {
      const double s_next = (i + 1 == L) ? 1.0 : s + lengths[i];
      evolve_chunk(psi, *eng.path, s, s_next, t_chunk, eng.proto);
      elapsed += t_chunk;
      if (cfg.mode == RatioMode::forward_only) {
        overlaps[i] = eng.ground_overlap(psi, s_next);
      } else {
        DenseState echo = psi;
        const double t_back = std::max(cfg.backward_factor * elapsed, cfg.backward_floor);
        evolve_chunk(echo, *eng.path, s_next, 0.0, t_back, eng.proto);
        overlaps[i] = std::abs(dense_overlap(eng.psi0, echo));
      }
      s = s_next;
    }
    evals += L;
    return overlaps;
  };

  // Objective: negative spread of the consecutive ratios (0 = perfectly
  // smooth decrease), so the usual best-so-far bookkeeping applies.
  auto smoothness = [&](const std::vector<double>& overlaps) {
    double prev = 1.0, rbar = 0.0;
    int defined = 0;
    std::vector<double> ratio;
    for (double o : overlaps) {
      if (o > 0.0 && prev > 0.0) {
        ratio.push_back(o / prev);
        rbar += ratio.back();
        ++defined;
      }
      prev = o;
    }
    if (defined == 0) return -std::numeric_limits<double>::infinity();
    rbar /= defined;
    double spread = 0.0;
    for (double r : ratio) spread = std::max(spread, std::abs(r - rbar) / rbar);
    return -spread;
  };

  std::vector<double> lengths(L, 1.0 / L);
  const std::vector<double> times(L, t_chunk);
  double step = cfg.step;

  auto record = [&](const std::vector<double>& len, double obj) {
    trace.iterations.push_back({len, times, obj, evals, 0});
    if (trace.iterations.size() == 1 || obj > trace.best_objective) {
      trace.best_objective = obj;
      trace.best.chunk_lengths = len;
      trace.best.chunk_times = times;
      trace.best.dt = cfg.dt;
      trace.best.trotter_substeps = cfg.trotter_substeps;
    }
  };

  auto overlaps = measure(lengths);
  double obj = smoothness(overlaps);
  record(lengths, obj);

  for (int iter = 1; iter < cfg.max_iters; ++iter) {
    bool dead = false;
    auto proposal = ratio_rebalance_step(overlaps, lengths, step, cfg.min_len, &dead);
    if (dead) trace.degraded = true;
    double change = 0.0;
    for (int i = 0; i < L; ++i) change = std::max(change, std::abs(proposal[i] - lengths[i]));
    if (change < kLengthSettleTol) break;
    auto o_new = measure(proposal);
    const double obj_new = smoothness(o_new);
    record(proposal, obj_new);
    if (obj_new < obj) {
      step *= 0.5;  // damp on regression, keep the incumbent lengths
      if (step < 1e-3) break;
    } else {
      lengths = proposal;
      overlaps = o_new;
      obj = obj_new;
    }
  }
  return trace;
}

double blackbox_objective(const std::vector<double>& lengths, const BlackboxConfig& cfg) {
  if (static_cast<int>(lengths.size()) != cfg.num_chunks)
    throw std::invalid_argument("blackbox_objective: lengths size != num_chunks");
  if (!(cfg.total_time > 0.0)) throw std::invalid_argument("blackbox_objective: bad total time");
  for (double l : lengths)
    if (!(l >= 0.0)) throw std::invalid_argument("blackbox_objective: negative length");
  DenseEngine& eng = cached_engine(cfg.params, cfg.dt, cfg.trotter_substeps);
  const auto x = project_simplex(lengths, cfg.min_len);
  const double t_chunk = cfg.total_time / cfg.num_chunks;

  DenseState psi = eng.psi0;
  double s = 0.0;
  for (int i = 0; i < cfg.num_chunks; ++i) {
    const double s_next = (i + 1 == cfg.num_chunks) ? 1.0 : s + x[i];
    evolve_chunk(psi, *eng.path, s, s_next, t_chunk, eng.proto);
    s = s_next;
  }
  if (cfg.mode == ObjectiveMode::oracle) return eng.ground_overlap(psi, 1.0);

  if (cfg.tau_draws < 1 || cfg.shots < 0 || cfg.k_max < 1 || !(cfg.delta_estimate > 0.0))
    throw std::invalid_argument("blackbox_objective: bad certification settings");
  // Shot noise frozen per lengths vector: the same point always reads the
  // same value, so derivative-free optimizers see a deterministic landscape.
  std::uint64_t fold = cfg.seed;
  for (double v : x) {
    std::uint64_t bits = static_cast<std::uint64_t>(std::llround(v * 1e12));
    fold ^= splitmix64(bits) + 0x9e3779b97f4a7c15ULL + (fold << 6) + (fold >> 2);
  }
  std::mt19937_64 rng(fold);
  const EigenSystem& es = eng.spectrum(1.0);
  SpectralWeights w;
  w.energies = es.values;
  w.weights = (es.vectors.adjoint() * psi.amp).cwiseAbs2();
  double e2_sum = 0.0;
  for (int j = 0; j < cfg.tau_draws; ++j) {
    const double tau = sample_tau(cfg.delta_estimate, cfg.k_max, rng);
    const double a2 = std::norm(alpha_from_weights(w, tau));
    double p = bell_expectation(a2);
    if (cfg.shots > 0) p = measure_overlap(p, cfg.shots, rng).value;
    e2_sum += 1.0 - 4.0 * p;
  }
  const double e2 = std::clamp(e2_sum / cfg.tau_draws, 0.0, 1.0);
  return ground_population_bound(e2);
}

OptimResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                        const std::vector<double>& x0, const NelderMeadConfig& cfg) {
  const int n = static_cast<int>(x0.size());
  check_chunk_geometry(n, cfg.min_len);
  if (cfg.max_evals < n + 2 || !(cfg.simplex_scale > 0.0) || !(cfg.xtol > 0.0) ||
      !(cfg.ftol > 0.0))
    throw std::invalid_argument("nelder_mead: bad settings");

  OptimResult res;
  auto eval = [&](const std::vector<double>& x) {
    const double v = f(x);
    ++res.evals;
    res.history.emplace_back(x, v);
    if (res.evals == 1 || v < res.value) {
      res.value = v;
      res.x = x;
    }
    return v;
  };

  std::vector<std::vector<double>> pts;
  pts.push_back(project_simplex(x0, cfg.min_len));
  for (int i = 0; i < n; ++i) {
    auto p = x0;
    p[i] += cfg.simplex_scale;
    p = project_simplex(p, cfg.min_len);
    if (p == pts[0]) {  // projection collapsed the vertex: push the other way
      p = x0;
      p[i] = std::max(p[i] - cfg.simplex_scale, cfg.min_len);
      p = project_simplex(p, cfg.min_len);
    }
    pts.push_back(p);
  }
  std::vector<double> vals;
  for (const auto& p : pts) vals.push_back(eval(p));

  auto order = [&]() {
    std::vector<int> idx(pts.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    std::vector<std::vector<double>> p2;
    std::vector<double> v2;
    for (int i : idx) {
      p2.push_back(pts[i]);
      v2.push_back(vals[i]);
    }
    pts.swap(p2);
    vals.swap(v2);
  };

  while (true) {
    order();
    double fspread = vals.back() - vals.front();
    double xspread = 0.0;
    for (std::size_t j = 1; j < pts.size(); ++j)
      for (int i = 0; i < n; ++i) xspread = std::max(xspread, std::abs(pts[j][i] - pts[0][i]));
    if (fspread < cfg.ftol || xspread < cfg.xtol) return res;
    if (res.evals + 2 > cfg.max_evals) {
      res.exhausted = true;
      return res;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t j = 0; j + 1 < pts.size(); ++j)
      for (int i = 0; i < n; ++i) centroid[i] += pts[j][i] / n;
    auto blend = [&](const std::vector<double>& a, double w) {
      std::vector<double> p(n);
      for (int i = 0; i < n; ++i) p[i] = centroid[i] + w * (centroid[i] - a[i]);
      return project_simplex(p, cfg.min_len);
    };

    auto xr = blend(pts.back(), 1.0);  // reflect
    const double fr = eval(xr);
    if (fr < vals.front()) {
      auto xe = blend(pts.back(), 2.0);  // expand
      const double fe = eval(xe);
      if (fe < fr) {
        pts.back() = xe;
        vals.back() = fe;
      } else {
        pts.back() = xr;
        vals.back() = fr;
      }
      continue;
    }
    if (fr < vals[vals.size() - 2]) {
      pts.back() = xr;
      vals.back() = fr;
      continue;
    }
    auto xc = blend(pts.back(), -0.5);  // contract
    const double fc = eval(xc);
    if (fc < vals.back()) {
      pts.back() = xc;
      vals.back() = fc;
      continue;
    }
    for (std::size_t j = 1; j < pts.size(); ++j) {  // shrink toward the best
      if (res.evals >= cfg.max_evals) {
        res.exhausted = true;
        return res;
      }
      for (int i = 0; i < n; ++i) pts[j][i] = pts[0][i] + 0.5 * (pts[j][i] - pts[0][i]);
      pts[j] = project_simplex(pts[j], cfg.min_len);
      vals[j] = eval(pts[j]);
    }
  }
}

OptimResult bounded_quasi_newton(const std::function<double(const std::vector<double>&)>& f,
                                 const std::vector<double>& x0, const std::vector<double>& lower,
                                 const std::vector<double>& upper, const QuasiNewtonConfig& cfg) {
  const int n = static_cast<int>(x0.size());
  if (n < 1 || lower.size() != x0.size() || upper.size() != x0.size())
    throw std::invalid_argument("bounded_quasi_newton: bad bounds");
  for (int i = 0; i < n; ++i)
    if (!(lower[i] <= upper[i])) throw std::invalid_argument("bounded_quasi_newton: empty box");
  if (cfg.max_iters < 1 || cfg.memory < 1 || !(cfg.min_rel_step > 0.0))
    throw std::invalid_argument("bounded_quasi_newton: bad settings");

  OptimResult res;
  auto clampx = [&](std::vector<double> x) {
    for (int i = 0; i < n; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
    return x;
  };
  auto eval = [&](const std::vector<double>& x) {
    const double v = f(x);
    ++res.evals;
    res.history.emplace_back(x, v);
    if (res.evals == 1 || v < res.value) {
      res.value = v;
      res.x = x;
    }
    return v;
  };

  std::vector<double> x = clampx(x0);
  double fx = eval(x);
  std::deque<std::pair<std::vector<double>, std::vector<double>>> pairs;  // (s, y)
  std::vector<double> prev_x, prev_g;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    // Forward differences, flipped at the upper face so probes stay feasible.
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) {
      const double h = std::max(cfg.min_rel_step * std::abs(x[i]), 1e-4);
      auto xp = x;
      if (x[i] + h <= upper[i]) {
        xp[i] += h;
        g[i] = (eval(xp) - fx) / h;
      } else {
        xp[i] -= h;
        g[i] = (fx - eval(xp)) / h;
      }
    }
    if (!prev_x.empty()) {
      std::vector<double> s(n), y(n);
      double sy = 0.0;
      for (int i = 0; i < n; ++i) {
        s[i] = x[i] - prev_x[i];
        y[i] = g[i] - prev_g[i];
        sy += s[i] * y[i];
      }
      if (sy > 1e-12) {
        pairs.emplace_back(std::move(s), std::move(y));
        if (static_cast<int>(pairs.size()) > cfg.memory) pairs.pop_front();
      }
    }
    prev_x = x;
    prev_g = g;

    auto active = [&](int i, double dir) {
      return (x[i] <= lower[i] + 1e-12 && dir < 0.0) || (x[i] >= upper[i] - 1e-12 && dir > 0.0);
    };
    double pgnorm = 0.0;
    for (int i = 0; i < n; ++i)
      if (!active(i, -g[i])) pgnorm = std::max(pgnorm, std::abs(g[i]));
    if (pgnorm < cfg.gtol) return res;

    // Two-loop recursion.
    std::vector<double> d = g;
    std::vector<double> alpha(pairs.size());
    for (int k = static_cast<int>(pairs.size()) - 1; k >= 0; --k) {
      const auto& [s, y] = pairs[k];
      double sy = 0.0, sd = 0.0;
      for (int i = 0; i < n; ++i) {
        sy += s[i] * y[i];
        sd += s[i] * d[i];
      }
      alpha[k] = sd / sy;
      for (int i = 0; i < n; ++i) d[i] -= alpha[k] * y[i];
    }
    if (!pairs.empty()) {
      const auto& [s, y] = pairs.back();
      double sy = 0.0, yy = 0.0;
      for (int i = 0; i < n; ++i) {
        sy += s[i] * y[i];
        yy += y[i] * y[i];
      }
      for (double& v : d) v *= sy / yy;
    }
    for (int k = 0; k < static_cast<int>(pairs.size()); ++k) {
      const auto& [s, y] = pairs[k];
      double sy = 0.0, yd = 0.0;
      for (int i = 0; i < n; ++i) {
        sy += s[i] * y[i];
        yd += y[i] * d[i];
      }
      const double beta = yd / sy;
      for (int i = 0; i < n; ++i) d[i] += (alpha[k] - beta) * s[i];
    }
    for (double& v : d) v = -v;

    double dg = 0.0;
    for (int i = 0; i < n; ++i) dg += d[i] * g[i];
    if (dg >= 0.0) {  // not a descent direction: fall back to steepest
      for (int i = 0; i < n; ++i) d[i] = -g[i];
      dg = 0.0;
      for (int i = 0; i < n; ++i) dg += d[i] * g[i];
    }

    // Projected backtracking line search (Armijo on the projected step).
    double step = 1.0;
    bool moved = false;
    for (int trial = 0; trial < 25; ++trial) {
      auto xt = x;
      for (int i = 0; i < n; ++i) xt[i] += step * d[i];
      xt = clampx(xt);
      double gs = 0.0;
      for (int i = 0; i < n; ++i) gs += g[i] * (xt[i] - x[i]);
      const double ft = eval(xt);
      if (ft <= fx + 1e-4 * gs && ft < fx) {
        x = xt;
        fx = ft;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      res.exhausted = true;  // line search stalled; best-so-far stands
      return res;
    }
  }
  res.exhausted = true;  // iteration budget
  return res;
}

OptimResult cobyla_like(const std::function<double(const std::vector<double>&)>& f,
                        const std::vector<double>& x0, const CobylaConfig& cfg) {
  const int n = static_cast<int>(x0.size());
  check_chunk_geometry(n, cfg.min_len);
  if (!(cfg.rho_begin > cfg.rho_end) || !(cfg.rho_end > 0.0) || cfg.max_evals < 2 * n + 2)
    throw std::invalid_argument("cobyla_like: bad settings");

  OptimResult res;
  auto eval = [&](const std::vector<double>& x) {
    const double v = f(x);
    ++res.evals;
    res.history.emplace_back(x, v);
    if (res.evals == 1 || v < res.value) {
      res.value = v;
      res.x = x;
    }
    return v;
  };

  double rho = cfg.rho_begin;
  std::vector<double> best = project_simplex(x0, cfg.min_len);
  double fbest = eval(best);

  // Working set: best point plus n probes at scale rho, refreshed whenever the
  // radius shrinks. The linear model comes from a least-squares fit.
  while (rho >= cfg.rho_end) {
    std::vector<std::vector<double>> pts;
    std::vector<double> vals;
    for (int i = 0; i < n && res.evals < cfg.max_evals; ++i) {
      auto p = best;
      p[i] += rho;
      p = project_simplex(p, cfg.min_len);
      if (p == best) {
        p = best;
        p[i] = std::max(p[i] - rho, cfg.min_len);
        p = project_simplex(p, cfg.min_len);
      }
      pts.push_back(p);
      vals.push_back(eval(p));
    }
    if (res.evals >= cfg.max_evals) {
      res.exhausted = true;
      return res;
    }

    bool improved = true;
    while (improved && res.evals < cfg.max_evals) {
      improved = false;
      Eigen::MatrixXd A(pts.size(), n);
      Eigen::VectorXd b(pts.size());
      for (std::size_t j = 0; j < pts.size(); ++j) {
        for (int i = 0; i < n; ++i) A(j, i) = pts[j][i] - best[i];
        b(j) = vals[j] - fbest;
      }
      Eigen::VectorXd grad = A.colPivHouseholderQr().solve(b);
      const double gnorm = grad.norm();
      if (gnorm < 1e-14) break;
      auto cand = best;
      for (int i = 0; i < n; ++i) cand[i] -= rho * grad(i) / gnorm;
      cand = project_simplex(cand, cfg.min_len);
      if (cand == best) break;
      const double fc = eval(cand);
      if (fc < fbest) {
        pts.push_back(best);
        vals.push_back(fbest);
        best = cand;
        fbest = fc;
        improved = true;
        while (pts.size() > static_cast<std::size_t>(2 * n)) {
          std::size_t worst = 0;
          for (std::size_t j = 1; j < pts.size(); ++j)
            if (vals[j] > vals[worst]) worst = j;
          pts.erase(pts.begin() + worst);
          vals.erase(vals.begin() + worst);
        }
      }
    }
    rho *= 0.5;
  }
  return res;
}

OptimizationTrace run_blackbox_vqaa(const BlackboxRunConfig& cfg) {
  const int L = cfg.objective.num_chunks;
  check_chunk_geometry(L, cfg.objective.min_len);
  if (cfg.eval_budget < L + 1)
    throw std::invalid_argument("run_blackbox_vqaa: eval budget below L + 1");

  OptimizationTrace trace;
  trace.objective_kind = ObjectiveKind::final_overlap;
  const double t_chunk = cfg.objective.total_time / L;
  const std::vector<double> times(L, t_chunk);
  long evals = 0;
  const long shots_per_eval = cfg.objective.mode == ObjectiveMode::certified_bound
                                  ? static_cast<long>(cfg.objective.tau_draws) *
                                        std::max(cfg.objective.shots, 0)
                                  : 0;

  auto score = [&](const std::vector<double>& raw) {
    const auto x = project_simplex(raw, cfg.objective.min_len);
    const double o = blackbox_objective(x, cfg.objective);
    ++evals;
    trace.iterations.push_back({x, times, o, evals, evals * shots_per_eval});
    if (evals == 1 || o > trace.best_objective) {
      trace.best_objective = o;
      trace.best.chunk_lengths = x;
      trace.best.chunk_times = times;
      trace.best.dt = cfg.objective.dt;
      trace.best.trotter_substeps = cfg.objective.trotter_substeps;
    }
    return o;
  };

  const std::vector<double> naive(L, 1.0 / L);
  score(naive);  // incumbent: the optimizer must beat this to matter

  std::vector<double> x0 = naive;
  if (cfg.init == InitKind::warm_start) {
    RatioVqaaConfig warm;
    warm.params = cfg.objective.params;
    warm.num_chunks = L;
    warm.total_time = cfg.objective.total_time;
    warm.mode = RatioMode::forward_only;
    warm.max_iters = 8;
    warm.min_len = cfg.objective.min_len;
    warm.dt = cfg.objective.dt;
    warm.trotter_substeps = cfg.objective.trotter_substeps;
    x0 = run_ratio_vqaa(warm).best.chunk_lengths;
  }

  auto neg = [&](const std::vector<double>& x) { return -score(x); };
  const int budget = cfg.eval_budget - static_cast<int>(evals);
  bool exhausted = false;
  if (cfg.optimizer == OptimizerKind::nelder_mead) {
    NelderMeadConfig nm;
    nm.max_evals = budget;
    nm.min_len = cfg.objective.min_len;
    exhausted = nelder_mead(neg, x0, nm).exhausted;
  } else if (cfg.optimizer == OptimizerKind::cobyla_like) {
    CobylaConfig co;
    co.max_evals = budget;
    co.min_len = cfg.objective.min_len;
    exhausted = cobyla_like(neg, x0, co).exhausted;
  } else {
    // Box-bounded route: optimize L-1 free lengths, the last is the remainder.
    const double lo = cfg.objective.min_len;
    const double hi = 1.0 - (L - 1) * cfg.objective.min_len;
    auto reduced = [&](const std::vector<double>& y) {
      std::vector<double> full(y.begin(), y.end());
      double sum = 0.0;
      for (double v : y) sum += v;
      full.push_back(1.0 - sum);
      return -score(full);
    };
    if (L == 1) {
      score(naive);
    } else {
      QuasiNewtonConfig qn;
      qn.max_iters = std::max(1, budget / L);
      std::vector<double> y0(x0.begin(), x0.end() - 1);
      exhausted = bounded_quasi_newton(reduced, y0, std::vector<double>(L - 1, lo),
                                       std::vector<double>(L - 1, hi), qn)
                      .exhausted;
    }
  }
  trace.degraded = exhausted;
  return trace;
}

OptimizationTrace run_profile_vqaa(const ProfileVqaaConfig& cfg) {
  const int L = cfg.num_chunks;
  if (L < 1) throw std::invalid_argument("run_profile_vqaa: need at least one chunk");
  if (!(cfg.theta0 > 0.0) || !(cfg.theta0 <= cfg.thetaL) || !(cfg.thetaL < 1.0))
    throw std::invalid_argument("run_profile_vqaa: thresholds must satisfy 0 < theta0 <= thetaL < 1");
  if (!(cfg.time_cap > 0.0) || !(cfg.time_tol > 0.0))
    throw std::invalid_argument("run_profile_vqaa: bad time settings");
  if (!(cfg.delta_estimate > 0.0) || cfg.k_max < 1)
    throw std::invalid_argument("run_profile_vqaa: bad tau sampling settings");
  DenseEngine eng(cfg.params, cfg.dt, cfg.trotter_substeps);

  // theta is an amplitude target: |<GS|psi>| >= theta means ground population
  // >= theta^2, which the E^2 route certifies once E^2 >= (1 + (2 theta^2 -
  // 1)^2) / 2 (population bound = 1/2 + sqrt(2 E^2 - 1)/2). Targets below
  // 1/sqrt(2) fall back to the weakest certifiable statement, population >=
  // 1/2, since the bound never resolves smaller populations. The Bell coin
  // then succeeds with probability (3 + E^2) / 4. Validate the tightest test
  // geometry up front.
  auto bell_h0 = [](double theta) {
    const double m = std::max(2.0 * theta * theta - 1.0, 0.0);
    return (3.0 + 0.5 * (1.0 + m * m)) / 4.0;
  };
  // The Bell coin concentrates near 1 at high targets, so a fixed diffuse
  // prior would leave less than the threshold's mass above h0 + eps and the
  // test would reject before seeing data; conversely, matching the prior by
  // scaling its total strength leaves a sub-1 failure pseudo-count that
  // accepts on short lucky streaks. Anchor on cfg.prior's failure count and
  // center each chunk's prior on its own hypothesis.
  const double caution = cfg.prior.b;
  if (!(caution > 0.0))
    throw std::invalid_argument("run_profile_vqaa: prior failure pseudo-count must be positive");
  auto matched_prior = [&](double h0) {
    return BetaPosterior{caution * h0 / (1.0 - h0), caution};
  };
  alpha_errors(matched_prior(bell_h0(cfg.thetaL)), bell_h0(cfg.thetaL),
               cfg.eps);  // throws on bad geometry

  OptimizationTrace trace;
  trace.objective_kind = ObjectiveKind::profile_follow;
  std::mt19937_64 rng(cfg.seed);
  long evals = 0, meas = 0;

  const std::vector<double> lengths(L, 1.0 / L);
  std::vector<double> chosen;
  DenseState psi = eng.psi0;
  double last_bound = 0.0;

  // The chunk ends revisit the same handful of s values; the engine keeps one
  // eigendecomposition per grid point instead of rebuilding it per attempt.
  auto certify = [&](const DenseState& state, double s_i, double theta) {
    const EigenSystem& es = eng.spectrum(s_i);
    SpectralWeights w;
    w.energies = es.values;
    w.weights = (es.vectors.adjoint() * state.amp).cwiseAbs2();
    auto coin = [&]() {
      const double tau = sample_tau(cfg.delta_estimate, cfg.k_max, rng);
      const double a2 = std::norm(alpha_from_weights(w, tau));
      return std::bernoulli_distribution(0.75 + 0.25 * a2)(rng);
    };
    const double h0 = bell_h0(theta);
    const auto res = decide(coin, h0, cfg.eps, cfg.threshold, cfg.max_samples,
                            matched_prior(h0));
    ++evals;
    meas += res.samples_used;
    const double e2_post = std::clamp(4.0 * beta_mean(res.posterior) - 3.0, 0.0, 1.0);
    last_bound = std::sqrt(ground_population_bound(e2_post));  // amplitude scale
    return res.decision == Decision::accept;
  };

  for (int i = 1; i <= L; ++i) {
    const double s_prev = static_cast<double>(i - 1) / L;
    const double s_i = (i == L) ? 1.0 : static_cast<double>(i) / L;
    const double theta =
        (L == 1) ? cfg.thetaL : cfg.theta0 + (cfg.thetaL - cfg.theta0) * (i - 1) / (L - 1);

    auto attempt = [&](double t) {
      DenseState next = psi;
      evolve_chunk(next, *eng.path, s_prev, s_i, t, eng.proto);
      return std::make_pair(certify(next, s_i, theta), std::move(next));
    };

    // Doubling until cleared or capped, then bisection keeping a cleared top.
    double t_lo = 0.0, t_hi = cfg.dt;
    bool pinned = false;
    auto [ok, state] = attempt(t_hi);
    while (!ok && t_hi < cfg.time_cap) {
      t_lo = t_hi;
      t_hi = std::min(2.0 * t_hi, cfg.time_cap);
      std::tie(ok, state) = attempt(t_hi);
    }
    if (!ok) {
      pinned = true;  // never cleared: pin at the cap, continue degraded
      trace.degraded = true;
    } else {
      while (t_hi - t_lo > cfg.time_tol) {
        const double mid = 0.5 * (t_lo + t_hi);
        auto [mid_ok, mid_state] = attempt(mid);
        if (mid_ok) {
          t_hi = mid;
          state = std::move(mid_state);
        } else {
          t_lo = mid;
        }
      }
    }
    psi = std::move(state);
    chosen.push_back(t_hi);
    trace.iterations.push_back({lengths, chosen, pinned ? last_bound : theta, evals, meas});
  }

  trace.best.chunk_lengths = lengths;
  trace.best.chunk_times = chosen;
  trace.best.dt = cfg.dt;
  trace.best.trotter_substeps = cfg.trotter_substeps;
  trace.best_objective = trace.iterations.back().objective;
  return trace;
}

}  // namespace aqs
