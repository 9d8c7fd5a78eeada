#include "aqs/dense.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aqs {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Eigen::VectorXcd deterministic_unit_vector(std::int64_t dim, std::uint64_t seed) {
  Eigen::VectorXcd v(dim);
  std::uint64_t s = seed ? seed : 1;
  for (std::int64_t i = 0; i < dim; ++i) {
    double re = (double)(splitmix64(s) >> 11) / 9007199254740992.0 - 0.5;
    double im = (double)(splitmix64(s) >> 11) / 9007199254740992.0 - 0.5;
    v[i] = cplx(re, im);
  }
  v.normalize();
  return v;
}

std::int64_t site_stride(int n, int site) { return std::int64_t(1) << (n - 1 - site); }

}  // namespace

DenseState dense_product_state(const std::vector<Eigen::Vector2cd>& local_states) {
  const int n = static_cast<int>(local_states.size());
  if (n < 1) throw std::invalid_argument("dense_product_state: empty");
  for (const auto& v : local_states)
    if (v.norm() < 1e-300) throw std::invalid_argument("dense_product_state: zero local vector");
  DenseState s;
  s.n = n;
  s.amp = Eigen::VectorXcd::Ones(1);
  for (int i = 0; i < n; ++i) {
    Eigen::Vector2cd loc = local_states[i].normalized();
    Eigen::VectorXcd next(s.amp.size() * 2);
    next.head(s.amp.size()) = loc[0] * s.amp;
    next.tail(s.amp.size()) = loc[1] * s.amp;
    s.amp.swap(next);
  }
  return s;
}

cplx dense_overlap(const DenseState& a, const DenseState& b) {
  if (a.n != b.n) throw std::invalid_argument("dense_overlap: size mismatch");
  return a.amp.dot(b.amp);  // Eigen dot conjugates the first argument
}

void dense_apply_single_site(DenseState& s, const Mat2& op, int site) {
  if (site < 0 || site >= s.n) throw std::invalid_argument("dense_apply_single_site: site");
  const std::int64_t stride = site_stride(s.n, site);
  const std::int64_t dim = s.dim();
  for (std::int64_t base = 0; base < dim; base += 2 * stride) {
    for (std::int64_t off = 0; off < stride; ++off) {
      const std::int64_t i0 = base + off, i1 = i0 + stride;
      const cplx a0 = s.amp[i0], a1 = s.amp[i1];
      s.amp[i0] = op(0, 0) * a0 + op(0, 1) * a1;
      s.amp[i1] = op(1, 0) * a0 + op(1, 1) * a1;
    }
  }
}

void dense_apply_two_site(DenseState& s, const Mat4& op, int site) {
  if (site < 0 || site + 1 >= s.n) throw std::invalid_argument("dense_apply_two_site: site");
  const std::int64_t sl = site_stride(s.n, site);
  const std::int64_t sr = site_stride(s.n, site + 1);
  const std::int64_t dim = s.dim();
  for (std::int64_t idx = 0; idx < dim; ++idx) {
    if ((idx & sl) || (idx & sr)) continue;
    const std::int64_t ix[4] = {idx, idx | sr, idx | sl, idx | sl | sr};
    cplx in[4];
    for (int q = 0; q < 4; ++q) in[q] = s.amp[ix[q]];
    for (int q = 0; q < 4; ++q) {
      cplx acc = 0;
      for (int r = 0; r < 4; ++r) acc += op(q, r) * in[r];
      s.amp[ix[q]] = acc;
    }
  }
}

cplx dense_expectation_single_site(const DenseState& s, const Mat2& op, int site) {
  DenseState t = s;
  dense_apply_single_site(t, op, site);
  return dense_overlap(s, t);
}

DenseOp::DenseOp(const HamiltonianTerms& terms) {
  validate_terms(terms);
  n_ = terms.num_sites;
  if (n_ > 30) throw std::invalid_argument("DenseOp: too many sites");
  const std::int64_t dim = this->dim();
  diag_ = Eigen::VectorXd::Zero(dim);
  for (const auto& t : terms.single_site_terms) {
    const std::int64_t stride = site_stride(n_, t.site);
    const double d0 = t.op(0, 0).real(), d1 = t.op(1, 1).real();
    for (std::int64_t idx = 0; idx < dim; ++idx) diag_[idx] += (idx & stride) ? d1 : d0;
    if (std::abs(t.op(0, 1)) + std::abs(t.op(1, 0)) > 0)
      off_singles_.push_back({t.site, t.op(0, 1), t.op(1, 0)});
    norm_bound_ += t.op.norm();
  }
  for (const auto& t : terms.two_site_terms) {
    const std::int64_t sl = site_stride(n_, t.site);
    const std::int64_t sr = site_stride(n_, t.site + 1);
    for (std::int64_t idx = 0; idx < dim; ++idx) {
      const int q = ((idx & sl) ? 2 : 0) | ((idx & sr) ? 1 : 0);
      diag_[idx] += t.op(q, q).real();
    }
    OffTwo ot;
    ot.site = t.site;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c)
        if (r != c && std::abs(t.op(r, c)) > 0) ot.entries.push_back({r, c, t.op(r, c)});
    if (!ot.entries.empty()) off_twos_.push_back(std::move(ot));
    norm_bound_ += t.op.norm();
  }
}

void DenseOp::apply_add(const Eigen::VectorXcd& x, Eigen::VectorXcd& y, double w) const {
  const std::int64_t dim = this->dim();
  for (std::int64_t i = 0; i < dim; ++i) y[i] += w * diag_[i] * x[i];
  for (const auto& os : off_singles_) {
    const std::int64_t stride = site_stride(n_, os.site);
    const cplx a01 = w * os.a01, a10 = w * os.a10;
    for (std::int64_t base = 0; base < dim; base += 2 * stride) {
      for (std::int64_t off = 0; off < stride; ++off) {
        const std::int64_t i0 = base + off, i1 = i0 + stride;
        y[i0] += a01 * x[i1];
        y[i1] += a10 * x[i0];
      }
    }
  }
  for (const auto& ot : off_twos_) {
    const std::int64_t sl = site_stride(n_, ot.site);
    const std::int64_t sr = site_stride(n_, ot.site + 1);
    for (std::int64_t idx = 0; idx < dim; ++idx) {
      if ((idx & sl) || (idx & sr)) continue;
      const std::int64_t ix[4] = {idx, idx | sr, idx | sl, idx | sl | sr};
      for (const auto& e : ot.entries) y[ix[e.r]] += w * e.v * x[ix[e.c]];
    }
  }
}

Eigen::VectorXcd DenseOp::apply(const Eigen::VectorXcd& x) const {
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(x.size());
  apply_add(x, y, 1.0);
  return y;
}

DensePath::DensePath(const HamiltonianTerms& h0, const HamiltonianTerms& ht)
    : op0_(h0), op1_(ht) {
  if (h0.num_sites != ht.num_sites) throw std::invalid_argument("DensePath: site mismatch");
}

void DensePath::apply_add(const Eigen::VectorXcd& x, Eigen::VectorXcd& y, double lam) const {
  if (lam != 0.0) op1_.apply_add(x, y, lam);
  if (lam != 1.0) op0_.apply_add(x, y, 1.0 - lam);
}

double DensePath::norm_bound() const { return std::max(op0_.norm_bound(), op1_.norm_bound()); }

namespace {

// One Lanczos run for the lowest eigenpair orthogonal to `deflate`.
EigenPair lanczos_one(const ApplyFn& apply, std::int64_t dim,
                      const std::vector<Eigen::VectorXcd>& deflate, double tol, int max_iter,
                      std::uint64_t seed) {
  const int m_cap = static_cast<int>(std::min<std::int64_t>(max_iter, dim));
  std::vector<Eigen::VectorXcd> basis;
  std::vector<double> alpha, beta;
  auto orthogonalize = [&](Eigen::VectorXcd& w) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& d : deflate) w -= d.dot(w) * d;
      for (const auto& v : basis) w -= v.dot(w) * v;
    }
  };
  Eigen::VectorXcd v = deterministic_unit_vector(dim, seed);
  orthogonalize(v);
  double nrm = v.norm();
  int tries = 0;
  while (nrm < 1e-8 && tries < 5) {  // start vector swallowed by deflation space
    v = deterministic_unit_vector(dim, seed + 977 * (++tries));
    orthogonalize(v);
    nrm = v.norm();
  }
  if (nrm < 1e-8) throw std::runtime_error("lanczos: cannot build start vector");
  v /= nrm;
  basis.push_back(v);

  Eigen::VectorXcd w(dim);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  for (int j = 0; j < m_cap; ++j) {
    w.setZero();
    apply(basis[j], w);
    double a = std::real(basis[j].dot(w));
    alpha.push_back(a);
    w -= a * basis[j];
    if (j > 0) w -= beta[j - 1] * basis[j - 1];
    orthogonalize(w);
    double b = w.norm();

    const int m = j + 1;
    if ((m >= 2 && m % 20 == 0) || b < 1e-13 || m == m_cap) {
      Eigen::Map<const Eigen::VectorXd> ad(alpha.data(), m);
      Eigen::VectorXd bd(std::max(m - 1, 0));
      for (int i = 0; i + 1 < m; ++i) bd[i] = beta[i];
      es.computeFromTridiagonal(ad, bd);  // O(m^2), not O(m^3)
      double theta = es.eigenvalues()[0];
      Eigen::VectorXd ritz_coeff = es.eigenvectors().col(0);
      double resid = b * std::abs(ritz_coeff[m - 1]);
      bool ok = b < 1e-13 || resid < tol * std::max(1.0, std::abs(theta));
      if (m == m_cap && !ok && resid > 1e-6 * std::max(1.0, std::abs(theta)))
        throw std::runtime_error("lanczos: did not converge");
      if (ok || m == m_cap) {
        Eigen::VectorXcd evec = Eigen::VectorXcd::Zero(dim);
        for (int i = 0; i < m; ++i) evec += ritz_coeff[i] * basis[i];
        evec.normalize();
        return {theta, evec};
      }
    }
    beta.push_back(b);
    basis.push_back(w / b);
  }
  throw std::runtime_error("lanczos: did not converge");
}

Eigen::MatrixXcd assemble_dense(const HamiltonianTerms& terms) {
  DenseOp op(terms);
  const std::int64_t dim = op.dim();
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim), col(dim);
  for (std::int64_t j = 0; j < dim; ++j) {
    e[j] = 1.0;
    col.setZero();
    op.apply_add(e, col, 1.0);
    H.col(j) = col;
    e[j] = 0.0;
  }
  return H;
}

}  // namespace

std::vector<EigenPair> lanczos_lowest(const ApplyFn& apply, std::int64_t dim, int k, double tol,
                                      int max_iter, std::uint64_t seed) {
  if (k < 1 || k > dim) throw std::invalid_argument("lanczos_lowest: bad k");
  std::vector<EigenPair> out;
  std::vector<Eigen::VectorXcd> deflate;
  for (int j = 0; j < k; ++j) {
    EigenPair p = lanczos_one(apply, dim, deflate, tol, max_iter, seed + 131 * j);
    deflate.push_back(p.vector);
    out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(),
            [](const EigenPair& a, const EigenPair& b) { return a.value < b.value; });
  return out;
}

std::vector<EigenPair> exact_spectrum(const HamiltonianTerms& terms, int k) {
  validate_terms(terms);
  if (terms.num_sites > 14)
    throw std::invalid_argument("exact_spectrum: num_sites > 14, use dmrg_ground_state");
  const std::int64_t dim = std::int64_t(1) << terms.num_sites;
  if (k < 1 || k > dim) throw std::invalid_argument("exact_spectrum: bad k");
  if (dim <= 256 || k > 16) {
    Eigen::MatrixXcd H = assemble_dense(terms);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    std::vector<EigenPair> out;
    out.reserve(k);
    for (int i = 0; i < k; ++i) out.push_back({es.eigenvalues()[i], es.eigenvectors().col(i)});
    return out;
  }
  DenseOp op(terms);
  ApplyFn apply = [&op](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    op.apply_add(x, y, 1.0);
  };
  return lanczos_lowest(apply, dim, k, 1e-12, 700);
}

EigenSystem full_spectrum(const HamiltonianTerms& terms) {
  validate_terms(terms);
  if (terms.num_sites > 12) throw std::invalid_argument("full_spectrum: num_sites > 12");
  Eigen::MatrixXcd H = assemble_dense(terms);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  return {es.eigenvalues(), es.eigenvectors()};
}

std::vector<GapPoint> gap_profile(const ModelParams& params, const std::vector<double>& grid) {
  auto [h0, ht] = build_zzxz(params);
  std::vector<GapPoint> out;
  out.reserve(grid.size());
  for (double s : grid) {
    auto pairs = exact_spectrum(interpolate(h0, ht, s), 2);
    double gap = pairs[1].value - pairs[0].value;
    bool degenerate = gap < 1e-10;
    out.push_back({s, degenerate ? 0.0 : gap, degenerate});
  }
  return out;
}

double reflection_parity(const Eigen::VectorXcd& v, int n) {
  if (v.size() != (std::int64_t{1} << n)) throw std::invalid_argument("reflection_parity: size");
  cplx acc = 0.0;
  for (std::int64_t idx = 0; idx < v.size(); ++idx) {
    std::int64_t rev = 0;
    for (int b = 0; b < n; ++b)
      if (idx >> b & 1) rev |= std::int64_t{1} << (n - 1 - b);
    acc += std::conj(v[rev]) * v[idx];
  }
  return acc.real();
}

std::vector<GapPoint> reachable_gap_profile(const ModelParams& params,
                                            const std::vector<double>& grid) {
  auto [h0, ht] = build_zzxz(params);
  std::vector<GapPoint> out;
  out.reserve(grid.size());
  const int n = params.num_sites;
  const int k = static_cast<int>(std::min<std::int64_t>(6, std::int64_t{1} << n));
  for (double s : grid) {
    auto pairs = exact_spectrum(interpolate(h0, ht, s), k);
    const double p0 = reflection_parity(pairs[0].vector, n);
    double gap = pairs.back().value - pairs[0].value;  // fallback if sector not found
    for (std::size_t i = 1; i < pairs.size(); ++i) {
      // Degenerate multiplets may come back in mixed combinations; accept any
      // state with a reflection-even component when the ground state is even.
      if (reflection_parity(pairs[i].vector, n) * p0 > -0.5) {
        gap = pairs[i].value - pairs[0].value;
        break;
      }
    }
    bool degenerate = gap < 1e-10;
    out.push_back({s, degenerate ? 0.0 : gap, degenerate});
  }
  return out;
}

void krylov_expm_apply(const ApplyFn& apply, double norm_bound, double t, Eigen::VectorXcd& v,
                       int max_krylov) {
  const std::int64_t dim = v.size();
  if (t == 0.0 || v.norm() == 0.0) return;
  const int nsub = std::max(1, (int)std::ceil(std::abs(t) * std::max(norm_bound, 1e-30) / 10.0));
  const double dt = t / nsub;
  const int m_cap = static_cast<int>(std::min<std::int64_t>(max_krylov, dim));
  std::vector<Eigen::VectorXcd> basis;
  std::vector<double> alpha, beta;
  Eigen::VectorXcd w(dim);
  for (int step = 0; step < nsub; ++step) {
    const double nrm = v.norm();
    basis.clear();
    alpha.clear();
    beta.clear();
    basis.push_back(v / nrm);
    Eigen::VectorXcd combo;
    for (int j = 0; j < m_cap; ++j) {
      w.setZero();
      apply(basis[j], w);
      double a = std::real(basis[j].dot(w));
      alpha.push_back(a);
      w -= a * basis[j];
      if (j > 0) w -= beta[j - 1] * basis[j - 1];
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& u : basis) w -= u.dot(w) * u;
      double b = w.norm();
      const int m = j + 1;
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) T(i, i) = alpha[i];
      for (int i = 0; i + 1 < m; ++i) T(i, i + 1) = T(i + 1, i) = beta[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      Eigen::VectorXcd phases(m);
      for (int i = 0; i < m; ++i)
        phases[i] = std::exp(cplx(0, -dt * es.eigenvalues()[i]));
      Eigen::VectorXd e1 = Eigen::VectorXd::Zero(m);
      e1[0] = 1.0;
      Eigen::VectorXd proj = es.eigenvectors().transpose() * e1;
      Eigen::VectorXcd u = es.eigenvectors() * (phases.array() * proj.array().cast<cplx>()).matrix();
      double err = (m < m_cap && b > 1e-300) ? b * std::abs(u[m - 1]) : 0.0;
      if (b < 1e-13 || err < 1e-13 || m == m_cap) {
        combo = Eigen::VectorXcd::Zero(dim);
        for (int i = 0; i < m; ++i) combo += u[i] * basis[i];
        break;
      }
      beta.push_back(b);
      basis.push_back(w / b);
    }
    v = nrm * combo;
  }
}

void dense_evolve_interval(DenseState& state, const DensePath& path, RampKind ramp,
                           double s_start, double s_end, double time, double dt) {
  if (time < 0) throw std::invalid_argument("dense_evolve_interval: negative time");
  if (time == 0) return;
  if (dt <= 0) throw std::invalid_argument("dense_evolve_interval: dt must be positive");
  const int steps = std::max(1, (int)std::ceil(time / dt - 1e-12));
  double done = 0.0;
  for (int m = 0; m < steps; ++m) {
    const double step_dt = (m + 1 == steps) ? time - done : dt;
    const double t_mid = done + step_dt / 2.0;
    const double s_mid = s_start + (s_end - s_start) * (t_mid / time);
    const double lam = ramp_value(ramp, s_mid, 0.0, 1.0);
    ApplyFn apply = [&path, lam](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
      path.apply_add(x, y, lam);
    };
    krylov_expm_apply(apply, path.norm_bound(), step_dt, state.amp);
    done += step_dt;
  }
}

}  // namespace aqs
