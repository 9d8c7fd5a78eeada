#include "aqs/dmrg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <random>
#include <stdexcept>

namespace aqs {

namespace {

struct MpoEntry {
  int row, col;
  Mat2 op;
};

struct MpoSite {
  int dl = 1, dr = 1;
  std::vector<MpoEntry> entries;
};

// sum_k L_k (x) R_k with the left factor on the slow index of the 4x4
std::vector<std::pair<Mat2, Mat2>> operator_schmidt(const Mat4& op) {
  Eigen::Matrix4cd m;
  for (int p1 = 0; p1 < 2; ++p1)
    for (int q1 = 0; q1 < 2; ++q1)
      for (int p2 = 0; p2 < 2; ++p2)
        for (int q2 = 0; q2 < 2; ++q2)
          m(p1 * 2 + q1, p2 * 2 + q2) = op(p1 * 2 + p2, q1 * 2 + q2);
  Eigen::JacobiSVD<Eigen::Matrix4cd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  std::vector<std::pair<Mat2, Mat2>> out;
  for (int k = 0; k < 4; ++k) {
    const double s = svd.singularValues()[k];
    if (s < 1e-13) break;
    const double rs = std::sqrt(s);
    Mat2 l, r;
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q) {
        l(p, q) = rs * svd.matrixU()(p * 2 + q, k);
        r(p, q) = rs * std::conj(svd.matrixV()(p * 2 + q, k));
      }
    out.emplace_back(l, r);
  }
  return out;
}

// Automaton channels per bond: 0 = done, 1..n = in-flight two-site pieces,
// last = not-started. Left edge holds only not-started, right edge only done.
std::vector<MpoSite> build_mpo(const HamiltonianTerms& terms) {
  const int n = terms.num_sites;
  std::vector<Mat2> onsite(n, Mat2::Zero());
  for (const auto& t : terms.single_site_terms) onsite[t.site] += t.op;
  std::vector<std::vector<std::pair<Mat2, Mat2>>> channels(std::max(0, n - 1));
  for (const auto& t : terms.two_site_terms)
    for (auto& lr : operator_schmidt(t.op)) channels[t.site].push_back(lr);

  std::vector<MpoSite> mpo(n);
  for (int i = 0; i < n; ++i) {
    auto& w = mpo[i];
    w.dl = (i == 0) ? 1 : (int)channels[i - 1].size() + 2;
    w.dr = (i == n - 1) ? 1 : (int)channels[i].size() + 2;
    const int start_in = w.dl - 1;
    const int done_out = 0;
    if (i < n - 1) w.entries.push_back({start_in, w.dr - 1, Mat2::Identity()});
    if (i > 0) w.entries.push_back({0, done_out, Mat2::Identity()});
    if (onsite[i].cwiseAbs().maxCoeff() > 0.0) w.entries.push_back({start_in, done_out, onsite[i]});
    if (i < n - 1)
      for (std::size_t k = 0; k < channels[i].size(); ++k)
        w.entries.push_back({start_in, 1 + (int)k, channels[i][k].first});
    if (i > 0)
      for (std::size_t k = 0; k < channels[i - 1].size(); ++k)
        w.entries.push_back({1 + (int)k, done_out, channels[i - 1][k].second});
  }
  return mpo;
}

using EnvVec = std::vector<Eigen::MatrixXcd>;  // one (bra x ket) matrix per MPO channel

EnvVec grow_left(const EnvVec& env, const MpoSite& w, const std::array<Eigen::MatrixXcd, 2>& a) {
  const auto chi = a[0].cols();
  EnvVec next(w.dr, Eigen::MatrixXcd::Zero(chi, chi));
  for (const auto& e : w.entries)
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q)
        if (e.op(p, q) != 0.0) next[e.col] += e.op(p, q) * (a[p].adjoint() * env[e.row] * a[q]);
  return next;
}

EnvVec grow_right(const EnvVec& env, const MpoSite& w, const std::array<Eigen::MatrixXcd, 2>& a) {
  const auto chi = a[0].rows();
  EnvVec next(w.dl, Eigen::MatrixXcd::Zero(chi, chi));
  for (const auto& e : w.entries)
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q)
        if (e.op(p, q) != 0.0)
          next[e.row] += e.op(p, q) * (a[p].conjugate() * env[e.col] * a[q].transpose());
  return next;
}

using Theta = std::array<std::array<Eigen::MatrixXcd, 2>, 2>;

Eigen::VectorXcd pack(const Theta& t) {
  const auto chi_l = t[0][0].rows(), chi_r = t[0][0].cols();
  Eigen::VectorXcd v(4 * chi_l * chi_r);
  Eigen::Index at = 0;
  for (int p1 = 0; p1 < 2; ++p1)
    for (int p2 = 0; p2 < 2; ++p2)
      for (Eigen::Index a = 0; a < chi_l; ++a)
        for (Eigen::Index c = 0; c < chi_r; ++c) v[at++] = t[p1][p2](a, c);
  return v;
}

Theta unpack(const Eigen::VectorXcd& v, Eigen::Index chi_l, Eigen::Index chi_r) {
  Theta t;
  Eigen::Index at = 0;
  for (int p1 = 0; p1 < 2; ++p1)
    for (int p2 = 0; p2 < 2; ++p2) {
      t[p1][p2].resize(chi_l, chi_r);
      for (Eigen::Index a = 0; a < chi_l; ++a)
        for (Eigen::Index c = 0; c < chi_r; ++c) t[p1][p2](a, c) = v[at++];
    }
  return t;
}

// y = (Lenv . W_i . W_{i+1} . Renv) x on the two-site block
struct EffectiveOp {
  const EnvVec* lenv;
  const EnvVec* renv;
  const MpoSite* w1;
  const MpoSite* w2;
  Eigen::Index chi_l, chi_r;
  // penalty directions (unit vectors) with weight
  std::vector<Eigen::VectorXcd> penalty;
  double penalty_weight = 0.0;

  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const {
    Theta in = unpack(x, chi_l, chi_r);
    Theta out;
    for (int p1 = 0; p1 < 2; ++p1)
      for (int p2 = 0; p2 < 2; ++p2) out[p1][p2] = Eigen::MatrixXcd::Zero(chi_l, chi_r);

    // stage 1: left environment per channel
    std::vector<Theta> staged(w1->dl);
    for (int b = 0; b < w1->dl; ++b)
      for (int p1 = 0; p1 < 2; ++p1)
        for (int p2 = 0; p2 < 2; ++p2) staged[b][p1][p2] = (*lenv)[b] * in[p1][p2];
    // stage 2: first site tensor
    std::vector<Theta> mid(w1->dr);
    for (int b = 0; b < w1->dr; ++b)
      for (int p1 = 0; p1 < 2; ++p1)
        for (int p2 = 0; p2 < 2; ++p2) mid[b][p1][p2] = Eigen::MatrixXcd::Zero(chi_l, chi_r);
    for (const auto& e : w1->entries)
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q)
          if (e.op(p, q) != 0.0)
            for (int p2 = 0; p2 < 2; ++p2) mid[e.col][p][p2] += e.op(p, q) * staged[e.row][q][p2];
    // stage 3: second site tensor + right environment
    for (const auto& e : w2->entries)
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q)
          if (e.op(p, q) != 0.0)
            for (int p1 = 0; p1 < 2; ++p1)
              out[p1][p] += e.op(p, q) * (mid[e.row][p1][q] * (*renv)[e.col].transpose());

    Eigen::VectorXcd out_v = pack(out);
    for (const auto& dir : penalty) out_v += penalty_weight * dir * dir.dot(x);
    return out_v;
  }
};

// plain Lanczos with full reorthogonalization, warm start v0
std::pair<double, Eigen::VectorXcd> lowest_local(const EffectiveOp& op, Eigen::VectorXcd v0,
                                                 int max_iter, double tol) {
  const Eigen::Index dim = v0.size();
  max_iter = std::min<Eigen::Index>(max_iter, dim);
  double nrm = v0.norm();
  if (nrm == 0.0) throw std::runtime_error("dmrg: zero start vector");
  v0 /= nrm;

  std::vector<Eigen::VectorXcd> basis{v0};
  std::vector<double> alpha, beta;
  Eigen::VectorXd ritz_vec;
  double theta = 0.0;

  for (int m = 0; m < max_iter; ++m) {
    Eigen::VectorXcd w = op.apply(basis[m]);
    double a = basis[m].dot(w).real();
    alpha.push_back(a);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) w -= b.dot(w) * b;
    double b = w.norm();

    const int mm = (int)alpha.size();
    Eigen::VectorXd ad = Eigen::Map<const Eigen::VectorXd>(alpha.data(), mm);
    Eigen::VectorXd bd(std::max(0, mm - 1));
    for (int i = 0; i + 1 < mm; ++i) bd[i] = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(ad, bd);
    theta = es.eigenvalues()[0];
    ritz_vec = es.eigenvectors().col(0);
    const double resid = b * std::abs(ritz_vec[mm - 1]);
    if (resid < tol * std::max(1.0, std::abs(theta)) || b < 1e-14 || m + 1 == max_iter) break;
    beta.push_back(b);
    basis.push_back(w / b);
  }
  Eigen::VectorXcd vec = Eigen::VectorXcd::Zero(dim);
  for (std::size_t i = 0; i < basis.size(); ++i) vec += ritz_vec[(Eigen::Index)i] * basis[i];
  vec.normalize();
  return {theta, vec};
}

Mps random_start(int n, int chi, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mps s;
  s.num_sites = n;
  s.max_bond = chi;
  s.tensors.resize(n);
  auto dim = [&](int bond) { return std::min(1 << std::min(bond, n - bond), chi); };
  for (int i = 0; i < n; ++i)
    for (int p = 0; p < 2; ++p) {
      s.tensors[i][p].resize(dim(i), dim(i + 1));
      for (Eigen::Index r = 0; r < s.tensors[i][p].rows(); ++r)
        for (Eigen::Index c = 0; c < s.tensors[i][p].cols(); ++c)
          s.tensors[i][p](r, c) = cplx(gauss(rng), gauss(rng));
    }
  canonicalize(s);
  return s;
}

// split the solved two-site block back into site tensors
void split_theta(Mps& psi, int site, const Theta& t, int max_bond, bool to_right) {
  const auto chi_l = t[0][0].rows(), chi_r = t[0][0].cols();
  Eigen::MatrixXcd m(2 * chi_l, 2 * chi_r);
  for (int p1 = 0; p1 < 2; ++p1)
    for (int p2 = 0; p2 < 2; ++p2) m.block(p1 * chi_l, p2 * chi_r, chi_l, chi_r) = t[p1][p2];
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  int keep = 0;
  for (int i = 0; i < sv.size() && i < max_bond; ++i) {
    if (sv[i] < 1e-12 && i > 0) break;
    ++keep;
  }
  const double eta = std::sqrt(sv.head(keep).squaredNorm());
  Eigen::VectorXcd s_kept = (sv.head(keep) / eta).cast<cplx>();
  Eigen::MatrixXcd u = svd.matrixU().leftCols(keep);
  Eigen::MatrixXcd vd = svd.matrixV().leftCols(keep).adjoint();
  for (int p = 0; p < 2; ++p) {
    if (to_right) {
      psi.tensors[site][p] = u.middleRows(p * chi_l, chi_l);
      psi.tensors[site + 1][p] = s_kept.asDiagonal() * vd.middleCols(p * chi_r, chi_r);
    } else {
      psi.tensors[site][p] = u.middleRows(p * chi_l, chi_l) * s_kept.asDiagonal();
      psi.tensors[site + 1][p] = vd.middleCols(p * chi_r, chi_r);
    }
  }
  psi.center = to_right ? site + 1 : site;
}

struct MixedEnv {  // <other|psi> transfer matrices
  std::vector<Eigen::MatrixXcd> left;   // left[i]: bonds left of site i (other x psi)
  std::vector<Eigen::MatrixXcd> right;  // right[i]: bonds left of site i (psi x other)
};

Eigen::MatrixXcd mixed_grow_left(const Eigen::MatrixXcd& env,
                                 const std::array<Eigen::MatrixXcd, 2>& other,
                                 const std::array<Eigen::MatrixXcd, 2>& psi) {
  return other[0].adjoint() * env * psi[0] + other[1].adjoint() * env * psi[1];
}

Eigen::MatrixXcd mixed_grow_right(const Eigen::MatrixXcd& env,
                                  const std::array<Eigen::MatrixXcd, 2>& other,
                                  const std::array<Eigen::MatrixXcd, 2>& psi) {
  return psi[0] * env * other[0].adjoint() + psi[1] * env * other[1].adjoint();
}

DmrgResult dmrg_run(const HamiltonianTerms& terms, int max_bond, int sweeps, double tol,
                    const std::vector<const Mps*>& project_out) {
  validate_terms(terms);
  if (max_bond < 2) throw std::invalid_argument("dmrg: max_bond < 2");
  if (sweeps < 1) throw std::invalid_argument("dmrg: sweeps < 1");
  const int n = terms.num_sites;
  auto mpo = build_mpo(terms);

  Mps psi = random_start(n, std::min(8, max_bond), 777 + (unsigned)project_out.size());
  psi.max_bond = max_bond;
  move_center(psi, 0);

  double op_scale = 0.0;
  for (const auto& t : terms.single_site_terms) op_scale += t.op.cwiseAbs().maxCoeff() * 2;
  for (const auto& t : terms.two_site_terms) op_scale += t.op.cwiseAbs().maxCoeff() * 4;
  const double weight = 10.0 * (op_scale + 1.0);

  // environments: lenv[i] covers sites < i, renv[i] covers sites >= i
  std::vector<EnvVec> lenv(n + 1), renv(n + 1);
  lenv[0] = {Eigen::MatrixXcd::Ones(1, 1)};
  renv[n] = {Eigen::MatrixXcd::Ones(1, 1)};
  for (int i = n - 1; i >= 1; --i) renv[i] = grow_right(renv[i + 1], mpo[i], psi.tensors[i]);

  std::vector<MixedEnv> mixed(project_out.size());
  for (std::size_t j = 0; j < project_out.size(); ++j) {
    mixed[j].left.assign(n + 1, Eigen::MatrixXcd());
    mixed[j].right.assign(n + 1, Eigen::MatrixXcd());
    mixed[j].left[0] = Eigen::MatrixXcd::Ones(1, 1);
    mixed[j].right[n] = Eigen::MatrixXcd::Ones(1, 1);
    for (int i = n - 1; i >= 1; --i)
      mixed[j].right[i] =
          mixed_grow_right(mixed[j].right[i + 1], project_out[j]->tensors[i], psi.tensors[i]);
  }

  auto solve_bond = [&](int i, bool to_right) {
    EffectiveOp op;
    op.lenv = &lenv[i];
    op.renv = &renv[i + 2];
    op.w1 = &mpo[i];
    op.w2 = &mpo[i + 1];
    op.chi_l = psi.tensors[i][0].rows();
    op.chi_r = psi.tensors[i + 1][0].cols();
    op.penalty_weight = weight;
    for (std::size_t j = 0; j < project_out.size(); ++j) {
      const auto& g1 = project_out[j]->tensors[i];
      const auto& g2 = project_out[j]->tensors[i + 1];
      Theta k;
      for (int p1 = 0; p1 < 2; ++p1)
        for (int p2 = 0; p2 < 2; ++p2)
          k[p1][p2] = mixed[j].left[i].transpose() * (g1[p1] * g2[p2]).conjugate() *
                      mixed[j].right[i + 2].transpose();
      Eigen::VectorXcd dir = pack(k).conjugate();
      const double nd = dir.norm();
      if (nd > 1e-12) op.penalty.push_back(dir / nd);
    }

    Theta guess;
    for (int p1 = 0; p1 < 2; ++p1)
      for (int p2 = 0; p2 < 2; ++p2) guess[p1][p2] = psi.tensors[i][p1] * psi.tensors[i + 1][p2];
    auto [theta, vec] = lowest_local(op, pack(guess), 140, 1e-10);
    split_theta(psi, i, unpack(vec, op.chi_l, op.chi_r), max_bond, to_right);
    if (to_right) {
      lenv[i + 1] = grow_left(lenv[i], mpo[i], psi.tensors[i]);
      for (std::size_t j = 0; j < project_out.size(); ++j)
        mixed[j].left[i + 1] =
            mixed_grow_left(mixed[j].left[i], project_out[j]->tensors[i], psi.tensors[i]);
    } else {
      renv[i + 1] = grow_right(renv[i + 2], mpo[i + 1], psi.tensors[i + 1]);
      for (std::size_t j = 0; j < project_out.size(); ++j)
        mixed[j].right[i + 1] = mixed_grow_right(mixed[j].right[i + 2],
                                                 project_out[j]->tensors[i + 1],
                                                 psi.tensors[i + 1]);
    }
    return theta;
  };

  DmrgResult res;
  double prev = 0.0;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double e = 0.0;
    for (int i = 0; i + 1 < n; ++i) e = solve_bond(i, true);
    for (int i = n - 2; i >= 0; --i) e = solve_bond(i, false);
    res.sweep_energies.push_back(e);
    res.sweeps_used = sweep + 1;
    if (sweep > 0) {
      res.last_delta = prev - e;
      if (std::abs(res.last_delta) < tol) {
        res.converged = true;
        prev = e;
        break;
      }
    }
    prev = e;
  }
  canonicalize(psi);
  psi.norm_log = 0.0;  // eigensolver output; normalization factors carry no meaning
  res.state = std::move(psi);
  res.energy = project_out.empty() ? res.sweep_energies.back() : energy(res.state, terms);
  return res;
}

}  // namespace

DmrgResult dmrg_ground_state(const HamiltonianTerms& terms, int max_bond, int sweeps, double tol) {
  return dmrg_run(terms, max_bond, sweeps, tol, {});
}

DmrgResult dmrg_lowest_orthogonal(const HamiltonianTerms& terms, int max_bond, int sweeps,
                                  double tol, const std::vector<const Mps*>& project_out) {
  return dmrg_run(terms, max_bond, sweeps, tol, project_out);
}

std::vector<GapPoint> dmrg_gap_profile(const ModelParams& params, const std::vector<double>& grid,
                                       int max_bond, int sweeps, double tol) {
  auto [h0, ht] = build_zzxz(params);
  std::vector<GapPoint> out;
  out.reserve(grid.size());
  for (double s : grid) {
    auto terms = interpolate(h0, ht, s);
    auto gs = dmrg_ground_state(terms, max_bond, sweeps, tol);
    auto ex = dmrg_lowest_orthogonal(terms, max_bond, sweeps, tol, {&gs.state});
    const double gap = ex.energy - gs.energy;
    const bool degenerate = gap < 1e-10;
    out.push_back({s, degenerate ? 0.0 : gap, degenerate});
  }
  return out;
}

}  // namespace aqs
