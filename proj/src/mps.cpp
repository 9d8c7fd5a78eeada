#include "aqs/mps.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace aqs {

namespace {

// Rows of the two-site/theta packings carry the physical index slow:
// row = p * chi + l, matching the 4x4 gate convention (left qubit slow).
Eigen::MatrixXcd stack_rows(const std::array<Eigen::MatrixXcd, 2>& a) {
  Eigen::MatrixXcd m(2 * a[0].rows(), a[0].cols());
  m.topRows(a[0].rows()) = a[0];
  m.bottomRows(a[0].rows()) = a[1];
  return m;
}

Eigen::MatrixXcd stack_cols(const std::array<Eigen::MatrixXcd, 2>& a) {
  Eigen::MatrixXcd m(a[0].rows(), 2 * a[0].cols());
  m.leftCols(a[0].cols()) = a[0];
  m.rightCols(a[0].cols()) = a[1];
  return m;
}

void check_site(const Mps& state, int site) {
  if (site < 0 || site >= state.num_sites) throw std::invalid_argument("mps: site out of range");
}

}  // namespace

int Mps::bond_dim(int bond) const {
  if (bond < 0 || bond > num_sites) throw std::invalid_argument("mps: bond out of range");
  if (bond == num_sites) return (int)tensors.back()[0].cols();
  return (int)tensors[bond][0].rows();
}

Mps product_state(const std::vector<Eigen::Vector2cd>& local_states, int max_bond) {
  if (local_states.empty()) throw std::invalid_argument("product_state: empty");
  if (max_bond < 1) throw std::invalid_argument("product_state: max_bond < 1");
  Mps state;
  state.num_sites = (int)local_states.size();
  state.max_bond = max_bond;
  state.tensors.resize(local_states.size());
  for (std::size_t i = 0; i < local_states.size(); ++i) {
    const double nrm = local_states[i].norm();
    if (nrm == 0.0) throw std::invalid_argument("product_state: zero local vector");
    for (int p = 0; p < 2; ++p) {
      state.tensors[i][p].resize(1, 1);
      state.tensors[i][p](0, 0) = local_states[i][p] / nrm;
    }
  }
  return state;
}

void move_center(Mps& state, int site) {
  check_site(state, site);
  while (state.center < site) {
    auto& a = state.tensors[state.center];
    Eigen::MatrixXcd m = stack_rows(a);
    const auto rows = m.rows(), k = std::min(m.rows(), m.cols());
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, k);
    Eigen::MatrixXcd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    const auto chi_l = a[0].rows();
    for (int p = 0; p < 2; ++p) a[p] = q.middleRows(p * chi_l, chi_l);
    auto& b = state.tensors[state.center + 1];
    for (int p = 0; p < 2; ++p) b[p] = r * b[p];
    ++state.center;
  }
  while (state.center > site) {
    auto& a = state.tensors[state.center];
    Eigen::MatrixXcd m = stack_cols(a);
    const auto k = std::min(m.rows(), m.cols());
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m.adjoint());
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(m.cols(), k);
    Eigen::MatrixXcd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    const auto chi_r = a[0].cols();
    Eigen::MatrixXcd qd = q.adjoint();  // k x 2*chi_r, right-isometry
    for (int p = 0; p < 2; ++p) a[p] = qd.middleCols(p * chi_r, chi_r);
    auto& b = state.tensors[state.center - 1];
    Eigen::MatrixXcd rd = r.adjoint();  // chi_l x k
    for (int p = 0; p < 2; ++p) b[p] = b[p] * rd;
    --state.center;
  }
}

double apply_two_site_gate(Mps& state, const Mat4& gate, int site, int chi_max,
                           double svd_cutoff) {
  check_site(state, site);
  if (site + 1 >= state.num_sites) throw std::invalid_argument("apply_two_site_gate: site");
  if (chi_max < 1) throw std::invalid_argument("apply_two_site_gate: chi_max < 1");
  if (svd_cutoff < 0) throw std::invalid_argument("apply_two_site_gate: svd_cutoff < 0");
  if ((gate.adjoint() * gate - Mat4::Identity()).cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("apply_two_site_gate: gate not unitary");

  move_center(state, site);
  auto& a1 = state.tensors[site];
  auto& a2 = state.tensors[site + 1];
  const auto chi_l = a1[0].rows(), chi_r = a2[0].cols();

  std::array<std::array<Eigen::MatrixXcd, 2>, 2> theta, out;
  for (int p1 = 0; p1 < 2; ++p1)
    for (int p2 = 0; p2 < 2; ++p2) theta[p1][p2] = a1[p1] * a2[p2];
  for (int p1 = 0; p1 < 2; ++p1)
    for (int p2 = 0; p2 < 2; ++p2) {
      out[p1][p2] = Eigen::MatrixXcd::Zero(chi_l, chi_r);
      for (int q1 = 0; q1 < 2; ++q1)
        for (int q2 = 0; q2 < 2; ++q2)
          out[p1][p2] += gate(p1 * 2 + p2, q1 * 2 + q2) * theta[q1][q2];
    }

  Eigen::MatrixXcd m(2 * chi_l, 2 * chi_r);
  for (int p1 = 0; p1 < 2; ++p1)
    for (int p2 = 0; p2 < 2; ++p2)
      m.block(p1 * chi_l, p2 * chi_r, chi_l, chi_r) = out[p1][p2];

  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double total = sv.squaredNorm();
  if (total <= 0.0) throw std::invalid_argument("apply_two_site_gate: zero-norm state");

  int keep = 0;
  for (int i = 0; i < sv.size() && i < chi_max; ++i) {
    if (sv[i] < svd_cutoff && i > 0) break;
    ++keep;
  }
  const double kept = sv.head(keep).squaredNorm();
  const double discarded = std::max(0.0, total - kept);
  const double eta = std::sqrt(kept);

  Eigen::VectorXd s_kept = sv.head(keep) / eta;
  Eigen::MatrixXcd u = svd.matrixU().leftCols(keep);
  Eigen::MatrixXcd w = s_kept.cast<cplx>().asDiagonal() * svd.matrixV().leftCols(keep).adjoint();
  for (int p = 0; p < 2; ++p) {
    a1[p] = u.middleRows(p * chi_l, chi_l);
    a2[p] = w.middleCols(p * chi_r, chi_r);
  }
  state.center = site + 1;
  state.cum_truncation += discarded;
  state.norm_log += std::log(eta);
  return discarded;
}

void apply_single_site(Mps& state, const Mat2& op, int site) {
  check_site(state, site);
  auto& a = state.tensors[site];
  std::array<Eigen::MatrixXcd, 2> next;
  for (int p = 0; p < 2; ++p) next[p] = op(p, 0) * a[0] + op(p, 1) * a[1];
  a = next;
}

std::complex<double> overlap(const Mps& a, const Mps& b) {
  if (a.num_sites != b.num_sites) throw std::invalid_argument("overlap: size mismatch");
  Eigen::MatrixXcd env = Eigen::MatrixXcd::Ones(1, 1);
  for (int i = 0; i < a.num_sites; ++i)
    env = a.tensors[i][0].adjoint() * env * b.tensors[i][0] +
          a.tensors[i][1].adjoint() * env * b.tensors[i][1];
  return env(0, 0);
}

namespace {

// Same-state transfer environments for arbitrary gauge; expectations divide
// by the squared norm so unnormalized inputs still give state expectations.
std::vector<Eigen::MatrixXcd> left_envs(const Mps& s) {
  std::vector<Eigen::MatrixXcd> envs(s.num_sites + 1);
  envs[0] = Eigen::MatrixXcd::Ones(1, 1);
  for (int i = 0; i < s.num_sites; ++i)
    envs[i + 1] = s.tensors[i][0].adjoint() * envs[i] * s.tensors[i][0] +
                  s.tensors[i][1].adjoint() * envs[i] * s.tensors[i][1];
  return envs;
}

std::vector<Eigen::MatrixXcd> right_envs(const Mps& s) {
  std::vector<Eigen::MatrixXcd> envs(s.num_sites + 1);
  envs[s.num_sites] = Eigen::MatrixXcd::Ones(1, 1);
  for (int i = s.num_sites - 1; i >= 0; --i)
    envs[i] = s.tensors[i][0] * envs[i + 1] * s.tensors[i][0].adjoint() +
              s.tensors[i][1] * envs[i + 1] * s.tensors[i][1].adjoint();
  return envs;
}

}  // namespace

std::complex<double> expectation_single_site(const Mps& state, const Mat2& op, int site) {
  check_site(state, site);
  auto lenv = left_envs(state);
  auto renv = right_envs(state);
  const double norm2 = lenv[state.num_sites](0, 0).real();
  if (norm2 <= 0.0) throw std::invalid_argument("expectation_single_site: zero-norm state");
  const auto& a = state.tensors[site];
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(a[0].cols(), a[0].cols());
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q)
      if (op(p, q) != 0.0) t += op(p, q) * (a[p].adjoint() * lenv[site] * a[q]);
  return (t * renv[site + 1]).trace() / norm2;
}

double energy(const Mps& state, const HamiltonianTerms& terms) {
  if (terms.num_sites != state.num_sites) throw std::invalid_argument("energy: size mismatch");
  auto lenv = left_envs(state);
  auto renv = right_envs(state);
  const double norm2 = lenv[state.num_sites](0, 0).real();
  if (norm2 <= 0.0) throw std::invalid_argument("energy: zero-norm state");

  cplx acc = 0.0;
  for (const auto& term : terms.single_site_terms) {
    const auto& a = state.tensors[term.site];
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(a[0].cols(), a[0].cols());
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q)
        if (term.op(p, q) != 0.0) t += term.op(p, q) * (a[p].adjoint() * lenv[term.site] * a[q]);
    acc += (t * renv[term.site + 1]).trace();
  }
  for (const auto& term : terms.two_site_terms) {
    const auto& a1 = state.tensors[term.site];
    const auto& a2 = state.tensors[term.site + 1];
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(a2[0].cols(), a2[0].cols());
    for (int p1 = 0; p1 < 2; ++p1)
      for (int q1 = 0; q1 < 2; ++q1) {
        Eigen::MatrixXcd mid = a1[p1].adjoint() * lenv[term.site] * a1[q1];
        for (int p2 = 0; p2 < 2; ++p2)
          for (int q2 = 0; q2 < 2; ++q2) {
            const cplx g = term.op(p1 * 2 + p2, q1 * 2 + q2);
            if (g != 0.0) t += g * (a2[p2].adjoint() * mid * a2[q2]);
          }
      }
    acc += (t * renv[term.site + 2]).trace();
  }
  return acc.real() / norm2;
}

void canonicalize(Mps& state) {
  if (state.num_sites == 0) throw std::invalid_argument("canonicalize: empty state");
  state.center = 0;
  if (state.num_sites > 1) {
    move_center(state, state.num_sites - 1);
    move_center(state, 0);
  }
  auto& a = state.tensors[0];
  const double eta = std::sqrt(stack_cols(a).squaredNorm());
  if (eta <= 0.0) throw std::invalid_argument("canonicalize: zero-norm state");
  for (int p = 0; p < 2; ++p) a[p] /= eta;
  state.norm_log += std::log(eta);
}

Mps dense_to_mps(const Eigen::VectorXcd& amp, int num_sites, int max_bond, double svd_cutoff) {
  if (num_sites < 1 || num_sites > 20) throw std::invalid_argument("dense_to_mps: num_sites");
  if (amp.size() != (Eigen::Index{1} << num_sites))
    throw std::invalid_argument("dense_to_mps: size mismatch");
  if (max_bond < 1) throw std::invalid_argument("dense_to_mps: max_bond < 1");
  if (amp.norm() == 0.0) throw std::invalid_argument("dense_to_mps: zero state");

  Mps state;
  state.num_sites = num_sites;
  state.max_bond = max_bond;
  state.tensors.resize(num_sites);
  state.center = num_sites - 1;

  // carry(l, b * rest_dim + r): bond index x remaining configuration
  Eigen::MatrixXcd carry = amp.transpose();
  for (int i = 0; i + 1 < num_sites; ++i) {
    const auto chi_l = carry.rows();
    const auto rest = carry.cols() / 2;
    Eigen::MatrixXcd m(2 * chi_l, rest);
    for (int p = 0; p < 2; ++p)
      m.middleRows(p * chi_l, chi_l) = carry.middleCols(p * rest, rest);
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    int keep = 0;
    for (int j = 0; j < sv.size() && j < max_bond; ++j) {
      if (sv[j] < svd_cutoff && j > 0) break;
      ++keep;
    }
    const double total = sv.squaredNorm();
    const double kept = sv.head(keep).squaredNorm();
    state.cum_truncation += std::max(0.0, total - kept);
    Eigen::MatrixXcd u = svd.matrixU().leftCols(keep);
    for (int p = 0; p < 2; ++p) state.tensors[i][p] = u.middleRows(p * chi_l, chi_l);
    carry = sv.head(keep).cast<cplx>().asDiagonal() * svd.matrixV().leftCols(keep).adjoint();
  }
  const double eta = carry.norm();
  for (int p = 0; p < 2; ++p) state.tensors[num_sites - 1][p] = carry.col(p) / eta;
  state.norm_log = std::log(eta);
  return state;
}

Eigen::VectorXcd mps_to_dense(const Mps& state) {
  if (state.num_sites > 20) throw std::invalid_argument("mps_to_dense: num_sites > 20");
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Ones(1, 1);
  for (int i = 0; i < state.num_sites; ++i) {
    const auto& a = state.tensors[i];
    Eigen::MatrixXcd next(v.rows() * 2, a[0].cols());
    for (int p = 0; p < 2; ++p) {
      Eigen::MatrixXcd branch = v * a[p];  // (dim x chi_r)
      for (Eigen::Index row = 0; row < v.rows(); ++row) next.row(row * 2 + p) = branch.row(row);
    }
    v = std::move(next);
  }
  return v.col(0);
}

}  // namespace aqs
