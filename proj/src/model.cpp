#include "aqs/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace aqs {

const Mat2& pauli_id() {
  static const Mat2 m = Mat2::Identity();
  return m;
}

const Mat2& pauli_x() {
  static const Mat2 m = (Mat2() << 0, 1, 1, 0).finished();
  return m;
}

const Mat2& pauli_y() {
  static const Mat2 m = (Mat2() << cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0)).finished();
  return m;
}

const Mat2& pauli_z() {
  static const Mat2 m = (Mat2() << 1, 0, 0, -1).finished();
  return m;
}

void validate_params(const ModelParams& p) {
  if (p.num_sites < 2) throw std::invalid_argument("num_sites must be >= 2");
  if (p.boundary != Boundary::open) throw std::invalid_argument("only open boundaries supported");
}

void validate_terms(const HamiltonianTerms& t) {
  if (t.num_sites < 1) throw std::invalid_argument("terms: num_sites must be positive");
  for (const auto& s : t.single_site_terms) {
    if (s.site < 0 || s.site >= t.num_sites)
      throw std::invalid_argument("single-site term out of range");
    if ((s.op - s.op.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("single-site term not Hermitian");
  }
  for (const auto& d : t.two_site_terms) {
    if (d.site < 0 || d.site + 1 >= t.num_sites)
      throw std::invalid_argument("two-site term out of range (nearest neighbor only)");
    if ((d.op - d.op.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("two-site term not Hermitian");
  }
}

std::pair<HamiltonianTerms, HamiltonianTerms> build_zzxz(const ModelParams& p) {
  validate_params(p);
  const int n = p.num_sites;
  HamiltonianTerms h0, ht;
  h0.num_sites = n;
  ht.num_sites = n;
  for (int i = 0; i < n; ++i) {
    h0.single_site_terms.push_back({i, p.field_h * pauli_x()});
    Mat2 local = p.field_h * pauli_x() + p.field_g * pauli_z();
    ht.single_site_terms.push_back({i, local});
  }
  for (int i = 0; i + 1 < n; ++i) {
    Mat4 zz = Mat4::Zero();
    // kron(sz, sz), left qubit slow
    zz(0, 0) = 1;
    zz(1, 1) = -1;
    zz(2, 2) = -1;
    zz(3, 3) = 1;
    ht.two_site_terms.push_back({i, p.coupling_J * zz});
  }
  return {h0, ht};
}

HamiltonianTerms interpolate(const HamiltonianTerms& h0, const HamiltonianTerms& ht,
                             double lam) {
  if (h0.num_sites != ht.num_sites)
    throw std::invalid_argument("interpolate: site-count mismatch");
  if (!(lam >= 0.0 && lam <= 1.0)) throw std::invalid_argument("interpolate: lam outside [0,1]");
  HamiltonianTerms out;
  out.num_sites = h0.num_sites;
  for (const auto& s : h0.single_site_terms)
    out.single_site_terms.push_back({s.site, (1.0 - lam) * s.op});
  for (const auto& s : ht.single_site_terms)
    out.single_site_terms.push_back({s.site, lam * s.op});
  for (const auto& d : h0.two_site_terms)
    out.two_site_terms.push_back({d.site, (1.0 - lam) * d.op});
  for (const auto& d : ht.two_site_terms)
    out.two_site_terms.push_back({d.site, lam * d.op});
  return out;
}

double ramp_value(RampKind kind, double s, double lam0, double lamf) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("ramp_value: s outside [0,1]");
  if (kind == RampKind::linear) return lam0 + s * (lamf - lam0);
  const double pi = std::numbers::pi;
  double inner = std::sin(pi * s / 2.0);
  double u = std::sin(pi / 2.0 * inner * inner);
  return lam0 + (lamf - lam0) * u * u;
}

std::vector<Mat4> bond_hamiltonians(const HamiltonianTerms& t) {
  validate_terms(t);
  const int n = t.num_sites;
  if (n < 2) throw std::invalid_argument("bond_hamiltonians: need at least 2 sites");
  std::vector<Mat4> bonds(n - 1, Mat4::Zero());
  for (const auto& d : t.two_site_terms) bonds[d.site] += d.op;
  const Mat2 id = pauli_id();
  auto kron_left = [&](const Mat2& a) {  // a on left qubit
    Mat4 m = Mat4::Zero();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = a(i, j) * id;
    return m;
  };
  auto kron_right = [&](const Mat2& a) {
    Mat4 m = Mat4::Zero();
    m.block<2, 2>(0, 0) = a;
    m.block<2, 2>(2, 2) = a;
    return m;
  };
  for (const auto& s : t.single_site_terms) {
    const int i = s.site;
    bool has_left = i > 0;        // bond (i-1, i)
    bool has_right = i + 1 < n;   // bond (i, i+1)
    if (has_left && has_right) {
      bonds[i - 1] += 0.5 * kron_right(s.op);
      bonds[i] += 0.5 * kron_left(s.op);
    } else if (has_right) {
      bonds[i] += kron_left(s.op);
    } else {
      bonds[i - 1] += kron_right(s.op);
    }
  }
  return bonds;
}

}  // namespace aqs
