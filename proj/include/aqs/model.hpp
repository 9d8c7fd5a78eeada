#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

namespace aqs {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;

enum class Boundary { open };
enum class RampKind { linear, smooth };

// ZZXZ chain: H_T = sum_i J sz_i sz_{i+1} + h sx_i + g sz_i, open boundaries.
// H_0 = sum_i h sx_i.
struct ModelParams {
  int num_sites = 2;
  double coupling_J = 1.0;
  double field_h = 1.0;
  double field_g = 0.0;
  Boundary boundary = Boundary::open;
};

struct SingleSiteTerm {
  int site;
  Mat2 op;
};

// op acts on (site, site+1); index order |p_site p_{site+1}>, left qubit slow.
struct TwoSiteTerm {
  int site;
  Mat4 op;
};

struct HamiltonianTerms {
  int num_sites = 0;
  std::vector<SingleSiteTerm> single_site_terms;
  std::vector<TwoSiteTerm> two_site_terms;
};

const Mat2& pauli_id();
const Mat2& pauli_x();
const Mat2& pauli_y();
const Mat2& pauli_z();

void validate_params(const ModelParams& p);

// Hermiticity within 1e-12 max-norm, nearest-neighbor sites only.
void validate_terms(const HamiltonianTerms& t);

std::pair<HamiltonianTerms, HamiltonianTerms> build_zzxz(const ModelParams& p);

// (1-lam)*h0 + lam*ht, term by term. lam must lie in [0,1].
HamiltonianTerms interpolate(const HamiltonianTerms& h0, const HamiltonianTerms& ht,
                             double lam);

double ramp_value(RampKind kind, double s, double lam0, double lamf);

// Nearest-neighbor bond Hamiltonians h_b[i] on (i,i+1) with single-site terms
// absorbed symmetrically: half weight to each adjacent bond, full weight where
// a site touches only one bond. sum_b h_b reproduces the full Hamiltonian.
std::vector<Mat4> bond_hamiltonians(const HamiltonianTerms& t);

}  // namespace aqs
