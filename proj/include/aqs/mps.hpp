#pragma once

#include <array>
#include <complex>
#include <vector>

#include "aqs/model.hpp"

namespace aqs {

inline constexpr double default_svd_cutoff = 1e-10;

// Matrix product state in mixed-canonical form. Site tensors are stored as
// one (left_bond x right_bond) matrix per physical index; sites left of
// `center` are left-isometries, sites right of it right-isometries. The
// stored tensors hold a unit-norm state: every factor removed by truncation
// or renormalization is accumulated in norm_log, so |exp(norm_log) - 1| is
// the accumulated norm error of a run.
struct Mps {
  int num_sites = 0;
  int center = 0;
  int max_bond = 64;
  double cum_truncation = 0.0;
  double norm_log = 0.0;
  std::vector<std::array<Eigen::MatrixXcd, 2>> tensors;

  int bond_dim(int bond) const;  // bond i sits between sites i-1 and i; 0 and N are the edges
};

Mps product_state(const std::vector<Eigen::Vector2cd>& local_states, int max_bond = 64);

// Moves the orthogonality center to `site` by QR sweeps. Norm factors picked
// up on the way are absorbed into the center tensor, not norm_log.
void move_center(Mps& state, int site);

// Contracts the gate into sites (site, site+1) — left qubit is the slow index
// of the 4x4 — and splits back by SVD, keeping at most chi_max singular
// values and dropping those below svd_cutoff. The kept spectrum is
// renormalized; returns the discarded squared weight (also added to
// cum_truncation, with the renormalization factor logged in norm_log).
// Center ends at site+1.
double apply_two_site_gate(Mps& state, const Mat4& gate, int site, int chi_max,
                           double svd_cutoff);

void apply_single_site(Mps& state, const Mat2& op, int site);

std::complex<double> overlap(const Mps& a, const Mps& b);

std::complex<double> expectation_single_site(const Mps& state, const Mat2& op, int site);

double energy(const Mps& state, const HamiltonianTerms& terms);

// Full canonicalization sweep; the state comes back unit-norm with the
// absorbed factor added to norm_log. Throws on zero-norm input.
void canonicalize(Mps& state);

Eigen::VectorXcd mps_to_dense(const Mps& state);  // num_sites <= 20

// Sequential-SVD compression of a dense amplitude vector (site 0 = most
// significant bit, matching the dense backend). The overall norm lands in
// norm_log; exact round trip for max_bond >= 2^(N/2) and svd_cutoff = 0.
Mps dense_to_mps(const Eigen::VectorXcd& amp, int num_sites, int max_bond,
                 double svd_cutoff = 0.0);

}  // namespace aqs
