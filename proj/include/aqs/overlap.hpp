#pragma once

#include <random>
#include <vector>

#include "aqs/dense.hpp"
#include "aqs/model.hpp"
#include "aqs/mps.hpp"

namespace aqs {

enum class OverlapKind { direct_oracle, forward_backward, single_ancilla_e2, bell_pair };

struct OverlapEstimate {
  double value = 0.0;
  OverlapKind kind = OverlapKind::direct_oracle;
  int samples = 0;  // 0 = noiseless analytic value
  double std_err = 0.0;
};

// Spectral measure of a state: energies E_j carrying population |<E_j|psi>|^2
// (degenerate levels merged). alpha, E^2 and the ancilla density matrix are
// functions of this measure alone, so protocol code computes it once per
// (state, H) pair and evaluates tau points cheaply.
struct SpectralWeights {
  Eigen::VectorXd energies;
  Eigen::VectorXd weights;
};

SpectralWeights spectral_weights(const DenseState& state, const HamiltonianTerms& terms);

cplx alpha_from_weights(const SpectralWeights& w, double tau);

double e2_exact(const SpectralWeights& w);  // sum of squared populations

// <psi| exp(-i H tau) |psi>
cplx alpha(const DenseState& state, const HamiltonianTerms& terms, double tau);
cplx alpha(const Mps& state, const HamiltonianTerms& terms, double tau, double dt = 1.0 / 16.0,
           int trotter_substeps = 2);

// tau = pi * l / delta_estimate with l uniform on {1..k_max}
double sample_tau(double delta_estimate, int k_max, std::mt19937_64& rng);

double e2_average(const DenseState& state, const HamiltonianTerms& terms,
                  const std::vector<double>& taus);
double e2_average(const Mps& state, const HamiltonianTerms& terms, const std::vector<double>& taus,
                  double dt = 1.0 / 16.0, int trotter_substeps = 2);

// certified lower bound on the largest population from E^2; trivial (0) below 1/2
double ground_population_bound(double e2);

double bell_expectation(double alpha_abs2);

Mat2 ancilla_density_matrix(const DenseState& state, const HamiltonianTerms& terms, double tau);

OverlapEstimate measure_overlap(double true_expectation, int samples, std::mt19937_64& rng,
                                OverlapKind kind = OverlapKind::bell_pair);

// Full (N+1)-qubit interferometric circuit; dense cross-check for alpha.
cplx explicit_ancilla_reference(const DenseState& state, const HamiltonianTerms& terms,
                                double tau);

}  // namespace aqs
