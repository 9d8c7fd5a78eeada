#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "aqs/model.hpp"

namespace aqs {

// Statevector backend. Index convention: site 0 is the most significant bit,
// so basis index b encodes |b_0 b_1 ... b_{n-1}> and matches the MPS site order.
struct DenseState {
  int n = 0;
  Eigen::VectorXcd amp;
  std::int64_t dim() const { return amp.size(); }
};

DenseState dense_product_state(const std::vector<Eigen::Vector2cd>& local_states);
cplx dense_overlap(const DenseState& a, const DenseState& b);

// One-off applications used by circuits, gates and observables.
void dense_apply_single_site(DenseState& s, const Mat2& op, int site);
void dense_apply_two_site(DenseState& s, const Mat4& op, int site);  // acts on (site, site+1)
cplx dense_expectation_single_site(const DenseState& s, const Mat2& op, int site);

// Cached matrix-free applier for one HamiltonianTerms value.
// Splits the operator into a diagonal vector plus generic off-diagonal pieces.
class DenseOp {
 public:
  DenseOp() = default;
  explicit DenseOp(const HamiltonianTerms& terms);

  int num_sites() const { return n_; }
  std::int64_t dim() const { return static_cast<std::int64_t>(1) << n_; }

  // y += w * H x  (y must be pre-sized; x and y distinct)
  void apply_add(const Eigen::VectorXcd& x, Eigen::VectorXcd& y, double w = 1.0) const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;

  // Cheap upper bound on the spectral radius (sum of term norms).
  double norm_bound() const { return norm_bound_; }

 private:
  struct OffSingle {
    int site;
    cplx a01, a10;
  };
  struct OffTwoEntry {
    int r, c;  // 4x4 entries with r != c
    cplx v;
  };
  struct OffTwo {
    int site;
    std::vector<OffTwoEntry> entries;
  };
  int n_ = 0;
  Eigen::VectorXd diag_;
  std::vector<OffSingle> off_singles_;
  std::vector<OffTwo> off_twos_;
  double norm_bound_ = 0.0;
};

// Interpolated applier (1-lam)*h0 + lam*ht without rebuilding term caches.
class DensePath {
 public:
  DensePath(const HamiltonianTerms& h0, const HamiltonianTerms& ht);
  int num_sites() const { return op0_.num_sites(); }
  void apply_add(const Eigen::VectorXcd& x, Eigen::VectorXcd& y, double lam) const;
  double norm_bound() const;

 private:
  DenseOp op0_, op1_;
};

struct EigenPair {
  double value;
  Eigen::VectorXcd vector;
};

struct EigenSystem {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXcd vectors; // columns
};

// k lowest eigenpairs. Dense solve for dim <= 256 or k > 16, Lanczos with
// full reorthogonalization otherwise. Hard cap num_sites <= 14.
std::vector<EigenPair> exact_spectrum(const HamiltonianTerms& terms, int k);

// Full spectrum; capped at num_sites <= 12 (dense eigensolver).
EigenSystem full_spectrum(const HamiltonianTerms& terms);

struct GapPoint {
  double s;
  double gap;
  bool degenerate;  // E1 - E0 < 1e-10, gap reported as 0
};

std::vector<GapPoint> gap_profile(const ModelParams& params, const std::vector<double>& grid);

// <v|R|v> where R reverses the site order. H(s) commutes with R for the
// uniform open chain, so evolutions started in the reflection-even sector
// stay there and cannot see reflection-odd excited states.
double reflection_parity(const Eigen::VectorXcd& v, int n);

// Gap to the lowest excited state sharing the ground state's reflection
// parity: the smallest gap an evolution from the reflection-even product
// state can actually probe. At even N the antiferromagnetic phase has a
// reflection-odd quasi-degenerate partner that raw E1-E0 reports instead.
std::vector<GapPoint> reachable_gap_profile(const ModelParams& params,
                                            const std::vector<double>& grid);

// Lanczos with full reorthogonalization for the k lowest eigenpairs of a
// Hermitian operator given only by its action. Deterministic start vector.
using ApplyFn = std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>;
std::vector<EigenPair> lanczos_lowest(const ApplyFn& apply, std::int64_t dim, int k,
                                      double tol = 1e-12, int max_iter = 600,
                                      std::uint64_t seed = 12345);

// v <- exp(-i t H) v via a Lanczos-Krylov approximation, splitting t into
// substeps when t * norm_bound is large. Relative tolerance ~1e-12.
void krylov_expm_apply(const ApplyFn& apply, double norm_bound, double t,
                       Eigen::VectorXcd& v, int max_krylov = 40);

// Evolve a dense state along the interpolation path with piecewise-constant
// midpoint Hamiltonians: steps of size dt (remainder last), each applied as
// exp(-i dt H(lam_mid)) with lam_mid from the ramp at the step midpoint.
// This is the matrix-exponential reference evolution (no Trotter splitting).
void dense_evolve_interval(DenseState& state, const DensePath& path, RampKind ramp,
                           double s_start, double s_end, double time, double dt);

}  // namespace aqs
