#pragma once

#include <vector>

#include "aqs/dense.hpp"
#include "aqs/model.hpp"
#include "aqs/mps.hpp"

namespace aqs {

enum class Direction { forward, backward };

// Chunked adiabatic schedule: L path segments of length s_bar_i (summing to
// one; zero length = pure rotation) evolved for time T_i each, Trotterized
// with step dt and K symmetric substeps.
struct Schedule {
  std::vector<double> chunk_lengths;
  std::vector<double> chunk_times;
  RampKind ramp = RampKind::linear;
  double dt = 1.0 / 16.0;
  int trotter_substeps = 2;
};

void validate_schedule(const Schedule& sched);

Schedule naive_schedule(int num_chunks, double total_time, RampKind ramp = RampKind::linear);

// Slower reverse traversal for overlap protocols: same chunks, times scaled.
Schedule make_backward_schedule(const Schedule& forward, double factor = 4.0);

// s_0 = 0, s_L = 1 cumulative chunk boundaries
std::vector<double> chunk_boundaries(const Schedule& sched);

Mat4 bond_gate(const Mat4& bond_h, double time);  // exp(-i * time * h)

// K-fold symmetric even/odd bond split of exp(-i dt H) with the neighbouring
// half-steps merged.
void trotter_step(Mps& state, const HamiltonianTerms& terms, double dt, int K);

// Trotter evolution along the path segment [s_start, s_end] (s_end < s_start
// runs the interpolation parameter backwards) taking ceil(time/dt) steps, the
// last one carrying the remainder. The coupling at each step is the ramp
// evaluated at the step-midpoint position; s_start == s_end is a rotation
// under the fixed Hamiltonian at that point.
void evolve_chunk(Mps& state, const HamiltonianTerms& h0, const HamiltonianTerms& ht,
                  double s_start, double s_end, double time, const Schedule& sched);

// exact-exponential twin of the above on the dense backend
void evolve_chunk(DenseState& state, const DensePath& path, double s_start, double s_end,
                  double time, const Schedule& sched);

// Composes chunks 1..stop_chunk (forward) or stop_chunk..1 with reversed
// endpoints (backward); stop_chunk is a 1-based count, -1 = all chunks.
Mps evolve_schedule(Mps psi, const HamiltonianTerms& h0, const HamiltonianTerms& ht,
                    const Schedule& sched, Direction direction, int stop_chunk = -1);

DenseState evolve_schedule(DenseState psi, const DensePath& path, const Schedule& sched,
                           Direction direction, int stop_chunk = -1);

}  // namespace aqs
