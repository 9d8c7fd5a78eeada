#pragma once

#include <vector>

#include "aqs/dense.hpp"
#include "aqs/model.hpp"
#include "aqs/mps.hpp"

namespace aqs {

struct DmrgResult {
  double energy = 0.0;
  Mps state;
  bool converged = false;
  double last_delta = 0.0;      // energy change of the final sweep
  int sweeps_used = 0;
  std::vector<double> sweep_energies;  // one entry per completed sweep
};

// Two-site DMRG with SVD truncation. Sweeps until the per-sweep energy change
// drops below tol or `sweeps` full sweeps ran; non-convergence is reported via
// the result, not thrown. Energy is variational.
DmrgResult dmrg_ground_state(const HamiltonianTerms& terms, int max_bond, int sweeps,
                             double tol);

// Same solver with a penalty projecting out the given states; with the ground
// state passed in, converges to the lowest orthogonal state (the first gap).
DmrgResult dmrg_lowest_orthogonal(const HamiltonianTerms& terms, int max_bond, int sweeps,
                                  double tol, const std::vector<const Mps*>& project_out);

// Gap curve for chains beyond the dense-oracle cap: ground + penalized run per
// grid point.
std::vector<GapPoint> dmrg_gap_profile(const ModelParams& params, const std::vector<double>& grid,
                                       int max_bond, int sweeps, double tol);

}  // namespace aqs
