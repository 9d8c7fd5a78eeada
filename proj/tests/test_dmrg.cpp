#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aqs/dmrg.hpp"
#include "oracle_helpers.hpp"

using namespace aqs;

namespace {

HamiltonianTerms zzxz_at(int n, double J, double h, double g, double s) {
  ModelParams p{.num_sites = n, .coupling_J = J, .field_h = h, .field_g = g};
  auto [h0, ht] = build_zzxz(p);
  return interpolate(h0, ht, s);
}

}  // namespace

TEST_CASE("ground energy matches dense oracle at N=8") {
  auto terms = zzxz_at(8, 2.1, 0.9, 0.5, 0.6);
  auto res = dmrg_ground_state(terms, 32, 12, 1e-11);
  auto es = oracle::eigh(oracle::zzxz_interp(8, 2.1 * 0.6, 0.9, 0.5 * 0.6, 1.0));
  CHECK(res.converged);
  CHECK(res.energy == doctest::Approx(es.eigenvalues()[0]).epsilon(1e-9));
  CHECK(res.energy >= es.eigenvalues()[0] - 1e-10);  // variational
  CHECK(std::abs(overlap(res.state, res.state) - 1.0) < 1e-10);
  CHECK(energy(res.state, terms) == doctest::Approx(res.energy).epsilon(1e-9));
}

TEST_CASE("decoupled chain: product ground state") {
  auto terms = zzxz_at(3, 0.0, 1.0, 0.0, 1.0);
  auto res = dmrg_ground_state(terms, 8, 8, 1e-11);
  CHECK(res.energy == doctest::Approx(-3.0).epsilon(1e-10));
  Eigen::Vector2cd minus;
  minus << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  auto prod = product_state(std::vector<Eigen::Vector2cd>(3, minus));
  CHECK(std::abs(overlap(res.state, prod)) >= 1.0 - 1e-8);
}

TEST_CASE("sweep energies decrease monotonically without truncation") {
  auto terms = zzxz_at(8, 3.0, 1.0, 1.0, 0.4);
  auto res = dmrg_ground_state(terms, 16, 6, 0.0);  // full rank at N=8, never converges early
  CHECK(!res.converged);
  REQUIRE(res.sweep_energies.size() == 6);
  for (std::size_t k = 0; k + 1 < res.sweep_energies.size(); ++k)
    CHECK(res.sweep_energies[k + 1] <= res.sweep_energies[k] + 1e-12);
}

TEST_CASE("oracle agreement holds at N=12 near the gap minimum") {
  auto terms = zzxz_at(12, 3.0, 1.0, 1.0, 0.4);
  auto res = dmrg_ground_state(terms, 32, 12, 1e-11);
  auto pairs = exact_spectrum(terms, 1);
  CHECK(res.energy == doctest::Approx(pairs[0].value).epsilon(1e-8));
}

TEST_CASE("penalized run finds the first excited state") {
  for (double s : {0.5, 0.9}) {
    auto terms = zzxz_at(8, 3.0, 1.0, 1.0, s);
    auto gs = dmrg_ground_state(terms, 32, 12, 1e-12);
    auto ex = dmrg_lowest_orthogonal(terms, 32, 14, 1e-12, {&gs.state});
    auto es = oracle::eigh(oracle::zzxz_interp(8, 3.0 * s, 1.0, s, 1.0));
    CHECK(gs.energy == doctest::Approx(es.eigenvalues()[0]).epsilon(1e-8));
    CHECK(ex.energy == doctest::Approx(es.eigenvalues()[1]).epsilon(5e-7));
    CHECK(std::abs(overlap(gs.state, ex.state)) < 1e-5);
  }
}

TEST_CASE("gap profile through the penalized solver matches the oracle") {
  ModelParams p{.num_sites = 8, .coupling_J = 3.0, .field_h = 1.0, .field_g = 1.0};
  auto gp = dmrg_gap_profile(p, {0.34}, 32, 12, 1e-12);
  auto oracle_gp = gap_profile(p, {0.34});
  CHECK(gp[0].gap == doctest::Approx(oracle_gp[0].gap).epsilon(1e-6));
}

TEST_CASE("argument validation and non-convergence reporting") {
  auto terms = zzxz_at(6, 1.0, 1.0, 0.0, 0.5);
  CHECK_THROWS_AS(dmrg_ground_state(terms, 1, 4, 1e-8), std::invalid_argument);
  CHECK_THROWS_AS(dmrg_ground_state(terms, 8, 0, 1e-8), std::invalid_argument);
  auto res = dmrg_ground_state(terms, 8, 2, 0.0);
  CHECK(!res.converged);
  CHECK(res.sweeps_used == 2);
}
