#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "aqs/dense.hpp"
#include "aqs/model.hpp"
#include "oracle_helpers.hpp"

using namespace aqs;

namespace {

HamiltonianTerms zzxz_at(int n, double J, double h, double g, double s) {
  ModelParams p{.num_sites = n, .coupling_J = J, .field_h = h, .field_g = g};
  auto [h0, ht] = build_zzxz(p);
  return interpolate(h0, ht, s);
}

}  // namespace

TEST_CASE("DenseOp matches the kron oracle action") {
  auto terms = zzxz_at(6, 2.3, 0.9, 0.7, 0.41);
  DenseOp op(terms);
  oracle::Mat H = oracle::zzxz_interp(6, 2.3, 0.9, 0.7, 0.41);
  for (unsigned seed : {1u, 2u, 3u}) {
    oracle::Vec v = oracle::random_state(64, seed);
    CHECK((op.apply(v) - H * v).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("generic two-site off-diagonal entries are applied correctly") {
  // exercise the off-diagonal two-site path that the ZZXZ family never hits
  HamiltonianTerms t;
  t.num_sites = 3;
  Mat4 flipflop = Mat4::Zero();
  flipflop(1, 2) = 1.0;  // |01><10| + h.c.
  flipflop(2, 1) = 1.0;
  t.two_site_terms.push_back({0, flipflop});
  t.two_site_terms.push_back({1, 2.0 * flipflop});
  DenseOp op(t);
  oracle::Mat hop(4, 4);
  hop.setZero();
  hop(1, 2) = hop(2, 1) = 1.0;
  oracle::Mat H = oracle::embed(hop, 0, 3) + 2.0 * oracle::embed(hop, 1, 3);
  oracle::Vec v = oracle::random_state(8, 5);
  CHECK((op.apply(v) - H * v).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dense gate application matches kron oracle") {
  DenseState s;
  s.n = 4;
  s.amp = oracle::random_state(16, 11);
  Mat2 u2;
  u2 << cplx(0, 1) / std::sqrt(2.0), 1 / std::sqrt(2.0), -1 / std::sqrt(2.0),
      cplx(0, -1) / std::sqrt(2.0);
  DenseState t = s;
  dense_apply_single_site(t, u2, 2);
  oracle::Mat u2o(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) u2o(i, j) = u2(i, j);
  CHECK((t.amp - oracle::embed(u2o, 2, 4) * s.amp).cwiseAbs().maxCoeff() < 1e-12);

  Mat4 cz = Mat4::Identity();
  cz(3, 3) = -1;
  DenseState q = s;
  dense_apply_two_site(q, cz, 1);
  oracle::Mat czo = oracle::Mat::Identity(4, 4);
  czo(3, 3) = -1;
  CHECK((q.amp - oracle::embed(czo, 1, 4) * s.amp).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("exact_spectrum basics") {
  ModelParams p{.num_sites = 2, .coupling_J = 0.0, .field_h = 1.0, .field_g = 0.0};
  auto [h0, ht] = build_zzxz(p);
  auto pairs = exact_spectrum(h0, 1);
  CHECK(pairs[0].value == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(std::abs(pairs[0].vector.dot(oracle::minus_state(2))) == doctest::Approx(1.0));

  auto terms = zzxz_at(8, 3.0, 1.0, 1.0, 0.34);
  auto two = exact_spectrum(terms, 2);
  CHECK(two[1].value > two[0].value);
  // self-consistency <GS|H|GS> = E0
  DenseOp op(terms);
  cplx e = two[0].vector.dot(op.apply(two[0].vector));
  CHECK(std::abs(e - cplx(two[0].value, 0)) < 1e-10);

  HamiltonianTerms big;
  big.num_sites = 15;
  CHECK_THROWS(exact_spectrum(big, 1));
}

TEST_CASE("full_spectrum and exact_spectrum agree at N=6") {
  auto terms = zzxz_at(6, 1.4, 1.1, 0.3, 0.66);
  auto sys = full_spectrum(terms);
  auto es = oracle::eigh(oracle::zzxz_interp(6, 1.4, 1.1, 0.3, 0.66));
  CHECK((sys.values - es.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);
  auto k4 = exact_spectrum(terms, 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(k4[i].value == doctest::Approx(sys.values[i]).epsilon(1e-10));
    CHECK(k4[i].vector.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("lanczos_lowest resolves a doubly degenerate ground space") {
  // classical Ising at s=1, h=g=0: |00..0> and |11..1> are exactly degenerate
  HamiltonianTerms t;
  t.num_sites = 6;
  Mat4 zz = Mat4::Zero();
  zz(0, 0) = zz(3, 3) = 1;
  zz(1, 1) = zz(2, 2) = -1;
  for (int i = 0; i < 5; ++i) t.two_site_terms.push_back({i, -1.0 * zz});
  DenseOp op(t);
  ApplyFn apply = [&op](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { op.apply_add(x, y); };
  auto pairs = lanczos_lowest(apply, 64, 3, 1e-12, 300, 99);
  CHECK(pairs[0].value == doctest::Approx(-5.0).epsilon(1e-10));
  CHECK(pairs[1].value == doctest::Approx(-5.0).epsilon(1e-10));
  CHECK(pairs[2].value > pairs[1].value + 0.5);
  CHECK(std::abs(pairs[0].vector.dot(pairs[1].vector)) < 1e-8);
}

TEST_CASE("lanczos agrees with dense eigh on a mid-path operator") {
  auto terms = zzxz_at(7, 3.0, 1.0, 1.0, 0.5);
  DenseOp op(terms);
  ApplyFn apply = [&op](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { op.apply_add(x, y); };
  auto lcz = lanczos_lowest(apply, 128, 4, 1e-12, 400, 7);
  auto es = oracle::eigh(oracle::zzxz_interp(7, 3.0, 1.0, 1.0, 0.5));
  for (int i = 0; i < 4; ++i)
    CHECK(lcz[i].value == doctest::Approx(es.eigenvalues()[i]).epsilon(1e-10));
}

TEST_CASE("krylov_expm_apply matches eigendecomposition propagation") {
  auto terms = zzxz_at(6, 2.0, 1.0, 0.5, 0.73);
  DenseOp op(terms);
  ApplyFn apply = [&op](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { op.apply_add(x, y); };
  oracle::Mat H = oracle::zzxz_interp(6, 2.0, 1.0, 0.5, 0.73);
  for (double t : {0.0625, 0.9, 7.3, 41.0}) {
    Eigen::VectorXcd v = oracle::random_state(64, 21);
    Eigen::VectorXcd ref = oracle::expm_apply(H, v, t);
    krylov_expm_apply(apply, op.norm_bound(), t, v);
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK((v - ref).norm() < 1e-9);
  }
}

TEST_CASE("dense_evolve_interval equals the per-step expm product") {
  const int n = 5;
  ModelParams p{.num_sites = n, .coupling_J = 2.0, .field_h = 1.0, .field_g = 0.6};
  auto [h0, ht] = build_zzxz(p);
  DensePath path(h0, ht);
  const double time = 1.3, dt = 0.25;  // deliberately non-divisible: remainder step
  DenseState s;
  s.n = n;
  s.amp = oracle::minus_state(n);
  dense_evolve_interval(s, path, RampKind::linear, 0.0, 1.0, time, dt);

  Eigen::VectorXcd ref = oracle::minus_state(n);
  double done = 0;
  const int steps = (int)std::ceil(time / dt - 1e-12);
  for (int m = 0; m < steps; ++m) {
    double step_dt = (m + 1 == steps) ? time - done : dt;
    double smid = (done + step_dt / 2) / time;
    ref = oracle::expm_apply(oracle::zzxz_interp(n, 2.0, 1.0, 0.6, smid), ref, step_dt);
    done += step_dt;
  }
  CHECK((s.amp - ref).norm() < 1e-9);
  CHECK_THROWS(dense_evolve_interval(s, path, RampKind::linear, 0, 1, -1.0, dt));
}

TEST_CASE("dense product state and overlap") {
  std::vector<Eigen::Vector2cd> locs(3);
  for (auto& l : locs) l << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  DenseState minus = dense_product_state(locs);
  CHECK((minus.amp - oracle::minus_state(3)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(std::abs(dense_overlap(minus, minus) - cplx(1, 0)) < 1e-14);
  Eigen::Vector2cd zero_vec = Eigen::Vector2cd::Zero();
  CHECK_THROWS(dense_product_state({zero_vec, zero_vec}));
}
