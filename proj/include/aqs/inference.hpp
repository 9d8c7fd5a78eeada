#pragma once

#include <functional>
#include <vector>

namespace aqs {

// Conjugate prior/posterior for Bernoulli outcome streams.
struct BetaPosterior {
  double a = 1.0;
  double b = 1.0;
};

double beta_mean(const BetaPosterior& post);
double beta_variance(const BetaPosterior& post);

BetaPosterior update(const BetaPosterior& post, bool success);

// I_x(a, b), regularized incomplete beta (continued-fraction evaluation).
double regularized_incomplete_beta(double a, double b, double x);

struct AlphaErrors {
  double left;   // posterior mass below h0 - epsilon: evidence against "p > h0"
  double right;  // posterior mass above h0 + epsilon: evidence against "p < h0"
};

AlphaErrors alpha_errors(const BetaPosterior& post, double h0, double epsilon);

enum class Decision { accept, reject, undecided };

struct DecisionStep {
  int outcome;
  double a, b;
  double left_err, right_err;
};

struct DecisionResult {
  Decision decision = Decision::undecided;
  int samples_used = 0;
  BetaPosterior posterior;
  std::vector<DecisionStep> trace;
};

// Sequential test of "overlap exceeds h0": draw outcomes until one tail error
// drops below alpha_threshold (small left tail -> accept, small right tail ->
// reject) or the sample budget runs out (-> undecided; tighten the threshold
// and rerun). Default prior leans towards success-dominated streams.
DecisionResult decide(const std::function<bool()>& draw_outcome, double h0, double epsilon,
                      double alpha_threshold, int max_samples,
                      BetaPosterior prior = {10.0, 2.0});

// Chernoff-Hoeffding sample count guaranteeing |mean - estimate| <= epsilon
// with failure probability eta, for outcomes spanning `range` (2 for +-1).
int hoeffding_samples(double epsilon, double eta, double range = 2.0);

}  // namespace aqs
