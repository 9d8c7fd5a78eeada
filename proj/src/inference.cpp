#include "aqs/inference.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_gamma.h>

#include <cmath>
#include <stdexcept>

namespace aqs {

namespace {

void check_posterior(const BetaPosterior& post) {
  if (!(post.a > 0.0) || !(post.b > 0.0))
    throw std::invalid_argument("beta posterior: a, b must be positive");
}

}  // namespace

double beta_mean(const BetaPosterior& post) {
  check_posterior(post);
  return post.a / (post.a + post.b);
}

double beta_variance(const BetaPosterior& post) {
  check_posterior(post);
  const double s = post.a + post.b;
  return post.a * post.b / (s * s * (s + 1.0));
}

BetaPosterior update(const BetaPosterior& post, bool success) {
  check_posterior(post);
  return success ? BetaPosterior{post.a + 1.0, post.b} : BetaPosterior{post.a, post.b + 1.0};
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("incomplete beta: a, b must be positive");
  if (!(x >= 0.0) || !(x <= 1.0))
    throw std::invalid_argument("incomplete beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  gsl_sf_result res;
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  const int status = gsl_sf_beta_inc_e(a, b, x, &res);
  gsl_set_error_handler(old);
  if (status == GSL_EUNDRFLW) return 0.0;
  if (status != GSL_SUCCESS) throw std::runtime_error("incomplete beta: evaluation failed");
  return res.val;
}

AlphaErrors alpha_errors(const BetaPosterior& post, double h0, double epsilon) {
  check_posterior(post);
  if (epsilon < 0.0) throw std::invalid_argument("alpha_errors: epsilon must be >= 0");
  if (!(h0 - epsilon > 0.0) || !(h0 + epsilon < 1.0))
    throw std::invalid_argument("alpha_errors: [h0 - eps, h0 + eps] must lie inside (0, 1)");
  AlphaErrors err;
  err.left = regularized_incomplete_beta(post.a, post.b, h0 - epsilon);
  err.right = 1.0 - regularized_incomplete_beta(post.a, post.b, h0 + epsilon);
  return err;
}

DecisionResult decide(const std::function<bool()>& draw_outcome, double h0, double epsilon,
                      double alpha_threshold, int max_samples, BetaPosterior prior) {
  if (!(alpha_threshold > 0.0) || !(alpha_threshold <= 0.5))
    throw std::invalid_argument("decide: alpha_threshold must lie in (0, 0.5]");
  if (max_samples < 1) throw std::invalid_argument("decide: max_samples must be >= 1");
  if (!draw_outcome) throw std::invalid_argument("decide: missing outcome source");
  DecisionResult res;
  res.posterior = prior;
  alpha_errors(prior, h0, epsilon);  // validate the test geometry up front
  res.trace.reserve(static_cast<std::size_t>(max_samples));
  for (int i = 0; i < max_samples; ++i) {
    const bool x = draw_outcome();
    res.posterior = update(res.posterior, x);
    const AlphaErrors err = alpha_errors(res.posterior, h0, epsilon);
    res.trace.push_back({x ? 1 : 0, res.posterior.a, res.posterior.b, err.left, err.right});
    res.samples_used = i + 1;
    if (err.left < alpha_threshold) {
      res.decision = Decision::accept;
      return res;
    }
    if (err.right < alpha_threshold) {
      res.decision = Decision::reject;
      return res;
    }
  }
  res.decision = Decision::undecided;
  return res;
}

int hoeffding_samples(double epsilon, double eta, double range) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw std::invalid_argument("hoeffding_samples: epsilon outside (0, 1)");
  if (!(eta > 0.0) || !(eta < 1.0))
    throw std::invalid_argument("hoeffding_samples: eta outside (0, 1)");
  if (!(range > 0.0)) throw std::invalid_argument("hoeffding_samples: range must be positive");
  const double m = 0.5 * range * range * std::log(1.0 / eta) / (epsilon * epsilon);
  return static_cast<int>(std::ceil(m - 1e-12));
}

}  // namespace aqs
