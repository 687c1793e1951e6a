#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace detectkit {

struct BayesOptResult {
  double best_x = 0.0;
  double best_y = 0.0;
  std::vector<double> xs;  // evaluation order
  std::vector<double> ys;
};

// One-dimensional Gaussian-process Bayesian optimization (maximization).
// Squared-exponential kernel on inputs rescaled to [0,1], standardized
// outputs, length scale chosen by marginal likelihood from a fixed grid, and
// expected improvement maximized over a dense candidate grid. The first five
// evaluations are seeded stratified draws; ties keep the first observation.
BayesOptResult bayes_maximize(const std::function<double(double)>& objective, double lo,
                              double hi, std::size_t budget, std::uint64_t seed);

// Candidate grid spacing of the acquisition search over [lo, hi].
double acquisition_step(double lo, double hi);

struct GpPosterior {
  std::vector<double> mean;
  std::vector<double> stddev;
};

// Posterior at `query` for standardized targets; exposed for testing.
GpPosterior gp_posterior(std::span<const double> xs, std::span<const double> ys,
                         std::span<const double> query, double length_scale, double noise);
double gp_log_marginal_likelihood(std::span<const double> xs, std::span<const double> ys,
                                  double length_scale, double noise);

// Maximizes objective(var_smoothing) over log10(var_smoothing) in [-12, 0];
// the search behind tune_gnb. Result clamped to [1e-12, 1].
double tune_var_smoothing(const std::function<double(double)>& objective, std::size_t budget,
                          std::uint64_t seed);

double expected_improvement(double mean, double stddev, double best, double xi);

}  // namespace detectkit
