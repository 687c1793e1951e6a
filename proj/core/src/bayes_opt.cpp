#include "detectkit/bayes_opt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "detectkit/classifiers.hpp"
#include "detectkit/error.hpp"
#include "detectkit/random.hpp"

namespace detectkit {

namespace {

constexpr std::size_t kInitialPoints = 5;
constexpr std::size_t kCandidates = 1001;
constexpr double kNoise = 1e-6;
constexpr double kXi = 0.001;
constexpr double kLengthScales[] = {0.05, 0.1, 0.2, 0.3, 0.5};

double kernel(double a, double b, double length_scale) {
  const double d = (a - b) / length_scale;
  return std::exp(-0.5 * d * d);
}

// Lower-triangular Cholesky factor, row-major n x n.
std::vector<double> cholesky(std::span<const double> xs, double length_scale, double noise) {
  const std::size_t n = xs.size();
  std::vector<double> l(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = kernel(xs[i], xs[j], length_scale) + (i == j ? noise : 0.0);
      for (std::size_t k = 0; k < j; ++k) sum -= l[i * n + k] * l[j * n + k];
      if (i == j) {
        l[i * n + i] = std::sqrt(std::max(sum, 1e-300));
      } else {
        l[i * n + j] = sum / l[j * n + j];
      }
    }
  }
  return l;
}

std::vector<double> forward_solve(const std::vector<double>& l, std::span<const double> b) {
  const std::size_t n = b.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = b[i];
    for (std::size_t k = 0; k < i; ++k) sum -= l[i * n + k] * y[k];
    y[i] = sum / l[i * n + i];
  }
  return y;
}

std::vector<double> backward_solve(const std::vector<double>& l, std::span<const double> y) {
  const std::size_t n = y.size();
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double sum = y[i];
    for (std::size_t k = i + 1; k < n; ++k) sum -= l[k * n + i] * x[k];
    x[i] = sum / l[i * n + i];
  }
  return x;
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

GpPosterior gp_posterior(std::span<const double> xs, std::span<const double> ys,
                         std::span<const double> query, double length_scale, double noise) {
  const std::size_t n = xs.size();
  const auto l = cholesky(xs, length_scale, noise);
  const auto alpha = backward_solve(l, forward_solve(l, ys));
  GpPosterior post;
  post.mean.reserve(query.size());
  post.stddev.reserve(query.size());
  std::vector<double> kstar(n);
  for (double q : query) {
    for (std::size_t i = 0; i < n; ++i) kstar[i] = kernel(q, xs[i], length_scale);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += kstar[i] * alpha[i];
    const auto v = forward_solve(l, kstar);
    double var = 1.0;
    for (double vi : v) var -= vi * vi;
    post.mean.push_back(mean);
    post.stddev.push_back(std::sqrt(std::max(var, 0.0)));
  }
  return post;
}

double gp_log_marginal_likelihood(std::span<const double> xs, std::span<const double> ys,
                                  double length_scale, double noise) {
  const std::size_t n = xs.size();
  const auto l = cholesky(xs, length_scale, noise);
  const auto alpha = backward_solve(l, forward_solve(l, ys));
  double fit = 0.0;
  for (std::size_t i = 0; i < n; ++i) fit += ys[i] * alpha[i];
  double logdet = 0.0;
  for (std::size_t i = 0; i < n; ++i) logdet += std::log(l[i * n + i]);
  return -0.5 * fit - logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

double expected_improvement(double mean, double stddev, double best, double xi) {
  if (stddev <= 0.0) return std::max(0.0, mean - best - xi);
  const double z = (mean - best - xi) / stddev;
  return (mean - best - xi) * normal_cdf(z) + stddev * normal_pdf(z);
}

double acquisition_step(double lo, double hi) {
  return (hi - lo) / static_cast<double>(kCandidates - 1);
}

BayesOptResult bayes_maximize(const std::function<double(double)>& objective, double lo,
                              double hi, std::size_t budget, std::uint64_t seed) {
  if (budget < kInitialPoints) {
    throw Error(ErrorCode::InvalidArgument, "Bayesian optimization budget must be >= 5");
  }
  if (!(hi > lo)) throw Error(ErrorCode::InvalidArgument, "empty search interval");

  BayesOptResult result;
  std::vector<double> unit;  // evaluated points on [0,1]
  auto evaluate = [&](double u) {
    const double x = lo + u * (hi - lo);
    const double y = objective(x);
    if (!std::isfinite(y)) throw Error(ErrorCode::InvalidArgument, "objective returned a non-finite value");
    unit.push_back(u);
    result.xs.push_back(x);
    result.ys.push_back(y);
  };

  Rng rng(derive_seed(seed, "bayes_opt.init"));
  for (std::size_t i = 0; i < kInitialPoints; ++i) {
    evaluate((static_cast<double>(i) + rng.uniform()) / static_cast<double>(kInitialPoints));
  }

  std::vector<double> candidates(kCandidates);
  for (std::size_t i = 0; i < kCandidates; ++i) {
    candidates[i] = static_cast<double>(i) / static_cast<double>(kCandidates - 1);
  }

  while (result.xs.size() < budget) {
    const double n = static_cast<double>(result.ys.size());
    const double mean = std::accumulate(result.ys.begin(), result.ys.end(), 0.0) / n;
    double var = 0.0;
    for (double y : result.ys) var += (y - mean) * (y - mean);
    const double sd = var > 0.0 ? std::sqrt(var / n) : 1.0;
    std::vector<double> z(result.ys.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = (result.ys[i] - mean) / sd;
    const double best = *std::max_element(z.begin(), z.end());

    double length_scale = kLengthScales[0];
    double best_lml = -std::numeric_limits<double>::infinity();
    for (double ls : kLengthScales) {
      const double lml = gp_log_marginal_likelihood(unit, z, ls, kNoise);
      if (lml > best_lml) {
        best_lml = lml;
        length_scale = ls;
      }
    }

    const auto post = gp_posterior(unit, z, candidates, length_scale, kNoise);
    auto is_new = [&](double u) {
      return std::none_of(unit.begin(), unit.end(),
                          [&](double seen) { return std::abs(seen - u) < 1e-12; });
    };
    std::size_t pick = kCandidates;
    double best_ei = 1e-12;
    for (std::size_t i = 0; i < kCandidates; ++i) {
      const double ei = expected_improvement(post.mean[i], post.stddev[i], best, kXi);
      if (ei > best_ei && is_new(candidates[i])) {
        best_ei = ei;
        pick = i;
      }
    }
    if (pick == kCandidates) {
      // Improvement is negligible everywhere: sample where the surrogate is least certain.
      double widest = -1.0;
      for (std::size_t i = 0; i < kCandidates; ++i) {
        if (post.stddev[i] > widest && is_new(candidates[i])) {
          widest = post.stddev[i];
          pick = i;
        }
      }
    }
    if (pick == kCandidates) break;
    evaluate(candidates[pick]);
  }

  std::size_t best_idx = 0;
  for (std::size_t i = 1; i < result.ys.size(); ++i) {
    if (result.ys[i] > result.ys[best_idx]) best_idx = i;
  }
  result.best_x = result.xs[best_idx];
  result.best_y = result.ys[best_idx];
  return result;
}

double tune_gnb(const Dataset& data, std::size_t budget, std::uint64_t seed) {
  if (budget < kInitialPoints) throw Error(ErrorCode::InvalidArgument, "tune_gnb budget must be >= 5");
  data.validate(true);

  // Stratified 80/20 split.
  std::vector<std::size_t> fit_rows;
  std::vector<std::size_t> val_rows;
  Rng rng(derive_seed(seed, "tune_gnb.split"));
  for (int label : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.labels[i] == label) members.push_back(i);
    }
    rng.shuffle(members);
    const std::size_t n_val = std::max<std::size_t>(1, members.size() / 5);
    if (members.size() < 2) {
      throw Error(ErrorCode::DegenerateSplit, "each class needs >= 2 samples for tuning");
    }
    val_rows.insert(val_rows.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_val));
    fit_rows.insert(fit_rows.end(), members.begin() + static_cast<std::ptrdiff_t>(n_val), members.end());
  }
  std::sort(fit_rows.begin(), fit_rows.end());
  std::sort(val_rows.begin(), val_rows.end());
  const Dataset fit = data.subset(fit_rows);
  const Dataset val = data.subset(val_rows);

  auto validation_f1 = [&](double smoothing) {
    const Model model = train_gnb(fit, smoothing);
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < val.size(); ++i) {
      const bool predicted = predict(model, val.features.row(i)).label == Label::Machine;
      const bool actual = val.labels[i] == 1;
      tp += predicted && actual;
      fp += predicted && !actual;
      fn += !predicted && actual;
    }
    const double denom = static_cast<double>(2 * tp + fp + fn);
    return denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
  };

  return tune_var_smoothing(validation_f1, budget, seed);
}

double tune_var_smoothing(const std::function<double(double)>& objective, std::size_t budget,
                          std::uint64_t seed) {
  const auto result = bayes_maximize(
      [&](double log_smoothing) { return objective(std::pow(10.0, log_smoothing)); }, -12.0, 0.0,
      budget, seed);
  return std::clamp(std::pow(10.0, result.best_x), 1e-12, 1.0);
}

}  // namespace detectkit
