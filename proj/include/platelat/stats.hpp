#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace platelat::stats {

struct MeanError {
  double mean = 0.0;
  double error = 0.0;
  std::size_t samples = 0;
};

double mean(std::span<const double> xs);

/// Mean with a correlation-aware error from repeated pairwise blocking.
///
/// The naive error of the mean is recomputed after each halving of the series; the first level
/// whose successor agrees within the statistical uncertainty of the estimate is taken as the
/// plateau. Without a plateau the largest level value is returned and `converged` is false.
struct BlockingResult {
  double mean = 0.0;
  double error = 0.0;
  std::size_t samples = 0;
  int level = 0;
  bool converged = false;
  std::vector<double> level_errors;
};
BlockingResult blocking(std::span<const double> xs, std::size_t min_blocks = 16);

/// Delete-one-block jackknife for a scalar function of per-sample vectors.
///
/// `samples[i]` is the observation vector of sample i; `estimator` maps an averaged vector to
/// the quantity of interest. Samples are grouped into `nblocks` contiguous blocks.
MeanError jackknife(const std::vector<std::vector<double>>& samples,
                    const std::function<double(const std::vector<double>&)>& estimator, std::size_t nblocks);

/// Precomputed leave-one-block-out averages so many estimators can share one pass.
class JackknifeSet {
 public:
  JackknifeSet(const std::vector<std::vector<double>>& samples, std::size_t nblocks);
  MeanError estimate(const std::function<double(const std::vector<double>&)>& estimator) const;
  std::size_t blocks() const { return loo_.size(); }

 private:
  std::vector<double> full_;
  std::vector<std::vector<double>> loo_;
  std::size_t used_ = 0;
};

/// Weighted least squares y = a + b x with weights 1/sigma^2.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_error = 0.0;
  double slope_error = 0.0;
  double chi2 = 0.0;
  std::size_t points = 0;
};
LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> sigma);

}  // namespace platelat::stats
