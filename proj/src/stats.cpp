#include "platelat/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace platelat::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

namespace {
double naive_error(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}
}  // namespace

BlockingResult blocking(std::span<const double> xs, std::size_t min_blocks) {
  BlockingResult r;
  r.samples = xs.size();
  r.mean = mean(xs);
  if (xs.size() < 2) return r;
  std::vector<double> level(xs.begin(), xs.end());
  std::vector<std::size_t> sizes;
  while (level.size() >= std::max<std::size_t>(2, min_blocks)) {
    r.level_errors.push_back(naive_error(level));
    sizes.push_back(level.size());
    std::vector<double> next(level.size() / 2);
    for (std::size_t i = 0; i < next.size(); ++i) next[i] = 0.5 * (level[2 * i] + level[2 * i + 1]);
    level = std::move(next);
  }
  if (r.level_errors.empty()) {
    r.error = naive_error(level);
    return r;
  }
  for (std::size_t l = 0; l + 1 < r.level_errors.size(); ++l) {
    const double e = r.level_errors[l];
    const double de = e / std::sqrt(2.0 * static_cast<double>(sizes[l] - 1));
    // Plateau: the error stops growing beyond the uncertainty of the estimate itself.
    if (r.level_errors[l + 1] - e <= de) {
      // take the larger of the two neighbouring levels so a slow rise is not underestimated
      r.error = std::max(e, r.level_errors[l + 1]);
      r.level = static_cast<int>(l);
      r.converged = true;
      return r;
    }
  }
  r.error = *std::max_element(r.level_errors.begin(), r.level_errors.end());
  r.level = static_cast<int>(r.level_errors.size()) - 1;
  return r;
}

JackknifeSet::JackknifeSet(const std::vector<std::vector<double>>& samples, std::size_t nblocks) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("jackknife needs at least two samples");
  nblocks = std::clamp<std::size_t>(nblocks, 2, n);
  const std::size_t dim = samples.front().size();
  const std::size_t bsize = n / nblocks;
  used_ = bsize * nblocks;

  std::vector<std::vector<double>> block_sums(nblocks, std::vector<double>(dim, 0.0));
  std::vector<double> total(dim, 0.0);
  for (std::size_t i = 0; i < used_; ++i) {
    const auto& s = samples[i];
    if (s.size() != dim) throw std::invalid_argument("jackknife: ragged sample vectors");
    for (std::size_t d = 0; d < dim; ++d) {
      block_sums[i / bsize][d] += s[d];
      total[d] += s[d];
    }
  }
  full_.resize(dim);
  for (std::size_t d = 0; d < dim; ++d) full_[d] = total[d] / static_cast<double>(used_);
  loo_.assign(nblocks, std::vector<double>(dim));
  for (std::size_t b = 0; b < nblocks; ++b) {
    for (std::size_t d = 0; d < dim; ++d) {
      loo_[b][d] = (total[d] - block_sums[b][d]) / static_cast<double>(used_ - bsize);
    }
  }
}

MeanError JackknifeSet::estimate(const std::function<double(const std::vector<double>&)>& estimator) const {
  const double full = estimator(full_);
  const auto nb = static_cast<double>(loo_.size());
  std::vector<double> loo(loo_.size());
  for (std::size_t b = 0; b < loo_.size(); ++b) loo[b] = estimator(loo_[b]);
  const double loo_mean = std::accumulate(loo.begin(), loo.end(), 0.0) / nb;
  double ss = 0.0;
  for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
  MeanError out;
  out.samples = used_;
  out.mean = nb * full - (nb - 1.0) * loo_mean;
  out.error = std::sqrt((nb - 1.0) / nb * ss);
  return out;
}

MeanError jackknife(const std::vector<std::vector<double>>& samples,
                    const std::function<double(const std::vector<double>&)>& estimator, std::size_t nblocks) {
  return JackknifeSet(samples, nblocks).estimate(estimator);
}

LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> sigma) {
  if (x.size() != y.size() || x.size() != sigma.size()) throw std::invalid_argument("fit: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("fit: need at least two points");
  double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(sigma[i] > 0.0)) throw std::invalid_argument("fit: sigma must be positive");
    const double w = 1.0 / (sigma[i] * sigma[i]);
    s += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  const double det = s * sxx - sx * sx;
  if (!(det > 0.0)) throw std::invalid_argument("fit: degenerate abscissae");
  LinearFit f;
  f.points = x.size();
  f.slope = (s * sxy - sx * sy) / det;
  f.intercept = (sxx * sy - sx * sxy) / det;
  f.slope_error = std::sqrt(s / det);
  f.intercept_error = std::sqrt(sxx / det);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = (y[i] - f.intercept - f.slope * x[i]) / sigma[i];
    f.chi2 += r * r;
  }
  return f;
}

}  // namespace platelat::stats
