#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <vector>

#include "confound/estimation.hpp"
#include "confound/rng.hpp"

namespace confound {

double digamma(double x) {
  if (!(x > 0)) throw Error(Errc::support_mismatch, "digamma needs a positive argument");
  double acc = 0;
  while (x < 6) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x, inv2 = inv * inv;
  return acc + std::log(x) - 0.5 * inv -
         inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252)));
}

namespace {

std::uint64_t fnv1a(const void* data, size_t len, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

// Tie-breaking noise derived from the column's own content, so the same
// stream gets the same jitter no matter which argument slot it occupies.
Eigen::MatrixXd jittered(const Eigen::MatrixXd& m, const InfoOptions& opts) {
  if (opts.jitter <= 0) return m;
  Eigen::MatrixXd out = m;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    std::uint64_t h = fnv1a(&opts.jitter_seed, sizeof opts.jitter_seed, 1469598103934665603ull);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double v = m(r, c);
      h = fnv1a(&v, sizeof v, h);
    }
    Rng rng(h);
    for (Eigen::Index r = 0; r < m.rows(); ++r) out(r, c) += opts.jitter * uniform01(rng);
  }
  return out;
}

void check_stream(const Eigen::MatrixXd& m, long rows, const InfoOptions& opts) {
  if (m.rows() != rows) throw Error(Errc::support_mismatch, "streams have different lengths");
  if (m.cols() == 0) throw Error(Errc::invalid_set_size, "empty stream");
  if (rows < kMinContextsForInfo)
    throw Error(Errc::insufficient_contexts,
                "stream of length " + std::to_string(rows) + " is below the minimum of " +
                    std::to_string(kMinContextsForInfo));
  if (opts.k < 1 || opts.k >= rows)
    throw Error(Errc::insufficient_contexts, "neighbor order k out of range for stream length");
}

double cheby(const Eigen::MatrixXd& m, long i, long j) {
  return (m.row(i) - m.row(j)).cwiseAbs().maxCoeff();
}

// Distance to the k-th nearest neighbor of point i (self excluded).
double knn_radius(std::vector<double>& dists, int k) {
  std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
  return dists[k - 1];
}

}  // namespace

InfoEstimate mutual_information(const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys,
                                const InfoOptions& opts) {
  const long n = xs.rows();
  check_stream(xs, n, opts);
  check_stream(ys, n, opts);

  if (opts.method == InfoMethod::histogram) {
    const int bins = opts.bins > 0 ? opts.bins
                                   : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    auto bin_ids = [&](const Eigen::MatrixXd& m) {
      std::vector<long> ids(n, 0);
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double lo = m.col(c).minCoeff(), hi = m.col(c).maxCoeff();
        const double w = hi > lo ? (hi - lo) / bins : 1.0;
        for (long r = 0; r < n; ++r) {
          int b = hi > lo ? std::min(bins - 1, static_cast<int>((m(r, c) - lo) / w)) : 0;
          ids[r] = ids[r] * bins + b;
        }
      }
      return ids;
    };
    const auto bx = bin_ids(xs), by = bin_ids(ys);
    std::map<std::pair<long, long>, long> joint;
    std::map<long, long> mx, my;
    for (long r = 0; r < n; ++r) {
      ++joint[{bx[r], by[r]}];
      ++mx[bx[r]];
      ++my[by[r]];
    }
    double sum = 0;
    for (const auto& [cell, cnt] : joint) {
      const double pxy = static_cast<double>(cnt) / n;
      const double px = static_cast<double>(mx[cell.first]) / n;
      const double py = static_cast<double>(my[cell.second]) / n;
      sum += pxy * std::log(pxy / (px * py));
    }
    InfoEstimate est;
    est.raw = sum;
    est.value = std::max(0.0, sum);
    est.estimator = "histogram";
    est.sample_count = n;
    return est;
  }

  const Eigen::MatrixXd x = jittered(xs, opts), y = jittered(ys, opts);
  double psi_sum = 0;
  std::vector<double> dx(n), dy(n), dz(n);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) {
      dx[j] = cheby(x, i, j);
      dy[j] = cheby(y, i, j);
      dz[j] = std::max(dx[j], dy[j]);
    }
    dz[i] = std::numeric_limits<double>::infinity();  // exclude self
    std::vector<double> knn = dz;
    const double eps = knn_radius(knn, opts.k);
    long nx = 0, ny = 0;
    for (long j = 0; j < n; ++j) {
      if (j == i) continue;
      if (dx[j] < eps) ++nx;
      if (dy[j] < eps) ++ny;
    }
    psi_sum += digamma(nx + 1.0) + digamma(ny + 1.0);
  }
  InfoEstimate est;
  est.raw = digamma(opts.k) + digamma(static_cast<double>(n)) - psi_sum / n;
  est.value = std::max(0.0, est.raw);
  est.estimator = "ksg1";
  est.sample_count = n;
  return est;
}

InfoEstimate conditional_mutual_information(const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys,
                                            const Eigen::MatrixXd& zs, const InfoOptions& opts) {
  if (opts.method == InfoMethod::histogram)
    throw Error(Errc::unsupported_support, "histogram mode has no conditional variant");
  const long n = xs.rows();
  check_stream(xs, n, opts);
  check_stream(ys, n, opts);
  check_stream(zs, n, opts);

  const Eigen::MatrixXd x = jittered(xs, opts), y = jittered(ys, opts), z = jittered(zs, opts);
  double psi_sum = 0;
  std::vector<double> dxz(n), dyz(n), dzz(n), dj(n);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) {
      const double dx = cheby(x, i, j), dy = cheby(y, i, j), dz = cheby(z, i, j);
      dzz[j] = dz;
      dxz[j] = std::max(dx, dz);
      dyz[j] = std::max(dy, dz);
      dj[j] = std::max(dxz[j], dy);
    }
    dj[i] = std::numeric_limits<double>::infinity();
    std::vector<double> knn = dj;
    const double eps = knn_radius(knn, opts.k);
    long nxz = 0, nyz = 0, nz = 0;
    for (long j = 0; j < n; ++j) {
      if (j == i) continue;
      if (dxz[j] < eps) ++nxz;
      if (dyz[j] < eps) ++nyz;
      if (dzz[j] < eps) ++nz;
    }
    psi_sum += digamma(nxz + 1.0) + digamma(nyz + 1.0) - digamma(nz + 1.0);
  }
  InfoEstimate est;
  est.raw = digamma(opts.k) - psi_sum / n;
  est.value = std::max(0.0, est.raw);
  est.estimator = "fp_cmi";
  est.sample_count = n;
  return est;
}

InfoEstimate entropy(const Eigen::MatrixXd& xs, const InfoOptions& opts) {
  const long n = xs.rows();
  check_stream(xs, n, opts);
  const Eigen::MatrixXd x = jittered(xs, opts);
  const double d = static_cast<double>(x.cols());
  double log_sum = 0;
  std::vector<double> dist(n);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) dist[j] = cheby(x, i, j);
    dist[i] = std::numeric_limits<double>::infinity();
    const double eps = knn_radius(dist, opts.k);
    log_sum += std::log(std::max(eps, 1e-300));
  }
  InfoEstimate est;
  est.raw = digamma(static_cast<double>(n)) - digamma(opts.k) + d * std::log(2.0) +
            (d / n) * log_sum;
  est.value = est.raw;  // differential entropy may be negative
  est.estimator = "kl_entropy";
  est.sample_count = n;
  return est;
}

InfoEstimate conditional_entropy(const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys,
                                 const InfoOptions& opts) {
  if (xs.rows() != ys.rows())
    throw Error(Errc::support_mismatch, "streams have different lengths");
  Eigen::MatrixXd joint(xs.rows(), xs.cols() + ys.cols());
  joint << xs, ys;
  const InfoEstimate hj = entropy(joint, opts);
  const InfoEstimate hy = entropy(ys, opts);
  InfoEstimate est;
  est.raw = hj.raw - hy.raw;
  est.value = est.raw;
  est.estimator = "kl_entropy_diff";
  est.sample_count = xs.rows();
  return est;
}

InfoEstimate total_correlation(const std::vector<Eigen::MatrixXd>& streams,
                               const InfoOptions& opts) {
  if (streams.size() < 2)
    throw Error(Errc::invalid_set_size, "total correlation needs at least two streams");
  const long n = streams.front().rows();
  Eigen::Index total_cols = 0;
  for (const auto& s : streams) {
    if (s.rows() != n) throw Error(Errc::support_mismatch, "streams have different lengths");
    total_cols += s.cols();
  }
  Eigen::MatrixXd joint(n, total_cols);
  Eigen::Index at = 0;
  double marginal_sum = 0;
  for (const auto& s : streams) {
    joint.middleCols(at, s.cols()) = s;
    at += s.cols();
    marginal_sum += entropy(s, opts).raw;
  }
  InfoEstimate est;
  est.raw = marginal_sum - entropy(joint, opts).raw;
  est.value = std::max(0.0, est.raw);
  est.estimator = "tc_kl";
  est.sample_count = n;
  return est;
}

}  // namespace confound
