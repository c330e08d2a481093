#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <utility>
#include <vector>

#include "dgue/edge.hpp"
#include "dgue/errors.hpp"
#include "dgue/fredholm.hpp"
#include "dgue/parallel.hpp"
#include "dgue/spectrum.hpp"

namespace dgue {

// Counter-based normals: every entry of every sample has its own key, so results
// do not depend on the order or thread in which samples are drawn.
namespace rng {

inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t key(std::uint64_t seed, std::uint64_t sample, std::uint64_t stream, std::uint64_t entry) {
  return mix(mix(mix(mix(seed) ^ sample) ^ stream) ^ entry);
}

/// uniform on (0, 1)
inline double uniform(std::uint64_t k) { return (static_cast<double>(k >> 11) + 0.5) * 0x1.0p-53; }

/// two independent standard normals (Box-Muller)
inline std::pair<double, double> normal_pair(std::uint64_t k) {
  const double u1 = uniform(mix(k));
  const double u2 = uniform(mix(k ^ 0xd1b54a32d192ed03ULL));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(t), r * std::sin(t)};
}

}  // namespace rng

enum class SourceModel { FixedAtomic, WignerRandom };

inline const char* to_string(SourceModel m) { return m == SourceModel::FixedAtomic ? "fixed_atomic" : "wigner_random"; }

/// Either fixed atoms h_j on the diagonal, or H0 = n^{-1/2} W0 with complex
/// Rademacher off-diagonal entries (+-1 +- i)/sqrt(2) and real +-1 diagonal.
struct EnsembleSource {
  SourceModel model = SourceModel::FixedAtomic;
  std::vector<double> atoms;

  static EnsembleSource fixed(const AtomicSpectrum& s) { return {SourceModel::FixedAtomic, {s.atoms().begin(), s.atoms().end()}}; }
  static EnsembleSource wigner() { return {SourceModel::WignerRandom, {}}; }
};

struct EnsembleSample {
  std::vector<double> eigenvalues;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  SourceModel source_kind = SourceModel::FixedAtomic;
  /// trace of the matrix before diagonalization
  double trace = 0.0;
};

namespace detail {

enum : std::uint64_t { kStreamGaussian = 1, kStreamWigner = 2 };

inline std::uint64_t entry_index(std::size_t i, std::size_t j, std::size_t n) { return static_cast<std::uint64_t>(i) * n + j; }

}  // namespace detail

/// GUE matrix W: off-diagonal (x + iy), x, y ~ N(0, 1/2); diagonal N(0, 1).
inline Eigen::MatrixXcd sample_gue(std::size_t n, std::uint64_t seed, std::uint64_t sample = 0) {
  if (n < 1) throw ValidationError("sample_gue: n must be positive");
  Eigen::MatrixXcd w(n, n);
  const double s = std::sqrt(0.5);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const auto [x, y] = rng::normal_pair(rng::key(seed, sample, detail::kStreamGaussian, detail::entry_index(i, j, n)));
      if (i == j) {
        w(i, i) = x;
      } else {
        w(i, j) = cplx(s * x, s * y);
        w(j, i) = std::conj(w(i, j));
      }
    }
  }
  return w;
}

inline Eigen::MatrixXcd sample_wigner_source(std::size_t n, std::uint64_t seed, std::uint64_t sample = 0) {
  Eigen::MatrixXcd w(n, n);
  const double s = std::sqrt(0.5);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const std::uint64_t k = rng::mix(rng::key(seed, sample, detail::kStreamWigner, detail::entry_index(i, j, n)));
      const double a = (k & 1) ? 1.0 : -1.0;
      const double b = (k & 2) ? 1.0 : -1.0;
      if (i == j) {
        w(i, i) = a;
      } else {
        w(i, j) = cplx(s * a, s * b);
        w(j, i) = std::conj(w(i, j));
      }
    }
  }
  return w;
}

/// H = H0 + n^{-1/2} W, eigenvalues sorted ascending.
inline EnsembleSample sample_dgue(const EnsembleSource& src, std::size_t n, std::uint64_t seed, std::uint64_t sample = 0) {
  if (src.model == SourceModel::FixedAtomic && src.atoms.size() != n)
    throw ValidationError("sample_dgue: source size does not match n");
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Eigen::MatrixXcd h = scale * sample_gue(n, seed, sample);
  if (src.model == SourceModel::FixedAtomic) {
    for (std::size_t i = 0; i < n; ++i) h(i, i) += src.atoms[i];
  } else {
    h += scale * sample_wigner_source(n, seed, sample);
  }
  EnsembleSample out;
  out.n = n;
  out.seed = seed;
  out.index = sample;
  out.source_kind = src.model;
  out.trace = h.trace().real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw ConvergenceError("sample_dgue: eigensolver failed for seed " + std::to_string(seed) + ", sample " + std::to_string(sample), NAN);
  out.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end());
  return out;
}

/// Samples 0..count-1 under one seed, in parallel.
inline std::vector<EnsembleSample> sample_batch(const EnsembleSource& src, std::size_t n, std::size_t count,
                                                std::uint64_t seed, unsigned threads = default_threads()) {
  std::vector<EnsembleSample> out(count);
  parallel_for(count, threads, [&](std::size_t i) { out[i] = sample_dgue(src, n, seed, i); });
  return out;
}

/// Edge location and scale used for rescaling xi = (gamma n)^{2/3} (lambda - lambda0),
/// mirrored for a left edge.
struct EdgeScaling {
  double lambda0 = 0.0;
  double gamma = 1.0;
  Side side = Side::Right;

  static EdgeScaling from(const EdgeData& e) { return {e.lambda0, e.gamma, e.side}; }
  double rescale(double lambda, std::size_t n) const {
    const double f = std::pow(gamma * static_cast<double>(n), 2.0 / 3.0);
    return (side == Side::Right ? 1.0 : -1.0) * f * (lambda - lambda0);
  }
};

struct GapEstimate {
  double frequency = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

struct EdgeStatistics {
  /// rescaled eigenvalues with xi > -10, all samples pooled
  std::vector<double> rescaled;
  std::map<std::pair<double, double>, GapEstimate> gap_estimates;
};

inline GapEstimate bernoulli_estimate(std::size_t hits, std::size_t total) {
  GapEstimate g;
  g.samples = total;
  g.frequency = static_cast<double>(hits) / static_cast<double>(total);
  g.standard_error = std::sqrt(g.frequency * (1.0 - g.frequency) / static_cast<double>(total));
  return g;
}

/// Frequency of samples with no eigenvalue in lambda0 + Delta / (gamma n)^{2/3}.
inline EdgeStatistics empirical_gap(const std::vector<EnsembleSample>& samples, const EdgeScaling& edge,
                                    const std::vector<GapInterval>& intervals) {
  if (samples.empty()) throw ValidationError("empirical_gap: no samples");
  EdgeStatistics st;
  std::vector<std::size_t> hits(intervals.size(), 0);
  for (const auto& s : samples) {
    std::vector<bool> empty(intervals.size(), true);
    for (double l : s.eigenvalues) {
      const double xi = edge.rescale(l, s.n);
      if (xi > -10.0) st.rescaled.push_back(xi);
      for (std::size_t k = 0; k < intervals.size(); ++k)
        if (xi >= intervals[k].a && xi <= intervals[k].b && intervals[k].a < intervals[k].b) empty[k] = false;
    }
    for (std::size_t k = 0; k < intervals.size(); ++k) hits[k] += empty[k];
  }
  for (std::size_t k = 0; k < intervals.size(); ++k)
    st.gap_estimates[{intervals[k].a, intervals[k].b}] = bernoulli_estimate(hits[k], samples.size());
  return st;
}

struct MeanEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

/// Monte Carlo mean of prod_j (1 - phi(xi_j)).
inline MeanEstimate empirical_functional(const std::vector<EnsembleSample>& samples, const EdgeScaling& edge,
                                         const WeightFunction& f) {
  if (samples.empty()) throw ValidationError("empirical_functional: no samples");
  double sum = 0.0, sum2 = 0.0;
  for (const auto& s : samples) {
    double p = 1.0;
    for (double l : s.eigenvalues) {
      const double xi = edge.rescale(l, s.n);
      if (xi < f.lo || xi > f.hi) continue;
      const double v = f.phi(xi);
      if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("empirical_functional: phi must take values in [0, 1]");
      p *= 1.0 - v;
    }
    sum += p;
    sum2 += p * p;
  }
  const double n = static_cast<double>(samples.size());
  MeanEstimate m;
  m.samples = samples.size();
  m.mean = sum / n;
  const double var = std::max(0.0, sum2 / n - m.mean * m.mean);
  m.standard_error = std::sqrt(var / n);
  return m;
}

struct Histogram {
  std::vector<double> edges;    // bin boundaries in xi
  std::vector<double> density;  // mean count per sample per unit xi
  std::vector<double> standard_error;
};

/// Rescaled one-point function: histogram of xi_j per sample and unit length.
inline Histogram empirical_one_point(const std::vector<EnsembleSample>& samples, const EdgeScaling& edge,
                                     const std::vector<double>& bin_edges) {
  if (samples.empty()) throw ValidationError("empirical_one_point: no samples");
  if (bin_edges.size() < 2) throw ValidationError("empirical_one_point: need at least one bin");
  for (std::size_t i = 0; i + 1 < bin_edges.size(); ++i)
    if (!(bin_edges[i + 1] - bin_edges[i] >= 0.1 - 1e-12)) throw ValidationError("empirical_one_point: bin width must be >= 0.1");
  const std::size_t k = bin_edges.size() - 1;
  std::vector<double> sum(k, 0.0), sum2(k, 0.0);
  std::vector<double> counts(k);
  for (const auto& s : samples) {
    std::fill(counts.begin(), counts.end(), 0.0);
    for (double l : s.eigenvalues) {
      const double xi = edge.rescale(l, s.n);
      const auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), xi);
      if (it == bin_edges.begin() || it == bin_edges.end()) continue;
      counts[static_cast<std::size_t>(it - bin_edges.begin()) - 1] += 1.0;
    }
    for (std::size_t b = 0; b < k; ++b) {
      sum[b] += counts[b];
      sum2[b] += counts[b] * counts[b];
    }
  }
  Histogram h;
  h.edges = bin_edges;
  const double n = static_cast<double>(samples.size());
  for (std::size_t b = 0; b < k; ++b) {
    const double w = bin_edges[b + 1] - bin_edges[b];
    const double mean = sum[b] / n;
    const double var = std::max(0.0, sum2[b] / n - mean * mean);
    h.density.push_back(mean / w);
    h.standard_error.push_back(std::sqrt(var / n) / w);
  }
  return h;
}

}  // namespace dgue
