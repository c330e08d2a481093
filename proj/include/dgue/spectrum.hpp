#pragma once

// Source spectra: finite atomic spectra {h_j} and limiting measures N0, with
// their Stieltjes transforms f(z) = \int N(dh) / (h - z) and the moment
// integrals \int N(dh) / (z - h)^k.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dgue/errors.hpp"

namespace dgue {

using cplx = std::complex<double>;

/// Atom-collision tolerance (absolute).
inline constexpr double kAtomTolerance = 1e-14;

struct Interval {
  double lo;
  double hi;

  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Eigenvalues {h_j} of a fixed source matrix. Sorted, finite, duplicates allowed.
class AtomicSpectrum {
 public:
  explicit AtomicSpectrum(std::vector<double> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw ValidationError("AtomicSpectrum: at least one atom required");
    for (double h : atoms_) {
      if (!std::isfinite(h)) throw ValidationError("AtomicSpectrum: atoms must be finite");
    }
    std::sort(atoms_.begin(), atoms_.end());
    const double inv_n = 1.0 / static_cast<double>(atoms_.size());
    for (double h : atoms_) {
      if (!distinct_.empty() && h == distinct_.back()) {
        weights_.back() += inv_n;
      } else {
        distinct_.push_back(h);
        weights_.push_back(inv_n);
      }
    }
  }

  std::span<const double> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double min() const { return atoms_.front(); }
  double max() const { return atoms_.back(); }

  /// Distinct atom values and their weights (multiplicity / n).
  std::span<const double> distinct() const { return distinct_; }
  std::span<const double> weights() const { return weights_; }

  /// h -> -h, used to treat left edges as right edges.
  AtomicSpectrum reflected() const {
    std::vector<double> r(atoms_.size());
    std::transform(atoms_.begin(), atoms_.end(), r.begin(), [](double h) { return -h; });
    return AtomicSpectrum(std::move(r));
  }

  /// Distance from z to the nearest atom.
  double distance_to_atoms(cplx z) const {
    double best = std::numeric_limits<double>::infinity();
    for (double h : distinct_) best = std::min(best, std::abs(z - h));
    return best;
  }

  /// (1/n) sum_j (z - h_j)^{-k}
  cplx inverse_power_mean(cplx z, int k) const {
    cplx s = 0.0;
    for (std::size_t i = 0; i < distinct_.size(); ++i) {
      const cplx d = 1.0 / (z - distinct_[i]);
      cplx p = d;
      for (int j = 1; j < k; ++j) p *= d;
      s += weights_[i] * p;
    }
    return s;
  }

 private:
  std::vector<double> atoms_;
  std::vector<double> distinct_;
  std::vector<double> weights_;
};

namespace detail {

inline void check_off_atoms(const AtomicSpectrum& spec, cplx z) {
  if (spec.distance_to_atoms(z) < kAtomTolerance) {
    throw DomainError("evaluation point coincides with an atom");
  }
}

}  // namespace detail

/// f_n(z) = (1/n) sum_j 1/(h_j - z).
inline cplx stieltjes_atomic(const AtomicSpectrum& spec, cplx z) {
  detail::check_off_atoms(spec, z);
  return -spec.inverse_power_mean(z, 1);
}

enum class MeasureKind { PointMasses, Semicircle, Custom };

/// Limiting source measure N0, exposed through its Stieltjes transform and
/// moment integrals. Immutable; share through std::shared_ptr<const LimitMeasure>.
class LimitMeasure {
 public:
  virtual ~LimitMeasure() = default;

  virtual MeasureKind kind() const = 0;
  /// Disjoint closed intervals (points are degenerate intervals).
  virtual const std::vector<Interval>& support() const = 0;
  /// f(z) = \int N(dh)/(h - z), z off the support.
  virtual cplx stieltjes(cplx z) const = 0;
  /// \int N(dh)/(z - h)^k for k in 1..4.
  virtual cplx moment(cplx z, int k) const = 0;

  double support_max() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& iv : support()) m = std::max(m, iv.hi);
    return m;
  }
  double support_min() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& iv : support()) m = std::min(m, iv.lo);
    return m;
  }

  /// True if z lies on the support (real axis only).
  bool on_support(cplx z) const {
    if (std::abs(z.imag()) > 0.0) return false;
    for (const auto& iv : support()) {
      if (z.real() >= iv.lo - kAtomTolerance && z.real() <= iv.hi + kAtomTolerance) return true;
    }
    return false;
  }
};

using MeasurePtr = std::shared_ptr<const LimitMeasure>;

class PointMassMeasure final : public LimitMeasure {
 public:
  PointMassMeasure(std::vector<double> points, std::vector<double> weights)
      : points_(std::move(points)), weights_(std::move(weights)) {
    if (points_.empty() || points_.size() != weights_.size()) {
      throw ValidationError("point-mass measure: points and weights must be non-empty and equal length");
    }
    double total = 0.0;
    for (double w : weights_) {
      if (!(w > 0.0)) throw ValidationError("point-mass measure: weights must be positive");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ValidationError("point-mass measure: weights must sum to 1");
    for (double p : points_) {
      if (!std::isfinite(p)) throw ValidationError("point-mass measure: points must be finite");
      support_.push_back({p, p});
    }
    std::sort(support_.begin(), support_.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  }

  MeasureKind kind() const override { return MeasureKind::PointMasses; }
  const std::vector<Interval>& support() const override { return support_; }

  cplx stieltjes(cplx z) const override { return -moment(z, 1); }

  cplx moment(cplx z, int k) const override {
    cplx s = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) s += weights_[i] * std::pow(z - points_[i], -k);
    return s;
  }

  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> points_;
  std::vector<double> weights_;
  std::vector<Interval> support_;
};

/// Semicircle law of variance v on [-2 sqrt(v), 2 sqrt(v)].
class SemicircleMeasure final : public LimitMeasure {
 public:
  explicit SemicircleMeasure(double variance) : variance_(variance) {
    if (!(variance > 0.0) || !std::isfinite(variance)) throw ValidationError("semicircle: variance must be positive");
    const double r = 2.0 * std::sqrt(variance_);
    support_.push_back({-r, r});
  }

  MeasureKind kind() const override { return MeasureKind::Semicircle; }
  const std::vector<Interval>& support() const override { return support_; }
  double variance() const { return variance_; }

  // sqrt(z^2 - 4v) on the branch ~ z at infinity, analytic off the cut.
  cplx root(cplx z) const {
    const double r = support_[0].hi;
    return std::sqrt(z - r) * std::sqrt(z + r);
  }

  // (-z + s)/(2v) rewritten without cancellation at large |z|
  cplx stieltjes(cplx z) const override { return -2.0 / (z + root(z)); }

  cplx moment(cplx z, int k) const override {
    const cplx s = root(z);
    switch (k) {
      case 1:
        return -stieltjes(z);
      case 2:
        return 2.0 / (s * (z + s));
      case 3:
        return 1.0 / (s * s * s);
      case 4:
        return z / std::pow(s, 5);
      default:
        throw ValidationError("moment order must be in 1..4");
    }
  }

 private:
  double variance_;
  std::vector<Interval> support_;
};

/// User-supplied evaluators. The branch is validated at construction by the
/// total-mass asymptote f(z) ~ -1/z at |z| = 1e6.
class CustomMeasure final : public LimitMeasure {
 public:
  using StieltjesFn = std::function<cplx(cplx)>;
  using MomentFn = std::function<cplx(cplx, int)>;

  CustomMeasure(std::vector<Interval> support, StieltjesFn f, MomentFn moment)
      : support_(std::move(support)), f_(std::move(f)), moment_(std::move(moment)) {
    if (support_.empty() || !f_ || !moment_) throw ValidationError("custom measure: support and evaluators required");
    const cplx far(0.0, 1e6);
    const cplx scaled = f_(far) * far;
    if (std::abs(scaled + 1.0) > 1e-5) {
      throw ValidationError("custom measure: Stieltjes evaluator is not on the branch f(z) ~ -1/z");
    }
  }

  MeasureKind kind() const override { return MeasureKind::Custom; }
  const std::vector<Interval>& support() const override { return support_; }
  cplx stieltjes(cplx z) const override { return f_(z); }
  cplx moment(cplx z, int k) const override { return moment_(z, k); }

 private:
  std::vector<Interval> support_;
  StieltjesFn f_;
  MomentFn moment_;
};

/// Image of a measure under h -> -h.
class ReflectedMeasure final : public LimitMeasure {
 public:
  explicit ReflectedMeasure(MeasurePtr base) : base_(std::move(base)) {
    for (const auto& iv : base_->support()) support_.push_back({-iv.hi, -iv.lo});
    std::sort(support_.begin(), support_.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  }

  MeasureKind kind() const override { return base_->kind(); }
  const std::vector<Interval>& support() const override { return support_; }
  cplx stieltjes(cplx z) const override { return -base_->stieltjes(-z); }
  cplx moment(cplx z, int k) const override { return (k % 2 == 0 ? 1.0 : -1.0) * base_->moment(-z, k); }

 private:
  MeasurePtr base_;
  std::vector<Interval> support_;
};

inline MeasurePtr point_masses(std::vector<double> points, std::vector<double> weights) {
  return std::make_shared<PointMassMeasure>(std::move(points), std::move(weights));
}

/// Uniform weights 1/n on the given atoms (duplicates merged).
inline MeasurePtr point_masses(const AtomicSpectrum& spec) {
  const auto d = spec.distinct();
  const auto w = spec.weights();
  return point_masses(std::vector<double>(d.begin(), d.end()), std::vector<double>(w.begin(), w.end()));
}

inline MeasurePtr semicircle(double variance) { return std::make_shared<SemicircleMeasure>(variance); }

inline MeasurePtr two_point(double a) { return point_masses({-a, a}, {0.5, 0.5}); }

inline MeasurePtr custom_measure(std::vector<Interval> support, CustomMeasure::StieltjesFn f,
                                 CustomMeasure::MomentFn moment) {
  return std::make_shared<CustomMeasure>(std::move(support), std::move(f), std::move(moment));
}

inline MeasurePtr reflected(MeasurePtr m) { return std::make_shared<ReflectedMeasure>(std::move(m)); }

/// f0(z) with the domain check.
inline cplx limit_stieltjes(const LimitMeasure& meas, cplx z) {
  if (meas.on_support(z)) throw DomainError("limit_stieltjes: z lies on the support");
  return meas.stieltjes(z);
}

/// \int N0(dh) / (z - h)^k, k in 1..4.
inline cplx moment_integral(const LimitMeasure& meas, cplx z, int k) {
  if (k < 1 || k > 4) throw ValidationError("moment_integral: k must be in 1..4");
  if (meas.on_support(z)) throw DomainError("moment_integral: z lies on the support");
  return meas.moment(z, k);
}

/// CDF of the semicircle of variance v.
inline double semicircle_cdf(double x, double variance) {
  const double r = 2.0 * std::sqrt(variance);
  if (x <= -r) return 0.0;
  if (x >= r) return 1.0;
  const double u = x / r;
  return 0.5 + (u * std::sqrt(1.0 - u * u) + std::asin(u)) / std::numbers::pi;
}

/// Midpoint quantiles x_k with F(x_k) = (k - 1/2)/n of the semicircle law.
inline std::vector<double> semicircle_quantiles(std::size_t n, double variance) {
  const double r = 2.0 * std::sqrt(variance);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double target = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    double lo = -r;
    double hi = r;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * r; ++it) {
      const double mid = 0.5 * (lo + hi);
      (semicircle_cdf(mid, variance) < target ? lo : hi) = mid;
    }
    out[k] = 0.5 * (lo + hi);
  }
  return out;
}

}  // namespace dgue
