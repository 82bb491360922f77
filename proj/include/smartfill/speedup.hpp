#pragma once

// Concave speedup functions s(theta) on [0, B]: evaluation, first derivative,
// inverse of the derivative, axiom validation and detection of the "regular"
// family whose derivative is alpha * (sigma * theta + z)^gamma.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "smartfill/error.hpp"

namespace malleable {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Family { power, shifted_power, log, saturating, inverted_shift, sum, custom };

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::power: return "power";
    case Family::shifted_power: return "shifted_power";
    case Family::log: return "log";
    case Family::saturating: return "saturating";
    case Family::inverted_shift: return "inverted_shift";
    case Family::sum: return "sum";
    case Family::custom: return "custom";
  }
  return "unknown";
}

// s'(theta) = alpha * (orientation * theta + z_shift)^gamma, base > 0 on [0, B).
struct RegularDescriptor {
  double alpha = 1.0;
  double gamma = -1.0;
  double z_shift = 0.0;
  int orientation = +1;

  double slope(double theta) const {
    return alpha * std::pow(orientation * theta + z_shift, gamma);
  }

  // Inverse of slope(); y may be +infinity (returns the theta where the base is 0).
  double slope_inverse(double y) const {
    return orientation * (std::pow(y / alpha, 1.0 / gamma) - z_shift);
  }
};

class SpeedupFunction {
 public:
  struct Term {
    double coef = 0.0;
    std::shared_ptr<const SpeedupFunction> fn;
  };

  // Programmatic escape hatch; not expressible in instance files.
  struct Callbacks {
    std::function<double(double)> value;
    std::function<double(double)> slope;
  };

  static SpeedupFunction power(double a, double p, double bound) {
    return SpeedupFunction(Family::power, a, 0.0, p, bound);
  }
  static SpeedupFunction shifted_power(double a, double z, double p, double bound) {
    return SpeedupFunction(Family::shifted_power, a, z, p, bound);
  }
  static SpeedupFunction log(double a, double p, double bound) {
    return SpeedupFunction(Family::log, a, 0.0, p, bound);
  }
  static SpeedupFunction saturating(double a, double z, double p, double bound) {
    return SpeedupFunction(Family::saturating, a, z, p, bound);
  }
  static SpeedupFunction inverted_shift(double a, double z, double p, double bound) {
    return SpeedupFunction(Family::inverted_shift, a, z, p, bound);
  }
  static SpeedupFunction sum(std::vector<std::pair<double, SpeedupFunction>> terms, double bound) {
    SpeedupFunction f(Family::sum, 0.0, 0.0, 0.0, bound);
    for (auto& [coef, fn] : terms) {
      if (!std::isfinite(coef)) throw InvalidInstance("sum coefficient must be finite");
      f.terms_.push_back({coef, std::make_shared<const SpeedupFunction>(std::move(fn).rebound(bound))});
    }
    if (f.terms_.empty()) throw InvalidInstance("sum needs at least one term");
    return f;
  }
  static SpeedupFunction custom(Callbacks callbacks, double bound) {
    SpeedupFunction f(Family::custom, 0.0, 0.0, 0.0, bound);
    if (!callbacks.value || !callbacks.slope) throw InvalidInstance("custom speedup needs value and slope");
    f.custom_ = std::make_shared<const Callbacks>(std::move(callbacks));
    return f;
  }

  Family family() const { return family_; }
  double bound() const { return bound_; }
  double a() const { return a_; }
  double z() const { return z_; }
  double p() const { return p_; }
  const std::vector<Term>& terms() const { return terms_; }

  // Same shape on a different domain [0, bound].
  SpeedupFunction rebound(double bound) const& {
    SpeedupFunction f = *this;
    f.set_bound(bound);
    return f;
  }
  SpeedupFunction rebound(double bound) && {
    set_bound(bound);
    return std::move(*this);
  }

  // Unchecked evaluation, valid for theta in [0, bound].
  double value(double theta) const {
    switch (family_) {
      case Family::power: return a_ * std::pow(theta, p_);
      case Family::shifted_power: return a_ * (std::pow(theta + z_, p_) - std::pow(z_, p_));
      case Family::log: return a_ * std::log1p(p_ * theta);
      case Family::saturating: return a_ * (std::pow(z_, p_) - std::pow(theta + z_, p_));
      case Family::inverted_shift: return a_ * (std::pow(z_, p_) - std::pow(z_ - theta, p_));
      case Family::sum: {
        double total = 0.0;
        for (const auto& t : terms_)
          if (t.coef != 0.0) total += t.coef * t.fn->value(theta);
        return total;
      }
      case Family::custom: return custom_->value(theta);
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

  // Unchecked first derivative; +infinity where the derivative blows up at 0.
  double slope(double theta) const {
    switch (family_) {
      case Family::power:
        if (theta == 0.0) return p_ < 1.0 ? kInfinity : a_ * p_ * std::pow(theta, p_ - 1.0);
        return a_ * p_ * std::pow(theta, p_ - 1.0);
      case Family::shifted_power:
        if (theta + z_ == 0.0 && p_ < 1.0) return kInfinity;
        return a_ * p_ * std::pow(theta + z_, p_ - 1.0);
      case Family::log: return a_ * p_ / (1.0 + p_ * theta);
      case Family::saturating: return -a_ * p_ * std::pow(theta + z_, p_ - 1.0);
      case Family::inverted_shift: return a_ * p_ * std::pow(z_ - theta, p_ - 1.0);
      case Family::sum: {
        double total = 0.0;
        for (const auto& t : terms_)
          if (t.coef != 0.0) total += t.coef * t.fn->slope(theta);
        return total;
      }
      case Family::custom: return custom_->slope(theta);
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

 private:
  SpeedupFunction(Family family, double a, double z, double p, double bound)
      : family_(family), a_(a), z_(z), p_(p), bound_(bound) {
    if (!std::isfinite(a) || !std::isfinite(z) || !std::isfinite(p))
      throw InvalidInstance("speedup parameters must be finite");
    if (!(bound > 0.0) || !std::isfinite(bound)) throw InvalidInstance("bandwidth B must be positive and finite");
  }

  void set_bound(double bound) {
    if (!(bound > 0.0) || !std::isfinite(bound)) throw InvalidInstance("bandwidth B must be positive and finite");
    bound_ = bound;
    for (auto& t : terms_) t.fn = std::make_shared<const SpeedupFunction>(t.fn->rebound(bound));
  }

  Family family_;
  double a_;
  double z_;
  double p_;
  double bound_;
  std::vector<Term> terms_;
  std::shared_ptr<const Callbacks> custom_;
};

namespace detail {

inline void check_domain(const SpeedupFunction& f, double theta) {
  if (!(theta >= 0.0 && theta <= f.bound())) {
    std::ostringstream msg;
    msg << "theta=" << theta << " outside [0, " << f.bound() << "]";
    throw DomainError(msg.str());
  }
}

inline bool same_shape(const RegularDescriptor& x, const RegularDescriptor& y) {
  auto close = [](double u, double v) { return std::abs(u - v) <= 1e-14 * std::max({1.0, std::abs(u), std::abs(v)}); };
  return x.orientation == y.orientation && close(x.gamma, y.gamma) && close(x.z_shift, y.z_shift);
}

// Root of slope(theta) = y on [lo, hi], slope strictly decreasing. Bracketing
// bisection with a regula-falsi (Illinois) step; never leaves the bracket.
// Stops once the bracket is within `tol` and within 1e-14 relative of the root,
// so tiny roots keep their relative accuracy.
inline double slope_root(const SpeedupFunction& f, double y, double lo, double hi, double tol) {
  double f_lo = f.slope(lo) - y;  // >= 0
  double f_hi = f.slope(hi) - y;  // <= 0
  if (f_lo <= 0.0) return lo;
  if (f_hi >= 0.0) return hi;
  int side = 0;
  for (int it = 0; it < 400 && hi - lo > std::min(tol, 1e-14 * hi); ++it) {
    double mid;
    if (std::isfinite(f_lo) && it % 4 != 3) {
      mid = hi - f_hi * (hi - lo) / (f_hi - f_lo);
      if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    } else {
      mid = 0.5 * (lo + hi);
    }
    const double f_mid = f.slope(mid) - y;
    if (f_mid == 0.0) return mid;
    if (f_mid > 0.0) {
      lo = mid;
      f_lo = f_mid;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      hi = mid;
      f_hi = f_mid;
      if (side == +1) f_lo *= 0.5;
      side = +1;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// s(theta); throws DomainError outside [0, B].
inline double evaluate(const SpeedupFunction& f, double theta) {
  detail::check_domain(f, theta);
  return f.value(theta);
}

// s'(theta); +infinity at theta = 0 for families with an unbounded slope there.
inline double derivative(const SpeedupFunction& f, double theta) {
  detail::check_domain(f, theta);
  return f.slope(theta);
}

inline std::optional<RegularDescriptor> regular_descriptor(const SpeedupFunction& f) {
  const double a = f.a(), z = f.z(), p = f.p();
  switch (f.family()) {
    case Family::power: return RegularDescriptor{a * p, p - 1.0, 0.0, +1};
    case Family::shifted_power: return RegularDescriptor{a * p, p - 1.0, z, +1};
    case Family::log: return RegularDescriptor{a, -1.0, 1.0 / p, +1};
    case Family::saturating: return RegularDescriptor{-a * p, p - 1.0, z, +1};
    case Family::inverted_shift: return RegularDescriptor{a * p, p - 1.0, z, -1};
    case Family::custom: return std::nullopt;
    case Family::sum: {
      // Terms sharing (gamma, z, orientation) collapse into one regular term.
      std::optional<RegularDescriptor> merged;
      for (const auto& t : f.terms()) {
        if (t.coef == 0.0) continue;
        auto d = regular_descriptor(*t.fn);
        if (!d) return std::nullopt;
        d->alpha *= t.coef;
        if (!merged) {
          merged = d;
        } else if (detail::same_shape(*merged, *d)) {
          merged->alpha += d->alpha;
        } else {
          return std::nullopt;
        }
      }
      return merged;
    }
  }
  return std::nullopt;
}

// theta in [0, B] with s'(theta) = y. Closed form for regular functions,
// bracketing search on [0, B] otherwise.
inline double derivative_inverse(const SpeedupFunction& f, double y) {
  const double B = f.bound();
  const double lo_rate = f.slope(B);
  const double hi_rate = f.slope(0.0);
  const double slack = 1e-12;
  if (std::isnan(y) || y < lo_rate * (1.0 - slack) || (std::isfinite(hi_rate) && y > hi_rate * (1.0 + slack))) {
    std::ostringstream msg;
    msg << "marginal rate " << y << " outside [" << lo_rate << ", " << hi_rate << "]";
    throw RangeError(msg.str());
  }
  if (y >= hi_rate) return 0.0;
  if (y <= lo_rate) return B;
  if (auto d = regular_descriptor(f)) return std::clamp(d->slope_inverse(y), 0.0, B);
  return detail::slope_root(f, y, 0.0, B, 1e-12 * B);
}

struct AxiomViolation {
  std::string axiom;
  double witness = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<AxiomViolation> violations;

  bool ok() const { return violations.empty(); }
  std::string summary() const {
    std::ostringstream out;
    for (const auto& v : violations) out << v.axiom << " at theta=" << v.witness << ": " << v.detail << "\n";
    return out.str();
  }
};

namespace detail {

inline void check_parameters(const SpeedupFunction& f, ValidationReport& report) {
  const double a = f.a(), z = f.z(), p = f.p(), B = f.bound();
  auto fail = [&](const std::string& what) {
    report.violations.push_back({"parameters", 0.0, std::string(family_name(f.family())) + ": " + what});
  };
  switch (f.family()) {
    case Family::power:
      if (!(a > 0.0)) fail("a must be > 0");
      if (!(p > 0.0 && p < 1.0)) fail("p must lie in (0, 1)");
      break;
    case Family::shifted_power:
      if (!(a > 0.0)) fail("a must be > 0");
      if (!(z >= 0.0)) fail("z must be >= 0");
      if (!(p > 0.0 && p < 1.0)) fail("p must lie in (0, 1)");
      break;
    case Family::log:
      if (!(a > 0.0)) fail("a must be > 0");
      if (!(p > 0.0)) fail("p must be > 0");
      break;
    case Family::saturating:
      if (!(a > 0.0)) fail("a must be > 0");
      if (!(z > 0.0)) fail("z must be > 0");
      if (!(p < 0.0)) fail("p must be < 0");
      break;
    case Family::inverted_shift:
      if (!(a > 0.0)) fail("a must be > 0");
      if (!(z >= B)) fail("z must be >= B");
      if (!(p > 1.0)) fail("p must be > 1");
      break;
    case Family::sum: {
      bool any_positive = false;
      for (const auto& t : f.terms()) {
        if (t.coef < 0.0) fail("coefficients must be >= 0");
        if (t.coef > 0.0) {
          any_positive = true;
          check_parameters(*t.fn, report);
        }
      }
      if (!any_positive) fail("needs a positive coefficient");
      break;
    }
    case Family::custom: break;
  }
}

}  // namespace detail

// Sampled check of the model axioms on a 1000-point uniform grid over [0, B].
// Never throws; every violated axiom is listed once with its first witness.
inline ValidationReport validate(const SpeedupFunction& f) {
  constexpr int kGrid = 1000;
  constexpr double kTol = 1e-12;
  ValidationReport report;
  detail::check_parameters(f, report);

  const double B = f.bound();
  std::vector<double> grid(kGrid), s(kGrid), ds(kGrid);
  for (int g = 0; g < kGrid; ++g) {
    grid[g] = B * g / (kGrid - 1);
    s[g] = f.value(grid[g]);
    ds[g] = f.slope(grid[g]);
  }

  auto note = [&](const char* axiom, double theta, const std::string& detail) {
    for (const auto& v : report.violations)
      if (v.axiom == axiom) return;
    report.violations.push_back({axiom, theta, detail});
  };

  if (!(std::abs(s[0]) <= kTol * std::max(1.0, std::abs(s[kGrid - 1])))) {
    std::ostringstream msg;
    msg << "s(0)=" << s[0];
    note("zero_at_origin", 0.0, msg.str());
  }
  for (int g = 0; g + 1 < kGrid; ++g) {
    if (!(s[g + 1] - s[g] > kTol * std::abs(s[g]))) {
      std::ostringstream msg;
      msg << "s(" << grid[g + 1] << ")=" << s[g + 1] << " <= s(" << grid[g] << ")=" << s[g];
      note("strictly_increasing", grid[g], msg.str());
    }
    const bool decreasing = std::isinf(ds[g]) && ds[g] > 0.0 ? std::isfinite(ds[g + 1])
                                                              : ds[g + 1] < ds[g] - kTol * std::abs(ds[g]);
    if (!decreasing) {
      std::ostringstream msg;
      msg << "s'(" << grid[g + 1] << ")=" << ds[g + 1] << " >= s'(" << grid[g] << ")=" << ds[g];
      note("strictly_concave", grid[g], msg.str());
    }
  }
  // s'(B) = 0 is tolerated at the right endpoint (e.g. 2*theta - theta^2 on [0, 1]).
  for (int g = 0; g < kGrid; ++g) {
    const bool positive = g + 1 < kGrid ? ds[g] > 0.0 : ds[g] >= 0.0;
    if (!positive) {
      std::ostringstream msg;
      msg << "s'=" << ds[g];
      note("positive_slope", grid[g], msg.str());
    }
  }
  return report;
}

}  // namespace malleable
