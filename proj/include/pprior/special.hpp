#pragma once

// Thin wrappers over Boost.Math for the distribution functions the models and
// the verification harness need.

#include <cmath>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace pprior::special {

inline double log_gamma(double x) { return std::lgamma(x); }

inline double beta_cdf(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::cdf(boost::math::beta_distribution<double>(a, b), x);
}

inline double beta_pdf(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return boost::math::pdf(boost::math::beta_distribution<double>(a, b), x);
}

/// Location-scale Student-t CDF.
inline double student_t_cdf(double x, double df, double location = 0.0, double scale = 1.0) {
  return boost::math::cdf(boost::math::students_t_distribution<double>(df), (x - location) / scale);
}

inline double student_t_pdf(double x, double df, double location = 0.0, double scale = 1.0) {
  return boost::math::pdf(boost::math::students_t_distribution<double>(df), (x - location) / scale) / scale;
}

inline double poisson_pmf(unsigned k, double mean) {
  return boost::math::pdf(boost::math::poisson_distribution<double>(mean), static_cast<double>(k));
}

inline double chi_square_quantile(double p, double df) {
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(df), p);
}

/// Upper tail of the chi-square law.
inline double chi_square_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(df), x));
}

/// Asymptotic Kolmogorov critical constant: P(sqrt(N) D > c) ~ alpha.
inline double ks_critical_constant(double alpha) { return std::sqrt(-0.5 * std::log(0.5 * alpha)); }

}  // namespace pprior::special
