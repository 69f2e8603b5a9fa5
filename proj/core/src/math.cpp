#include "clsm/math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace clsm {

double digamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("digamma: argument must be positive");
  }
  // Raise the argument above 8 by the recurrence psi(x) = psi(x+1) - 1/x,
  // then use the asymptotic expansion; the truncation error there is < 1e-11.
  double acc = 0.0;
  while (x < 8.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = std::log(x) - 0.5 * inv;
  series -= inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
  return acc + series;
}

void dirichlet_expect_log(std::span<const double> params, std::span<double> out) {
  double total = 0.0;
  for (double p : params) total += p;
  const double psi_total = digamma(total);
  for (std::size_t i = 0; i < params.size(); ++i) {
    out[i] = digamma(params[i]) - psi_total;
  }
}

std::vector<double> dirichlet_expect_log(std::span<const double> params) {
  std::vector<double> out(params.size());
  dirichlet_expect_log(params, out);
  return out;
}

std::pair<double, double> beta_expect_logs(double a, double b) {
  const double psi_sum = digamma(a + b);
  return {digamma(a) - psi_sum, digamma(b) - psi_sum};
}

void normalize_log_simplex(std::span<const double> logits, std::span<double> out) {
  double max_logit = -std::numeric_limits<double>::infinity();
  for (double v : logits) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw std::domain_error("normalize_log_simplex: entries must be < +inf and not NaN");
    }
    max_logit = std::max(max_logit, v);
  }
  if (logits.empty() || max_logit == -std::numeric_limits<double>::infinity()) {
    throw std::domain_error("normalize_log_simplex: no finite entry");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max_logit);
    total += out[i];
  }
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] /= total;
}

std::vector<double> normalize_log_simplex(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  normalize_log_simplex(logits, out);
  return out;
}

double log_sum_exp(std::span<const double> x) {
  double max_v = -std::numeric_limits<double>::infinity();
  for (double v : x) max_v = std::max(max_v, v);
  if (max_v == -std::numeric_limits<double>::infinity()) return max_v;
  double total = 0.0;
  for (double v : x) total += std::exp(v - max_v);
  return max_v + std::log(total);
}

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_multi_beta(std::span<const double> params) {
  double total = 0.0;
  double acc = 0.0;
  for (double p : params) {
    acc += std::lgamma(p);
    total += p;
  }
  return acc - std::lgamma(total);
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

}  // namespace clsm
