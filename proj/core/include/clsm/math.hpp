#pragma once

#include <span>
#include <utility>
#include <vector>

namespace clsm {

// First derivative of log Gamma. Domain x > 0; throws std::domain_error otherwise.
double digamma(double x);

// E[log p_i] under Dirichlet(params): psi(params_i) - psi(sum params).
std::vector<double> dirichlet_expect_log(std::span<const double> params);
void dirichlet_expect_log(std::span<const double> params, std::span<double> out);

// (E[log b], E[log(1-b)]) under Beta(a, b).
std::pair<double, double> beta_expect_logs(double a, double b);

// Softmax of log-space weights, safe for any finite magnitudes.
// Entries of -inf are allowed and map to zero mass; throws std::domain_error
// if all entries are -inf or any entry is NaN/+inf.
std::vector<double> normalize_log_simplex(std::span<const double> logits);
void normalize_log_simplex(std::span<const double> logits, std::span<double> out);

// log(sum(exp(x_i))) with the usual max shift.
double log_sum_exp(std::span<const double> x);

// log Beta(a, b) and the multivariate generalization log B(p) used by
// Dirichlet normalizers.
double log_beta(double a, double b);
double log_multi_beta(std::span<const double> params);

// Shannon entropy of a probability vector; 0 log 0 counts as 0.
double entropy(std::span<const double> probs);

}  // namespace clsm
