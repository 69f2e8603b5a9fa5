#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace clsm {

// Fixed model hyperparameters. Dimensions are implied by the vectors:
// alpha has one entry per topic, kappa one entry per vocabulary token.
struct Hyperparams {
  std::vector<double> alpha;                // Dirichlet prior over memberships
  std::pair<double, double> eta{1.0, 1.0};  // Beta prior over per-topic link rates
  std::vector<double> kappa;                // Dirichlet prior over topic-token weights
  double epsilon = 1e-5;                    // background link rate between mismatched topics

  std::size_t num_topics() const { return alpha.size(); }
  std::size_t vocab_size() const { return kappa.size(); }

  // Throws ConfigError unless all concentrations are positive and
  // epsilon lies in (0, 0.5).
  void validate() const;

  static Hyperparams symmetric(std::size_t num_topics, std::size_t vocab_size,
                               double alpha_precision, std::pair<double, double> eta,
                               double kappa_value, double epsilon);
};

}  // namespace clsm
