#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <tuple>
#include <vector>

#include "clsm/eval.hpp"
#include "clsm/inference.hpp"
#include "clsm/io.hpp"
#include "clsm/math.hpp"
#include "clsm/rng.hpp"
#include "instances.hpp"
#include "oracles.hpp"
#include "states.hpp"

namespace clsm::testing {

namespace {

bool near(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

bool is_simplex(std::span<const double> row, double tol = 1e-9) {
  double total = 0.0;
  for (double x : row) {
    if (!(x >= 0.0) || !std::isfinite(x)) return false;
    total += x;
  }
  return std::abs(total - 1.0) <= tol;
}

std::string case_tag(const char* suite, std::size_t index) {
  return std::string(suite) + " case " + std::to_string(index);
}

std::vector<std::size_t> random_permutation(Rng& rng, std::size_t size) {
  std::vector<std::size_t> perm(size);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = size; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.next_below(i)]);
  }
  return perm;
}

}  // namespace

PropertyResult check_math_properties(std::size_t cases, std::uint64_t seed) {
  PropertyResult result;
  Rng rng(seed);
  for (std::size_t i = 0; i < cases; ++i) {
    ++result.cases;
    const double x = 0.01 + 20.0 * rng.next_double();
    if (!near(digamma(x + 1.0), digamma(x) + 1.0 / x, 1e-9)) {
      result.fail(case_tag("digamma recurrence", i) + " x=" + std::to_string(x));
    }
    const std::size_t len = 1 + rng.next_below(6);
    std::vector<double> logits(len);
    for (double& v : logits) v = -30.0 + 60.0 * rng.next_double();
    const auto probs = normalize_log_simplex(logits);
    if (!is_simplex(probs, 1e-12)) {
      result.fail(case_tag("softmax simplex", i));
    }
    const double shift = -50.0 + 100.0 * rng.next_double();
    std::vector<double> shifted = logits;
    for (double& v : shifted) v += shift;
    const auto probs2 = normalize_log_simplex(shifted);
    for (std::size_t j = 0; j < len; ++j) {
      if (!near(probs[j], probs2[j], 1e-9)) {
        result.fail(case_tag("softmax shift invariance", i));
        break;
      }
    }
    double direct = 0.0;
    for (double v : logits) direct += std::exp(v);
    if (!near(log_sum_exp(logits), std::log(direct), 1e-10)) {
      result.fail(case_tag("log_sum_exp", i));
    }
    const double h = entropy(probs);
    if (!(h >= -1e-12) || !(h <= std::log(static_cast<double>(len)) + 1e-9)) {
      result.fail(case_tag("entropy range", i));
    }
  }
  return result;
}

PropertyResult check_rng_properties(std::size_t cases, std::uint64_t seed) {
  PropertyResult result;
  Rng rng(seed);
  for (std::size_t i = 0; i < cases; ++i) {
    ++result.cases;
    // pair_index enumerates [0, C(n,2)) exactly once.
    const std::uint64_t n = 2 + rng.next_below(11);
    std::vector<char> seen(n * (n - 1) / 2, 0);
    bool bad = false;
    for (std::uint64_t a = 0; a < n && !bad; ++a) {
      for (std::uint64_t b = a + 1; b < n; ++b) {
        const std::uint64_t idx = pair_index(a, b, n);
        if (idx >= seen.size() || seen[idx]) {
          bad = true;
          break;
        }
        seen[idx] = 1;
      }
    }
    if (bad || std::find(seen.begin(), seen.end(), 0) != seen.end()) {
      result.fail(case_tag("pair_index bijection", i) + " n=" + std::to_string(n));
    }

    const std::uint64_t child_seed = rng.next_u64();
    Rng a(child_seed);
    Rng b(child_seed);
    for (int rep = 0; rep < 4; ++rep) {
      if (a.next_u64() != b.next_u64()) {
        result.fail(case_tag("same-seed determinism", i));
        break;
      }
    }
    Rng s1 = Rng(child_seed).stream(1, i);
    Rng s2 = Rng(child_seed).stream(1, i + 1);
    Rng s3 = Rng(child_seed).stream(2, i);
    const std::uint64_t v1 = s1.next_u64();
    if (v1 == s2.next_u64() || v1 == s3.next_u64()) {
      result.fail(case_tag("stream separation", i));
    }

    std::vector<double> alpha(1 + rng.next_below(4));
    for (double& v : alpha) v = 0.05 + 5.0 * rng.next_double();
    const auto draw = rng.next_dirichlet(alpha);
    double total = 0.0;
    for (double v : draw) {
      if (!(v >= 0.0) || !std::isfinite(v)) total = -1.0;
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      result.fail(case_tag("dirichlet simplex", i));
    }
    const std::uint64_t bound = 1 + rng.next_below(1000);
    if (rng.next_below(bound) >= bound) {
      result.fail(case_tag("next_below range", i));
    }
  }
  return result;
}

PropertyResult check_update_invariants(std::size_t cases, std::uint64_t seed) {
  PropertyResult result;
  Rng rng(seed);
  for (std::size_t i = 0; i < cases; ++i) {
    ++result.cases;
    Dataset data = make_tiny(rng);
    const std::size_t k = data.truth.beta_true.size();
    FitConfig cfg;
    cfg.num_topics = k;
    cfg.seed = seed ^ i;
    CoordinateAscent engine(data.graph, data.behaviors, cfg);
    Rng state_rng = rng.stream(99, i);
    engine.set_state(random_state(data.graph, data.behaviors, k, state_rng));

    for (std::size_t e = 0; e < data.graph.num_edges(); ++e) {
      const auto row = engine.edge_phi_update(e);
      if (row.size() != k || !is_simplex(row)) {
        result.fail(case_tag("edge weight simplex", i));
        break;
      }
    }
    for (std::size_t j = 0; j < data.behaviors.num_entries(); ++j) {
      const auto row = engine.lambda_row_update(j);
      if (!row.empty() && !is_simplex(row)) {
        result.fail(case_tag("selection weight simplex", i));
        break;
      }
    }
    double alpha_total = 0.0;
    for (double a : engine.hyper().alpha) alpha_total += a;
    const double n = static_cast<double>(data.graph.num_nodes());
    for (std::uint32_t node = 0; node < data.graph.num_nodes(); ++node) {
      const auto g = engine.gamma_update(node);
      double total = 0.0;
      for (double x : g) {
        if (!(x > 0.0)) total = -1e9;
        total += x;
      }
      // Every node owns one indicator per other node, so the posterior mass
      // above the prior is exactly N - 1.
      if (!near(total, alpha_total + (n - 1.0), 1e-9)) {
        result.fail(case_tag("membership mass", i) + " node " + std::to_string(node));
        break;
      }
      const auto bar = engine.phi_bar_update(node);
      if (!is_simplex(bar)) {
        result.fail(case_tag("stand-in simplex", i));
        break;
      }
    }
    const Matrix tau = engine.tau_update();
    double link_mass = 0.0;
    double nonlink_mass = 0.0;
    bool tau_ok = true;
    for (std::size_t t = 0; t < k; ++t) {
      tau_ok = tau_ok && tau(t, 0) > 0.0 && tau(t, 1) > 0.0;
      link_mass += tau(t, 0) - engine.hyper().eta.first;
      nonlink_mass += tau(t, 1) - engine.hyper().eta.second;
    }
    const double edges = static_cast<double>(data.graph.num_edges());
    const double nonlinks = static_cast<double>(data.graph.num_nonlink_pairs());
    if (!tau_ok || !near(link_mass, edges, 1e-9) || nonlink_mass < -1e-9 ||
        nonlink_mass > nonlinks + 1e-9) {
      result.fail(case_tag("link-rate mass", i));
    }
    const Matrix rho = engine.rho_update();
    double rho_mass = 0.0;
    bool rho_ok = true;
    for (std::size_t t = 0; t < k; ++t) {
      for (std::size_t v = 0; v < rho.cols(); ++v) {
        rho_ok = rho_ok && rho(t, v) >= engine.hyper().kappa[v] - 1e-12;
        rho_mass += rho(t, v) - engine.hyper().kappa[v];
      }
    }
    double linked_tokens = 0.0;
    for (std::uint32_t node = 0; node < data.graph.num_nodes(); ++node) {
      if (data.graph.degree(node) > 0) {
        linked_tokens += static_cast<double>(data.behaviors.total(node));
      }
    }
    if (!rho_ok || !near(rho_mass, linked_tokens, 1e-9)) {
      result.fail(case_tag("token mass", i));
    }
    const Matrix omega = engine.omega_direct_update();
    for (std::size_t t = 0; t < k; ++t) {
      const auto row = omega.row(t);
      bool positive = true;
      for (double x : row) positive = positive && x > 0.0;
      if (!positive || !is_simplex(row)) {
        result.fail(case_tag("token point-estimate simplex", i));
        break;
      }
    }
  }
  return result;
}

PropertyResult check_permutation_equivariance(std::size_t cases, std::uint64_t seed) {
  PropertyResult result;
  Rng rng(seed);
  for (std::size_t i = 0; i < cases; ++i) {
    ++result.cases;
    Dataset data = make_tiny(rng);
    const std::size_t k = data.truth.beta_true.size();
    const std::size_t n = data.graph.num_nodes();
    const Hyperparams hyper =
        Hyperparams::symmetric(k, data.behaviors.vocab_size(), 1.0, {1.0, 1.0}, 0.1, 1e-5);
    Rng state_rng = rng.stream(98, i);
    const VariationalState state = random_state(data.graph, data.behaviors, k, state_rng);
    const double base = compute_elbo(state, data.graph, data.behaviors, hyper);

    // Topic relabeling: permute every topic-indexed dimension together. The
    // prior is symmetric, so the objective cannot move.
    {
      const auto sigma = random_permutation(rng, k);
      VariationalState t = state;
      for (std::size_t node = 0; node < n; ++node) {
        for (std::size_t j = 0; j < k; ++j) {
          t.gamma(node, j) = state.gamma(node, sigma[j]);
          t.phi_bar(node, j) = state.phi_bar(node, sigma[j]);
        }
      }
      for (std::size_t e = 0; e < data.graph.num_edges(); ++e) {
        for (std::size_t j = 0; j < k; ++j) t.phi_edge(e, j) = state.phi_edge(e, sigma[j]);
      }
      for (std::size_t j = 0; j < k; ++j) {
        t.tau(j, 0) = state.tau(sigma[j], 0);
        t.tau(j, 1) = state.tau(sigma[j], 1);
        for (std::size_t v = 0; v < t.rho.cols(); ++v) t.rho(j, v) = state.rho(sigma[j], v);
      }
      const double relabeled = compute_elbo(t, data.graph, data.behaviors, hyper);
      if (!near(base, relabeled, 1e-9)) {
        result.fail(case_tag("topic relabeling", i));
      }
    }

    // Node relabeling: rebuild the dataset and remap every row.
    {
      const auto pi = random_permutation(rng, n);
      std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
      for (const auto& e : data.graph.edges()) {
        edges.push_back({static_cast<std::uint32_t>(pi[e.a]), static_cast<std::uint32_t>(pi[e.b])});
      }
      Graph permuted = Graph::from_pairs(n, edges);
      std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> triples;
      for (std::uint32_t node = 0; node < n; ++node) {
        for (const auto& entry : data.behaviors.entries(node)) {
          triples.push_back({static_cast<std::uint32_t>(pi[node]), entry.token, entry.count});
        }
      }
      BehaviorData behaviors =
          BehaviorData::from_triples(n, data.behaviors.vocab_size(), triples);

      VariationalState t;
      t.gamma = Matrix(n, k);
      t.phi_bar = Matrix(n, k);
      for (std::size_t node = 0; node < n; ++node) {
        for (std::size_t j = 0; j < k; ++j) {
          t.gamma(pi[node], j) = state.gamma(node, j);
          t.phi_bar(pi[node], j) = state.phi_bar(node, j);
        }
      }
      t.phi_edge = Matrix(permuted.num_edges(), k);
      for (std::size_t e = 0; e < data.graph.num_edges(); ++e) {
        const auto& edge = data.graph.edge(e);
        const std::uint32_t a = static_cast<std::uint32_t>(pi[edge.a]);
        const std::uint32_t b = static_cast<std::uint32_t>(pi[edge.b]);
        const std::size_t mapped = permuted.edge_id(std::min(a, b), std::max(a, b));
        for (std::size_t j = 0; j < k; ++j) t.phi_edge(mapped, j) = state.phi_edge(e, j);
      }
      t.lambda = LambdaTable(permuted, behaviors);
      for (std::size_t j = 0; j < data.behaviors.num_entries(); ++j) {
        const std::uint32_t node = data.behaviors.node_of_entry(j);
        const std::uint32_t target = static_cast<std::uint32_t>(pi[node]);
        // Locate the same token's entry under the new node id.
        const auto [first, last] = behaviors.entry_range(target);
        std::size_t mapped_entry = first;
        while (behaviors.entry(mapped_entry).token != data.behaviors.entry(j).token) {
          ++mapped_entry;
          if (mapped_entry >= last) break;
        }
        const auto src = state.lambda.row(j);
        auto dst = t.lambda.row(mapped_entry);
        const auto incident = data.graph.incident_edges(node);
        for (std::size_t c = 0; c < src.size(); ++c) {
          const auto& edge = data.graph.edge(incident[c]);
          const std::uint32_t a = static_cast<std::uint32_t>(pi[edge.a]);
          const std::uint32_t b = static_cast<std::uint32_t>(pi[edge.b]);
          const std::size_t mapped_edge = permuted.edge_id(std::min(a, b), std::max(a, b));
          dst[permuted.incident_ordinal(mapped_edge, target)] = src[c];
        }
      }
      t.tau = state.tau;
      t.rho = state.rho;
      const double relabeled = compute_elbo(t, permuted, behaviors, hyper);
      if (!near(base, relabeled, 1e-9)) {
        result.fail(case_tag("node relabeling", i));
      }
    }
  }
  return result;
}

PropertyResult check_objective_consistency(std::size_t cases, std::uint64_t seed) {
  PropertyResult result;
  Rng rng(seed);
  for (std::size_t i = 0; i < cases; ++i) {
    ++result.cases;
    Dataset data = make_tiny(rng, 6, 3, 4, /*allow_isolated_tokens=*/i % 5 == 0);
    const std::size_t k = data.truth.beta_true.size();
    const Hyperparams hyper =
        Hyperparams::symmetric(k, data.behaviors.vocab_size(), 1.0, {1.0, 1.0}, 0.1, 1e-5);
    Rng state_rng = rng.stream(97, i);
    const VariationalState state = random_state(data.graph, data.behaviors, k, state_rng);
    const double fast = compute_elbo(state, data.graph, data.behaviors, hyper);
    const double slow = naive_elbo(state, data.graph, data.behaviors, hyper);
    if (!near(fast, slow, 1e-9)) {
      result.fail(case_tag("pairwise objective agreement", i) + " fast=" + std::to_string(fast) +
                  " slow=" + std::to_string(slow));
    }

    FitConfig cfg;
    cfg.num_topics = k;
    cfg.seed = seed ^ (i * 2654435761u);
    cfg.omega_mode = (i % 2 == 0) ? FitConfig::OmegaMode::kVariationalRho
                                  : FitConfig::OmegaMode::kDirectWithSmoothing;
    CoordinateAscent engine(data.graph, data.behaviors, cfg);
    VariationalState start = state;
    engine.set_state(std::move(start));
    double previous = engine.objective();
    for (int s = 0; s < 3; ++s) {
      engine.sweep();
      const double value = engine.objective();
      if (value < previous - 1e-9 * std::max(1.0, std::abs(previous))) {
        result.fail(case_tag("sweep monotonicity", i) + " sweep " + std::to_string(s));
        break;
      }
      previous = value;
    }
  }
  return result;
}

PropertyResult check_metric_invariances(std::size_t cases, std::uint64_t seed) {
  PropertyResult result;
  Rng rng(seed);
  for (std::size_t i = 0; i < cases; ++i) {
    ++result.cases;
    const std::size_t np = 1 + rng.next_below(8);
    const std::size_t nn = 1 + rng.next_below(8);
    std::vector<double> pos(np);
    std::vector<double> neg(nn);
    // Coarse grid scores make ties routine.
    for (double& v : pos) v = 0.1 * static_cast<double>(rng.next_below(20));
    for (double& v : neg) v = 0.1 * static_cast<double>(rng.next_below(20));
    const double base = auc(pos, neg);
    if (!(base >= 0.0 && base <= 1.0)) {
      result.fail(case_tag("auc range", i));
    }
    auto transform = [](double x) { return std::exp(0.5 * x) + x * x * x; };
    std::vector<double> pos_t(np);
    std::vector<double> neg_t(nn);
    for (std::size_t j = 0; j < np; ++j) pos_t[j] = transform(pos[j]);
    for (std::size_t j = 0; j < nn; ++j) neg_t[j] = transform(neg[j]);
    if (!near(base, auc(pos_t, neg_t), 1e-12)) {
      result.fail(case_tag("auc monotone transform", i));
    }
    if (!near(base, 1.0 - auc(neg, pos), 1e-12)) {
      result.fail(case_tag("auc complement", i));
    }

    const std::size_t m = 2 + rng.next_below(9);
    std::vector<std::uint32_t> candidates(m);
    std::iota(candidates.begin(), candidates.end(), 0u);
    std::vector<double> scores(m);
    for (double& v : scores) v = 0.25 * static_cast<double>(rng.next_below(12));
    std::vector<std::uint32_t> positives;
    for (std::uint32_t c = 0; c < m; ++c) {
      if (rng.next_bernoulli(0.4)) positives.push_back(c);
    }
    if (positives.empty()) positives.push_back(static_cast<std::uint32_t>(rng.next_below(m)));
    const double rank =
        average_rank_score(RankedPrediction::make(candidates, scores, positives));
    if (!(rank >= 1.0 && rank <= static_cast<double>(m))) {
      result.fail(case_tag("average rank range", i));
    }
    std::vector<double> scores_t(m);
    for (std::size_t j = 0; j < m; ++j) scores_t[j] = transform(scores[j]);
    const double rank_t =
        average_rank_score(RankedPrediction::make(candidates, scores_t, positives));
    if (!near(rank, rank_t, 1e-12)) {
      result.fail(case_tag("average rank monotone transform", i));
    }

    const std::size_t rows = 2 + rng.next_below(5);
    const std::size_t k = 2 + rng.next_below(3);
    Matrix truth(rows, k);
    Matrix guess(rows, k);
    for (std::size_t r = 0; r < rows; ++r) {
      const auto a = random_simplex(rng, k);
      const auto b = random_simplex(rng, k);
      for (std::size_t c = 0; c < k; ++c) {
        truth(r, c) = a[c];
        guess(r, c) = b[c];
      }
    }
    const double mae = topic_recovery_mae(truth, guess);
    const auto sigma = random_permutation(rng, k);
    Matrix shuffled(rows, k);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < k; ++c) shuffled(r, c) = guess(r, sigma[c]);
    }
    if (!near(mae, topic_recovery_mae(truth, shuffled), 1e-12)) {
      result.fail(case_tag("alignment permutation invariance", i));
    }
    if (topic_recovery_mae(truth, truth) > 1e-12) {
      result.fail(case_tag("alignment self distance", i));
    }
  }
  return result;
}

PropertyResult check_checkpoint_roundtrip(std::size_t cases, std::uint64_t seed) {
  PropertyResult result;
  Rng rng(seed);
  for (std::size_t i = 0; i < cases; ++i) {
    ++result.cases;
    const std::size_t n = 1 + rng.next_below(6);
    const std::size_t k = 1 + rng.next_below(4);
    const std::size_t v = 1 + rng.next_below(5);
    FittedModel model;
    model.theta_hat = Matrix(n, k);
    for (std::size_t r = 0; r < n; ++r) {
      const auto row = random_simplex(rng, k);
      for (std::size_t c = 0; c < k; ++c) model.theta_hat(r, c) = row[c];
    }
    model.beta_hat.resize(k);
    for (double& b : model.beta_hat) b = 0.01 + 0.98 * rng.next_double();
    model.omega_hat = Matrix(k, v);
    for (std::size_t r = 0; r < k; ++r) {
      const auto row = random_simplex(rng, v);
      for (std::size_t c = 0; c < v; ++c) model.omega_hat(r, c) = row[c];
    }
    model.hyper.alpha.resize(k);
    for (double& a : model.hyper.alpha) a = 0.05 + 3.0 * rng.next_double();
    model.hyper.kappa.resize(v);
    for (double& x : model.hyper.kappa) x = 0.05 + 3.0 * rng.next_double();
    model.hyper.eta = {0.1 + rng.next_double(), 0.1 + rng.next_double()};
    model.hyper.epsilon = 1e-6 + 0.4 * rng.next_double();
    const std::size_t trace_len = rng.next_below(5);
    for (std::size_t t = 0; t < trace_len; ++t) {
      model.elbo_trace.push_back(-1000.0 + 2000.0 * rng.next_double());
    }
    model.iterations = rng.next_below(100);

    std::stringstream buffer;
    save_checkpoint(model, buffer);
    const FittedModel loaded = load_checkpoint(buffer);
    const bool same = loaded.theta_hat == model.theta_hat &&
                      loaded.beta_hat == model.beta_hat &&
                      loaded.omega_hat == model.omega_hat &&
                      loaded.hyper.alpha == model.hyper.alpha &&
                      loaded.hyper.kappa == model.hyper.kappa &&
                      loaded.hyper.eta == model.hyper.eta &&
                      loaded.hyper.epsilon == model.hyper.epsilon &&
                      loaded.elbo_trace == model.elbo_trace &&
                      loaded.iterations == model.iterations;
    if (!same) {
      result.fail(case_tag("checkpoint identity", i));
    }
  }
  return result;
}

}  // namespace clsm::testing
