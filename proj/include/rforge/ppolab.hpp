#pragma once

// Desk-scale PPO laboratory. A synthetic contextual bandit models the
// "speculative answering" failure mode: per context the policy picks
// `careful` or `guess`, the environment samples correctness and a
// consistency label, and the reward function either looks only at
// correctness (rule-based) or pays out per quadrant (confidence-penalizing).
// The policy is a softmax over per-context logits with analytic gradients;
// the trainer ascends the clipped surrogate. No critic: the baseline is a
// batch statistic.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rforge/labeling.hpp"
#include "rforge/util.hpp"

namespace rforge::ppolab {

inline constexpr int kActions = 2;  // 0 = careful, 1 = guess
inline constexpr int kCareful = 0;
inline constexpr int kGuess = 1;

struct ActionModel {
  double p_correct = 0.5;
  double p_certain_given_correct = 0.5;
  double p_certain_given_wrong = 0.5;
};

struct LabEnvironment {
  // One archetype per context; actions indexed careful, guess.
  std::vector<std::array<ActionModel, kActions>> contexts;

  void validate() const {
    if (contexts.empty()) throw DataError("environment has no contexts");
    for (const auto& ctx : contexts)
      for (const auto& a : ctx)
        for (double p : {a.p_correct, a.p_certain_given_correct, a.p_certain_given_wrong})
          if (p < 0.0 || p > 1.0) throw DataError("environment probability out of [0,1]");
  }

  // careful: mostly right and self-consistent; guess: barely worse on
  // correctness but near-random consistency.
  static LabEnvironment default_scenario(int n_contexts = 4) {
    LabEnvironment env;
    ActionModel careful{0.60, 0.9, 0.9};
    ActionModel guess{0.55, 0.1, 0.1};
    env.contexts.assign(static_cast<std::size_t>(n_contexts), {careful, guess});
    return env;
  }

  static LabEnvironment from_json(const nlohmann::json& j) {
    LabEnvironment env;
    for (const auto& ctx : j.at("contexts")) {
      std::array<ActionModel, kActions> models;
      int i = 0;
      for (const char* name : {"careful", "guess"}) {
        const auto& a = ctx.at(name);
        models[static_cast<std::size_t>(i)].p_correct = a.at("p_correct").get<double>();
        models[static_cast<std::size_t>(i)].p_certain_given_correct =
            a.at("p_certain_given_correct").get<double>();
        models[static_cast<std::size_t>(i)].p_certain_given_wrong =
            a.at("p_certain_given_wrong").get<double>();
        ++i;
      }
      env.contexts.push_back(models);
    }
    env.validate();
    return env;
  }
};

struct PolicyState {
  // logits[context][action]
  std::vector<std::array<double, kActions>> logits;

  explicit PolicyState(std::size_t n_contexts = 0) : logits(n_contexts, {0.0, 0.0}) {}

  std::array<double, kActions> probs(std::size_t context) const {
    const auto& l = logits[context];
    double m = std::max(l[0], l[1]);
    double e0 = std::exp(l[0] - m), e1 = std::exp(l[1] - m);
    double z = e0 + e1;
    return {e0 / z, e1 / z};
  }

  double log_prob(std::size_t context, int action) const {
    const auto& l = logits[context];
    double m = std::max(l[0], l[1]);
    double z = std::exp(l[0] - m) + std::exp(l[1] - m);
    return l[static_cast<std::size_t>(action)] - m - std::log(z);
  }
};

enum class RewardKind { RuleBased, ConfidencePenalizing, MockScorer };

inline RewardKind reward_kind_from_string(const std::string& s) {
  if (s == "rule_based") return RewardKind::RuleBased;
  if (s == "confidence_penalizing") return RewardKind::ConfidencePenalizing;
  if (s == "mock_scorer") return RewardKind::MockScorer;
  throw DataError("unknown reward kind: " + s);
}

struct RewardFunction {
  RewardKind kind = RewardKind::RuleBased;
  // Payoff per quadrant, indexed T&C, T&U, F&C, F&U. Consulted for
  // confidence_penalizing and mock_scorer; rule_based pays on correctness only.
  std::array<double, 4> payoffs = {1.0, 0.2, 0.0, 0.0};

  static RewardFunction rule_based() { return {RewardKind::RuleBased, {1.0, 1.0, 0.0, 0.0}}; }
  static RewardFunction confidence_penalizing() {
    return {RewardKind::ConfidencePenalizing, {1.0, 0.2, 0.0, 0.0}};
  }

  double operator()(bool correct, bool certain) const {
    if (kind == RewardKind::RuleBased) return correct ? 1.0 : 0.0;
    Quadrant q = make_quadrant(correct ? Correctness::T : Correctness::F,
                               certain ? Confidence::C : Confidence::U);
    return payoffs[static_cast<std::size_t>(q)];
  }
};

enum class BaselineMode { BatchMean, PerContextMean };

struct PpoConfig {
  double epsilon = 0.2;
  double learning_rate = 0.3;
  int iterations = 500;
  int batch_size = 256;
  BaselineMode baseline = BaselineMode::BatchMean;
  std::uint64_t seed = 0;
  int ref_refresh_period = 1;  // iterations between reference-policy snapshots

  void validate() const {
    if (epsilon <= 0.0 || epsilon >= 1.0) throw DataError("epsilon must be in (0,1)");
    if (iterations < 0 || batch_size < 1 || ref_refresh_period < 1)
      throw DataError("bad ppo config");
  }
};

struct SurrogateTerm {
  double objective = 0.0;
  double gradient_factor = 0.0;  // r*A when the unclipped branch is active, else 0
};

// Pointwise clipped surrogate: r = exp(new - old),
// objective = min(r*A, clip(r, 1-eps, 1+eps)*A).
inline SurrogateTerm ppo_surrogate(double old_logprob, double new_logprob, double advantage,
                                   double epsilon) {
  if (!std::isfinite(old_logprob) || !std::isfinite(new_logprob) || !std::isfinite(advantage))
    throw DataError("ppo_surrogate: non-finite input");
  double r = std::exp(new_logprob - old_logprob);
  double clipped = std::clamp(r, 1.0 - epsilon, 1.0 + epsilon);
  double unclipped_term = r * advantage;
  double clipped_term = clipped * advantage;
  SurrogateTerm out;
  out.objective = std::min(unclipped_term, clipped_term);
  out.gradient_factor = unclipped_term <= clipped_term ? unclipped_term : 0.0;
  return out;
}

struct Sample {
  std::size_t context = 0;
  int action = 0;
  bool correct = false;
  bool certain = false;
  double reward = 0.0;
  double old_logprob = 0.0;
  double advantage = 0.0;
};

inline std::vector<double> compute_advantages(const std::vector<Sample>& batch,
                                              BaselineMode mode, std::size_t n_contexts) {
  if (batch.empty()) throw DataError("compute_advantages: empty batch");
  std::vector<double> out(batch.size());
  if (mode == BaselineMode::BatchMean) {
    double mean = 0.0;
    for (const auto& s : batch) mean += s.reward;
    mean /= static_cast<double>(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) out[i] = batch[i].reward - mean;
  } else {
    std::vector<double> sum(n_contexts, 0.0);
    std::vector<std::size_t> count(n_contexts, 0);
    for (const auto& s : batch) {
      sum[s.context] += s.reward;
      ++count[s.context];
    }
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto& s = batch[i];
      out[i] = s.reward - sum[s.context] / static_cast<double>(count[s.context]);
    }
  }
  return out;
}

// Mean clipped surrogate over a batch at the given policy. Shared by the
// trainer and the finite-difference gradient check.
inline double ppo_objective(const PolicyState& policy, const std::vector<Sample>& batch,
                            double epsilon) {
  double total = 0.0;
  for (const auto& s : batch) {
    double lp = policy.log_prob(s.context, s.action);
    total += ppo_surrogate(s.old_logprob, lp, s.advantage, epsilon).objective;
  }
  return total / static_cast<double>(batch.size());
}

// Analytic gradient of ppo_objective w.r.t. every logit. For a sample with
// active unclipped branch, d/dlogit(s,b) [r*A] = r*A * (1[b==a] - pi(b|s)).
inline std::vector<std::array<double, kActions>> ppo_gradient(const PolicyState& policy,
                                                              const std::vector<Sample>& batch,
                                                              double epsilon) {
  std::vector<std::array<double, kActions>> grad(policy.logits.size(), {0.0, 0.0});
  for (const auto& s : batch) {
    double lp = policy.log_prob(s.context, s.action);
    double gf = ppo_surrogate(s.old_logprob, lp, s.advantage, epsilon).gradient_factor;
    if (gf == 0.0) continue;
    auto p = policy.probs(s.context);
    for (int b = 0; b < kActions; ++b)
      grad[s.context][static_cast<std::size_t>(b)] +=
          gf * ((b == s.action ? 1.0 : 0.0) - p[static_cast<std::size_t>(b)]);
  }
  double n = static_cast<double>(batch.size());
  for (auto& g : grad)
    for (double& v : g) v /= n;
  return grad;
}

struct TracePoint {
  int iteration = 0;
  double mean_reward = 0.0;
  std::vector<double> pi_guess;  // per context
  double true_quality = 0.0;     // E[p_correct] under the current policy
};

struct TrainingResult {
  PolicyState policy{0};
  std::vector<TracePoint> trace;
};

inline TrainingResult run_training(const LabEnvironment& env, const RewardFunction& reward_fn,
                                   const PpoConfig& cfg) {
  env.validate();
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> ctx_dist(0, env.contexts.size() - 1);

  PolicyState policy(env.contexts.size());
  PolicyState ref = policy;

  TrainingResult out;
  out.trace.reserve(static_cast<std::size_t>(cfg.iterations));

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    if (iter % cfg.ref_refresh_period == 0) ref = policy;

    std::vector<Sample> batch(static_cast<std::size_t>(cfg.batch_size));
    double reward_sum = 0.0;
    for (auto& s : batch) {
      s.context = ctx_dist(rng);
      auto p = policy.probs(s.context);
      s.action = unit(rng) < p[kCareful] ? kCareful : kGuess;
      const ActionModel& m = env.contexts[s.context][static_cast<std::size_t>(s.action)];
      s.correct = unit(rng) < m.p_correct;
      s.certain = unit(rng) < (s.correct ? m.p_certain_given_correct : m.p_certain_given_wrong);
      s.reward = reward_fn(s.correct, s.certain);
      s.old_logprob = ref.log_prob(s.context, s.action);
      reward_sum += s.reward;
    }
    auto adv = compute_advantages(batch, cfg.baseline, env.contexts.size());
    for (std::size_t i = 0; i < batch.size(); ++i) batch[i].advantage = adv[i];

    auto grad = ppo_gradient(policy, batch, cfg.epsilon);
    for (std::size_t c = 0; c < policy.logits.size(); ++c)
      for (int a = 0; a < kActions; ++a) {
        double& l = policy.logits[c][static_cast<std::size_t>(a)];
        l += cfg.learning_rate * grad[c][static_cast<std::size_t>(a)];
        if (std::fabs(l) > 50.0) throw DataError("ppo training diverged: |logit| > 50");
      }

    TracePoint tp;
    tp.iteration = iter;
    tp.mean_reward = reward_sum / static_cast<double>(cfg.batch_size);
    double quality = 0.0;
    for (std::size_t c = 0; c < env.contexts.size(); ++c) {
      auto p = policy.probs(c);
      tp.pi_guess.push_back(p[kGuess]);
      quality += p[kCareful] * env.contexts[c][kCareful].p_correct +
                 p[kGuess] * env.contexts[c][kGuess].p_correct;
    }
    tp.true_quality = quality / static_cast<double>(env.contexts.size());
    out.trace.push_back(std::move(tp));
  }
  out.policy = policy;
  return out;
}

inline std::string trace_to_csv(const TrainingResult& result) {
  std::ostringstream out;
  out << "iteration,mean_reward";
  std::size_t n_ctx = result.trace.empty() ? 0 : result.trace.front().pi_guess.size();
  for (std::size_t c = 0; c < n_ctx; ++c) out << ",pi_guess_" << c;
  out << ",true_quality\n";
  out.precision(10);
  for (const auto& tp : result.trace) {
    out << tp.iteration << ',' << tp.mean_reward;
    for (double pg : tp.pi_guess) out << ',' << pg;
    out << ',' << tp.true_quality << '\n';
  }
  return out.str();
}

}  // namespace rforge::ppolab
