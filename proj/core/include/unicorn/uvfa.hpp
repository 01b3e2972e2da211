#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Core>

namespace unicorn {

struct NetDims {
  int obs_dim = 0;
  int repr_dim = 128;
  int goal_dim = 0;
  int hidden_dim = 256;
  int num_actions = 4;
  int num_goals = 1;

  void validate() const;
  bool operator==(const NetDims&) const = default;
};

/// Trainable weights of the goal-conditioned value network.
///
///   f(s)     = relu(enc_w * obs + enc_b)                      repr_dim
///   h(s, g)  = relu(hid_w * [f(s); g] + hid_b)                hidden_dim
///   Q(s,.;g) = out_w * h(s, g) + out_b                        num_actions
///
/// The same struct holds gradients and RMSProp accumulators.
struct NetParams {
  NetDims dims;
  Eigen::MatrixXd enc_w;
  Eigen::VectorXd enc_b;
  Eigen::MatrixXd hid_w;
  Eigen::VectorXd hid_b;
  Eigen::MatrixXd out_w;
  Eigen::VectorXd out_b;

  static NetParams zeros(const NetDims& dims);

  /// Visits every tensor as a flat array, in a fixed order.
  template <class Fn>
  void for_each_tensor(Fn&& fn) {
    fn(enc_w.reshaped());
    fn(enc_b.reshaped());
    fn(hid_w.reshaped());
    fn(hid_b.reshaped());
    fn(out_w.reshaped());
    fn(out_b.reshaped());
  }
  template <class Fn>
  void for_each_tensor(Fn&& fn) const {
    fn(enc_w.reshaped());
    fn(enc_b.reshaped());
    fn(hid_w.reshaped());
    fn(hid_b.reshaped());
    fn(out_w.reshaped());
    fn(out_b.reshaped());
  }

  std::size_t num_parameters() const;
  bool all_finite() const;
  bool operator==(const NetParams& other) const;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
NetParams init_params(const NetDims& dims, std::uint64_t seed);

/// Goal-independent state representation f(s).
Eigen::VectorXd encode(const NetParams& params, const Eigen::Ref<const Eigen::VectorXd>& observation);

/// K x A matrix; row i holds Q(s, . ; g_i) for goal row i of `goals` (K x d).
Eigen::MatrixXd q_values(const NetParams& params, const Eigen::Ref<const Eigen::VectorXd>& observation,
                         const Eigen::Ref<const Eigen::MatrixXd>& goals);

/// Q(s, . ; g) for a single goal vector.
Eigen::VectorXd q_row(const NetParams& params, const Eigen::Ref<const Eigen::VectorXd>& observation,
                      const Eigen::Ref<const Eigen::VectorXd>& goal);

/// Activations for N observations evaluated against every one of K goals.
/// Pair (n, k) lives in column n * K + k of `hidden` and `q`.
struct BatchForward {
  int num_obs = 0;
  int num_goals = 0;
  Eigen::MatrixXd features;  // repr_dim x N
  Eigen::MatrixXd hidden;    // hidden_dim x N*K
  Eigen::MatrixXd q;         // num_actions x N*K

  int column(int obs, int goal) const { return obs * num_goals + goal; }
  double value(int obs, int goal, int action) const { return q(action, column(obs, goal)); }
};

/// `observations` is obs_dim x N (one observation per column); `goals` is K x d.
BatchForward forward(const NetParams& params, const Eigen::Ref<const Eigen::MatrixXd>& observations,
                     const Eigen::Ref<const Eigen::MatrixXd>& goals);

/// One squared TD term 1/2 (target - Q(obs, action; goal))^2 of a batch.
struct TdTerm {
  int obs = 0;
  int goal = 0;
  int action = 0;
  double target = 0.0;
};

/// Adds d/dtheta of sum 1/2 (target - Q)^2 over `terms` into `grads` and
/// returns the loss. Targets are treated as constants.
double accumulate_gradients(const NetParams& params, const Eigen::Ref<const Eigen::MatrixXd>& observations,
                            const Eigen::Ref<const Eigen::MatrixXd>& goals, const BatchForward& fwd,
                            std::span<const TdTerm> terms, NetParams& grads);

struct Sample {
  Eigen::VectorXd observation;
  Eigen::VectorXd goal;
  int action = 0;
  double target = 0.0;
};

/// Gradient of L = 1/2 sum (target - Q(s, a; g))^2 over independent samples.
/// Throws std::domain_error on non-finite inputs.
NetParams gradients(const NetParams& params, std::span<const Sample> batch);
double sample_loss(const NetParams& params, std::span<const Sample> batch);

struct RmsPropConfig {
  double learning_rate = 2e-4;
  double decay = 0.99;
  double epsilon = 0.01;
};

struct OptState {
  RmsPropConfig config;
  NetParams accum;
};

OptState make_opt_state(const NetParams& params, const RmsPropConfig& config = {});

/// accum <- decay * accum + (1 - decay) * g^2
/// param <- param - lr * g / sqrt(accum + eps)
void rmsprop_step(NetParams& params, OptState& state, const NetParams& grads);

}  // namespace unicorn
