#include "unicorn/uvfa.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace unicorn {
namespace {

template <class Fn>
void zip_tensors(NetParams& a, NetParams& b, const NetParams& c, Fn&& fn) {
  fn(a.enc_w, b.enc_w, c.enc_w);
  fn(a.enc_b, b.enc_b, c.enc_b);
  fn(a.hid_w, b.hid_w, c.hid_w);
  fn(a.hid_b, b.hid_b, c.hid_b);
  fn(a.out_w, b.out_w, c.out_w);
  fn(a.out_b, b.out_b, c.out_b);
}

void check_shape(const NetParams& params, Eigen::Index obs_rows, Eigen::Index goal_cols) {
  if (obs_rows != params.dims.obs_dim) {
    throw std::invalid_argument("uvfa: observation length " + std::to_string(obs_rows) +
                                " does not match obs_dim " + std::to_string(params.dims.obs_dim));
  }
  if (goal_cols != params.dims.goal_dim) {
    throw std::invalid_argument("uvfa: goal width " + std::to_string(goal_cols) +
                                " does not match goal_dim " + std::to_string(params.dims.goal_dim));
  }
}

// Observations are sparse one-hot blocks; skip the zeros.
void encode_column(const NetParams& p, const Eigen::Ref<const Eigen::VectorXd>& obs,
                   Eigen::Ref<Eigen::VectorXd> out) {
  out = p.enc_b;
  for (Eigen::Index j = 0; j < obs.size(); ++j) {
    const double x = obs[j];
    if (x != 0.0) out.noalias() += x * p.enc_w.col(j);
  }
  out = out.cwiseMax(0.0);
}

}  // namespace

void NetDims::validate() const {
  if (obs_dim <= 0 || repr_dim <= 0 || goal_dim <= 0 || hidden_dim <= 0 || num_actions <= 0 ||
      num_goals <= 0) {
    throw std::invalid_argument("uvfa: all network dimensions must be positive");
  }
}

NetParams NetParams::zeros(const NetDims& dims) {
  dims.validate();
  NetParams p;
  p.dims = dims;
  p.enc_w = Eigen::MatrixXd::Zero(dims.repr_dim, dims.obs_dim);
  p.enc_b = Eigen::VectorXd::Zero(dims.repr_dim);
  p.hid_w = Eigen::MatrixXd::Zero(dims.hidden_dim, dims.repr_dim + dims.goal_dim);
  p.hid_b = Eigen::VectorXd::Zero(dims.hidden_dim);
  p.out_w = Eigen::MatrixXd::Zero(dims.num_actions, dims.hidden_dim);
  p.out_b = Eigen::VectorXd::Zero(dims.num_actions);
  return p;
}

std::size_t NetParams::num_parameters() const {
  std::size_t n = 0;
  for_each_tensor([&n](const auto& t) { n += static_cast<std::size_t>(t.size()); });
  return n;
}

bool NetParams::all_finite() const {
  bool ok = true;
  for_each_tensor([&ok](const auto& t) { ok = ok && t.allFinite(); });
  return ok;
}

bool NetParams::operator==(const NetParams& o) const {
  return dims == o.dims && enc_w == o.enc_w && enc_b == o.enc_b && hid_w == o.hid_w &&
         hid_b == o.hid_b && out_w == o.out_w && out_b == o.out_b;
}

NetParams init_params(const NetDims& dims, std::uint64_t seed) {
  NetParams p = NetParams::zeros(dims);
  std::mt19937_64 rng(seed);
  auto fill = [&rng](Eigen::MatrixXd& w) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(w.cols()));
    std::uniform_real_distribution<double> u(-scale, scale);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
  };
  fill(p.enc_w);
  fill(p.hid_w);
  fill(p.out_w);
  return p;
}

Eigen::VectorXd encode(const NetParams& params, const Eigen::Ref<const Eigen::VectorXd>& observation) {
  check_shape(params, observation.size(), params.dims.goal_dim);
  Eigen::VectorXd f(params.dims.repr_dim);
  encode_column(params, observation, f);
  return f;
}

BatchForward forward(const NetParams& params, const Eigen::Ref<const Eigen::MatrixXd>& observations,
                     const Eigen::Ref<const Eigen::MatrixXd>& goals) {
  check_shape(params, observations.rows(), goals.cols());
  const auto& d = params.dims;
  BatchForward out;
  out.num_obs = static_cast<int>(observations.cols());
  out.num_goals = static_cast<int>(goals.rows());
  out.features.resize(d.repr_dim, out.num_obs);
  for (int n = 0; n < out.num_obs; ++n) encode_column(params, observations.col(n), out.features.col(n));

  // [f; g] concatenation splits into a per-observation and a per-goal term.
  Eigen::MatrixXd shared = params.hid_w.leftCols(d.repr_dim) * out.features;
  shared.colwise() += params.hid_b;
  const Eigen::MatrixXd goal_terms = params.hid_w.rightCols(d.goal_dim) * goals.transpose();

  out.hidden.resize(d.hidden_dim, static_cast<Eigen::Index>(out.num_obs) * out.num_goals);
  for (int n = 0; n < out.num_obs; ++n) {
    for (int k = 0; k < out.num_goals; ++k) {
      out.hidden.col(out.column(n, k)) = (shared.col(n) + goal_terms.col(k)).cwiseMax(0.0);
    }
  }
  out.q.noalias() = params.out_w * out.hidden;
  out.q.colwise() += params.out_b;
  return out;
}

Eigen::MatrixXd q_values(const NetParams& params, const Eigen::Ref<const Eigen::VectorXd>& observation,
                         const Eigen::Ref<const Eigen::MatrixXd>& goals) {
  const BatchForward fwd = forward(params, observation, goals);
  return fwd.q.transpose();
}

Eigen::VectorXd q_row(const NetParams& params, const Eigen::Ref<const Eigen::VectorXd>& observation,
                      const Eigen::Ref<const Eigen::VectorXd>& goal) {
  check_shape(params, observation.size(), goal.size());
  const auto& d = params.dims;
  Eigen::VectorXd f(d.repr_dim);
  encode_column(params, observation, f);
  Eigen::VectorXd h = params.hid_b;
  h.noalias() += params.hid_w.leftCols(d.repr_dim) * f;
  h.noalias() += params.hid_w.rightCols(d.goal_dim) * goal;
  h = h.cwiseMax(0.0);
  Eigen::VectorXd q = params.out_b;
  q.noalias() += params.out_w * h;
  return q;
}

double accumulate_gradients(const NetParams& params, const Eigen::Ref<const Eigen::MatrixXd>& observations,
                            const Eigen::Ref<const Eigen::MatrixXd>& goals, const BatchForward& fwd,
                            std::span<const TdTerm> terms, NetParams& grads) {
  const auto& d = params.dims;
  const int n_obs = fwd.num_obs;
  const int n_goals = fwd.num_goals;

  Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(d.num_actions, fwd.q.cols());
  double loss = 0.0;
  for (const TdTerm& term : terms) {
    const double q = fwd.value(term.obs, term.goal, term.action);
    const double err = term.target - q;
    if (!std::isfinite(err)) throw std::domain_error("uvfa: non-finite TD error");
    loss += 0.5 * err * err;
    dq(term.action, fwd.column(term.obs, term.goal)) -= err;
  }

  grads.out_w.noalias() += dq * fwd.hidden.transpose();
  grads.out_b += dq.rowwise().sum();

  Eigen::MatrixXd dh = params.out_w.transpose() * dq;
  dh = (fwd.hidden.array() > 0.0).select(dh, 0.0);
  grads.hid_b += dh.rowwise().sum();

  Eigen::MatrixXd d_shared = Eigen::MatrixXd::Zero(d.hidden_dim, n_obs);
  Eigen::MatrixXd d_goal = Eigen::MatrixXd::Zero(d.hidden_dim, n_goals);
  for (int n = 0; n < n_obs; ++n) {
    for (int k = 0; k < n_goals; ++k) {
      const auto col = dh.col(fwd.column(n, k));
      d_shared.col(n) += col;
      d_goal.col(k) += col;
    }
  }
  grads.hid_w.leftCols(d.repr_dim).noalias() += d_shared * fwd.features.transpose();
  grads.hid_w.rightCols(d.goal_dim).noalias() += d_goal * goals;

  Eigen::MatrixXd df = params.hid_w.leftCols(d.repr_dim).transpose() * d_shared;
  df = (fwd.features.array() > 0.0).select(df, 0.0);
  grads.enc_b += df.rowwise().sum();
  for (int n = 0; n < n_obs; ++n) {
    const auto obs = observations.col(n);
    for (Eigen::Index j = 0; j < obs.size(); ++j) {
      const double x = obs[j];
      if (x != 0.0) grads.enc_w.col(j).noalias() += x * df.col(n);
    }
  }
  return loss;
}

NetParams gradients(const NetParams& params, std::span<const Sample> batch) {
  NetParams grads = NetParams::zeros(params.dims);
  for (const Sample& s : batch) {
    if (!s.observation.allFinite() || !s.goal.allFinite() || !std::isfinite(s.target)) {
      throw std::domain_error("uvfa: non-finite sample");
    }
    if (s.action < 0 || s.action >= params.dims.num_actions) {
      throw std::invalid_argument("uvfa: action index out of range");
    }
    const Eigen::MatrixXd goal = s.goal.transpose();
    const BatchForward fwd = forward(params, s.observation, goal);
    const TdTerm term{0, 0, s.action, s.target};
    accumulate_gradients(params, s.observation, goal, fwd, std::span(&term, 1), grads);
  }
  return grads;
}

double sample_loss(const NetParams& params, std::span<const Sample> batch) {
  double loss = 0.0;
  for (const Sample& s : batch) {
    const double err = s.target - q_row(params, s.observation, s.goal)[s.action];
    loss += 0.5 * err * err;
  }
  return loss;
}

OptState make_opt_state(const NetParams& params, const RmsPropConfig& config) {
  return OptState{config, NetParams::zeros(params.dims)};
}

void rmsprop_step(NetParams& params, OptState& state, const NetParams& grads) {
  if (!(params.dims == grads.dims) || !(params.dims == state.accum.dims)) {
    throw std::invalid_argument("rmsprop: tensor shapes do not match");
  }
  const double decay = state.config.decay;
  const double lr = state.config.learning_rate;
  const double eps = state.config.epsilon;
  zip_tensors(params, state.accum, grads, [&](auto& p, auto& acc, const auto& g) {
    acc.array() = decay * acc.array() + (1.0 - decay) * g.array().square();
    p.array() -= lr * g.array() / (acc.array() + eps).sqrt();
  });
}

}  // namespace unicorn
