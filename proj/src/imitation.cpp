#include "gamelab/imitation.hpp"

#include <algorithm>
#include <cmath>

#include "gamelab/analytics.hpp"

namespace gamelab {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;
constexpr int kTrailLen = 5;
}  // namespace

Vec CircleWorldEnv::reset(const Pos2& start) {
  pos_ = start;
  trail_.clear();
  trail_.push_back(pos_);
  t_ = 0;
  return observation();
}

Vec CircleWorldEnv::observation() const {
  Vec obs(2 * kTrailLen, 0.0);
  // Oldest first; zero padding fills the missing history after reset.
  size_t pad = kTrailLen - trail_.size();
  for (size_t i = 0; i < trail_.size(); ++i) {
    obs[2 * (pad + i)] = trail_[i][0];
    obs[2 * (pad + i) + 1] = trail_[i][1];
  }
  return obs;
}

Vec CircleWorldEnv::unit_action(const Vec& raw) {
  if (raw.size() != 2) throw PreconditionError("circleworld: actions are 2-D");
  double n = std::hypot(raw[0], raw[1]);
  if (n < 1e-12) return {1.0, 0.0};
  return {raw[0] / n, raw[1] / n};
}

CircleWorldEnv::StepResult CircleWorldEnv::step(const Vec& raw_action) {
  Vec a = unit_action(raw_action);
  pos_[0] += cfg_.step_delta * a[0];
  pos_[1] += cfg_.step_delta * a[1];
  trail_.push_back(pos_);
  if (static_cast<int>(trail_.size()) > kTrailLen) trail_.pop_front();
  ++t_;
  return {observation(), t_ >= cfg_.horizon};
}

std::vector<ExpertMode> default_expert_modes() {
  return {{0.25, 1.0, 0.05, 1.0}, {0.5, 1.0, 0.05, 1.0}, {0.75, 1.0, 0.05, 1.0}};
}

double Trajectory::mean_radius() const {
  if (positions.empty()) return 0;
  double s = 0;
  for (const auto& p : positions) s += std::hypot(p[0], p[1]);
  return s / static_cast<double>(positions.size());
}

Pos2 sample_start(Rng& rng) {
  double theta = rng.uniform(0.0, 2.0 * M_PI);
  double r = rng.uniform(0.2, 0.8);
  return {r * std::cos(theta), r * std::sin(theta)};
}

Trajectory expert_generate(const ExpertMode& mode, int steps, Rng& rng,
                           const CircleWorldConfig& env_cfg, int code_size) {
  Trajectory t;
  if (steps < 1) return t;
  CircleWorldConfig cfg = env_cfg;
  cfg.horizon = steps;
  CircleWorldEnv env(cfg);
  Vec obs = env.reset(sample_start(rng));
  for (int i = 0; i < steps; ++i) {
    const Pos2& p = env.position();
    double r = std::hypot(p[0], p[1]);
    Vec radial = r < 1e-9 ? Vec{1.0, 0.0} : Vec{p[0] / r, p[1] / r};
    Vec tangent{-mode.direction * radial[1], mode.direction * radial[0]};
    Vec raw(2);
    for (int k = 0; k < 2; ++k)
      raw[k] = tangent[k] + mode.gain * (mode.radius - r) * radial[k] +
               mode.noise_scale * rng.normal();
    Vec unit = CircleWorldEnv::unit_action(raw);
    t.states.push_back(obs);
    t.actions.push_back(unit);
    t.raw_actions.push_back(unit);
    t.codes.push_back(Vec(static_cast<size_t>(code_size), 0.0));
    auto res = env.step(raw);
    obs = std::move(res.obs);
    t.positions.push_back(env.position());
  }
  return t;
}

GaussianPolicy::GaussianPolicy(const Config& cfg, Rng& rng) : cfg_(cfg) {
  std::vector<int> widths{cfg.obs_dim + cfg.code_size};
  for (int l = 0; l < cfg.hidden_layers; ++l) widths.push_back(cfg.hidden_width);
  widths.push_back(2 * cfg.act_dim);
  spec_ = MlpSpec{widths, Act::kTanh};
  params_ = mlp_init(spec_, rng, 0.1).values;
}

GaussianHead GaussianPolicy::head(const Vec& obs, const Vec& code) const {
  if (static_cast<int>(obs.size()) != cfg_.obs_dim ||
      static_cast<int>(code.size()) != cfg_.code_size)
    throw ConfigError("policy: observation or code dimension mismatch");
  return gaussian_head_eval(spec_, params_, concat(obs, code), cfg_.init_log_std);
}

std::pair<Vec, double> GaussianPolicy::sample(const Vec& obs, const Vec& code,
                                              Rng& rng) const {
  GaussianHead h = head(obs, code);
  return gaussian_reparam_sample(h, rng);
}

double GaussianPolicy::log_prob(const Vec& obs, const Vec& code, const Vec& raw_action) const {
  return gaussian_log_prob(head(obs, code), raw_action);
}

GailBatch GailBatch::from_trajectory(const Trajectory& t) {
  return {t.states, t.actions, t.codes};
}

namespace {

// (obs+act+code) x m column matrix of a batch, as one tape leaf.
Var batch_input(Tape& tape, const GailBatch& b) {
  if (b.size() == 0) throw ConfigError("gail: empty batch");
  size_t dim = b.states[0].size() + b.actions[0].size() + b.codes[0].size();
  Vec flat(dim * b.size());
  for (size_t j = 0; j < b.size(); ++j) {
    size_t r = 0;
    for (double x : b.states[j]) flat[(r++) * b.size() + j] = x;
    for (double x : b.actions[j]) flat[(r++) * b.size() + j] = x;
    for (double x : b.codes[j]) flat[(r++) * b.size() + j] = x;
  }
  return tape.leaf(flat, static_cast<int>(dim), static_cast<int>(b.size()));
}

}  // namespace

Var gail_disc_loss(Tape& tape, Var disc_params, const MlpSpec& disc_spec,
                   const GailBatch& expert, const GailBatch& policy) {
  Var d_policy = mlp_forward(tape, disc_params, disc_spec, batch_input(tape, policy));
  Var d_expert = mlp_forward(tape, disc_params, disc_spec, batch_input(tape, expert));
  return mean(d_policy) - mean(d_expert);
}

double gail_disc_loss_value(const MlpSpec& disc_spec, const Vec& disc_params,
                            const GailBatch& expert, const GailBatch& policy) {
  Tape tape;
  return tape.value_scalar(
      gail_disc_loss(tape, tape.leaf(disc_params), disc_spec, expert, policy));
}

double disc_mean_score(const MlpSpec& disc_spec, const Vec& disc_params,
                       const GailBatch& batch) {
  if (batch.size() == 0) throw ConfigError("gail: empty batch");
  double s = 0;
  for (size_t j = 0; j < batch.size(); ++j) {
    Vec in = concat(concat(batch.states[j], batch.actions[j]), batch.codes[j]);
    s += mlp_forward(disc_spec, disc_params, in)[0];
  }
  return s / static_cast<double>(batch.size());
}

void policy_update(GaussianPolicy& policy, const Trajectory& rollout, const Vec& rewards,
                   const PpoConfig& cfg) {
  size_t n = rollout.size();
  if (n == 0) throw PreconditionError("policy_update: empty rollout");
  if (rewards.size() != n) throw PreconditionError("policy_update: reward length mismatch");

  // Discounted reward-to-go with a mean baseline.
  Vec rtg(n);
  double acc = 0;
  for (size_t i = n; i-- > 0;) {
    acc = rewards[i] + cfg.gamma * acc;
    rtg[i] = acc;
  }
  double base = mean_of(rtg);
  Vec adv(n);
  for (size_t i = 0; i < n; ++i) adv[i] = rtg[i] - base;
  require_finite(adv, "policy_update advantages");

  const int act = policy.config().act_dim;
  const MlpSpec& spec = policy.spec();

  for (size_t lo = 0; lo < n; lo += static_cast<size_t>(cfg.minibatch)) {
    size_t hi = std::min(n, lo + static_cast<size_t>(cfg.minibatch));
    int m = static_cast<int>(hi - lo);

    int in_dim = spec.input_dim();
    Vec in_flat(static_cast<size_t>(in_dim) * m), act_flat(static_cast<size_t>(act) * m);
    Vec old_lp(static_cast<size_t>(m)), adv_row(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) {
      Vec in = concat(rollout.states[lo + j], rollout.codes[lo + j]);
      for (int r = 0; r < in_dim; ++r) in_flat[static_cast<size_t>(r) * m + j] = in[r];
      for (int r = 0; r < act; ++r)
        act_flat[static_cast<size_t>(r) * m + j] = rollout.raw_actions[lo + j][r];
      old_lp[j] = rollout.policy_log_probs[lo + j];
      adv_row[j] = adv[lo + j];
    }

    Tape tape;
    Var params = tape.leaf(policy.params());
    Var raw = mlp_forward(tape, params, spec, tape.leaf(in_flat, in_dim, m));
    Var mean_m = slice_rows(raw, 0, act);
    Var logstd_m = clamp(tape.add_const(slice_rows(raw, act, act), policy.log_std_offset()),
                         kLogStdMin, kLogStdMax);
    Var actions = tape.leaf(act_flat, act, m);
    Var z = (actions - mean_m) * exp(-logstd_m);
    Var lp_terms = tape.add_const(-(0.5 * square(z)) - logstd_m, -kHalfLog2Pi);
    Var lp = col_sums(lp_terms);
    Var ratio = exp(lp - tape.leaf(old_lp, 1, m));
    Var a_row = tape.leaf(adv_row, 1, m);
    Var surr1 = ratio * a_row;
    Var surr2 = clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip) * a_row;
    Var obj = mean(surr1 - relu(surr1 - surr2));  // elementwise min
    tape.backward(obj);
    Vec g = tape.adjoint(params);
    require_finite(g, "policy_update gradient");
    axpy(cfg.lr, g, policy.mutable_params());
  }
  require_finite(policy.params(), "policy_update");
}

Trajectory correlated_rollout(const GaussianPolicy& policy, const MediatorPolicy* mediator,
                              CircleWorldEnv& env, int n, Rng& rng, CodeMode mediator_mode,
                              bool deterministic_actions) {
  Trajectory t;
  if (n <= 0) return t;
  const int c = policy.config().code_size;
  Vec obs = env.reset(sample_start(rng));
  Vec code(static_cast<size_t>(c), 0.0);  // the first code is always zero
  bool done = false;
  for (int i = 0; i < n && !done; ++i) {
    if (i > 0 && mediator != nullptr) {
      // Code for this step comes from the freshest (state, action) pair.
      Vec info = concat(obs, t.actions.back());
      auto e = mediator->emit_code(info, mediator_mode, rng);
      code = e.code;
      t.mediator_log_probs.push_back(e.log_prob);
    }
    Vec raw;
    double lp;
    if (deterministic_actions) {
      raw = policy.head(obs, code).mean;
      lp = policy.log_prob(obs, code, raw);
    } else {
      std::tie(raw, lp) = policy.sample(obs, code, rng);
    }
    t.states.push_back(obs);
    t.codes.push_back(code);
    t.raw_actions.push_back(raw);
    t.actions.push_back(CircleWorldEnv::unit_action(raw));
    t.policy_log_probs.push_back(lp);
    auto res = env.step(raw);
    obs = std::move(res.obs);
    done = res.done;
    t.positions.push_back(env.position());
  }
  return t;
}

FtnplGail::FtnplGail(const GailConfig& cfg, GailBatch expert_data, Rng rng)
    : cfg_(cfg),
      expert_data_(std::move(expert_data)),
      rng_(rng),
      policy_(cfg.policy, rng_),
      disc_spec_(MlpSpec{{10 + 2 + cfg.code_size, cfg.disc_hidden, cfg.disc_hidden, 1},
                         Act::kTanh}),
      mediator_(MediatorConfig{.input_dim = 12,
                               .code_size = cfg.code_size,
                               .learning_rate = cfg.mediator_lr},
                rng_),
      policy_batches_(cfg.queue_size),
      disc_queue_(cfg.queue_size),
      env_(cfg.env) {
  if (expert_data_.size() == 0) throw ConfigError("gail: expert data is empty");
  Rng init = rng_.derive(101);
  disc_params_ = mlp_init(disc_spec_, init, 0.1).values;
  disc_queue_.insert(disc_params_);
}

GailBatch FtnplGail::sample_expert_minibatch() {
  GailBatch mb;
  int take = std::min<int>(cfg_.expert_batch, static_cast<int>(expert_data_.size()));
  for (int i = 0; i < take; ++i) {
    size_t j = static_cast<size_t>(rng_.next_u64() % expert_data_.size());
    mb.states.push_back(expert_data_.states[j]);
    mb.actions.push_back(expert_data_.actions[j]);
    mb.codes.push_back(expert_data_.codes[j]);
  }
  return mb;
}

Vec FtnplGail::rollout_rewards(const Trajectory& t) const {
  Vec r(t.size(), 0.0);
  for (size_t i = 0; i < t.size(); ++i) {
    Vec in = concat(concat(t.states[i], t.actions[i]), t.codes[i]);
    for (const Vec& d : disc_queue_) r[i] += mlp_forward(disc_spec_, d, in)[0];
  }
  return r;
}

FtnplGail::IterationStats FtnplGail::iterate() {
  IterationStats stats;

  Trajectory rollout = correlated_rollout(policy_, &mediator_, env_, cfg_.episode_len, rng_);
  GailBatch batch = GailBatch::from_trajectory(rollout);
  policy_batches_.insert(batch);
  GailBatch expert_mb = sample_expert_minibatch();

  // Policy ascends the summed scores of the queued discriminators.
  Vec rewards = rollout_rewards(rollout);
  Vec policy_before = policy_.params();
  policy_update(policy_, rollout, rewards, cfg_.ppo);
  stats.policy_step_norm_sq = norm2_sq(sub(policy_.params(), policy_before));

  // Discriminator: one follow-the-leader step against every queued batch.
  Vec disc_before = disc_params_;
  {
    Tape tape;
    Var d = tape.leaf(disc_params_);
    Var total{};
    for (int i = 0; i < policy_batches_.size(); ++i) {
      Var term = gail_disc_loss(tape, d, disc_spec_, expert_mb, policy_batches_[i]);
      total = total.valid() ? total + term : term;
    }
    tape.backward(total);
    Vec g = tape.adjoint(d);
    require_finite(g, "gail disc gradient");
    axpy(-cfg_.disc_lr, g, disc_params_);
  }
  stats.disc_step_norm_sq = norm2_sq(sub(disc_params_, disc_before));

  // Mediator reward over the queued strategies at the current code. Both
  // queues grow in lockstep, one insertion per iteration.
  int k = policy_batches_.size();
  if (disc_queue_.size() != k)
    throw PreconditionError("gail: queue sizes diverged");
  std::vector<double> expert_means(static_cast<size_t>(disc_queue_.size()));
  for (int j = 0; j < disc_queue_.size(); ++j)
    expert_means[static_cast<size_t>(j)] = disc_mean_score(disc_spec_, disc_queue_[j], expert_mb);
  Vec u_pi(static_cast<size_t>(k), 0.0), u_d(static_cast<size_t>(k), 0.0);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < disc_queue_.size(); ++j) {
      double s = disc_mean_score(disc_spec_, disc_queue_[j], policy_batches_[i]);
      u_pi[static_cast<size_t>(i)] += -s;                  // policy loss: negated score
      u_d[static_cast<size_t>(j)] += s - expert_means[static_cast<size_t>(j)];
    }
  }
  stats.r_m = mediator_reward(marginal_gains(u_pi, u_d), cfg_.penalty);
  baseline_.add(stats.r_m);
  if (!rollout.mediator_log_probs.empty()) {
    std::vector<Vec> infos, codes;
    for (size_t i = 1; i < rollout.size(); ++i) {
      infos.push_back(concat(rollout.states[i], rollout.actions[i - 1]));
      codes.push_back(rollout.codes[i]);
    }
    mediator_.score_update_batch(infos, codes, stats.r_m - baseline_.value(),
                                 cfg_.mediator_lr);
  }

  disc_queue_.insert(disc_params_);

  stats.score_gap = disc_mean_score(disc_spec_, disc_params_, batch) -
                    disc_mean_score(disc_spec_, disc_params_, expert_mb);
  stats.mean_radius = rollout.mean_radius();
  return stats;
}

Trajectory FtnplGail::eval_rollout(int n, Rng& rng) {
  return correlated_rollout(policy_, &mediator_, env_, n, rng, CodeMode::kMean,
                            /*deterministic_actions=*/true);
}

void write_trajectory_csv(const std::string& path, const Trajectory& t) {
  std::string out = "x,y,ax,ay\n";
  for (size_t i = 0; i < t.size(); ++i) {
    out += format_double(t.positions[i][0]) + "," + format_double(t.positions[i][1]) + "," +
           format_double(t.actions[i][0]) + "," + format_double(t.actions[i][1]) + "\n";
  }
  atomic_write_file(path, out);
}

}  // namespace gamelab
