#pragma once

#include <array>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "gamelab/learners.hpp"
#include "gamelab/mediator.hpp"
#include "gamelab/mlp.hpp"
#include "gamelab/rng.hpp"
#include "gamelab/vec.hpp"

namespace gamelab {

using Pos2 = std::array<double, 2>;

struct CircleWorldConfig {
  double step_delta = 0.05;
  int horizon = 100;
};

// Synthetic 2-D world: the observation is the flattened trail of the last
// five positions (10 numbers, zero-padded right after reset) and an episode
// ends only at the step cap. Actions are normalized to unit length before
// the position moves by step_delta.
class CircleWorldEnv {
 public:
  explicit CircleWorldEnv(const CircleWorldConfig& cfg) : cfg_(cfg) {}

  Vec reset(const Pos2& start);

  struct StepResult {
    Vec obs;
    bool done = false;
  };
  StepResult step(const Vec& raw_action);

  const Pos2& position() const { return pos_; }
  Vec observation() const;
  const CircleWorldConfig& config() const { return cfg_; }

  static Vec unit_action(const Vec& raw);

 private:
  CircleWorldConfig cfg_;
  Pos2 pos_{0, 0};
  std::deque<Pos2> trail_;  // newest at the back, at most 5 entries
  int t_ = 0;
};

// One expert behavior: orbit the origin at `radius` with proportional radial
// correction and a little action noise.
struct ExpertMode {
  double radius = 0.5;
  double direction = 1.0;  // +1 counter-clockwise
  double noise_scale = 0.05;
  double gain = 1.0;
};

// The spread of radii used for the three demonstration modes.
std::vector<ExpertMode> default_expert_modes();

struct Trajectory {
  std::vector<Vec> states;             // observations
  std::vector<Vec> actions;            // executed unit actions
  std::vector<Vec> raw_actions;        // pre-normalization samples
  std::vector<Vec> codes;              // aligned with states/actions
  std::vector<double> rewards;
  std::vector<double> policy_log_probs;
  std::vector<double> mediator_log_probs;  // one per emitted (non-initial) code
  std::vector<Pos2> positions;         // position after each action

  size_t size() const { return states.size(); }
  double mean_radius() const;
};

// Draw an episode start: uniform angle, radius uniform in [0.2, 0.8].
Pos2 sample_start(Rng& rng);

// Proportional-control expert rollout; codes are all zero.
Trajectory expert_generate(const ExpertMode& mode, int steps, Rng& rng,
                           const CircleWorldConfig& env_cfg, int code_size);

// Gaussian MLP policy over 2-D raw actions, conditioned on [obs; code].
class GaussianPolicy {
 public:
  struct Config {
    int obs_dim = 10;
    int act_dim = 2;
    int code_size = 2;
    int hidden_width = 32;
    int hidden_layers = 2;
    double init_log_std = -0.5;
  };

  GaussianPolicy(const Config& cfg, Rng& rng);

  GaussianHead head(const Vec& obs, const Vec& code) const;
  std::pair<Vec, double> sample(const Vec& obs, const Vec& code, Rng& rng) const;
  double log_prob(const Vec& obs, const Vec& code, const Vec& raw_action) const;

  const Vec& params() const { return params_; }
  Vec& mutable_params() { return params_; }
  const MlpSpec& spec() const { return spec_; }
  const Config& config() const { return cfg_; }
  double log_std_offset() const { return cfg_.init_log_std; }

 private:
  Config cfg_;
  MlpSpec spec_;
  Vec params_;
};

// A batch of (state, action, code) triples for discriminator training.
struct GailBatch {
  std::vector<Vec> states;
  std::vector<Vec> actions;
  std::vector<Vec> codes;

  size_t size() const { return states.size(); }
  static GailBatch from_trajectory(const Trajectory& t);
};

// Wasserstein-style discriminator utility on a tape:
//   mean d(s, a, c) over the policy batch - mean d(s, a, c) over the expert
// batch. The discriminator descends this; no entropy term, no gradient
// penalty, no clipping.
Var gail_disc_loss(Tape& tape, Var disc_params, const MlpSpec& disc_spec,
                   const GailBatch& expert, const GailBatch& policy);

double gail_disc_loss_value(const MlpSpec& disc_spec, const Vec& disc_params,
                            const GailBatch& expert, const GailBatch& policy);

// Mean discriminator score of a batch (plain forward).
double disc_mean_score(const MlpSpec& disc_spec, const Vec& disc_params,
                       const GailBatch& batch);

struct PpoConfig {
  double clip = 0.2;
  double gamma = 0.99;
  double lr = 3e-3;
  int minibatch = 25;
};

// One epoch of clipped-surrogate ascent on discounted reward-to-go
// advantages with a mean baseline.
void policy_update(GaussianPolicy& policy, const Trajectory& rollout, const Vec& rewards,
                   const PpoConfig& cfg);

// Correlated rollout: the first code is zero, later codes come from the
// mediator applied to the fresh (state, action) pair. A null mediator keeps
// all codes at zero.
Trajectory correlated_rollout(const GaussianPolicy& policy, const MediatorPolicy* mediator,
                              CircleWorldEnv& env, int n, Rng& rng,
                              CodeMode mediator_mode = CodeMode::kSample,
                              bool deterministic_actions = false);

struct GailConfig {
  CircleWorldConfig env;
  ExpertMode mode;
  int code_size = 2;
  int queue_size = 5;
  int episode_len = 100;
  int expert_batch = 100;
  double disc_lr = 1e-3;
  double mediator_lr = 1e-3;
  Penalty penalty = Penalty::kSquared;
  PpoConfig ppo;
  GaussianPolicy::Config policy;
  int disc_hidden = 32;
  double policy_init_log_std = -0.5;
};

// Adversarial imitation with queue-based follow-the-leader updates and a
// mediator rewarded for equalizing queued payoffs. Queues hold the last K
// policy rollout batches and the last K discriminator snapshots.
class FtnplGail {
 public:
  FtnplGail(const GailConfig& cfg, GailBatch expert_data, Rng rng);

  struct IterationStats {
    double score_gap = 0;   // mean policy score - mean expert score
    double r_m = 0;
    double mean_radius = 0;
    double policy_step_norm_sq = 0;
    double disc_step_norm_sq = 0;
  };

  IterationStats iterate();

  const GaussianPolicy& policy() const { return policy_; }
  const Vec& disc_params() const { return disc_params_; }
  const MlpSpec& disc_spec() const { return disc_spec_; }
  int policy_queue_size() const { return policy_batches_.size(); }
  int disc_queue_size() const { return disc_queue_.size(); }

  // Deterministic evaluation rollout with mean actions and mean codes.
  Trajectory eval_rollout(int n, Rng& rng);

 private:
  Vec rollout_rewards(const Trajectory& t) const;
  GailBatch sample_expert_minibatch();

  GailConfig cfg_;
  GailBatch expert_data_;
  Rng rng_;
  GaussianPolicy policy_;
  MlpSpec disc_spec_;
  Vec disc_params_;
  MediatorPolicy mediator_;
  RunningMean baseline_;
  HistoryQueue<GailBatch> policy_batches_;
  HistoryQueue<Vec> disc_queue_;
  CircleWorldEnv env_;
};

// Expert/learned trajectories in the x,y,ax,ay schema (atomic write).
void write_trajectory_csv(const std::string& path, const Trajectory& t);

}  // namespace gamelab
