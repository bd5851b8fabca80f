#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "ddc/storable_drivers.hpp"

namespace ddc {

struct McmcConfig {
  int total_draws = 10'000;
  int burn_in = 8'000;
  double lambda0 = 2.38 * 2.38 / 4.0;
  double target_accept = 0.3;
  /// gamma_t = (1 + t)^(-adapt_decay)
  double adapt_decay = 0.5;
  double prior_mean = 0.0;
  double prior_var = 100.0;
  std::uint64_t seed = 1;
  /// Stop adapting lambda, mu and Sigma once burn-in is over.
  bool freeze_after_burn_in = true;
  /// Disables adaptation entirely (plain random-walk Metropolis).
  bool adapt = true;
};

struct McmcState {
  Vector theta;
  double log_post = 0.0;
  Vector mu;
  Matrix sigma;
  double lambda = 1.0;
  long long t = 0;
  long long nan_rejections = 0;
};

McmcState initial_mcmc_state(const Vector& theta0, double log_post, const McmcConfig& cfg);

struct MhStep {
  bool accepted = false;
  double accept_prob = 0.0;
};

using LogDensity = std::function<double(const Vector&)>;

/// One adaptive Metropolis-Hastings move: propose from N(theta_t, lambda_t Sigma_t),
/// accept with min(1, ratio) in log space, then (when `adapt`) update
///   lambda_{t+1} = exp(gamma_t (alpha - alpha*)) lambda_t
///   mu_{t+1}     = mu_t + gamma_t (theta_{t+1} - mu_t)
///   Sigma_{t+1}  = Sigma_t + gamma_t ((theta_{t+1} - mu_t)(theta_{t+1} - mu_t)^T - Sigma_t)
/// with gamma_t = (1 + t)^(-decay). The counter t advances every call.
MhStep adaptive_mh_step(McmcState& state, const LogDensity& log_posterior, const McmcConfig& cfg,
                        std::mt19937_64& rng, bool adapt = true);

/// Lower Cholesky factor of `m`; on failure adds 1e-8 trace/dim to the diagonal
/// and retries once before throwing NumericalError.
Matrix robust_cholesky(const Matrix& m);

struct PanelRecord {
  int household = 0;
  int period = 0;
  Index state_index = 0;
  /// Purchase action index (0 = no purchase).
  Index action = 0;
  int consumption = 0;
  int inventory = 0;
};

/// Household-major records, `periods` per household.
struct Panel {
  int households = 0;
  int periods = 0;
  std::uint64_t seed = 0;
  std::vector<PanelRecord> records;

  const PanelRecord& at(int h, int t) const { return records[static_cast<size_t>(h * periods + t)]; }
};

/// Simulates purchases from the logit CCPs implied by (value, consumption).
/// Inventory starts at 0; the first inclusive-value bin is drawn from the
/// stationary distribution of its chain.
Panel forward_simulate(const StorableGoodsModel& model, const Vector& value, const ConsumptionFn& consumption,
                       int n_households, int periods, std::uint64_t seed);

/// Periods dropped from the start of each household's record.
inline int burned_periods(int periods) { return static_cast<int>(std::floor(0.3 * periods)); }

/// Log-likelihood of observed quantities given solved CCPs: inventory is rebuilt
/// from I_0 = 0 with the observed quantities and `consumption`, and only
/// periods after the first 30% enter. Probabilities are floored at 1e-300.
double panel_log_likelihood(const StorableGoodsModel& model, const Ccp& ccp, const ConsumptionFn& consumption,
                            const Panel& data);

/// Thrown when the dynamic program cannot be solved at a parameter value.
class LikelihoodError : public Error {
 public:
  LikelihoodError(const std::string& what, Vector theta) : Error(what), theta_(std::move(theta)) {}
  const Vector& theta() const { return theta_; }

 private:
  Vector theta_;
};

/// Solves the model at theta and evaluates the panel log-likelihood. Keeps
/// the most recent accepted solution as warm start for the next solve.
class SimulatedLikelihood {
 public:
  SimulatedLikelihood(const StorableGoodsModel& base, const Panel& data, StorableLoopConfig solver = {});

  /// Evaluates at theta; the solution is held as pending until `accept`.
  double operator()(const Vector& theta);
  /// Promotes the pending solution to the warm start.
  void accept();

  long long solves() const { return solves_; }

 private:
  const StorableGoodsModel& base_;
  const Panel& data_;
  StorableLoopConfig cfg_;
  std::optional<StorableSolution> warm_;
  std::optional<StorableSolution> pending_;
  long long solves_ = 0;
};

/// One-shot evaluation without warm start.
double simulated_log_likelihood(const StorableGoodsModel& model, const Panel& data, const Vector& theta,
                                const StorableLoopConfig& solver = {});

struct McmcResult {
  /// One row per draw.
  Matrix draws;
  Vector log_post;
  std::vector<bool> accepted;
  Vector lambda;
  double acceptance_rate = 0.0;
  Vector posterior_mean;
  Vector posterior_sd;
  int burn_in = 0;
};

/// Generic adaptive chain on a log posterior; summaries use post-burn-in draws.
McmcResult run_chain(const LogDensity& log_posterior, const Vector& theta0, const McmcConfig& cfg,
                     const std::function<void(bool)>& on_step = {});

/// Chain over (theta1..theta4) with a normal prior and the simulated likelihood.
McmcResult run_mcmc(const StorableGoodsModel& model, const Panel& data, const Vector& theta0, const McmcConfig& cfg,
                    const StorableLoopConfig& solver = {});

/// `draw,theta1..thetaK,log_post,accepted,lambda`
void write_chain_csv(const std::filesystem::path& path, const McmcResult& chain);

/// `household,period,state_index,quantity,consumption,inventory` with quantity in units.
void write_panel_csv(const std::filesystem::path& path, const Panel& panel, const StorableGoodsModel& model);
Panel read_panel_csv(const std::filesystem::path& path, const StorableGoodsModel& model);

}  // namespace ddc
