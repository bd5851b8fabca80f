#include "ddc/estimation.hpp"

#include <cmath>
#include <iostream>

#include "ddc/csv_io.hpp"

namespace ddc {

McmcState initial_mcmc_state(const Vector& theta0, double log_post, const McmcConfig& cfg) {
  if (!(cfg.target_accept > 0.0 && cfg.target_accept < 1.0))
    throw InvalidArgument("McmcConfig: target acceptance must lie in (0,1)");
  if (!(cfg.adapt_decay > 0.0 && cfg.adapt_decay <= 1.0))
    throw InvalidArgument("McmcConfig: adapt_decay must lie in (0,1]");
  if (!(cfg.lambda0 > 0.0)) throw InvalidArgument("McmcConfig: lambda0 must be positive");
  McmcState s;
  s.theta = theta0;
  s.log_post = log_post;
  s.mu = theta0;
  s.sigma = Matrix::Identity(theta0.size(), theta0.size());
  s.lambda = cfg.lambda0;
  // gamma_1 = 2^(-decay) < 1 keeps Sigma full rank after the first update.
  s.t = 1;
  return s;
}

Matrix robust_cholesky(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const double trace = m.trace();
  const double jitter = 1e-8 * (trace > 0.0 ? trace / static_cast<double>(m.rows()) : 1.0);
  llt.compute(m + jitter * Matrix::Identity(m.rows(), m.cols()));
  if (llt.info() != Eigen::Success) throw NumericalError("robust_cholesky: matrix not positive definite", 0);
  return llt.matrixL();
}

MhStep adaptive_mh_step(McmcState& state, const LogDensity& log_posterior, const McmcConfig& cfg,
                        std::mt19937_64& rng, bool adapt) {
  const Index k = state.theta.size();
  const Matrix chol = robust_cholesky(state.lambda * state.sigma);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(k);
  for (Index i = 0; i < k; ++i) z(i) = normal(rng);
  const Vector candidate = state.theta + chol * z;
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);

  const double lp = log_posterior(candidate);
  MhStep step;
  if (std::isnan(lp)) {
    if (state.nan_rejections++ == 0) std::cerr << "warning: log posterior returned NaN; candidate rejected\n";
    step.accept_prob = 0.0;
  } else {
    const double log_ratio = lp - state.log_post;
    step.accept_prob = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
  }
  step.accepted = u < step.accept_prob;
  if (step.accepted) {
    state.theta = candidate;
    state.log_post = lp;
  }

  if (adapt) {
    const double gamma = std::pow(1.0 + static_cast<double>(state.t), -cfg.adapt_decay);
    state.lambda *= std::exp(gamma * (step.accept_prob - cfg.target_accept));
    const Vector diff = state.theta - state.mu;
    state.sigma += gamma * (diff * diff.transpose() - state.sigma);
    state.sigma = 0.5 * (state.sigma + state.sigma.transpose()).eval();
    state.mu += gamma * diff;
  }
  ++state.t;
  return step;
}

Panel forward_simulate(const StorableGoodsModel& model, const Vector& value, const ConsumptionFn& consumption,
                       int n_households, int periods, std::uint64_t seed) {
  if (n_households < 1 || periods < 1) throw InvalidArgument("forward_simulate: need households and periods");
  const Ccp ccp = storable_ccp(model, consumption, value);
  const Matrix& pw = model.omega_kernel()->matrix();
  const Vector pi = stationary_distribution(*model.omega_kernel());

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto draw = [&](const auto& probs) {
    const double u = unif(rng);
    double acc = 0.0;
    for (Index i = 0; i < probs.size(); ++i) {
      acc += probs(i);
      if (u < acc) return i;
    }
    return static_cast<Index>(probs.size() - 1);
  };

  Panel panel;
  panel.households = n_households;
  panel.periods = periods;
  panel.seed = seed;
  panel.records.reserve(static_cast<size_t>(n_households) * static_cast<size_t>(periods));
  for (int h = 0; h < n_households; ++h) {
    Index bin = draw(pi);
    int inv = 0;
    for (int t = 0; t < periods; ++t) {
      const Index s = model.state(inv, bin);
      const Index j = draw(ccp.probs().row(s));
      const int c = consumption(s, j);
      panel.records.push_back(PanelRecord{h, t, s, j, c, inv});
      inv = inv + model.quantity(j) - c;
      bin = draw(pw.row(bin));
    }
  }
  return panel;
}

double panel_log_likelihood(const StorableGoodsModel& model, const Ccp& ccp, const ConsumptionFn& consumption,
                            const Panel& data) {
  if (data.households < 1 || data.periods < 1 || data.records.empty())
    throw InvalidArgument("panel_log_likelihood: empty panel");
  require_size("panel_log_likelihood: records", static_cast<Index>(data.households) * data.periods,
               static_cast<Index>(data.records.size()));
  const int skip = burned_periods(data.periods);
  if (skip >= data.periods) throw InvalidArgument("panel_log_likelihood: no periods left after burn-in");
  const int i_max = model.params().i_max;
  double ll = 0.0;
  for (int h = 0; h < data.households; ++h) {
    int inv = 0;
    for (int t = 0; t < data.periods; ++t) {
      const PanelRecord& r = data.at(h, t);
      if (r.action < 0 || r.action >= model.action_count())
        throw InvalidArgument("panel_log_likelihood: unknown purchase action");
      const Index s = model.state(inv, model.bin_of(r.state_index));
      if (t >= skip) ll += std::log(std::max(ccp(s, r.action), 1e-300));
      inv = inv + model.quantity(r.action) - consumption(s, r.action);
      if (inv < 0 || inv > i_max) throw InvalidArgument("panel_log_likelihood: inventory left its bounds");
    }
  }
  return ll;
}

SimulatedLikelihood::SimulatedLikelihood(const StorableGoodsModel& base, const Panel& data, StorableLoopConfig solver)
    : base_(base), data_(data), cfg_(std::move(solver)) {
  if (data_.records.empty()) throw InvalidArgument("SimulatedLikelihood: empty panel");
  if (burned_periods(data_.periods) >= data_.periods)
    throw InvalidArgument("SimulatedLikelihood: no periods left after burn-in");
}

double SimulatedLikelihood::operator()(const Vector& theta) {
  require_size("SimulatedLikelihood: theta", 4, theta.size());
  const StorableGoodsModel model = base_.with_theta(StorableTheta(theta));
  StorableLoopConfig cfg = cfg_;
  if (warm_) {
    cfg.initial_consumption = warm_->consumption;
    cfg.initial_values = warm_->conditional_values;
    cfg.initial_value = warm_->value;
    if (warm_->y.size() == model.state_count()) cfg.initial_y = warm_->y;
  }
  try {
    pending_ = storable_policy_loop(model, cfg);
  } catch (const Error& e) {
    throw LikelihoodError(std::string("dynamic program failed at theta: ") + e.what(), theta);
  }
  ++solves_;
  return panel_log_likelihood(model, pending_->ccp, pending_->consumption, data_);
}

void SimulatedLikelihood::accept() {
  if (pending_) warm_ = std::move(pending_);
  pending_.reset();
}

double simulated_log_likelihood(const StorableGoodsModel& model, const Panel& data, const Vector& theta,
                                const StorableLoopConfig& solver) {
  SimulatedLikelihood lik(model, data, solver);
  return lik(theta);
}

McmcResult run_chain(const LogDensity& log_posterior, const Vector& theta0, const McmcConfig& cfg,
                     const std::function<void(bool)>& on_step) {
  if (cfg.total_draws < 1) throw InvalidArgument("run_chain: total_draws must be positive");
  if (cfg.burn_in < 0 || cfg.burn_in >= cfg.total_draws)
    throw InvalidArgument("run_chain: burn_in must lie in [0, total_draws)");
  const double lp0 = log_posterior(theta0);
  if (!std::isfinite(lp0)) throw InvalidArgument("run_chain: log posterior not finite at the starting point");
  if (on_step) on_step(true);

  McmcState state = initial_mcmc_state(theta0, lp0, cfg);
  std::mt19937_64 rng(cfg.seed);
  const Index k = theta0.size();
  McmcResult out;
  out.burn_in = cfg.burn_in;
  out.draws.resize(cfg.total_draws, k);
  out.log_post.resize(cfg.total_draws);
  out.lambda.resize(cfg.total_draws);
  out.accepted.resize(static_cast<size_t>(cfg.total_draws));
  int kept_accepts = 0;
  for (int i = 0; i < cfg.total_draws; ++i) {
    const bool adapt = cfg.adapt && (!cfg.freeze_after_burn_in || i < cfg.burn_in);
    const MhStep step = adaptive_mh_step(state, log_posterior, cfg, rng, adapt);
    if (on_step) on_step(step.accepted);
    out.draws.row(i) = state.theta.transpose();
    out.log_post(i) = state.log_post;
    out.lambda(i) = state.lambda;
    out.accepted[static_cast<size_t>(i)] = step.accepted;
    if (i >= cfg.burn_in && step.accepted) ++kept_accepts;
  }
  const Index kept = cfg.total_draws - cfg.burn_in;
  const Matrix post = out.draws.bottomRows(kept);
  out.acceptance_rate = static_cast<double>(kept_accepts) / static_cast<double>(kept);
  out.posterior_mean = post.colwise().mean().transpose();
  const Matrix centered = post.rowwise() - out.posterior_mean.transpose();
  out.posterior_sd = Vector::Zero(k);
  if (kept > 1)
    out.posterior_sd = (centered.array().square().colwise().sum() / static_cast<double>(kept - 1)).sqrt().transpose();
  return out;
}

McmcResult run_mcmc(const StorableGoodsModel& model, const Panel& data, const Vector& theta0, const McmcConfig& cfg,
                    const StorableLoopConfig& solver) {
  if (data.records.empty()) throw InvalidArgument("run_mcmc: empty panel");
  if (!(cfg.prior_var > 0.0)) throw InvalidArgument("run_mcmc: prior variance must be positive");
  SimulatedLikelihood lik(model, data, solver);
  const LogDensity log_post = [&](const Vector& theta) {
    const double prior = -0.5 * (theta.array() - cfg.prior_mean).square().sum() / cfg.prior_var;
    return lik(theta) + prior;
  };
  return run_chain(log_post, theta0, cfg, [&](bool accepted) {
    if (accepted) lik.accept();
  });
}

void write_chain_csv(const std::filesystem::path& path, const McmcResult& chain) {
  std::vector<std::string> header{"draw"};
  for (Index k = 0; k < chain.draws.cols(); ++k) header.push_back("theta" + std::to_string(k + 1));
  header.insert(header.end(), {"log_post", "accepted", "lambda"});
  CsvWriter w(path, header);
  for (Index i = 0; i < chain.draws.rows(); ++i) {
    w << static_cast<long long>(i);
    for (Index k = 0; k < chain.draws.cols(); ++k) w << chain.draws(i, k);
    w << chain.log_post(i) << static_cast<int>(chain.accepted[static_cast<size_t>(i)]) << chain.lambda(i);
    w.end_row();
  }
}

void write_panel_csv(const std::filesystem::path& path, const Panel& panel, const StorableGoodsModel& model) {
  CsvWriter w(path, {"household", "period", "state_index", "quantity", "consumption", "inventory"});
  for (const auto& r : panel.records) {
    w << r.household << r.period << static_cast<long long>(r.state_index) << model.quantity(r.action)
      << r.consumption << r.inventory;
    w.end_row();
  }
}

Panel read_panel_csv(const std::filesystem::path& path, const StorableGoodsModel& model) {
  const CsvTable t = read_csv(path);
  if (t.header != std::vector<std::string>{"household", "period", "state_index", "quantity", "consumption",
                                           "inventory"})
    throw InvalidArgument("read_panel_csv: unexpected header in " + path.string());
  Panel p;
  for (const auto& row : t.rows) {
    PanelRecord r;
    r.household = static_cast<int>(row[0]);
    r.period = static_cast<int>(row[1]);
    r.state_index = static_cast<Index>(row[2]);
    const int q = static_cast<int>(row[3]);
    r.action = -1;
    for (Index j = 0; j < model.action_count(); ++j)
      if (model.quantity(j) == q) r.action = j;
    if (r.action < 0) throw InvalidArgument("read_panel_csv: unknown quantity " + std::to_string(q));
    r.consumption = static_cast<int>(row[4]);
    r.inventory = static_cast<int>(row[5]);
    p.households = std::max(p.households, r.household + 1);
    p.periods = std::max(p.periods, r.period + 1);
    p.records.push_back(r);
  }
  if (static_cast<size_t>(p.households) * static_cast<size_t>(p.periods) != p.records.size())
    throw InvalidArgument("read_panel_csv: panel is not rectangular");
  for (size_t i = 0; i < p.records.size(); ++i) {
    const auto& r = p.records[i];
    if (static_cast<size_t>(r.household * p.periods + r.period) != i)
      throw InvalidArgument("read_panel_csv: records must be household-major and period-ordered");
  }
  return p;
}

}  // namespace ddc
