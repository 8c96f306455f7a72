#include "predscale/autoscaler.hpp"

#include <algorithm>
#include <cmath>

#include "predscale/errors.hpp"

namespace predscale {

namespace {

// Absorbs floating-point noise in the ratio so that e.g. 5 * 0.3 / 0.75 is
// treated as exactly 2 replicas, not 3.
constexpr double kRatioEpsilon = 1e-9;

}  // namespace

std::string_view to_string(ForecastModel model) {
  switch (model) {
    case ForecastModel::hold: return "hold";
    case ForecastModel::linear: return "linear";
    case ForecastModel::knn: return "knn";
    case ForecastModel::oracle: return "oracle";
  }
  return "hold";
}

ForecastModel parse_forecast_model(std::string_view name) {
  if (name == "hold" || name == "control") return ForecastModel::hold;
  if (name == "linear") return ForecastModel::linear;
  if (name == "knn") return ForecastModel::knn;
  if (name == "oracle") return ForecastModel::oracle;
  throw ConfigError("unknown model '" + std::string(name) +
                    "' (expected hold, linear, knn or oracle)");
}

std::string_view to_string(CombinationPolicy policy) {
  return policy == CombinationPolicy::model_only ? "model-only" : "max-with-reactive";
}

CombinationPolicy parse_combination_policy(std::string_view name) {
  if (name == "model-only") return CombinationPolicy::model_only;
  if (name == "max-with-reactive") return CombinationPolicy::max_with_reactive;
  throw ConfigError("unknown combination policy '" + std::string(name) + "'");
}

void AutoscalerConfig::validate() const {
  if (!(cpu_target > 0.0 && cpu_target <= 1.0)) throw ConfigError("cpu_target must be in (0, 1]");
  if (!(tolerance >= 0.0)) throw ConfigError("tolerance must be >= 0");
  if (min_replicas < 1) throw ConfigError("min_replicas must be >= 1");
  if (max_replicas < min_replicas) throw ConfigError("max_replicas must be >= min_replicas");
  if (!(reactive_interval > 0.0) || !(forecast_interval > 0.0) || !(forecast_horizon > 0.0)) {
    throw ConfigError("reactive_interval, forecast_interval and forecast_horizon must be > 0");
  }
  if (knn_k < 1) throw ConfigError("knn_k must be >= 1");
  if (history_capacity < 1) throw ConfigError("history_capacity must be >= 1");
  if (!(history_span > 0.0)) throw ConfigError("history_span must be > 0");
}

RecommendationHistory::RecommendationHistory(std::size_t capacity, double span)
    : capacity_(capacity), span_(span) {
  if (capacity_ == 0) throw ValidationError("history capacity must be >= 1");
  if (!(span_ > 0.0)) throw ValidationError("history span must be > 0");
}

void RecommendationHistory::push(const Recommendation& rec) {
  if (!entries_.empty() && rec.time < entries_.back().time) {
    throw OrderingError("recommendation at t=" + std::to_string(rec.time) +
                        " is older than the newest entry");
  }
  entries_.push_back(rec);
  while (entries_.size() > capacity_) entries_.pop_front();
  while (rec.time - entries_.front().time > span_) entries_.pop_front();
}

const Recommendation& RecommendationHistory::newest() const {
  if (entries_.empty()) throw InsufficientData("recommendation history is empty");
  return entries_.back();
}

int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

int clamp_replicas(int replicas, const AutoscalerConfig& cfg) {
  return std::clamp(replicas, cfg.min_replicas, cfg.max_replicas);
}

Recommendation reactive_recommend(int current, double utilization, const AutoscalerConfig& cfg,
                                  double time) {
  if (current < 1) throw ValidationError("reactive_recommend: current must be >= 1");
  const double ratio = utilization / cfg.cpu_target;
  int replicas = current;
  if (std::abs(ratio - 1.0) > cfg.tolerance + kRatioEpsilon) {
    replicas = static_cast<int>(std::ceil(current * ratio - kRatioEpsilon));
  }
  return {time, clamp_replicas(replicas, cfg)};
}

int forecast_hold(const RecommendationHistory& history) { return history.newest().replicas; }

LineFit fit_line(std::span<const Recommendation> entries) {
  if (entries.size() < 2) throw InsufficientData("linear forecast needs at least 2 entries");
  const bool flat_time = std::all_of(entries.begin(), entries.end(), [&](const auto& e) {
    return e.time == entries.front().time;
  });
  if (flat_time) throw InsufficientData("linear forecast needs distinct times");

  const double n = static_cast<double>(entries.size());
  double mean_t = 0.0;
  double mean_y = 0.0;
  for (const auto& e : entries) {
    mean_t += e.time;
    mean_y += e.replicas;
  }
  mean_t /= n;
  mean_y /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& e : entries) {
    const double dt = e.time - mean_t;
    sxx += dt * dt;
    sxy += dt * (e.replicas - mean_y);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_t;
  return fit;
}

double forecast_linear_raw(const RecommendationHistory& history, double target_time) {
  return fit_line(history.entries()).at(target_time);
}

int forecast_linear(const RecommendationHistory& history, double target_time,
                    const AutoscalerConfig& cfg) {
  // Clamp before the integer conversion; steep fits can extrapolate far out.
  const double rounded = std::floor(forecast_linear_raw(history, target_time) + 0.5);
  return static_cast<int>(std::clamp(rounded, static_cast<double>(cfg.min_replicas),
                                     static_cast<double>(cfg.max_replicas)));
}

int forecast_knn(const RecommendationHistory& history, double target_time,
                 const AutoscalerConfig& cfg) {
  if (history.empty()) throw InsufficientData("knn forecast needs a non-empty history");
  if (cfg.knn_k < 1) throw ValidationError("knn_k must be >= 1");
  auto entries = history.entries();
  std::stable_sort(entries.begin(), entries.end(), [&](const auto& a, const auto& b) {
    const double da = std::abs(a.time - target_time);
    const double db = std::abs(b.time - target_time);
    if (da != db) return da < db;
    return a.time > b.time;
  });
  const auto k = std::min(static_cast<std::size_t>(cfg.knn_k), entries.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += entries[i].replicas;
  return clamp_replicas(round_half_up(sum / static_cast<double>(k)), cfg);
}

int forecast_oracle(std::span<const Recommendation> future_reactive, double target_time) {
  if (future_reactive.empty()) throw InsufficientData("oracle forecast has no lookahead data");
  auto it = std::upper_bound(future_reactive.begin(), future_reactive.end(), target_time,
                             [](double t, const Recommendation& r) { return t < r.time; });
  if (it == future_reactive.begin()) {
    throw InsufficientData("oracle lookahead starts after the target time");
  }
  return std::prev(it)->replicas;
}

int forecast(const RecommendationHistory& history, double target_time,
             const AutoscalerConfig& cfg, std::span<const Recommendation> lookahead) {
  switch (cfg.model) {
    case ForecastModel::hold: return clamp_replicas(forecast_hold(history), cfg);
    case ForecastModel::linear: return forecast_linear(history, target_time, cfg);
    case ForecastModel::knn: return forecast_knn(history, target_time, cfg);
    case ForecastModel::oracle:
      return clamp_replicas(forecast_oracle(lookahead, target_time), cfg);
  }
  return forecast_hold(history);
}

nlohmann::json to_json(const TickRecord& r) {
  nlohmann::json j = {{"time", r.time},
                      {"kind", r.kind == TickKind::reactive ? "reactive" : "forecast"},
                      {"utilization", nullptr},
                      {"reactive", nullptr},
                      {"forecast", nullptr},
                      {"applied", nullptr},
                      {"fallback", r.fallback}};
  if (r.utilization) j["utilization"] = *r.utilization;
  if (r.reactive) j["reactive"] = *r.reactive;
  if (r.forecast) j["forecast"] = *r.forecast;
  if (r.applied) j["applied"] = *r.applied;
  return j;
}

PredictiveAutoscaler::PredictiveAutoscaler(AutoscalerConfig cfg,
                                           std::vector<Recommendation> lookahead)
    : cfg_(std::move(cfg)),
      lookahead_(std::move(lookahead)),
      history_(cfg_.history_capacity, cfg_.history_span) {
  cfg_.validate();
  if (!std::is_sorted(lookahead_.begin(), lookahead_.end(),
                      [](const auto& a, const auto& b) { return a.time < b.time; })) {
    throw OrderingError("oracle lookahead must be sorted by time");
  }
}

double PredictiveAutoscaler::next_tick() const {
  const double reactive = static_cast<double>(reactive_ticks_ + 1) * cfg_.reactive_interval;
  const double fc = static_cast<double>(forecast_ticks_ + 1) * cfg_.forecast_interval;
  return std::min(reactive, fc);
}

std::vector<TickRecord> PredictiveAutoscaler::tick(double now, const ScalingHooks& hooks) {
  std::vector<TickRecord> out;
  for (;;) {
    const double reactive = static_cast<double>(reactive_ticks_ + 1) * cfg_.reactive_interval;
    const double fc = static_cast<double>(forecast_ticks_ + 1) * cfg_.forecast_interval;
    if (reactive <= now && reactive <= fc) {
      out.push_back(reactive_tick(reactive, hooks));
    } else if (fc <= now) {
      out.push_back(forecast_tick(fc, hooks));
    } else {
      break;
    }
  }
  return out;
}

TickRecord PredictiveAutoscaler::reactive_tick(double now, const ScalingHooks& hooks) {
  ++reactive_ticks_;
  TickRecord rec;
  rec.time = now;
  rec.kind = TickKind::reactive;
  const double util = std::clamp(hooks.utilization(), 0.0, 1.0);
  const auto r = reactive_recommend(std::max(hooks.current_replicas(), 1), util, cfg_, now);
  history_.push(r);
  reactive_log_.push_back(r);
  rec.utilization = util;
  rec.reactive = r.replicas;
  return rec;
}

TickRecord PredictiveAutoscaler::forecast_tick(double now, const ScalingHooks& hooks) {
  ++forecast_ticks_;
  TickRecord rec;
  rec.time = now;
  rec.kind = TickKind::forecast;
  int target = 0;
  try {
    target = forecast(history_, now + cfg_.forecast_horizon, cfg_, lookahead_);
    rec.forecast = target;
  } catch (const InsufficientData&) {
    rec.fallback = true;
    target = history_.empty() ? hooks.current_replicas() : forecast_hold(history_);
  }
  if (cfg_.combination == CombinationPolicy::max_with_reactive && !history_.empty()) {
    target = std::max(target, history_.newest().replicas);
  }
  target = clamp_replicas(target, cfg_);
  hooks.apply(target);
  rec.applied = target;
  return rec;
}

}  // namespace predscale
