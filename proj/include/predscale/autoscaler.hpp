#pragma once

// Reactive replica recommendation plus single-step predictive forecasting.
//
// Every reactive interval the ratio rule turns the observed CPU utilization
// into a replica recommendation, which is cached in a short history. Every
// forecast interval the configured model predicts the recommendation that
// will hold one horizon ahead, and that prediction is what gets applied.

#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace predscale {

struct Recommendation {
  double time = 0.0;
  int replicas = 1;

  bool operator==(const Recommendation&) const = default;
};

enum class ForecastModel { hold, linear, knn, oracle };
enum class CombinationPolicy { model_only, max_with_reactive };

std::string_view to_string(ForecastModel model);
ForecastModel parse_forecast_model(std::string_view name);
std::string_view to_string(CombinationPolicy policy);
CombinationPolicy parse_combination_policy(std::string_view name);

struct AutoscalerConfig {
  double cpu_target = 0.75;
  double tolerance = 0.10;
  int min_replicas = 1;
  int max_replicas = 10;
  double reactive_interval = 15.0;
  double forecast_interval = 10.0;
  double forecast_horizon = 10.0;
  ForecastModel model = ForecastModel::hold;
  int knn_k = 3;
  CombinationPolicy combination = CombinationPolicy::model_only;
  std::size_t history_capacity = 12;
  double history_span = 120.0;

  void validate() const;
};

/// Bounded, time-ordered cache of the most recent recommendations. Holds at
/// most `capacity` entries, none older than `span` seconds before the newest.
class RecommendationHistory {
 public:
  explicit RecommendationHistory(std::size_t capacity = 12, double span = 120.0);

  /// Throws OrderingError if rec.time is older than the newest entry.
  void push(const Recommendation& rec);

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const Recommendation& newest() const;
  std::vector<Recommendation> entries() const { return {entries_.begin(), entries_.end()}; }
  std::size_t capacity() const { return capacity_; }
  double span() const { return span_; }

 private:
  std::size_t capacity_;
  double span_;
  std::deque<Recommendation> entries_;
};

/// Half-up rounding to an integer replica count.
int round_half_up(double x);
int clamp_replicas(int replicas, const AutoscalerConfig& cfg);

/// Ratio rule with a dead band: keep `current` while utilization is within
/// tolerance of the target, otherwise ceil(current * utilization / target),
/// clamped to [min_replicas, max_replicas].
Recommendation reactive_recommend(int current, double utilization, const AutoscalerConfig& cfg,
                                  double time = 0.0);

int forecast_hold(const RecommendationHistory& history);

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double at(double t) const { return intercept + slope * t; }
};

/// Ordinary least squares replicas ~ a + b*t. InsufficientData with fewer
/// than two entries or no spread in time.
LineFit fit_line(std::span<const Recommendation> entries);

/// Unrounded linear prediction at target_time.
double forecast_linear_raw(const RecommendationHistory& history, double target_time);
int forecast_linear(const RecommendationHistory& history, double target_time,
                    const AutoscalerConfig& cfg);

/// Mean of the k entries closest in time to target_time (ties go to the more
/// recent entry), rounded half-up and clamped.
int forecast_knn(const RecommendationHistory& history, double target_time,
                 const AutoscalerConfig& cfg);

/// The recommendation in effect at target_time in a precomputed reactive
/// run: the latest entry at or before target_time.
int forecast_oracle(std::span<const Recommendation> future_reactive, double target_time);

/// Runs the configured model. Throws InsufficientData when it cannot predict.
int forecast(const RecommendationHistory& history, double target_time,
             const AutoscalerConfig& cfg, std::span<const Recommendation> lookahead = {});

/// What the autoscaler reads from and acts on.
struct ScalingHooks {
  std::function<double()> utilization;
  std::function<int()> current_replicas;
  std::function<void(int)> apply;
};

enum class TickKind { reactive, forecast };

struct TickRecord {
  double time = 0.0;
  TickKind kind = TickKind::reactive;
  std::optional<double> utilization;
  std::optional<int> reactive;
  std::optional<int> forecast;
  std::optional<int> applied;
  bool fallback = false;

  bool operator==(const TickRecord&) const = default;
};

nlohmann::json to_json(const TickRecord& r);

/// The tick loop. Reactive ticks fire at k * reactive_interval and forecast
/// ticks at k * forecast_interval (k >= 1); when both are due at the same
/// instant the reactive tick runs first.
class PredictiveAutoscaler {
 public:
  explicit PredictiveAutoscaler(AutoscalerConfig cfg,
                                std::vector<Recommendation> lookahead = {});

  double next_tick() const;
  /// Runs every tick due at or before `now`.
  std::vector<TickRecord> tick(double now, const ScalingHooks& hooks);

  /// One forecast-and-apply step at `now`. Falls back to the newest
  /// recommendation, or the current replica count if there is none.
  TickRecord forecast_tick(double now, const ScalingHooks& hooks);
  TickRecord reactive_tick(double now, const ScalingHooks& hooks);

  const RecommendationHistory& history() const { return history_; }
  /// Every recommendation made so far, in order.
  const std::vector<Recommendation>& reactive_log() const { return reactive_log_; }
  const AutoscalerConfig& config() const { return cfg_; }

 private:
  AutoscalerConfig cfg_;
  std::vector<Recommendation> lookahead_;
  RecommendationHistory history_;
  std::vector<Recommendation> reactive_log_;
  long reactive_ticks_ = 0;
  long forecast_ticks_ = 0;
};

}  // namespace predscale
