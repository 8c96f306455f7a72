#include <doctest.h>

#include <cmath>
#include <vector>

#include "gen.hpp"
#include "predscale/autoscaler.hpp"
#include "predscale/errors.hpp"

using namespace predscale;

namespace {

// Uncentered normal equations in extended precision, independent of fit_line.
long double ols_predict(const std::vector<Recommendation>& e, double target) {
  long double n = e.size(), st = 0, sy = 0, stt = 0, sty = 0;
  for (const auto& r : e) {
    st += r.time;
    sy += r.replicas;
    stt += static_cast<long double>(r.time) * r.time;
    sty += static_cast<long double>(r.time) * r.replicas;
  }
  const long double b = (n * sty - st * sy) / (n * stt - st * st);
  const long double a = (sy - b * st) / n;
  return a + b * target;
}

struct FakeCluster {
  double util = 0.0;
  int replicas = 1;
  std::vector<int> applied;

  ScalingHooks hooks() {
    return {[this] { return util; }, [this] { return replicas; },
            [this](int n) {
              applied.push_back(n);
              replicas = n;
            }};
  }
};

}  // namespace

TEST_SUITE("autoscaler") {

TEST_CASE("reactive: examples") {
  AutoscalerConfig cfg;
  CHECK(reactive_recommend(4, 0.75, cfg).replicas == 4);
  CHECK(reactive_recommend(4, 0.90, cfg).replicas == 5);
  CHECK(reactive_recommend(8, 1.00, cfg).replicas == 10);
  CHECK(reactive_recommend(4, 0.0, cfg).replicas == 1);
  CHECK(reactive_recommend(3, 0.75, cfg, 42).time == 42);
}

TEST_CASE("reactive: dead band edges") {
  AutoscalerConfig cfg;
  // |0.825/0.75 - 1| = 0.1 exactly: inside the band.
  CHECK(reactive_recommend(4, 0.825, cfg).replicas == 4);
  CHECK(reactive_recommend(4, 0.675, cfg).replicas == 4);
  CHECK(reactive_recommend(4, 0.83, cfg).replicas == 5);
  CHECK(reactive_recommend(4, 0.60, cfg).replicas == 4);  // ceil(3.2)
  CHECK(reactive_recommend(4, 0.56, cfg).replicas == 3);  // ceil(2.987)
}

TEST_CASE("reactive: monotone in utilization and fixed point at target") {
  gen::Rng r(41);
  for (int i = 0; i < 500; ++i) {
    AutoscalerConfig cfg;
    cfg.cpu_target = r.uniform(0.1, 1.0);
    cfg.tolerance = r.uniform(0.0, 0.3);
    cfg.max_replicas = r.integer(1, 20);
    const int current = r.integer(1, 20);
    double prev_u = 0.0;
    int prev = reactive_recommend(current, 0.0, cfg).replicas;
    for (int k = 1; k <= 100; ++k) {
      const double u = k / 100.0;
      const int rep = reactive_recommend(current, u, cfg).replicas;
      CHECK_MESSAGE(rep >= prev, "u=" << u << " prev_u=" << prev_u);
      CHECK(rep >= cfg.min_replicas);
      CHECK(rep <= cfg.max_replicas);
      prev = rep;
      prev_u = u;
    }
    const int start = std::clamp(current, cfg.min_replicas, cfg.max_replicas);
    int n = start;
    for (int k = 0; k < 20; ++k) n = reactive_recommend(n, cfg.cpu_target, cfg).replicas;
    CHECK(n == start);
  }
}

TEST_CASE("history: capacity, span and ordering") {
  RecommendationHistory h;
  CHECK_THROWS_AS(h.newest(), InsufficientData);
  h.push({0, 1});
  CHECK(h.size() == 1);
  for (int i = 1; i <= 12; ++i) h.push({i * 1.0, i});
  CHECK(h.size() == 12);
  CHECK(h.entries().front().time == 1.0);
  CHECK_THROWS_AS(h.push({5.0, 1}), OrderingError);

  RecommendationHistory span;
  for (int t = 0; t <= 110; t += 10) span.push({double(t), 1});
  CHECK(span.size() == 12);
  span.push({130, 1});
  CHECK(span.entries().front().time == 10.0);
  CHECK(span.size() == 12);
}

TEST_CASE("history: 100 recommendations at 10 s spacing") {
  RecommendationHistory h;
  for (int i = 0; i < 100; ++i) {
    h.push({i * 10.0, 1 + i % 10});
    CHECK(h.size() <= 12);
    for (const auto& e : h.entries()) CHECK(h.newest().time - e.time <= 120.0);
  }
}

TEST_CASE("hold: newest value") {
  CHECK(forecast_hold(gen::make_history({{0, 1}})) == 1);
  CHECK(forecast_hold(gen::make_history({{0, 3}, {10, 9}, {20, 2}})) == 2);
  CHECK(forecast_hold(gen::make_history({{90, 5}, {100, 7}})) == 7);
  CHECK_THROWS_AS(forecast_hold(RecommendationHistory{}), InsufficientData);
}

TEST_CASE("linear: examples") {
  AutoscalerConfig cfg;
  CHECK(forecast_linear(gen::make_history({{0, 3}, {10, 3}, {20, 3}}), 30, cfg) == 3);
  CHECK(forecast_linear(gen::make_history({{0, 2}, {10, 4}}), 20, cfg) == 6);
  std::vector<Recommendation> rising;
  for (int i = 0; i < 12; ++i) rising.push_back({i * 10.0, 2 + i});
  const auto h = gen::make_history(rising);
  CHECK(forecast_linear_raw(h, 120) == doctest::Approx(14.0).epsilon(1e-12));
  CHECK(forecast_linear(h, 120, cfg) == 10);
  CHECK_THROWS_AS(forecast_linear(gen::make_history({{0, 2}}), 10, cfg), InsufficientData);
  CHECK_THROWS_AS(forecast_linear(gen::make_history({{5, 2}, {5, 4}}), 10, cfg), InsufficientData);
}

TEST_CASE("linear: rounding is half-up and clamping happens before conversion") {
  AutoscalerConfig cfg;
  // Line through (0,2) and (10,3): value 2.5 at t=5 rounds up to 3.
  CHECK(forecast_linear(gen::make_history({{0, 2}, {10, 3}}), 5, cfg) == 3);
  CHECK(forecast_linear(gen::make_history({{0, 1}, {1, 10}}), 1e12, cfg) == 10);
  CHECK(forecast_linear(gen::make_history({{0, 10}, {1, 1}}), 1e12, cfg) == 1);
}

TEST_CASE("linear: matches closed-form least squares") {
  gen::Rng r(42);
  for (int i = 0; i < 1000; ++i) {
    const auto e = gen::history_entries(r, 2, 12);
    const double target = e.back().time + r.uniform(0.0, 30.0);
    const auto h = gen::make_history(e);
    CHECK(std::abs(forecast_linear_raw(h, target) - static_cast<double>(ols_predict(e, target))) <=
          1e-9);
  }
}

TEST_CASE("linear: exact integer lines are reproduced") {
  gen::Rng r(43);
  for (int i = 0; i < 300; ++i) {
    const int a = r.integer(-5, 5), b = r.integer(-3, 3);
    const int n = r.integer(2, 12);
    std::vector<Recommendation> e;
    for (int k = 0; k < n; ++k) e.push_back({k * 10.0, a + b * k});
    const auto h = gen::make_history(e);
    const double target = (n + 1) * 10.0;
    CHECK(forecast_linear_raw(h, target) == doctest::Approx(a + b * (n + 1)).epsilon(1e-9));
  }
}

TEST_CASE("knn: examples") {
  AutoscalerConfig cfg;
  cfg.knn_k = 1;
  CHECK(forecast_knn(gen::make_history({{0, 8}, {10, 2}, {20, 5}}), 30, cfg) == 5);
  cfg.knn_k = 3;
  CHECK(forecast_knn(gen::make_history({{0, 9}, {10, 4}, {20, 5}, {30, 6}}), 40, cfg) == 5);
  cfg.knn_k = 5;
  CHECK(forecast_knn(gen::make_history({{0, 2}, {10, 4}}), 20, cfg) == 3);
  CHECK_THROWS_AS(forecast_knn(RecommendationHistory{}, 0, cfg), InsufficientData);
}

TEST_CASE("knn: equidistant neighbours prefer the more recent entry") {
  AutoscalerConfig cfg;
  cfg.knn_k = 1;
  CHECK(forecast_knn(gen::make_history({{0, 2}, {10, 7}}), 5, cfg) == 7);
}

TEST_CASE("knn: k=1 picks the nearest entry, large k averages everything") {
  gen::Rng r(44);
  for (int i = 0; i < 1000; ++i) {
    const auto e = gen::history_entries(r, 1, 12);
    const auto h = gen::make_history(e);
    AutoscalerConfig cfg;
    cfg.knn_k = 1;
    const double target = r.uniform(e.front().time - 20, e.back().time + 20);
    const Recommendation* best = &e[0];
    for (const auto& x : e) {
      const double d = std::abs(x.time - target), bd = std::abs(best->time - target);
      if (d < bd || (d == bd && x.time > best->time)) best = &x;
    }
    CHECK(forecast_knn(h, target, cfg) == best->replicas);

    cfg.knn_k = static_cast<int>(e.size()) + r.integer(0, 5);
    double sum = 0;
    for (const auto& x : e) sum += x.replicas;
    CHECK(forecast_knn(h, target, cfg) == static_cast<int>(std::floor(sum / e.size() + 0.5)));
  }
}

TEST_CASE("forecasters are pure and constant histories are fixed points") {
  gen::Rng r(45);
  for (int i = 0; i < 300; ++i) {
    AutoscalerConfig cfg;
    cfg.knn_k = r.integer(1, 6);
    const int c = r.integer(1, 10);
    auto e = gen::history_entries(r, 2, 12, c, c);
    const auto h = gen::make_history(e);
    const double target = e.back().time + 10;
    CHECK(forecast_hold(h) == c);
    CHECK(forecast_linear(h, target, cfg) == c);
    CHECK(forecast_knn(h, target, cfg) == c);

    const auto v = gen::history_entries(r, 2, 12);
    const auto hv = gen::make_history(v);
    CHECK(forecast_linear(hv, target, cfg) == forecast_linear(hv, target, cfg));
    CHECK(forecast_knn(hv, target, cfg) == forecast_knn(hv, target, cfg));
    CHECK(hv.entries().size() == v.size());
  }
}

TEST_CASE("oracle: step lookup") {
  const std::vector<Recommendation> one{{10, 4}};
  CHECK(forecast_oracle(one, 10) == 4);
  const std::vector<Recommendation> two{{10, 4}, {20, 6}};
  CHECK(forecast_oracle(two, 15) == 4);
  CHECK(forecast_oracle(two, 25) == 6);
  CHECK_THROWS_AS(forecast_oracle({}, 10), InsufficientData);
  CHECK_THROWS_AS(forecast_oracle(two, 5), InsufficientData);
}

TEST_CASE("model and policy names") {
  CHECK(parse_forecast_model("control") == ForecastModel::hold);
  CHECK(parse_forecast_model("knn") == ForecastModel::knn);
  CHECK(to_string(ForecastModel::linear) == "linear");
  CHECK(parse_combination_policy("max-with-reactive") == CombinationPolicy::max_with_reactive);
  CHECK_THROWS_AS(parse_forecast_model("arima"), ConfigError);
}

TEST_CASE("config validation") {
  AutoscalerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.cpu_target = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.min_replicas = 5;
  cfg.max_replicas = 4;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.forecast_interval = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("tick: hold applies the newest recommendation") {
  AutoscalerConfig cfg;
  PredictiveAutoscaler a(cfg);
  FakeCluster c;
  c.replicas = 3;
  c.util = 1.0;  // ceil(3 * 1/0.75) = 4
  a.reactive_tick(15, c.hooks());
  const auto rec = a.forecast_tick(20, c.hooks());
  CHECK(*rec.applied == 4);
  CHECK_FALSE(rec.fallback);
}

TEST_CASE("tick: linear over a rising history") {
  AutoscalerConfig cfg;
  cfg.model = ForecastModel::linear;
  PredictiveAutoscaler a(cfg);
  FakeCluster c;
  c.util = 1.0;
  c.replicas = 1;
  a.reactive_tick(0, c.hooks());  // ceil(1.33) = 2
  c.replicas = 3;
  a.reactive_tick(10, c.hooks());  // ceil(4) = 4
  const auto rec = a.forecast_tick(10, c.hooks());
  CHECK(*rec.forecast == 6);
  CHECK(c.applied.back() == 6);
}

TEST_CASE("tick: empty history falls back to the current replica count") {
  AutoscalerConfig cfg;
  cfg.model = ForecastModel::linear;
  PredictiveAutoscaler a(cfg);
  FakeCluster c;
  c.replicas = 3;
  const auto rec = a.forecast_tick(10, c.hooks());
  CHECK(rec.fallback);
  CHECK(*rec.applied == 3);
  CHECK_FALSE(rec.forecast);
}

TEST_CASE("tick: single entry history falls back to hold for linear") {
  AutoscalerConfig cfg;
  cfg.model = ForecastModel::linear;
  PredictiveAutoscaler a(cfg);
  FakeCluster c;
  c.replicas = 2;
  c.util = 1.0;
  a.reactive_tick(15, c.hooks());
  const auto rec = a.forecast_tick(20, c.hooks());
  CHECK(rec.fallback);
  CHECK(*rec.applied == 3);
}

TEST_CASE("tick: max-with-reactive never goes below the newest recommendation") {
  AutoscalerConfig cfg;
  cfg.model = ForecastModel::linear;
  cfg.combination = CombinationPolicy::max_with_reactive;
  PredictiveAutoscaler a(cfg);
  FakeCluster c;
  c.replicas = 8;
  c.util = 0.75;
  a.reactive_tick(0, c.hooks());   // 8
  c.replicas = 4;
  a.reactive_tick(10, c.hooks());  // 4, linear predicts 0 -> clamped 1
  const auto rec = a.forecast_tick(10, c.hooks());
  CHECK(*rec.forecast == 1);
  CHECK(*rec.applied == 4);
}

TEST_CASE("tick schedule: reactive every 15 s, forecast every 10 s, reactive first") {
  AutoscalerConfig cfg;
  PredictiveAutoscaler a(cfg);
  FakeCluster c;
  c.util = 0.75;
  const auto recs = a.tick(60, c.hooks());
  std::vector<std::pair<double, TickKind>> got;
  for (const auto& r : recs) got.push_back({r.time, r.kind});
  const std::vector<std::pair<double, TickKind>> want{
      {10, TickKind::forecast}, {15, TickKind::reactive}, {20, TickKind::forecast},
      {30, TickKind::reactive}, {30, TickKind::forecast}, {40, TickKind::forecast},
      {45, TickKind::reactive}, {50, TickKind::forecast}, {60, TickKind::reactive},
      {60, TickKind::forecast}};
  CHECK(got == want);
  CHECK(a.next_tick() == 70);
}

TEST_CASE("tick: applied counts stay within bounds under random utilization") {
  gen::Rng r(46);
  for (int model = 0; model < 3; ++model) {
    AutoscalerConfig cfg;
    cfg.model = static_cast<ForecastModel>(model);
    cfg.max_replicas = 7;
    cfg.min_replicas = 2;
    PredictiveAutoscaler a(cfg);
    FakeCluster c;
    c.replicas = 2;
    for (int t = 5; t <= 3000; t += 5) {
      c.util = r.uniform(0.0, 1.0);
      a.tick(t, c.hooks());
    }
    for (int n : c.applied) {
      CHECK(n >= 2);
      CHECK(n <= 7);
    }
  }
}

}  // TEST_SUITE
