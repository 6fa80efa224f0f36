#include "loopsim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "loopsim/error.hpp"
#include "loopsim/presets.hpp"

namespace loopsim {
namespace {

using nlohmann::json;

template <typename E>
struct EnumName {
  E value;
  std::string_view name;
};

constexpr EnumName<OutcomeNoise> kNoiseNames[] = {{OutcomeNoise::kTruncated, "truncated"},
                                                  {OutcomeNoise::kClamped, "clamped"}};
constexpr EnumName<SelectionMode> kSelectionNames[] = {
    {SelectionMode::kSingleUser, "single_user"},
    {SelectionMode::kWholePopulation, "whole_population"}};
constexpr EnumName<FeatureGate> kGateNames[] = {
    {FeatureGate::kRecommendedOnly, "recommended_only"},
    {FeatureGate::kEveryInteraction, "every_interaction"}};
constexpr EnumName<FeatureUpdate> kUpdateNames[] = {
    {FeatureUpdate::kMovingAverage, "moving_average"},
    {FeatureUpdate::kLifetimeRatio, "lifetime_ratio"}};
constexpr EnumName<Optimizer> kOptimizerNames[] = {
    {Optimizer::kNewton, "newton"}, {Optimizer::kGradientDescent, "gradient_descent"}};

template <typename E, std::size_t N>
std::string_view name_of(const EnumName<E> (&table)[N], E value) {
  for (const auto& e : table) {
    if (e.value == value) return e.name;
  }
  return "unknown";
}

// Reads the members of one JSON object, remembering which keys were used so
// that leftovers can be reported.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path)
      : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) fail(path_.empty() ? "config" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return object_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return object_.at(key);
  }

  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_number()) fail(child(key), "expected a number");
    out = v.get<double>();
  }

  template <typename T>
  void count(const std::string& key, T& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(child(key), "expected a non-negative integer");
    }
    out = static_cast<T>(v.get<std::uint64_t>());
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_boolean()) fail(child(key), "expected true or false");
    out = v.get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_string()) fail(child(key), "expected a string");
    out = v.get<std::string>();
  }

  template <typename E, std::size_t N>
  void choice(const std::string& key, const EnumName<E> (&table)[N], E& out) {
    if (!has(key)) return;
    std::string text;
    string(key, text);
    for (const auto& e : table) {
      if (e.name == text) {
        out = e.value;
        return;
      }
    }
    std::string allowed;
    for (const auto& e : table) allowed += (allowed.empty() ? "" : ", ") + std::string(e.name);
    fail(child(key), "'" + text + "' is not one of: " + allowed);
  }

  void finish() const {
    for (const auto& [key, value] : object_.items()) {
      if (!used_.contains(key)) fail(child(key), "unknown key");
    }
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
  }

 private:
  const json& object_;
  std::string path_;
  std::set<std::string> used_;
};

void read_group(const json& j, const std::string& path, GroupConfig& g) {
  ObjectReader r(j, path);
  r.string("label", g.label);
  r.count("size", g.size);
  r.number("mu_theta", g.params.mu_theta);
  r.number("sigma_theta", g.params.sigma_theta);
  r.number("mu_r", g.params.mu_r);
  r.number("sigma_r", g.params.sigma_r);
  r.number("mu_t", g.params.mu_t);
  r.number("sigma_t", g.params.sigma_t);
  r.count("n_train", g.params.n_train);
  r.number("mu_t_train", g.mu_t_train);
  r.number("sigma_t_train", g.sigma_t_train);
  r.finish();
}

void read_feedback(const json& j, FeedbackConfig& fb) {
  ObjectReader r(j, "feedback");
  r.boolean("sampling_enabled", fb.sampling_enabled);
  r.boolean("individual_enabled", fb.individual_enabled);
  r.number("alpha", fb.alpha);
  r.boolean("feature_enabled", fb.feature_enabled);
  r.number("beta", fb.beta);
  r.choice("feature_gate", kGateNames, fb.feature_gate);
  r.choice("feature_update", kUpdateNames, fb.feature_update);
  r.boolean("ml_model_enabled", fb.ml_model_enabled);
  r.boolean("outcome_enabled", fb.outcome_enabled);
  r.number("delta", fb.delta);
  r.finish();
}

void read_train(const json& j, TrainConfig& tc) {
  ObjectReader r(j, "train");
  r.choice("optimizer", kOptimizerNames, tc.optimizer);
  r.number("learning_rate", tc.learning_rate);
  r.count("epochs_initial", tc.epochs_initial);
  r.count("steps_per_retrain", tc.steps_per_retrain);
  r.number("l2", tc.l2);
  r.count("retrain_cadence", tc.retrain_cadence);
  r.count("cold_refit_interval", tc.cold_refit_interval);
  r.number("test_fraction", tc.test_fraction);
  r.number("gradient_tolerance", tc.gradient_tolerance);
  r.finish();
}

}  // namespace

std::string_view to_string(OutcomeNoise v) { return name_of(kNoiseNames, v); }
std::string_view to_string(SelectionMode v) { return name_of(kSelectionNames, v); }
std::string_view to_string(FeatureGate v) { return name_of(kGateNames, v); }
std::string_view to_string(FeatureUpdate v) { return name_of(kUpdateNames, v); }
std::string_view to_string(Optimizer v) { return name_of(kOptimizerNames, v); }

SimulationConfig config_from_json(const json& j) {
  ObjectReader r(j, "");
  SimulationConfig c;
  if (r.has("preset")) {
    std::string name;
    r.string("preset", name);
    c = preset(name);
  }
  if (r.has("groups")) {
    const json& groups = r.raw("groups");
    if (!groups.is_array()) ObjectReader::fail("groups", "expected an array");
    // Entries override the preset's groups position by position; extra
    // entries start from library defaults.
    std::vector<GroupConfig> out;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      GroupConfig g = i < c.groups.size() ? c.groups[i] : GroupConfig{};
      read_group(groups[i], "groups[" + std::to_string(i) + "]", g);
      out.push_back(std::move(g));
    }
    c.groups = std::move(out);
  }
  if (r.has("feedback")) read_feedback(r.raw("feedback"), c.feedback);
  if (r.has("train")) read_train(r.raw("train"), c.train);
  r.number("threshold", c.threshold);
  r.count("total_steps", c.total_steps);
  if (r.has("checkpoints")) {
    const json& cps = r.raw("checkpoints");
    if (!cps.is_array()) ObjectReader::fail("checkpoints", "expected an array");
    c.checkpoints.clear();
    for (std::size_t i = 0; i < cps.size(); ++i) {
      if (!cps[i].is_number_unsigned()) {
        ObjectReader::fail("checkpoints[" + std::to_string(i) + "]",
                           "expected a non-negative integer");
      }
      c.checkpoints.push_back(cps[i].get<std::size_t>());
    }
  }
  r.count("seed", c.seed);
  r.choice("outcome_noise", kNoiseNames, c.outcome_noise);
  r.choice("selection", kSelectionNames, c.selection);
  r.count("series_interval", c.series_interval);
  r.boolean("record_events", c.record_events);
  r.finish();
  validate(c);
  return c;
}

json config_to_json(const SimulationConfig& c) {
  json groups = json::array();
  for (const auto& g : c.groups) {
    groups.push_back({{"label", g.label},
                      {"size", g.size},
                      {"mu_theta", g.params.mu_theta},
                      {"sigma_theta", g.params.sigma_theta},
                      {"mu_r", g.params.mu_r},
                      {"sigma_r", g.params.sigma_r},
                      {"mu_t", g.params.mu_t},
                      {"sigma_t", g.params.sigma_t},
                      {"n_train", g.params.n_train},
                      {"mu_t_train", g.mu_t_train},
                      {"sigma_t_train", g.sigma_t_train}});
  }
  const auto& fb = c.feedback;
  const auto& tc = c.train;
  return {
      {"groups", groups},
      {"feedback",
       {{"sampling_enabled", fb.sampling_enabled},
        {"individual_enabled", fb.individual_enabled},
        {"alpha", fb.alpha},
        {"feature_enabled", fb.feature_enabled},
        {"beta", fb.beta},
        {"feature_gate", to_string(fb.feature_gate)},
        {"feature_update", to_string(fb.feature_update)},
        {"ml_model_enabled", fb.ml_model_enabled},
        {"outcome_enabled", fb.outcome_enabled},
        {"delta", fb.delta}}},
      {"train",
       {{"optimizer", to_string(tc.optimizer)},
        {"learning_rate", tc.learning_rate},
        {"epochs_initial", tc.epochs_initial},
        {"steps_per_retrain", tc.steps_per_retrain},
        {"l2", tc.l2},
        {"retrain_cadence", tc.retrain_cadence},
        {"cold_refit_interval", tc.cold_refit_interval},
        {"test_fraction", tc.test_fraction},
        {"gradient_tolerance", tc.gradient_tolerance}}},
      {"threshold", c.threshold},
      {"total_steps", c.total_steps},
      {"checkpoints", c.checkpoints},
      {"seed", c.seed},
      {"outcome_noise", to_string(c.outcome_noise)},
      {"selection", to_string(c.selection)},
      {"series_interval", c.series_interval},
      {"record_events", c.record_events},
  };
}

SimulationConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const SimulationConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write config file " + path.string());
  out << config_to_json(config).dump(2) << '\n';
  if (!out) throw IoError("failed writing config file " + path.string());
}

}  // namespace loopsim
