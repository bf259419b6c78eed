#include "gpd/config.hpp"

#include <set>

#include "gpd/errors.hpp"
#include "gpd/scene_io.hpp"

namespace gpd {
namespace {

using nlohmann::json;

template <class T>
json encode_value(const T& v);
template <class T>
void decode(const json& j, T& v, const std::string& where);

// One field list per struct drives both directions.
struct Writer {
  json& j;
  template <class T>
  void operator()(const char* key, const T& v) {
    j[key] = encode_value(v);
  }
};

struct Reader {
  const json& j;
  std::string where;
  std::set<std::string> seen;
  template <class T>
  void operator()(const char* key, T& v) {
    seen.insert(key);
    if (!j.contains(key)) return;
    try {
      decode(j.at(key), v, where + "." + key);
    } catch (const json::exception& e) {
      throw ConfigError(where + "." + key + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + "." + key + ": " + e.what());
    }
  }
  void finish() const {
    for (const auto& [key, _] : j.items()) {
      if (!seen.count(key)) throw ConfigError("unknown config key '" + where + "." + key + "'");
    }
  }
};

template <class F> void fields(SceneGenConfig& c, F& f) {
  f("workspace", c.workspace);
  f("robot_radius", c.robot_radius);
  f("sparse_min", c.sparse_min);
  f("sparse_max", c.sparse_max);
  f("cluttered_min", c.cluttered_min);
  f("cluttered_max", c.cluttered_max);
  f("circle_radius_min", c.circle_radius_min);
  f("circle_radius_max", c.circle_radius_max);
  f("box_half_min", c.box_half_min);
  f("box_half_max", c.box_half_max);
  f("gap_min_radii", c.gap_min_radii);
  f("gap_max_radii", c.gap_max_radii);
  f("wall_thickness", c.wall_thickness);
}
template <class F> void fields(ProblemGenConfig& c, F& f) {
  f("min_start_goal_distance", c.min_start_goal_distance);
  f("endpoint_clearance", c.endpoint_clearance);
  f("goal_tolerance", c.goal_tolerance);
  f("max_attempts", c.max_attempts);
}
template <class F> void fields(RrtConfig& c, F& f) {
  f("step", c.step);
  f("max_nodes", c.max_nodes);
  f("max_samples", c.max_samples);
  f("time_limit", c.time_limit);
  f("resolution", c.resolution);
  f("clearance", c.clearance);
  f("seed", c.seed);
  f("exact", c.exact);
}
template <class F> void fields(ExpertConfig& c, F& f) {
  f("degree", c.degree);
  f("horizon", c.horizon);
  f("rrt", c.rrt);
  f("fallback_clearances", c.fallback_clearances);
  f("shortcut_iterations", c.shortcut_iterations);
  f("fit_threshold", c.fit_threshold);
  f("resolution", c.resolution);
  f("exact", c.exact);
}
template <class F> void fields(DatasetGenConfig& c, F& f) {
  f("count", c.count);
  f("difficulties", c.difficulties);
  f("scene", c.scene);
  f("problem", c.problem);
  f("expert", c.expert);
}
template <class F> void fields(Architecture& c, F& f) {
  f("embed_dim", c.embed_dim);
  f("hidden_width", c.hidden_width);
  f("hidden_layers", c.hidden_layers);
  f("activation", c.activation);
}
template <class F> void fields(LinearScheduleEndpoints& c, F& f) {
  f("beta_start", c.beta_start);
  f("beta_end", c.beta_end);
}
template <class F> void fields(ModelConfig& c, F& f) {
  f("arch", c.arch);
  f("steps", c.steps);
  f("schedule", c.schedule);
  f("linear", c.linear);
}
template <class F> void fields(TrainConfig& c, F& f) {
  f("epochs", c.epochs);
  f("max_steps", c.max_steps);
  f("batch_size", c.batch_size);
  f("learning_rate", c.learning_rate);
  f("final_lr_fraction", c.final_lr_fraction);
  f("seed", c.seed);
  f("ema_decay", c.ema_decay);
  f("report_interval", c.report_interval);
  f("clean_endpoints", c.clean_endpoints);
}
template <class F> void fields(StitchConfig& c, F& f) {
  f("window", c.window);
  f("resolution", c.resolution);
  f("step_bound", c.step_bound);
  f("selection_margin", c.selection_margin);
  f("max_candidates", c.max_candidates);
  f("max_bridge", c.max_bridge);
  f("local_planner", c.local_planner);
  f("exact", c.exact);
}
template <class F> void fields(BenchConfig& c, F& f) {
  f("suite", c.suite);
  f("n_problems", c.n_problems);
  f("variants", c.variants);
  f("batch", c.batch);
  f("k_pool", c.k_pool);
  f("gs_pool_size", c.gs_pool_size);
  f("seed", c.seed);
  f("resolution", c.resolution);
  f("exact", c.exact);
  f("jobs", c.jobs);
  f("watchdog_seconds", c.watchdog_seconds);
  f("scene", c.scene);
  f("problem", c.problem);
  f("guide", c.guide);
  f("portfolio", c.portfolio);
  f("stitch", c.stitch);
  f("feasibility", c.feasibility);
  f("rrt_baseline", c.rrt_baseline);
}
template <class F> void fields(AppConfig& c, F& f) {
  f("seed", c.seed);
  f("jobs", c.jobs);
  f("data", c.data);
  f("model", c.model);
  f("train", c.train);
  f("bench", c.bench);
}

template <class T>
concept Structured = requires(T& t, Writer& w) { fields(t, w); };

std::string enum_name(Difficulty v) { return to_string(v); }
std::string enum_name(ScheduleKind v) { return to_string(v); }
std::string enum_name(Variant v) { return to_string(v); }
std::string enum_name(Activation v) { return v == Activation::kTanh ? "tanh" : "silu"; }
void enum_parse(const std::string& s, Difficulty& v) { v = parse_difficulty(s); }
void enum_parse(const std::string& s, ScheduleKind& v) { v = parse_schedule_kind(s); }
void enum_parse(const std::string& s, Variant& v) { v = parse_variant(s); }
void enum_parse(const std::string& s, Activation& v) {
  if (s == "silu") v = Activation::kSiLU;
  else if (s == "tanh") v = Activation::kTanh;
  else throw std::invalid_argument("unknown activation '" + s + "' (expected silu, tanh)");
}

template <class T>
concept Named = requires(T v) { enum_name(v); };

template <class T>
json encode_value(const T& v) {
  if constexpr (Structured<T>) {
    json j = json::object();
    Writer w{j};
    fields(const_cast<T&>(v), w);
    return j;
  } else if constexpr (Named<T>) {
    return enum_name(v);
  } else if constexpr (std::is_same_v<T, Box>) {
    return json::array({v.min.x(), v.min.y(), v.max.x(), v.max.y()});
  } else if constexpr (std::is_same_v<T, GuideConfig>) {
    return json(v);
  } else if constexpr (requires { v.begin(); typename T::value_type; } && !std::is_same_v<T, std::string>) {
    json a = json::array();
    for (const auto& x : v) a.push_back(encode_value(x));
    return a;
  } else {
    return json(v);
  }
}

template <class T>
void decode(const json& j, T& v, const std::string& where) {
  if constexpr (Structured<T>) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    Reader r{j, where, {}};
    fields(v, r);
    r.finish();
  } else if constexpr (Named<T>) {
    enum_parse(j.get<std::string>(), v);
  } else if constexpr (std::is_same_v<T, Box>) {
    const auto a = j.get<std::vector<double>>();
    if (a.size() != 4) throw ConfigError(where + ": expected [xmin, ymin, xmax, ymax]");
    v.min = Point(a[0], a[1]);
    v.max = Point(a[2], a[3]);
  } else if constexpr (std::is_same_v<T, GuideConfig>) {
    v = j.get<GuideConfig>();
  } else if constexpr (requires { v.push_back(std::declval<typename T::value_type>()); } &&
                       !std::is_same_v<T, std::string>) {
    if (!j.is_array()) throw ConfigError(where + ": expected a list");
    T out;
    for (std::size_t i = 0; i < j.size(); ++i) {
      typename T::value_type x{};
      decode(j[i], x, where + "[" + std::to_string(i) + "]");
      out.push_back(std::move(x));
    }
    v = std::move(out);
  } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) throw ConfigError(where + ": expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (j.is_number_integer() && j.get<std::int64_t>() < 0) throw ConfigError(where + ": must be >= 0");
    }
    v = j.get<T>();
  } else if constexpr (std::is_same_v<T, bool>) {
    if (!j.is_boolean()) throw ConfigError(where + ": expected true/false");
    v = j.get<bool>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    v = j.get<T>();
  } else {
    v = j.get<T>();
  }
}

template <class T>
T parse_strict(const json& j, const std::string& root) {
  T v{};
  decode(j, v, root);
  return v;
}

}  // namespace

nlohmann::json config_to_json(const AppConfig& cfg) { return encode_value(cfg); }

AppConfig config_from_json(const nlohmann::json& j) { return parse_strict<AppConfig>(j, "config"); }

nlohmann::json bench_config_to_json(const BenchConfig& cfg) { return encode_value(cfg); }

BenchConfig bench_config_from_json(const nlohmann::json& j) { return parse_strict<BenchConfig>(j, "bench"); }

void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  std::string pointer;
  std::size_t pos = 0;
  while (pos <= key.size()) {
    const auto dot = key.find('.', pos);
    const auto part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    pointer += "/" + part;
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  const json::json_pointer ptr(pointer);
  if (!doc.contains(ptr)) throw ConfigError("unknown config key '" + key + "'");
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  // Comma lists for list-valued keys: variants=PD,GPD-1G
  if (doc.at(ptr).is_array() && value.is_string()) {
    json list = json::array();
    std::size_t start = 0;
    while (start <= raw.size()) {
      const auto comma = raw.find(',', start);
      list.push_back(raw.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    value = list;
  }
  doc[ptr] = value;
}

AppConfig load_layered_config(const std::optional<std::filesystem::path>& file,
                              const std::vector<std::string>& overrides) {
  json doc = config_to_json(AppConfig{});
  if (file) {
    const json layer = read_json_file(*file);
    if (!layer.is_object()) throw ConfigError(file->string() + ": config must be a JSON object");
    // Validate the file on its own so unknown keys are reported with its name.
    try {
      (void)config_from_json(layer);
    } catch (const ConfigError& e) {
      throw ConfigError(file->string() + ": " + e.what());
    }
    doc.merge_patch(layer);
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return config_from_json(doc);
}

}  // namespace gpd
