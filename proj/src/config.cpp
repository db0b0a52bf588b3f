#include "memu/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "memu/csv.hpp"
#include "memu/error.hpp"

namespace memu {
namespace {

const std::set<std::string, std::less<>> kSections{
    "plant", "actuator", "muscle", "rates", "train", "noise_dr", "task", "sweep", "output"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(const std::string& origin, const std::string& message) {
  throw ConfigError(origin + ": " + message);
}

std::vector<std::string> split_list(const ConfigEntry& e) {
  std::vector<std::string> out;
  std::string_view rest = e.value;
  while (true) {
    const auto comma = rest.find(',');
    std::string item = trim(rest.substr(0, comma));
    if (item.empty()) fail(e.origin, e.section + "." + e.key + ": empty list item");
    out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

double parse_double(const ConfigEntry& e, const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    fail(e.origin, e.section + "." + e.key + ": expected a finite number, got '" + text + "'");
  return v;
}

double as_double(const ConfigEntry& e) { return parse_double(e, e.value); }

long long parse_int(const ConfigEntry& e, const std::string& text) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    fail(e.origin, e.section + "." + e.key + ": expected an integer, got '" + text + "'");
  return v;
}

int as_int(const ConfigEntry& e) {
  const long long v = parse_int(e, e.value);
  if (v < -1'000'000'000LL || v > 1'000'000'000LL)
    fail(e.origin, e.section + "." + e.key + ": integer out of range");
  return static_cast<int>(v);
}

bool as_bool(const ConfigEntry& e) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  fail(e.origin, e.section + "." + e.key + ": expected true or false, got '" + e.value + "'");
}

std::vector<double> as_doubles(const ConfigEntry& e) {
  std::vector<double> out;
  for (const auto& item : split_list(e)) out.push_back(parse_double(e, item));
  return out;
}

Range as_range(const ConfigEntry& e) {
  const auto v = as_doubles(e);
  if (v.size() != 2) fail(e.origin, e.section + "." + e.key + ": expected 'lo, hi'");
  if (v[0] > v[1]) fail(e.origin, e.section + "." + e.key + ": lo must not exceed hi");
  return {v[0], v[1]};
}

std::vector<std::uint64_t> as_seeds(const ConfigEntry& e) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(e)) {
    const auto dots = item.find("..");
    long long lo = 0;
    long long hi = 0;
    if (dots == std::string::npos) {
      lo = hi = parse_int(e, item);
    } else {
      lo = parse_int(e, trim(item.substr(0, dots)));
      hi = parse_int(e, trim(item.substr(dots + 2)));
    }
    if (lo < 0 || hi < lo || hi - lo > 100000)
      fail(e.origin, e.section + "." + e.key + ": invalid seed range '" + item + "'");
    for (long long s = lo; s <= hi; ++s) out.push_back(static_cast<std::uint64_t>(s));
  }
  return out;
}

template <class Fn>
auto convert(const ConfigEntry& e, Fn&& fn) {
  try {
    return fn(e.value);
  } catch (const std::invalid_argument& ex) {
    fail(e.origin, e.section + "." + e.key + ": " + ex.what());
  }
}

struct RawConfig {
  std::vector<ConfigEntry> entries;
  std::set<std::string, std::less<>> sections;
  bool schema_seen = false;
};

RawConfig read_raw(std::string_view text, const std::string& source) {
  RawConfig raw;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const std::string origin = source + ":" + std::to_string(line_no);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') fail(origin, "malformed section header '" + body + "'");
      section = trim(std::string_view(body).substr(1, body.size() - 2));
      if (!kSections.contains(section)) fail(origin, "unknown section [" + section + "]");
      if (!raw.sections.insert(section).second)
        fail(origin, "duplicate section [" + section + "]");
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail(origin, "expected 'key = value', got '" + body + "'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) fail(origin, "missing key");
    if (value.empty()) fail(origin, "missing value for '" + key + "'");
    if (section.empty()) {
      if (key != "schema") fail(origin, "key '" + key + "' outside of a section");
      ConfigEntry e{"", key, value, origin};
      if (as_int(e) != kConfigSchema)
        fail(origin, "unsupported schema " + value + " (expected " +
                         std::to_string(kConfigSchema) + ")");
      raw.schema_seen = true;
      continue;
    }
    for (const auto& prev : raw.entries)
      if (prev.section == section && prev.key == key)
        fail(origin, "duplicate key '" + key + "' (first set at " + prev.origin + ")");
    raw.entries.push_back({section, key, value, origin});
  }
  if (!raw.schema_seen) fail(source + ":1", "missing 'schema = " + std::to_string(kConfigSchema) + "'");
  return raw;
}

void apply_override(RawConfig& raw, const std::string& text) {
  const std::string origin = "override '" + text + "'";
  const auto eq = text.find('=');
  const auto dot = text.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    fail(origin, "expected section.key=value");
  const std::string section = trim(std::string_view(text).substr(0, dot));
  const std::string key = trim(std::string_view(text).substr(dot + 1, eq - dot - 1));
  const std::string value = trim(std::string_view(text).substr(eq + 1));
  if (!kSections.contains(section)) fail(origin, "unknown section [" + section + "]");
  if (key.empty() || value.empty()) fail(origin, "expected section.key=value");
  raw.sections.insert(section);
  for (auto& e : raw.entries) {
    if (e.section == section && e.key == key) {
      e.value = value;
      e.origin = origin;
      return;
    }
  }
  raw.entries.push_back({section, key, value, origin});
}

using Setter = std::function<void(ExperimentConfig&, const ConfigEntry&)>;
using SetterTable = std::map<std::string, Setter, std::less<>>;

#define MEMU_DOUBLE(field) [](ExperimentConfig& c, const ConfigEntry& e) { c.field = as_double(e); }
#define MEMU_INT(field) [](ExperimentConfig& c, const ConfigEntry& e) { c.field = as_int(e); }
#define MEMU_BOOL(field) [](ExperimentConfig& c, const ConfigEntry& e) { c.field = as_bool(e); }
#define MEMU_RANGE(field) [](ExperimentConfig& c, const ConfigEntry& e) { c.field = as_range(e); }

SetterTable pendulum_keys() {
  return {
      {"inertia", MEMU_DOUBLE(plant.pendulum()->inertia)},
      {"mgd", MEMU_DOUBLE(plant.pendulum()->mgd)},
      {"damping", MEMU_DOUBLE(plant.pendulum()->joint_damping)},
      {"q_min", MEMU_DOUBLE(plant.pendulum()->phi_min)},
      {"q_max", MEMU_DOUBLE(plant.pendulum()->phi_max)},
      {"tau_max", MEMU_DOUBLE(plant.pendulum()->tau_abs_max)},
      {"link_mass", MEMU_DOUBLE(plant.pendulum()->link_mass)},
      {"friction", MEMU_DOUBLE(plant.pendulum()->friction)},
  };
}

SetterTable hopper_keys() {
  return {
      {"body_mass", MEMU_DOUBLE(plant.hopper()->body_mass)},
      {"moment_arm", MEMU_DOUBLE(plant.hopper()->r)},
      {"leg_rest_length", MEMU_DOUBLE(plant.hopper()->leg_rest_length)},
      {"leg_inertia", MEMU_DOUBLE(plant.hopper()->leg_inertia)},
      {"gravity", MEMU_DOUBLE(plant.hopper()->g)},
      {"ground_height", MEMU_DOUBLE(plant.hopper()->ground_height)},
      {"q_min", MEMU_DOUBLE(plant.hopper()->phi_min)},
      {"q_max", MEMU_DOUBLE(plant.hopper()->phi_max)},
      {"tau_max", MEMU_DOUBLE(plant.hopper()->tau_abs_max)},
      {"damping", MEMU_DOUBLE(plant.hopper()->joint_damping)},
      {"friction", MEMU_DOUBLE(plant.hopper()->friction)},
  };
}

const std::map<std::string, SetterTable, std::less<>>& section_keys() {
  static const std::map<std::string, SetterTable, std::less<>> table = [] {
    std::map<std::string, SetterTable, std::less<>> t;
    t["actuator"] = {
        {"kp", MEMU_DOUBLE(actuator.pd.k_stiff)},
        {"kd", MEMU_DOUBLE(actuator.pd.k_damp)},
        {"pd_action_scale", MEMU_DOUBLE(actuator.pd_action_scale)},
        {"k_scale",
         [](ExperimentConfig& c, const ConfigEntry& e) {
           c.actuator.limits.k_scale = as_double(e);
           c.k_scale_set = true;
         }},
        {"tau_max", MEMU_DOUBLE(actuator.limits.tau_abs_max)},
        {"floor_damping", MEMU_DOUBLE(actuator.limits.k_damp_floor)},
    };
    t["muscle"] = {
        {"l_min", MEMU_DOUBLE(actuator.muscle.l_min)},
        {"l_max", MEMU_DOUBLE(actuator.muscle.l_max)},
        {"fv_max", MEMU_DOUBLE(actuator.muscle.fv_max)},
        {"fp_max", MEMU_DOUBLE(actuator.muscle.fp_max)},
        {"lce_min", MEMU_DOUBLE(actuator.muscle.lce_min)},
        {"lce_max", MEMU_DOUBLE(actuator.muscle.lce_max)},
        {"f_max", MEMU_DOUBLE(actuator.muscle.f_max)},
        {"phi_min", MEMU_DOUBLE(actuator.muscle.phi_min)},
        {"phi_max", MEMU_DOUBLE(actuator.muscle.phi_max)},
        {"tau_act", MEMU_DOUBLE(actuator.muscle.tau_act)},
        {"beta", MEMU_DOUBLE(actuator.muscle.beta)},
        {"k_damp", MEMU_DOUBLE(muscle_k_damp)},
        {"beta_source",
         [](ExperimentConfig& c, const ConfigEntry& e) {
           if (e.value == "explicit") c.beta_source = BetaSource::explicit_value;
           else if (e.value == "eq12") c.beta_source = BetaSource::eq12;
           else fail(e.origin, "muscle.beta_source: expected explicit or eq12, got '" + e.value + "'");
         }},
    };
    t["rates"] = {
        {"policy_hz", MEMU_DOUBLE(rates.policy_hz)},
        {"controller_hz", MEMU_DOUBLE(rates.controller_hz)},
        {"physics_dt", MEMU_DOUBLE(rates.physics_dt)},
        {"substeps", MEMU_INT(rates.substeps_per_control)},
        {"backend_hold", MEMU_BOOL(rates.backend_hold)},
        {"action_delay", MEMU_DOUBLE(latency.action_delay)},
        {"jitter_std", MEMU_DOUBLE(latency.jitter_std)},
        {"jitter_seed",
         [](ExperimentConfig& c, const ConfigEntry& e) {
           const long long v = parse_int(e, e.value);
           if (v < 0) fail(e.origin, "rates.jitter_seed: must be >= 0");
           c.latency.seed = static_cast<std::uint64_t>(v);
         }},
    };
    t["train"] = {
        {"algorithm",
         [](ExperimentConfig&, const ConfigEntry& e) {
           if (e.value != "cem") fail(e.origin, "train.algorithm: only 'cem' is supported");
         }},
        {"population", MEMU_INT(trainer.population)},
        {"elite_fraction", MEMU_DOUBLE(trainer.elite_fraction)},
        {"generations", MEMU_INT(trainer.generations)},
        {"init_std", MEMU_DOUBLE(trainer.init_std)},
        {"extra_noise", MEMU_DOUBLE(trainer.extra_noise)},
        {"noise_decay", MEMU_DOUBLE(trainer.noise_decay)},
        {"episodes_per_eval", MEMU_INT(trainer.episodes_per_eval)},
        {"eval_episodes", MEMU_INT(trainer.eval_episodes)},
        {"threads", MEMU_INT(trainer.threads)},
        {"hidden",
         [](ExperimentConfig& c, const ConfigEntry& e) {
           c.trainer.hidden.clear();
           if (e.value == "none") return;
           for (const auto& item : split_list(e)) {
             const long long h = parse_int(e, item);
             if (h <= 0 || h > 4096) fail(e.origin, "train.hidden: layer sizes must be in 1..4096");
             c.trainer.hidden.push_back(static_cast<std::size_t>(h));
           }
         }},
        {"seeds", [](ExperimentConfig& c, const ConfigEntry& e) { c.seeds = as_seeds(e); }},
        {"actuators",
         [](ExperimentConfig& c, const ConfigEntry& e) {
           c.compare.clear();
           for (const auto& item : split_list(e))
             c.compare.push_back(convert(e, [&](const std::string&) { return parse_actuator_kind(item); }));
         }},
        {"robustness_episodes", MEMU_INT(robustness.episodes)},
        {"bootstrap_resamples", MEMU_INT(robustness.bootstrap_resamples)},
        {"ci_level", MEMU_DOUBLE(robustness.ci_level)},
        {"eval_push", MEMU_RANGE(robustness.suite.push)},
        {"eval_push_scale", MEMU_DOUBLE(robustness.suite.push_scale)},
        {"eval_push_interval", MEMU_DOUBLE(robustness.suite.push_interval)},
        {"eval_mass_shift", MEMU_RANGE(robustness.suite.mass_shift)},
        {"eval_init_joint_pos", MEMU_RANGE(robustness.suite.init_joint_pos)},
        {"eval_seed",
         [](ExperimentConfig& c, const ConfigEntry& e) {
           const long long v = parse_int(e, e.value);
           if (v < 0) fail(e.origin, "train.eval_seed: must be >= 0");
           c.robustness.suite.seed = static_cast<std::uint64_t>(v);
         }},
    };
    t["noise_dr"] = {
        {"noise", MEMU_BOOL(noise.noise_enabled)},
        {"randomize", MEMU_BOOL(noise.dr_enabled)},
        {"base_lin_vel", MEMU_RANGE(noise.noise.base_lin_vel)},
        {"base_ang_vel", MEMU_RANGE(noise.noise.base_ang_vel)},
        {"gravity", MEMU_RANGE(noise.noise.gravity)},
        {"joint_pos", MEMU_RANGE(noise.noise.joint_pos)},
        {"joint_vel", MEMU_RANGE(noise.noise.joint_vel)},
        {"muscle_length", MEMU_RANGE(noise.noise.muscle_length)},
        {"muscle_vel", MEMU_RANGE(noise.noise.muscle_vel)},
        {"muscle_act", MEMU_RANGE(noise.noise.muscle_act)},
        {"muscle_force", MEMU_RANGE(noise.noise.muscle_force)},
        {"init_joint_pos", MEMU_RANGE(noise.dr.init_joint_pos)},
        {"init_muscle_act", MEMU_RANGE(noise.dr.init_muscle_act)},
        {"friction", MEMU_RANGE(noise.dr.friction)},
        {"joint_damping", MEMU_RANGE(noise.dr.joint_damping)},
        {"push", MEMU_RANGE(noise.dr.push)},
        {"mass_shift", MEMU_RANGE(noise.dr.mass_shift)},
        {"push_interval", MEMU_DOUBLE(noise.dr.push_interval)},
    };
    t["task"] = {
        {"horizon", MEMU_DOUBLE(task.horizon)},
        {"q0", MEMU_DOUBLE(task.q0)},
        {"kick", MEMU_DOUBLE(task.kick)},
        {"m_act0",
         [](ExperimentConfig& c, const ConfigEntry& e) {
           const auto v = as_doubles(e);
           if (v.size() != 2) fail(e.origin, "task.m_act0: expected two values");
           c.task.m_act0 = {v[0], v[1]};
         }},
        {"target", MEMU_DOUBLE(task.target)},
        {"fail_angle", MEMU_DOUBLE(task.fail_angle)},
        {"settle_time", MEMU_DOUBLE(task.settle_time)},
        {"collapse_time", MEMU_DOUBLE(task.collapse_time)},
        {"fall_height_fraction", MEMU_DOUBLE(task.fall_height_fraction)},
        {"v_target", MEMU_DOUBLE(reward.v_target)},
        {"sigma", MEMU_DOUBLE(reward.sigma)},
        {"hop_gain", MEMU_DOUBLE(reward.hop_gain)},
        {"hop_clip",
         [](ExperimentConfig& c, const ConfigEntry& e) {
           const Range r = as_range(e);
           c.reward.hop_clip_lo = r.lo;
           c.reward.hop_clip_hi = r.hi;
         }},
        {"w_act", MEMU_DOUBLE(reward.w_act)},
        {"policy", [](ExperimentConfig& c, const ConfigEntry& e) { c.policy = e.value; }},
    };
    t["sweep"] = {
        {"betas", [](ExperimentConfig& c, const ConfigEntry& e) { c.sweep.betas = as_doubles(e); }},
        {"freqs", [](ExperimentConfig& c, const ConfigEntry& e) { c.sweep.freqs = as_doubles(e); }},
        {"kick", MEMU_DOUBLE(sweep.kick)},
        {"horizon", MEMU_DOUBLE(sweep.horizon)},
        {"settle_time", MEMU_DOUBLE(sweep.settle_time)},
    };
    t["output"] = {
        {"directory", [](ExperimentConfig& c, const ConfigEntry& e) { c.output_dir = e.value; }},
    };
    return t;
  }();
  return table;
}

#undef MEMU_DOUBLE
#undef MEMU_INT
#undef MEMU_BOOL
#undef MEMU_RANGE

const ConfigEntry* find(const RawConfig& raw, std::string_view section, std::string_view key) {
  for (const auto& e : raw.entries)
    if (e.section == section && e.key == key) return &e;
  return nullptr;
}

// Checks that need to point at the offending line.
void check_entry(const ExperimentConfig& c, const ConfigEntry& e) {
  const auto bad = [&](const std::string& why) { fail(e.origin, e.section + "." + e.key + ": " + why); };
  if (e.section == "train") {
    if (e.key == "population" && c.trainer.population < 2) bad("must be >= 2");
    if (e.key == "generations" && c.trainer.generations < 0) bad("must be >= 0");
    if ((e.key == "episodes_per_eval" || e.key == "eval_episodes") &&
        (e.key == "episodes_per_eval" ? c.trainer.episodes_per_eval : c.trainer.eval_episodes) < 1)
      bad("must be >= 1");
    if (e.key == "threads" && c.trainer.threads < 0) bad("must be >= 0");
    if (e.key == "robustness_episodes" && c.robustness.episodes < 1) bad("must be >= 1");
    if (e.key == "bootstrap_resamples" && c.robustness.bootstrap_resamples < 1) bad("must be >= 1");
    if (e.key == "ci_level" && !(c.robustness.ci_level > 0.0 && c.robustness.ci_level < 1.0))
      bad("must be in (0, 1)");
    if (e.key == "seeds" && c.seeds.empty()) bad("must not be empty");
    if (e.key == "actuators" && c.compare.empty()) bad("must not be empty");
  }
  if (e.section == "sweep") {
    if ((e.key == "betas" && std::any_of(c.sweep.betas.begin(), c.sweep.betas.end(),
                                          [](double b) { return b < 0.0; })) ||
        (e.key == "freqs" && std::any_of(c.sweep.freqs.begin(), c.sweep.freqs.end(),
                                          [](double f) { return f <= 0.0; })))
      bad("values out of range");
  }
  if (e.section == "muscle" && e.key == "k_damp" && c.muscle_k_damp < 0.0) bad("must be >= 0");
  if (e.section == "actuator" && e.key == "k_scale" && c.actuator.limits.k_scale <= 0.0)
    bad("must be > 0");
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, std::string_view source_name,
                              std::span<const std::string> overrides) {
  const std::string source(source_name);
  RawConfig raw = read_raw(text, source);
  for (const auto& o : overrides) apply_override(raw, o);

  ExperimentConfig c;
  c.source_name = source;
  c.muscle_k_damp = 0.1;

  // Keys that change the meaning or defaults of others come first.
  if (const auto* e = find(raw, "plant", "type")) {
    const PlantKind kind = convert(*e, [](const std::string& v) { return parse_plant_kind(v); });
    if (kind == PlantKind::hopper) c.plant = HopperPlant{};
  }
  if (const auto* e = find(raw, "actuator", "mode")) {
    c.mode = convert(*e, [](const std::string& v) { return parse_loop_mode(v); });
  }
  c.rates = c.mode == LoopMode::hardware_faithful ? RateConfig::hardware_faithful()
                                                  : RateConfig::ideal_sim();
  c.actuator.limits.k_damp_floor = floor_damping_for(c.mode);
  if (const auto* e = find(raw, "actuator", "type")) {
    c.actuator.kind = convert(*e, [](const std::string& v) { return parse_actuator_kind(v); });
  }
  if (const auto* e = find(raw, "task", "type")) {
    c.task.kind = convert(*e, [](const std::string& v) { return parse_task_kind(v); });
  }

  const SetterTable plant_table =
      c.plant.kind() == PlantKind::hopper ? hopper_keys() : pendulum_keys();
  const SetterTable other_plant =
      c.plant.kind() == PlantKind::hopper ? pendulum_keys() : hopper_keys();
  for (const auto& e : raw.entries) {
    if ((e.section == "plant" || e.section == "task") && e.key == "type") continue;
    if (e.section == "actuator" && (e.key == "type" || e.key == "mode")) continue;
    const SetterTable* table = nullptr;
    if (e.section == "plant") {
      table = &plant_table;
      if (!plant_table.contains(e.key) && other_plant.contains(e.key))
        fail(e.origin, "plant." + e.key + " does not apply to plant type " +
                           std::string(to_string(c.plant.kind())));
    } else {
      table = &section_keys().at(e.section);
    }
    const auto it = table->find(e.key);
    if (it == table->end()) fail(e.origin, "unknown key '" + e.key + "' in [" + e.section + "]");
    it->second(c, e);
    check_entry(c, e);
  }

  c.has_muscle_section = raw.sections.contains("muscle");
  const auto anchor = [&](std::string_view section, std::string_view key) {
    if (const auto* e = find(raw, section, key)) return e->origin;
    return source;
  };

  // Cross-field checks.
  const bool wants_muscle =
      c.actuator.kind == ActuatorKind::muscle ||
      std::find(c.compare.begin(), c.compare.end(), ActuatorKind::muscle) != c.compare.end();
  if (c.actuator.kind == ActuatorKind::muscle && !c.has_muscle_section)
    fail(anchor("actuator", "type"), "actuator type 'muscle' requires a [muscle] section");
  if (c.actuator.kind == ActuatorKind::torque && !c.k_scale_set)
    fail(anchor("actuator", "type"),
         "actuator type 'torque' requires actuator.k_scale (no default)");

  if (c.beta_source == BetaSource::eq12) {
    if (find(raw, "muscle", "beta"))
      fail(anchor("muscle", "beta"), "muscle.beta conflicts with beta_source = eq12");
    if (!find(raw, "muscle", "k_damp"))
      fail(anchor("muscle", "beta_source"), "beta_source = eq12 requires muscle.k_damp");
  }
  try {
    const MuscleGeometry g = derive_geometry(c.actuator.muscle);
    if (c.beta_source == BetaSource::eq12)
      c.actuator.muscle.beta = beta_from_damping(c.muscle_k_damp, g.a1, c.actuator.muscle.f_max);
  } catch (const std::invalid_argument& ex) {
    fail(wants_muscle && c.has_muscle_section ? anchor("muscle", "f_max") : source,
         std::string("[muscle] ") + ex.what());
  }

  const auto section_check = [&](std::string_view section, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& ex) {
      std::string origin = source;
      for (const auto& e : raw.entries)
        if (e.section == section) { origin = e.origin; break; }
      fail(origin, "[" + std::string(section) + "] " + ex.what());
    }
  };
  section_check("plant", [&] { c.plant.validate(); });
  section_check("muscle", [&] { c.actuator.muscle.validate(); });
  section_check("rates", [&] {
    c.rates.validate(c.mode);
    c.latency.validate();
  });
  section_check("actuator", [&] {
    require(c.actuator.pd.k_stiff >= 0.0 && c.actuator.pd.k_damp >= 0.0, "gains must be >= 0");
    require(c.actuator.limits.tau_abs_max > 0.0, "tau_max must be > 0");
    require(c.actuator.limits.k_damp_floor >= 0.0, "floor_damping must be >= 0");
    require(c.actuator.pd_action_scale > 0.0, "pd_action_scale must be > 0");
  });
  section_check("train", [&] { c.trainer.validate(); });
  section_check("noise_dr", [&] { c.noise.validate(); });
  section_check("task", [&] {
    c.task.validate();
    c.reward.validate();
    const bool hop = c.task.kind == TaskKind::hop;
    require(hop == (c.plant.kind() == PlantKind::hopper),
            hop ? "task 'hop' requires plant type hopper"
                : "tasks 'hold' and 'walk' require plant type pendulum");
  });
  section_check("sweep", [&] {
    require(!c.sweep.betas.empty() && !c.sweep.freqs.empty(), "grids must not be empty");
    require(c.sweep.horizon > c.sweep.settle_time && c.sweep.settle_time >= 0.0,
            "horizon must exceed settle_time");
  });
  if (c.output_dir.empty()) fail(anchor("output", "directory"), "output.directory must not be empty");

  c.entries = std::move(raw.entries);
  return c;
}

ExperimentConfig load_config(const std::string& path, std::span<const std::string> overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  ExperimentConfig c = parse_config(text.str(), path, overrides);
  c.base_dir = std::filesystem::path(path).parent_path().string();
  return c;
}

std::string ExperimentConfig::canonical_text() const {
  std::map<std::string, std::map<std::string, std::string>> sorted;
  for (const auto& e : entries) sorted[e.section][e.key] = e.value;
  std::string out = "schema = " + std::to_string(kConfigSchema) + "\n";
  for (const auto& [section, keys] : sorted) {
    out += "[" + section + "]\n";
    for (const auto& [key, value] : keys) out += key + " = " + value + "\n";
  }
  return out;
}

ActuatorConfig ExperimentConfig::actuator_for(ActuatorKind kind) const {
  ActuatorConfig a = actuator;
  a.kind = kind;
  return a;
}

TrainTask ExperimentConfig::train_task(ActuatorKind kind) const {
  if (kind == ActuatorKind::muscle && !has_muscle_section)
    throw ConfigError(source_name + ": muscle controller requested but the config has no [muscle] section");
  if (kind == ActuatorKind::torque && !k_scale_set)
    throw ConfigError(source_name + ": torque controller requested but actuator.k_scale is not set");
  TrainTask t;
  t.plant = plant;
  t.actuator = actuator_for(kind);
  t.rates = rates;
  t.latency = latency;
  t.task = task;
  t.reward = reward;
  t.noise = noise;
  return t;
}

HoldBenchmark ExperimentConfig::hold_benchmark() const {
  const PendulumPlant* p = plant.pendulum();
  if (p == nullptr) throw ConfigError(source_name + ": the hold benchmark needs plant type pendulum");
  if (!has_muscle_section) throw ConfigError(source_name + ": the hold benchmark needs a [muscle] section");
  HoldBenchmark b;
  b.plant = *p;
  b.muscle = actuator.muscle;
  b.limits = actuator.limits;
  b.rates = rates;
  b.latency = latency;
  b.kick = sweep.kick;
  b.horizon = sweep.horizon;
  b.settle_time = sweep.settle_time;
  return b;
}

}  // namespace memu
