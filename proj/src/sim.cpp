#include "rfact/sim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

namespace rfact {

double RssModel::blockage_delta(Blockage kind) const {
  switch (kind) {
    case Blockage::none:
      return 0.0;
    case Blockage::body:
      return body_block_db;
    case Blockage::arm:
    case Blockage::leg:
      return limb_block_db;
  }
  return 0.0;
}

bool RssModel::fully_blocked(Blockage kind) const {
  switch (kind) {
    case Blockage::none:
      return false;
    case Blockage::body:
      return power_dbm < body_full_block_below_dbm;
    case Blockage::arm:
      return power_dbm < arm_full_block_below_dbm;
    case Blockage::leg:
      return power_dbm < leg_full_block_below_dbm;
  }
  return false;
}

double RssModel::base_rss(double distance_m, double angle_rad) const {
  const double d = std::max(distance_m, 0.05);
  return reference_dbm + (power_dbm - 30.0) - path_loss_db_per_decade * std::log10(d) -
         angle_loss_db * (1.0 - std::cos(angle_rad));
}

ActivityProfile ActivityProfile::flat(const std::string& activity, const BodyLayout& layout,
                                      const ProfileEntry& fill) {
  ActivityProfile p;
  p.activity = activity;
  p.num_antennas = layout.num_antennas();
  p.num_parts = layout.num_parts();
  p.entries.assign(static_cast<std::size_t>(p.num_antennas) * p.num_parts, fill);
  return p;
}

int DwellSchedule::active_antenna(double t_s) const {
  if (cycle_order.empty()) throw std::runtime_error("dwell schedule: empty cycle order");
  const double t = std::max(t_s, 0.0);
  const auto slot = static_cast<std::size_t>(t / dwell_s);
  return cycle_order[slot % cycle_order.size()];
}

DwellSchedule DwellSchedule::for_layout(const BodyLayout& layout) {
  DwellSchedule s;
  s.cycle_order.resize(static_cast<std::size_t>(layout.num_antennas()));
  for (int a = 0; a < layout.num_antennas(); ++a) s.cycle_order[static_cast<std::size_t>(a)] = a;
  return s;
}

std::vector<SubjectEffect> make_subjects(int count, double offset_range_db, double scale_range) {
  std::vector<SubjectEffect> subjects;
  for (int k = 0; k < count; ++k) {
    SubjectEffect s;
    s.subject_id = "s" + std::to_string(k);
    if (count > 1) {
      const double frac = static_cast<double>(k) / static_cast<double>(count - 1);
      s.offset_db = -offset_range_db + 2.0 * offset_range_db * frac;
      s.amp_scale = 1.0 - scale_range + 2.0 * scale_range * frac;
    }
    subjects.push_back(std::move(s));
  }
  return subjects;
}

std::optional<double> rss_sample(const RssModel& model, const ActivityProfile& profile,
                                 const BodyLayout& layout, int antenna_id, int tag_id, double t_s,
                                 Rng& rng) {
  const ProfileEntry& entry = profile.entry(antenna_id, layout.part_of(tag_id));

  bool blocked = false;
  if (entry.blockage != Blockage::none && entry.blockage_duty > 0.0)
    blocked = rng.uniform() < entry.blockage_duty;
  if (blocked && model.fully_blocked(entry.blockage)) return std::nullopt;
  if (entry.miss_prob > 0.0 && rng.uniform() < entry.miss_prob) return std::nullopt;

  double value = entry.base_dbm + (model.power_dbm - 30.0) +
                 entry.amplitude_db * std::sin(2.0 * M_PI * entry.frequency_hz * t_s + entry.phase);
  if (blocked) value -= model.blockage_delta(entry.blockage);
  if (model.noise_sigma_db > 0.0) value += rng.normal(0.0, model.noise_sigma_db);

  if (value < model.detect_floor_dbm) return std::nullopt;
  return std::min(value, 0.0);
}

std::vector<TagReading> simulate_activity(const RssModel& model, const ActivityProfile& profile,
                                          const BodyLayout& layout, const DwellSchedule& schedule,
                                          const SubjectEffect& subject, double duration_s,
                                          std::uint64_t seed) {
  if (duration_s <= 0.0) throw std::runtime_error("simulate: duration must be positive");
  if (profile.num_antennas != layout.num_antennas() || profile.num_parts != layout.num_parts())
    throw std::runtime_error("simulate: profile does not match layout");

  Rng rng(seed);
  ActivityProfile instance = profile;
  for (ProfileEntry& entry : instance.entries) {
    if (entry.phase_jitter > 0.0)
      entry.phase += rng.uniform(-entry.phase_jitter, entry.phase_jitter);
    entry.base_dbm += subject.offset_db;
    entry.amplitude_db *= subject.amp_scale;
  }

  const auto attempts = static_cast<std::int64_t>(std::llround(schedule.readings_per_second * duration_s));
  std::vector<TagReading> readings;
  readings.reserve(static_cast<std::size_t>(attempts));
  for (std::int64_t i = 0; i < attempts; ++i) {
    const double t = (static_cast<double>(i) + 0.5) / schedule.readings_per_second;
    const int antenna = schedule.active_antenna(t);
    const int tag = static_cast<int>(i % layout.num_tags());
    const auto value = rss_sample(model, instance, layout, antenna, tag, t, rng);
    if (!value) continue;
    TagReading r;
    r.timestamp_ms = static_cast<std::int64_t>(t * 1000.0);
    r.antenna_id = antenna;
    r.tag_id = tag;
    r.rss_dbm = *value;
    readings.push_back(r);
  }
  return readings;
}

namespace {

// Nominal link distances (m) for the default wear positions, antenna-major
// over the 9 parts: wrists, arms, body, legs, ankles.
constexpr double kLinkDistance[4][9] = {
    {0.70, 0.70, 0.50, 0.50, 0.25, 0.90, 0.90, 1.30, 1.30},  // back
    {0.55, 0.55, 0.45, 0.45, 0.20, 0.95, 0.95, 1.35, 1.35},  // chest
    {1.10, 1.30, 1.20, 1.40, 1.00, 0.45, 0.70, 0.20, 0.50},  // left foot
    {1.30, 1.10, 1.40, 1.20, 1.00, 0.70, 0.45, 0.50, 0.20},  // right foot
};

constexpr int kLeftWrist = 0;
constexpr int kRightWrist = 1;
constexpr int kLeftArm = 2;
constexpr int kRightArm = 3;
constexpr int kBody = 4;
constexpr int kLeftLeg = 5;
constexpr int kRightLeg = 6;
constexpr int kLeftAnkle = 7;
constexpr int kRightAnkle = 8;

constexpr int kBack = 0;
constexpr int kChest = 1;
constexpr int kLeftFoot = 2;
constexpr int kRightFoot = 3;

constexpr int kUpperParts[] = {kLeftWrist, kRightWrist, kLeftArm, kRightArm};
constexpr int kLowerParts[] = {kLeftLeg, kRightLeg, kLeftAnkle, kRightAnkle};

bool is_right_side(int part) {
  return part == kRightWrist || part == kRightArm || part == kRightLeg || part == kRightAnkle;
}

ActivityProfile baseline_profile(const std::string& activity, const BodyLayout& layout,
                                 const RssModel& model) {
  ProfileEntry idle;
  idle.amplitude_db = 0.2;
  idle.frequency_hz = 0.15;
  idle.phase_jitter = 0.3;
  ActivityProfile p = ActivityProfile::flat(activity, layout, idle);
  for (int a = 0; a < p.num_antennas; ++a)
    for (int part = 0; part < p.num_parts; ++part) {
      ProfileEntry& e = p.entry(a, part);
      e.base_dbm = model.base_rss(kLinkDistance[a][part], 0.0);
      e.phase = 0.7 * static_cast<double>(a * p.num_parts + part);
    }
  return p;
}

void set_motion(ProfileEntry& e, double amplitude_db, double frequency_hz, double phase) {
  e.amplitude_db = amplitude_db;
  e.frequency_hz = frequency_hz;
  e.phase = phase;
  e.phase_jitter = 0.8;
}

// Shared view of the three housework activities on every antenna except the
// chest; only the chest antenna faces the arms' work zone, so it alone
// separates them.
void apply_housework_shared(ActivityProfile& p) {
  for (int a : {kBack, kLeftFoot, kRightFoot}) {
    for (int part : kUpperParts) set_motion(p.entry(a, part), 2.0, 0.8, is_right_side(part) ? M_PI : 0.0);
    for (int part : kLowerParts) set_motion(p.entry(a, part), 1.0, 0.4, is_right_side(part) ? M_PI : 0.0);
    set_motion(p.entry(a, kBody), 0.8, 0.8, M_PI / 2.0);
  }
  p.entry(kBack, kBody).base_dbm -= 2.0;
  p.entry(kLeftFoot, kBody).base_dbm += 1.0;
  p.entry(kRightFoot, kBody).base_dbm += 1.0;
}

// Shared view of the two leg-cadence activities on every antenna except the
// left foot, which alone sees the cadence difference.
void apply_cadence_shared(ActivityProfile& p) {
  for (int a : {kBack, kChest, kRightFoot}) {
    for (int part : {kLeftLeg, kRightLeg, kLeftAnkle, kRightAnkle})
      set_motion(p.entry(a, part), 3.0, 1.3, is_right_side(part) ? M_PI : 0.0);
    for (int part : kUpperParts) set_motion(p.entry(a, part), 0.8, 1.3, is_right_side(part) ? M_PI : 0.0);
    set_motion(p.entry(a, kBody), 0.5, 1.3, M_PI / 2.0);
  }
  p.entry(kBack, kBody).base_dbm -= 3.0;
  for (int part : kLowerParts) p.entry(kRightFoot, part).base_dbm += 2.0;
}

}  // namespace

std::vector<ActivityProfile> default_profiles(const BodyLayout& layout) {
  if (layout.num_antennas() != 4 || layout.num_parts() != 9)
    throw std::runtime_error("default profiles require the default 4-antenna, 9-part layout");
  const RssModel nominal;  // bases are stored at 30 dBm reference power
  std::vector<ActivityProfile> profiles;

  for (const ActivityLabel& label : default_activities())
    profiles.push_back(baseline_profile(label.name, layout, nominal));

  // Sitting: static posture, chair geometry pulls thighs toward the foot
  // antennas and the torso against the chair back.
  {
    ActivityProfile& p = profiles[0];
    for (int a : {kLeftFoot, kRightFoot}) {
      p.entry(a, kLeftLeg).base_dbm += 3.0;
      p.entry(a, kRightLeg).base_dbm += 3.0;
    }
    p.entry(kBack, kBody).base_dbm += 3.0;
    for (int a : {kBack, kChest}) {
      p.entry(a, kLeftWrist).base_dbm += 2.0;
      p.entry(a, kRightWrist).base_dbm += 2.0;
    }
  }

  // Standing: neutral bases, barely any motion.
  for (ProfileEntry& e : profiles[1].entries) {
    e.amplitude_db = 0.15;
    e.frequency_hz = 0.1;
  }

  // Walking: strong periodic motion on every limb, visible from every
  // antenna; swinging legs intermittently shadowed from the torso antennas.
  {
    ActivityProfile& p = profiles[2];
    for (int a = 0; a < 4; ++a) {
      for (int part : {kLeftLeg, kRightLeg, kLeftAnkle, kRightAnkle})
        set_motion(p.entry(a, part), 5.0, 1.6, is_right_side(part) ? M_PI : 0.0);
      set_motion(p.entry(a, kLeftWrist), 3.5, 1.6, 0.0);
      set_motion(p.entry(a, kRightWrist), 3.5, 1.6, M_PI);
      set_motion(p.entry(a, kLeftArm), 3.0, 1.6, 0.0);
      set_motion(p.entry(a, kRightArm), 3.0, 1.6, M_PI);
      set_motion(p.entry(a, kBody), 3.0, 1.6, M_PI / 2.0);
    }
    for (int a : {kBack, kChest})
      for (int part : kLowerParts) {
        p.entry(a, part).blockage = Blockage::leg;
        p.entry(a, part).blockage_duty = 0.10;
      }
  }

  // Cleaning window: housework shared view + high slow wipes at chest level.
  {
    ActivityProfile& p = profiles[3];
    apply_housework_shared(p);
    for (int part : {kLeftWrist, kRightWrist}) {
      set_motion(p.entry(kChest, part), 6.0, 0.5, is_right_side(part) ? M_PI : 0.0);
      p.entry(kChest, part).base_dbm += 3.0;
    }
    for (int part : {kLeftArm, kRightArm}) {
      set_motion(p.entry(kChest, part), 5.0, 0.5, is_right_side(part) ? M_PI : 0.0);
      p.entry(kChest, part).base_dbm += 3.0;
    }
    set_motion(p.entry(kChest, kBody), 1.0, 0.5, M_PI / 2.0);
    for (int part : kLowerParts) set_motion(p.entry(kChest, part), 0.5, 0.4, 0.0);
  }

  // Cleaning table: same shared view, faster low wipes.
  {
    ActivityProfile& p = profiles[4];
    apply_housework_shared(p);
    for (int part : {kLeftWrist, kRightWrist}) {
      set_motion(p.entry(kChest, part), 4.5, 1.1, is_right_side(part) ? M_PI : 0.0);
      p.entry(kChest, part).base_dbm -= 1.0;
    }
    for (int part : {kLeftArm, kRightArm}) {
      set_motion(p.entry(kChest, part), 4.0, 1.1, is_right_side(part) ? M_PI : 0.0);
      p.entry(kChest, part).base_dbm -= 1.0;
    }
    set_motion(p.entry(kChest, kBody), 1.0, 1.1, M_PI / 2.0);
    for (int part : kLowerParts) set_motion(p.entry(kChest, part), 0.5, 0.4, 0.0);
  }

  // Vacuuming: same shared view, one-armed push with the arm sweeping
  // through the chest antenna's line of sight.
  {
    ActivityProfile& p = profiles[5];
    apply_housework_shared(p);
    set_motion(p.entry(kChest, kRightWrist), 5.0, 0.7, 0.0);
    p.entry(kChest, kRightWrist).base_dbm -= 2.0;
    p.entry(kChest, kRightWrist).blockage = Blockage::arm;
    p.entry(kChest, kRightWrist).blockage_duty = 0.2;
    set_motion(p.entry(kChest, kLeftWrist), 1.2, 0.7, 0.0);
    p.entry(kChest, kLeftWrist).base_dbm -= 2.0;
    set_motion(p.entry(kChest, kRightArm), 4.0, 0.7, 0.0);
    p.entry(kChest, kRightArm).base_dbm -= 2.0;
    set_motion(p.entry(kChest, kLeftArm), 1.0, 0.7, 0.0);
    set_motion(p.entry(kChest, kBody), 1.0, 0.7, M_PI / 2.0);
    for (int part : kLowerParts) set_motion(p.entry(kChest, part), 1.5, 0.7, is_right_side(part) ? M_PI : 0.0);
  }

  // Riding bike: cadence shared view + fast left-side pedaling as seen from
  // the left foot antenna.
  {
    ActivityProfile& p = profiles[6];
    apply_cadence_shared(p);
    for (int part : {kLeftLeg, kLeftAnkle}) {
      set_motion(p.entry(kLeftFoot, part), 6.0, 1.3, 0.0);
      p.entry(kLeftFoot, part).base_dbm += 2.0;
    }
    for (int part : {kRightLeg, kRightAnkle}) set_motion(p.entry(kLeftFoot, part), 3.0, 1.3, M_PI);
    set_motion(p.entry(kLeftFoot, kBody), 0.5, 1.3, M_PI / 2.0);
    for (int part : kUpperParts) set_motion(p.entry(kLeftFoot, part), 0.8, 1.3, is_right_side(part) ? M_PI : 0.0);
  }

  // Stairs: same shared view, slower step cadence on the left foot antenna.
  {
    ActivityProfile& p = profiles[7];
    apply_cadence_shared(p);
    for (int part : {kLeftLeg, kLeftAnkle}) {
      set_motion(p.entry(kLeftFoot, part), 6.0, 0.7, 0.0);
      p.entry(kLeftFoot, part).base_dbm -= 1.0;
    }
    for (int part : {kRightLeg, kRightAnkle}) set_motion(p.entry(kLeftFoot, part), 3.0, 0.7, M_PI);
    set_motion(p.entry(kLeftFoot, kBody), 1.2, 0.7, M_PI / 2.0);
    for (int part : kUpperParts) set_motion(p.entry(kLeftFoot, part), 0.8, 1.3, is_right_side(part) ? M_PI : 0.0);
  }

  return profiles;
}

std::vector<ActivityProfile> planted_profiles(const BodyLayout& layout) {
  if (layout.num_antennas() < 1 || layout.num_parts() < 3)
    throw std::runtime_error("planted profiles need at least 1 antenna and 3 parts");
  ProfileEntry idle;
  idle.base_dbm = -50.0;
  idle.amplitude_db = 0.3;
  idle.frequency_hz = 0.2;
  idle.phase_jitter = 0.3;

  std::vector<ActivityProfile> profiles;
  for (int code = 0; code < 4; ++code) {
    ActivityProfile p = ActivityProfile::flat("planted_" + std::to_string(code), layout, idle);
    if (code & 1) {
      ProfileEntry& e = p.entry(0, 1);
      e.base_dbm += 7.0;
      set_motion(e, 4.0, 0.9, 0.0);
    }
    if (code & 2) {
      ProfileEntry& e = p.entry(0, 2);
      e.base_dbm += 7.0;
      set_motion(e, 4.0, 0.5, M_PI / 3.0);
    }
    profiles.push_back(std::move(p));
  }
  return profiles;
}

void ScenarioConfig::validate() const {
  if (power_dbm != 20.0 && power_dbm != 25.0 && power_dbm != 30.0)
    throw std::runtime_error("scenario power_dbm: must be one of 20, 25, 30");
  if (noise_sigma_db < 0.0) throw std::runtime_error("scenario noise_sigma_db: must be >= 0");
  if (duration_s <= 0.0) throw std::runtime_error("scenario duration_s: must be positive");
  if (instances_per_class < 0) throw std::runtime_error("scenario instances_per_class: must be >= 0");
  if (subjects < 1) throw std::runtime_error("scenario subjects: must be >= 1");
  if (subject_offset_range_db < 0.0)
    throw std::runtime_error("scenario subject_offset_range_db: must be >= 0");
  if (subject_scale_range < 0.0 || subject_scale_range >= 1.0)
    throw std::runtime_error("scenario subject_scale_range: must be in [0, 1)");
  if (dwell_s <= 0.0) throw std::runtime_error("scenario dwell_s: must be positive");
  if (readings_per_second <= 0.0)
    throw std::runtime_error("scenario readings_per_second: must be positive");
  if (miss_prob < 0.0 || miss_prob > 1.0)
    throw std::runtime_error("scenario miss_prob: must be in [0, 1]");
  if (profile_set != "default" && profile_set != "planted")
    throw std::runtime_error("scenario profile_set: unknown set '" + profile_set + "'");
  layout.validate();
}

RssModel ScenarioConfig::rss_model() const {
  RssModel m;
  m.power_dbm = power_dbm;
  m.noise_sigma_db = noise_sigma_db;
  return m;
}

DwellSchedule ScenarioConfig::schedule() const {
  DwellSchedule s = DwellSchedule::for_layout(layout);
  s.dwell_s = dwell_s;
  s.readings_per_second = readings_per_second;
  return s;
}

std::vector<ActivityProfile> ScenarioConfig::profiles() const {
  std::vector<ActivityProfile> out =
      profile_set == "planted" ? planted_profiles(layout) : default_profiles(layout);
  for (ActivityProfile& p : out)
    for (ProfileEntry& e : p.entries) e.miss_prob = miss_prob;
  return out;
}

namespace {

double parse_scenario_number(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("scenario " + key + ": not a number: '" + value + "'");
  }
}

BodyLayout parse_scenario_layout(const std::string& value) {
  if (value == "default") return BodyLayout::default_layout();
  if (value.rfind("regular:", 0) == 0) {
    int na = 0;
    int np = 0;
    int tpp = 0;
    if (std::sscanf(value.c_str() + 8, "%d,%d,%d", &na, &np, &tpp) != 3)
      throw std::runtime_error("scenario layout: expected regular:<antennas>,<parts>,<tags_per_part>");
    return BodyLayout::regular(na, np, tpp);
  }
  // Anything else is a path to a layout manifest.
  return load_layout_manifest(value);
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);

  ScenarioConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("scenario line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);

    if (key == "name")
      config.name = value;
    else if (key == "layout")
      config.layout = parse_scenario_layout(value);
    else if (key == "profile_set")
      config.profile_set = value;
    else if (key == "power_dbm")
      config.power_dbm = parse_scenario_number(key, value);
    else if (key == "noise_sigma_db")
      config.noise_sigma_db = parse_scenario_number(key, value);
    else if (key == "duration_s")
      config.duration_s = parse_scenario_number(key, value);
    else if (key == "instances_per_class")
      config.instances_per_class = static_cast<int>(parse_scenario_number(key, value));
    else if (key == "subjects")
      config.subjects = static_cast<int>(parse_scenario_number(key, value));
    else if (key == "subject_offset_range_db")
      config.subject_offset_range_db = parse_scenario_number(key, value);
    else if (key == "subject_scale_range")
      config.subject_scale_range = parse_scenario_number(key, value);
    else if (key == "dwell_s")
      config.dwell_s = parse_scenario_number(key, value);
    else if (key == "readings_per_second")
      config.readings_per_second = parse_scenario_number(key, value);
    else if (key == "miss_prob")
      config.miss_prob = parse_scenario_number(key, value);
    else
      throw std::runtime_error("scenario line " + std::to_string(line_no) + ": unknown key '" + key +
                               "'");
  }
  config.validate();
  return config;
}

std::vector<GeneratedInstance> generate_instances(const ScenarioConfig& config, std::uint64_t seed) {
  config.validate();
  const RssModel model = config.rss_model();
  const DwellSchedule schedule = config.schedule();
  const std::vector<ActivityProfile> profiles = config.profiles();
  const std::vector<SubjectEffect> subjects =
      make_subjects(config.subjects, config.subject_offset_range_db, config.subject_scale_range);

  std::vector<GeneratedInstance> out;
  for (std::size_t act = 0; act < profiles.size(); ++act)
    for (std::size_t sub = 0; sub < subjects.size(); ++sub)
      for (int rep = 0; rep < config.instances_per_class; ++rep) {
        GeneratedInstance inst;
        inst.activity_id = static_cast<int>(act);
        inst.activity = profiles[act].activity;
        inst.subject = subjects[sub].subject_id;
        inst.seed = derive_seed(seed, act, sub, static_cast<std::uint64_t>(rep));
        inst.readings = simulate_activity(model, profiles[act], config.layout, schedule,
                                          subjects[sub], config.duration_s, inst.seed);
        out.push_back(std::move(inst));
      }
  return out;
}

namespace {

std::string sanitize_token(const std::string& s) {
  std::string out;
  for (char c : s)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::tolower(
                                                                    static_cast<unsigned char>(c)))
                                                              : '_');
  return out;
}

}  // namespace

std::vector<InstanceRecord> generate_dataset(const ScenarioConfig& config, std::uint64_t seed,
                                             const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  save_layout_manifest(config.layout, (fs::path(out_dir) / "layout.txt").string());

  const std::vector<GeneratedInstance> instances = generate_instances(config, seed);
  std::vector<InstanceRecord> records;
  std::map<std::string, int> name_counters;

  std::ofstream manifest(fs::path(out_dir) / "manifest.csv");
  if (!manifest) throw std::runtime_error("cannot write manifest in " + out_dir);
  manifest << "file,activity,subject,seed\n";

  for (const GeneratedInstance& inst : instances) {
    const std::string stem = sanitize_token(inst.activity) + "_" + inst.subject;
    const int index = name_counters[stem]++;
    const std::string file = "trace_" + stem + "_" + std::to_string(index) + ".csv";

    std::ofstream out(fs::path(out_dir) / file);
    if (!out) throw std::runtime_error("cannot write trace file " + file);
    char buf[128];
    for (const TagReading& r : inst.readings) {
      std::snprintf(buf, sizeof(buf), "%lld,%d,%d,%.4f,", static_cast<long long>(r.timestamp_ms),
                    r.antenna_id, r.tag_id, r.rss_dbm);
      out << buf << inst.activity << '\n';
    }
    if (!out) throw std::runtime_error("failed writing trace file " + file);

    manifest << file << ',' << inst.activity << ',' << inst.subject << ',' << inst.seed << '\n';
    records.push_back({file, inst.activity, inst.subject, inst.seed});
  }
  if (!manifest) throw std::runtime_error("failed writing manifest in " + out_dir);
  return records;
}

}  // namespace rfact
