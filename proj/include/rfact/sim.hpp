#pragma once

#include "rfact/common.hpp"
#include "rfact/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rfact {

enum class Blockage { none, body, arm, leg };

// Signal model of the reader/tag link. Power-dependent full-block thresholds
// and attenuation magnitudes follow the measured body-shadowing behavior;
// the distance/angle curve constants are artifact choices.
struct RssModel {
  double power_dbm = 30.0;  // valid transmit levels: 20, 25, 30
  double noise_sigma_db = 1.5;
  double detect_floor_dbm = kRssFloorDbm;

  double body_block_db = 20.0;
  double limb_block_db = 10.0;  // arm and leg alike
  double body_full_block_below_dbm = 20.0;
  double arm_full_block_below_dbm = 12.5;
  double leg_full_block_below_dbm = 15.0;

  double reference_dbm = -55.0;  // at 1 m, face-on, 30 dBm transmit
  double path_loss_db_per_decade = 25.0;
  double angle_loss_db = 3.0;  // at 90° off-axis

  [[nodiscard]] double blockage_delta(Blockage kind) const;
  [[nodiscard]] bool fully_blocked(Blockage kind) const;

  // Mean RSS of an unblocked link at the configured power.
  [[nodiscard]] double base_rss(double distance_m, double angle_rad) const;
};

// RSS process of one (antenna, body part) link during one activity:
// base + A·sin(2πft + φ) − blockage + noise.
struct ProfileEntry {
  double base_dbm = -60.0;
  double amplitude_db = 0.0;
  double frequency_hz = 0.0;
  double phase = 0.0;
  double phase_jitter = 0.0;  // uniform ±jitter applied once per instance
  Blockage blockage = Blockage::none;
  double blockage_duty = 0.0;  // fraction of samples taken while blocked
  double miss_prob = 0.0;
};

struct ActivityProfile {
  std::string activity;
  int num_antennas = 0;
  int num_parts = 0;
  std::vector<ProfileEntry> entries;  // antenna-major

  ProfileEntry& entry(int antenna_id, int part_id) {
    return entries[static_cast<std::size_t>(antenna_id) * num_parts + part_id];
  }
  [[nodiscard]] const ProfileEntry& entry(int antenna_id, int part_id) const {
    return entries[static_cast<std::size_t>(antenna_id) * num_parts + part_id];
  }

  static ActivityProfile flat(const std::string& activity, const BodyLayout& layout,
                              const ProfileEntry& fill);
};

// Single-antenna inventory rotation.
struct DwellSchedule {
  double dwell_s = 2.0;
  std::vector<int> cycle_order = {0, 1, 2, 3};
  double readings_per_second = 50.0;

  [[nodiscard]] double cycle_s() const { return dwell_s * static_cast<double>(cycle_order.size()); }
  [[nodiscard]] int active_antenna(double t_s) const;

  static DwellSchedule for_layout(const BodyLayout& layout);
};

// Per-subject RSS bias and motion-scale, modeling body differences.
struct SubjectEffect {
  std::string subject_id;
  double offset_db = 0.0;
  double amp_scale = 1.0;
};

// Evenly spread subject effects over ±offset_range_db and 1±scale_range.
std::vector<SubjectEffect> make_subjects(int count, double offset_range_db, double scale_range);

// One reading attempt at time t; absent on miss draws, full blockage, or a
// mean below the detection floor.
std::optional<double> rss_sample(const RssModel& model, const ActivityProfile& profile,
                                 const BodyLayout& layout, int antenna_id, int tag_id, double t_s,
                                 Rng& rng);

// A full labeled instance trace: readings_per_second attempts per second,
// round-robin over tags, emitted only by the dwell-active antenna.
std::vector<TagReading> simulate_activity(const RssModel& model, const ActivityProfile& profile,
                                          const BodyLayout& layout, const DwellSchedule& schedule,
                                          const SubjectEffect& subject, double duration_s,
                                          std::uint64_t seed);

// The eight studied activities over the default layout.
std::vector<ActivityProfile> default_profiles(const BodyLayout& layout);

// Reduced 4-activity set for selection experiments: only antenna 0 combined
// with parts 1 and 2 carries class information.
std::vector<ActivityProfile> planted_profiles(const BodyLayout& layout);

struct ScenarioConfig {
  std::string name = "default";
  BodyLayout layout = BodyLayout::default_layout();
  std::string profile_set = "default";  // default | planted
  double power_dbm = 30.0;
  double noise_sigma_db = 1.5;
  double duration_s = 60.0;
  int instances_per_class = 8;
  int subjects = 4;
  double subject_offset_range_db = 5.0;
  double subject_scale_range = 0.15;
  double dwell_s = 2.0;
  double readings_per_second = 50.0;
  double miss_prob = 0.03;

  void validate() const;
  [[nodiscard]] RssModel rss_model() const;
  [[nodiscard]] DwellSchedule schedule() const;
  [[nodiscard]] std::vector<ActivityProfile> profiles() const;
};

// `key=value` scenario file with `#` comments; unknown keys and malformed
// values are errors naming the key.
ScenarioConfig parse_scenario(const std::string& path);

struct InstanceRecord {
  std::string file;
  std::string activity;
  std::string subject;
  std::uint64_t seed = 0;
};

struct GeneratedInstance {
  std::vector<TagReading> readings;
  int activity_id = 0;
  std::string activity;
  std::string subject;
  std::uint64_t seed = 0;
};

// All instances of a scenario, in manifest order (activity-major, then
// subject, then repeat index); deterministic per seed.
std::vector<GeneratedInstance> generate_instances(const ScenarioConfig& config, std::uint64_t seed);

// Writes one trace file per instance plus `manifest.csv` and `layout.txt`
// into out_dir; returns the manifest rows.
std::vector<InstanceRecord> generate_dataset(const ScenarioConfig& config, std::uint64_t seed,
                                             const std::string& out_dir);

}  // namespace rfact
