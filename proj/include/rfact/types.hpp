#pragma once

#include "rfact/common.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace rfact {

// Reader agility floor: readings below this power are physically undetectable.
inline constexpr double kRssFloorDbm = -95.0;

// One timestamped (antenna, tag, RSS) observation; the atomic stream element.
struct TagReading {
  std::int64_t timestamp_ms = 0;
  int antenna_id = 0;
  int tag_id = 0;
  double rss_dbm = 0.0;
};

// Stream order: timestamp, ties by (antenna, tag).
inline bool reading_less(const TagReading& a, const TagReading& b) {
  if (a.timestamp_ms != b.timestamp_ms) return a.timestamp_ms < b.timestamp_ms;
  if (a.antenna_id != b.antenna_id) return a.antenna_id < b.antenna_id;
  return a.tag_id < b.tag_id;
}

// Placement of antennas and tags on the body. Tags are dense integer ids;
// each tag belongs to exactly one body part, every part carries the same
// number of tags.
struct BodyLayout {
  std::vector<std::string> antennas;
  std::vector<std::string> body_parts;
  int tags_per_part = 0;
  std::vector<int> tag_to_part;  // tag id -> part index

  [[nodiscard]] int num_antennas() const { return static_cast<int>(antennas.size()); }
  [[nodiscard]] int num_parts() const { return static_cast<int>(body_parts.size()); }
  [[nodiscard]] int num_tags() const { return static_cast<int>(tag_to_part.size()); }
  [[nodiscard]] int part_of(int tag_id) const { return tag_to_part.at(static_cast<std::size_t>(tag_id)); }

  // Throws std::runtime_error on a malformed layout.
  void validate() const;

  // 4 antennas (back, chest, left/right foot), 9 parts, 4 tags per part.
  static BodyLayout default_layout();

  // Arbitrary regular layout, tag t -> part t / tags_per_part.
  static BodyLayout regular(int num_antennas, int num_parts, int tags_per_part);
};

bool operator==(const BodyLayout& a, const BodyLayout& b);

// Line-based manifest: `antenna,<index>,<name>` / `tag,<index>,<part_name>`.
// Parts are inferred from distinct part names in tag lines, in order of first
// appearance.
BodyLayout load_layout_manifest(const std::string& path);
void save_layout_manifest(const BodyLayout& layout, const std::string& path);

struct ActivityLabel {
  int id = 0;
  std::string name;
};

// The eight studied activities, ids 0..7.
std::vector<ActivityLabel> default_activities();

// Bookkeeping for one completion append: which history window supplied
// readings and how many.
struct CompletionRecord {
  std::int64_t source_start_ms = 0;
  std::size_t count = 0;
};

// All readings in one tumbling window. Completion may prepend readings from
// earlier windows; those keep their original timestamps, so native readings
// are exactly the ones with timestamp >= window_start_ms.
struct DataSegment {
  std::int64_t window_start_ms = 0;
  std::int64_t window_len_ms = 0;
  std::vector<TagReading> readings;  // sorted by (timestamp, antenna, tag)
  std::vector<CompletionRecord> completed_from;

  [[nodiscard]] std::int64_t window_end_ms() const { return window_start_ms + window_len_ms; }
  [[nodiscard]] std::size_t size() const { return readings.size(); }
  [[nodiscard]] std::size_t native_count() const;
  [[nodiscard]] bool was_completed() const { return !completed_from.empty(); }
};

// counts(i, j) = number of readings of tag j by antenna i in a segment.
using CountMatrix = Eigen::MatrixXi;

struct PipelineConfig {
  double window_len_s = 5.0;       // L
  double history_span_s = 20.0;    // history buffer extent
  double overlap_threshold = 0.7;  // completion stop gate
  int resample_len = 32;           // K, grid for frequency features
  double rss_floor_dbm = kRssFloorDbm;
  bool normalize_per_subject = false;

  [[nodiscard]] std::int64_t window_len_ms() const {
    return static_cast<std::int64_t>(std::llround(window_len_s * 1000.0));
  }

  void validate() const;
};

// `key=value` file with `#` comments; keys are the PipelineConfig field
// names. Unknown keys and malformed values are errors.
PipelineConfig load_pipeline_config(const std::string& path);

// All (antenna_id, tag_id) pairs in lexicographic order; fixes the canonical
// series layout of the feature vector.
std::vector<std::pair<int, int>> series_key_order(const BodyLayout& layout);

// Stable hash of (layout, resample length, feature ordering version). Models
// refuse inputs whose fingerprint differs.
std::uint64_t layout_fingerprint(const BodyLayout& layout, int resample_len);

}  // namespace rfact
