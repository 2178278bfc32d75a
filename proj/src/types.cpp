#include "rfact/types.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace rfact {

void BodyLayout::validate() const {
  if (antennas.empty()) throw std::runtime_error("layout: no antennas");
  if (body_parts.empty()) throw std::runtime_error("layout: no body parts");
  if (tags_per_part <= 0) throw std::runtime_error("layout: tags_per_part must be positive");
  if (num_tags() != num_parts() * tags_per_part)
    throw std::runtime_error("layout: num_tags != num_parts * tags_per_part");
  std::vector<int> seen(static_cast<std::size_t>(num_parts()), 0);
  for (int part : tag_to_part) {
    if (part < 0 || part >= num_parts()) throw std::runtime_error("layout: tag maps to unknown part");
    ++seen[static_cast<std::size_t>(part)];
  }
  for (int count : seen)
    if (count == 0) throw std::runtime_error("layout: part with no tags");
}

BodyLayout BodyLayout::default_layout() {
  BodyLayout layout;
  layout.antennas = {"back", "chest", "left_foot", "right_foot"};
  layout.body_parts = {"left_wrist", "right_wrist", "left_arm",  "right_arm",  "body",
                       "left_leg",   "right_leg",   "left_ankle", "right_ankle"};
  layout.tags_per_part = 4;
  layout.tag_to_part.resize(36);
  for (int t = 0; t < 36; ++t) layout.tag_to_part[static_cast<std::size_t>(t)] = t / 4;
  layout.validate();
  return layout;
}

BodyLayout BodyLayout::regular(int num_antennas, int num_parts, int tags_per_part) {
  BodyLayout layout;
  for (int a = 0; a < num_antennas; ++a) layout.antennas.push_back("antenna" + std::to_string(a));
  for (int p = 0; p < num_parts; ++p) layout.body_parts.push_back("part" + std::to_string(p));
  layout.tags_per_part = tags_per_part;
  layout.tag_to_part.resize(static_cast<std::size_t>(num_parts * tags_per_part));
  for (int t = 0; t < num_parts * tags_per_part; ++t)
    layout.tag_to_part[static_cast<std::size_t>(t)] = t / tags_per_part;
  layout.validate();
  return layout;
}

bool operator==(const BodyLayout& a, const BodyLayout& b) {
  return a.antennas == b.antennas && a.body_parts == b.body_parts &&
         a.tags_per_part == b.tags_per_part && a.tag_to_part == b.tag_to_part;
}

BodyLayout load_layout_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open layout manifest: " + path);

  BodyLayout layout;
  std::unordered_map<std::string, int> part_index;
  std::vector<std::pair<int, std::string>> antenna_rows;  // (index, name)
  std::vector<std::pair<int, int>> tag_rows;              // (index, part)

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string kind, index_str, name;
    if (!std::getline(ss, kind, ',') || !std::getline(ss, index_str, ',') || !std::getline(ss, name))
      throw std::runtime_error("layout manifest line " + std::to_string(line_no) + ": expected 3 fields");
    int index = 0;
    try {
      index = std::stoi(index_str);
    } catch (const std::exception&) {
      throw std::runtime_error("layout manifest line " + std::to_string(line_no) + ": bad index");
    }
    if (kind == "antenna") {
      antenna_rows.emplace_back(index, name);
    } else if (kind == "tag") {
      auto [it, inserted] = part_index.try_emplace(name, static_cast<int>(part_index.size()));
      if (inserted) layout.body_parts.push_back(name);
      tag_rows.emplace_back(index, it->second);
    } else {
      throw std::runtime_error("layout manifest line " + std::to_string(line_no) + ": unknown kind '" +
                               kind + "'");
    }
  }

  layout.antennas.resize(antenna_rows.size());
  for (const auto& [index, name] : antenna_rows) {
    if (index < 0 || index >= static_cast<int>(antenna_rows.size()))
      throw std::runtime_error("layout manifest: antenna index " + std::to_string(index) + " out of range");
    layout.antennas[static_cast<std::size_t>(index)] = name;
  }
  layout.tag_to_part.assign(tag_rows.size(), -1);
  for (const auto& [index, part] : tag_rows) {
    if (index < 0 || index >= static_cast<int>(tag_rows.size()))
      throw std::runtime_error("layout manifest: tag index " + std::to_string(index) + " out of range");
    layout.tag_to_part[static_cast<std::size_t>(index)] = part;
  }
  if (layout.body_parts.empty() || tag_rows.empty())
    throw std::runtime_error("layout manifest: no tag lines");
  layout.tags_per_part = layout.num_tags() / layout.num_parts();
  layout.validate();
  return layout;
}

void save_layout_manifest(const BodyLayout& layout, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write layout manifest: " + path);
  for (int a = 0; a < layout.num_antennas(); ++a)
    out << "antenna," << a << "," << layout.antennas[static_cast<std::size_t>(a)] << "\n";
  for (int t = 0; t < layout.num_tags(); ++t)
    out << "tag," << t << "," << layout.body_parts[static_cast<std::size_t>(layout.part_of(t))] << "\n";
}

std::vector<ActivityLabel> default_activities() {
  return {{0, "Sitting"},        {1, "Standing"},  {2, "Walking"},     {3, "Cleaning Window"},
          {4, "Cleaning Table"}, {5, "Vacuuming"}, {6, "Riding Bike"}, {7, "Going Up/Down Stairs"}};
}

std::size_t DataSegment::native_count() const {
  // Appended history readings are strictly older than the window start.
  auto it = std::lower_bound(readings.begin(), readings.end(), window_start_ms,
                             [](const TagReading& r, std::int64_t t) { return r.timestamp_ms < t; });
  return static_cast<std::size_t>(readings.end() - it);
}

void PipelineConfig::validate() const {
  if (window_len_s <= 0) throw std::runtime_error("config: window_len_s must be positive");
  if (history_span_s < window_len_s)
    throw std::runtime_error("config: history_span_s must be >= window_len_s");
  if (overlap_threshold < 0.0 || overlap_threshold > 1.0)
    throw std::runtime_error("config: overlap_threshold must lie in [0,1]");
  if (resample_len < 2) throw std::runtime_error("config: resample_len must be >= 2");
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pipeline config: " + path);

  const auto number = [](const std::string& key, const std::string& value) {
    try {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error("pipeline config " + key + ": not a number: '" + value + "'");
    }
  };

  PipelineConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("pipeline config line " + std::to_string(line_no) +
                               ": expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "window_len_s")
      config.window_len_s = number(key, value);
    else if (key == "history_span_s")
      config.history_span_s = number(key, value);
    else if (key == "overlap_threshold")
      config.overlap_threshold = number(key, value);
    else if (key == "resample_len")
      config.resample_len = static_cast<int>(number(key, value));
    else if (key == "rss_floor_dbm")
      config.rss_floor_dbm = number(key, value);
    else if (key == "normalize_per_subject") {
      if (value == "true" || value == "1")
        config.normalize_per_subject = true;
      else if (value == "false" || value == "0")
        config.normalize_per_subject = false;
      else
        throw std::runtime_error("pipeline config normalize_per_subject: expected true/false");
    } else
      throw std::runtime_error("pipeline config line " + std::to_string(line_no) +
                               ": unknown key '" + key + "'");
  }
  config.validate();
  return config;
}

std::vector<std::pair<int, int>> series_key_order(const BodyLayout& layout) {
  std::vector<std::pair<int, int>> keys;
  keys.reserve(static_cast<std::size_t>(layout.num_antennas()) * static_cast<std::size_t>(layout.num_tags()));
  for (int a = 0; a < layout.num_antennas(); ++a)
    for (int t = 0; t < layout.num_tags(); ++t) keys.emplace_back(a, t);
  return keys;
}

std::uint64_t layout_fingerprint(const BodyLayout& layout, int resample_len) {
  Fnv1a h;
  h.update("rfact-feature-layout-v1");
  for (const auto& name : layout.antennas) h.update(name);
  for (const auto& name : layout.body_parts) h.update(name);
  h.update_value(layout.tags_per_part);
  for (int part : layout.tag_to_part) h.update_value(part);
  h.update_value(resample_len);
  return h.digest();
}

}  // namespace rfact
