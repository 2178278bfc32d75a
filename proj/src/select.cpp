#include "rfact/select.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rfact {

namespace {

std::vector<bool> build_mask(const std::vector<int>& kept, int universe, const char* what) {
  if (kept.empty()) throw std::runtime_error(std::string("subset: empty ") + what + " set");
  std::vector<bool> mask(static_cast<std::size_t>(universe), false);
  for (int id : kept) {
    if (id < 0 || id >= universe)
      throw std::runtime_error(std::string("subset: invalid ") + what + " id " + std::to_string(id));
    mask[static_cast<std::size_t>(id)] = true;
  }
  return mask;
}

}  // namespace

std::vector<bool> SubsetSpec::antenna_mask(const BodyLayout& layout) const {
  return build_mask(antennas, layout.num_antennas(), "antenna");
}

std::vector<bool> SubsetSpec::tag_mask(const BodyLayout& layout) const {
  if (granularity == Granularity::tag) return build_mask(parts, layout.num_tags(), "tag");
  const std::vector<bool> part_mask = build_mask(parts, layout.num_parts(), "part");
  std::vector<bool> mask(static_cast<std::size_t>(layout.num_tags()), false);
  for (int t = 0; t < layout.num_tags(); ++t)
    mask[static_cast<std::size_t>(t)] = part_mask[static_cast<std::size_t>(layout.part_of(t))];
  return mask;
}

SubsetSpec SubsetSpec::full(const BodyLayout& layout) {
  SubsetSpec spec;
  for (int a = 0; a < layout.num_antennas(); ++a) spec.antennas.push_back(a);
  for (int p = 0; p < layout.num_parts(); ++p) spec.parts.push_back(p);
  return spec;
}

Dataset mask_dataset(const Dataset& data, const SubsetSpec& spec, const BodyLayout& layout,
                     const PipelineConfig& config) {
  const std::vector<bool> keep_antenna = spec.antenna_mask(layout);
  const std::vector<bool> keep_tag = spec.tag_mask(layout);
  const Vector sentinel = empty_series_features(config.rss_floor_dbm);

  std::vector<Eigen::Index> sentinel_offsets;
  for (int a = 0; a < layout.num_antennas(); ++a)
    for (int t = 0; t < layout.num_tags(); ++t)
      if (!keep_antenna[static_cast<std::size_t>(a)] || !keep_tag[static_cast<std::size_t>(t)])
        sentinel_offsets.push_back(temporal_offset(layout, a, t));

  std::vector<Eigen::Index> zero_offsets;
  for (int i = 0; i < layout.num_tags(); ++i)
    for (int j = i + 1; j < layout.num_tags(); ++j)
      if (!keep_tag[static_cast<std::size_t>(i)] || !keep_tag[static_cast<std::size_t>(j)])
        zero_offsets.push_back(tag_pair_offset(layout, i, j));
  for (int i = 0; i < layout.num_antennas(); ++i)
    for (int j = i + 1; j < layout.num_antennas(); ++j)
      if (!keep_antenna[static_cast<std::size_t>(i)] || !keep_antenna[static_cast<std::size_t>(j)])
        zero_offsets.push_back(antenna_pair_offset(layout, i, j));

  Dataset masked = data;
  for (Eigen::Index row = 0; row < masked.features.rows(); ++row) {
    for (Eigen::Index offset : sentinel_offsets)
      masked.features.row(row).segment(offset, sentinel.size()) = sentinel.transpose();
    for (Eigen::Index offset : zero_offsets) masked.features(row, offset) = 0.0;
  }
  return masked;
}

double subset_accuracy(const Dataset& data, const SubsetSpec& spec, const BodyLayout& layout,
                       const PipelineConfig& config, int k, const TrainParams& params,
                       std::uint64_t seed) {
  return kfold_cv(mask_dataset(data, spec, layout, config), k, params, seed).mean_accuracy;
}

namespace {

// First lexicographic m-combination of 0..n-1, then in-place successor.
std::vector<int> first_combination(int m) {
  std::vector<int> combo(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) combo[static_cast<std::size_t>(i)] = i;
  return combo;
}

bool next_combination(std::vector<int>& combo, int n) {
  const int m = static_cast<int>(combo.size());
  for (int i = m - 1; i >= 0; --i) {
    if (combo[static_cast<std::size_t>(i)] < n - m + i) {
      ++combo[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < m; ++j)
        combo[static_cast<std::size_t>(j)] = combo[static_cast<std::size_t>(j - 1)] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

SelectionResult select_min(const Dataset& data, double rho, const BodyLayout& layout,
                           const PipelineConfig& config, int k, const TrainParams& params,
                           std::uint64_t seed, Granularity granularity) {
  if (rho < 0.0 || rho > 1.0) throw std::runtime_error("select: rho must be in [0, 1]");
  const int num_antennas = layout.num_antennas();
  const int num_units = granularity == Granularity::part ? layout.num_parts() : layout.num_tags();

  SelectionResult result;
  result.rho = rho;
  {
    std::ostringstream protocol;
    protocol << "masked stratified " << k << "-fold, seed " << seed << ", "
             << (granularity == Granularity::part ? "part" : "tag") << " granularity";
    result.protocol = protocol.str();
  }
  result.best.accuracy = -1.0;

  for (int n_ant = 1; n_ant <= num_antennas; ++n_ant) {
    for (int n_parts = 1; n_parts <= num_units; ++n_parts) {
      std::vector<SubsetScore> qualifying;
      std::vector<int> antennas = first_combination(n_ant);
      do {
        std::vector<int> parts = first_combination(n_parts);
        do {
          SubsetSpec spec;
          spec.antennas = antennas;
          spec.parts = parts;
          spec.granularity = granularity;
          const double accuracy = subset_accuracy(data, spec, layout, config, k, params, seed);
          ++result.evaluations;
          if (accuracy > result.best.accuracy) result.best = {spec, accuracy};
          if (accuracy >= rho) qualifying.push_back({std::move(spec), accuracy});
        } while (next_combination(parts, num_units));
      } while (next_combination(antennas, num_antennas));

      if (!qualifying.empty()) {
        result.qualifying = std::move(qualifying);
        result.level_n_ant = n_ant;
        result.level_n_parts = n_parts;
        return result;
      }
    }
  }
  return result;
}

namespace {

std::string join_ids(const std::vector<int>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out.push_back(';');
    out += std::to_string(ids[i]);
  }
  return out;
}

}  // namespace

std::string selection_report(const SelectionResult& result) {
  std::ostringstream out;
  out << "n_ant,n_parts,antennas,parts,accuracy\n";
  char buf[32];
  for (const SubsetScore& score : result.qualifying) {
    std::snprintf(buf, sizeof(buf), "%.4f", score.accuracy);
    out << score.spec.antennas.size() << ',' << score.spec.parts.size() << ','
        << join_ids(score.spec.antennas) << ',' << join_ids(score.spec.parts) << ',' << buf << '\n';
  }
  if (result.qualifying.empty()) {
    std::snprintf(buf, sizeof(buf), "%.4f", result.best.accuracy);
    out << "# no subset reached rho; best accuracy " << buf << " with antennas "
        << join_ids(result.best.spec.antennas) << " parts " << join_ids(result.best.spec.parts)
        << '\n';
  }
  return out.str();
}

}  // namespace rfact
