#pragma once

#include "rfact/types.hpp"

#include <cstdint>
#include <vector>

namespace rfact {

// All samples of one (antenna, tag) pair within a segment, time-ordered.
struct ReadingSeries {
  int antenna_id = 0;
  int tag_id = 0;
  std::vector<std::int64_t> timestamps_ms;
  std::vector<double> values_dbm;

  [[nodiscard]] std::size_t size() const { return values_dbm.size(); }
  [[nodiscard]] bool empty() const { return values_dbm.empty(); }
};

struct FeatureVector {
  Vector values;
  std::uint64_t layout_fingerprint = 0;
};

// Number of features produced for a layout: 7·N_a·N_t + C(N_t,2) + C(N_a,2).
Eigen::Index feature_dimension(const BodyLayout& layout);

// Index arithmetic for the canonical vector layout
// [temporal blocks in series_key_order | tag pairs | antenna pairs].
Eigen::Index temporal_offset(const BodyLayout& layout, int antenna_id, int tag_id);
Eigen::Index tag_pair_offset(const BodyLayout& layout, int tag_i, int tag_j);
Eigen::Index antenna_pair_offset(const BodyLayout& layout, int ant_i, int ant_j);

// The 7 temporal features of a series no reader ever detected.
Vector empty_series_features(double rss_floor_dbm);

// Partitions a segment into one series per (antenna, tag) pair, ordered by
// series_key_order. Throws on readings outside the layout.
std::vector<ReadingSeries> split_series(const DataSegment& seg, const BodyLayout& layout);

// Fraction of consecutive sample pairs whose deviations from the mean have
// strictly opposite signs; 0 for fewer than two samples.
double mean_crossing_rate(const std::vector<double>& samples);

// Linear resampling onto K uniform points spanning
// [min(first sample, window start), max(last sample, window end)], constant
// extension beyond the samples. Empty series resamples to the RSS floor.
Vector resample(const ReadingSeries& series, std::int64_t window_start_ms,
                std::int64_t window_end_ms, int k, double rss_floor_dbm = kRssFloorDbm);

// (1/K)·Σ_{k≥1} |X_k|² of the length-K DFT, DC bin excluded. Equals
// K × population variance by Parseval.
double spectral_energy(const Vector& resampled);

// Shannon entropy (natural log) of the normalized non-DC power spectrum;
// 0 when there is no non-DC power.
double spectral_entropy(const Vector& resampled);

// [mean, variance, max, min, mean crossing rate, spectral energy, spectral
// entropy]; statistics over raw samples, spectral terms over the K-resampled
// series. Empty series yield the floor sentinel.
Vector temporal_features(const ReadingSeries& series, std::int64_t window_start_ms,
                         std::int64_t window_end_ms, int k, double rss_floor_dbm = kRssFloorDbm);

// Pearson correlation; 0 when either argument has zero variance.
double pearson(const Vector& a, const Vector& b);

// For a tag: its series with the largest sample count across antennas.
// For an antenna: its series with the largest count across tags. Ties go to
// the lowest antenna (resp. tag) index.
const ReadingSeries& representative_series(const std::vector<ReadingSeries>& series,
                                           const BodyLayout& layout, int tag_id);
const ReadingSeries& representative_series_for_antenna(const std::vector<ReadingSeries>& series,
                                                       const BodyLayout& layout, int antenna_id);

// Correlations of resampled representative series: all tag pairs (i < j),
// then all antenna pairs.
Vector spatial_features(const DataSegment& seg, const BodyLayout& layout, int k,
                        double rss_floor_dbm = kRssFloorDbm);

// Full canonical feature vector of a (completed) segment.
FeatureVector extract(const DataSegment& seg, const PipelineConfig& config, const BodyLayout& layout);

}  // namespace rfact
