#include "rfact/features.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace rfact {
namespace {

// Condensed index of pair (i, j), i < j, among C(n,2) pairs in lexicographic
// order.
Eigen::Index pair_index(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

Eigen::Index pair_count(Eigen::Index n) { return n * (n - 1) / 2; }

// Non-DC power bins |X_1|²..|X_{K-1}|² of the mean-removed input. Removing
// the mean only shifts the DC bin, and makes a constant vector transform to
// exact zeros instead of FFT round-off noise.
Vector nondc_power(const Vector& x) {
  const Eigen::Index k = x.size();
  if (x.maxCoeff() == x.minCoeff()) return Vector::Zero(k - 1);
  std::vector<double> centered(static_cast<std::size_t>(k));
  const double mean = x.mean();
  for (Eigen::Index i = 0; i < k; ++i) centered[static_cast<std::size_t>(i)] = x[i] - mean;

  thread_local Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, centered);

  Vector power(k - 1);
  for (Eigen::Index i = 1; i < k; ++i) power[i - 1] = std::norm(spectrum[static_cast<std::size_t>(i)]);
  return power;
}

}  // namespace

Eigen::Index feature_dimension(const BodyLayout& layout) {
  const Eigen::Index na = layout.num_antennas();
  const Eigen::Index nt = layout.num_tags();
  return 7 * na * nt + pair_count(nt) + pair_count(na);
}

Eigen::Index temporal_offset(const BodyLayout& layout, int antenna_id, int tag_id) {
  return 7 * (static_cast<Eigen::Index>(antenna_id) * layout.num_tags() + tag_id);
}

Eigen::Index tag_pair_offset(const BodyLayout& layout, int tag_i, int tag_j) {
  return 7 * static_cast<Eigen::Index>(layout.num_antennas()) * layout.num_tags() +
         pair_index(layout.num_tags(), tag_i, tag_j);
}

Eigen::Index antenna_pair_offset(const BodyLayout& layout, int ant_i, int ant_j) {
  return 7 * static_cast<Eigen::Index>(layout.num_antennas()) * layout.num_tags() +
         pair_count(layout.num_tags()) + pair_index(layout.num_antennas(), ant_i, ant_j);
}

Vector empty_series_features(double rss_floor_dbm) {
  Vector f(7);
  f << rss_floor_dbm, 0.0, rss_floor_dbm, rss_floor_dbm, 0.0, 0.0, 0.0;
  return f;
}

std::vector<ReadingSeries> split_series(const DataSegment& seg, const BodyLayout& layout) {
  const int nt = layout.num_tags();
  std::vector<ReadingSeries> series(static_cast<std::size_t>(layout.num_antennas()) * nt);
  for (int a = 0; a < layout.num_antennas(); ++a)
    for (int t = 0; t < nt; ++t) {
      ReadingSeries& s = series[static_cast<std::size_t>(a) * nt + t];
      s.antenna_id = a;
      s.tag_id = t;
    }
  for (const TagReading& r : seg.readings) {
    if (r.antenna_id < 0 || r.antenna_id >= layout.num_antennas() || r.tag_id < 0 || r.tag_id >= nt)
      throw std::runtime_error("segment reading (" + std::to_string(r.antenna_id) + ", " +
                               std::to_string(r.tag_id) + ") outside layout");
    ReadingSeries& s = series[static_cast<std::size_t>(r.antenna_id) * nt + r.tag_id];
    s.timestamps_ms.push_back(r.timestamp_ms);
    s.values_dbm.push_back(r.rss_dbm);
  }
  return series;
}

double mean_crossing_rate(const std::vector<double>& samples) {
  const std::size_t n = samples.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(n);
  std::size_t crossings = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = samples[i] - mean;
    const double b = samples[i + 1] - mean;
    if ((a > 0 && b < 0) || (a < 0 && b > 0)) ++crossings;
  }
  return static_cast<double>(crossings) / static_cast<double>(n - 1);
}

Vector resample(const ReadingSeries& series, std::int64_t window_start_ms,
                std::int64_t window_end_ms, int k, double rss_floor_dbm) {
  if (k < 2) throw std::runtime_error("resample length must be at least 2");
  if (series.empty()) return Vector::Constant(k, rss_floor_dbm);
  if (series.size() == 1) return Vector::Constant(k, series.values_dbm.front());

  const double a = static_cast<double>(std::min<std::int64_t>(series.timestamps_ms.front(), window_start_ms));
  const double b = static_cast<double>(std::max<std::int64_t>(series.timestamps_ms.back(), window_end_ms));
  const double step = (b - a) / static_cast<double>(k - 1);

  Vector out(k);
  std::size_t hi = 0;  // first sample with timestamp > t
  const std::size_t n = series.size();
  for (int i = 0; i < k; ++i) {
    const double t = a + step * static_cast<double>(i);
    while (hi < n && static_cast<double>(series.timestamps_ms[hi]) <= t) ++hi;
    if (hi == 0) {
      out[i] = series.values_dbm.front();
    } else if (hi == n) {
      out[i] = series.values_dbm.back();
    } else {
      const double t0 = static_cast<double>(series.timestamps_ms[hi - 1]);
      const double t1 = static_cast<double>(series.timestamps_ms[hi]);
      const double v0 = series.values_dbm[hi - 1];
      const double v1 = series.values_dbm[hi];
      out[i] = v0 + (v1 - v0) * (t - t0) / (t1 - t0);
    }
  }
  return out;
}

double spectral_energy(const Vector& resampled) {
  if (resampled.size() < 2) throw std::runtime_error("spectral energy needs at least 2 samples");
  return nondc_power(resampled).sum() / static_cast<double>(resampled.size());
}

double spectral_entropy(const Vector& resampled) {
  if (resampled.size() < 2) throw std::runtime_error("spectral entropy needs at least 2 samples");
  const Vector power = nondc_power(resampled);
  const double total = power.sum();
  if (total <= 0.0) return 0.0;
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < power.size(); ++i) {
    if (power[i] <= 0.0) continue;
    const double p = power[i] / total;
    entropy -= p * std::log(p);
  }
  return entropy;
}

Vector temporal_features(const ReadingSeries& series, std::int64_t window_start_ms,
                         std::int64_t window_end_ms, int k, double rss_floor_dbm) {
  if (series.empty()) return empty_series_features(rss_floor_dbm);

  const auto n = static_cast<double>(series.size());
  double mean = 0.0;
  double max = series.values_dbm.front();
  double min = max;
  for (double v : series.values_dbm) {
    mean += v;
    max = std::max(max, v);
    min = std::min(min, v);
  }
  mean /= n;
  double variance = 0.0;
  for (double v : series.values_dbm) variance += (v - mean) * (v - mean);
  variance /= n;

  const Vector resampled = resample(series, window_start_ms, window_end_ms, k, rss_floor_dbm);
  const Vector power = nondc_power(resampled);
  const double energy = power.sum() / static_cast<double>(k);
  double entropy = 0.0;
  const double total = power.sum();
  if (total > 0.0)
    for (Eigen::Index i = 0; i < power.size(); ++i) {
      if (power[i] <= 0.0) continue;
      const double p = power[i] / total;
      entropy -= p * std::log(p);
    }

  Vector f(7);
  f << mean, variance, max, min, mean_crossing_rate(series.values_dbm), energy, entropy;
  return f;
}

double pearson(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw std::runtime_error("pearson: length mismatch");
  const auto n = static_cast<double>(a.size());
  const Vector da = a.array() - a.mean();
  const Vector db = b.array() - b.mean();
  const double va = da.squaredNorm() / n;
  const double vb = db.squaredNorm() / n;
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return (da.dot(db) / n) / std::sqrt(va * vb);
}

const ReadingSeries& representative_series(const std::vector<ReadingSeries>& series,
                                           const BodyLayout& layout, int tag_id) {
  const int nt = layout.num_tags();
  int best = 0;
  for (int a = 1; a < layout.num_antennas(); ++a)
    if (series[static_cast<std::size_t>(a) * nt + tag_id].size() >
        series[static_cast<std::size_t>(best) * nt + tag_id].size())
      best = a;
  return series[static_cast<std::size_t>(best) * nt + tag_id];
}

const ReadingSeries& representative_series_for_antenna(const std::vector<ReadingSeries>& series,
                                                       const BodyLayout& layout, int antenna_id) {
  const std::size_t base = static_cast<std::size_t>(antenna_id) * layout.num_tags();
  int best = 0;
  for (int t = 1; t < layout.num_tags(); ++t)
    if (series[base + t].size() > series[base + best].size()) best = t;
  return series[base + best];
}

namespace {

Vector spatial_from_series(const std::vector<ReadingSeries>& series, const DataSegment& seg,
                           const BodyLayout& layout, int k, double rss_floor_dbm) {
  const int na = layout.num_antennas();
  const int nt = layout.num_tags();

  std::vector<Vector> tag_rep(static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t)
    tag_rep[static_cast<std::size_t>(t)] = resample(representative_series(series, layout, t),
                                                    seg.window_start_ms, seg.window_end_ms(), k,
                                                    rss_floor_dbm);
  std::vector<Vector> ant_rep(static_cast<std::size_t>(na));
  for (int a = 0; a < na; ++a)
    ant_rep[static_cast<std::size_t>(a)] = resample(representative_series_for_antenna(series, layout, a),
                                                    seg.window_start_ms, seg.window_end_ms(), k,
                                                    rss_floor_dbm);

  Vector out(pair_count(nt) + pair_count(na));
  Eigen::Index idx = 0;
  for (int i = 0; i < nt; ++i)
    for (int j = i + 1; j < nt; ++j)
      out[idx++] = pearson(tag_rep[static_cast<std::size_t>(i)], tag_rep[static_cast<std::size_t>(j)]);
  for (int i = 0; i < na; ++i)
    for (int j = i + 1; j < na; ++j)
      out[idx++] = pearson(ant_rep[static_cast<std::size_t>(i)], ant_rep[static_cast<std::size_t>(j)]);
  return out;
}

}  // namespace

Vector spatial_features(const DataSegment& seg, const BodyLayout& layout, int k, double rss_floor_dbm) {
  return spatial_from_series(split_series(seg, layout), seg, layout, k, rss_floor_dbm);
}

FeatureVector extract(const DataSegment& seg, const PipelineConfig& config, const BodyLayout& layout) {
  const std::vector<ReadingSeries> series = split_series(seg, layout);
  const int k = config.resample_len;

  FeatureVector fv;
  fv.layout_fingerprint = layout_fingerprint(layout, k);
  fv.values.resize(feature_dimension(layout));

  Eigen::Index offset = 0;
  for (const ReadingSeries& s : series) {
    fv.values.segment<7>(offset) =
        temporal_features(s, seg.window_start_ms, seg.window_end_ms(), k, config.rss_floor_dbm);
    offset += 7;
  }
  fv.values.tail(fv.values.size() - offset) =
      spatial_from_series(series, seg, layout, k, config.rss_floor_dbm);
  return fv;
}

}  // namespace rfact
