#pragma once

#include "rfact/features.hpp"
#include "rfact/stream.hpp"
#include "rfact/svm.hpp"
#include "rfact/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rfact {

// One raw labeled instance trace, as listed in a dataset manifest.
struct LabeledTrace {
  std::string file;
  std::string activity;
  std::string subject;
  std::vector<TagReading> readings;
};

// Feature-space dataset: one row per window.
struct Dataset {
  Matrix features;
  std::vector<int> labels;  // indices into classes
  std::vector<std::string> subjects;
  std::vector<ActivityLabel> classes;
  std::uint64_t fingerprint = 0;

  [[nodiscard]] std::size_t size() const { return labels.size(); }
};

// Reads every trace named by a `file,activity,subject,seed` manifest; trace
// paths are resolved relative to the manifest's directory.
std::vector<LabeledTrace> load_traces(const std::string& manifest_path, const BodyLayout& layout);

enum class NormalizeMode { none, per_subject_zscore };

// Z-scores all RSS values within each subject, in place, before any
// segmentation. Throws when a subject's readings have zero variance.
void normalize_rss(std::vector<LabeledTrace>& traces, NormalizeMode mode);

// Runs segmentation (+ optional completion) and feature extraction over each
// trace independently; the history buffer resets between traces. Class ids
// are assigned by first appearance.
Dataset featurize(const std::vector<LabeledTrace>& traces, const PipelineConfig& config,
                  const BodyLayout& layout, bool completion_enabled);

// Row = true class, column = predicted class.
struct ConfusionCounts {
  Eigen::MatrixXi matrix;
  std::vector<ActivityLabel> classes;

  void add(int true_index, int predicted_index) { ++matrix(true_index, predicted_index); }
  [[nodiscard]] int total() const { return matrix.sum(); }
  [[nodiscard]] int tp(int c) const { return matrix(c, c); }
  [[nodiscard]] int fp(int c) const { return matrix.col(c).sum() - matrix(c, c); }
  [[nodiscard]] int fn(int c) const { return matrix.row(c).sum() - matrix(c, c); }
  [[nodiscard]] int tn(int c) const { return total() - tp(c) - fp(c) - fn(c); }

  static ConfusionCounts zero(const std::vector<ActivityLabel>& classes);
};

double overall_accuracy(const std::vector<int>& predictions, const std::vector<int>& truths);
double overall_accuracy(const ConfusionCounts& conf);

// (TP/(TP+FP), TP/(TP+FN)); zero-denominator terms are 0.
std::pair<double, double> precision_recall(const ConfusionCounts& conf, int class_index);

// (TP+TN) / total.
double per_activity_accuracy(const ConfusionCounts& conf, int class_index);

// Called once per evaluated fold, before scoring; lets tests inspect the
// split and the fold-local model.
struct FoldView {
  int fold = 0;
  const std::vector<std::size_t>* train_indices = nullptr;
  const std::vector<std::size_t>* test_indices = nullptr;
  const SvmModel* model = nullptr;
};
using FoldObserver = std::function<void(const FoldView&)>;

struct CvResult {
  std::vector<double> fold_accuracies;
  double mean_accuracy = 0.0;
  ConfusionCounts confusion;
};

// Stratified k-fold cross-validation; the scaler is fitted inside train() on
// each fold's training split only. Throws when any class has fewer than k
// instances, naming the class.
CvResult kfold_cv(const Dataset& data, int k, const TrainParams& params, std::uint64_t seed,
                  const FoldObserver& observer = {});

struct LosoResult {
  std::vector<std::string> subjects;
  std::vector<double> accuracies;
  double mean_accuracy = 0.0;
};

// One train/test split per held-out subject. Requires >= 2 subjects.
LosoResult leave_one_subject_out(const Dataset& data, const TrainParams& params);

struct SweepPoint {
  double window_len_s = 0.0;
  std::size_t windows = 0;
  double accuracy = 0.0;
};

// Re-segments, re-featurizes and re-evaluates (stratified k-fold) per window
// length; completion enabled throughout.
std::vector<SweepPoint> sweep_window(const std::vector<LabeledTrace>& traces,
                                     const PipelineConfig& base_config, const BodyLayout& layout,
                                     const std::vector<double>& window_lens_s, int k,
                                     const TrainParams& params, std::uint64_t seed);

struct AblationPoint {
  double window_len_s = 0.0;
  double with_completion = 0.0;
  double without_completion = 0.0;

  [[nodiscard]] double delta() const { return with_completion - without_completion; }
};

// Identical pipeline run twice per window length, toggling completion only.
std::vector<AblationPoint> ablate_completion(const std::vector<LabeledTrace>& traces,
                                             const PipelineConfig& base_config,
                                             const BodyLayout& layout,
                                             const std::vector<double>& window_lens_s, int k,
                                             const TrainParams& params, std::uint64_t seed);

struct LatencyReport {
  std::vector<double> window_ms;  // completion + extraction + prediction per window
  double max_ms = 0.0;
  double mean_ms = 0.0;
  double window_len_s = 0.0;
  bool pass = false;  // max_ms < window_len_s * 1000
};

// Replays traces through the online path (completion, extraction,
// prediction), timing each window. inject_delay_ms stalls inside the timed
// region; it exists to exercise the contract-failure path.
LatencyReport bench_latency(const std::vector<LabeledTrace>& traces, const SvmModel& model,
                            const PipelineConfig& config, const BodyLayout& layout,
                            double inject_delay_ms = 0.0);

// `label,subject,f0..f{d-1}` rows under a fingerprint comment header.
void write_feature_csv(const Dataset& data, const std::string& path);

// Convenience: grid-search over (C, gamma) by stratified k-fold accuracy;
// ties keep the earlier grid entry.
struct GridPoint {
  double c = 0.0;
  double gamma = 0.0;
  double accuracy = 0.0;
};
GridPoint grid_search(const Dataset& data, const std::vector<double>& c_values,
                      const std::vector<double>& gamma_values, int k, const TrainParams& base,
                      std::uint64_t seed);

}  // namespace rfact
