#include "rfact/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <thread>

namespace rfact {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::vector<LabeledTrace> load_traces(const std::string& manifest_path, const BodyLayout& layout) {
  namespace fs = std::filesystem;
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path);
  const fs::path dir = fs::path(manifest_path).parent_path();

  std::vector<LabeledTrace> traces;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("file,", 0) == 0) continue;  // header row
    }
    const auto fields = split_csv(line);
    if (fields.size() < 3)
      throw std::runtime_error("manifest line " + std::to_string(line_no) +
                               ": expected file,activity,subject[,seed]");
    LabeledTrace trace;
    trace.file = fields[0];
    trace.activity = fields[1];
    trace.subject = fields[2];
    const auto parsed = read_reading_log_file((dir / trace.file).string(), layout);
    trace.readings.reserve(parsed.size());
    for (const ParsedReading& p : parsed) trace.readings.push_back(p.reading);
    traces.push_back(std::move(trace));
  }
  if (traces.empty()) throw std::runtime_error("manifest lists no traces: " + manifest_path);
  return traces;
}

void normalize_rss(std::vector<LabeledTrace>& traces, NormalizeMode mode) {
  if (mode == NormalizeMode::none) return;

  struct Moments {
    double sum = 0.0, sum_sq = 0.0;
    std::size_t n = 0;
  };
  std::map<std::string, Moments> by_subject;
  for (const LabeledTrace& t : traces)
    for (const TagReading& r : t.readings) {
      Moments& m = by_subject[t.subject];
      m.sum += r.rss_dbm;
      m.sum_sq += r.rss_dbm * r.rss_dbm;
      ++m.n;
    }

  std::map<std::string, std::pair<double, double>> stats;
  for (const auto& [subject, m] : by_subject) {
    if (m.n == 0) throw std::runtime_error("normalize: subject '" + subject + "' has no readings");
    const double mean = m.sum / static_cast<double>(m.n);
    const double var = std::max(m.sum_sq / static_cast<double>(m.n) - mean * mean, 0.0);
    if (var <= 0.0)
      throw std::runtime_error("normalize: subject '" + subject + "' has zero RSS variance");
    stats[subject] = {mean, std::sqrt(var)};
  }

  for (LabeledTrace& t : traces) {
    const auto [mean, stddev] = stats.at(t.subject);
    for (TagReading& r : t.readings) r.rss_dbm = (r.rss_dbm - mean) / stddev;
  }
}

Dataset featurize(const std::vector<LabeledTrace>& traces, const PipelineConfig& config,
                  const BodyLayout& layout, bool completion_enabled) {
  config.validate();
  layout.validate();

  Dataset data;
  data.fingerprint = layout_fingerprint(layout, config.resample_len);
  std::map<std::string, int> class_ids;

  std::vector<Vector> rows;
  for (const LabeledTrace& trace : traces) {
    auto it = class_ids.find(trace.activity);
    if (it == class_ids.end()) {
      const int id = static_cast<int>(data.classes.size());
      data.classes.push_back({id, trace.activity});
      it = class_ids.emplace(trace.activity, id).first;
    }
    const int label = it->second;

    HistoryBuffer buffer(config.window_len_s, config.history_span_s);
    for (DataSegment& seg : segment_stream(trace.readings, config.window_len_s)) {
      DataSegment completed =
          completion_enabled ? complete(seg, buffer, config.overlap_threshold, layout) : seg;
      buffer.push(std::move(seg));
      rows.push_back(extract(completed, config, layout).values);
      data.labels.push_back(label);
      data.subjects.push_back(trace.subject);
    }
  }

  data.features.resize(static_cast<Eigen::Index>(rows.size()), feature_dimension(layout));
  for (std::size_t i = 0; i < rows.size(); ++i)
    data.features.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return data;
}

ConfusionCounts ConfusionCounts::zero(const std::vector<ActivityLabel>& classes) {
  ConfusionCounts conf;
  conf.classes = classes;
  conf.matrix = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(classes.size()),
                                      static_cast<Eigen::Index>(classes.size()));
  return conf;
}

double overall_accuracy(const std::vector<int>& predictions, const std::vector<int>& truths) {
  if (predictions.empty()) throw std::runtime_error("accuracy: empty input");
  if (predictions.size() != truths.size())
    throw std::runtime_error("accuracy: length mismatch");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (predictions[i] == truths[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

double overall_accuracy(const ConfusionCounts& conf) {
  const int total = conf.total();
  if (total == 0) throw std::runtime_error("accuracy: empty confusion matrix");
  return static_cast<double>(conf.matrix.diagonal().sum()) / static_cast<double>(total);
}

std::pair<double, double> precision_recall(const ConfusionCounts& conf, int class_index) {
  const double tp = conf.tp(class_index);
  const double fp = conf.fp(class_index);
  const double fn = conf.fn(class_index);
  const double precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
  const double recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
  return {precision, recall};
}

double per_activity_accuracy(const ConfusionCounts& conf, int class_index) {
  const double total = conf.total();
  if (total == 0.0) throw std::runtime_error("accuracy: empty confusion matrix");
  return (conf.tp(class_index) + conf.tn(class_index)) / total;
}

namespace {

// Stratified fold labels: per class, shuffle that class's rows and deal them
// round-robin over folds.
std::vector<int> stratified_folds(const Dataset& data, int k, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> members(data.classes.size());
  for (std::size_t i = 0; i < data.labels.size(); ++i)
    members[static_cast<std::size_t>(data.labels[i])].push_back(i);

  Rng rng(derive_seed(seed, 0x666f6c64, data.labels.size(), data.classes.size()));
  std::vector<int> fold(data.labels.size(), 0);
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& idx = members[c];
    if (idx.size() < static_cast<std::size_t>(k))
      throw std::runtime_error("stratification failure: class '" + data.classes[c].name + "' has " +
                               std::to_string(idx.size()) + " instance(s), needs at least " +
                               std::to_string(k));
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[rng.uniform_int(i)]);
    for (std::size_t j = 0; j < idx.size(); ++j) fold[idx[j]] = static_cast<int>(j % static_cast<std::size_t>(k));
  }
  return fold;
}

struct Split {
  Matrix features;
  std::vector<int> labels;
};

Split take_rows(const Dataset& data, const std::vector<std::size_t>& indices) {
  Split s;
  s.features.resize(static_cast<Eigen::Index>(indices.size()), data.features.cols());
  s.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    s.features.row(static_cast<Eigen::Index>(i)) =
        data.features.row(static_cast<Eigen::Index>(indices[i]));
    s.labels.push_back(data.labels[indices[i]]);
  }
  return s;
}

}  // namespace

CvResult kfold_cv(const Dataset& data, int k, const TrainParams& params, std::uint64_t seed,
                  const FoldObserver& observer) {
  if (k < 2) throw std::runtime_error("kfold: k must be >= 2");
  if (data.size() == 0) throw std::runtime_error("kfold: empty dataset");
  const std::vector<int> fold = stratified_folds(data, k, seed);

  CvResult result;
  result.confusion = ConfusionCounts::zero(data.classes);
  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    for (std::size_t i = 0; i < fold.size(); ++i)
      (fold[i] == f ? test_idx : train_idx).push_back(i);

    const Split train_split = take_rows(data, train_idx);
    const SvmModel model =
        train(train_split.features, train_split.labels, data.classes, data.fingerprint, params);
    if (observer) {
      FoldView view;
      view.fold = f;
      view.train_indices = &train_idx;
      view.test_indices = &test_idx;
      view.model = &model;
      observer(view);
    }

    const Split test_split = take_rows(data, test_idx);
    const auto predictions = predict_batch(model, test_split.features);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      const int truth = test_split.labels[i];
      const int predicted = predictions[i].label.id;
      result.confusion.add(truth, predicted);
      if (predicted == truth) ++correct;
    }
    result.fold_accuracies.push_back(test_idx.empty()
                                         ? 0.0
                                         : static_cast<double>(correct) /
                                               static_cast<double>(test_idx.size()));
  }
  result.mean_accuracy = 0.0;
  for (double a : result.fold_accuracies) result.mean_accuracy += a;
  result.mean_accuracy /= static_cast<double>(result.fold_accuracies.size());
  return result;
}

LosoResult leave_one_subject_out(const Dataset& data, const TrainParams& params) {
  std::vector<std::string> subjects;
  for (const std::string& s : data.subjects)
    if (std::find(subjects.begin(), subjects.end(), s) == subjects.end()) subjects.push_back(s);
  if (subjects.size() < 2)
    throw std::runtime_error("leave-one-subject-out needs at least 2 subjects");

  LosoResult result;
  result.subjects = subjects;
  for (const std::string& held_out : subjects) {
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    for (std::size_t i = 0; i < data.subjects.size(); ++i)
      (data.subjects[i] == held_out ? test_idx : train_idx).push_back(i);
    const Split train_split = take_rows(data, train_idx);
    const Split test_split = take_rows(data, test_idx);
    const SvmModel model =
        train(train_split.features, train_split.labels, data.classes, data.fingerprint, params);
    const auto predictions = predict_batch(model, test_split.features);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
      if (predictions[i].label.id == test_split.labels[i]) ++correct;
    result.accuracies.push_back(
        test_idx.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test_idx.size()));
  }
  result.mean_accuracy = 0.0;
  for (double a : result.accuracies) result.mean_accuracy += a;
  result.mean_accuracy /= static_cast<double>(result.accuracies.size());
  return result;
}

std::vector<SweepPoint> sweep_window(const std::vector<LabeledTrace>& traces,
                                     const PipelineConfig& base_config, const BodyLayout& layout,
                                     const std::vector<double>& window_lens_s, int k,
                                     const TrainParams& params, std::uint64_t seed) {
  std::vector<SweepPoint> points;
  for (double len : window_lens_s) {
    if (len <= 0.0) throw std::runtime_error("sweep: window length must be positive");
    PipelineConfig config = base_config;
    config.window_len_s = len;
    const Dataset data = featurize(traces, config, layout, true);
    const CvResult cv = kfold_cv(data, k, params, seed);
    points.push_back({len, data.size(), cv.mean_accuracy});
  }
  return points;
}

std::vector<AblationPoint> ablate_completion(const std::vector<LabeledTrace>& traces,
                                             const PipelineConfig& base_config,
                                             const BodyLayout& layout,
                                             const std::vector<double>& window_lens_s, int k,
                                             const TrainParams& params, std::uint64_t seed) {
  std::vector<AblationPoint> points;
  for (double len : window_lens_s) {
    if (len <= 0.0) throw std::runtime_error("ablation: window length must be positive");
    PipelineConfig config = base_config;
    config.window_len_s = len;
    AblationPoint point;
    point.window_len_s = len;
    point.with_completion =
        kfold_cv(featurize(traces, config, layout, true), k, params, seed).mean_accuracy;
    point.without_completion =
        kfold_cv(featurize(traces, config, layout, false), k, params, seed).mean_accuracy;
    points.push_back(point);
  }
  return points;
}

LatencyReport bench_latency(const std::vector<LabeledTrace>& traces, const SvmModel& model,
                            const PipelineConfig& config, const BodyLayout& layout,
                            double inject_delay_ms) {
  config.validate();
  LatencyReport report;
  report.window_len_s = config.window_len_s;

  using clock = std::chrono::steady_clock;
  for (const LabeledTrace& trace : traces) {
    HistoryBuffer buffer(config.window_len_s, config.history_span_s);
    for (DataSegment& seg : segment_stream(trace.readings, config.window_len_s)) {
      const auto t0 = clock::now();
      DataSegment completed = complete(seg, buffer, config.overlap_threshold, layout);
      const FeatureVector features = extract(completed, config, layout);
      (void)predict(model, features);
      if (inject_delay_ms > 0.0)
        std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(inject_delay_ms));
      const auto t1 = clock::now();
      buffer.push(std::move(seg));
      report.window_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
  }
  if (report.window_ms.empty()) throw std::runtime_error("bench: no windows to process");

  report.max_ms = *std::max_element(report.window_ms.begin(), report.window_ms.end());
  double sum = 0.0;
  for (double v : report.window_ms) sum += v;
  report.mean_ms = sum / static_cast<double>(report.window_ms.size());
  report.pass = report.max_ms < config.window_len_s * 1000.0;
  return report;
}

void write_feature_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write feature csv: " + path);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(data.fingerprint));
  out << "# layout_fingerprint=" << buf << '\n';
  out << "label,subject";
  for (Eigen::Index j = 0; j < data.features.cols(); ++j) out << ",f" << j;
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.classes[static_cast<std::size_t>(data.labels[i])].name << ',' << data.subjects[i];
    for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.features(static_cast<Eigen::Index>(i), j));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing feature csv: " + path);
}

GridPoint grid_search(const Dataset& data, const std::vector<double>& c_values,
                      const std::vector<double>& gamma_values, int k, const TrainParams& base,
                      std::uint64_t seed) {
  if (c_values.empty() || gamma_values.empty())
    throw std::runtime_error("grid search: empty grid");
  GridPoint best;
  best.accuracy = -1.0;
  for (double c : c_values)
    for (double gamma : gamma_values) {
      TrainParams params = base;
      params.C = c;
      params.gamma = gamma;
      const double acc = kfold_cv(data, k, params, seed).mean_accuracy;
      if (acc > best.accuracy) best = {c, gamma, acc};
    }
  return best;
}

}  // namespace rfact
