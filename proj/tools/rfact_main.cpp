#include "rfact/eval.hpp"
#include "rfact/select.hpp"
#include "rfact/sim.hpp"
#include "rfact/stream.hpp"
#include "rfact/svm.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace rfact;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitContract = 3;

// Pipeline flags shared by the data-processing subcommands; an optional
// config file supplies defaults, explicit flags win.
struct PipelineFlags {
  std::string config_file;
  double window = 5.0;
  double history = 20.0;
  double threshold = 0.7;
  int resample = 32;
  double rss_floor = kRssFloorDbm;
  bool normalize = false;

  CLI::Option* window_opt = nullptr;
  CLI::Option* history_opt = nullptr;
  CLI::Option* threshold_opt = nullptr;
  CLI::Option* resample_opt = nullptr;
  CLI::Option* rss_floor_opt = nullptr;
  CLI::Option* normalize_opt = nullptr;

  void add(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "pipeline config file (key=value)");
    window_opt = cmd->add_option("--window", window, "window length L in seconds");
    history_opt = cmd->add_option("--history", history, "history buffer span in seconds");
    threshold_opt = cmd->add_option("--threshold", threshold, "completion overlap threshold");
    resample_opt = cmd->add_option("--resample", resample, "resampling grid length K");
    rss_floor_opt = cmd->add_option("--rss-floor", rss_floor, "RSS detection floor in dBm");
    normalize_opt = cmd->add_flag("--normalize", normalize, "per-subject RSS z-score");
  }

  [[nodiscard]] PipelineConfig resolve() const {
    PipelineConfig config;
    if (!config_file.empty()) config = load_pipeline_config(config_file);
    if (window_opt->count()) config.window_len_s = window;
    if (history_opt->count()) config.history_span_s = history;
    if (threshold_opt->count()) config.overlap_threshold = threshold;
    if (resample_opt->count()) config.resample_len = resample;
    if (rss_floor_opt->count()) config.rss_floor_dbm = rss_floor;
    if (normalize_opt->count()) config.normalize_per_subject = normalize;
    if (config.history_span_s < config.window_len_s)
      config.history_span_s = std::max(config.history_span_s, config.window_len_s);
    config.validate();
    return config;
  }
};

struct SvmFlags {
  double c = 10.0;
  double gamma = 0.0;
  double tol = 1e-3;
  std::int64_t max_iterations = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--svm-c", c, "soft-margin parameter C");
    cmd->add_option("--gamma", gamma, "RBF gamma (0 = auto)");
    cmd->add_option("--tol", tol, "SMO stopping tolerance");
    cmd->add_option("--max-iter", max_iterations, "SMO iteration cap (0 = auto)");
  }

  [[nodiscard]] TrainParams resolve(std::uint64_t seed) const {
    TrainParams params;
    params.C = c;
    params.gamma = gamma;
    params.tol = tol;
    params.max_iterations = max_iterations;
    params.seed = seed;
    return params;
  }
};

BodyLayout load_data_layout(const std::string& data_dir) {
  return load_layout_manifest((std::filesystem::path(data_dir) / "layout.txt").string());
}

std::vector<LabeledTrace> load_data_traces(const std::string& data_dir, const BodyLayout& layout,
                                           bool normalize) {
  auto traces = load_traces((std::filesystem::path(data_dir) / "manifest.csv").string(), layout);
  if (normalize) normalize_rss(traces, NormalizeMode::per_subject_zscore);
  return traces;
}

std::vector<double> parse_window_list(const std::string& list) {
  std::vector<double> values;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::runtime_error("bad window list entry: '" + item + "'");
    }
  }
  if (values.empty()) throw std::runtime_error("empty window list");
  return values;
}

void write_or_print(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write output file: " + out_path);
  out << text;
}

int run_simulate(const std::string& scenario_path, const std::string& out_dir,
                 std::uint64_t seed) {
  ScenarioConfig config;
  if (!scenario_path.empty()) config = parse_scenario(scenario_path);
  const auto records = generate_dataset(config, seed, out_dir);
  std::cout << "wrote " << records.size() << " trace(s) + manifest.csv + layout.txt to " << out_dir
            << "\n";
  return kExitOk;
}

int run_train(const std::string& data_dir, const PipelineFlags& pipeline, const SvmFlags& svm,
              std::uint64_t seed, const std::string& model_out) {
  const PipelineConfig config = pipeline.resolve();
  const BodyLayout layout = load_data_layout(data_dir);
  const auto traces = load_data_traces(data_dir, layout, config.normalize_per_subject);
  const Dataset data = featurize(traces, config, layout, true);
  const SvmModel model =
      train(data.features, data.labels, data.classes, data.fingerprint, svm.resolve(seed));
  save_model(model, model_out);
  std::cout << "trained on " << data.size() << " windows, " << data.features.cols()
            << " features, " << model.classes.size() << " classes; model written to " << model_out
            << "\n";
  return kExitOk;
}

std::string format_confusion(const ConfusionCounts& conf) {
  std::ostringstream out;
  out << "# confusion matrix: row = true class, column = predicted class\n";
  out << "class";
  for (const ActivityLabel& c : conf.classes) out << ',' << c.name;
  out << ",precision,recall,per_activity_accuracy\n";
  char buf[32];
  for (Eigen::Index i = 0; i < conf.matrix.rows(); ++i) {
    out << conf.classes[static_cast<std::size_t>(i)].name;
    for (Eigen::Index j = 0; j < conf.matrix.cols(); ++j) out << ',' << conf.matrix(i, j);
    const auto [precision, recall] = precision_recall(conf, static_cast<int>(i));
    std::snprintf(buf, sizeof(buf), "%.4f", precision);
    out << ',' << buf;
    std::snprintf(buf, sizeof(buf), "%.4f", recall);
    out << ',' << buf;
    std::snprintf(buf, sizeof(buf), "%.4f", per_activity_accuracy(conf, static_cast<int>(i)));
    out << ',' << buf;
    out << '\n';
  }
  return out.str();
}

int run_eval(const std::string& data_dir, const std::string& model_path,
             const PipelineFlags& pipeline, const SvmFlags& svm, int kfold, bool loso,
             const std::string& sweep_list, bool ablate, std::uint64_t seed,
             const std::string& out_path, const std::string& features_out) {
  PipelineConfig config = pipeline.resolve();
  const BodyLayout layout = load_data_layout(data_dir);

  TrainParams params = svm.resolve(seed);
  if (!model_path.empty()) {
    const SvmModel model = load_model(model_path);
    if (model.layout_fingerprint != layout_fingerprint(layout, config.resample_len))
      throw std::runtime_error("model layout fingerprint does not match the dataset layout");
    params.C = model.c;
    params.gamma = model.gamma;
  }

  char buf[64];
  std::ostringstream report;
  if (loso) {
    auto traces = load_data_traces(data_dir, layout, false);
    const Dataset plain = featurize(traces, config, layout, true);
    const LosoResult base = leave_one_subject_out(plain, params);
    std::optional<LosoResult> normalized;
    if (config.normalize_per_subject) {
      normalize_rss(traces, NormalizeMode::per_subject_zscore);
      normalized = leave_one_subject_out(featurize(traces, config, layout, true), params);
    }
    report << (normalized ? "subject,accuracy,normalized_accuracy\n" : "subject,accuracy\n");
    for (std::size_t i = 0; i < base.subjects.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.4f", base.accuracies[i]);
      report << base.subjects[i] << ',' << buf;
      if (normalized) {
        std::snprintf(buf, sizeof(buf), "%.4f", normalized->accuracies[i]);
        report << ',' << buf;
      }
      report << '\n';
    }
    std::snprintf(buf, sizeof(buf), "%.4f", base.mean_accuracy);
    report << "mean," << buf;
    if (normalized) {
      std::snprintf(buf, sizeof(buf), "%.4f", normalized->mean_accuracy);
      report << ',' << buf;
    }
    report << '\n';
  } else if (!sweep_list.empty() && !ablate) {
    const auto traces = load_data_traces(data_dir, layout, config.normalize_per_subject);
    report << "window_s,windows,accuracy\n";
    for (const SweepPoint& p :
         sweep_window(traces, config, layout, parse_window_list(sweep_list), kfold, params, seed)) {
      std::snprintf(buf, sizeof(buf), "%g,%zu,%.4f", p.window_len_s, p.windows, p.accuracy);
      report << buf << '\n';
    }
  } else if (ablate) {
    const auto traces = load_data_traces(data_dir, layout, config.normalize_per_subject);
    const std::vector<double> lens =
        sweep_list.empty() ? std::vector<double>{config.window_len_s} : parse_window_list(sweep_list);
    report << "window_s,with_completion,without_completion,delta\n";
    for (const AblationPoint& p :
         ablate_completion(traces, config, layout, lens, kfold, params, seed)) {
      std::snprintf(buf, sizeof(buf), "%g,%.4f,%.4f,%.4f", p.window_len_s, p.with_completion,
                    p.without_completion, p.delta());
      report << buf << '\n';
    }
  } else {
    const auto traces = load_data_traces(data_dir, layout, config.normalize_per_subject);
    const Dataset data = featurize(traces, config, layout, true);
    if (!features_out.empty()) write_feature_csv(data, features_out);
    const CvResult cv = kfold_cv(data, kfold, params, seed);
    report << "fold,accuracy\n";
    for (std::size_t f = 0; f < cv.fold_accuracies.size(); ++f) {
      std::snprintf(buf, sizeof(buf), "%zu,%.4f", f, cv.fold_accuracies[f]);
      report << buf << '\n';
    }
    std::snprintf(buf, sizeof(buf), "%.4f", cv.mean_accuracy);
    report << "mean," << buf << '\n';
    report << format_confusion(cv.confusion);
  }
  write_or_print(report.str(), out_path);
  return kExitOk;
}

std::unique_ptr<LineSource> open_input(const std::string& input) {
  if (input == "stdin" || input == "-") return std::make_unique<IstreamLineSource>(std::cin);
  if (input.rfind("tcp:", 0) == 0) {
    int port = 0;
    try {
      std::size_t used = 0;
      port = std::stoi(input.substr(4), &used);
      if (used != input.size() - 4) throw std::invalid_argument(input);
    } catch (const std::exception&) {
      throw std::runtime_error("bad tcp input spec: '" + input + "'");
    }
    return std::make_unique<TcpLineSource>(port);
  }
  return std::make_unique<FileLineSource>(input);
}

int run_recognize(const std::string& model_path, const std::string& input,
                  const std::string& layout_path, const PipelineFlags& pipeline) {
  const PipelineConfig config = pipeline.resolve();
  const BodyLayout layout =
      layout_path.empty() ? BodyLayout::default_layout() : load_layout_manifest(layout_path);
  const SvmModel model = load_model(model_path);
  if (model.layout_fingerprint != layout_fingerprint(layout, config.resample_len))
    throw std::runtime_error("model layout fingerprint does not match the given layout");

  const auto source = open_input(input);
  WindowCutter cutter(config.window_len_s);
  HistoryBuffer buffer(config.window_len_s, config.history_span_s);

  const auto emit = [&](DataSegment& seg) {
    DataSegment completed = complete(seg, buffer, config.overlap_threshold, layout);
    buffer.push(std::move(seg));
    const Prediction prediction = predict(model, extract(completed, config, layout));
    std::cout << completed.window_end_ms() << ',' << prediction.label.name << ','
              << prediction.top_votes() << '\n';
    std::cout.flush();
  };

  std::size_t line_no = 0;
  while (auto line = source->next_line()) {
    ++line_no;
    if (line->empty() || (*line)[0] == '#') continue;
    const ParsedReading parsed = parse_reading(*line, layout, line_no);
    for (DataSegment& seg : cutter.feed(parsed.reading)) emit(seg);
  }
  if (auto last = cutter.finish()) emit(*last);
  return kExitOk;
}

int run_select(const std::string& data_dir, double rho, const std::string& granularity_name,
               const PipelineFlags& pipeline, const SvmFlags& svm, int kfold, std::uint64_t seed,
               const std::string& out_path) {
  const PipelineConfig config = pipeline.resolve();
  const BodyLayout layout = load_data_layout(data_dir);
  const auto traces = load_data_traces(data_dir, layout, config.normalize_per_subject);
  const Dataset data = featurize(traces, config, layout, true);

  const Granularity granularity =
      granularity_name == "tag" ? Granularity::tag : Granularity::part;
  const SelectionResult result =
      select_min(data, rho, layout, config, kfold, svm.resolve(seed), seed, granularity);

  std::ostringstream report;
  report << "# " << result.protocol << "; rho " << rho << "; " << result.evaluations
         << " subset evaluations\n";
  report << selection_report(result);
  write_or_print(report.str(), out_path);
  return kExitOk;
}

int run_bench(const std::string& model_path, const std::string& data_dir,
              const PipelineFlags& pipeline, double inject_delay_ms) {
  const PipelineConfig config = pipeline.resolve();
  const BodyLayout layout = load_data_layout(data_dir);
  const auto traces = load_data_traces(data_dir, layout, false);
  const SvmModel model = load_model(model_path);
  const LatencyReport report = bench_latency(traces, model, config, layout, inject_delay_ms);

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "windows %zu | max %.2f ms | mean %.2f ms | budget %.0f ms | %s\n",
                report.window_ms.size(), report.max_ms, report.mean_ms,
                report.window_len_s * 1000.0, report.pass ? "PASS" : "FAIL");
  std::cout << buf;
  return report.pass ? kExitOk : kExitContract;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wearable RFID activity recognition"};
  app.require_subcommand(1);

  // simulate
  auto* simulate_cmd = app.add_subcommand("simulate", "generate a labeled trace dataset");
  std::string scenario_path;
  std::string sim_out;
  std::uint64_t sim_seed = 42;
  simulate_cmd->add_option("--scenario", scenario_path, "scenario file (omit for default)");
  simulate_cmd->add_option("--out", sim_out, "output directory")->required();
  simulate_cmd->add_option("--seed", sim_seed, "master seed");

  // train
  auto* train_cmd = app.add_subcommand("train", "train a model on a dataset directory");
  std::string train_data;
  std::string model_out;
  std::uint64_t train_seed = 42;
  PipelineFlags train_pipeline;
  SvmFlags train_svm;
  train_cmd->add_option("--data", train_data, "dataset directory")->required();
  train_cmd->add_option("--out", model_out, "model output path")->required();
  train_cmd->add_option("--seed", train_seed, "seed");
  train_pipeline.add(train_cmd);
  train_svm.add(train_cmd);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate recognition protocols");
  std::string eval_data;
  std::string eval_model;
  int eval_kfold = 10;
  bool eval_loso = false;
  std::string eval_sweep;
  bool eval_ablate = false;
  std::uint64_t eval_seed = 42;
  std::string eval_out;
  std::string eval_features_out;
  PipelineFlags eval_pipeline;
  SvmFlags eval_svm;
  eval_cmd->add_option("--data", eval_data, "dataset directory")->required();
  eval_cmd->add_option("--model", eval_model, "take C/gamma from an existing model");
  eval_cmd->add_option("--kfold", eval_kfold, "number of folds");
  eval_cmd->add_flag("--loso", eval_loso, "leave-one-subject-out protocol");
  eval_cmd->add_option("--sweep-window", eval_sweep, "comma list of window lengths");
  eval_cmd->add_flag("--ablate-completion", eval_ablate, "toggle data completion");
  eval_cmd->add_option("--seed", eval_seed, "seed");
  eval_cmd->add_option("--out", eval_out, "write the report to a file");
  eval_cmd->add_option("--export-features", eval_features_out, "dump the feature matrix as CSV");
  eval_pipeline.add(eval_cmd);
  eval_svm.add(eval_cmd);

  // recognize
  auto* recognize_cmd = app.add_subcommand("recognize", "classify a live reading stream");
  std::string rec_model;
  std::string rec_input;
  std::string rec_layout;
  PipelineFlags rec_pipeline;
  recognize_cmd->add_option("--model", rec_model, "model path")->required();
  recognize_cmd->add_option("--input", rec_input, "FILE, stdin, or tcp:PORT")->required();
  recognize_cmd->add_option("--layout", rec_layout, "layout manifest (default: standard layout)");
  rec_pipeline.add(recognize_cmd);

  // select
  auto* select_cmd = app.add_subcommand("select", "minimum antenna/part subset search");
  std::string select_data;
  double select_rho = 0.85;
  std::string select_granularity = "part";
  int select_kfold = 5;
  std::uint64_t select_seed = 42;
  std::string select_out;
  PipelineFlags select_pipeline;
  SvmFlags select_svm;
  select_cmd->add_option("--data", select_data, "dataset directory")->required();
  select_cmd->add_option("--rho", select_rho, "target accuracy threshold");
  select_cmd->add_option("--granularity", select_granularity, "part or tag")
      ->check(CLI::IsMember({"part", "tag"}));
  select_cmd->add_option("--kfold", select_kfold, "folds per subset evaluation");
  select_cmd->add_option("--seed", select_seed, "seed");
  select_cmd->add_option("--out", select_out, "write the report to a file");
  select_pipeline.add(select_cmd);
  select_svm.add(select_cmd);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "real-time latency benchmark");
  std::string bench_model;
  std::string bench_data;
  double bench_delay = 0.0;
  PipelineFlags bench_pipeline;
  bench_cmd->add_option("--model", bench_model, "model path")->required();
  bench_cmd->add_option("--data", bench_data, "dataset directory")->required();
  bench_cmd->add_option("--inject-delay-ms", bench_delay, "per-window artificial stall")
      ->group("");
  bench_pipeline.add(bench_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate_cmd->parsed()) return run_simulate(scenario_path, sim_out, sim_seed);
    if (train_cmd->parsed())
      return run_train(train_data, train_pipeline, train_svm, train_seed, model_out);
    if (eval_cmd->parsed())
      return run_eval(eval_data, eval_model, eval_pipeline, eval_svm, eval_kfold, eval_loso,
                      eval_sweep, eval_ablate, eval_seed, eval_out, eval_features_out);
    if (recognize_cmd->parsed())
      return run_recognize(rec_model, rec_input, rec_layout, rec_pipeline);
    if (select_cmd->parsed())
      return run_select(select_data, select_rho, select_granularity, select_pipeline, select_svm,
                        select_kfold, select_seed, select_out);
    if (bench_cmd->parsed())
      return run_bench(bench_model, bench_data, bench_pipeline, bench_delay);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
