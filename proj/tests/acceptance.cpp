// Acceptance gate: ten end-to-end criteria with pinned tolerances, one
// PASS/FAIL line each. Exits 0 only when every criterion holds.

#include "rfact/eval.hpp"
#include "rfact/select.hpp"
#include "rfact/sim.hpp"
#include "rfact/stream.hpp"
#include "rfact/svm.hpp"

#include "ref_qp.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <tuple>
#include <vector>

using namespace rfact;

namespace {

struct Gate {
  int passed = 0;
  int failed = 0;

  void run(int n, const std::string& what,
           const std::function<std::pair<bool, std::string>()>& body) {
    bool ok = false;
    std::string detail;
    try {
      std::tie(ok, detail) = body();
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", n, what.c_str(),
                detail.c_str());
    std::fflush(stdout);
    (ok ? passed : failed) += 1;
  }
};

struct ScratchDir {
  std::filesystem::path path;
  explicit ScratchDir() {
    std::string templ =
        (std::filesystem::temp_directory_path() / "rfact_acceptance_XXXXXX").string();
    if (!mkdtemp(templ.data())) throw std::runtime_error("mkdtemp failed");
    path = templ;
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  [[nodiscard]] std::string file(const std::string& name) const { return (path / name).string(); }
};

TagReading tr(std::int64_t ts, int antenna, int tag, double rss) {
  TagReading r;
  r.timestamp_ms = ts;
  r.antenna_id = antenna;
  r.tag_id = tag;
  r.rss_dbm = rss;
  return r;
}

DataSegment segment_of(std::int64_t start_ms, std::int64_t len_ms,
                       std::vector<TagReading> readings) {
  DataSegment seg;
  seg.window_start_ms = start_ms;
  seg.window_len_ms = len_ms;
  std::sort(readings.begin(), readings.end(), reading_less);
  seg.readings = std::move(readings);
  return seg;
}

std::multiset<std::tuple<std::int64_t, int, int, double>> reading_set(const DataSegment& seg) {
  std::multiset<std::tuple<std::int64_t, int, int, double>> set;
  for (const TagReading& r : seg.readings)
    set.emplace(r.timestamp_ms, r.antenna_id, r.tag_id, r.rss_dbm);
  return set;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

char fmt_buf[256];
const char* fmt(const char* format, ...) {
  va_list args;
  va_start(args, format);
  std::vsnprintf(fmt_buf, sizeof(fmt_buf), format, args);
  va_end(args);
  return fmt_buf;
}

// ---- criterion 1: feature geometry -----------------------------------------

std::pair<bool, std::string> check_feature_dimension() {
  const Eigen::Index default_dim = feature_dimension(BodyLayout::default_layout());
  if (default_dim != 1644) return {false, fmt("default layout dimension %ld", long(default_dim))};

  Rng rng(101);
  for (int round = 0; round < 40; ++round) {
    const int na = 1 + rng.uniform_int(5);
    const int np = 1 + rng.uniform_int(6);
    const int tpp = 1 + rng.uniform_int(4);
    const BodyLayout layout = BodyLayout::regular(na, np, tpp);
    const Eigen::Index nt = layout.num_tags();
    const Eigen::Index expect = 7 * na * nt + nt * (nt - 1) / 2 +
                                Eigen::Index(na) * (na - 1) / 2;
    if (feature_dimension(layout) != expect)
      return {false, fmt("layout %dx%dx%d dimension mismatch", na, np, tpp)};

    PipelineConfig config;
    const FeatureVector fv = extract(segment_of(0, 5000, {}), config, layout);
    if (fv.values.size() != expect || !fv.values.allFinite())
      return {false, fmt("empty-window vector malformed for %dx%dx%d", na, np, tpp)};
  }
  return {true, "1644 on the default layout; composition law on 40 random layouts, exact"};
}

// ---- criterion 2: data completion -------------------------------------------

std::pair<bool, std::string> check_completion() {
  const BodyLayout layout = BodyLayout::regular(4, 2, 4);

  const DataSegment cur = segment_of(
      5000, 5000, {tr(5000, 0, 5, -50), tr(5100, 0, 5, -51), tr(5200, 0, 7, -52)});
  const DataSegment hist = segment_of(
      0, 5000, {tr(0, 0, 5, -49), tr(100, 0, 7, -50), tr(200, 0, 7, -51), tr(300, 0, 7, -52)});
  if (overlap(cur, hist, layout) != 2.0 / 3.0)
    return {false, fmt("frozen overlap %.12f != 2/3", overlap(cur, hist, layout))};

  // A silent-antenna window is refilled from recent history.
  HistoryBuffer buffer(5.0, 20.0);
  buffer.push(segment_of(0, 5000, {tr(0, 0, 1, -50), tr(10, 0, 2, -51), tr(20, 1, 3, -52),
                                   tr(30, 1, 4, -53)}));
  DataSegment current = segment_of(
      5000, 5000, {tr(5000, 2, 5, -60), tr(5010, 3, 6, -61), tr(5020, 3, 7, -62)});
  const DataSegment completed = complete(current, buffer, 0.7, layout);
  const CountMatrix counts = count_matrix(completed, layout);
  for (int a = 0; a < 4; ++a)
    if (counts.row(a).sum() == 0) return {false, fmt("antenna %d still silent", a)};
  if (completed.native_count() != 3 || completed.size() != 7 || completed.completed_from.size() != 1)
    return {false, "restored window has wrong bookkeeping"};

  // Fuzz: completion never removes data, and is idempotent per buffer state.
  Rng rng(202);
  for (int round = 0; round < 1000; ++round) {
    HistoryBuffer buf(5.0, 20.0);
    const int depth = rng.uniform_int(4);
    for (int h = 0; h < depth; ++h) {
      std::vector<TagReading> rs;
      const int n = rng.uniform_int(12);
      for (int i = 0; i < n; ++i)
        rs.push_back(tr(std::int64_t(h) * 5000 + rng.uniform_int(5000), rng.uniform_int(4),
                        rng.uniform_int(8), -80.0 + rng.uniform_int(40)));
      buf.push(segment_of(std::int64_t(h) * 5000, 5000, std::move(rs)));
    }
    std::vector<TagReading> rs;
    const int n = rng.uniform_int(10);
    const std::int64_t start = std::int64_t(depth) * 5000;
    for (int i = 0; i < n; ++i)
      rs.push_back(tr(start + rng.uniform_int(5000), rng.uniform_int(4), rng.uniform_int(8),
                      -80.0 + rng.uniform_int(40)));
    const DataSegment seg = segment_of(start, 5000, std::move(rs));
    const double threshold = rng.uniform();

    const DataSegment once = complete(seg, buf, threshold, layout);
    const DataSegment twice = complete(once, buf, threshold, layout);
    if (once.size() < seg.size()) return {false, "completion dropped readings"};
    const auto native = reading_set(seg);
    auto after = reading_set(once);
    for (const auto& r : native)
      if (after.count(r) == 0) return {false, "a native reading vanished"};
    bool same_records = twice.completed_from.size() == once.completed_from.size();
    for (std::size_t i = 0; same_records && i < once.completed_from.size(); ++i)
      same_records = twice.completed_from[i].source_start_ms ==
                         once.completed_from[i].source_start_ms &&
                     twice.completed_from[i].count == once.completed_from[i].count;
    if (reading_set(twice) != after || !same_records)
      return {false, "completion is not idempotent"};
    if (!std::is_sorted(once.readings.begin(), once.readings.end(), reading_less))
      return {false, "completed window lost its ordering"};
  }
  return {true, "frozen overlap 2/3 exact; silent antennas refilled; 1000-round fuzz clean"};
}

// ---- criterion 3: numeric identities ----------------------------------------

std::pair<bool, std::string> check_numerics() {
  Rng rng(303);

  // Spectral energy equals the resampled signal's centered power (discrete
  // Parseval identity), to 1e-9 relative.
  for (int round = 0; round < 1000; ++round) {
    ReadingSeries series;
    series.antenna_id = 0;
    series.tag_id = 0;
    const int n = 1 + rng.uniform_int(40);
    std::int64_t ts = rng.uniform_int(500);
    for (int i = 0; i < n; ++i) {
      series.timestamps_ms.push_back(ts);
      series.values_dbm.push_back(-80.0 + 60.0 * rng.uniform());
      ts += 1 + rng.uniform_int(200);
    }
    const int k = 8 << rng.uniform_int(4);
    const Vector grid = resample(series, 0, 5000, k);
    const Vector centered = (grid.array() - grid.mean()).matrix();
    const double energy = temporal_features(series, 0, 5000, k)[5];
    if (std::abs(energy - centered.squaredNorm()) > 1e-9 * std::max(1.0, energy))
      return {false, fmt("Parseval drift %.3e", std::abs(energy - centered.squaredNorm()))};
  }

  // Correlation of an affine image is exactly +/-1 to 1e-12.
  for (int round = 0; round < 200; ++round) {
    const int n = 2 + rng.uniform_int(63);
    Vector a(n);
    for (int i = 0; i < n; ++i) a[i] = rng.normal();
    a[0] += 1.0;  // guarantees spread
    const double slope = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.1 + 4.0 * rng.uniform());
    const Vector b = (slope * a.array() + rng.normal()).matrix();
    const double r = pearson(a, b);
    if (std::abs(r - (slope > 0 ? 1.0 : -1.0)) > 1e-12)
      return {false, fmt("affine correlation off by %.3e", std::abs(std::abs(r) - 1.0))};
  }

  // RBF Gram matrices stay positive semidefinite with a unit diagonal.
  for (int round = 0; round < 50; ++round) {
    Matrix rows(20, 8);
    for (Eigen::Index i = 0; i < rows.size(); ++i) rows.data()[i] = 3.0 * rng.normal();
    const double gamma = 0.05 * std::pow(100.0, rng.uniform());
    const Matrix gram = rbf_gram(rows, rows, gamma);
    if ((gram.diagonal().array() != 1.0).any()) return {false, "Gram diagonal is not exactly 1"};
    if (!gram.isApprox(gram.transpose(), 0.0)) return {false, "Gram matrix not symmetric"};
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    if (eig.eigenvalues().minCoeff() < -1e-10)
      return {false, fmt("Gram min eigenvalue %.3e", eig.eigenvalues().minCoeff())};
  }
  return {true, "Parseval 1e-9 x1000; affine correlation 1e-12 x200; PSD Gram x50"};
}

// ---- criterion 4: dual solver against an exact reference ---------------------

std::pair<bool, std::string> check_smo() {
  Rng rng(404);
  double worst_gap = 0.0;
  for (int round = 0; round < 25; ++round) {
    const int n = 4 + rng.uniform_int(7);
    Matrix x(n, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 2.0 * rng.normal();
    Vector y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    y[0] = 1.0;
    y[1] = -1.0;
    const double c = round % 2 == 0 ? 1.0 : 10.0;
    const Matrix kernel = rbf_gram(x, x, 0.7);

    const auto ref = testutil::reference_dual(kernel, y, c);
    if (!ref) return {false, fmt("round %d: active-set reference found no KKT point", round)};
    const SmoResult smo = smo_solve(kernel, y, c, 1e-10);

    const double gap =
        std::abs(smo.objective - ref->objective) / std::max(1.0, std::abs(ref->objective));
    worst_gap = std::max(worst_gap, gap);
    if (gap > 1e-6) return {false, fmt("round %d: objective gap %.3e", round, gap)};
    if (smo.kkt_violation > 1e-3)
      return {false, fmt("round %d: KKT violation %.3e", round, smo.kkt_violation)};
    if (std::abs(smo.alpha.dot(y)) > 1e-9)
      return {false, fmt("round %d: equality constraint broken", round)};
    if (smo.alpha.minCoeff() < -1e-12 || smo.alpha.maxCoeff() > c + 1e-12)
      return {false, fmt("round %d: box constraint broken", round)};
  }

  // The classic non-separable 2x2 pattern trains to zero error.
  Matrix xor_x(4, 2);
  xor_x << 0, 0, 1, 1, 0, 1, 1, 0;
  const std::vector<int> xor_y = {0, 0, 1, 1};
  TrainParams params;
  params.gamma = 1.0;
  params.tol = 1e-6;
  const SvmModel model = train(xor_x, xor_y, {{0, "even"}, {1, "odd"}}, 1, params);
  const auto predictions = predict_batch(model, xor_x);
  for (int i = 0; i < 4; ++i)
    if (predictions[static_cast<std::size_t>(i)].label.id != xor_y[static_cast<std::size_t>(i)])
      return {false, "xor pattern misclassified"};
  return {true, fmt("25 random duals within 1e-6 of the exact active-set solution "
                    "(worst gap %.2e); xor exact",
                    worst_gap)};
}

// ---- criteria 5, 6, 9, 10, 7: the reference dataset --------------------------

struct ReferenceData {
  ScenarioConfig scenario;
  BodyLayout layout = BodyLayout::default_layout();
  std::vector<LabeledTrace> traces;
  PipelineConfig config_l5;
  TrainParams params;
  std::vector<AblationPoint> ablation;
  Dataset data_l5;
  SvmModel model;
  std::string model_path;
};

ReferenceData build_reference(const ScratchDir& dir) {
  ReferenceData ref;
  std::fprintf(stderr, "[acceptance] generating the reference dataset (seed 42)...\n");
  generate_dataset(ref.scenario, 42, dir.file("data"));
  ref.traces = load_traces(dir.file("data") + "/manifest.csv", ref.layout);

  std::fprintf(stderr, "[acceptance] ablation sweep at 5 s and 20 s windows (10-fold)...\n");
  ref.ablation =
      ablate_completion(ref.traces, ref.config_l5, ref.layout, {5.0, 20.0}, 10, ref.params, 42);

  std::fprintf(stderr, "[acceptance] training the reference model...\n");
  ref.data_l5 = featurize(ref.traces, ref.config_l5, ref.layout, true);
  ref.model = train(ref.data_l5.features, ref.data_l5.labels, ref.data_l5.classes,
                    ref.data_l5.fingerprint, ref.params);
  ref.model_path = dir.file("model.bin");
  save_model(ref.model, ref.model_path);
  return ref;
}

std::pair<bool, std::string> check_recognition(const ReferenceData& ref) {
  const double accuracy = ref.ablation[0].with_completion;
  return {accuracy >= 0.90,
          fmt("10-fold accuracy %.4f on 8 activities x 4 subjects, 5 s windows (floor 0.90)",
              accuracy)};
}

std::pair<bool, std::string> check_ablation(const ReferenceData& ref) {
  const AblationPoint& l5 = ref.ablation[0];
  const AblationPoint& l20 = ref.ablation[1];
  const bool ok = l5.delta() >= 0.10 && l20.delta() < l5.delta();
  return {ok, fmt("5 s windows: %.4f with vs %.4f without completion (delta %.4f >= 0.10); "
                  "20 s delta %.4f shrinks",
                  l5.with_completion, l5.without_completion, l5.delta(), l20.delta())};
}

std::pair<bool, std::string> check_loso(const ReferenceData& ref) {
  const LosoResult raw = leave_one_subject_out(ref.data_l5, ref.params);
  auto normalized_traces = ref.traces;
  normalize_rss(normalized_traces, NormalizeMode::per_subject_zscore);
  const LosoResult norm = leave_one_subject_out(
      featurize(normalized_traces, ref.config_l5, ref.layout, true), ref.params);
  const bool ok = norm.mean_accuracy >= raw.mean_accuracy;
  return {ok, fmt("leave-one-subject-out mean %.4f normalized vs %.4f raw", norm.mean_accuracy,
                  raw.mean_accuracy)};
}

std::pair<bool, std::string> check_persistence(const ReferenceData& ref, const ScratchDir& dir) {
  const SvmModel loaded = load_model(ref.model_path);
  Rng rng(505);
  for (int round = 0; round < 100; ++round) {
    FeatureVector fv;
    fv.layout_fingerprint = ref.model.layout_fingerprint;
    fv.values.resize(ref.data_l5.features.cols());
    const Eigen::Index row = rng.uniform_int(static_cast<int>(ref.data_l5.features.rows()));
    for (Eigen::Index j = 0; j < fv.values.size(); ++j)
      fv.values[j] = ref.data_l5.features(row, j) + 0.05 * rng.normal();
    const Prediction a = predict(ref.model, fv);
    const Prediction b = predict(loaded, fv);
    if (a.label.id != b.label.id || a.votes != b.votes)
      return {false, fmt("round %d: reloaded model predicts differently", round)};
  }
  save_model(loaded, dir.file("model2.bin"));
  if (slurp(ref.model_path) != slurp(dir.file("model2.bin")))
    return {false, "save-load-save is not byte stable"};
  return {true, "identical predictions on 100 perturbed windows; re-save byte-identical"};
}

std::pair<bool, std::string> check_latency(const ReferenceData& ref, const ScratchDir& dir) {
  PipelineConfig config = ref.config_l5;
  config.window_len_s = 1.0;
  const std::vector<LabeledTrace> subset(ref.traces.begin(), ref.traces.begin() + 10);
  const LatencyReport report = bench_latency(subset, ref.model, config, ref.layout);
  if (report.window_ms.size() < 100)
    return {false, fmt("only %zu windows benched", report.window_ms.size())};
  if (!report.pass || report.max_ms >= 1000.0)
    return {false, fmt("max window time %.2f ms over the 1000 ms budget", report.max_ms)};

  // The budget violation path: an injected stall must trip exit code 3.
  const std::string mini = dir.file("mini");
  std::filesystem::create_directories(mini);
  save_layout_manifest(ref.layout, mini + "/layout.txt");
  std::ofstream(mini + "/manifest.csv") << "file,activity,subject,seed\nt.csv,x,s0,1\n";
  {
    std::ofstream trace(mini + "/t.csv");
    for (int i = 0; i < 10; ++i) trace << i * 100 << ",0," << i << ",-50.0\n";
  }
  const std::string cmd = std::string(RFACT_CLI_PATH) + " bench --model " + ref.model_path +
                          " --data " + mini +
                          " --window 1 --inject-delay-ms 1200 > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (code != 3) return {false, fmt("stalled bench exited %d, want 3", code)};
  return {true, fmt("%zu one-second windows, max %.2f ms, mean %.2f ms; stall trips exit 3",
                    report.window_ms.size(), report.max_ms, report.mean_ms)};
}

// ---- criterion 8: subset search against exhaustive enumeration ---------------

std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> all;
  std::vector<int> pick(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) pick[static_cast<std::size_t>(i)] = i;
  while (true) {
    all.push_back(pick);
    int i = k - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j)
      pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  return all;
}

std::pair<bool, std::string> check_selection(const ScratchDir& dir) {
  ScenarioConfig scenario;
  scenario.layout = BodyLayout::regular(2, 4, 2);
  scenario.profile_set = "planted";
  scenario.duration_s = 24.0;
  scenario.instances_per_class = 10;
  scenario.subjects = 2;
  scenario.noise_sigma_db = 1.0;
  std::fprintf(stderr, "[acceptance] generating the selection dataset...\n");
  generate_dataset(scenario, 42, dir.file("planted"));
  const BodyLayout layout = scenario.layout;
  const auto traces = load_traces(dir.file("planted") + "/manifest.csv", layout);
  PipelineConfig config;
  TrainParams params;
  const Dataset data = featurize(traces, config, layout, true);

  // Exhaustive reference: every antenna/part combination, in search order.
  std::fprintf(stderr, "[acceptance] scoring all 45 antenna/part subsets...\n");
  struct Scored {
    int n_ant, n_parts;
    SubsetSpec spec;
    double accuracy;
  };
  std::vector<Scored> all;
  for (int n_ant = 1; n_ant <= 2; ++n_ant)
    for (int n_parts = 1; n_parts <= 4; ++n_parts)
      for (const auto& ants : combinations(2, n_ant))
        for (const auto& parts : combinations(4, n_parts)) {
          SubsetSpec spec;
          spec.antennas = ants;
          spec.parts = parts;
          all.push_back(
              {n_ant, n_parts, spec, subset_accuracy(data, spec, layout, config, 4, params, 42)});
        }
  if (all.size() != 45) return {false, fmt("enumerated %zu subsets, want 45", all.size())};

  const auto oracle = [&](double rho) {
    struct Expect {
      int n_ant = 0, n_parts = 0;
      std::vector<Scored> qualifying;
      std::size_t evaluations = 0;
      double best = -1.0;
    } expect;
    bool found = false;
    for (int n_ant = 1; n_ant <= 2 && !found; ++n_ant)
      for (int n_parts = 1; n_parts <= 4 && !found; ++n_parts) {
        for (const Scored& s : all) {
          if (s.n_ant != n_ant || s.n_parts != n_parts) continue;
          ++expect.evaluations;
          expect.best = std::max(expect.best, s.accuracy);
          if (s.accuracy >= rho) found = true;
        }
        if (found) {
          expect.n_ant = n_ant;
          expect.n_parts = n_parts;
        }
      }
    if (expect.n_ant > 0)
      for (const Scored& s : all)
        if (s.n_ant == expect.n_ant && s.n_parts == expect.n_parts && s.accuracy >= rho)
          expect.qualifying.push_back(s);
    return expect;
  };

  const SelectionResult low = select_min(data, 0.45, layout, config, 4, params, 42);
  const SelectionResult high = select_min(data, 0.98, layout, config, 4, params, 42);
  for (const auto& [rho, got] : {std::pair<double, const SelectionResult&>{0.45, low},
                                 std::pair<double, const SelectionResult&>{0.98, high}}) {
    const auto want = oracle(rho);
    if (got.level_n_ant != want.n_ant || got.level_n_parts != want.n_parts)
      return {false, fmt("rho %.2f: level (%d,%d), oracle (%d,%d)", rho, got.level_n_ant,
                         got.level_n_parts, want.n_ant, want.n_parts)};
    if (got.evaluations != want.evaluations)
      return {false, fmt("rho %.2f: %zu evaluations, oracle %zu", rho, got.evaluations,
                         want.evaluations)};
    if (got.qualifying.size() != want.qualifying.size())
      return {false, fmt("rho %.2f: %zu qualifying subsets, oracle %zu", rho,
                         got.qualifying.size(), want.qualifying.size())};
    for (std::size_t i = 0; i < got.qualifying.size(); ++i) {
      const SubsetScore& g = got.qualifying[i];
      const Scored& w = want.qualifying[i];
      if (g.spec.antennas != w.spec.antennas || g.spec.parts != w.spec.parts ||
          g.accuracy != w.accuracy)
        return {false, fmt("rho %.2f: qualifying subset %zu disagrees", rho, i)};
    }
    if (got.best.accuracy != want.best)
      return {false, fmt("rho %.2f: best %.4f, oracle %.4f", rho, got.best.accuracy, want.best)};
  }

  // The search shrinks the deployment: one antenna and one or two parts.
  if (low.level_n_ant != 1 || low.level_n_parts != 1)
    return {false, fmt("rho 0.45 stopped at level (%d,%d), want (1,1)", low.level_n_ant,
                       low.level_n_parts)};
  if (high.level_n_ant != 1 || high.level_n_parts != 2)
    return {false, fmt("rho 0.98 stopped at level (%d,%d), want (1,2)", high.level_n_ant,
                       high.level_n_parts)};
  return {true, fmt("matches the 45-subset exhaustive reference at rho 0.45 and 0.98; "
                    "one antenna suffices (best %.4f)",
                    high.best.accuracy)};
}

}  // namespace

int main() {
  Gate gate;
  const ScratchDir dir;

  gate.run(1, "feature vector geometry", check_feature_dimension);
  gate.run(2, "data completion semantics", check_completion);
  gate.run(3, "numeric identities", check_numerics);
  gate.run(4, "dual solver optimality", check_smo);

  ReferenceData ref;
  bool ref_ok = false;
  try {
    ref = build_reference(dir);
    ref_ok = true;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "[acceptance] reference dataset failed: %s\n", e.what());
  }
  const auto needs_ref = [&](const std::function<std::pair<bool, std::string>()>& body) {
    return [&, body]() -> std::pair<bool, std::string> {
      if (!ref_ok) return {false, "reference dataset unavailable"};
      return body();
    };
  };

  gate.run(5, "end-to-end activity recognition",
           needs_ref([&] { return check_recognition(ref); }));
  gate.run(6, "completion ablation",
           needs_ref([&] { return check_ablation(ref); }));
  gate.run(7, "real-time latency budget",
           needs_ref([&] { return check_latency(ref, dir); }));
  gate.run(8, "minimum-subset search", [&] { return check_selection(dir); });
  gate.run(9, "cross-subject generalization",
           needs_ref([&] { return check_loso(ref); }));
  gate.run(10, "model persistence",
           needs_ref([&] { return check_persistence(ref, dir); }));

  std::printf("acceptance: %d/%d criteria passed\n", gate.passed, gate.passed + gate.failed);
  return gate.failed == 0 ? 0 : 1;
}
