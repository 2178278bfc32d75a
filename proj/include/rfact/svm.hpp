#pragma once

#include "rfact/features.hpp"
#include "rfact/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rfact {

struct ScalerStats {
  Vector mean;
  Vector stddev;
};

// Per-dimension z-score statistics; dimensions with zero spread scale to 0.
ScalerStats fit_scaler(const Matrix& rows);
Vector apply_scaler(const ScalerStats& stats, const Vector& x);
Matrix apply_scaler(const ScalerStats& stats, const Matrix& rows);

// exp(−gamma · ‖x−y‖²).
double rbf_kernel(const Vector& x, const Vector& y, double gamma);

// Gram block K(a_i, b_j) over the rows of two matrices.
Matrix rbf_gram(const Matrix& a, const Matrix& b, double gamma);

struct TrainParams {
  double C = 10.0;
  double gamma = 0.0;  // 0 → 1 / (d · mean per-dimension variance of scaled features)
  double tol = 1e-3;
  std::uint64_t seed = 0;
  std::int64_t max_iterations = 0;  // 0 → derived from problem size
};

struct SmoResult {
  Vector alpha;
  double bias = 0.0;
  double objective = 0.0;        // dual objective (maximization form)
  double kkt_violation = 0.0;    // maximal-violating-pair gap at exit
  std::int64_t iterations = 0;
};

// Solves the soft-margin dual max Σα − ½ Σ α_i α_j y_i y_j K_ij subject to
// 0 ≤ α ≤ C, Σ α_i y_i = 0, by sequential minimal optimization with
// maximal-violating-pair selection. kernel is the full Gram matrix; y ∈ {±1}.
SmoResult smo_solve(const Matrix& kernel, const Vector& y, double c, double tol,
                    std::int64_t max_iterations = 0);

struct BinaryClassifier {
  int class_p = 0;  // positive side; decision > 0 votes class_p
  int class_q = 0;
  Matrix support_vectors;  // scaled feature space, one row per SV
  Vector coefficients;     // α_i y_i
  double bias = 0.0;
};

struct SvmModel {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::uint64_t layout_fingerprint = 0;
  std::vector<ActivityLabel> classes;  // sorted by id
  double c = 10.0;
  double gamma = 0.0;
  ScalerStats scaler;
  std::vector<BinaryClassifier> classifiers;  // one per class pair, (p,q) lexicographic

  [[nodiscard]] int class_index(int class_id) const;
};

// One-vs-one training: fits the scaler on all rows, resolves gamma, then
// trains C(K,2) binary classifiers on the scaled class-pair subsets.
// labels[i] is the class id of row i; classes is the id-sorted catalog.
SvmModel train(const Matrix& rows, const std::vector<int>& labels,
               const std::vector<ActivityLabel>& classes, std::uint64_t fingerprint,
               const TrainParams& params = {});
SvmModel train(const std::vector<FeatureVector>& instances, const std::vector<ActivityLabel>& labels,
               const TrainParams& params = {});

struct Prediction {
  ActivityLabel label;
  std::vector<int> votes;  // per class, in model.classes order
  [[nodiscard]] int top_votes() const;
};

Prediction predict(const SvmModel& model, const FeatureVector& features);

// Raw (unscaled) rows; fingerprint must be checked by the caller when rows
// do not originate from FeatureVectors.
std::vector<Prediction> predict_batch(const SvmModel& model, const Matrix& rows);

// Versioned little-endian binary container with a trailing checksum.
void save_model(const SvmModel& model, const std::string& path);
SvmModel load_model(const std::string& path);

}  // namespace rfact
