#pragma once

#include "rfact/eval.hpp"
#include "rfact/svm.hpp"
#include "rfact/types.hpp"

#include <string>
#include <vector>

namespace rfact {

enum class Granularity { part, tag };

// A kept antenna set plus a kept body-part set (default granularity: each
// part implies all its tags) or, behind the tag granularity, a kept tag set.
struct SubsetSpec {
  std::vector<int> antennas;  // sorted, unique
  std::vector<int> parts;     // part ids, or tag ids under Granularity::tag
  Granularity granularity = Granularity::part;

  // Per-id keep flags expanded against a layout; throws on invalid ids.
  [[nodiscard]] std::vector<bool> antenna_mask(const BodyLayout& layout) const;
  [[nodiscard]] std::vector<bool> tag_mask(const BodyLayout& layout) const;

  static SubsetSpec full(const BodyLayout& layout);
};

// Replaces excluded information in place of re-collecting data: temporal
// blocks of excluded (antenna, tag) series become the empty-series sentinel,
// correlations touching an excluded tag or antenna become 0. Dimension and
// fingerprint are unchanged; masking is idempotent.
Dataset mask_dataset(const Dataset& data, const SubsetSpec& spec, const BodyLayout& layout,
                     const PipelineConfig& config);

// Stratified k-fold accuracy of the SVM on the masked dataset.
double subset_accuracy(const Dataset& data, const SubsetSpec& spec, const BodyLayout& layout,
                       const PipelineConfig& config, int k, const TrainParams& params,
                       std::uint64_t seed);

struct SubsetScore {
  SubsetSpec spec;
  double accuracy = 0.0;
};

struct SelectionResult {
  std::vector<SubsetScore> qualifying;  // empty when no level reached rho
  int level_n_ant = 0;                  // 0 when nothing qualified
  int level_n_parts = 0;
  double rho = 0.0;
  std::string protocol;
  std::size_t evaluations = 0;
  SubsetScore best;  // highest accuracy seen anywhere in the search
};

// Wrapper search: n_ant = 1..N_a outer, n_parts = 1..N_p inner, subsets in
// lexicographic order; stops at the first level with any accuracy >= rho and
// returns every qualifying subset of that level.
SelectionResult select_min(const Dataset& data, double rho, const BodyLayout& layout,
                           const PipelineConfig& config, int k, const TrainParams& params,
                           std::uint64_t seed, Granularity granularity = Granularity::part);

// One `n_ant,n_parts,antennas,parts,accuracy` line per qualifying subset;
// set members joined with ';'.
std::string selection_report(const SelectionResult& result);

}  // namespace rfact
