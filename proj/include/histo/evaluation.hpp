#ifndef HISTO_EVALUATION_HPP
#define HISTO_EVALUATION_HPP

#include "histo/datasets.hpp"
#include "histo/descriptors.hpp"
#include "histo/distances.hpp"
#include "histo/retrieval.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace histo {

struct ConfusionCounts {
  long tp = 0, fp = 0, tn = 0, fn = 0;

  long total() const { return tp + fp + tn + fn; }
};

/// Label 1 is the positive class.
ConfusionCounts confusion(const std::vector<int>& preds, const std::vector<int>& truths);

double sensitivity(const ConfusionCounts& c);
double specificity(const ConfusionCounts& c);
double precision(const ConfusionCounts& c);

/// (Sen + Spc) / 2. Needs both classes present among the truths.
double bac(const ConfusionCounts& c);

/// 2 Pr Rc / (Pr + Rc); 0 when there are positives but no true positives.
double f1(const ConfusionCounts& c);

struct PatientResult {
  std::string patient_id;
  long n_images = 0;
  long n_correct = 0;

  double score() const { return double(n_correct) / double(n_images); }
};

/// Per-patient correct fractions, ordered by patient id.
std::vector<PatientResult> patient_scores(const std::vector<int>& preds, const std::vector<int>& truths,
                                          const std::vector<std::string>& patient_ids);

/// Global recognition rate: unweighted mean of patient scores.
double grr(const std::vector<PatientResult>& results);

struct MetricSet {
  bool f1 = true;
  bool grr = true;
};

struct ExperimentCell {
  DescriptorKind kind = DescriptorKind::LBP;
  ChannelMode mode = ChannelMode::Greyscale;
  int k = 1;
  DistanceKind distance = DistanceKind::L1;

  auto operator<=>(const ExperimentCell&) const = default;
};

struct FoldMetrics {
  int fold_id = 0;
  double bac = 0.0;
  std::optional<double> f1;
  std::optional<double> grr;
};

struct ResultRecord {
  ExperimentCell cell;
  std::vector<FoldMetrics> folds;

  double mean_bac() const;
  /// Mean over folds; empty if the metric is missing in any fold.
  std::optional<double> mean_f1() const;
  std::optional<double> mean_grr() const;
};

/// Builds an index on each fold's training patients and classifies its test patients.
ResultRecord run_experiment(const ExperimentCell& cell, const std::vector<LabeledSample>& samples,
                            const std::vector<FoldSplit>& folds, const MetricSet& metrics = {},
                            int threads = 1);

/// Highest fold-averaged BAC; ties go to the earlier distance in canonical order.
ResultRecord best_over_distances(const std::vector<ResultRecord>& group);

struct DistanceRank {
  DescriptorKind kind;
  DistanceKind distance;
  double mean_relative = 0.0;
  int trials = 0;
};

/// Per (kind, mode, k) trial, BAC of each distance over the trial maximum, averaged per descriptor.
std::vector<DistanceRank> rank_distances(const std::vector<ResultRecord>& records);

struct CellFailure {
  ExperimentCell cell;
  std::string message;
};

struct MatrixResult {
  std::vector<ResultRecord> records;  // cell order
  std::vector<CellFailure> failures;
};

/// Runs every (k, distance) cell for each descriptor set; failures are isolated per cell.
MatrixResult run_matrix(const std::map<std::pair<DescriptorKind, ChannelMode>, std::vector<LabeledSample>>& sets,
                        const std::vector<int>& ks, const std::vector<DistanceKind>& distances,
                        const std::vector<FoldSplit>& folds, const MetricSet& metrics = {}, int threads = 1);

enum class Companion { Auto, F1, GRR };

/// Markdown tables, one per k: rows are channel modes, columns descriptor x (companion, BAC),
/// each entry the best over distances.
std::string render_tables(const std::vector<ResultRecord>& records, Companion companion = Companion::Auto);

}  // namespace histo

#endif  // HISTO_EVALUATION_HPP
