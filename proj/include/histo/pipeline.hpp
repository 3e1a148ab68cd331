#ifndef HISTO_PIPELINE_HPP
#define HISTO_PIPELINE_HPP

#include "histo/datasets.hpp"
#include "histo/descriptors.hpp"
#include "histo/evaluation.hpp"
#include "histo/synthetic.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace histo {

enum class GroupBy { None, Patient };

struct RunConfig {
  std::string dataset = "synthetic";  ///< synthetic | breakhis | idc | manifest
  std::string root;                   ///< dataset root, or manifest CSV for `manifest`
  std::vector<ChannelMode> modes{std::begin(kAllChannelModes), std::end(kAllChannelModes)};
  std::vector<DescriptorKind> kinds{std::begin(kAllDescriptorKinds), std::end(kAllDescriptorKinds)};
  std::vector<int> ks{1, 5, 15};
  std::vector<DistanceKind> distances{std::begin(kAllDistanceKinds), std::end(kAllDistanceKinds)};
  StainSeparationParams stain;
  DescriptorParams descriptor;
  bool filter_artefacts = false;
  double tau = kDefaultArtefactTau;
  std::string folds = "auto";  ///< auto | breakhis_5fold | idc_fixed | path to a fold file
  std::string group_by = "auto";  ///< auto | patient | none
  MetricSet metrics;
  std::string out_dir = "histo-run";
  int threads = 0;  ///< 0: default_thread_count()
  std::uint64_t seed = 7;
  synthetic::FixtureSpec fixture;

  /// Throws ConfigError naming the offending key or token.
  void validate() const;
  int effective_threads() const;
};

/// Applies one `key = value` setting; throws ConfigError for unknown keys or tokens.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// `key = value` lines; `#` starts a comment.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig read_config(const std::string& path, RunConfig base = {});

std::vector<ChannelMode> parse_mode_list(const std::string& csv);
std::vector<DescriptorKind> parse_kind_list(const std::string& csv);
std::vector<DistanceKind> parse_distance_list(const std::string& csv);
std::vector<int> parse_k_list(const std::string& csv);

struct ExtractionFailure {
  std::string sample_id;
  std::string message;
};

struct ExtractionResult {
  std::map<DescriptorKind, std::vector<LabeledSample>> samples;  // manifest order, minus failures
  std::vector<ExtractionFailure> failures;
};

/// Descriptors for every manifest row in one channel mode. In HE mode with GroupBy::Patient the
/// stain basis and channel scaling are shared by all of a patient's images.
ExtractionResult extract_dataset(const DatasetManifest& manifest, const std::vector<DescriptorKind>& kinds,
                                 ChannelMode mode, const DescriptorParams& params,
                                 const StainSeparationParams& stain, GroupBy group_by, int threads);

struct SeparationGroupReport {
  std::string group;
  std::vector<std::string> members;
  StainBasis basis;
  ChannelScale scale;
};

/// Separates every PNG under `in_dir` into `<stem>.h.png` / `<stem>.e.png` in `out_dir` and
/// writes `separation.json`. Returns per-group reports; failed groups are listed in the JSON.
std::vector<SeparationGroupReport> separate_directory(const std::string& in_dir, const std::string& out_dir,
                                                      GroupBy group_by, const StainSeparationParams& params,
                                                      int threads);

struct RunSummary {
  std::size_t samples = 0;
  std::size_t result_rows = 0;
  std::size_t failed_cells = 0;
  std::size_t extraction_failures = 0;
  std::string out_dir;
};

/// Full matrix: ingest, optional artefact filter, folds, extraction, evaluation, reports.
/// Writes manifest.csv, folds.txt, descriptors_<kind>_<mode>.jsonl, results.csv, failures.csv,
/// report.md, rank_distances.csv and run.json under out_dir.
RunSummary run_pipeline(const RunConfig& config, std::ostream& log);

}  // namespace histo

#endif  // HISTO_PIPELINE_HPP
