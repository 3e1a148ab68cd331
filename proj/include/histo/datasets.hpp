#ifndef HISTO_DATASETS_HPP
#define HISTO_DATASETS_HPP

#include "histo/image.hpp"

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace histo {

struct ManifestRow {
  std::string path;
  std::string sample_id;
  std::string patient_id;
  int label = 0;
  std::optional<int> magnification;
  std::optional<int> fold;
};

/// Rows sorted by sample_id; sample ids are unique.
struct DatasetManifest {
  std::vector<ManifestRow> rows;

  std::vector<std::string> patients() const;  // sorted, unique
  void sort_and_validate();
};

struct FileIssue {
  std::string path;
  std::string message;
};

struct IngestResult {
  DatasetManifest manifest;
  std::vector<FileIssue> errors;  ///< files that failed to parse; ingestion continued past them
  std::size_t excluded = 0;       ///< well-formed files filtered out (e.g. other magnifications)
};

struct BreakHisName {
  int label;            // 0 benign, 1 malignant
  std::string subtype;  // tumour type code, unused for labels
  std::string patient_id;
  int magnification;
  std::string sequence;
};

/// Parses `SOB_<B|M>_<subtype>-<year>-<slide>-<mag>-<seq>.png`; throws ParseError.
BreakHisName parse_breakhis_filename(const std::string& filename);

struct IdcName {
  std::string patient_id;
  long x;
  long y;
  int label;
};

/// Parses `<patient>_idx5_x<X>_y<Y>_class<0|1>.png`; throws ParseError.
IdcName parse_idc_filename(const std::string& filename);

/// 40x images of a BreakHis tree (searched recursively).
IngestResult ingest_breakhis(const std::string& root, int magnification = 40);

/// IDC layout `<patient>/<0|1>/<patient>_idx5_x<X>_y<Y>_class<0|1>.png`.
IngestResult ingest_idc(const std::string& root);

inline constexpr double kDefaultArtefactTau = 8.0;

/// Population standard deviation of each channel.
std::vector<double> channel_stds(const RasterImage& img);

/// True iff every channel's standard deviation is below tau.
bool is_artefact(const std::vector<double>& stds, double tau = kDefaultArtefactTau);

struct FlaggedPatch {
  std::string sample_id;
  std::vector<double> stds;
};

struct ArtefactReport {
  DatasetManifest kept;
  std::vector<FlaggedPatch> flagged;
  std::vector<FileIssue> unreadable;
};

ArtefactReport filter_artefacts(const DatasetManifest& manifest, double tau = kDefaultArtefactTau,
                                int threads = 1);

/// Patient-disjoint partition. Validation patients (IDC protocol) are held out of both sides.
struct FoldSplit {
  int fold_id = 0;
  std::set<std::string> train_patient_ids;
  std::set<std::string> validation_patient_ids;
  std::set<std::string> test_patient_ids;

  bool patient_disjoint() const;
};

/// Repeated random patient splits, stratified by each patient's majority label.
std::vector<FoldSplit> random_patient_folds(const DatasetManifest& manifest, int n_folds = 5,
                                            double test_fraction = 0.3, std::uint64_t seed = 0);

/// One fixed train/validation/test partition in the 84/29/49 proportion.
FoldSplit idc_fixed_split(const DatasetManifest& manifest, std::uint64_t seed = 0);

/// Fold file: `train:` / `validation:` / `test:` headers, one patient id per line, `#` comments.
/// A `train:` header following a `test:` section starts the next fold.
std::vector<FoldSplit> parse_fold_file(std::istream& in, const DatasetManifest& manifest);
std::vector<FoldSplit> read_fold_file(const std::string& path, const DatasetManifest& manifest);
void write_fold_file(std::ostream& out, const std::vector<FoldSplit>& folds);

enum class FoldProtocol { BreakHis5Fold, IdcFixed, File };

struct FoldSpec {
  FoldProtocol protocol = FoldProtocol::BreakHis5Fold;
  std::string path;  ///< fold file for FoldProtocol::File
  std::uint64_t seed = 0;
};

std::vector<FoldSplit> split_folds(const DatasetManifest& manifest, const FoldSpec& spec);

}  // namespace histo

#endif  // HISTO_DATASETS_HPP
