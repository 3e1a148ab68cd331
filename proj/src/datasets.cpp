#include "histo/datasets.hpp"

#include "histo/error.hpp"
#include "histo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <regex>
#include <sstream>

namespace fs = std::filesystem;

namespace histo {

std::vector<std::string> DatasetManifest::patients() const {
  std::set<std::string> ids;
  for (const auto& r : rows) ids.insert(r.patient_id);
  return {ids.begin(), ids.end()};
}

void DatasetManifest::sort_and_validate() {
  std::sort(rows.begin(), rows.end(),
            [](const ManifestRow& a, const ManifestRow& b) { return a.sample_id < b.sample_id; });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].label != 0 && rows[i].label != 1) {
      throw Error(ErrorKind::InvalidArgument, "label of " + rows[i].sample_id + " is not 0 or 1");
    }
    if (i > 0 && rows[i].sample_id == rows[i - 1].sample_id) {
      throw Error(ErrorKind::InvalidArgument, "duplicate sample id " + rows[i].sample_id);
    }
  }
}

BreakHisName parse_breakhis_filename(const std::string& filename) {
  static const std::regex pattern(R"(^SOB_([BM])_([A-Za-z]+)-(\d+)-([A-Za-z0-9]+)-(\d+)-(\d+)\.png$)",
                                  std::regex::icase);
  std::smatch m;
  if (!std::regex_match(filename, m, pattern)) {
    throw Error(ErrorKind::Parse, "not a BreakHis file name: " + filename);
  }
  BreakHisName out;
  out.label = (m[1].str() == "M" || m[1].str() == "m") ? 1 : 0;
  out.subtype = m[2].str();
  out.patient_id = m[3].str() + "-" + m[4].str();
  out.magnification = std::stoi(m[5].str());
  out.sequence = m[6].str();
  return out;
}

IdcName parse_idc_filename(const std::string& filename) {
  static const std::regex pattern(R"(^([A-Za-z0-9]+)_idx5_x(\d+)_y(\d+)_class([01])\.png$)");
  std::smatch m;
  if (!std::regex_match(filename, m, pattern)) {
    throw Error(ErrorKind::Parse, "not an IDC patch name: " + filename);
  }
  return {m[1].str(), std::stol(m[2].str()), std::stol(m[3].str()), std::stoi(m[4].str())};
}

namespace {

std::vector<fs::path> png_files(const std::string& root) {
  if (!fs::is_directory(root)) throw Error(ErrorKind::Io, "not a directory: " + root);
  std::vector<fs::path> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void finish(IngestResult& result, const std::string& root) {
  if (result.manifest.rows.empty()) throw Error(ErrorKind::EmptyDataset, "no usable images under " + root);
  result.manifest.sort_and_validate();
}

}  // namespace

IngestResult ingest_breakhis(const std::string& root, int magnification) {
  IngestResult result;
  for (const auto& path : png_files(root)) {
    try {
      const auto name = parse_breakhis_filename(path.filename().string());
      if (name.magnification != magnification) {
        ++result.excluded;
        continue;
      }
      result.manifest.rows.push_back(
          {path.string(), path.stem().string(), name.patient_id, name.label, name.magnification, {}});
    } catch (const Error& e) {
      result.errors.push_back({path.string(), e.what()});
    }
  }
  finish(result, root);
  return result;
}

IngestResult ingest_idc(const std::string& root) {
  IngestResult result;
  for (const auto& path : png_files(root)) {
    try {
      const auto name = parse_idc_filename(path.filename().string());
      const std::string class_dir = path.parent_path().filename().string();
      const std::string patient_dir = path.parent_path().parent_path().filename().string();
      if (class_dir != "0" && class_dir != "1") {
        throw Error(ErrorKind::Parse, "class folder must be 0 or 1: " + path.string());
      }
      if (std::stoi(class_dir) != name.label) {
        throw Error(ErrorKind::Parse, "class folder and file name disagree: " + path.string());
      }
      if (patient_dir != name.patient_id) {
        throw Error(ErrorKind::Parse, "patient folder and file name disagree: " + path.string());
      }
      result.manifest.rows.push_back({path.string(), path.stem().string(), name.patient_id, name.label, {}, {}});
    } catch (const Error& e) {
      result.errors.push_back({path.string(), e.what()});
    }
  }
  finish(result, root);
  return result;
}

std::vector<double> channel_stds(const RasterImage& img) {
  std::vector<double> out;
  for (int c = 0; c < img.channels(); ++c) {
    const Plane p = img.channel(c);
    out.push_back(std::sqrt((p - p.mean()).square().mean()));
  }
  return out;
}

bool is_artefact(const std::vector<double>& stds, double tau) {
  return std::all_of(stds.begin(), stds.end(), [tau](double s) { return s < tau; });
}

ArtefactReport filter_artefacts(const DatasetManifest& manifest, double tau, int threads) {
  struct Outcome {
    std::vector<double> stds;
    std::string error;
  };
  std::vector<Outcome> outcomes(manifest.rows.size());
  parallel_for(manifest.rows.size(), threads, [&](std::size_t i) {
    try {
      outcomes[i].stds = channel_stds(load_image(manifest.rows[i].path));
    } catch (const Error& e) {
      outcomes[i].error = e.what();
    }
  });

  ArtefactReport report;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& row = manifest.rows[i];
    if (!outcomes[i].error.empty()) {
      report.unreadable.push_back({row.path, outcomes[i].error});
    } else if (is_artefact(outcomes[i].stds, tau)) {
      report.flagged.push_back({row.sample_id, outcomes[i].stds});
    } else {
      report.kept.rows.push_back(row);
    }
  }
  return report;
}

bool FoldSplit::patient_disjoint() const {
  auto disjoint = [](const std::set<std::string>& a, const std::set<std::string>& b) {
    return std::none_of(a.begin(), a.end(), [&](const auto& id) { return b.count(id) > 0; });
  };
  return disjoint(train_patient_ids, test_patient_ids) &&
         disjoint(train_patient_ids, validation_patient_ids) &&
         disjoint(validation_patient_ids, test_patient_ids);
}

namespace {

template <typename T>
void seeded_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[rng() % i]);
}

// Majority label per patient; ties count as positive.
std::map<std::string, int> patient_labels(const DatasetManifest& manifest) {
  std::map<std::string, std::pair<int, int>> counts;
  for (const auto& r : manifest.rows) (r.label == 1 ? counts[r.patient_id].second : counts[r.patient_id].first)++;
  std::map<std::string, int> out;
  for (const auto& [id, c] : counts) out[id] = c.second >= c.first ? 1 : 0;
  return out;
}

}  // namespace

std::vector<FoldSplit> random_patient_folds(const DatasetManifest& manifest, int n_folds,
                                            double test_fraction, std::uint64_t seed) {
  if (n_folds < 1) throw Error(ErrorKind::InvalidArgument, "need at least one fold");
  const auto labels = patient_labels(manifest);
  const std::size_t n = labels.size();
  const auto n_test = std::size_t(std::llround(test_fraction * double(n)));
  if (n_test < 1 || n_test >= n) {
    throw Error(ErrorKind::InfeasibleSplit, std::to_string(n) + " patients cannot be split " +
                                                std::to_string(1.0 - test_fraction) + "/" +
                                                std::to_string(test_fraction));
  }

  std::array<std::vector<std::string>, 2> strata;
  for (const auto& [id, label] : labels) strata[std::size_t(label)].push_back(id);

  // Largest-remainder allocation of test patients across the two strata.
  std::array<std::size_t, 2> quota{};
  std::array<double, 2> remainder{};
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < 2; ++s) {
    const double exact = double(n_test) * double(strata[s].size()) / double(n);
    quota[s] = std::size_t(std::floor(exact));
    remainder[s] = exact - double(quota[s]);
    assigned += quota[s];
  }
  while (assigned < n_test) {
    const std::size_t s = remainder[0] >= remainder[1] ? 0 : 1;
    ++quota[s];
    remainder[s] = -1.0;
    ++assigned;
  }

  std::vector<FoldSplit> folds;
  for (int f = 0; f < n_folds; ++f) {
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ull * std::uint64_t(f + 1));
    FoldSplit split;
    split.fold_id = f + 1;
    for (std::size_t s = 0; s < 2; ++s) {
      auto ids = strata[s];
      seeded_shuffle(ids, rng);
      for (std::size_t i = 0; i < ids.size(); ++i) {
        (i < quota[s] ? split.test_patient_ids : split.train_patient_ids).insert(ids[i]);
      }
    }
    folds.push_back(std::move(split));
  }
  return folds;
}

FoldSplit idc_fixed_split(const DatasetManifest& manifest, std::uint64_t seed) {
  auto ids = manifest.patients();
  const std::size_t n = ids.size();
  const auto n_train = std::size_t(std::llround(double(n) * 84.0 / 162.0));
  const auto n_val = std::size_t(std::llround(double(n) * 29.0 / 162.0));
  if (n_train < 1 || n_train + n_val >= n) {
    throw Error(ErrorKind::InfeasibleSplit, std::to_string(n) + " patients are too few for 84/29/49");
  }
  std::mt19937_64 rng(seed);
  seeded_shuffle(ids, rng);
  FoldSplit split;
  split.fold_id = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_train)
      split.train_patient_ids.insert(ids[i]);
    else if (i < n_train + n_val)
      split.validation_patient_ids.insert(ids[i]);
    else
      split.test_patient_ids.insert(ids[i]);
  }
  return split;
}

std::vector<FoldSplit> parse_fold_file(std::istream& in, const DatasetManifest& manifest) {
  const auto known_list = manifest.patients();
  const std::set<std::string> known(known_list.begin(), known_list.end());

  std::vector<FoldSplit> folds;
  std::set<std::string>* section = nullptr;
  bool in_test = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);

    if (line == "train:") {
      if (folds.empty() || in_test) {
        folds.emplace_back();
        folds.back().fold_id = int(folds.size());
      }
      in_test = false;
      section = &folds.back().train_patient_ids;
    } else if (line == "validation:" || line == "test:") {
      if (folds.empty()) {
        folds.emplace_back();
        folds.back().fold_id = 1;
      }
      in_test = line == "test:";
      section = in_test ? &folds.back().test_patient_ids : &folds.back().validation_patient_ids;
    } else {
      if (!section) {
        throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": patient id before any section header");
      }
      if (!known.count(line)) {
        throw Error(ErrorKind::UnknownPatient, "fold file line " + std::to_string(line_no) + ": " + line);
      }
      section->insert(line);
    }
  }
  if (folds.empty()) throw Error(ErrorKind::Parse, "fold file defines no folds");
  for (const auto& f : folds) {
    if (!f.patient_disjoint()) {
      throw Error(ErrorKind::InfeasibleSplit, "fold " + std::to_string(f.fold_id) + " is not patient-disjoint");
    }
    if (f.train_patient_ids.empty() || f.test_patient_ids.empty()) {
      throw Error(ErrorKind::InfeasibleSplit, "fold " + std::to_string(f.fold_id) + " has an empty side");
    }
  }
  return folds;
}

std::vector<FoldSplit> read_fold_file(const std::string& path, const DatasetManifest& manifest) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open fold file " + path);
  return parse_fold_file(in, manifest);
}

void write_fold_file(std::ostream& out, const std::vector<FoldSplit>& folds) {
  for (const auto& f : folds) {
    out << "# fold " << f.fold_id << "\ntrain:\n";
    for (const auto& id : f.train_patient_ids) out << id << "\n";
    if (!f.validation_patient_ids.empty()) {
      out << "validation:\n";
      for (const auto& id : f.validation_patient_ids) out << id << "\n";
    }
    out << "test:\n";
    for (const auto& id : f.test_patient_ids) out << id << "\n";
  }
}

std::vector<FoldSplit> split_folds(const DatasetManifest& manifest, const FoldSpec& spec) {
  switch (spec.protocol) {
    case FoldProtocol::BreakHis5Fold: return random_patient_folds(manifest, 5, 0.3, spec.seed);
    case FoldProtocol::IdcFixed: return {idc_fixed_split(manifest, spec.seed)};
    case FoldProtocol::File: return read_fold_file(spec.path, manifest);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown fold protocol");
}

}  // namespace histo
