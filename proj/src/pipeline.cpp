#include "histo/pipeline.hpp"

#include "histo/error.hpp"
#include "histo/parallel.hpp"
#include "histo/store.hpp"

#include "json.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;

namespace histo {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename Range>
std::string token_list(const Range& values) {
  std::string out;
  for (const auto& v : values) out += (out.empty() ? "" : ", ") + std::string(to_token(v));
  return out;
}

template <typename T, typename Parse, typename Range>
std::vector<T> parse_tokens(const std::string& csv, Parse parse, const Range& all, const char* what) {
  const auto items = split_list(csv);
  if (items.size() == 1 && items.front() == "all") return {std::begin(all), std::end(all)};
  std::vector<T> out;
  for (const auto& item : items) {
    const auto v = parse(item);
    if (!v) {
      throw Error(ErrorKind::Config,
                  "unknown " + std::string(what) + " '" + item + "' (valid: " + token_list(all) + ", all)");
    }
    if (std::find(out.begin(), out.end(), *v) == out.end()) out.push_back(*v);
  }
  if (out.empty()) throw Error(ErrorKind::Config, std::string("empty ") + what + " list");
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::Config, key + ": expected a number, got '" + value + "'");
}

long parse_integer(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::Config, key + ": expected an integer, got '" + value + "'");
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "yes" || value == "1" || value == "on") return true;
  if (value == "false" || value == "no" || value == "0" || value == "off") return false;
  throw Error(ErrorKind::Config, key + ": expected true/false, got '" + value + "'");
}

GroupBy resolve_group_by(const RunConfig& c) {
  if (c.group_by == "patient") return GroupBy::Patient;
  if (c.group_by == "none") return GroupBy::None;
  return (c.dataset == "idc" || c.dataset == "synthetic") ? GroupBy::Patient : GroupBy::None;
}

FoldSpec resolve_folds(const RunConfig& c) {
  FoldSpec spec;
  spec.seed = c.seed;
  if (c.folds == "breakhis_5fold") {
    spec.protocol = FoldProtocol::BreakHis5Fold;
  } else if (c.folds == "idc_fixed") {
    spec.protocol = FoldProtocol::IdcFixed;
  } else if (c.folds == "auto") {
    spec.protocol = c.dataset == "idc" ? FoldProtocol::IdcFixed : FoldProtocol::BreakHis5Fold;
  } else {
    spec.protocol = FoldProtocol::File;
    spec.path = c.folds;
  }
  return spec;
}

// Patient id of a loose image file: IDC or BreakHis naming, else its folder name.
std::string patient_of(const fs::path& file) {
  const std::string name = file.filename().string();
  try {
    return parse_idc_filename(name).patient_id;
  } catch (const Error&) {
  }
  try {
    return parse_breakhis_filename(name).patient_id;
  } catch (const Error&) {
  }
  return file.parent_path().filename().string();
}

nlohmann::json vec_json(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }

}  // namespace

std::vector<ChannelMode> parse_mode_list(const std::string& csv) {
  return parse_tokens<ChannelMode>(csv, parse_channel_mode, kAllChannelModes, "channel mode");
}

std::vector<DescriptorKind> parse_kind_list(const std::string& csv) {
  return parse_tokens<DescriptorKind>(csv, parse_descriptor_kind, kAllDescriptorKinds, "descriptor");
}

std::vector<DistanceKind> parse_distance_list(const std::string& csv) {
  return parse_tokens<DistanceKind>(csv, parse_distance_kind, kAllDistanceKinds, "distance");
}

std::vector<int> parse_k_list(const std::string& csv) {
  std::vector<int> out;
  for (const auto& item : split_list(csv)) {
    const long k = parse_integer("k", item);
    if (k < 1) throw Error(ErrorKind::Config, "k must be >= 1, got " + item);
    out.push_back(int(k));
  }
  if (out.empty()) throw Error(ErrorKind::Config, "empty k list");
  return out;
}

void apply_setting(RunConfig& c, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "dataset") {
    if (value != "synthetic" && value != "breakhis" && value != "idc" && value != "manifest") {
      throw Error(ErrorKind::Config, "unknown dataset '" + value + "' (valid: synthetic, breakhis, idc, manifest)");
    }
    c.dataset = value;
  } else if (key == "root") {
    c.root = value;
  } else if (key == "modes") {
    c.modes = parse_mode_list(value);
  } else if (key == "kinds" || key == "descriptors") {
    c.kinds = parse_kind_list(value);
  } else if (key == "k") {
    c.ks = parse_k_list(value);
  } else if (key == "distances") {
    c.distances = parse_distance_list(value);
  } else if (key == "beta") {
    c.stain.od_threshold = parse_real(key, value);
  } else if (key == "alpha") {
    c.stain.angle_percentile = parse_real(key, value);
  } else if (key == "min_tissue_pixels") {
    c.stain.min_tissue_pixels = int(parse_integer(key, value));
  } else if (key == "elp_window") {
    c.descriptor.elp_window = int(parse_integer(key, value));
  } else if (key == "elp_stride") {
    c.descriptor.elp_stride = int(parse_integer(key, value));
  } else if (key == "lbp_radius") {
    c.descriptor.lbp_radius = parse_real(key, value);
  } else if (key == "lbp_neighbors") {
    c.descriptor.lbp_neighbors = int(parse_integer(key, value));
  } else if (key == "gist_grid") {
    c.descriptor.gist_grid = int(parse_integer(key, value));
  } else if (key == "gist_scales") {
    c.descriptor.gist_scales = int(parse_integer(key, value));
  } else if (key == "gist_orientations") {
    c.descriptor.gist_orientations = int(parse_integer(key, value));
  } else if (key == "filter_artefacts") {
    c.filter_artefacts = parse_bool(key, value);
  } else if (key == "tau") {
    c.tau = parse_real(key, value);
  } else if (key == "folds") {
    c.folds = value;
  } else if (key == "group_by") {
    if (value != "auto" && value != "patient" && value != "none") {
      throw Error(ErrorKind::Config, "unknown group_by '" + value + "' (valid: auto, patient, none)");
    }
    c.group_by = value;
  } else if (key == "metrics") {
    if (value == "auto" || value == "all") {
      c.metrics = MetricSet{};
    } else {
      MetricSet m{false, false};
      for (const auto& item : split_list(value)) {
        if (item == "f1") m.f1 = true;
        else if (item == "grr") m.grr = true;
        else if (item != "bac") throw Error(ErrorKind::Config, "unknown metric '" + item + "' (valid: bac, f1, grr, auto)");
      }
      c.metrics = m;
    }
  } else if (key == "out") {
    c.out_dir = value;
  } else if (key == "threads") {
    c.threads = int(parse_integer(key, value));
  } else if (key == "seed") {
    c.seed = std::uint64_t(parse_integer(key, value));
  } else if (key == "fixture_patients") {
    c.fixture.patients = int(parse_integer(key, value));
  } else if (key == "fixture_patches_per_class") {
    c.fixture.patches_per_class = int(parse_integer(key, value));
  } else if (key == "fixture_patch_size") {
    c.fixture.patch_size = int(parse_integer(key, value));
  } else if (key == "fixture_permuted") {
    c.fixture.permuted_labels = parse_bool(key, value);
  } else {
    throw Error(ErrorKind::Config, "unknown config key '" + key + "'");
  }
}

RunConfig parse_config(std::istream& in, RunConfig base) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Config, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

RunConfig read_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot read config file " + path);
  return parse_config(in, std::move(base));
}

void RunConfig::validate() const {
  if (dataset != "synthetic" && root.empty()) throw Error(ErrorKind::Config, "dataset '" + dataset + "' needs root");
  if (dataset != "synthetic" && !fs::exists(root)) throw Error(ErrorKind::Config, "root does not exist: " + root);
  if (modes.empty() || kinds.empty() || ks.empty() || distances.empty()) {
    throw Error(ErrorKind::Config, "modes, kinds, k and distances must be non-empty");
  }
  if (out_dir.empty()) throw Error(ErrorKind::Config, "out must name a directory");
  if (!(tau > 0.0)) throw Error(ErrorKind::Config, "tau must be positive");
  try {
    stain.validate();
    descriptor.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
  const auto spec = resolve_folds(*this);
  if (spec.protocol == FoldProtocol::File && !fs::exists(spec.path)) {
    throw Error(ErrorKind::Config, "folds must be auto, breakhis_5fold, idc_fixed or an existing fold file: " + folds);
  }
}

int RunConfig::effective_threads() const { return threads > 0 ? threads : default_thread_count(); }

ExtractionResult extract_dataset(const DatasetManifest& manifest, const std::vector<DescriptorKind>& kinds,
                                 ChannelMode mode, const DescriptorParams& params,
                                 const StainSeparationParams& stain, GroupBy group_by, int threads) {
  const auto& rows = manifest.rows;
  std::vector<std::vector<std::size_t>> groups;
  if (mode == ChannelMode::HE && group_by == GroupBy::Patient) {
    std::map<std::string, std::size_t> slot;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto [it, inserted] = slot.emplace(rows[i].patient_id, groups.size());
      if (inserted) groups.emplace_back();
      groups[it->second].push_back(i);
    }
  } else {
    for (std::size_t i = 0; i < rows.size(); ++i) groups.push_back({i});
  }

  // Per-row, per-kind slots keep the output independent of scheduling.
  std::vector<std::vector<std::optional<Descriptor>>> descriptors(rows.size(),
                                                                 std::vector<std::optional<Descriptor>>(kinds.size()));
  std::vector<std::vector<std::string>> errors(rows.size());

  parallel_for(groups.size(), threads, [&](std::size_t g) {
    const auto& members = groups[g];
    std::vector<RasterImage> images;
    std::vector<std::size_t> loaded;
    for (auto i : members) {
      try {
        images.push_back(load_image(rows[i].path));
        loaded.push_back(i);
      } catch (const Error& e) {
        errors[i].push_back(e.what());
      }
    }
    if (images.empty()) return;

    std::vector<RasterImage> channels;
    try {
      if (mode == ChannelMode::HE && group_by == GroupBy::Patient) {
        channels = separate_group(images, stain);
      } else {
        for (const auto& img : images) channels.push_back(mode_channels(img, mode, stain));
      }
    } catch (const Error& e) {
      const std::string prefix = members.size() > 1 ? "group " + rows[members.front()].patient_id + ": " : "";
      for (auto i : loaded) errors[i].push_back(prefix + e.what());
      return;
    }
    images.clear();

    for (std::size_t j = 0; j < loaded.size(); ++j) {
      for (std::size_t k = 0; k < kinds.size(); ++k) {
        try {
          descriptors[loaded[j]][k] = describe_channels(channels[j], kinds[k], mode, params);
        } catch (const Error& e) {
          errors[loaded[j]].push_back(std::string(to_token(kinds[k])) + ": " + e.what());
        }
      }
    }
  });

  ExtractionResult out;
  for (auto kind : kinds) out.samples[kind];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      if (descriptors[i][k]) {
        out.samples[kinds[k]].push_back({rows[i].sample_id, rows[i].patient_id, rows[i].label, std::move(*descriptors[i][k])});
      }
    }
    for (const auto& e : errors[i]) out.failures.push_back({rows[i].sample_id, e});
  }
  return out;
}

std::vector<SeparationGroupReport> separate_directory(const std::string& in_dir, const std::string& out_dir,
                                                      GroupBy group_by, const StainSeparationParams& params,
                                                      int threads) {
  if (!fs::is_directory(in_dir)) throw Error(ErrorKind::Io, "not a directory: " + in_dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(in_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorKind::EmptyDataset, "no PNG files under " + in_dir);
  fs::create_directories(out_dir);

  std::vector<std::pair<std::string, std::vector<fs::path>>> groups;
  if (group_by == GroupBy::Patient) {
    std::map<std::string, std::size_t> slot;
    for (const auto& f : files) {
      const auto id = patient_of(f);
      auto [it, inserted] = slot.emplace(id, groups.size());
      if (inserted) groups.push_back({id, {}});
      groups[it->second].second.push_back(f);
    }
  } else {
    for (const auto& f : files) groups.push_back({f.stem().string(), {f}});
  }

  std::vector<std::optional<SeparationGroupReport>> reports(groups.size());
  std::vector<std::string> errors(groups.size());
  parallel_for(groups.size(), threads, [&](std::size_t g) {
    try {
      std::vector<RasterImage> images;
      for (const auto& f : groups[g].second) images.push_back(load_image(f.string()));
      const auto sep = separate_group_detailed(images, params);
      SeparationGroupReport r{groups[g].first, {}, sep.basis, sep.scale};
      for (std::size_t i = 0; i < images.size(); ++i) {
        const auto stem = groups[g].second[i].stem().string();
        r.members.push_back(stem);
        save_png(RasterImage::from_planes({sep.images[i].channel(0)}), (fs::path(out_dir) / (stem + ".h.png")).string());
        save_png(RasterImage::from_planes({sep.images[i].channel(1)}), (fs::path(out_dir) / (stem + ".e.png")).string());
      }
      reports[g] = std::move(r);
    } catch (const Error& e) {
      errors[g] = e.what();
    }
  });

  nlohmann::json doc;
  doc["params"] = {{"beta", params.od_threshold}, {"alpha", params.angle_percentile},
                   {"min_tissue_pixels", params.min_tissue_pixels},
                   {"group_by", group_by == GroupBy::Patient ? "patient" : "none"}};
  doc["groups"] = nlohmann::json::array();
  doc["failures"] = nlohmann::json::array();
  std::vector<SeparationGroupReport> out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (reports[g]) {
      const auto& r = *reports[g];
      doc["groups"].push_back({{"group", r.group},
                               {"members", r.members},
                               {"h_vector", vec_json(r.basis.h_vector)},
                               {"e_vector", vec_json(r.basis.e_vector)},
                               {"h_scale", r.scale.h},
                               {"e_scale", r.scale.e}});
      out.push_back(r);
    } else {
      doc["failures"].push_back({{"group", groups[g].first}, {"error", errors[g]}});
    }
  }
  std::ofstream json_out(fs::path(out_dir) / "separation.json");
  json_out << doc.dump(2) << '\n';
  return out;
}

RunSummary run_pipeline(const RunConfig& config, std::ostream& log) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  config.validate();
  const int threads = config.effective_threads();
  const fs::path out(config.out_dir);
  fs::create_directories(out);
  nlohmann::json timings;
  auto lap = [&, last = t0](const char* stage) mutable {
    const auto now = Clock::now();
    timings[stage] = std::chrono::duration<double>(now - last).count();
    last = now;
  };

  DatasetManifest manifest;
  std::vector<FileIssue> ingest_errors;
  if (config.dataset == "synthetic") {
    auto spec = config.fixture;
    spec.seed = config.seed;
    const auto fixture_dir = out / "fixture";
    fs::remove_all(fixture_dir);
    const int n = synthetic::write_fixture(fixture_dir.string(), spec);
    log << "wrote synthetic fixture: " << n << " patches\n";
    auto ingested = ingest_idc(fixture_dir.string());
    manifest = std::move(ingested.manifest);
  } else if (config.dataset == "manifest") {
    manifest = read_manifest(config.root);
  } else {
    auto ingested = config.dataset == "idc" ? ingest_idc(config.root) : ingest_breakhis(config.root);
    manifest = std::move(ingested.manifest);
    ingest_errors = std::move(ingested.errors);
    log << "ingested " << manifest.rows.size() << " images (" << ingest_errors.size() << " unparsable, "
        << ingested.excluded << " excluded)\n";
  }
  lap("ingest");

  std::size_t flagged = 0;
  if (config.filter_artefacts) {
    auto report = filter_artefacts(manifest, config.tau, threads);
    flagged = report.flagged.size();
    std::ofstream f(out / "artefacts.csv");
    f << "sample_id,std_r,std_g,std_b\n";
    for (const auto& p : report.flagged) {
      f << csv::escape(p.sample_id);
      for (double s : p.stds) f << ',' << csv::format_number(s);
      f << '\n';
    }
    for (const auto& u : report.unreadable) ingest_errors.push_back(u);
    manifest = std::move(report.kept);
    log << "artefact filter flagged " << flagged << " patches (tau = " << config.tau << ")\n";
  }
  write_manifest((out / "manifest.csv").string(), manifest);
  lap("artefacts");

  const auto folds = split_folds(manifest, resolve_folds(config));
  {
    std::ofstream f(out / "folds.txt");
    write_fold_file(f, folds);
  }

  const GroupBy group_by = resolve_group_by(config);
  std::map<std::pair<DescriptorKind, ChannelMode>, std::vector<LabeledSample>> sets;
  std::vector<std::pair<ChannelMode, ExtractionFailure>> extraction_failures;
  for (auto mode : config.modes) {
    auto extracted = extract_dataset(manifest, config.kinds, mode, config.descriptor, config.stain, group_by, threads);
    for (auto& f : extracted.failures) extraction_failures.push_back({mode, std::move(f)});
    for (auto& [kind, samples] : extracted.samples) {
      write_descriptors((out / ("descriptors_" + std::string(to_token(kind)) + "_" + std::string(to_token(mode)) + ".jsonl")).string(),
                        samples);
      if (!samples.empty()) sets[{kind, mode}] = std::move(samples);
    }
  }
  log << "extracted descriptors for " << sets.size() << " (descriptor, mode) sets, " << extraction_failures.size()
      << " extraction failures\n";
  lap("extract");

  const auto matrix = run_matrix(sets, config.ks, config.distances, folds, config.metrics, threads);
  {
    std::ofstream f(out / "results.csv");
    write_results(f, matrix.records);
  }
  {
    std::ofstream f(out / "failures.csv");
    write_failures(f, matrix.failures);
  }
  {
    std::ofstream f(out / "extraction_failures.csv");
    f << "mode,sample_id,error\n";
    for (const auto& [mode, e] : extraction_failures) {
      f << to_token(mode) << ',' << csv::escape(e.sample_id) << ',' << csv::escape(e.message) << '\n';
    }
  }

  std::string rank_note;
  {
    std::ofstream f(out / "rank_distances.csv");
    try {
      write_distance_ranks(f, rank_distances(matrix.records));
    } catch (const Error& e) {
      f << "descriptor,distance,mean_relative_rank\n";
      rank_note = e.what();
    }
  }
  {
    std::ofstream f(out / "report.md");
    f << render_tables(matrix.records);
    if (!matrix.failures.empty()) {
      f << "### Failed cells\n\n";
      for (const auto& fail : matrix.failures) {
        f << "- " << to_token(fail.cell.kind) << "/" << to_token(fail.cell.mode) << "/k=" << fail.cell.k << "/"
          << to_token(fail.cell.distance) << ": " << fail.message << "\n";
      }
      f << "\n";
    }
    if (!rank_note.empty()) f << "Distance ranking unavailable: " << rank_note << "\n";
  }
  lap("evaluate");

  std::size_t rows = 0;
  for (const auto& r : matrix.records) rows += r.folds.size();

  nlohmann::json meta;
  meta["version"] = "1.0.0";
  meta["config"] = {
      {"dataset", config.dataset},
      {"root", config.root},
      {"modes", token_list(config.modes)},
      {"kinds", token_list(config.kinds)},
      {"k", config.ks},
      {"distances", token_list(config.distances)},
      {"beta", config.stain.od_threshold},
      {"alpha", config.stain.angle_percentile},
      {"min_tissue_pixels", config.stain.min_tissue_pixels},
      {"elp_window", config.descriptor.elp_window},
      {"elp_stride", config.descriptor.elp_stride},
      {"lbp_radius", config.descriptor.lbp_radius},
      {"lbp_neighbors", config.descriptor.lbp_neighbors},
      {"gist_grid", config.descriptor.gist_grid},
      {"gist_scales", config.descriptor.gist_scales},
      {"gist_orientations", config.descriptor.gist_orientations},
      {"filter_artefacts", config.filter_artefacts},
      {"tau", config.tau},
      {"folds", config.folds},
      {"group_by", group_by == GroupBy::Patient ? "patient" : "none"},
      {"threads", threads},
      {"seed", config.seed},
  };
  meta["counts"] = {{"samples", manifest.rows.size()},
                    {"patients", manifest.patients().size()},
                    {"folds", folds.size()},
                    {"ingest_errors", ingest_errors.size()},
                    {"artefacts_flagged", flagged},
                    {"extraction_failures", extraction_failures.size()},
                    {"result_rows", rows},
                    {"failed_cells", matrix.failures.size()}};
  timings["total"] = std::chrono::duration<double>(Clock::now() - t0).count();
  meta["timings_seconds"] = timings;
  std::ofstream(out / "run.json") << meta.dump(2) << '\n';

  log << "wrote " << rows << " result rows, " << matrix.failures.size() << " failed cells to " << out.string() << "\n";
  return {manifest.rows.size(), rows, matrix.failures.size(), extraction_failures.size(), out.string()};
}

}  // namespace histo
