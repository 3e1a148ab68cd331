// histo-cbir: command-line front end for the histopathology image search pipeline.

#include "histo/datasets.hpp"
#include "histo/error.hpp"
#include "histo/evaluation.hpp"
#include "histo/parallel.hpp"
#include "histo/pipeline.hpp"
#include "histo/retrieval.hpp"
#include "histo/store.hpp"
#include "histo/synthetic.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace histo;

namespace {

GroupBy parse_group_by(const std::string& s) {
  if (s == "patient") return GroupBy::Patient;
  if (s == "none") return GroupBy::None;
  throw Error(ErrorKind::Config, "unknown --group-by '" + s + "' (valid: patient, none)");
}

int threads_or_default(int t) { return t > 0 ? t : default_thread_count(); }

// Writes to `path`, or stdout when empty or "-".
template <typename Write>
void emit(const std::string& path, Write&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
  } else {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    write(out);
  }
}

void add_stain_options(CLI::App* cmd, StainSeparationParams& p) {
  cmd->add_option("--beta", p.od_threshold, "OD threshold for tissue pixels");
  cmd->add_option("--alpha", p.angle_percentile, "wedge percentile (percent)");
  cmd->add_option("--min-tissue-pixels", p.min_tissue_pixels);
}

void add_descriptor_options(CLI::App* cmd, DescriptorParams& p) {
  cmd->add_option("--elp-window", p.elp_window);
  cmd->add_option("--elp-stride", p.elp_stride);
  cmd->add_option("--lbp-radius", p.lbp_radius);
  cmd->add_option("--lbp-neighbors", p.lbp_neighbors);
  cmd->add_option("--gist-grid", p.gist_grid);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Histopathology image search: stain separation, descriptors, kNN retrieval and evaluation"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: HISTO_CBIR_THREADS or all cores)");

  // ingest
  std::string ing_dataset, ing_root, ing_out = "manifest.csv";
  bool ing_filter = false;
  double ing_tau = kDefaultArtefactTau;
  auto* ingest = app.add_subcommand("ingest", "Build a manifest CSV from a BreakHis or IDC directory tree");
  ingest->add_option("--dataset", ing_dataset)->required()->check(CLI::IsMember({"breakhis", "idc"}));
  ingest->add_option("--root", ing_root)->required();
  ingest->add_option("--out", ing_out);
  ingest->add_flag("--filter-artefacts", ing_filter, "drop patches with low variation in every channel");
  ingest->add_option("--tau", ing_tau, "per-channel std threshold for the artefact filter");

  // separate
  std::string sep_in, sep_out, sep_group = "none";
  StainSeparationParams sep_params;
  auto* separate = app.add_subcommand("separate", "Split RGB images into hematoxylin and eosin channels");
  separate->add_option("--in", sep_in)->required();
  separate->add_option("--out", sep_out)->required();
  separate->add_option("--group-by", sep_group, "patient|none");
  add_stain_options(separate, sep_params);

  // extract
  std::string ex_manifest, ex_kind, ex_mode, ex_out, ex_group = "none";
  DescriptorParams ex_params;
  StainSeparationParams ex_stain;
  auto* extract_cmd = app.add_subcommand("extract", "Compute one descriptor kind for every manifest image");
  extract_cmd->add_option("--manifest", ex_manifest)->required();
  extract_cmd->add_option("--kind", ex_kind, "elp|gist|felp|lbp")->required();
  extract_cmd->add_option("--mode", ex_mode, "grey|he|rgb")->required();
  extract_cmd->add_option("--out", ex_out)->required();
  extract_cmd->add_option("--group-by", ex_group, "stain-basis pooling in he mode: patient|none");
  add_descriptor_options(extract_cmd, ex_params);
  add_stain_options(extract_cmd, ex_stain);

  // search
  std::string se_index, se_probe, se_distance = "l1", se_out;
  int se_k = 1;
  auto* search = app.add_subcommand("search", "kNN search of probe descriptors against an index");
  search->add_option("--index", se_index)->required();
  search->add_option("--probe", se_probe)->required();
  search->add_option("--k", se_k);
  search->add_option("--distance", se_distance);
  search->add_option("--out", se_out, "CSV output (default stdout)");

  // evaluate
  std::string ev_manifest, ev_folds = "breakhis_5fold", ev_k = "1,5,15", ev_distances = "all", ev_metrics = "auto",
              ev_out;
  std::vector<std::string> ev_descriptors;
  std::uint64_t ev_seed = 7;
  auto* evaluate = app.add_subcommand("evaluate", "kNN classification over folds, one row per cell and fold");
  evaluate->add_option("--manifest", ev_manifest)->required();
  evaluate->add_option("--descriptors", ev_descriptors, "descriptor JSONL file(s)")->required()->delimiter(',');
  evaluate->add_option("--folds", ev_folds, "fold file, breakhis_5fold or idc_fixed");
  evaluate->add_option("--k", ev_k);
  evaluate->add_option("--distances", ev_distances);
  evaluate->add_option("--metrics", ev_metrics, "auto or a list of bac,f1,grr");
  evaluate->add_option("--seed", ev_seed, "seed for generated folds");
  evaluate->add_option("--out", ev_out, "results CSV (default stdout)");

  // report
  std::string rep_results, rep_style = "tables", rep_companion = "auto", rep_out;
  auto* report = app.add_subcommand("report", "Best-over-distances tables from a results CSV");
  report->add_option("--results", rep_results)->required();
  report->add_option("--style", rep_style)->check(CLI::IsMember({"tables"}));
  report->add_option("--companion", rep_companion)->check(CLI::IsMember({"auto", "f1", "grr"}));
  report->add_option("--out", rep_out);

  // rank-distances
  std::string rank_results, rank_out;
  auto* rank = app.add_subcommand("rank-distances", "Mean relative BAC of each distance per descriptor");
  rank->add_option("--results", rank_results)->required();
  rank->add_option("--out", rank_out);

  // run
  std::string run_config;
  std::map<std::string, std::string> run_overrides;
  auto* run = app.add_subcommand("run", "Full pipeline from a config file, with flag overrides");
  run->add_option("--config", run_config, "key = value config file");
  for (const char* key : {"dataset", "root", "modes", "descriptors", "k", "distances", "folds", "group-by", "metrics",
                          "out", "seed", "tau", "beta", "alpha"}) {
    run->add_option_function<std::string>(std::string("--") + key,
                                          [&run_overrides, key](const std::string& v) { run_overrides[key] = v; });
  }
  bool run_filter = false;
  run->add_flag("--filter-artefacts", run_filter);

  // make-fixture
  std::string fx_out;
  synthetic::FixtureSpec fx_spec;
  auto* fixture = app.add_subcommand("make-fixture", "Write the synthetic IDC-layout fixture");
  fixture->add_option("--out", fx_out)->required();
  fixture->add_option("--patients", fx_spec.patients);
  fixture->add_option("--per-class", fx_spec.patches_per_class);
  fixture->add_option("--size", fx_spec.patch_size);
  fixture->add_option("--seed", fx_spec.seed);
  fixture->add_flag("--permuted", fx_spec.permuted_labels);

  CLI11_PARSE(app, argc, argv);
  const int workers = threads_or_default(threads);

  try {
    if (*ingest) {
      auto result = ing_dataset == "idc" ? ingest_idc(ing_root) : ingest_breakhis(ing_root);
      for (const auto& e : result.errors) std::cerr << "skipped " << e.path << ": " << e.message << "\n";
      auto manifest = std::move(result.manifest);
      std::cerr << "ingested " << manifest.rows.size() << " images, " << manifest.patients().size() << " patients";
      if (result.excluded) std::cerr << " (" << result.excluded << " excluded by magnification)";
      std::cerr << "\n";
      if (ing_filter) {
        auto rep = filter_artefacts(manifest, ing_tau, workers);
        for (const auto& u : rep.unreadable) std::cerr << "unreadable " << u.path << ": " << u.message << "\n";
        for (const auto& f : rep.flagged) std::cerr << "artefact " << f.sample_id << "\n";
        std::cerr << "flagged " << rep.flagged.size() << " patches at tau = " << ing_tau << "\n";
        manifest = std::move(rep.kept);
      }
      write_manifest(ing_out, manifest);
    } else if (*separate) {
      const auto reports = separate_directory(sep_in, sep_out, parse_group_by(sep_group), sep_params, workers);
      std::cerr << "separated " << reports.size() << " groups into " << sep_out << "\n";
    } else if (*extract_cmd) {
      const auto kind = parse_descriptor_kind(ex_kind);
      const auto mode = parse_channel_mode(ex_mode);
      if (!kind) throw Error(ErrorKind::Config, "unknown --kind '" + ex_kind + "' (valid: elp, gist, felp, lbp)");
      if (!mode) throw Error(ErrorKind::Config, "unknown --mode '" + ex_mode + "' (valid: grey, he, rgb)");
      const auto manifest = read_manifest(ex_manifest);
      auto result = extract_dataset(manifest, {*kind}, *mode, ex_params, ex_stain, parse_group_by(ex_group), workers);
      for (const auto& f : result.failures) std::cerr << "failed " << f.sample_id << ": " << f.message << "\n";
      write_descriptors(ex_out, result.samples[*kind]);
      std::cerr << "wrote " << result.samples[*kind].size() << " descriptors to " << ex_out << "\n";
    } else if (*search) {
      const auto dist = parse_distance_kind(se_distance);
      if (!dist) throw Error(ErrorKind::Config, "unknown --distance '" + se_distance + "' (valid: l1, l2, cosine, correlation, chi2, hutchinson)");
      const auto index = build_index(read_descriptors(se_index));
      const auto probes = read_descriptors(se_probe);
      emit(se_out, [&](std::ostream& out) {
        out << "probe_id,neighbor_ids,predicted_label\n";
        for (const auto& p : probes) {
          const auto neighbors = query(index, p.descriptor, se_k, *dist);
          std::string ids;
          for (const auto& n : neighbors) ids += (ids.empty() ? "" : ";") + n.sample_id;
          out << csv::escape(p.sample_id) << ',' << csv::escape(ids) << ',' << classify(neighbors, index) << '\n';
        }
      });
    } else if (*evaluate) {
      RunConfig cfg;
      apply_setting(cfg, "k", ev_k);
      apply_setting(cfg, "distances", ev_distances);
      apply_setting(cfg, "metrics", ev_metrics);
      const auto manifest = read_manifest(ev_manifest);
      FoldSpec spec;
      spec.seed = ev_seed;
      if (ev_folds == "breakhis_5fold") spec.protocol = FoldProtocol::BreakHis5Fold;
      else if (ev_folds == "idc_fixed") spec.protocol = FoldProtocol::IdcFixed;
      else {
        spec.protocol = FoldProtocol::File;
        spec.path = ev_folds;
      }
      const auto folds = split_folds(manifest, spec);

      std::set<std::string> known;
      for (const auto& r : manifest.rows) known.insert(r.sample_id);
      std::map<std::pair<DescriptorKind, ChannelMode>, std::vector<LabeledSample>> sets;
      for (const auto& path : ev_descriptors) {
        for (auto& s : read_descriptors(path)) {
          if (!known.count(s.sample_id)) continue;
          sets[{s.descriptor.kind, s.descriptor.mode}].push_back(std::move(s));
        }
      }
      if (sets.empty()) throw Error(ErrorKind::EmptyInput, "no descriptors match the manifest");
      const auto matrix = run_matrix(sets, cfg.ks, cfg.distances, folds, cfg.metrics, workers);
      for (const auto& f : matrix.failures) {
        std::cerr << "cell " << to_token(f.cell.kind) << "/" << to_token(f.cell.mode) << "/k=" << f.cell.k << "/"
                  << to_token(f.cell.distance) << " failed: " << f.message << "\n";
      }
      emit(ev_out, [&](std::ostream& out) { write_results(out, matrix.records); });
    } else if (*report) {
      const auto records = read_results(rep_results);
      const Companion c = rep_companion == "f1" ? Companion::F1 : rep_companion == "grr" ? Companion::GRR : Companion::Auto;
      emit(rep_out, [&](std::ostream& out) { out << render_tables(records, c); });
    } else if (*rank) {
      const auto ranks = rank_distances(read_results(rank_results));
      emit(rank_out, [&](std::ostream& out) { write_distance_ranks(out, ranks); });
    } else if (*run) {
      RunConfig cfg = run_config.empty() ? RunConfig{} : read_config(run_config);
      for (const auto& [key, value] : run_overrides) {
        std::string k = key;
        std::replace(k.begin(), k.end(), '-', '_');
        apply_setting(cfg, k, value);
      }
      if (run_filter) cfg.filter_artefacts = true;
      if (threads > 0) cfg.threads = threads;
      const auto summary = run_pipeline(cfg, std::cerr);
      return summary.failed_cells == 0 ? 0 : 3;
    } else if (*fixture) {
      const int n = synthetic::write_fixture(fx_out, fx_spec);
      std::cerr << "wrote " << n << " patches to " << fx_out << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Config ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
