// Acceptance suite: one PASS/FAIL line per criterion.
#include "knn_fixture.hpp"
#include "oracles.hpp"

#include "histo/descriptors.hpp"
#include "histo/error.hpp"
#include "histo/evaluation.hpp"
#include "histo/numeric.hpp"
#include "histo/parallel.hpp"
#include "histo/pipeline.hpp"
#include "histo/store.hpp"
#include "histo/synthetic.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace histo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Collects failed checks with a message; the first few are kept for the report.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok) {
      ++failures_;
      if (failures_ <= 3) first_ += (first_.empty() ? "" : "; ") + what;
    }
  }
  Outcome outcome(const std::string& summary) const {
    std::string detail = std::to_string(checks_) + " checks, " + summary;
    if (failures_) detail += "; " + std::to_string(failures_) + " failed: " + first_;
    return {failures_ == 0, detail};
  }

 private:
  long checks_ = 0, failures_ = 0;
  std::string first_;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

ErrorKind error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

// 1. Descriptor lengths for all 12 (kind, mode) cells.
Outcome descriptor_lengths() {
  Checker c;
  const Eigen::Index table[4][3] = {{1024, 2048, 3072}, {512, 1024, 1536}, {32, 64, 96}, {18, 36, 54}};
  std::mt19937_64 rng(101);
  const auto ph = synthetic::tissue_phantom(64, 64, synthetic::random_basis(rng), rng);
  for (int k = 0; k < 4; ++k) {
    for (int m = 0; m < 3; ++m) {
      const auto kind = kAllDescriptorKinds[k];
      const auto mode = kAllChannelModes[m];
      const Eigen::Index got = extract(ph.image, kind, mode).values.size();
      c.expect(got == table[k][m], std::string(to_token(kind)) + "/" + std::string(to_token(mode)) + " has length " +
                                       std::to_string(got));
      c.expect(descriptor_length(kind, mode) == table[k][m], "descriptor_length disagrees");
    }
  }
  return c.outcome("12 cells on a 64x64 phantom");
}

// 2. Linear-time Hutchinson against the transport LP.
Outcome hutchinson_oracle() {
  Checker c;
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd p(16), q(16);
    for (int i = 0; i < 16; ++i) {
      p[i] = u(rng);
      q[i] = u(rng);
      if (t % 4 == 0 && rng() % 3 == 0) p[i] = 0.0;  // sparse supports
    }
    if (p.sum() == 0.0) p[0] = 1.0;
    const double err = std::abs(hutchinson_distance(p, q) - oracle::transport_lp(p, q));
    worst = std::max(worst, err);
    c.expect(err <= 1e-9, "pair " + std::to_string(t) + " differs by " + fmt(err));
  }
  return c.outcome("100 pairs, max |diff| = " + fmt(worst, 3));
}

// 3. Stain separation on Beer-Lambert phantoms.
Outcome phantom_recovery() {
  Checker c;
  std::mt19937_64 rng(303);
  double worst_angle = 0, worst_rmse = 0;
  for (int t = 0; t < 20; ++t) {
    const StainBasis truth = synthetic::random_basis(rng, 8.0);
    const auto ph = synthetic::tissue_phantom(64, 64, truth, rng);
    const auto od = to_optical_density(ph.image);
    const StainBasis est = estimate_stain_basis(od.od);
    const double ah = angle_degrees(est.h_vector, truth.h_vector);
    const double ae = angle_degrees(est.e_vector, truth.e_vector);
    worst_angle = std::max({worst_angle, ah, ae});
    c.expect(ah < 5.0 && ae < 5.0, "phantom " + std::to_string(t) + " angle error " + fmt(std::max(ah, ae)));

    const auto conc = separate_stains(od, est);
    const Eigen::ArrayXd norms = od.od.colwise().norm().transpose().array();
    const Eigen::Map<const Eigen::ArrayXd> th(ph.h_conc.data(), ph.h_conc.size());
    const Eigen::Map<const Eigen::ArrayXd> te(ph.e_conc.data(), ph.e_conc.size());
    for (int ch = 0; ch < 2; ++ch) {
      const Eigen::ArrayXd& got = ch == 0 ? conc.h_channel : conc.e_channel;
      const Eigen::ArrayXd want = ch == 0 ? Eigen::ArrayXd(th) : Eigen::ArrayXd(te);
      double err = 0, ref = 0;
      for (Eigen::Index i = 0; i < got.size(); ++i) {
        if (norms[i] <= StainSeparationParams{}.od_threshold) continue;
        err += (got[i] - want[i]) * (got[i] - want[i]);
        ref += want[i] * want[i];
      }
      const double rmse = std::sqrt(err / ref);
      worst_rmse = std::max(worst_rmse, rmse);
      c.expect(rmse < 0.05, "phantom " + std::to_string(t) + " relative RMSE " + fmt(rmse));
    }

    // Single-stain patches: per-patch estimation must fail, the pooled group must succeed.
    std::uniform_real_distribution<double> u(0.2, 1.2);
    Plane hc(40, 40), ec(40, 40);
    for (auto& v : hc.reshaped()) v = u(rng);
    for (auto& v : ec.reshaped()) v = u(rng);
    const Plane zero = Plane::Zero(40, 40);
    const RasterImage pure_h = synthetic::render(truth, hc, zero);
    const RasterImage pure_e = synthetic::render(truth, zero, ec);
    c.expect(error_of([&] { separate_image(pure_h); }) == ErrorKind::DegenerateWedge, "pure-H patch did not degenerate");
    c.expect(error_of([&] { separate_image(pure_e); }) == ErrorKind::DegenerateWedge, "pure-E patch did not degenerate");
    try {
      const GroupSeparation g = separate_group_detailed({pure_h, pure_e});
      c.expect(angle_degrees(g.basis.h_vector, truth.h_vector) < 5.0 && angle_degrees(g.basis.e_vector, truth.e_vector) < 5.0,
               "pooled basis off");
      const auto ch = separate_stains(to_optical_density(pure_h), g.basis);
      const auto ce = separate_stains(to_optical_density(pure_e), g.basis);
      const Eigen::Map<const Eigen::ArrayXd> hv(hc.data(), hc.size()), ev(ec.data(), ec.size());
      const double rh = std::sqrt((ch.h_channel - hv).square().sum() / hv.square().sum());
      const double re = std::sqrt((ce.e_channel - ev).square().sum() / ev.square().sum());
      c.expect(rh < 0.05 && re < 0.05, "pooled concentrations off: " + fmt(rh) + ", " + fmt(re));
      c.expect(ch.e_channel.abs().maxCoeff() < 0.05 * hv.maxCoeff(), "eosin leaked into the pure-H patch");
      c.expect(ce.h_channel.abs().maxCoeff() < 0.05 * ev.maxCoeff(), "hematoxylin leaked into the pure-E patch");
    } catch (const std::exception& e) {
      c.expect(false, std::string("pooled separation threw: ") + e.what());
    }
  }
  return c.outcome("20 phantoms, max angle error " + fmt(worst_angle, 3) + " deg, max relative RMSE " + fmt(worst_rmse, 3));
}

// 4. kNN against the exhaustive-sort oracle.
Outcome knn_oracle() {
  Checker c;
  std::mt19937_64 rng(404);
  const int dims[] = {8, 18, 32, 54};
  long queries = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 15 + rng() % 186;  // 15..200
    const int dim = dims[rng() % 4];
    const SearchIndex idx = build_index(random_index(n, dim, rng));
    std::vector<Eigen::VectorXd> raw;
    for (const auto& s : idx.samples()) raw.push_back(s.descriptor.values);
    std::vector<Descriptor> probes{idx.samples()[rng() % n].descriptor};
    for (int p = 0; p < 3; ++p) probes.push_back(random_index(1, dim, rng).front().descriptor);
    for (const auto& probe : probes) {
      for (auto dist : kAllDistanceKinds) {
        for (int k : {1, 5, 15}) {
          ++queries;
          const auto got = query(idx, probe, k, dist);
          const auto want = oracle::knn(raw, probe.values, std::string(to_token(dist)), k);
          bool same = got.size() == want.size();
          for (std::size_t i = 0; same && i < got.size(); ++i) {
            same = got[i].position == want[i].position && got[i].sample_id == idx.samples()[want[i].position].sample_id &&
                   std::abs(got[i].distance - want[i].distance) <= 1e-12 * std::max(1.0, want[i].distance);
          }
          c.expect(same, "index " + std::to_string(t) + " " + std::string(to_token(dist)) + " k=" + std::to_string(k));
        }
      }
    }
  }
  return c.outcome(std::to_string(queries) + " queries over 50 indices");
}

// 5. Metrics against hand recounts.
Outcome metric_oracle() {
  Checker c;
  long tables = 0;
  for (int tp = 0; tp <= 5; ++tp)
    for (int fp = 0; fp <= 5; ++fp)
      for (int tn = 0; tn <= 5; ++tn)
        for (int fn = 0; fn <= 5; ++fn) {
          if (tp + fp + tn + fn == 0) continue;
          ++tables;
          std::vector<int> preds, truths;
          auto push = [&](int n, int p, int t) {
            for (int i = 0; i < n; ++i) {
              preds.push_back(p);
              truths.push_back(t);
            }
          };
          push(tp, 1, 1);
          push(fp, 1, 0);
          push(tn, 0, 0);
          push(fn, 0, 1);
          const auto counts = confusion(preds, truths);
          const std::string where = std::to_string(tp) + "," + std::to_string(fp) + "," + std::to_string(tn) + "," + std::to_string(fn);
          c.expect(counts.tp == tp && counts.fp == fp && counts.tn == tn && counts.fn == fn, "recount " + where);

          const bool bac_defined = tp + fn > 0 && tn + fp > 0;
          if (bac_defined) {
            const double want = 0.5 * (double(tp) / (tp + fn) + double(tn) / (tn + fp));
            c.expect(std::abs(bac(counts) - want) <= 1e-12, "BAC " + where);
          } else {
            c.expect(error_of([&] { bac(counts); }) == ErrorKind::UndefinedMetric, "BAC undefined " + where);
          }
          if (tp + fn > 0) {
            const double want = 2.0 * tp / (2.0 * tp + fp + fn);
            c.expect(std::abs(f1(counts) - want) <= 1e-12, "F1 " + where);
          } else {
            c.expect(error_of([&] { f1(counts); }) == ErrorKind::UndefinedMetric, "F1 undefined " + where);
          }
        }

  // Skewed patients: A 10 of 10, B 0 of 1.
  std::vector<int> p(11, 1), t(11, 1);
  p[10] = 0;
  std::vector<std::string> ids(10, "A");
  ids.push_back("B");
  const double g = grr(patient_scores(p, t, ids));
  const auto counts = confusion(p, t);
  const double pooled = double(counts.tp + counts.tn) / double(counts.total());
  c.expect(std::abs(g - 0.5) <= 1e-12, "skewed GRR " + fmt(g));
  c.expect(std::abs(pooled - 10.0 / 11.0) <= 1e-12, "pooled accuracy " + fmt(pooled));

  // Random patient tables against a direct per-patient recount.
  std::mt19937_64 rng(505);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + int(rng() % 40), patients = 1 + int(rng() % 6);
    std::vector<int> pr(static_cast<std::size_t>(n)), tr(static_cast<std::size_t>(n));
    std::vector<std::string> pid(static_cast<std::size_t>(n));
    std::map<std::string, std::pair<int, int>> tally;
    for (std::size_t i = 0; i < std::size_t(n); ++i) {
      pr[i] = int(rng() % 2);
      tr[i] = int(rng() % 2);
      pid[i] = "P" + std::to_string(rng() % unsigned(patients));
      tally[pid[i]].first += pr[i] == tr[i];
      tally[pid[i]].second += 1;
    }
    double sum = 0;
    for (const auto& [_, ct] : tally) sum += double(ct.first) / ct.second;
    const auto scores = patient_scores(pr, tr, pid);
    c.expect(scores.size() == tally.size(), "patient count");
    c.expect(std::abs(grr(scores) - sum / double(tally.size())) <= 1e-12, "GRR recount " + std::to_string(trial));
  }
  return c.outcome(std::to_string(tables) + " confusion tables, skewed GRR 0.5 vs pooled 10/11, 200 patient tables");
}

// 6. Fold disjointness and relative-rank bounds.
Outcome protocol_invariants() {
  Checker c;
  std::mt19937_64 rng(606);
  for (int t = 0; t < 100; ++t) {
    DatasetManifest m;
    const int patients = 5 + int(rng() % 60);
    for (int p = 0; p < patients; ++p) {
      const int images = 1 + int(rng() % 8);
      for (int i = 0; i < images; ++i) {
        m.rows.push_back({"", "P" + std::to_string(p) + "_" + std::to_string(i), "P" + std::to_string(p), int(rng() % 2), {}, {}});
      }
    }
    m.sort_and_validate();
    std::vector<FoldSplit> folds = random_patient_folds(m, 5, 0.3, rng());
    if (patients >= 12) folds.push_back(idc_fixed_split(m, rng()));
    for (const auto& f : folds) {
      bool disjoint = true;
      for (const auto& id : f.test_patient_ids) disjoint = disjoint && !f.train_patient_ids.count(id) && !f.validation_patient_ids.count(id);
      for (const auto& id : f.validation_patient_ids) disjoint = disjoint && !f.train_patient_ids.count(id);
      c.expect(disjoint && f.patient_disjoint(), "generation " + std::to_string(t) + " fold " + std::to_string(f.fold_id));
      // Per-sample view: no sample's patient is on both sides.
      for (const auto& row : m.rows) {
        c.expect(!(f.train_patient_ids.count(row.patient_id) && f.test_patient_ids.count(row.patient_id)), "sample " + row.sample_id);
      }
    }
  }

  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<ResultRecord> all;
    for (auto kind : kAllDescriptorKinds)
      for (auto mode : kAllChannelModes)
        for (int k : {1, 5, 15}) {
          std::vector<ResultRecord> trial;
          for (auto d : kAllDistanceKinds) {
            ResultRecord r{{kind, mode, k, d}, {}};
            for (int f = 1; f <= 5; ++f) r.folds.push_back({f, std::round(u(rng) * 20) / 20, std::nullopt, std::nullopt});
            trial.push_back(r);
          }
          double top = 0;
          for (const auto& r : rank_distances(trial)) {
            c.expect(r.mean_relative > 0.0 && r.mean_relative <= 1.0, "trial relative rank out of range");
            top = std::max(top, r.mean_relative);
          }
          c.expect(top == 1.0, "trial maximum is " + fmt(top, 17));
          all.insert(all.end(), trial.begin(), trial.end());
        }
    for (const auto& r : rank_distances(all)) c.expect(r.mean_relative > 0.0 && r.mean_relative <= 1.0, "mean rank out of range");
  }
  return c.outcome("100 fold generations, 100 ranking sets");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 7. End-to-end run on the bundled fixture, plus the permuted-label null.
Outcome end_to_end(const fs::path& work, double& seconds) {
  Checker c;
  RunConfig cfg;
  cfg.kinds = {DescriptorKind::FELP, DescriptorKind::LBP};
  cfg.out_dir = (work / "fixture-run").string();
  std::ostringstream log;

  const auto t0 = std::chrono::steady_clock::now();
  const RunSummary s = run_pipeline(cfg, log);
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.expect(s.samples == 40, "fixture has " + std::to_string(s.samples) + " patches");
  c.expect(s.failed_cells == 0, std::to_string(s.failed_cells) + " failed cells");
  c.expect(s.result_rows == 2 * 3 * 3 * 6 * 5, std::to_string(s.result_rows) + " result rows");

  const std::string results = slurp(fs::path(cfg.out_dir) / "results.csv");
  const std::string ranks = slurp(fs::path(cfg.out_dir) / "rank_distances.csv");
  run_pipeline(cfg, log);
  c.expect(slurp(fs::path(cfg.out_dir) / "results.csv") == results, "results.csv differs between runs");
  c.expect(slurp(fs::path(cfg.out_dir) / "rank_distances.csv") == ranks, "rank_distances.csv differs between runs");

  // Reported BAC: best over distances for every (descriptor, mode, k).
  const auto records = read_results((fs::path(cfg.out_dir) / "results.csv").string());
  std::map<std::tuple<DescriptorKind, ChannelMode, int>, std::vector<ResultRecord>> groups;
  int below = 0;
  for (const auto& r : records) {
    groups[{r.cell.kind, r.cell.mode, r.cell.k}].push_back(r);
    below += r.mean_bac() < 1.0;
  }
  c.expect(groups.size() == 18, "expected 18 (descriptor, mode, k) entries");
  for (const auto& [key, group] : groups) {
    const auto best = best_over_distances(group);
    c.expect(best.mean_bac() == 1.0, std::string(to_token(std::get<0>(key))) + "/" + std::string(to_token(std::get<1>(key))) +
                                         "/k=" + std::to_string(std::get<2>(key)) + " BAC " + fmt(best.mean_bac()));
  }

  // Permuted labels on a larger fixture: mean BAC over the matrix.
  RunConfig null_cfg = cfg;
  null_cfg.out_dir = (work / "permuted-run").string();
  null_cfg.fixture.patients = 8;
  null_cfg.fixture.patches_per_class = 10;
  null_cfg.fixture.permuted_labels = true;
  run_pipeline(null_cfg, log);
  double sum = 0;
  int n = 0;
  for (const auto& r : read_results((fs::path(null_cfg.out_dir) / "results.csv").string())) {
    sum += r.mean_bac();
    ++n;
  }
  const double null_bac = n ? sum / n : 0.0;
  c.expect(null_bac >= 0.4 && null_bac <= 0.6, "permuted-label BAC " + fmt(null_bac));

  return c.outcome("540 rows, deterministic CSVs, best BAC 1.0 in all 18 entries (" + std::to_string(below) +
                   " of 108 single-distance cells below 1.0), permuted-label mean BAC " + fmt(null_bac, 3));
}

// 8. Needs the public datasets; runs only when their roots are given.
std::vector<std::string> dataset_checks(const fs::path& work) {
  std::vector<std::string> lines;
  const char* breakhis = std::getenv("HISTO_BREAKHIS_ROOT");
  const char* idc = std::getenv("HISTO_IDC_ROOT");
  if (!breakhis && !idc) {
    lines.push_back("SKIP  8 dataset checks: set HISTO_BREAKHIS_ROOT (and HISTO_BREAKHIS_FOLDS) or HISTO_IDC_ROOT to run");
    return lines;
  }
  std::ostringstream log;
  if (breakhis) {
    try {
      const auto ingested = ingest_breakhis(breakhis);
      std::size_t benign = 0;
      for (const auto& r : ingested.manifest.rows) benign += r.label == 0;
      lines.push_back("INFO  8 BreakHis 40x ingested " + std::to_string(ingested.manifest.rows.size()) + " images (" +
                      std::to_string(benign) + " benign, " + std::to_string(ingested.manifest.rows.size() - benign) +
                      " malignant); reference count 1995");
      RunConfig cfg;
      cfg.dataset = "breakhis";
      cfg.root = breakhis;
      cfg.modes = {ChannelMode::Greyscale, ChannelMode::HE};
      if (const char* folds = std::getenv("HISTO_BREAKHIS_FOLDS")) cfg.folds = folds;
      cfg.out_dir = (work / "breakhis-run").string();
      run_pipeline(cfg, log);
      const auto records = read_results((fs::path(cfg.out_dir) / "results.csv").string());
      std::map<std::tuple<DescriptorKind, ChannelMode, int>, std::vector<ResultRecord>> groups;
      for (const auto& r : records) groups[{r.cell.kind, r.cell.mode, r.cell.k}].push_back(r);
      const auto elp = groups.find({DescriptorKind::ELP, ChannelMode::HE, 1});
      if (elp != groups.end()) {
        const auto best = best_over_distances(elp->second);
        const double g = best.mean_grr().value_or(-1);
        lines.push_back(std::string(std::abs(g - 0.7532) <= 0.05 ? "PASS" : "FAIL") + "  8 ELP/HE k=1 GRR " + fmt(g) +
                        " vs reference 0.7532 +- 0.05");
      }
      int wins = 0, cells = 0;
      for (auto kind : kAllDescriptorKinds)
        for (int k : {1, 5, 15}) {
          const auto he = groups.find({kind, ChannelMode::HE, k});
          const auto grey = groups.find({kind, ChannelMode::Greyscale, k});
          if (he == groups.end() || grey == groups.end()) continue;
          ++cells;
          wins += best_over_distances(he->second).mean_bac() > best_over_distances(grey->second).mean_bac();
        }
      lines.push_back(std::string(wins >= 10 ? "PASS" : "FAIL") + "  8 HE above greyscale in " + std::to_string(wins) + " of " +
                      std::to_string(cells) + " (descriptor, k) cells (target >= 10 of 12)");
    } catch (const std::exception& e) {
      lines.push_back(std::string("FAIL  8 BreakHis run: ") + e.what());
    }
  }
  if (idc) {
    try {
      const auto ingested = ingest_idc(idc);
      const auto report = filter_artefacts(ingested.manifest, kDefaultArtefactTau, default_thread_count());
      lines.push_back("INFO  8 IDC: " + std::to_string(ingested.manifest.patients().size()) + " patients, " +
                      std::to_string(report.flagged.size()) + " patches flagged at tau " + fmt(kDefaultArtefactTau) +
                      " (reference 686)");
    } catch (const std::exception& e) {
      lines.push_back(std::string("FAIL  8 IDC run: ") + e.what());
    }
  }
  return lines;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "histo-acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome(double&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "descriptor-length conformance", 10.0, [](double&) { return descriptor_lengths(); }},
      {2, "Hutchinson vs transport LP (tol 1e-9)", 5.0, [](double&) { return hutchinson_oracle(); }},
      {3, "stain phantom recovery (5 deg, 5% RMSE, pooled single-stain)", 30.0, [](double&) { return phantom_recovery(); }},
      {4, "kNN vs exhaustive-sort oracle", 60.0, [](double&) { return knn_oracle(); }},
      {5, "metric oracle (tol 1e-12)", 1e9, [](double&) { return metric_oracle(); }},
      {6, "protocol invariants", 1e9, [](double&) { return protocol_invariants(); }},
      {7, "end-to-end synthetic fixture", 60.0, [&](double& timed) { return end_to_end(work, timed); }},
  };

  int failed = 0;
  for (const auto& cr : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    double timed = -1;
    Outcome out;
    try {
      out = cr.run(timed);
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // Criterion 7 times the full-matrix run alone; the others time the whole check.
    const double seconds = timed >= 0 ? timed : total;
    std::string limit;
    if (cr.limit_seconds < 1e8) {
      limit = ", limit " + fmt(cr.limit_seconds) + " s";
      if (seconds >= cr.limit_seconds) {
        out.pass = false;
        out.detail += "; too slow";
      }
    }
    failed += !out.pass;
    std::printf("%s  %d %s: %s [%.2f s%s]\n", out.pass ? "PASS" : "FAIL", cr.id, cr.name, out.detail.c_str(), seconds,
                limit.c_str());
    std::fflush(stdout);
  }
  for (const auto& line : dataset_checks(work)) std::printf("%s\n", line.c_str());
  std::printf("%d of %zu runnable criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
