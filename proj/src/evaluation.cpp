#include "histo/evaluation.hpp"

#include "histo/error.hpp"
#include "histo/parallel.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

namespace histo {

ConfusionCounts confusion(const std::vector<int>& preds, const std::vector<int>& truths) {
  if (preds.size() != truths.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(preds.size()) + " predictions for " +
                                               std::to_string(truths.size()) + " truths");
  }
  if (preds.empty()) throw Error(ErrorKind::EmptyInput, "no predictions");
  ConfusionCounts c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (truths[i] == 1)
      (preds[i] == 1 ? c.tp : c.fn)++;
    else
      (preds[i] == 1 ? c.fp : c.tn)++;
  }
  return c;
}

double sensitivity(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0) throw Error(ErrorKind::UndefinedMetric, "sensitivity without positive samples");
  return double(c.tp) / double(c.tp + c.fn);
}

double specificity(const ConfusionCounts& c) {
  if (c.tn + c.fp == 0) throw Error(ErrorKind::UndefinedMetric, "specificity without negative samples");
  return double(c.tn) / double(c.tn + c.fp);
}

double precision(const ConfusionCounts& c) {
  if (c.tp + c.fp == 0) throw Error(ErrorKind::UndefinedMetric, "precision without positive predictions");
  return double(c.tp) / double(c.tp + c.fp);
}

double bac(const ConfusionCounts& c) { return (sensitivity(c) + specificity(c)) / 2.0; }

double f1(const ConfusionCounts& c) {
  const double rc = sensitivity(c);
  if (c.tp == 0) return 0.0;
  const double pr = precision(c);
  return 2.0 * pr * rc / (pr + rc);
}

std::vector<PatientResult> patient_scores(const std::vector<int>& preds, const std::vector<int>& truths,
                                          const std::vector<std::string>& patient_ids) {
  if (preds.size() != truths.size() || preds.size() != patient_ids.size()) {
    throw Error(ErrorKind::LengthMismatch, "predictions, truths and patient ids differ in length");
  }
  if (preds.empty()) throw Error(ErrorKind::EmptyInput, "no predictions");
  std::map<std::string, PatientResult> by_patient;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    auto& r = by_patient[patient_ids[i]];
    r.patient_id = patient_ids[i];
    ++r.n_images;
    r.n_correct += preds[i] == truths[i];
  }
  std::vector<PatientResult> out;
  for (auto& [_, r] : by_patient) out.push_back(std::move(r));
  return out;
}

double grr(const std::vector<PatientResult>& results) {
  if (results.empty()) throw Error(ErrorKind::EmptyInput, "no patients");
  double sum = 0.0;
  for (const auto& r : results) sum += r.score();
  return sum / double(results.size());
}

double ResultRecord::mean_bac() const {
  if (folds.empty()) throw Error(ErrorKind::EmptyInput, "record has no folds");
  double sum = 0.0;
  for (const auto& f : folds) sum += f.bac;
  return sum / double(folds.size());
}

namespace {

std::optional<double> mean_of(const std::vector<FoldMetrics>& folds, std::optional<double> FoldMetrics::*field) {
  if (folds.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& f : folds) {
    if (!(f.*field)) return std::nullopt;
    sum += *(f.*field);
  }
  return sum / double(folds.size());
}

std::string describe(const ExperimentCell& c) {
  return std::string(to_token(c.kind)) + "/" + std::string(to_token(c.mode)) + "/k=" + std::to_string(c.k) +
         "/" + std::string(to_token(c.distance));
}

std::size_t distance_order(DistanceKind d) {
  return std::size_t(std::find(std::begin(kAllDistanceKinds), std::end(kAllDistanceKinds), d) -
                     std::begin(kAllDistanceKinds));
}

}  // namespace

std::optional<double> ResultRecord::mean_f1() const { return mean_of(folds, &FoldMetrics::f1); }
std::optional<double> ResultRecord::mean_grr() const { return mean_of(folds, &FoldMetrics::grr); }

ResultRecord run_experiment(const ExperimentCell& cell, const std::vector<LabeledSample>& samples,
                            const std::vector<FoldSplit>& folds, const MetricSet& metrics, int threads) {
  if (folds.empty()) throw Error(ErrorKind::InvalidArgument, "no folds");
  ResultRecord record{cell, {}};
  for (const auto& fold : folds) {
    const std::string where = describe(cell) + " fold " + std::to_string(fold.fold_id) + ": ";
    try {
      std::vector<LabeledSample> train;
      std::vector<Descriptor> probes;
      std::vector<int> truths;
      std::vector<std::string> patients;
      for (const auto& s : samples) {
        if (fold.train_patient_ids.count(s.patient_id)) {
          train.push_back(s);
        } else if (fold.test_patient_ids.count(s.patient_id)) {
          probes.push_back(s.descriptor);
          truths.push_back(s.label);
          patients.push_back(s.patient_id);
        }
      }
      if (probes.empty()) throw Error(ErrorKind::EmptyInput, "no test samples");
      const SearchIndex index = build_index(std::move(train));
      const auto preds = classify_all(index, probes, cell.k, cell.distance, threads);

      const auto counts = confusion(preds, truths);
      FoldMetrics m{fold.fold_id, bac(counts), std::nullopt, std::nullopt};
      if (metrics.f1) {
        try {
          m.f1 = f1(counts);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::UndefinedMetric) throw;
        }
      }
      if (metrics.grr) m.grr = grr(patient_scores(preds, truths, patients));
      record.folds.push_back(m);
    } catch (const Error& e) {
      throw Error(e.kind(), where + e.what());
    }
  }
  return record;
}

ResultRecord best_over_distances(const std::vector<ResultRecord>& group) {
  if (group.empty()) throw Error(ErrorKind::EmptyGroup, "no records to choose from");
  const auto& first = group.front().cell;
  for (const auto& r : group) {
    if (r.cell.kind != first.kind || r.cell.mode != first.mode || r.cell.k != first.k) {
      throw Error(ErrorKind::InvalidArgument, "records mix descriptor, mode or k");
    }
  }
  const ResultRecord* best = &group.front();
  double best_bac = best->mean_bac();
  for (const auto& r : group) {
    const double b = r.mean_bac();
    if (b > best_bac || (b == best_bac && distance_order(r.cell.distance) < distance_order(best->cell.distance))) {
      best = &r;
      best_bac = b;
    }
  }
  return *best;
}

std::vector<DistanceRank> rank_distances(const std::vector<ResultRecord>& records) {
  std::set<DistanceKind> distances;
  std::map<std::tuple<DescriptorKind, ChannelMode, int>, std::map<DistanceKind, double>> trials;
  for (const auto& r : records) {
    distances.insert(r.cell.distance);
    trials[{r.cell.kind, r.cell.mode, r.cell.k}][r.cell.distance] = r.mean_bac();
  }

  std::map<std::pair<DescriptorKind, DistanceKind>, std::pair<double, int>> sums;
  for (const auto& [trial, by_distance] : trials) {
    if (by_distance.size() != distances.size()) {
      const auto& [kind, mode, k] = trial;
      std::string missing;
      for (auto d : distances)
        if (!by_distance.count(d)) missing += std::string(missing.empty() ? "" : ",") + std::string(to_token(d));
      throw Error(ErrorKind::IncompleteTrial, std::string(to_token(kind)) + "/" + std::string(to_token(mode)) +
                                                  "/k=" + std::to_string(k) + " lacks " + missing);
    }
    double max_bac = 0.0;
    for (const auto& [_, b] : by_distance) max_bac = std::max(max_bac, b);
    if (!(max_bac > 0.0)) throw Error(ErrorKind::UndefinedMetric, "trial with zero maximum BAC");
    for (const auto& [d, b] : by_distance) {
      auto& [sum, count] = sums[{std::get<0>(trial), d}];
      sum += b / max_bac;
      ++count;
    }
  }

  std::vector<DistanceRank> out;
  for (auto kind : kAllDescriptorKinds) {
    for (auto d : kAllDistanceKinds) {
      const auto it = sums.find({kind, d});
      if (it == sums.end()) continue;
      out.push_back({kind, d, it->second.first / it->second.second, it->second.second});
    }
  }
  return out;
}

MatrixResult run_matrix(const std::map<std::pair<DescriptorKind, ChannelMode>, std::vector<LabeledSample>>& sets,
                        const std::vector<int>& ks, const std::vector<DistanceKind>& distances,
                        const std::vector<FoldSplit>& folds, const MetricSet& metrics, int threads) {
  struct Job {
    ExperimentCell cell;
    const std::vector<LabeledSample>* samples;
  };
  std::vector<Job> jobs;
  for (const auto& [key, samples] : sets)
    for (int k : ks)
      for (auto d : distances) jobs.push_back({{key.first, key.second, k, d}, &samples});
  std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) { return a.cell < b.cell; });

  std::vector<std::optional<ResultRecord>> done(jobs.size());
  std::vector<std::string> errors(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    try {
      done[i] = run_experiment(jobs[i].cell, *jobs[i].samples, folds, metrics, 1);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  MatrixResult out;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (done[i])
      out.records.push_back(std::move(*done[i]));
    else
      out.failures.push_back({jobs[i].cell, errors[i]});
  }
  return out;
}

namespace {

std::string mode_label(ChannelMode m) {
  switch (m) {
    case ChannelMode::Greyscale: return "Greyscale";
    case ChannelMode::HE: return "H&E Stains";
    case ChannelMode::RGB: return "RGB Image";
  }
  return "";
}

std::string kind_label(DescriptorKind k) {
  switch (k) {
    case DescriptorKind::ELP: return "ELP";
    case DescriptorKind::GIST: return "GIST";
    case DescriptorKind::FELP: return "F-ELP";
    case DescriptorKind::LBP: return "LBP";
  }
  return "";
}

std::string cell_value(std::optional<double> v) {
  if (!v) return "-";
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << *v;
  return s.str();
}

}  // namespace

std::string render_tables(const std::vector<ResultRecord>& records, Companion companion) {
  std::map<std::tuple<int, DescriptorKind, ChannelMode>, std::vector<ResultRecord>> groups;
  std::set<int> ks;
  std::set<DescriptorKind> kinds;
  std::set<ChannelMode> modes;
  bool have_f1 = false;
  for (const auto& r : records) {
    groups[{r.cell.k, r.cell.kind, r.cell.mode}].push_back(r);
    ks.insert(r.cell.k);
    kinds.insert(r.cell.kind);
    modes.insert(r.cell.mode);
    have_f1 = have_f1 || r.mean_f1().has_value();
  }
  if (companion == Companion::Auto) companion = have_f1 ? Companion::F1 : Companion::GRR;
  const std::string companion_name = companion == Companion::F1 ? "F1" : "GRR";

  std::ostringstream out;
  for (int k : ks) {
    out << "### Best kNN accuracy (k=" << k << ") over all distance functions\n\n| Colour Channels |";
    for (auto kind : kinds) out << " " << kind_label(kind) << " " << companion_name << " | " << kind_label(kind) << " BAC |";
    out << "\n|---|";
    for (std::size_t i = 0; i < kinds.size(); ++i) out << "---|---|";
    out << "\n";
    for (auto mode : modes) {
      out << "| " << mode_label(mode) << " |";
      for (auto kind : kinds) {
        const auto it = groups.find({k, kind, mode});
        if (it == groups.end()) {
          out << " - | - |";
          continue;
        }
        const auto best = best_over_distances(it->second);
        const auto comp = companion == Companion::F1 ? best.mean_f1() : best.mean_grr();
        out << " " << cell_value(comp) << " | " << cell_value(best.mean_bac()) << " |";
      }
      out << "\n";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace histo
