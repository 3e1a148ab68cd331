#include "histo/retrieval.hpp"

#include "histo/error.hpp"
#include "histo/parallel.hpp"

#include <algorithm>

namespace histo {

SearchIndex::SearchIndex(std::vector<LabeledSample> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) throw Error(ErrorKind::EmptyTrainingSet, "cannot index zero samples");
  const auto& first = samples_.front().descriptor;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (s.descriptor.kind != first.kind || s.descriptor.mode != first.mode ||
        s.descriptor.values.size() != first.values.size()) {
      throw Error(ErrorKind::HeterogeneousDescriptors,
                  "sample " + s.sample_id + " differs from the first sample's descriptor");
    }
    if (!by_id_.emplace(s.sample_id, i).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate sample id " + s.sample_id);
    }
  }
}

const LabeledSample& SearchIndex::at(const std::string& sample_id) const {
  const auto it = by_id_.find(sample_id);
  if (it == by_id_.end()) throw Error(ErrorKind::InvalidArgument, "unknown sample id " + sample_id);
  return samples_[it->second];
}

SearchIndex build_index(std::vector<LabeledSample> samples) { return SearchIndex(std::move(samples)); }

std::vector<Neighbor> query(const SearchIndex& index, const Descriptor& probe, int k, DistanceKind dist) {
  if (k < 1 || std::size_t(k) > index.size()) {
    throw Error(ErrorKind::KOutOfRange,
                "k = " + std::to_string(k) + " with index size " + std::to_string(index.size()));
  }
  if (probe.values.size() != index.dimension()) {
    throw Error(ErrorKind::LengthMismatch, "probe length " + std::to_string(probe.values.size()) +
                                               " vs index " + std::to_string(index.dimension()));
  }

  std::vector<Neighbor> all;
  all.reserve(index.size());
  const auto& samples = index.samples();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    try {
      all.push_back({samples[i].sample_id, distance(dist, probe.values, samples[i].descriptor.values), i});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::UndefinedDistance) throw;
    }
  }
  if (all.size() < std::size_t(k)) {
    throw Error(ErrorKind::DegenerateQuery, "only " + std::to_string(all.size()) +
                                                " samples have a defined " +
                                                std::string(to_token(dist)) + " distance to the probe");
  }
  const auto closer = [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.position < b.position);
  };
  std::partial_sort(all.begin(), all.begin() + k, all.end(), closer);
  all.resize(std::size_t(k));
  return all;
}

int classify(const std::vector<Neighbor>& neighbors, const SearchIndex& index) {
  if (neighbors.empty()) throw Error(ErrorKind::EmptyNeighborList, "nothing to vote on");
  std::size_t positives = 0;
  for (const auto& n : neighbors) positives += index.samples().at(n.position).label == 1;
  const std::size_t negatives = neighbors.size() - positives;
  if (positives != negatives) return positives > negatives ? 1 : 0;
  const auto nearest = std::min_element(neighbors.begin(), neighbors.end(), [](const auto& a, const auto& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.position < b.position);
  });
  return index.samples().at(nearest->position).label;
}

std::vector<int> classify_all(const SearchIndex& index, const std::vector<Descriptor>& probes, int k,
                              DistanceKind dist, int threads) {
  std::vector<int> labels(probes.size());
  parallel_for(probes.size(), threads,
               [&](std::size_t i) { labels[i] = classify(query(index, probes[i], k, dist), index); });
  return labels;
}

}  // namespace histo
