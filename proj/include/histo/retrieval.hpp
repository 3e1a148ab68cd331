#ifndef HISTO_RETRIEVAL_HPP
#define HISTO_RETRIEVAL_HPP

#include "histo/descriptors.hpp"
#include "histo/distances.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace histo {

struct LabeledSample {
  std::string sample_id;
  std::string patient_id;
  int label = 0;  ///< 0 = negative/benign, 1 = positive/malignant
  Descriptor descriptor;
};

struct Neighbor {
  std::string sample_id;
  double distance = 0.0;
  std::size_t position = 0;  ///< index into SearchIndex::samples()
};

/// Flat brute-force index. Sample order defines tie-breaking.
class SearchIndex {
 public:
  explicit SearchIndex(std::vector<LabeledSample> samples);

  const std::vector<LabeledSample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  DescriptorKind kind() const { return samples_.front().descriptor.kind; }
  ChannelMode mode() const { return samples_.front().descriptor.mode; }
  Eigen::Index dimension() const { return samples_.front().descriptor.values.size(); }

  const LabeledSample& at(const std::string& sample_id) const;

 private:
  std::vector<LabeledSample> samples_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

SearchIndex build_index(std::vector<LabeledSample> samples);

/// Exact k nearest neighbours, ascending by distance, ties broken by index position.
/// Samples whose distance to the probe is undefined are skipped.
std::vector<Neighbor> query(const SearchIndex& index, const Descriptor& probe, int k, DistanceKind dist);

/// Majority vote; a tied vote goes to the nearest neighbour's label.
int classify(const std::vector<Neighbor>& neighbors, const SearchIndex& index);

/// query + classify for many probes; results are in probe order.
std::vector<int> classify_all(const SearchIndex& index, const std::vector<Descriptor>& probes, int k,
                              DistanceKind dist, int threads = 1);

}  // namespace histo

#endif  // HISTO_RETRIEVAL_HPP
