#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "g2pstack/feature_stats.hpp"
#include "g2pstack/instances.hpp"

namespace g2p {

/// Memory-based classifier with information-gain-ratio feature weighting.
/// Training stores the deduplicated instance base with class frequencies;
/// classification returns the majority class over all instances at the k
/// smallest distinct weighted-overlap distances.
class IB1Model {
 public:
  static IB1Model train(const std::vector<Instance>& instances, const InstanceSchema& schema,
                        int k = 1);

  std::string classify(const std::vector<std::string>& features) const;

  int k() const { return k_; }
  int width() const { return width_; }
  std::size_t stored_count() const { return row_classes_.size(); }
  const std::vector<double>& weights() const { return weights_; }

  /// Stored class counts for an exact feature vector (empty if not stored).
  std::vector<std::pair<std::string, std::int64_t>> counts_for(
      const std::vector<std::string>& features) const;

  void save(std::ostream& out) const;
  static IB1Model load(std::istream& in);

 private:
  struct VecHash {
    std::size_t operator()(const std::vector<int>& v) const {
      std::size_t h = 0xcbf29ce484222325ULL;
      for (int x : v) {
        h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ULL;
        h *= 0x100000001b3ULL;
      }
      return h;
    }
  };

  std::vector<int> intern_query(const std::vector<std::string>& features) const;
  int classify_ids(const std::vector<int>& query) const;

  void build_pivot_buckets();

  int k_ = 1;
  int width_ = 0;
  SymbolTable values_;
  SymbolTable classes_;
  std::vector<std::int64_t> class_counts_;
  std::vector<double> weights_;
  double min_weight_ = 0.0;
  std::vector<int> rows_;  // row-major distinct feature vectors
  std::vector<std::vector<std::pair<int, std::int64_t>>> row_classes_;  // sorted by class id
  std::unordered_map<std::vector<int>, int, VecHash> index_;

  // Rows grouped by their value at the highest-weight feature. Any row in a
  // non-matching group is at least pivot_weight_ away, so whole groups prune
  // once the k-th distance bound drops below that.
  int pivot_feature_ = 0;
  double pivot_weight_ = 0.0;
  std::unordered_map<int, std::vector<int>> pivot_buckets_;

  // Answer memo; copies of a model share it (same model, same answers).
  struct Cache {
    std::mutex mutex;
    std::unordered_map<std::vector<int>, int, VecHash> results;
  };
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

}  // namespace g2p
