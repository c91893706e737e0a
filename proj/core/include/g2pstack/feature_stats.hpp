#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "g2pstack/instances.hpp"

namespace g2p {

/// String interner with stable insertion-order ids.
class SymbolTable {
 public:
  int intern(const std::string& s) {
    auto [it, inserted] = ids_.emplace(s, static_cast<int>(names_.size()));
    if (inserted) names_.push_back(s);
    return it->second;
  }
  int find(const std::string& s) const {
    auto it = ids_.find(s);
    return it == ids_.end() ? -1 : it->second;
  }
  const std::string& name(int id) const { return names_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return names_.size(); }

 private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> names_;
};

/// Integer-coded training set shared by the learner implementations.
struct InternedDataset {
  SymbolTable values;
  SymbolTable classes;
  int width = 0;
  std::vector<int> features;        // row-major, size() * width
  std::vector<int> labels;          // one per row
  std::vector<std::int64_t> class_counts;

  std::size_t size() const { return labels.size(); }
  const int* row(std::size_t r) const {
    return features.data() + r * static_cast<std::size_t>(width);
  }
};

InternedDataset intern_dataset(const std::vector<Instance>& instances, int expected_width);

/// Shannon entropy in bits of a count vector.
double entropy_bits(const std::vector<std::int64_t>& counts);

/// Information gain ratio of one feature: IG(f)/SI(f), with 0 for constant
/// features (SI = 0). Always in [0, 1].
double gain_ratio(const std::vector<Instance>& instances, int feature);

/// Plain information gain of one feature, in bits.
double information_gain(const std::vector<Instance>& instances, int feature);

/// Per-feature weights over an interned dataset. `plain_ig` switches from
/// gain ratio to raw information gain.
std::vector<double> feature_weights(const InternedDataset& data, bool plain_ig = false);

/// Deterministic class argmax: highest score, ties resolved by global class
/// frequency (descending) then class symbol (ascending). Returns a class id.
int argmax_class(const std::vector<double>& scores, const std::vector<std::int64_t>& class_counts,
                 const SymbolTable& classes);

}  // namespace g2p
