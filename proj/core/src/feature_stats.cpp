#include "g2pstack/feature_stats.hpp"

#include <cmath>

#include "g2pstack/error.hpp"

namespace g2p {

InternedDataset intern_dataset(const std::vector<Instance>& instances, int expected_width) {
  InternedDataset data;
  data.width = expected_width;
  data.features.reserve(instances.size() * static_cast<std::size_t>(expected_width));
  data.labels.reserve(instances.size());
  for (const auto& inst : instances) {
    if (static_cast<int>(inst.features.size()) != expected_width) {
      throw ArgumentError("instance has " + std::to_string(inst.features.size()) +
                          " features, schema expects " + std::to_string(expected_width));
    }
    for (const auto& v : inst.features) data.features.push_back(data.values.intern(v));
    data.labels.push_back(data.classes.intern(inst.label));
  }
  data.class_counts.assign(data.classes.size(), 0);
  for (int label : data.labels) ++data.class_counts[static_cast<std::size_t>(label)];
  return data;
}

double entropy_bits(const std::vector<std::int64_t>& counts) {
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) return 0.0;
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

namespace {

struct FeatureSplit {
  double ig = 0.0;  // information gain, bits
  double si = 0.0;  // split information, bits
};

FeatureSplit split_stats(const InternedDataset& data, int feature) {
  const std::size_t n = data.size();
  const std::size_t n_classes = data.classes.size();
  // value id -> per-class counts
  std::unordered_map<int, std::vector<std::int64_t>> by_value;
  for (std::size_t r = 0; r < n; ++r) {
    const int v = data.row(r)[feature];
    auto [it, inserted] = by_value.try_emplace(v);
    if (inserted) it->second.assign(n_classes, 0);
    ++it->second[static_cast<std::size_t>(data.labels[r])];
  }
  const double h_class = entropy_bits(data.class_counts);
  double h_cond = 0.0;
  std::vector<std::int64_t> value_counts;
  value_counts.reserve(by_value.size());
  for (const auto& [v, counts] : by_value) {
    std::int64_t total = 0;
    for (auto c : counts) total += c;
    value_counts.push_back(total);
    h_cond += (static_cast<double>(total) / static_cast<double>(n)) * entropy_bits(counts);
  }
  FeatureSplit out;
  out.ig = h_class - h_cond;
  out.si = entropy_bits(value_counts);
  return out;
}

InternedDataset intern_single_feature(const std::vector<Instance>& instances, int feature) {
  if (instances.empty()) throw ArgumentError("gain ratio needs a non-empty instance list");
  InternedDataset data;
  data.width = 1;
  for (const auto& inst : instances) {
    if (feature < 0 || static_cast<std::size_t>(feature) >= inst.features.size()) {
      throw ArgumentError("feature index " + std::to_string(feature) + " out of range");
    }
    data.features.push_back(data.values.intern(inst.features[static_cast<std::size_t>(feature)]));
    data.labels.push_back(data.classes.intern(inst.label));
  }
  data.class_counts.assign(data.classes.size(), 0);
  for (int label : data.labels) ++data.class_counts[static_cast<std::size_t>(label)];
  return data;
}

}  // namespace

double gain_ratio(const std::vector<Instance>& instances, int feature) {
  const auto data = intern_single_feature(instances, feature);
  const auto stats = split_stats(data, 0);
  if (stats.si <= 0.0) return 0.0;
  double ratio = stats.ig / stats.si;
  if (ratio < 0.0) ratio = 0.0;  // guard against -0 noise from cancellation
  return ratio;
}

double information_gain(const std::vector<Instance>& instances, int feature) {
  const auto data = intern_single_feature(instances, feature);
  return split_stats(data, 0).ig;
}

std::vector<double> feature_weights(const InternedDataset& data, bool plain_ig) {
  std::vector<double> weights(static_cast<std::size_t>(data.width), 0.0);
  for (int f = 0; f < data.width; ++f) {
    const auto stats = split_stats(data, f);
    if (plain_ig) {
      weights[static_cast<std::size_t>(f)] = stats.ig > 0.0 ? stats.ig : 0.0;
    } else {
      weights[static_cast<std::size_t>(f)] =
          stats.si <= 0.0 ? 0.0 : std::max(0.0, stats.ig / stats.si);
    }
  }
  return weights;
}

int argmax_class(const std::vector<double>& scores, const std::vector<std::int64_t>& class_counts,
                 const SymbolTable& classes) {
  int best = -1;
  for (int c = 0; c < static_cast<int>(scores.size()); ++c) {
    if (best < 0) {
      best = c;
      continue;
    }
    const auto cb = static_cast<std::size_t>(best);
    const auto cc = static_cast<std::size_t>(c);
    if (scores[cc] > scores[cb]) {
      best = c;
    } else if (scores[cc] == scores[cb]) {
      if (class_counts[cc] > class_counts[cb] ||
          (class_counts[cc] == class_counts[cb] && classes.name(c) < classes.name(best))) {
        best = c;
      }
    }
  }
  return best;
}

}  // namespace g2p
