#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "g2pstack/feature_stats.hpp"
#include "g2pstack/instances.hpp"

namespace g2p {

/// Decision-tree compression of the instance base. Features are consumed in
/// one global order of descending weight; every node carries the majority
/// class of the training instances that reach it.
class IGTreeModel {
 public:
  /// `plain_ig` orders features by raw information gain instead of gain ratio.
  static IGTreeModel train(const std::vector<Instance>& instances, const InstanceSchema& schema,
                           bool plain_ig = false);

  std::string classify(const std::vector<std::string>& features) const;

  const std::vector<int>& feature_order() const { return feature_order_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t node_count() const { return nodes_.size(); }

  void save(std::ostream& out) const;
  static IGTreeModel load(std::istream& in);

 private:
  struct Node {
    int default_class = 0;
    std::map<int, int> arcs;  // value id -> node index; empty means leaf
  };

  void build(const InternedDataset& data, std::vector<std::uint32_t>& rows, int node, int depth);

  int width_ = 0;
  SymbolTable values_;
  SymbolTable classes_;
  std::vector<std::int64_t> class_counts_;
  std::vector<double> weights_;
  std::vector<int> feature_order_;
  std::vector<Node> nodes_;  // nodes_[0] is the root
};

}  // namespace g2p
