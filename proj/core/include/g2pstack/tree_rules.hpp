#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "g2pstack/feature_stats.hpp"
#include "g2pstack/instances.hpp"

namespace g2p {

class DecisionTree;
class RuleListModel;
struct TreeRulesDetail;
TreeRulesDetail train_tree_rules_detail(const std::vector<Instance>& instances,
                                        const InstanceSchema& schema);

/// Gain-ratio decision tree with the best remaining feature chosen per node.
/// Kept around after rule conversion so the rule list can be checked against
/// the tree it came from.
class DecisionTree {
 public:
  static DecisionTree train(const std::vector<Instance>& instances, const InstanceSchema& schema);

  std::string classify(const std::vector<std::string>& features) const;
  std::size_t node_count() const { return nodes_.size(); }

 private:
  friend TreeRulesDetail train_tree_rules_detail(const std::vector<Instance>&,
                                                 const InstanceSchema&);
  struct Node {
    int feature = -1;  // -1 marks a leaf
    int majority_class = 0;
    std::map<int, int> arcs;  // value id -> node index
  };

  void build(const InternedDataset& data, std::vector<std::uint32_t>& rows, int node,
             std::vector<bool>& used);

  int width_ = 0;
  SymbolTable values_;
  SymbolTable classes_;
  std::vector<std::int64_t> class_counts_;
  std::vector<Node> nodes_;
};

/// One attribute test: the feature value must be in `values`.
struct RuleCondition {
  int feature = 0;
  std::vector<std::string> values;  // sorted, non-empty
};

/// An ordered production rule with its training statistics. The lift is the
/// Laplace-corrected accuracy (covered - misclassified + 1) / (covered + 2)
/// divided by the prior probability of the predicted class.
struct ProductionRule {
  std::vector<RuleCondition> conditions;  // sorted by feature index
  std::string klass;
  std::int64_t covered = 0;
  std::int64_t misclassified = 0;
  double lift = 0.0;

  bool matches(const std::vector<std::string>& features) const;
};

/// Ordered rule list: descending lift, ties by descending coverage, then
/// creation order. Classification returns the first matching rule's class.
class RuleListModel {
 public:
  static RuleListModel train(const std::vector<Instance>& instances, const InstanceSchema& schema);

  std::string classify(const std::vector<std::string>& features) const;

  const std::vector<ProductionRule>& rules() const { return rules_; }
  const std::string& default_class() const { return default_class_; }

  void save(std::ostream& out) const;
  static RuleListModel load(std::istream& in);

 private:
  friend TreeRulesDetail train_tree_rules_detail(const std::vector<Instance>&,
                                                 const InstanceSchema&);
  std::vector<ProductionRule> rules_;
  std::string default_class_;
};

/// Rule model together with the unconverted tree, for diagnostics and tests.
struct TreeRulesDetail {
  RuleListModel model;
  DecisionTree tree;
};

/// Display names for window features: focus `f`, context `f-3`..`f+3`,
/// then any extra schema features by their declared names.
std::vector<std::string> window_feature_names(const InstanceSchema& schema,
                                              const std::string& stem = "f");

/// Render one rule in the production-rule display style:
///   (covered/misclassified, lift L)
///   f = x
///   f+1 in {a, b}
///    -> class y  [accuracy]
std::string render_rule(const ProductionRule& rule, const std::vector<std::string>& feature_names);
std::string render_rules(const RuleListModel& model, const std::vector<std::string>& feature_names);

}  // namespace g2p
