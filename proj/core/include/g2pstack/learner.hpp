#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "g2pstack/ib1.hpp"
#include "g2pstack/igtree.hpp"
#include "g2pstack/maxent.hpp"
#include "g2pstack/tree_rules.hpp"

namespace g2p {

enum class LearnerKind { IB1IG, IGTree, TreeRules, MaxEnt };

LearnerKind learner_kind_from_name(const std::string& name);
std::string learner_name(LearnerKind kind);

struct LearnerParams {
  int k = 1;                      // ib1ig neighborhood size
  bool plain_ig = false;          // igtree: order features by raw IG
  int gis_max_iterations = 100;   // maxent
  double gis_tolerance = 1e-4;    // maxent
};

/// One of the four learners behind a uniform train/classify/save contract.
class TrainedModel {
 public:
  static TrainedModel train(LearnerKind kind, const std::vector<Instance>& instances,
                            const InstanceSchema& schema, const LearnerParams& params = {});

  LearnerKind kind() const { return kind_; }
  std::string classify(const std::vector<std::string>& features) const;

  void save(std::ostream& out) const;
  static TrainedModel load(std::istream& in);

  const IB1Model& as_ib1() const;
  const IGTreeModel& as_igtree() const;
  const RuleListModel& as_rules() const;
  const MaxEntModel& as_maxent() const;

  TrainedModel(LearnerKind kind, IB1Model model);
  TrainedModel(LearnerKind kind, IGTreeModel model);
  TrainedModel(LearnerKind kind, RuleListModel model);
  TrainedModel(LearnerKind kind, MaxEntModel model);

 private:
  LearnerKind kind_ = LearnerKind::IB1IG;
  std::variant<IB1Model, IGTreeModel, RuleListModel, MaxEntModel> model_;
};

}  // namespace g2p
