#include "g2pstack/learner.hpp"

#include <istream>
#include <ostream>

#include "g2pstack/error.hpp"
#include "model_text.hpp"

namespace g2p {

LearnerKind learner_kind_from_name(const std::string& name) {
  if (name == "ib1ig") return LearnerKind::IB1IG;
  if (name == "igtree") return LearnerKind::IGTree;
  if (name == "rules") return LearnerKind::TreeRules;
  if (name == "maxent") return LearnerKind::MaxEnt;
  throw ArgumentError("unknown learner '" + name + "' (expected ib1ig|igtree|rules|maxent)");
}

std::string learner_name(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::IB1IG: return "ib1ig";
    case LearnerKind::IGTree: return "igtree";
    case LearnerKind::TreeRules: return "rules";
    case LearnerKind::MaxEnt: return "maxent";
  }
  throw InternalError("unhandled learner kind");
}

TrainedModel::TrainedModel(LearnerKind kind, IB1Model model)
    : kind_(kind), model_(std::move(model)) {}
TrainedModel::TrainedModel(LearnerKind kind, IGTreeModel model)
    : kind_(kind), model_(std::move(model)) {}
TrainedModel::TrainedModel(LearnerKind kind, RuleListModel model)
    : kind_(kind), model_(std::move(model)) {}
TrainedModel::TrainedModel(LearnerKind kind, MaxEntModel model)
    : kind_(kind), model_(std::move(model)) {}

TrainedModel TrainedModel::train(LearnerKind kind, const std::vector<Instance>& instances,
                                 const InstanceSchema& schema, const LearnerParams& params) {
  switch (kind) {
    case LearnerKind::IB1IG:
      return {kind, IB1Model::train(instances, schema, params.k)};
    case LearnerKind::IGTree:
      return {kind, IGTreeModel::train(instances, schema, params.plain_ig)};
    case LearnerKind::TreeRules:
      return {kind, RuleListModel::train(instances, schema)};
    case LearnerKind::MaxEnt:
      return {kind, MaxEntModel::train(instances, schema, params.gis_max_iterations,
                                       params.gis_tolerance)};
  }
  throw InternalError("unhandled learner kind");
}

std::string TrainedModel::classify(const std::vector<std::string>& features) const {
  return std::visit([&](const auto& model) { return model.classify(features); }, model_);
}

void TrainedModel::save(std::ostream& out) const {
  std::visit([&](const auto& model) { model.save(out); }, model_);
}

TrainedModel TrainedModel::load(std::istream& in) {
  // Peek at the header kind, then delegate to the concrete loader.
  const auto start = in.tellg();
  const std::string kind = detail::read_model_header(in);
  in.seekg(start);
  if (kind == "ib1ig") return {LearnerKind::IB1IG, IB1Model::load(in)};
  if (kind == "igtree") return {LearnerKind::IGTree, IGTreeModel::load(in)};
  if (kind == "rules") return {LearnerKind::TreeRules, RuleListModel::load(in)};
  if (kind == "maxent") return {LearnerKind::MaxEnt, MaxEntModel::load(in)};
  throw ParseError("unknown model kind '" + kind + "'");
}

const IB1Model& TrainedModel::as_ib1() const {
  if (auto* m = std::get_if<IB1Model>(&model_)) return *m;
  throw InternalError("model is not ib1ig");
}
const IGTreeModel& TrainedModel::as_igtree() const {
  if (auto* m = std::get_if<IGTreeModel>(&model_)) return *m;
  throw InternalError("model is not igtree");
}
const RuleListModel& TrainedModel::as_rules() const {
  if (auto* m = std::get_if<RuleListModel>(&model_)) return *m;
  throw InternalError("model is not rules");
}
const MaxEntModel& TrainedModel::as_maxent() const {
  if (auto* m = std::get_if<MaxEntModel>(&model_)) return *m;
  throw InternalError("model is not maxent");
}

}  // namespace g2p
