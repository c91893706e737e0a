#include "g2pstack/igtree.hpp"

#include <algorithm>
#include <numeric>

#include "g2pstack/error.hpp"
#include "model_text.hpp"

namespace g2p {

namespace {

int majority_class(const InternedDataset& data, const std::vector<std::uint32_t>& rows,
                   const std::vector<std::int64_t>& global_counts, const SymbolTable& classes) {
  std::vector<double> local(global_counts.size(), 0.0);
  for (auto r : rows) local[static_cast<std::size_t>(data.labels[r])] += 1.0;
  return argmax_class(local, global_counts, classes);
}

}  // namespace

IGTreeModel IGTreeModel::train(const std::vector<Instance>& instances,
                               const InstanceSchema& schema, bool plain_ig) {
  if (instances.empty()) throw TrainingError("igtree: empty training set");

  IGTreeModel model;
  model.width_ = schema.width();
  InternedDataset data = intern_dataset(instances, model.width_);
  model.weights_ = feature_weights(data, plain_ig);

  model.feature_order_.resize(static_cast<std::size_t>(model.width_));
  std::iota(model.feature_order_.begin(), model.feature_order_.end(), 0);
  std::stable_sort(model.feature_order_.begin(), model.feature_order_.end(),
                   [&](int a, int b) {
                     return model.weights_[static_cast<std::size_t>(a)] >
                            model.weights_[static_cast<std::size_t>(b)];
                   });

  std::vector<std::uint32_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0u);
  model.nodes_.emplace_back();
  model.build(data, rows, 0, 0);

  model.values_ = std::move(data.values);
  model.classes_ = std::move(data.classes);
  model.class_counts_ = std::move(data.class_counts);
  return model;
}

void IGTreeModel::build(const InternedDataset& data, std::vector<std::uint32_t>& rows, int node,
                        int depth) {
  nodes_[static_cast<std::size_t>(node)].default_class =
      majority_class(data, rows, data.class_counts, data.classes);

  bool pure = true;
  for (auto r : rows) {
    if (data.labels[r] != data.labels[rows[0]]) {
      pure = false;
      break;
    }
  }
  if (pure || depth >= width_) return;

  const int feature = feature_order_[static_cast<std::size_t>(depth)];
  std::map<int, std::vector<std::uint32_t>> partition;
  for (auto r : rows) partition[data.row(r)[feature]].push_back(r);
  rows.clear();
  rows.shrink_to_fit();

  for (auto& [value, subset] : partition) {
    const int child = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[static_cast<std::size_t>(node)].arcs.emplace(value, child);
    build(data, subset, child, depth + 1);
  }
}

std::string IGTreeModel::classify(const std::vector<std::string>& features) const {
  if (static_cast<int>(features.size()) != width_) {
    throw ArgumentError("igtree: query has " + std::to_string(features.size()) +
                        " features, model expects " + std::to_string(width_));
  }
  int node = 0;
  for (int depth = 0; depth < width_; ++depth) {
    const Node& n = nodes_[static_cast<std::size_t>(node)];
    if (n.arcs.empty()) break;  // leaf
    const int feature = feature_order_[static_cast<std::size_t>(depth)];
    const int value = values_.find(features[static_cast<std::size_t>(feature)]);
    auto it = value >= 0 ? n.arcs.find(value) : n.arcs.end();
    if (it == n.arcs.end()) return classes_.name(n.default_class);  // unseen value
    node = it->second;
  }
  return classes_.name(nodes_[static_cast<std::size_t>(node)].default_class);
}

void IGTreeModel::save(std::ostream& out) const {
  detail::write_model_header(out, "igtree");
  out << "width " << width_ << '\n';

  out << "order";
  for (int f : feature_order_) out << ' ' << f;
  out << '\n';
  out << "weights";
  for (double w : weights_) out << ' ' << format_double(w);
  out << '\n';

  out << "classes " << classes_.size() << '\n';
  std::map<std::string, std::int64_t> class_rows;
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    detail::check_token(classes_.name(static_cast<int>(c)), "class symbol");
    class_rows[classes_.name(static_cast<int>(c))] = class_counts_[c];
  }
  for (const auto& [name, count] : class_rows) out << name << ' ' << count << '\n';

  // Canonical node numbering: preorder with arcs visited by value symbol.
  std::vector<int> order;       // canonical position -> original index
  std::vector<int> canonical(nodes_.size(), -1);
  std::vector<int> stack = {0};
  while (!stack.empty()) {
    const int node = stack.back();
    stack.pop_back();
    canonical[static_cast<std::size_t>(node)] = static_cast<int>(order.size());
    order.push_back(node);
    std::vector<std::pair<std::string, int>> arcs;
    for (const auto& [value, child] : nodes_[static_cast<std::size_t>(node)].arcs) {
      arcs.emplace_back(values_.name(value), child);
    }
    std::sort(arcs.begin(), arcs.end());
    for (auto it = arcs.rbegin(); it != arcs.rend(); ++it) stack.push_back(it->second);
  }

  out << "nodes " << order.size() << '\n';
  for (int node : order) {
    const Node& n = nodes_[static_cast<std::size_t>(node)];
    out << classes_.name(n.default_class) << ' ' << n.arcs.size();
    std::vector<std::pair<std::string, int>> arcs;
    for (const auto& [value, child] : n.arcs) {
      detail::check_token(values_.name(value), "feature value");
      arcs.emplace_back(values_.name(value), canonical[static_cast<std::size_t>(child)]);
    }
    std::sort(arcs.begin(), arcs.end());
    for (const auto& [value, child] : arcs) out << ' ' << value << ' ' << child;
    out << '\n';
  }
}

IGTreeModel IGTreeModel::load(std::istream& in) {
  const std::string kind = detail::read_model_header(in);
  if (kind != "igtree") throw ParseError("expected an igtree model, found '" + kind + "'");

  IGTreeModel model;
  model.width_ =
      static_cast<int>(detail::parse_int(detail::expect_keyword(in, "width").at(1), "width"));

  auto otokens = detail::expect_keyword(in, "order");
  if (static_cast<int>(otokens.size()) != model.width_ + 1) {
    throw ParseError("model file: feature order length mismatch");
  }
  for (int f = 0; f < model.width_; ++f) {
    model.feature_order_.push_back(
        static_cast<int>(detail::parse_int(otokens[static_cast<std::size_t>(f) + 1], "order")));
  }
  auto wtokens = detail::expect_keyword(in, "weights");
  if (static_cast<int>(wtokens.size()) != model.width_ + 1) {
    throw ParseError("model file: weight count mismatch");
  }
  for (int f = 0; f < model.width_; ++f) {
    model.weights_.push_back(
        detail::parse_double(wtokens[static_cast<std::size_t>(f) + 1], "weight"));
  }

  const auto n_classes =
      detail::parse_int(detail::expect_keyword(in, "classes").at(1), "class count");
  for (long long c = 0; c < n_classes; ++c) {
    auto tokens = detail::read_tokens(in, "class row");
    if (tokens.size() != 2) throw ParseError("model file: bad class row");
    model.classes_.intern(tokens[0]);
    model.class_counts_.push_back(detail::parse_int(tokens[1], "class count"));
  }

  const auto n_nodes = detail::parse_int(detail::expect_keyword(in, "nodes").at(1), "node count");
  model.nodes_.resize(static_cast<std::size_t>(n_nodes));
  for (long long i = 0; i < n_nodes; ++i) {
    auto tokens = detail::read_tokens(in, "node row");
    if (tokens.size() < 2) throw ParseError("model file: bad node row");
    Node& node = model.nodes_[static_cast<std::size_t>(i)];
    const int cls = model.classes_.find(tokens[0]);
    if (cls < 0) throw ParseError("model file: node uses undeclared class '" + tokens[0] + "'");
    node.default_class = cls;
    const auto n_arcs = detail::parse_int(tokens[1], "arc count");
    if (tokens.size() != 2 + static_cast<std::size_t>(n_arcs) * 2) {
      throw ParseError("model file: node row length mismatch");
    }
    for (long long a = 0; a < n_arcs; ++a) {
      const int value = model.values_.intern(tokens[2 + static_cast<std::size_t>(a) * 2]);
      const int child = static_cast<int>(
          detail::parse_int(tokens[3 + static_cast<std::size_t>(a) * 2], "child index"));
      if (child < 0 || child >= static_cast<int>(n_nodes)) {
        throw ParseError("model file: node child index out of range");
      }
      node.arcs.emplace(value, child);
    }
  }
  return model;
}

}  // namespace g2p
