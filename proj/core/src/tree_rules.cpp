#include "g2pstack/tree_rules.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <set>

#include "g2pstack/error.hpp"
#include "g2pstack/text.hpp"
#include "model_text.hpp"

namespace g2p {

namespace {

double laplace_error(std::int64_t covered, std::int64_t misclassified) {
  return static_cast<double>(misclassified + 1) / static_cast<double>(covered + 2);
}

double laplace_accuracy(std::int64_t covered, std::int64_t misclassified) {
  return static_cast<double>(covered - misclassified + 1) / static_cast<double>(covered + 2);
}

/// Fixed-size bitset over training rows.
class RowSet {
 public:
  RowSet() = default;
  explicit RowSet(std::size_t n, bool ones = false)
      : words_((n + 63) / 64, ones ? ~0ULL : 0ULL) {
    if (ones && n % 64 != 0 && !words_.empty()) words_.back() = (1ULL << (n % 64)) - 1;
  }
  void set(std::size_t i) { words_[i >> 6] |= 1ULL << (i & 63); }
  void intersect(const RowSet& other) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= other.words_[w];
  }
  void unite(const RowSet& other) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
  }
  std::int64_t count() const {
    std::int64_t total = 0;
    for (auto w : words_) total += std::popcount(w);
    return total;
  }
  std::int64_t count_and(const RowSet& other) const {
    std::int64_t total = 0;
    for (std::size_t w = 0; w < words_.size(); ++w) {
      total += std::popcount(words_[w] & other.words_[w]);
    }
    return total;
  }

 private:
  std::vector<std::uint64_t> words_;
};

/// Per-(feature, value) and per-class row sets for fast rule statistics.
struct RowIndex {
  std::size_t n = 0;
  std::vector<std::map<int, RowSet>> by_feature_value;
  std::vector<RowSet> by_class;

  explicit RowIndex(const InternedDataset& data) : n(data.size()) {
    by_feature_value.resize(static_cast<std::size_t>(data.width));
    for (std::size_t c = 0; c < data.classes.size(); ++c) by_class.emplace_back(n);
    for (std::size_t r = 0; r < n; ++r) {
      for (int f = 0; f < data.width; ++f) {
        auto [it, inserted] =
            by_feature_value[static_cast<std::size_t>(f)].try_emplace(data.row(r)[f], n);
        it->second.set(r);
      }
      by_class[static_cast<std::size_t>(data.labels[r])].set(r);
    }
  }
};

struct InternedCondition {
  int feature = 0;
  std::vector<int> values;  // sorted value ids

  bool operator==(const InternedCondition&) const = default;
};

struct WorkingRule {
  std::vector<InternedCondition> conditions;  // sorted by feature
  int klass = 0;
  std::int64_t covered = 0;
  std::int64_t misclassified = 0;
  std::size_t creation_order = 0;
};

RowSet coverage_of(const RowIndex& index, const std::vector<InternedCondition>& conditions,
                   int skip = -1) {
  RowSet rows(index.n, true);
  for (int i = 0; i < static_cast<int>(conditions.size()); ++i) {
    if (i == skip) continue;
    const auto& cond = conditions[static_cast<std::size_t>(i)];
    const auto& table = index.by_feature_value[static_cast<std::size_t>(cond.feature)];
    RowSet cond_rows(index.n);
    for (int v : cond.values) {
      auto it = table.find(v);
      if (it != table.end()) cond_rows.unite(it->second);
    }
    rows.intersect(cond_rows);
  }
  return rows;
}

void refresh_stats(WorkingRule& rule, const RowIndex& index) {
  const RowSet rows = coverage_of(index, rule.conditions);
  rule.covered = rows.count();
  rule.misclassified =
      rule.covered - rows.count_and(index.by_class[static_cast<std::size_t>(rule.klass)]);
}

/// Greedily remove conditions whose removal does not increase the rule's
/// Laplace-corrected error over the training set.
void simplify_rule(WorkingRule& rule, const RowIndex& index) {
  refresh_stats(rule, index);
  while (!rule.conditions.empty()) {
    double current_error = laplace_error(rule.covered, rule.misclassified);
    int best_drop = -1;
    double best_error = current_error;
    std::int64_t best_covered = 0, best_mis = 0;
    for (int i = 0; i < static_cast<int>(rule.conditions.size()); ++i) {
      const RowSet rows = coverage_of(index, rule.conditions, i);
      const std::int64_t covered = rows.count();
      const std::int64_t mis =
          covered - rows.count_and(index.by_class[static_cast<std::size_t>(rule.klass)]);
      const double err = laplace_error(covered, mis);
      if (err <= best_error && (best_drop < 0 || err < best_error)) {
        best_drop = i;
        best_error = err;
        best_covered = covered;
        best_mis = mis;
      }
    }
    if (best_drop < 0) break;
    rule.conditions.erase(rule.conditions.begin() + best_drop);
    rule.covered = best_covered;
    rule.misclassified = best_mis;
  }
}

std::string condition_key(const InternedCondition& cond) {
  std::string key = std::to_string(cond.feature) + ":";
  for (int v : cond.values) {
    key += std::to_string(v);
    key += ',';
  }
  return key;
}

std::string rule_key(const WorkingRule& rule) {
  std::string key = std::to_string(rule.klass) + "|";
  for (const auto& cond : rule.conditions) {
    key += condition_key(cond);
    key += ';';
  }
  return key;
}

/// One merge step: find two rules of the same class that are identical
/// except for the value set of a single feature, replace them by their
/// union, and report whether anything merged. Grouping is rebuilt from
/// scratch every step so keys never go stale.
bool try_one_merge(std::vector<WorkingRule>& rules, const RowIndex& index) {
  std::map<std::string, std::size_t> groups;
  for (std::size_t r = 0; r < rules.size(); ++r) {
    for (std::size_t c = 0; c < rules[r].conditions.size(); ++c) {
      std::string key = std::to_string(rules[r].klass) + "|" +
                        std::to_string(rules[r].conditions[c].feature) + "@";
      for (std::size_t o = 0; o < rules[r].conditions.size(); ++o) {
        if (o == c) continue;
        key += condition_key(rules[r].conditions[o]);
        key += ';';
      }
      auto [it, inserted] = groups.try_emplace(key, r);
      if (inserted) continue;

      WorkingRule& target = rules[it->second];
      const int feature = rules[r].conditions[c].feature;
      for (auto& cond : target.conditions) {
        if (cond.feature != feature) continue;
        std::vector<int> values = cond.values;
        values.insert(values.end(), rules[r].conditions[c].values.begin(),
                      rules[r].conditions[c].values.end());
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        cond.values = std::move(values);
        break;
      }
      refresh_stats(target, index);
      rules.erase(rules.begin() + static_cast<std::ptrdiff_t>(r));
      return true;
    }
  }
  return false;
}

/// Merge rules of the same class that are identical except for the value set
/// of a single feature. Coverage of the merged rule is the exact union.
void merge_sibling_rules(std::vector<WorkingRule>& rules, const RowIndex& index) {
  while (try_one_merge(rules, index)) {
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// DecisionTree

DecisionTree DecisionTree::train(const std::vector<Instance>& instances,
                                 const InstanceSchema& schema) {
  if (instances.empty()) throw TrainingError("tree: empty training set");
  DecisionTree tree;
  tree.width_ = schema.width();
  InternedDataset data = intern_dataset(instances, tree.width_);

  std::vector<std::uint32_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0u);
  std::vector<bool> used(static_cast<std::size_t>(tree.width_), false);
  tree.nodes_.emplace_back();
  tree.build(data, rows, 0, used);

  tree.values_ = std::move(data.values);
  tree.classes_ = std::move(data.classes);
  tree.class_counts_ = std::move(data.class_counts);
  return tree;
}

void DecisionTree::build(const InternedDataset& data, std::vector<std::uint32_t>& rows, int node,
                         std::vector<bool>& used) {
  // Majority class of the rows reaching this node.
  {
    std::vector<double> local(data.class_counts.size(), 0.0);
    for (auto r : rows) local[static_cast<std::size_t>(data.labels[r])] += 1.0;
    nodes_[static_cast<std::size_t>(node)].majority_class =
        argmax_class(local, data.class_counts, data.classes);
  }

  if (rows.size() < 2) return;
  bool pure = true;
  for (auto r : rows) {
    if (data.labels[r] != data.labels[rows[0]]) {
      pure = false;
      break;
    }
  }
  if (pure) return;

  // Best remaining feature by gain ratio over the rows at this node.
  std::vector<std::int64_t> class_here(data.class_counts.size(), 0);
  for (auto r : rows) ++class_here[static_cast<std::size_t>(data.labels[r])];
  const double h_class = entropy_bits(class_here);

  int best_feature = -1;
  double best_ratio = 0.0;
  for (int f = 0; f < width_; ++f) {
    if (used[static_cast<std::size_t>(f)]) continue;
    std::map<int, std::vector<std::int64_t>> by_value;
    for (auto r : rows) {
      auto [it, inserted] = by_value.try_emplace(data.row(r)[f]);
      if (inserted) it->second.assign(data.class_counts.size(), 0);
      ++it->second[static_cast<std::size_t>(data.labels[r])];
    }
    double h_cond = 0.0;
    std::vector<std::int64_t> value_counts;
    for (const auto& [v, counts] : by_value) {
      std::int64_t total = 0;
      for (auto c : counts) total += c;
      value_counts.push_back(total);
      h_cond += (static_cast<double>(total) / static_cast<double>(rows.size())) *
                entropy_bits(counts);
    }
    const double si = entropy_bits(value_counts);
    if (si <= 0.0) continue;
    const double ratio = (h_class - h_cond) / si;
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best_feature = f;
    }
  }
  if (best_feature < 0 || best_ratio <= 0.0) return;

  nodes_[static_cast<std::size_t>(node)].feature = best_feature;
  std::map<int, std::vector<std::uint32_t>> partition;
  for (auto r : rows) partition[data.row(r)[best_feature]].push_back(r);
  rows.clear();
  rows.shrink_to_fit();

  used[static_cast<std::size_t>(best_feature)] = true;
  for (auto& [value, subset] : partition) {
    const int child = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[static_cast<std::size_t>(node)].arcs.emplace(value, child);
    build(data, subset, child, used);
  }
  used[static_cast<std::size_t>(best_feature)] = false;
}

std::string DecisionTree::classify(const std::vector<std::string>& features) const {
  if (static_cast<int>(features.size()) != width_) {
    throw ArgumentError("tree: query width mismatch");
  }
  int node = 0;
  for (;;) {
    const Node& n = nodes_[static_cast<std::size_t>(node)];
    if (n.feature < 0) return classes_.name(n.majority_class);
    const int value = values_.find(features[static_cast<std::size_t>(n.feature)]);
    auto it = value >= 0 ? n.arcs.find(value) : n.arcs.end();
    if (it == n.arcs.end()) return classes_.name(n.majority_class);
    node = it->second;
  }
}

// ---------------------------------------------------------------------------
// RuleListModel

bool ProductionRule::matches(const std::vector<std::string>& features) const {
  for (const auto& cond : conditions) {
    const auto& v = features[static_cast<std::size_t>(cond.feature)];
    if (!std::binary_search(cond.values.begin(), cond.values.end(), v)) return false;
  }
  return true;
}

TreeRulesDetail train_tree_rules_detail(const std::vector<Instance>& instances,
                                        const InstanceSchema& schema) {
  TreeRulesDetail detail{RuleListModel{}, DecisionTree::train(instances, schema)};
  const DecisionTree& tree = detail.tree;

  InternedDataset data = intern_dataset(instances, schema.width());
  const RowIndex index(data);

  // One candidate rule per root-to-leaf path with at least one test.
  std::vector<WorkingRule> working;
  struct Frame {
    int node;
    std::vector<InternedCondition> path;
  };
  std::vector<Frame> stack;
  stack.push_back({0, {}});
  while (!stack.empty()) {
    Frame frame = std::move(stack.back());
    stack.pop_back();
    const auto& node = tree.nodes_[static_cast<std::size_t>(frame.node)];
    if (node.feature < 0) {
      if (!frame.path.empty()) {
        WorkingRule rule;
        rule.conditions = frame.path;
        std::sort(rule.conditions.begin(), rule.conditions.end(),
                  [](const auto& a, const auto& b) { return a.feature < b.feature; });
        // Tree value ids and dataset value ids coincide: both tables were
        // built from the same instance list in the same order.
        rule.klass = node.majority_class;
        working.push_back(std::move(rule));
      }
      continue;
    }
    for (auto it = node.arcs.rbegin(); it != node.arcs.rend(); ++it) {
      Frame child{it->second, frame.path};
      child.path.push_back({node.feature, {it->first}});
      stack.push_back(std::move(child));
    }
  }
  for (std::size_t i = 0; i < working.size(); ++i) working[i].creation_order = i;

  for (auto& rule : working) simplify_rule(rule, index);

  // Drop rules that lost all conditions (they duplicate the default) and
  // deduplicate identical rules, keeping the earliest.
  {
    std::vector<WorkingRule> kept;
    std::set<std::string> seen;
    for (auto& rule : working) {
      if (rule.conditions.empty()) continue;
      if (!seen.insert(rule_key(rule)).second) continue;
      kept.push_back(std::move(rule));
    }
    working = std::move(kept);
  }

  merge_sibling_rules(working, index);

  // The tree's class ids coincide with the dataset's (same input order), so
  // tree majority ids can be looked up in data.classes directly.
  const std::int64_t n = static_cast<std::int64_t>(data.size());
  std::vector<ProductionRule> rules;
  rules.reserve(working.size());
  std::vector<std::size_t> order(working.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto lift = [&](const WorkingRule& r) {
      const double prior = static_cast<double>(data.class_counts[static_cast<std::size_t>(r.klass)]) /
                           static_cast<double>(n);
      return laplace_accuracy(r.covered, r.misclassified) / prior;
    };
    const double la = lift(working[a]);
    const double lb = lift(working[b]);
    if (la != lb) return la > lb;
    if (working[a].covered != working[b].covered) return working[a].covered > working[b].covered;
    return working[a].creation_order < working[b].creation_order;
  });
  for (std::size_t idx : order) {
    const WorkingRule& w = working[idx];
    if (w.covered <= w.misclassified) continue;  // cannot beat chance, discard
    ProductionRule rule;
    for (const auto& cond : w.conditions) {
      RuleCondition out;
      out.feature = cond.feature;
      for (int v : cond.values) out.values.push_back(data.values.name(v));
      std::sort(out.values.begin(), out.values.end());
      rule.conditions.push_back(std::move(out));
    }
    rule.klass = data.classes.name(w.klass);
    rule.covered = w.covered;
    rule.misclassified = w.misclassified;
    const double prior =
        static_cast<double>(data.class_counts[static_cast<std::size_t>(w.klass)]) /
        static_cast<double>(n);
    rule.lift = laplace_accuracy(w.covered, w.misclassified) / prior;
    rules.push_back(std::move(rule));
  }

  detail.model.rules_ = std::move(rules);
  detail.model.default_class_ = data.classes.name(
      argmax_class(std::vector<double>(data.class_counts.begin(), data.class_counts.end()),
                   data.class_counts, data.classes));
  return detail;
}

RuleListModel RuleListModel::train(const std::vector<Instance>& instances,
                                   const InstanceSchema& schema) {
  return train_tree_rules_detail(instances, schema).model;
}

std::string RuleListModel::classify(const std::vector<std::string>& features) const {
  for (const auto& rule : rules_) {
    if (rule.matches(features)) return rule.klass;
  }
  return default_class_;
}

void RuleListModel::save(std::ostream& out) const {
  detail::write_model_header(out, "rules");
  detail::check_token(default_class_, "class symbol");
  out << "default " << default_class_ << '\n';
  out << "rules " << rules_.size() << '\n';
  for (const auto& rule : rules_) {
    detail::check_token(rule.klass, "class symbol");
    out << rule.klass << ' ' << rule.covered << ' ' << rule.misclassified << ' '
        << format_double(rule.lift) << ' ' << rule.conditions.size();
    for (const auto& cond : rule.conditions) {
      out << ' ' << cond.feature << ' ' << cond.values.size();
      for (const auto& v : cond.values) {
        detail::check_token(v, "feature value");
        out << ' ' << v;
      }
    }
    out << '\n';
  }
}

RuleListModel RuleListModel::load(std::istream& in) {
  const std::string kind = detail::read_model_header(in);
  if (kind != "rules") throw ParseError("expected a rules model, found '" + kind + "'");
  RuleListModel model;
  model.default_class_ = detail::expect_keyword(in, "default").at(1);
  const auto n_rules = detail::parse_int(detail::expect_keyword(in, "rules").at(1), "rule count");
  for (long long r = 0; r < n_rules; ++r) {
    auto tokens = detail::read_tokens(in, "rule row");
    if (tokens.size() < 5) throw ParseError("model file: bad rule row");
    ProductionRule rule;
    rule.klass = tokens[0];
    rule.covered = detail::parse_int(tokens[1], "covered");
    rule.misclassified = detail::parse_int(tokens[2], "misclassified");
    rule.lift = detail::parse_double(tokens[3], "lift");
    const auto n_conds = detail::parse_int(tokens[4], "condition count");
    std::size_t pos = 5;
    for (long long c = 0; c < n_conds; ++c) {
      if (pos + 1 >= tokens.size()) throw ParseError("model file: short rule row");
      RuleCondition cond;
      cond.feature = static_cast<int>(detail::parse_int(tokens[pos++], "feature index"));
      const auto n_values = detail::parse_int(tokens[pos++], "value count");
      for (long long v = 0; v < n_values; ++v) {
        if (pos >= tokens.size()) throw ParseError("model file: short rule row");
        cond.values.push_back(tokens[pos++]);
      }
      std::sort(cond.values.begin(), cond.values.end());
      rule.conditions.push_back(std::move(cond));
    }
    if (pos != tokens.size()) throw ParseError("model file: rule row length mismatch");
    model.rules_.push_back(std::move(rule));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Rendering

std::vector<std::string> window_feature_names(const InstanceSchema& schema,
                                              const std::string& stem) {
  std::vector<std::string> names;
  for (int d = -schema.left_context; d <= schema.right_context; ++d) {
    if (d == 0) {
      names.push_back(stem);
    } else {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%s%+d", stem.c_str(), d);
      names.emplace_back(buf);
    }
  }
  names.insert(names.end(), schema.extra_feature_names.begin(),
               schema.extra_feature_names.end());
  return names;
}

std::string render_rule(const ProductionRule& rule,
                        const std::vector<std::string>& feature_names) {
  std::string out = "(" + std::to_string(rule.covered) + "/" +
                    std::to_string(rule.misclassified) + ", lift " +
                    format_fixed(rule.lift, 1) + ")\n";
  for (const auto& cond : rule.conditions) {
    const std::string& name = feature_names.at(static_cast<std::size_t>(cond.feature));
    if (cond.values.size() == 1) {
      out += name + " = " + cond.values[0] + "\n";
    } else {
      out += name + " in {" + join(cond.values, ", ") + "}\n";
    }
  }
  out += " -> class " + rule.klass + "  [" +
         format_fixed(laplace_accuracy(rule.covered, rule.misclassified), 3) + "]\n";
  return out;
}

std::string render_rules(const RuleListModel& model,
                         const std::vector<std::string>& feature_names) {
  std::string out;
  for (const auto& rule : model.rules()) {
    out += render_rule(rule, feature_names);
    out += "\n";
  }
  out += "default class: " + model.default_class() + "\n";
  return out;
}

}  // namespace g2p
