#include "g2pstack/maxent.hpp"

#include <algorithm>
#include <cmath>

#include "g2pstack/error.hpp"
#include "model_text.hpp"

namespace g2p {

namespace {

struct RowKey {
  std::size_t operator()(const std::vector<int>& v) const {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (int x : v) {
      h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ULL;
      h *= 0x100000001b3ULL;
    }
    return h;
  }
};

}  // namespace

void MaxEntModel::rebuild_lookup() {
  lookup_.assign(static_cast<std::size_t>(width_), {});
  for (int j = 0; j < static_cast<int>(predicates_.size()); ++j) {
    const Predicate& p = predicates_[static_cast<std::size_t>(j)];
    lookup_[static_cast<std::size_t>(p.pos)][p.value].push_back(j);
  }
}

std::vector<int> MaxEntModel::intern_query(const std::vector<std::string>& features) const {
  if (static_cast<int>(features.size()) != width_) {
    throw ArgumentError("maxent: query has " + std::to_string(features.size()) +
                        " features, model expects " + std::to_string(width_));
  }
  std::vector<int> query(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) query[i] = values_.find(features[i]);
  return query;
}

std::vector<double> MaxEntModel::class_scores(const std::vector<int>& query) const {
  // Every class starts from the all-slack score; each active predicate
  // replaces one slack slot with its own weight.
  std::vector<double> scores(classes_.size(),
                             lambda_slack_ * static_cast<double>(correction_constant_));
  for (int pos = 0; pos < width_; ++pos) {
    const int v = query[static_cast<std::size_t>(pos)];
    if (v < 0) continue;
    auto it = lookup_[static_cast<std::size_t>(pos)].find(v);
    if (it == lookup_[static_cast<std::size_t>(pos)].end()) continue;
    for (int j : it->second) {
      const Predicate& p = predicates_[static_cast<std::size_t>(j)];
      scores[static_cast<std::size_t>(p.cls)] += p.lambda - lambda_slack_;
    }
  }
  return scores;
}

void MaxEntModel::softmax_inplace(std::vector<double>& scores) {
  double max_score = scores[0];
  for (double s : scores) max_score = std::max(max_score, s);
  double total = 0.0;
  for (double& s : scores) {
    s = std::exp(s - max_score);
    total += s;
  }
  for (double& s : scores) s /= total;
}

MaxEntModel MaxEntModel::train(const std::vector<Instance>& instances,
                               const InstanceSchema& schema, int max_iterations,
                               double tolerance) {
  if (instances.empty()) throw TrainingError("maxent: empty training set");
  if (max_iterations < 1) throw ArgumentError("maxent: max_iterations must be >= 1");

  MaxEntModel model;
  model.width_ = schema.width();
  model.correction_constant_ = model.width_ + 1;

  InternedDataset data = intern_dataset(instances, model.width_);
  const std::size_t n_classes = data.classes.size();
  const double n_total = static_cast<double>(data.size());

  // Deduplicate rows; remember per-row gold-label counts.
  std::unordered_map<std::vector<int>, std::size_t, RowKey> row_of;
  std::vector<std::map<int, std::int64_t>> row_golds;
  {
    std::vector<int> row(static_cast<std::size_t>(model.width_));
    for (std::size_t r = 0; r < data.size(); ++r) {
      row.assign(data.row(r), data.row(r) + model.width_);
      auto [it, inserted] = row_of.try_emplace(row, model.train_rows_.size());
      if (inserted) {
        model.train_rows_.push_back(row);
        model.row_mult_.push_back(0);
        row_golds.emplace_back();
      }
      ++model.row_mult_[it->second];
      ++row_golds[it->second][data.labels[r]];
    }
  }

  // Predicates: observed (position, value, class) triples, in sorted order.
  {
    std::map<std::tuple<int, int, int>, std::int64_t> observed;  // -> gold count
    for (std::size_t r = 0; r < data.size(); ++r) {
      for (int pos = 0; pos < model.width_; ++pos) {
        ++observed[{pos, data.row(r)[pos], data.labels[r]}];
      }
    }
    model.predicates_.reserve(observed.size());
    model.empirical_.reserve(observed.size() + 1);
    for (const auto& [key, count] : observed) {
      const auto& [pos, value, cls] = key;
      model.predicates_.push_back({pos, value, cls, 0.0});
      model.empirical_.push_back(static_cast<double>(count) / n_total);
    }
  }
  model.values_ = std::move(data.values);
  model.classes_ = std::move(data.classes);
  model.class_counts_ = std::move(data.class_counts);
  model.rebuild_lookup();

  const double correction = static_cast<double>(model.correction_constant_);

  // Empirical slack expectation: every gold pair activates width_ real
  // predicates (it created them), leaving exactly one slack slot.
  model.empirical_.push_back(1.0);

  // Pre-size per-row activation counts for the slack model expectation.
  std::vector<double> e_model(model.predicates_.size() + 1, 0.0);
  std::vector<double> active(n_classes, 0.0);

  auto mean_log_likelihood = [&]() {
    double ll = 0.0;
    for (std::size_t r = 0; r < model.train_rows_.size(); ++r) {
      std::vector<double> p = model.class_scores(model.train_rows_[r]);
      softmax_inplace(p);
      for (const auto& [cls, count] : row_golds[r]) {
        ll += static_cast<double>(count) * std::log(p[static_cast<std::size_t>(cls)]);
      }
    }
    return ll / n_total;
  };

  model.ll_history_.push_back(mean_log_likelihood());
  for (int iter = 0; iter < max_iterations; ++iter) {
    std::fill(e_model.begin(), e_model.end(), 0.0);
    for (std::size_t r = 0; r < model.train_rows_.size(); ++r) {
      const auto& row = model.train_rows_[r];
      const double mult = static_cast<double>(model.row_mult_[r]);
      std::vector<double> p = model.class_scores(row);
      softmax_inplace(p);
      std::fill(active.begin(), active.end(), 0.0);
      for (int pos = 0; pos < model.width_; ++pos) {
        auto it = model.lookup_[static_cast<std::size_t>(pos)].find(
            row[static_cast<std::size_t>(pos)]);
        if (it == model.lookup_[static_cast<std::size_t>(pos)].end()) continue;
        for (int j : it->second) {
          const Predicate& pred = model.predicates_[static_cast<std::size_t>(j)];
          e_model[static_cast<std::size_t>(j)] +=
              mult * p[static_cast<std::size_t>(pred.cls)];
          active[static_cast<std::size_t>(pred.cls)] += 1.0;
        }
      }
      double slack = 0.0;
      for (std::size_t c = 0; c < n_classes; ++c) slack += p[c] * (correction - active[c]);
      e_model.back() += mult * slack;
    }
    for (double& e : e_model) e /= n_total;

    double max_update = 0.0;
    for (std::size_t j = 0; j < model.predicates_.size(); ++j) {
      const double delta = std::log(model.empirical_[j] / e_model[j]) / correction;
      model.predicates_[j].lambda += delta;
      max_update = std::max(max_update, std::abs(delta));
    }
    const double slack_delta =
        std::log(model.empirical_.back() / e_model.back()) / correction;
    model.lambda_slack_ += slack_delta;
    max_update = std::max(max_update, std::abs(slack_delta));

    ++model.iterations_run_;
    model.ll_history_.push_back(mean_log_likelihood());
    if (max_update < tolerance) break;
  }
  return model;
}

std::vector<double> MaxEntModel::expectation_gaps() const {
  if (train_rows_.empty()) return {};
  const double correction = static_cast<double>(correction_constant_);
  double n_total = 0.0;
  for (auto m : row_mult_) n_total += static_cast<double>(m);

  std::vector<double> e_model(predicates_.size() + 1, 0.0);
  std::vector<double> active(classes_.size(), 0.0);
  for (std::size_t r = 0; r < train_rows_.size(); ++r) {
    const auto& row = train_rows_[r];
    const double mult = static_cast<double>(row_mult_[r]);
    std::vector<double> p = class_scores(row);
    softmax_inplace(p);
    std::fill(active.begin(), active.end(), 0.0);
    for (int pos = 0; pos < width_; ++pos) {
      auto it = lookup_[static_cast<std::size_t>(pos)].find(row[static_cast<std::size_t>(pos)]);
      if (it == lookup_[static_cast<std::size_t>(pos)].end()) continue;
      for (int j : it->second) {
        const Predicate& pred = predicates_[static_cast<std::size_t>(j)];
        e_model[static_cast<std::size_t>(j)] += mult * p[static_cast<std::size_t>(pred.cls)];
        active[static_cast<std::size_t>(pred.cls)] += 1.0;
      }
    }
    double slack = 0.0;
    for (std::size_t c = 0; c < classes_.size(); ++c) slack += p[c] * (correction - active[c]);
    e_model.back() += mult * slack;
  }
  std::vector<double> gaps(e_model.size());
  for (std::size_t j = 0; j < e_model.size(); ++j) {
    gaps[j] = std::abs(e_model[j] / n_total - empirical_[j]);
  }
  return gaps;
}

std::string MaxEntModel::classify(const std::vector<std::string>& features) const {
  std::vector<double> scores = class_scores(intern_query(features));
  return classes_.name(argmax_class(scores, class_counts_, classes_));
}

std::vector<std::pair<std::string, double>> MaxEntModel::posterior(
    const std::vector<std::string>& features) const {
  std::vector<double> p = class_scores(intern_query(features));
  softmax_inplace(p);
  std::vector<std::pair<std::string, double>> out;
  out.reserve(p.size());
  for (std::size_t c = 0; c < p.size(); ++c) {
    out.emplace_back(classes_.name(static_cast<int>(c)), p[c]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void MaxEntModel::save(std::ostream& out) const {
  detail::write_model_header(out, "maxent");
  out << "width " << width_ << '\n';
  out << "correction " << correction_constant_ << '\n';
  out << "iterations " << iterations_run_ << '\n';
  out << "slack " << format_double(lambda_slack_) << '\n';

  out << "classes " << classes_.size() << '\n';
  std::map<std::string, std::int64_t> class_rows;
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    detail::check_token(classes_.name(static_cast<int>(c)), "class symbol");
    class_rows[classes_.name(static_cast<int>(c))] = class_counts_[c];
  }
  for (const auto& [name, count] : class_rows) out << name << ' ' << count << '\n';

  std::vector<std::string> lines;
  lines.reserve(predicates_.size());
  for (const auto& p : predicates_) {
    const std::string& value = values_.name(p.value);
    const std::string& cls = classes_.name(p.cls);
    detail::check_token(value, "feature value");
    lines.push_back(std::to_string(p.pos) + " " + value + " " + cls + " " +
                    format_double(p.lambda));
  }
  std::sort(lines.begin(), lines.end());
  out << "predicates " << lines.size() << '\n';
  for (const auto& line : lines) out << line << '\n';
}

MaxEntModel MaxEntModel::load(std::istream& in) {
  const std::string kind = detail::read_model_header(in);
  if (kind != "maxent") throw ParseError("expected a maxent model, found '" + kind + "'");

  MaxEntModel model;
  model.width_ =
      static_cast<int>(detail::parse_int(detail::expect_keyword(in, "width").at(1), "width"));
  model.correction_constant_ = static_cast<int>(
      detail::parse_int(detail::expect_keyword(in, "correction").at(1), "correction"));
  model.iterations_run_ = static_cast<int>(
      detail::parse_int(detail::expect_keyword(in, "iterations").at(1), "iterations"));
  model.lambda_slack_ =
      detail::parse_double(detail::expect_keyword(in, "slack").at(1), "slack weight");

  const auto n_classes =
      detail::parse_int(detail::expect_keyword(in, "classes").at(1), "class count");
  for (long long c = 0; c < n_classes; ++c) {
    auto tokens = detail::read_tokens(in, "class row");
    if (tokens.size() != 2) throw ParseError("model file: bad class row");
    model.classes_.intern(tokens[0]);
    model.class_counts_.push_back(detail::parse_int(tokens[1], "class count"));
  }

  const auto n_preds =
      detail::parse_int(detail::expect_keyword(in, "predicates").at(1), "predicate count");
  for (long long j = 0; j < n_preds; ++j) {
    auto tokens = detail::read_tokens(in, "predicate row");
    if (tokens.size() != 4) throw ParseError("model file: bad predicate row");
    Predicate p;
    p.pos = static_cast<int>(detail::parse_int(tokens[0], "predicate position"));
    if (p.pos < 0 || p.pos >= model.width_) {
      throw ParseError("model file: predicate position out of range");
    }
    p.value = model.values_.intern(tokens[1]);
    p.cls = model.classes_.find(tokens[2]);
    if (p.cls < 0) throw ParseError("model file: predicate uses undeclared class '" + tokens[2] + "'");
    p.lambda = detail::parse_double(tokens[3], "predicate weight");
    model.predicates_.push_back(p);
  }
  model.rebuild_lookup();
  model.empirical_.clear();
  return model;
}

}  // namespace g2p
