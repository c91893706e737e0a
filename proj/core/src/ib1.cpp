#include "g2pstack/ib1.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "g2pstack/error.hpp"
#include "model_text.hpp"

namespace g2p {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

IB1Model IB1Model::train(const std::vector<Instance>& instances, const InstanceSchema& schema,
                         int k) {
  if (instances.empty()) throw TrainingError("ib1ig: empty training set");
  if (k < 1) throw ArgumentError("ib1ig: k must be >= 1");

  IB1Model model;
  model.k_ = k;
  model.width_ = schema.width();

  InternedDataset data = intern_dataset(instances, model.width_);
  model.weights_ = feature_weights(data);
  model.min_weight_ = *std::min_element(model.weights_.begin(), model.weights_.end());

  // Deduplicate feature vectors, accumulating per-class counts.
  std::unordered_map<std::vector<int>, std::map<int, std::int64_t>, VecHash> dedup;
  std::vector<int> row(static_cast<std::size_t>(model.width_));
  for (std::size_t r = 0; r < data.size(); ++r) {
    row.assign(data.row(r), data.row(r) + model.width_);
    ++dedup[row][data.labels[r]];
  }

  model.values_ = std::move(data.values);
  model.classes_ = std::move(data.classes);
  model.class_counts_ = std::move(data.class_counts);
  model.rows_.reserve(dedup.size() * static_cast<std::size_t>(model.width_));
  model.row_classes_.reserve(dedup.size());
  for (auto& [features, counts] : dedup) {
    const int idx = static_cast<int>(model.row_classes_.size());
    model.rows_.insert(model.rows_.end(), features.begin(), features.end());
    model.row_classes_.emplace_back(counts.begin(), counts.end());
    model.index_.emplace(features, idx);
  }
  model.build_pivot_buckets();
  return model;
}

void IB1Model::build_pivot_buckets() {
  pivot_feature_ = 0;
  for (int f = 1; f < width_; ++f) {
    if (weights_[static_cast<std::size_t>(f)] > weights_[static_cast<std::size_t>(pivot_feature_)]) {
      pivot_feature_ = f;
    }
  }
  pivot_weight_ = weights_.empty() ? 0.0 : weights_[static_cast<std::size_t>(pivot_feature_)];
  pivot_buckets_.clear();
  for (std::size_t r = 0; r < row_classes_.size(); ++r) {
    const int* row = rows_.data() + r * static_cast<std::size_t>(width_);
    pivot_buckets_[row[pivot_feature_]].push_back(static_cast<int>(r));
  }
}

std::vector<int> IB1Model::intern_query(const std::vector<std::string>& features) const {
  if (static_cast<int>(features.size()) != width_) {
    throw ArgumentError("ib1ig: query has " + std::to_string(features.size()) +
                        " features, model expects " + std::to_string(width_));
  }
  std::vector<int> query(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    query[i] = values_.find(features[i]);  // -1 marks values never seen in training
  }
  return query;
}

int IB1Model::classify_ids(const std::vector<int>& query) const {
  std::vector<double> votes(classes_.size(), 0.0);

  // Distance 0 can only be an exact match when every weight is positive;
  // with k = 1 the neighborhood is then exactly that stored vector.
  if (k_ == 1 && min_weight_ > 0.0) {
    auto it = index_.find(query);
    if (it != index_.end()) {
      for (const auto& [cls, count] : row_classes_[static_cast<std::size_t>(it->second)]) {
        votes[static_cast<std::size_t>(cls)] += static_cast<double>(count);
      }
      return argmax_class(votes, class_counts_, classes_);
    }
  }

  // Scan with early abandoning against the current k-th distinct distance.
  // Distances accumulate in ascending feature order; the oracle tests rely
  // on that exact summation order. The matching pivot bucket goes first so
  // the bound tightens early; non-matching buckets prune wholesale once the
  // bound drops below the pivot weight.
  std::vector<double> topk;  // ascending distinct distances, at most k_
  topk.reserve(static_cast<std::size_t>(k_) + 1);
  std::vector<std::pair<double, std::size_t>> survivors;
  const auto scan_row = [&](std::size_t r) {
    const int* row = rows_.data() + r * static_cast<std::size_t>(width_);
    const double bound = topk.size() == static_cast<std::size_t>(k_) ? topk.back() : kInf;
    double dist = 0.0;
    for (int f = 0; f < width_; ++f) {
      if (query[static_cast<std::size_t>(f)] != row[f]) {
        dist += weights_[static_cast<std::size_t>(f)];
        if (dist > bound) return;
      }
    }
    auto pos = std::lower_bound(topk.begin(), topk.end(), dist);
    if (pos == topk.end() || *pos != dist) {
      topk.insert(pos, dist);
      if (topk.size() > static_cast<std::size_t>(k_)) topk.pop_back();
    }
    survivors.emplace_back(dist, r);
  };

  const int query_pivot = query[static_cast<std::size_t>(pivot_feature_)];
  const auto matching = query_pivot >= 0 ? pivot_buckets_.find(query_pivot)
                                         : pivot_buckets_.end();
  if (matching != pivot_buckets_.end()) {
    for (int r : matching->second) scan_row(static_cast<std::size_t>(r));
  }
  const bool skip_rest = topk.size() == static_cast<std::size_t>(k_) &&
                         pivot_weight_ > topk.back();
  if (!skip_rest) {
    for (const auto& [value, bucket] : pivot_buckets_) {
      if (query_pivot >= 0 && value == query_pivot) continue;
      if (topk.size() == static_cast<std::size_t>(k_) && pivot_weight_ > topk.back()) break;
      for (int r : bucket) scan_row(static_cast<std::size_t>(r));
    }
  }

  const double final_bound = topk.empty() ? kInf : topk.back();
  for (const auto& [dist, r] : survivors) {
    if (dist > final_bound) continue;
    if (!std::binary_search(topk.begin(), topk.end(), dist)) continue;
    for (const auto& [cls, count] : row_classes_[r]) {
      votes[static_cast<std::size_t>(cls)] += static_cast<double>(count);
    }
  }
  return argmax_class(votes, class_counts_, classes_);
}

std::string IB1Model::classify(const std::vector<std::string>& features) const {
  const std::vector<int> query = intern_query(features);
  {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->results.find(query);
    if (it != cache_->results.end()) return classes_.name(it->second);
  }
  const int result = classify_ids(query);
  {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    cache_->results.emplace(query, result);
  }
  return classes_.name(result);
}

std::vector<std::pair<std::string, std::int64_t>> IB1Model::counts_for(
    const std::vector<std::string>& features) const {
  std::vector<std::pair<std::string, std::int64_t>> out;
  auto it = index_.find(intern_query(features));
  if (it == index_.end()) return out;
  for (const auto& [cls, count] : row_classes_[static_cast<std::size_t>(it->second)]) {
    out.emplace_back(classes_.name(cls), count);
  }
  return out;
}

void IB1Model::save(std::ostream& out) const {
  detail::write_model_header(out, "ib1ig");
  out << "k " << k_ << '\n';
  out << "width " << width_ << '\n';

  out << "classes " << classes_.size() << '\n';
  std::map<std::string, std::int64_t> class_rows;
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    detail::check_token(classes_.name(static_cast<int>(c)), "class symbol");
    class_rows[classes_.name(static_cast<int>(c))] = class_counts_[c];
  }
  for (const auto& [name, count] : class_rows) out << name << ' ' << count << '\n';

  out << "weights";
  for (double w : weights_) out << ' ' << format_double(w);
  out << '\n';

  std::vector<std::string> lines;
  lines.reserve(row_classes_.size());
  for (std::size_t r = 0; r < row_classes_.size(); ++r) {
    const int* row = rows_.data() + r * static_cast<std::size_t>(width_);
    std::string line;
    for (int f = 0; f < width_; ++f) {
      const std::string& v = values_.name(row[f]);
      detail::check_token(v, "feature value");
      line += v;
      line += ' ';
    }
    std::map<std::string, std::int64_t> counts;
    for (const auto& [cls, count] : row_classes_[r]) counts[classes_.name(cls)] = count;
    line += std::to_string(counts.size());
    for (const auto& [name, count] : counts) {
      line += ' ';
      line += name;
      line += ' ';
      line += std::to_string(count);
    }
    lines.push_back(std::move(line));
  }
  std::sort(lines.begin(), lines.end());
  out << "instances " << lines.size() << '\n';
  for (const auto& line : lines) out << line << '\n';
}

IB1Model IB1Model::load(std::istream& in) {
  const std::string kind = detail::read_model_header(in);
  if (kind != "ib1ig") throw ParseError("expected an ib1ig model, found '" + kind + "'");

  IB1Model model;
  model.k_ = static_cast<int>(detail::parse_int(detail::expect_keyword(in, "k").at(1), "k"));
  model.width_ =
      static_cast<int>(detail::parse_int(detail::expect_keyword(in, "width").at(1), "width"));

  const auto n_classes =
      detail::parse_int(detail::expect_keyword(in, "classes").at(1), "class count");
  for (long long c = 0; c < n_classes; ++c) {
    auto tokens = detail::read_tokens(in, "class row");
    if (tokens.size() != 2) throw ParseError("model file: bad class row");
    model.classes_.intern(tokens[0]);
    model.class_counts_.push_back(detail::parse_int(tokens[1], "class count"));
  }

  auto wtokens = detail::expect_keyword(in, "weights");
  if (static_cast<int>(wtokens.size()) != model.width_ + 1) {
    throw ParseError("model file: weight count mismatch");
  }
  for (int f = 0; f < model.width_; ++f) {
    model.weights_.push_back(detail::parse_double(wtokens[static_cast<std::size_t>(f) + 1], "weight"));
  }
  model.min_weight_ = model.weights_.empty()
                          ? 0.0
                          : *std::min_element(model.weights_.begin(), model.weights_.end());

  const auto n_rows =
      detail::parse_int(detail::expect_keyword(in, "instances").at(1), "instance count");
  for (long long r = 0; r < n_rows; ++r) {
    auto tokens = detail::read_tokens(in, "instance row");
    const std::size_t w = static_cast<std::size_t>(model.width_);
    if (tokens.size() < w + 1) throw ParseError("model file: short instance row");
    std::vector<int> row;
    row.reserve(w);
    for (std::size_t f = 0; f < w; ++f) row.push_back(model.values_.intern(tokens[f]));
    const auto n_pairs = detail::parse_int(tokens[w], "class pair count");
    if (tokens.size() != w + 1 + static_cast<std::size_t>(n_pairs) * 2) {
      throw ParseError("model file: instance row length mismatch");
    }
    std::map<int, std::int64_t> counts;
    for (long long p = 0; p < n_pairs; ++p) {
      const std::string& cls = tokens[w + 1 + static_cast<std::size_t>(p) * 2];
      const int cls_id = model.classes_.find(cls);
      if (cls_id < 0) throw ParseError("model file: instance row uses undeclared class '" + cls + "'");
      counts[cls_id] =
          detail::parse_int(tokens[w + 2 + static_cast<std::size_t>(p) * 2], "class count");
    }
    const int idx = static_cast<int>(model.row_classes_.size());
    model.rows_.insert(model.rows_.end(), row.begin(), row.end());
    model.row_classes_.emplace_back(counts.begin(), counts.end());
    model.index_.emplace(std::move(row), idx);
  }
  model.build_pivot_buckets();
  return model;
}

}  // namespace g2p
