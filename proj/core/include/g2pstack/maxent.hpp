#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "g2pstack/feature_stats.hpp"
#include "g2pstack/instances.hpp"

namespace g2p {

/// Conditional maximum-entropy classifier over symbolic features, trained by
/// Generalized Iterative Scaling. Indicator predicates fire on (feature
/// position, value, class) triples observed in training; a slack predicate
/// pads every (instance, class) pair to exactly `correction_constant` active
/// predicates.
class MaxEntModel {
 public:
  static MaxEntModel train(const std::vector<Instance>& instances, const InstanceSchema& schema,
                           int max_iterations = 100, double tolerance = 1e-4);

  std::string classify(const std::vector<std::string>& features) const;

  /// Class posteriors for a query, sorted by class symbol.
  std::vector<std::pair<std::string, double>> posterior(
      const std::vector<std::string>& features) const;

  int correction_constant() const { return correction_constant_; }
  int iterations_run() const { return iterations_run_; }
  std::size_t predicate_count() const { return predicates_.size(); }

  /// Mean training log-likelihood before any update, then after each
  /// iteration. Non-decreasing by the GIS convergence guarantee.
  const std::vector<double>& log_likelihood_history() const { return ll_history_; }

  /// |model expectation - empirical expectation| per predicate (slack last)
  /// at the final weights, in normalized per-instance units. Near zero at
  /// convergence. Only available on freshly trained models.
  std::vector<double> expectation_gaps() const;

  void save(std::ostream& out) const;
  static MaxEntModel load(std::istream& in);

 private:
  struct Predicate {
    int pos = 0;
    int value = 0;
    int cls = 0;
    double lambda = 0.0;
  };

  std::vector<int> intern_query(const std::vector<std::string>& features) const;
  std::vector<double> class_scores(const std::vector<int>& query) const;
  static void softmax_inplace(std::vector<double>& scores);
  void rebuild_lookup();

  int width_ = 0;
  int correction_constant_ = 0;
  int iterations_run_ = 0;
  double lambda_slack_ = 0.0;
  SymbolTable values_;
  SymbolTable classes_;
  std::vector<std::int64_t> class_counts_;
  std::vector<Predicate> predicates_;
  std::vector<std::map<int, std::vector<int>>> lookup_;  // [pos][value id] -> predicate ids
  std::vector<double> ll_history_;

  // Training summary kept for expectation_gaps(); not serialized.
  std::vector<double> empirical_;          // per predicate, slack last
  std::vector<std::vector<int>> train_rows_;
  std::vector<std::int64_t> row_mult_;
};

}  // namespace g2p
