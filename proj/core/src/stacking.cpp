#include "g2pstack/stacking.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "g2pstack/error.hpp"
#include "g2pstack/rng.hpp"

namespace g2p {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  Rng rng(seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xc2b2ae3d27d4eb4fULL));
  return rng.next_u64();
}

Variant other_variant(Variant v) { return v == Variant::A ? Variant::B : Variant::A; }

std::string stream_name(Variant v) { return v == Variant::A ? "pred_a" : "pred_b"; }

/// A per-position prediction column for a set of words, together with the
/// provenance needed for the leakage audit: which training words the
/// producing model saw for each covered word.
struct StreamColumn {
  std::string name;
  std::map<int, std::vector<std::string>> symbols;   // word index -> per-position
  std::map<int, int> producer;                       // word index -> producer id
  std::vector<std::vector<int>> producer_words;      // producer id -> sorted word indices

  bool excludes(int word) const {
    auto it = producer.find(word);
    if (it == producer.end()) return false;
    const auto& trained_on = producer_words[static_cast<std::size_t>(it->second)];
    return !std::binary_search(trained_on.begin(), trained_on.end(), word);
  }
};

struct FoldOutput {
  FoldScore score;
  LeakageAudit audit;
  int combiner_width = 0;
};

class PlanRunner {
 public:
  PlanRunner(const StackingPlan& plan, const PreparedCorpus& corpus, const FoldAssignment& folds)
      : plan_(plan), corpus_(corpus), folds_(folds) {
    base_schema_.pad_symbol = "=";
    if (plan_.arch == Architecture::MetaMeta &&
        (plan_.meta_learners.size() < 2 || plan_.meta_learners.size() > 8)) {
      throw ArgumentError("metameta: between 2 and 8 meta learners required");
    }
    if (plan_.inner_folds < 2) throw ArgumentError("stacking: inner_folds must be >= 2");
    if (folds_.n_folds < 2) throw ArgumentError("stacking: fold assignment needs >= 2 folds");
  }

  StackingRunResult run() {
    const int n_folds = folds_.n_folds;
    std::vector<FoldOutput> outputs(static_cast<std::size_t>(n_folds));

    const int jobs = std::max(1, std::min(plan_.jobs, n_folds));
    if (jobs == 1) {
      for (int f = 0; f < n_folds; ++f) outputs[static_cast<std::size_t>(f)] = run_fold(f);
    } else {
      std::atomic<int> next{0};
      std::vector<std::thread> workers;
      std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
      for (int t = 0; t < jobs; ++t) {
        workers.emplace_back([&, t] {
          try {
            for (;;) {
              const int f = next.fetch_add(1);
              if (f >= n_folds) break;
              outputs[static_cast<std::size_t>(f)] = run_fold(f);
            }
          } catch (...) {
            errors[static_cast<std::size_t>(t)] = std::current_exception();
          }
        });
      }
      for (auto& w : workers) w.join();
      for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }

    StackingRunResult result;
    std::vector<FoldScore> scores;
    scores.reserve(outputs.size());
    for (const auto& out : outputs) {
      scores.push_back(out.score);
      result.audit.merge(out.audit);
      result.combiner_width = std::max(result.combiner_width, out.combiner_width);
    }
    result.evaluation = aggregate(scores);
    if (result.audit.violations > 0 && !plan_.resubstitution) {
      throw InternalError("stacking leakage guard tripped: " +
                          std::to_string(result.audit.violations) + " violation(s)");
    }
    return result;
  }

 private:
  // ---- shared helpers -----------------------------------------------------

  int fold_of(std::size_t w) const {
    auto it = folds_.fold_of_word.find(corpus_.words[w].word);
    if (it == folds_.fold_of_word.end()) {
      throw ArgumentError("fold assignment is missing word '" + corpus_.words[w].word + "'");
    }
    return it->second;
  }

  /// Plain spelling-window instances for a word set and variant.
  std::vector<Instance> spelling_instances(const std::vector<int>& words, Variant v) const {
    std::vector<Instance> out;
    for (int w : words) {
      const auto& pw = corpus_.words[static_cast<std::size_t>(w)];
      for (const auto& aligned : corpus_.aligned_for(static_cast<std::size_t>(w), v)) {
        auto instances = window_sequence(pw.graphemes, aligned, base_schema_, w);
        out.insert(out.end(), std::make_move_iterator(instances.begin()),
                   std::make_move_iterator(instances.end()));
      }
    }
    return out;
  }

  std::vector<std::string> predict_positions(const TrainedModel& model,
                                             const std::vector<std::string>& symbols) const {
    std::vector<std::string> out;
    out.reserve(symbols.size());
    for (int i = 0; i < static_cast<int>(symbols.size()); ++i) {
      out.push_back(model.classify(window_at(symbols, i, base_schema_)));
    }
    return out;
  }

  TrainedModel fit_component(Variant v, const std::vector<int>& words) const {
    return TrainedModel::train(plan_.component, spelling_instances(words, v), base_schema_,
                               plan_.params);
  }

  /// Training-side per-position predictions for every word in `train`,
  /// leakage-free through inner cross-validation unless the plan asks for
  /// resubstitution predictions.
  StreamColumn component_stream(Variant v, const std::vector<int>& train, int fold) const {
    StreamColumn column;
    column.name = stream_name(v);
    if (plan_.resubstitution) {
      TrainedModel model = fit_component(v, train);
      column.producer_words.push_back(train);
      for (int w : train) {
        column.symbols[w] =
            predict_positions(model, corpus_.words[static_cast<std::size_t>(w)].graphemes);
        column.producer[w] = 0;
      }
      return column;
    }
    InnerPredictions inner = inner_predictions(
        train, plan_.inner_folds,
        mix_seed(plan_.seed, static_cast<std::uint64_t>(fold) + 1,
                 v == Variant::A ? 11 : 12),
        [&](const std::vector<int>& subset) { return fit_component(v, subset); },
        [&](const TrainedModel& model, int w) {
          return predict_positions(model, corpus_.words[static_cast<std::size_t>(w)].graphemes);
        });
    column.symbols = std::move(inner.stream);
    column.producer = std::move(inner.producer);
    column.producer_words = std::move(inner.producer_words);
    return column;
  }

  /// Test-side stream: one model trained on the full training split.
  StreamColumn full_model_stream(const TrainedModel& model, Variant v,
                                 const std::vector<int>& train,
                                 const std::vector<int>& cover) const {
    StreamColumn column;
    column.name = stream_name(v);
    column.producer_words.push_back(train);
    for (int w : cover) {
      column.symbols[w] =
          predict_positions(model, corpus_.words[static_cast<std::size_t>(w)].graphemes);
      column.producer[w] = 0;
    }
    return column;
  }

  /// Spelling window extended with stream columns; one instance per position
  /// per target alternative. Every stream value consumed is audited.
  std::vector<Instance> combined_instances(const std::vector<int>& words,
                                           const std::vector<const StreamColumn*>& streams,
                                           InstanceSchema& schema_out, LeakageAudit& audit) const {
    InstanceSchema schema = base_schema_;
    std::vector<Instance> out;
    for (int w : words) {
      const auto& pw = corpus_.words[static_cast<std::size_t>(w)];
      std::vector<PredictionStream> columns;
      for (const auto* stream : streams) {
        auto it = stream->symbols.find(w);
        if (it == stream->symbols.end()) {
          throw InternalError("stream '" + stream->name + "' is missing word '" + pw.word + "'");
        }
        columns.push_back({stream->name, it->second});
        audit.checks += static_cast<std::int64_t>(it->second.size());
        if (!stream->excludes(w)) {
          audit.violations += static_cast<std::int64_t>(it->second.size());
        }
      }
      for (const auto& aligned : corpus_.aligned_for(static_cast<std::size_t>(w), plan_.target)) {
        InstanceSchema word_schema = base_schema_;
        auto base = window_sequence(pw.graphemes, aligned, word_schema, w);
        auto augmented = augment_instances(base, columns, word_schema);
        schema = word_schema;
        out.insert(out.end(), std::make_move_iterator(augmented.begin()),
                   std::make_move_iterator(augmented.end()));
      }
    }
    schema_out = schema;
    return out;
  }

  std::vector<std::string> classify_combined(const TrainedModel& model, int w,
                                             const std::vector<const StreamColumn*>& streams,
                                             LeakageAudit& audit) const {
    const auto& pw = corpus_.words[static_cast<std::size_t>(w)];
    std::vector<const std::vector<std::string>*> columns;
    for (const auto* stream : streams) {
      auto it = stream->symbols.find(w);
      if (it == stream->symbols.end()) {
        throw InternalError("stream '" + stream->name + "' is missing word '" + pw.word + "'");
      }
      columns.push_back(&it->second);
      audit.checks += static_cast<std::int64_t>(it->second.size());
      if (!stream->excludes(w)) {
        audit.violations += static_cast<std::int64_t>(it->second.size());
      }
    }
    std::vector<std::string> out;
    out.reserve(pw.graphemes.size());
    for (int i = 0; i < static_cast<int>(pw.graphemes.size()); ++i) {
      auto features = window_at(pw.graphemes, i, base_schema_);
      for (const auto* column : columns) features.push_back((*column)[static_cast<std::size_t>(i)]);
      out.push_back(model.classify(features));
    }
    return out;
  }

  FoldScore score_fold(const std::vector<int>& test,
                       const std::map<int, std::vector<std::string>>& predicted) const {
    std::vector<GoldWord> gold;
    std::vector<PredictedWord> hypothesis;
    for (int w : test) {
      const auto& pw = corpus_.words[static_cast<std::size_t>(w)];
      GoldWord g;
      g.word = pw.word;
      for (const auto& aligned : corpus_.aligned_for(static_cast<std::size_t>(w), plan_.target)) {
        g.alternatives.push_back(aligned);
      }
      gold.push_back(std::move(g));
      hypothesis.push_back({pw.word, predicted.at(w)});
    }
    return score_predictions(gold, hypothesis);
  }

  // ---- architectures ------------------------------------------------------

  FoldOutput run_fold(int fold) const {
    std::vector<int> train, test;
    for (std::size_t w = 0; w < corpus_.words.size(); ++w) {
      (fold_of(w) == fold ? test : train).push_back(static_cast<int>(w));
    }
    if (train.empty() || test.empty()) {
      throw ArgumentError("fold " + std::to_string(fold) + " leaves an empty train or test set");
    }

    switch (plan_.arch) {
      case Architecture::Single: return run_single(train, test);
      case Architecture::Cascade: return run_cascade(fold, train, test);
      case Architecture::ComboOne:
      case Architecture::ComboBoth: return run_combo(fold, train, test);
      case Architecture::MetaMeta: return run_metameta(fold, train, test);
    }
    throw InternalError("unhandled architecture");
  }

  FoldOutput run_single(const std::vector<int>& train, const std::vector<int>& test) const {
    FoldOutput out;
    TrainedModel model = fit_component(plan_.target, train);
    std::map<int, std::vector<std::string>> predicted;
    for (int w : test) {
      predicted[w] =
          predict_positions(model, corpus_.words[static_cast<std::size_t>(w)].graphemes);
    }
    out.score = score_fold(test, predicted);
    return out;
  }

  FoldOutput run_cascade(int fold, const std::vector<int>& train,
                         const std::vector<int>& test) const {
    FoldOutput out;
    const Variant source = other_variant(plan_.target);

    // Training side: the combiner sees only windows over the predicted
    // source-variant phonemes.
    StreamColumn train_stream = component_stream(source, train, fold);
    std::vector<Instance> instances;
    for (int w : train) {
      const auto& symbols = train_stream.symbols.at(w);
      out.audit.checks += static_cast<std::int64_t>(symbols.size());
      if (!train_stream.excludes(w)) {
        out.audit.violations += static_cast<std::int64_t>(symbols.size());
      }
      for (const auto& aligned : corpus_.aligned_for(static_cast<std::size_t>(w), plan_.target)) {
        auto rows = window_sequence(symbols, aligned, base_schema_, w);
        instances.insert(instances.end(), std::make_move_iterator(rows.begin()),
                         std::make_move_iterator(rows.end()));
      }
    }
    TrainedModel combiner =
        TrainedModel::train(plan_.combiner, instances, base_schema_, plan_.params);
    out.combiner_width = base_schema_.width();

    TrainedModel source_model = fit_component(source, train);
    StreamColumn test_stream = full_model_stream(source_model, source, train, test);
    std::map<int, std::vector<std::string>> predicted;
    for (int w : test) {
      const auto& symbols = test_stream.symbols.at(w);
      out.audit.checks += static_cast<std::int64_t>(symbols.size());
      if (!test_stream.excludes(w)) {
        out.audit.violations += static_cast<std::int64_t>(symbols.size());
      }
      predicted[w] = predict_positions(combiner, symbols);
    }
    out.score = score_fold(test, predicted);
    return out;
  }

  FoldOutput run_combo(int fold, const std::vector<int>& train,
                       const std::vector<int>& test) const {
    FoldOutput out;
    const bool both = plan_.arch == Architecture::ComboBoth;
    // Streams appended in variant order (A first) for a fixed feature layout.
    std::vector<Variant> sources;
    if (both) {
      sources = {Variant::A, Variant::B};
    } else {
      sources = {other_variant(plan_.target)};
    }

    std::vector<StreamColumn> train_streams;
    for (Variant v : sources) train_streams.push_back(component_stream(v, train, fold));
    std::vector<const StreamColumn*> train_refs;
    for (const auto& s : train_streams) train_refs.push_back(&s);

    InstanceSchema combined_schema;
    auto instances = combined_instances(train, train_refs, combined_schema, out.audit);
    TrainedModel combiner =
        TrainedModel::train(plan_.combiner, instances, combined_schema, plan_.params);
    out.combiner_width = combined_schema.width();

    std::vector<StreamColumn> test_streams;
    for (Variant v : sources) {
      TrainedModel model = fit_component(v, train);
      test_streams.push_back(full_model_stream(model, v, train, test));
    }
    std::vector<const StreamColumn*> test_refs;
    for (const auto& s : test_streams) test_refs.push_back(&s);

    std::map<int, std::vector<std::string>> predicted;
    for (int w : test) predicted[w] = classify_combined(combiner, w, test_refs, out.audit);
    out.score = score_fold(test, predicted);
    return out;
  }

  FoldOutput run_metameta(int fold, const std::vector<int>& train,
                          const std::vector<int>& test) const {
    FoldOutput out;

    // Component streams, as in the two-stream combination setting.
    std::vector<StreamColumn> train_streams;
    train_streams.push_back(component_stream(Variant::A, train, fold));
    train_streams.push_back(component_stream(Variant::B, train, fold));
    std::vector<const StreamColumn*> train_refs = {&train_streams[0], &train_streams[1]};

    // Each meta learner is a full combination classifier; the final combiner
    // consumes their predictions, produced leakage-free by inner CV over the
    // combiner training itself.
    std::vector<StreamColumn> meta_train_streams;
    std::vector<TrainedModel> meta_full;
    for (std::size_t m = 0; m < plan_.meta_learners.size(); ++m) {
      const LearnerKind kind = plan_.meta_learners[m];
      auto fit_meta = [&](const std::vector<int>& subset) {
        InstanceSchema schema;
        LeakageAudit fit_audit;  // counted once below over the full train set
        auto instances = combined_instances(subset, train_refs, schema, fit_audit);
        return TrainedModel::train(kind, instances, schema, plan_.params);
      };
      StreamColumn column;
      column.name = "meta_" + learner_name(kind);
      if (plan_.resubstitution) {
        TrainedModel model = fit_meta(train);
        column.producer_words.push_back(train);
        for (int w : train) {
          LeakageAudit ignore;
          column.symbols[w] = classify_combined(model, w, train_refs, ignore);
          column.producer[w] = 0;
        }
      } else {
        InnerPredictions inner = inner_predictions(
            train, plan_.inner_folds,
            mix_seed(plan_.seed, static_cast<std::uint64_t>(fold) + 1, 100 + m),
            fit_meta,
            [&](const TrainedModel& model, int w) {
              LeakageAudit ignore;  // the stream consumption below audits these words
              return classify_combined(model, w, train_refs, ignore);
            });
        column.symbols = std::move(inner.stream);
        column.producer = std::move(inner.producer);
        column.producer_words = std::move(inner.producer_words);
      }
      meta_train_streams.push_back(std::move(column));
      meta_full.push_back(fit_meta(train));
    }
    // Audit the component stream consumption once over the training split.
    for (int w : train) {
      for (const auto* stream : train_refs) {
        const auto& symbols = stream->symbols.at(w);
        out.audit.checks += static_cast<std::int64_t>(symbols.size());
        if (!stream->excludes(w)) {
          out.audit.violations += static_cast<std::int64_t>(symbols.size());
        }
      }
    }

    // Final combiner over the meta predictions (plus spelling if configured).
    std::vector<const StreamColumn*> meta_refs;
    for (const auto& s : meta_train_streams) meta_refs.push_back(&s);
    InstanceSchema meta_schema;
    std::vector<Instance> meta_instances =
        build_meta_instances(train, meta_refs, meta_schema, out.audit);
    TrainedModel final_combiner =
        TrainedModel::train(plan_.combiner, meta_instances, meta_schema, plan_.params);
    out.combiner_width = meta_schema.width();

    // Test side: full-train components feed full-train meta combiners.
    std::vector<StreamColumn> test_streams;
    {
      TrainedModel model_a = fit_component(Variant::A, train);
      TrainedModel model_b = fit_component(Variant::B, train);
      test_streams.push_back(full_model_stream(model_a, Variant::A, train, test));
      test_streams.push_back(full_model_stream(model_b, Variant::B, train, test));
    }
    std::vector<const StreamColumn*> test_refs = {&test_streams[0], &test_streams[1]};

    std::vector<StreamColumn> meta_test_streams(meta_full.size());
    for (std::size_t m = 0; m < meta_full.size(); ++m) {
      meta_test_streams[m].name = meta_train_streams[m].name;
      meta_test_streams[m].producer_words.push_back(train);
      for (int w : test) {
        meta_test_streams[m].symbols[w] =
            classify_combined(meta_full[m], w, test_refs, out.audit);
        meta_test_streams[m].producer[w] = 0;
      }
    }
    std::vector<const StreamColumn*> meta_test_refs;
    for (const auto& s : meta_test_streams) meta_test_refs.push_back(&s);

    std::map<int, std::vector<std::string>> predicted;
    for (int w : test) {
      predicted[w] = classify_meta(final_combiner, w, meta_test_refs, out.audit);
    }
    out.score = score_fold(test, predicted);
    return out;
  }

  /// Meta-meta input rows: the meta streams in declared order, preceded by
  /// the spelling window when the plan asks for it.
  std::vector<Instance> build_meta_instances(const std::vector<int>& words,
                                             const std::vector<const StreamColumn*>& streams,
                                             InstanceSchema& schema_out,
                                             LeakageAudit& audit) const {
    if (plan_.with_spelling) return combined_instances(words, streams, schema_out, audit);

    std::vector<Instance> out;
    for (int w : words) {
      for (const auto* stream : streams) {
        const auto& symbols = stream->symbols.at(w);
        audit.checks += static_cast<std::int64_t>(symbols.size());
        if (!stream->excludes(w)) {
          audit.violations += static_cast<std::int64_t>(symbols.size());
        }
      }
      for (const auto& aligned : corpus_.aligned_for(static_cast<std::size_t>(w), plan_.target)) {
        for (int i = 0; i < static_cast<int>(aligned.size()); ++i) {
          Instance inst;
          inst.word_id = w;
          inst.position = i;
          inst.label = aligned[static_cast<std::size_t>(i)];
          for (const auto* stream : streams) {
            inst.features.push_back(stream->symbols.at(w)[static_cast<std::size_t>(i)]);
          }
          out.push_back(std::move(inst));
        }
      }
    }
    // A windowless schema: left 0, right -1 cancels the focus column, so the
    // width is exactly the number of prediction features.
    InstanceSchema schema;
    schema.left_context = 0;
    schema.right_context = -1;
    schema.pad_symbol = base_schema_.pad_symbol;
    for (const auto* stream : streams) schema.extra_feature_names.push_back(stream->name);
    schema_out = schema;
    return out;
  }

  std::vector<std::string> classify_meta(const TrainedModel& model, int w,
                                         const std::vector<const StreamColumn*>& streams,
                                         LeakageAudit& audit) const {
    if (plan_.with_spelling) return classify_combined(model, w, streams, audit);
    const auto& pw = corpus_.words[static_cast<std::size_t>(w)];
    for (const auto* stream : streams) {
      const auto& symbols = stream->symbols.at(w);
      audit.checks += static_cast<std::int64_t>(symbols.size());
      if (!stream->excludes(w)) {
        audit.violations += static_cast<std::int64_t>(symbols.size());
      }
    }
    std::vector<std::string> out;
    for (int i = 0; i < static_cast<int>(pw.graphemes.size()); ++i) {
      std::vector<std::string> features;
      for (const auto* stream : streams) {
        features.push_back(stream->symbols.at(w)[static_cast<std::size_t>(i)]);
      }
      out.push_back(model.classify(features));
    }
    return out;
  }

  const StackingPlan& plan_;
  const PreparedCorpus& corpus_;
  const FoldAssignment& folds_;
  InstanceSchema base_schema_;  // 3+1+3 spelling window
};

}  // namespace

Architecture architecture_from_name(const std::string& name) {
  if (name == "single") return Architecture::Single;
  if (name == "cascade") return Architecture::Cascade;
  if (name == "combo1") return Architecture::ComboOne;
  if (name == "combo2") return Architecture::ComboBoth;
  if (name == "metameta") return Architecture::MetaMeta;
  throw ArgumentError("unknown architecture '" + name +
                      "' (expected single|cascade|combo1|combo2|metameta)");
}

std::string architecture_name(Architecture arch) {
  switch (arch) {
    case Architecture::Single: return "single";
    case Architecture::Cascade: return "cascade";
    case Architecture::ComboOne: return "combo1";
    case Architecture::ComboBoth: return "combo2";
    case Architecture::MetaMeta: return "metameta";
  }
  throw InternalError("unhandled architecture");
}

FoldAssignment make_folds(const std::vector<std::string>& words, int n_folds,
                          std::uint64_t seed) {
  if (n_folds < 2) throw ArgumentError("make_folds: need at least 2 folds");
  if (static_cast<int>(words.size()) < n_folds) {
    throw ArgumentError("make_folds: fewer words (" + std::to_string(words.size()) +
                        ") than folds (" + std::to_string(n_folds) + ")");
  }
  FoldAssignment assignment;
  assignment.n_folds = n_folds;
  assignment.seed = seed;
  std::vector<std::string> shuffled = words;
  Rng rng(seed);
  rng.shuffle(shuffled);
  for (std::size_t i = 0; i < shuffled.size(); ++i) {
    assignment.fold_of_word[shuffled[i]] = static_cast<int>(i % static_cast<std::size_t>(n_folds));
  }
  return assignment;
}

InnerPredictions inner_predictions(
    const std::vector<int>& train_words, int inner_folds, std::uint64_t seed,
    const std::function<TrainedModel(const std::vector<int>&)>& fit,
    const std::function<std::vector<std::string>(const TrainedModel&, int)>& predict) {
  if (inner_folds < 2) throw ArgumentError("inner_predictions: inner_folds must be >= 2");
  InnerPredictions out;

  std::vector<int> shuffled = train_words;
  Rng rng(seed);
  rng.shuffle(shuffled);
  std::vector<std::vector<int>> fold_words(static_cast<std::size_t>(inner_folds));
  for (std::size_t i = 0; i < shuffled.size(); ++i) {
    fold_words[i % static_cast<std::size_t>(inner_folds)].push_back(shuffled[i]);
  }

  for (int f = 0; f < inner_folds; ++f) {
    const auto& held_out = fold_words[static_cast<std::size_t>(f)];
    if (held_out.empty()) continue;
    std::vector<int> subset;
    subset.reserve(train_words.size());
    for (int g = 0; g < inner_folds; ++g) {
      if (g == f) continue;
      subset.insert(subset.end(), fold_words[static_cast<std::size_t>(g)].begin(),
                    fold_words[static_cast<std::size_t>(g)].end());
    }
    std::sort(subset.begin(), subset.end());
    TrainedModel model = fit(subset);
    const int producer = static_cast<int>(out.producer_words.size());
    out.producer_words.push_back(subset);
    for (int w : held_out) {
      out.stream[w] = predict(model, w);
      out.producer[w] = producer;
    }
  }
  return out;
}

PreparedCorpus prepare_corpus(const ParallelLexicon& lexicon, const PhonemeInventory& inventory,
                              const PrepareOptions& options) {
  PreparedCorpus corpus;

  auto collect = [](const std::map<std::string, LexiconEntry>& side) {
    std::vector<LexiconEntry> entries;
    entries.reserve(side.size());
    for (const auto& [word, entry] : side) entries.push_back(entry);
    return entries;
  };

  const FilterResult kept_a = filter_alignable(collect(lexicon.variant_a), inventory);
  const FilterResult kept_b = filter_alignable(collect(lexicon.variant_b), inventory);
  const AssociationModel model_a = estimate_associations(
      kept_a.kept, options.em_iterations, inventory, options.null_penalty, options.floor_weight);
  const AssociationModel model_b = estimate_associations(
      kept_b.kept, options.em_iterations, inventory, options.null_penalty, options.floor_weight);

  std::map<std::string, const LexiconEntry*> alignable_a, alignable_b;
  for (const auto& entry : kept_a.kept) alignable_a[entry.word()] = &entry;
  for (const auto& entry : kept_b.kept) alignable_b[entry.word()] = &entry;

  for (const auto& word : lexicon.shared_words) {
    auto ita = alignable_a.find(word);
    auto itb = alignable_b.find(word);
    if (ita == alignable_a.end() || itb == alignable_b.end()) {
      corpus.skipped.push_back(word);
      continue;
    }
    PreparedWord pw;
    pw.word = word;
    pw.graphemes = ita->second->orthography;
    bool ok = true;
    try {
      for (std::size_t t = 0; t < ita->second->transcriptions.size(); ++t) {
        pw.aligned_a.push_back(
            align_entry(*ita->second, static_cast<int>(t), model_a, inventory).phonemes);
      }
      for (std::size_t t = 0; t < itb->second->transcriptions.size(); ++t) {
        pw.aligned_b.push_back(
            align_entry(*itb->second, static_cast<int>(t), model_b, inventory).phonemes);
      }
    } catch (const AlignmentError&) {
      ok = false;
    }
    if (!ok) {
      corpus.skipped.push_back(word);
      continue;
    }
    corpus.words.push_back(std::move(pw));
  }
  return corpus;
}

PreparedCorpus corpus_from_aligned(const std::vector<AlignedEntry>& variant_a,
                                   const std::vector<AlignedEntry>& variant_b) {
  std::map<std::string, PreparedWord> by_word;
  for (const auto& entry : variant_a) {
    auto& pw = by_word[entry.word];
    pw.word = entry.word;
    pw.graphemes = entry.orthography;
    pw.aligned_a.push_back(entry.phonemes);
  }
  for (const auto& entry : variant_b) {
    auto it = by_word.find(entry.word);
    if (it == by_word.end()) {
      throw PairingError("aligned corpus: word '" + entry.word + "' only present in variant B");
    }
    it->second.aligned_b.push_back(entry.phonemes);
  }
  PreparedCorpus corpus;
  for (auto& [word, pw] : by_word) {
    if (pw.aligned_b.empty()) {
      throw PairingError("aligned corpus: word '" + word + "' only present in variant A");
    }
    corpus.words.push_back(std::move(pw));
  }
  return corpus;
}

StackingRunResult run_plan(const StackingPlan& plan, const PreparedCorpus& corpus,
                           const FoldAssignment& folds) {
  if (corpus.words.empty()) throw ArgumentError("run_plan: empty corpus");
  PlanRunner runner(plan, corpus, folds);
  return runner.run();
}

}  // namespace g2p
