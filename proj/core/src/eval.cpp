#include "g2pstack/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "g2pstack/error.hpp"

namespace g2p {

std::vector<GoldWord> gold_from_aligned(const std::vector<AlignedEntry>& entries) {
  std::vector<GoldWord> gold;
  std::map<std::string, std::size_t> index_of;
  for (const auto& entry : entries) {
    auto [it, inserted] = index_of.try_emplace(entry.word, gold.size());
    if (inserted) gold.push_back({entry.word, {}});
    gold[it->second].alternatives.push_back(entry.phonemes);
  }
  return gold;
}

FoldScore score_predictions(const std::vector<GoldWord>& gold,
                            const std::vector<PredictedWord>& predicted) {
  if (gold.size() != predicted.size()) {
    throw ScoringError("prediction covers " + std::to_string(predicted.size()) +
                       " words, gold has " + std::to_string(gold.size()));
  }
  FoldScore score;
  std::int64_t phoneme_hits = 0;
  std::int64_t word_hits = 0;
  for (std::size_t w = 0; w < gold.size(); ++w) {
    const auto& g = gold[w];
    const auto& p = predicted[w];
    if (g.word != p.word) {
      throw ScoringError("word order mismatch: gold '" + g.word + "' vs predicted '" + p.word +
                         "'");
    }
    if (g.alternatives.empty()) throw ScoringError("no gold transcription for '" + g.word + "'");
    std::int64_t best_matches = -1;
    bool word_correct = false;
    for (const auto& alt : g.alternatives) {
      if (alt.size() != p.phonemes.size()) {
        throw ScoringError("length mismatch for word '" + g.word + "': gold " +
                           std::to_string(alt.size()) + " vs predicted " +
                           std::to_string(p.phonemes.size()));
      }
      std::int64_t matches = 0;
      for (std::size_t i = 0; i < alt.size(); ++i) {
        if (alt[i] == p.phonemes[i]) ++matches;
      }
      best_matches = std::max(best_matches, matches);
      if (matches == static_cast<std::int64_t>(alt.size())) word_correct = true;
    }
    score.phoneme_count += static_cast<std::int64_t>(p.phonemes.size());
    phoneme_hits += best_matches;
    score.word_count += 1;
    if (word_correct) word_hits += 1;
  }
  score.phoneme_accuracy = score.phoneme_count == 0
                               ? 0.0
                               : static_cast<double>(phoneme_hits) /
                                     static_cast<double>(score.phoneme_count);
  score.word_accuracy =
      score.word_count == 0 ? 0.0
                            : static_cast<double>(word_hits) / static_cast<double>(score.word_count);
  return score;
}

double error_reduction(double baseline, double improved) {
  if (baseline < 0.0 || baseline > 1.0 || improved < 0.0 || improved > 1.0) {
    throw ArgumentError("error_reduction: accuracies must lie in [0, 1]");
  }
  if (baseline == 1.0) {
    throw ArgumentError("error_reduction: baseline error is zero, reduction undefined");
  }
  return ((1.0 - baseline) - (1.0 - improved)) / (1.0 - baseline);
}

EvaluationResult aggregate(const std::vector<FoldScore>& per_fold) {
  if (per_fold.empty()) throw ArgumentError("aggregate: no fold results");
  EvaluationResult result;
  result.per_fold = per_fold;

  std::int64_t phonemes = 0, words = 0;
  double phoneme_hits = 0.0, word_hits = 0.0;
  for (const auto& fold : per_fold) {
    phonemes += fold.phoneme_count;
    words += fold.word_count;
    phoneme_hits += fold.phoneme_accuracy * static_cast<double>(fold.phoneme_count);
    word_hits += fold.word_accuracy * static_cast<double>(fold.word_count);
  }
  result.mean_phoneme = phonemes == 0 ? 0.0 : phoneme_hits / static_cast<double>(phonemes);
  result.mean_word = words == 0 ? 0.0 : word_hits / static_cast<double>(words);

  // Sample standard deviation over folds; a single fold reports 0.
  if (per_fold.size() > 1) {
    const double n = static_cast<double>(per_fold.size());
    double mean_p = 0.0, mean_w = 0.0;
    for (const auto& fold : per_fold) {
      mean_p += fold.phoneme_accuracy;
      mean_w += fold.word_accuracy;
    }
    mean_p /= n;
    mean_w /= n;
    double ss_p = 0.0, ss_w = 0.0;
    for (const auto& fold : per_fold) {
      ss_p += (fold.phoneme_accuracy - mean_p) * (fold.phoneme_accuracy - mean_p);
      ss_w += (fold.word_accuracy - mean_w) * (fold.word_accuracy - mean_w);
    }
    result.stddev_phoneme = std::sqrt(ss_p / (n - 1.0));
    result.stddev_word = std::sqrt(ss_w / (n - 1.0));
  }
  return result;
}

}  // namespace g2p
