#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "g2pstack/align.hpp"

namespace g2p {

struct FoldScore {
  double phoneme_accuracy = 0.0;
  double word_accuracy = 0.0;
  std::int64_t phoneme_count = 0;
  std::int64_t word_count = 0;
};

/// Cross-validated accuracies: per-fold numbers plus count-weighted means
/// and the sample standard deviation of the fold phoneme accuracies.
struct EvaluationResult {
  std::vector<FoldScore> per_fold;
  double mean_phoneme = 0.0;
  double mean_word = 0.0;
  double stddev_phoneme = 0.0;
  double stddev_word = 0.0;
};

/// Gold standard for one word: every listed aligned transcription.
struct GoldWord {
  std::string word;
  std::vector<std::vector<std::string>> alternatives;  // aligned symbol sequences
};

struct PredictedWord {
  std::string word;
  std::vector<std::string> phonemes;
};

/// Word accuracy: a word counts as correct when its prediction equals any
/// gold alternative. Phoneme accuracy: positionwise matches against the
/// best-matching alternative.
FoldScore score_predictions(const std::vector<GoldWord>& gold,
                            const std::vector<PredictedWord>& predicted);

/// Group aligned entries (with their multi-transcription alternatives) into
/// gold words, in first-appearance order.
std::vector<GoldWord> gold_from_aligned(const std::vector<AlignedEntry>& entries);

/// Relative reduction of the error rate going from `baseline` to `improved`
/// accuracy. Negative when `improved` is worse.
double error_reduction(double baseline, double improved);

EvaluationResult aggregate(const std::vector<FoldScore>& per_fold);

}  // namespace g2p
