#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "g2pstack/align.hpp"
#include "g2pstack/eval.hpp"
#include "g2pstack/learner.hpp"
#include "g2pstack/lexicon.hpp"

namespace g2p {

enum class Architecture { Single, Cascade, ComboOne, ComboBoth, MetaMeta };
enum class Variant { A, B };

Architecture architecture_from_name(const std::string& name);
std::string architecture_name(Architecture arch);

/// Word-level cross-validation split, shared by both variants.
struct FoldAssignment {
  int n_folds = 0;
  std::uint64_t seed = 0;
  std::map<std::string, int> fold_of_word;
};

/// Deterministic shuffle by seed, then round-robin assignment, so fold
/// sizes differ by at most one and no word's instances straddle folds.
FoldAssignment make_folds(const std::vector<std::string>& words, int n_folds, std::uint64_t seed);

struct StackingPlan {
  Architecture arch = Architecture::Single;
  Variant target = Variant::B;
  LearnerKind component = LearnerKind::IB1IG;
  LearnerKind combiner = LearnerKind::IB1IG;
  std::vector<LearnerKind> meta_learners = {LearnerKind::TreeRules, LearnerKind::IB1IG,
                                            LearnerKind::IGTree, LearnerKind::MaxEnt};
  bool with_spelling = false;  // meta-meta input includes the spelling window
  int inner_folds = 5;
  bool resubstitution = false;  // ablation: training-side predictions without inner CV
  std::uint64_t seed = 0;
  int jobs = 1;
  LearnerParams params;
};

/// One word of the paired, aligned working set. Alternative transcriptions
/// appear as multiple aligned sequences, all of orthography length.
struct PreparedWord {
  std::string word;
  std::vector<std::string> graphemes;
  std::vector<std::vector<std::string>> aligned_a;
  std::vector<std::vector<std::string>> aligned_b;
};

struct PreparedCorpus {
  std::vector<PreparedWord> words;
  std::vector<std::string> skipped;  // shared words excluded (unalignable in some variant)

  const std::vector<std::vector<std::string>>& aligned_for(std::size_t w, Variant v) const {
    return v == Variant::A ? words[w].aligned_a : words[w].aligned_b;
  }
};

struct PrepareOptions {
  int em_iterations = 3;
  double null_penalty = -2.302585092994046;  // log(0.1)
  double floor_weight = -13.815510557964274; // log(1e-6)
};

/// Align both variants of every shared word. Association models are
/// estimated per variant over that variant's full (alignable) lexicon;
/// words that fail filtering or alignment in either variant are skipped.
PreparedCorpus prepare_corpus(const ParallelLexicon& lexicon, const PhonemeInventory& inventory,
                              const PrepareOptions& options = {});

/// Build a working set directly from aligned entries (both variants must
/// cover the same words).
PreparedCorpus corpus_from_aligned(const std::vector<AlignedEntry>& variant_a,
                                   const std::vector<AlignedEntry>& variant_b);

/// Provenance counters for the stacking leakage discipline: each check
/// verifies that a prediction feature consumed for some word came from a
/// model whose training words exclude it.
struct LeakageAudit {
  std::int64_t checks = 0;
  std::int64_t violations = 0;

  void merge(const LeakageAudit& other) {
    checks += other.checks;
    violations += other.violations;
  }
};

/// Cross-validated predictions for every training word, each produced by a
/// model trained without that word.
struct InnerPredictions {
  std::map<int, std::vector<std::string>> stream;  // word index -> per-position symbols
  std::map<int, int> producer;                     // word index -> producer model id
  std::vector<std::vector<int>> producer_words;    // producer id -> sorted training words
};

InnerPredictions inner_predictions(
    const std::vector<int>& train_words, int inner_folds, std::uint64_t seed,
    const std::function<TrainedModel(const std::vector<int>&)>& fit,
    const std::function<std::vector<std::string>(const TrainedModel&, int)>& predict);

struct StackingRunResult {
  EvaluationResult evaluation;
  LeakageAudit audit;
  int combiner_width = 0;  // feature width of the final combiner (0 for SINGLE)
};

StackingRunResult run_plan(const StackingPlan& plan, const PreparedCorpus& corpus,
                           const FoldAssignment& folds);

}  // namespace g2p
