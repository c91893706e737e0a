#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "g2pstack/align.hpp"
#include "g2pstack/lexicon.hpp"
#include "g2pstack/phoneme.hpp"
#include "g2pstack/tbedl.hpp"

namespace g2p {

/// Word-initial voicing (x -> G near the word start), tense-to-lax vowel
/// lowering before a trigger within three positions, and palatalisation of
/// t before j.
std::vector<TransformationRule> default_dialect_rules();

/// Parameters for the bundled dialect-pair generator. Variant A follows a
/// deterministic spelling-to-phoneme mapping (vowel digraphs become tense
/// vowels plus a null, `x` becomes the compound /ks/, `g` becomes /x/, plus
/// final devoicing and nasal assimilation); variant B is variant A with an
/// ordered list of contextual rewrite rules applied.
struct SyntheticSpec {
  int word_count = 5000;
  std::uint64_t seed = 7;
  double ambiguity_rate = 0.05;  // fraction of words with a second variant-B transcription

  int min_syllables = 3;
  int max_syllables = 4;
  double digraph_rate = 0.45;    // vowel slot drawn as a digraph
  double compound_rate = 0.03;   // consonant slot replaced by `x`
  bool vowel_coloring = false;   // single vowels tense before a voiced consonant

  std::vector<std::string> consonants = {"b", "d", "f", "g", "h", "j", "k", "l", "m",
                                         "n", "p", "r", "s", "t", "v", "w", "z"};
  std::vector<int> consonant_weights = {2, 2, 2, 5, 1, 3, 3, 3, 3, 3, 2, 3, 3, 14, 1, 1, 1};
  std::vector<std::string> vowels = {"a", "e", "i", "o", "u"};
  std::vector<int> vowel_weights = {4, 3, 2, 3, 2};
  std::vector<std::string> digraphs = {"aa", "ee", "oo", "uu", "ie"};
  std::vector<int> digraph_weights = {12, 2, 2, 2, 2};

  /// Ground-truth variant-A-to-variant-B rewrites, substitution only.
  std::vector<TransformationRule> dialect_rules = default_dialect_rules();
};

/// A generated parallel corpus plus everything a test needs: the inventory,
/// both lexicons, the gold alignments they came from, and the rule list that
/// produced variant B.
struct SyntheticCorpus {
  PhonemeInventory inventory;
  std::vector<LexiconEntry> lexicon_a;
  std::vector<LexiconEntry> lexicon_b;
  std::vector<AlignedEntry> gold_aligned_a;
  std::vector<AlignedEntry> gold_aligned_b;
  RuleProgram true_rules;
};

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

}  // namespace g2p
