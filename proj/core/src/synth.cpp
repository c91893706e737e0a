#include "g2pstack/synth.hpp"

#include <algorithm>
#include <set>

#include "g2pstack/error.hpp"
#include "g2pstack/rng.hpp"
#include "g2pstack/text.hpp"

namespace g2p {

namespace {

std::string pick_weighted(Rng& rng, const std::vector<std::string>& items,
                          const std::vector<int>& weights) {
  long long total = 0;
  for (int w : weights) total += w;
  long long draw = static_cast<long long>(rng.next_below(static_cast<std::uint64_t>(total)));
  for (std::size_t i = 0; i < items.size(); ++i) {
    draw -= weights[i];
    if (draw < 0) return items[i];
  }
  return items.back();
}

PhonemeInventory make_inventory() {
  std::vector<Phoneme> symbols;
  auto add = [&](const std::string& s) { symbols.push_back({s, false, false, {}}); };
  symbols.push_back({"-", true, false, {}});
  for (const char* v : {"a", "e", "i", "o", "u"}) add(v);
  for (const char* v : {"A", "E", "I", "O", "U"}) add(v);
  for (const char* c : {"b", "d", "f", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v",
                        "w", "z"}) {
    add(c);
  }
  add("x");
  add("G");
  add("N");
  add("tS");
  symbols.push_back({"ks", false, true, {"k", "s"}});
  return PhonemeInventory("synth", std::move(symbols));
}

/// Deterministic spelling-to-phoneme mapping for variant A, producing the
/// aligned form directly (one symbol per grapheme).
std::vector<std::string> base_g2p(const std::vector<std::string>& graphemes,
                                  const std::map<std::string, std::string>& digraph_phoneme,
                                  bool vowel_coloring) {
  static const std::map<std::string, std::string> tense_of = {
      {"a", "A"}, {"e", "E"}, {"i", "I"}, {"o", "O"}, {"u", "U"}};
  static const std::set<std::string> voiced = {"b", "d", "g", "z", "v", "m",
                                               "n", "l", "r", "w", "j"};
  const std::size_t n = graphemes.size();
  std::vector<std::string> aligned(n);
  std::size_t i = 0;
  while (i < n) {
    if (i + 1 < n) {
      auto it = digraph_phoneme.find(graphemes[i] + graphemes[i + 1]);
      if (it != digraph_phoneme.end()) {
        aligned[i] = it->second;
        aligned[i + 1] = "-";
        i += 2;
        continue;
      }
    }
    const std::string& g = graphemes[i];
    auto tense = tense_of.find(g);
    if (g == "x") {
      aligned[i] = "ks";
    } else if (g == "g") {
      aligned[i] = "x";
    } else if (g == "d" && i + 1 == n) {
      aligned[i] = "t";  // final devoicing
    } else if (g == "n" && i + 1 < n && (graphemes[i + 1] == "k" || graphemes[i + 1] == "g")) {
      aligned[i] = "N";  // nasal assimilation
    } else if (vowel_coloring && tense != tense_of.end() && i + 1 < n &&
               voiced.count(graphemes[i + 1])) {
      aligned[i] = tense->second;  // open-syllable lengthening before voiced
    } else {
      aligned[i] = g;
    }
    ++i;
  }
  return aligned;
}

}  // namespace

std::vector<TransformationRule> default_dialect_rules() {
  std::vector<TransformationRule> rules;
  rules.push_back({"x", "G", {TemplateKind::WordStartWithin, 2}, kBoundaryMarker, 0, 0});
  rules.push_back({"A", "a", {TemplateKind::NextWithin, 3}, "t", 0, 0});
  rules.push_back({"t", "tS", {TemplateKind::NextExact, 1}, "j", 0, 0});
  return rules;
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  if (spec.word_count < 50) throw ArgumentError("synth: word_count must be >= 50");
  if (spec.consonants.empty() || spec.vowels.empty()) {
    throw ArgumentError("synth: alphabet must not be empty");
  }
  if (spec.consonants.size() != spec.consonant_weights.size() ||
      spec.vowels.size() != spec.vowel_weights.size() ||
      spec.digraphs.size() != spec.digraph_weights.size()) {
    throw ArgumentError("synth: alphabet weight lists must match the symbol lists");
  }
  if (spec.ambiguity_rate < 0.0 || spec.ambiguity_rate > 0.2) {
    throw ArgumentError("synth: ambiguity_rate must lie in [0, 0.2]");
  }
  if (spec.min_syllables < 1 || spec.max_syllables < spec.min_syllables) {
    throw ArgumentError("synth: bad syllable range");
  }
  for (const auto& rule : spec.dialect_rules) {
    if (rule.from == "-" || rule.to == "-" || rule.from == rule.to) {
      throw ArgumentError("synth: dialect rules must substitute one non-null phoneme for another");
    }
  }

  SyntheticCorpus corpus;
  corpus.inventory = make_inventory();
  corpus.true_rules.rules = spec.dialect_rules;

  const std::map<std::string, std::string> digraph_phoneme = {
      {"aa", "A"}, {"ee", "E"}, {"oo", "O"}, {"uu", "U"}, {"ie", "I"}};

  Rng rng(spec.seed);
  std::set<std::string> seen;
  std::vector<std::vector<std::string>> words;
  while (static_cast<int>(words.size()) < spec.word_count) {
    const int syllables =
        spec.min_syllables +
        static_cast<int>(rng.next_below(
            static_cast<std::uint64_t>(spec.max_syllables - spec.min_syllables + 1)));
    std::vector<std::string> graphemes;
    bool vowel_final = false;
    for (int s = 0; s < syllables; ++s) {
      // Syllable shapes: CV, CVC, VC. A syllable after an open one always
      // takes an onset, so vowels never collide across the boundary.
      const std::uint64_t shape = rng.next_below(100);
      const bool onset = shape < 85 || vowel_final;
      const bool coda = shape >= 50;
      vowel_final = !coda;
      auto consonant = [&]() {
        std::string c = pick_weighted(rng, spec.consonants, spec.consonant_weights);
        if (rng.next_double() < spec.compound_rate) c = "x";
        return c;
      };
      if (onset) graphemes.push_back(consonant());
      if (rng.next_double() < spec.digraph_rate) {
        const std::string digraph = pick_weighted(rng, spec.digraphs, spec.digraph_weights);
        graphemes.push_back(digraph.substr(0, 1));
        graphemes.push_back(digraph.substr(1, 1));
      } else {
        graphemes.push_back(pick_weighted(rng, spec.vowels, spec.vowel_weights));
      }
      if (coda) graphemes.push_back(consonant());
    }
    std::string word = join(graphemes, "");
    if (!seen.insert(word).second) continue;
    words.push_back(std::move(graphemes));
  }

  for (std::size_t w = 0; w < words.size(); ++w) {
    const auto& graphemes = words[w];
    const std::string word = join(graphemes, "");

    const std::vector<std::string> aligned_a =
        base_g2p(graphemes, digraph_phoneme, spec.vowel_coloring);
    const std::vector<std::string> aligned_b = apply_rules(corpus.true_rules, aligned_a);

    LexiconEntry entry_a;
    entry_a.orthography = graphemes;
    entry_a.transcriptions.push_back(
        corpus.inventory.expand_compounds(corpus.inventory.strip_nulls(aligned_a)));
    LexiconEntry entry_b;
    entry_b.orthography = graphemes;
    entry_b.transcriptions.push_back(
        corpus.inventory.expand_compounds(corpus.inventory.strip_nulls(aligned_b)));

    corpus.gold_aligned_a.push_back({graphemes, aligned_a, word, 0});
    corpus.gold_aligned_b.push_back({graphemes, aligned_b, word, 0});

    // Free variation in variant B only: o ~ u across the whole word.
    const bool draw = rng.next_double() < spec.ambiguity_rate;
    const bool eligible =
        std::find(aligned_b.begin(), aligned_b.end(), "o") != aligned_b.end();
    if (draw && eligible) {
      std::vector<std::string> alt = aligned_b;
      for (auto& sym : alt) {
        if (sym == "o") sym = "u";
      }
      entry_b.transcriptions.push_back(
          corpus.inventory.expand_compounds(corpus.inventory.strip_nulls(alt)));
      corpus.gold_aligned_b.push_back({graphemes, alt, word, 1});
    }

    corpus.lexicon_a.push_back(std::move(entry_a));
    corpus.lexicon_b.push_back(std::move(entry_b));
  }
  return corpus;
}

}  // namespace g2p
