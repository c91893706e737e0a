#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "g2pstack/phoneme.hpp"

namespace g2p {

/// A word form with one or more phonemic transcriptions. Multiple
/// transcriptions model ambiguous words whose variants were all kept.
struct LexiconEntry {
  std::vector<std::string> orthography;                   // one token per grapheme
  std::vector<std::vector<std::string>> transcriptions;   // phoneme symbol sequences

  std::string word() const;  // graphemes joined
};

/// Two lexicons over (partially) the same word list.
struct ParallelLexicon {
  std::map<std::string, LexiconEntry> variant_a;
  std::map<std::string, LexiconEntry> variant_b;
  std::vector<std::string> shared_words;  // intersection, lexicographic
};

/// Read a lexicon TSV (`word<TAB>phoneme phoneme ...`, `#` comments).
/// Lines for the same word merge into one entry with multiple
/// transcriptions, preserving first-occurrence order.
std::vector<LexiconEntry> load_lexicon(const std::string& path, const PhonemeInventory& inventory);
std::vector<LexiconEntry> parse_lexicon(std::istream& in, const PhonemeInventory& inventory,
                                        const std::string& source_name);

void save_lexicon(std::ostream& out, const std::vector<LexiconEntry>& entries);

/// Partition entries into those whose every transcription can be brought
/// down to at most the orthography length by compound merging, and the rest.
struct FilterResult {
  std::vector<LexiconEntry> kept;
  std::vector<LexiconEntry> dropped;
};
FilterResult filter_alignable(const std::vector<LexiconEntry>& entries,
                              const PhonemeInventory& inventory);

/// Shortest symbol count achievable for `transcription` when any subsequence
/// matching a declared compound expansion may collapse into one symbol.
std::size_t min_merged_length(const std::vector<std::string>& transcription,
                              const PhonemeInventory& inventory);

ParallelLexicon pair_lexicons(const std::vector<LexiconEntry>& a,
                              const std::vector<LexiconEntry>& b);

}  // namespace g2p
