#include "g2pstack/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "g2pstack/error.hpp"
#include "g2pstack/text.hpp"

namespace g2p {

std::vector<std::string> utf8_graphemes(std::string_view word) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < word.size()) {
    unsigned char c = static_cast<unsigned char>(word[i]);
    std::size_t len;
    if (c < 0x80) len = 1;
    else if ((c & 0xE0) == 0xC0) len = 2;
    else if ((c & 0xF0) == 0xE0) len = 3;
    else if ((c & 0xF8) == 0xF0) len = 4;
    else throw ParseError("malformed UTF-8 in word '" + std::string(word) + "'");
    if (i + len > word.size()) {
      throw ParseError("truncated UTF-8 sequence in word '" + std::string(word) + "'");
    }
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(word[i + k]) & 0xC0) != 0x80) {
        throw ParseError("malformed UTF-8 continuation in word '" + std::string(word) + "'");
      }
    }
    out.emplace_back(word.substr(i, len));
    i += len;
  }
  return out;
}

std::string LexiconEntry::word() const { return join(orthography, ""); }

std::vector<LexiconEntry> load_lexicon(const std::string& path, const PhonemeInventory& inventory) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon file: " + path);
  return parse_lexicon(in, inventory, path);
}

std::vector<LexiconEntry> parse_lexicon(std::istream& in, const PhonemeInventory& inventory,
                                        const std::string& source_name) {
  std::vector<LexiconEntry> entries;
  std::map<std::string, std::size_t> index_of;  // word -> position in `entries`
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source_name + ":" + std::to_string(lineno);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view sv = trim(line);
    if (sv.empty() || sv[0] == '#') continue;

    auto fields = split(std::string(sv), '\t');
    if (fields.size() != 2) {
      throw ParseError(where + ": expected `word<TAB>phonemes`, got " +
                       std::to_string(fields.size()) + " field(s)");
    }
    const std::string word = std::string(trim(fields[0]));
    if (word.empty()) throw ParseError(where + ": empty orthography");
    auto phonemes = split_ws(fields[1]);
    if (phonemes.empty()) throw ParseError(where + ": empty transcription");
    for (const auto& sym : phonemes) {
      if (!inventory.contains(sym)) {
        throw ParseError(where + ": unknown phoneme symbol '" + sym + "'");
      }
    }

    auto it = index_of.find(word);
    if (it == index_of.end()) {
      LexiconEntry entry;
      entry.orthography = utf8_graphemes(word);
      entry.transcriptions.push_back(std::move(phonemes));
      index_of.emplace(word, entries.size());
      entries.push_back(std::move(entry));
    } else {
      auto& entry = entries[it->second];
      if (std::find(entry.transcriptions.begin(), entry.transcriptions.end(), phonemes) !=
          entry.transcriptions.end()) {
        throw ParseError(where + ": duplicate transcription for word '" + word + "'");
      }
      entry.transcriptions.push_back(std::move(phonemes));
    }
  }
  return entries;
}

void save_lexicon(std::ostream& out, const std::vector<LexiconEntry>& entries) {
  for (const auto& entry : entries) {
    for (const auto& transcription : entry.transcriptions) {
      out << entry.word() << '\t' << join(transcription, " ") << '\n';
    }
  }
}

std::size_t min_merged_length(const std::vector<std::string>& transcription,
                              const PhonemeInventory& inventory) {
  const auto& compounds = inventory.compound_expansions();
  const std::size_t n = transcription.size();
  // best[i] = fewest symbols covering the first i phonemes.
  std::vector<std::size_t> best(n + 1, n + 1);
  best[0] = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (best[i] > n) continue;
    best[i + 1] = std::min(best[i + 1], best[i] + 1);
    for (const auto& [sym, parts] : compounds) {
      const std::size_t k = parts.size();
      if (i + k > n) continue;
      if (std::equal(parts.begin(), parts.end(), transcription.begin() + i)) {
        best[i + k] = std::min(best[i + k], best[i] + 1);
      }
    }
  }
  return best[n];
}

FilterResult filter_alignable(const std::vector<LexiconEntry>& entries,
                              const PhonemeInventory& inventory) {
  FilterResult result;
  for (const auto& entry : entries) {
    bool ok = true;
    for (const auto& transcription : entry.transcriptions) {
      if (min_merged_length(transcription, inventory) > entry.orthography.size()) {
        ok = false;
        break;
      }
    }
    (ok ? result.kept : result.dropped).push_back(entry);
  }
  return result;
}

ParallelLexicon pair_lexicons(const std::vector<LexiconEntry>& a,
                              const std::vector<LexiconEntry>& b) {
  ParallelLexicon out;
  for (const auto& entry : a) out.variant_a.emplace(entry.word(), entry);
  for (const auto& entry : b) out.variant_b.emplace(entry.word(), entry);
  for (const auto& [word, entry] : out.variant_a) {
    if (out.variant_b.count(word)) out.shared_words.push_back(word);
  }
  return out;
}

}  // namespace g2p
