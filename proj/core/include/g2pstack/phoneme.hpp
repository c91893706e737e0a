#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace g2p {

/// One pronunciation symbol. The null phoneme "-" fills alignment gaps;
/// a compound phoneme stands for a fixed sequence of base phonemes that
/// map onto a single grapheme.
struct Phoneme {
  std::string symbol;
  bool is_null = false;
  bool is_compound = false;
  std::vector<std::string> parts;  // non-empty only for compounds
};

/// The closed symbol set for one transcription scheme.
///
/// Invariants enforced on construction:
///   - exactly one null phoneme, with symbol "-";
///   - compound expansions have length >= 2 and consist of known,
///     non-compound, non-null symbols;
///   - symbol tokens are unique.
class PhonemeInventory {
 public:
  PhonemeInventory() = default;
  PhonemeInventory(std::string scheme_name, std::vector<Phoneme> symbols);

  static PhonemeInventory load(const std::string& path);
  static PhonemeInventory parse(std::istream& in, std::string scheme_name);
  void save(std::ostream& out) const;

  const std::string& scheme_name() const { return scheme_name_; }
  bool contains(const std::string& symbol) const { return symbols_.count(symbol) > 0; }
  const Phoneme& at(const std::string& symbol) const;
  const std::string& null_symbol() const;
  std::size_t size() const { return symbols_.size(); }

  /// Symbols in sorted order (includes the null phoneme and compounds).
  const std::map<std::string, Phoneme>& symbols() const { return symbols_; }

  /// compound symbol -> expansion into base symbols, sorted by symbol.
  const std::map<std::string, std::vector<std::string>>& compound_expansions() const {
    return compounds_;
  }

  /// Replace compound symbols by their base-symbol expansions.
  std::vector<std::string> expand_compounds(const std::vector<std::string>& phonemes) const;

  /// Drop null symbols, keeping everything else in order.
  std::vector<std::string> strip_nulls(const std::vector<std::string>& phonemes) const;

 private:
  std::string scheme_name_;
  std::map<std::string, Phoneme> symbols_;
  std::map<std::string, std::vector<std::string>> compounds_;
};

}  // namespace g2p
