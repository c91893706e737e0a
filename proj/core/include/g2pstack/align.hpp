#pragma once

#include <cmath>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "g2pstack/lexicon.hpp"
#include "g2pstack/phoneme.hpp"

namespace g2p {

/// Grapheme/phoneme association weights (log probabilities) estimated from
/// a corpus. Pairs never seen together receive a configurable floor weight.
class AssociationModel {
 public:
  AssociationModel() = default;
  AssociationModel(double null_penalty, double floor_weight)
      : null_penalty_(null_penalty), floor_(floor_weight) {}

  double score(const std::string& grapheme, const std::string& phoneme) const;
  double null_penalty() const { return null_penalty_; }
  double floor_weight() const { return floor_; }

  /// Overwrite the weight of one pair (used by tests and hand-built models).
  void set_score(const std::string& grapheme, const std::string& phoneme, double log_prob);

 private:
  friend AssociationModel estimate_associations(const std::vector<LexiconEntry>&, int,
                                                const PhonemeInventory&, double, double);
  std::map<std::string, std::map<std::string, double>> scores_;  // grapheme -> phoneme -> logp
  std::map<std::string, double> zero_score_;  // smoothed weight for unseen pairs of a seen grapheme
  double null_penalty_ = -2.302585092994046;  // log(0.1)
  double floor_ = -13.815510557964274;        // log(1e-6)
};

/// A word whose grapheme and phoneme sequences have equal length. Phonemes
/// may include the null symbol and compound symbols; stripping nulls and
/// expanding compounds recovers the source transcription.
struct AlignedEntry {
  std::vector<std::string> orthography;
  std::vector<std::string> phonemes;
  std::string word;              // identifies the source LexiconEntry
  int transcription_index = 0;   // which transcription of the source
};

/// Hard-EM association estimation. Iteration 0 counts co-occurrences inside
/// a positional band (|i*|P| - j*|G|| <= |G|); each later iteration re-counts
/// over the current best alignments. Weights are logs of add-one smoothed
/// relative frequencies.
AssociationModel estimate_associations(const std::vector<LexiconEntry>& entries, int iterations,
                                       const PhonemeInventory& inventory,
                                       double null_penalty = -2.302585092994046,
                                       double floor_weight = -13.815510557964274);

enum class AlignMoveKind { Match, CompoundMatch, NullInsert };

struct AlignMove {
  AlignMoveKind kind;
  std::string grapheme;
  std::string output;  // emitted symbol: phoneme, compound symbol, or "-"
  double cost;
};

struct AlignmentTrace {
  AlignedEntry entry;
  std::vector<AlignMove> moves;
  double total_cost = 0.0;
};

/// Minimum-cost alignment of one transcription to the orthography.
/// Moves: match (1 grapheme + 1 phoneme), compound-match (1 grapheme +
/// k >= 2 phonemes forming a declared compound), null-insert (1 grapheme).
/// Equal-cost paths resolve toward match over compound over null, taken as
/// early (leftmost) as possible.
AlignedEntry align_entry(const LexiconEntry& entry, int transcription_index,
                         const AssociationModel& model, const PhonemeInventory& inventory);
AlignmentTrace align_entry_traced(const LexiconEntry& entry, int transcription_index,
                                  const AssociationModel& model, const PhonemeInventory& inventory);

struct AlignmentFailure {
  std::string word;
  int transcription_index = 0;
  std::string message;
};

struct CorpusAlignment {
  std::vector<AlignedEntry> entries;          // entry order, then transcription index
  std::vector<AlignmentFailure> failures;     // entries skipped with reasons
};

CorpusAlignment align_corpus(const std::vector<LexiconEntry>& entries,
                             const AssociationModel& model, const PhonemeInventory& inventory);

/// Aligned lexicon TSV: `word<TAB>symbols`, one line per aligned entry,
/// symbol count equal to the grapheme count.
void save_aligned(std::ostream& out, const std::vector<AlignedEntry>& entries);
std::vector<AlignedEntry> load_aligned(const std::string& path, const PhonemeInventory& inventory);
std::vector<AlignedEntry> parse_aligned(std::istream& in, const PhonemeInventory& inventory,
                                        const std::string& source_name);

}  // namespace g2p
