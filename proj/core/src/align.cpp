#include "g2pstack/align.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "g2pstack/error.hpp"
#include "g2pstack/text.hpp"

namespace g2p {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Equal-cost paths reach a cell with different summation orders, so exact
// ties land a few ulps apart; treat costs within this margin as tied and
// let the move preference decide.
constexpr double kTieEpsilon = 1e-9;

using PairCounts = std::map<std::string, std::map<std::string, double>>;

AssociationModel model_from_counts(const PairCounts& counts, const PhonemeInventory& inventory,
                                   double null_penalty, double floor_weight) {
  AssociationModel model(null_penalty, floor_weight);
  const double vocab = static_cast<double>(inventory.size()) - 1.0;  // all non-null symbols
  for (const auto& [grapheme, row] : counts) {
    double total = 0.0;
    for (const auto& [phoneme, c] : row) total += c;
    const double denom = total + vocab;
    for (const auto& [phoneme, c] : row) {
      model.set_score(grapheme, phoneme, std::log((c + 1.0) / denom));
    }
    // Smoothed weight for pairs of this grapheme that were never counted.
    model.set_score(grapheme, "", std::log(1.0 / denom));
  }
  return model;
}

}  // namespace

double AssociationModel::score(const std::string& grapheme, const std::string& phoneme) const {
  auto git = scores_.find(grapheme);
  if (git == scores_.end()) return floor_;
  auto pit = git->second.find(phoneme);
  if (pit != git->second.end()) return pit->second;
  auto zit = zero_score_.find(grapheme);
  return zit != zero_score_.end() ? zit->second : floor_;
}

void AssociationModel::set_score(const std::string& grapheme, const std::string& phoneme,
                                 double log_prob) {
  if (phoneme.empty()) {
    zero_score_[grapheme] = log_prob;
  } else {
    scores_[grapheme][phoneme] = log_prob;
  }
}

AssociationModel estimate_associations(const std::vector<LexiconEntry>& entries, int iterations,
                                       const PhonemeInventory& inventory, double null_penalty,
                                       double floor_weight) {
  if (iterations < 1) throw ArgumentError("estimate_associations: iterations must be >= 1");
  if (entries.empty()) throw ArgumentError("estimate_associations: empty corpus");

  // Iteration 0: positional band counting. Phoneme j may pair with grapheme i
  // when |i*|P| - j*|G|| <= |G| (integer form of |i*|P|/|G| - j| <= 1).
  PairCounts counts;
  for (const auto& entry : entries) {
    const auto& graphemes = entry.orthography;
    const long long g_len = static_cast<long long>(graphemes.size());
    for (const auto& transcription : entry.transcriptions) {
      const long long p_len = static_cast<long long>(transcription.size());
      for (long long i = 0; i < g_len; ++i) {
        for (long long j = 0; j < p_len; ++j) {
          if (std::llabs(i * p_len - j * g_len) <= g_len) {
            counts[graphemes[static_cast<std::size_t>(i)]]
                  [transcription[static_cast<std::size_t>(j)]] += 1.0;
          }
        }
      }
    }
  }
  AssociationModel model = model_from_counts(counts, inventory, null_penalty, floor_weight);

  // Hard EM: re-count over the best alignments under the current model.
  for (int iter = 1; iter < iterations; ++iter) {
    PairCounts refit;
    for (const auto& entry : entries) {
      for (std::size_t t = 0; t < entry.transcriptions.size(); ++t) {
        AlignedEntry aligned;
        try {
          aligned = align_entry(entry, static_cast<int>(t), model, inventory);
        } catch (const AlignmentError&) {
          continue;  // unalignable entries do not contribute counts
        }
        for (std::size_t i = 0; i < aligned.orthography.size(); ++i) {
          if (aligned.phonemes[i] == inventory.null_symbol()) continue;
          refit[aligned.orthography[i]][aligned.phonemes[i]] += 1.0;
        }
      }
    }
    model = model_from_counts(refit, inventory, null_penalty, floor_weight);
  }
  return model;
}

AlignmentTrace align_entry_traced(const LexiconEntry& entry, int transcription_index,
                                  const AssociationModel& model,
                                  const PhonemeInventory& inventory) {
  if (transcription_index < 0 ||
      static_cast<std::size_t>(transcription_index) >= entry.transcriptions.size()) {
    throw ArgumentError("align_entry: transcription index out of range for '" + entry.word() + "'");
  }
  const auto& graphemes = entry.orthography;
  const auto& phonemes = entry.transcriptions[static_cast<std::size_t>(transcription_index)];
  const std::size_t G = graphemes.size();
  const std::size_t P = phonemes.size();
  const auto& compounds = inventory.compound_expansions();
  const double null_cost = -model.null_penalty();

  struct Cell {
    double cost = kInf;
    std::uint8_t move = 0;   // 0 none, 1 null, 2 compound, 3 match
    std::uint32_t span = 0;  // phonemes consumed by the move
    const std::string* symbol = nullptr;
  };
  std::vector<Cell> dp((G + 1) * (P + 1));
  auto cell = [&](std::size_t i, std::size_t j) -> Cell& { return dp[i * (P + 1) + j]; };
  cell(0, 0).cost = 0.0;

  // Candidates are evaluated null, compound, match with strict improvement
  // only; preferring the lower-priority move as the *last* step puts the
  // preferred moves as early (leftmost) in the word as possible.
  const auto strictly_better = [](double c, double current) {
    return c < current - kTieEpsilon;
  };
  for (std::size_t i = 1; i <= G; ++i) {
    const std::string& g = graphemes[i - 1];
    for (std::size_t j = 0; j <= P; ++j) {
      Cell& here = cell(i, j);
      if (cell(i - 1, j).cost < kInf) {
        double c = cell(i - 1, j).cost + null_cost;
        if (strictly_better(c, here.cost)) here = {c, 1, 0, nullptr};
      }
      for (const auto& [sym, parts] : compounds) {
        const std::size_t k = parts.size();
        if (j < k) continue;
        if (cell(i - 1, j - k).cost >= kInf) continue;
        if (!std::equal(parts.begin(), parts.end(), phonemes.begin() + (j - k))) continue;
        double c = cell(i - 1, j - k).cost - model.score(g, sym);
        if (strictly_better(c, here.cost)) here = {c, 2, static_cast<std::uint32_t>(k), &sym};
      }
      if (j >= 1 && cell(i - 1, j - 1).cost < kInf) {
        double c = cell(i - 1, j - 1).cost - model.score(g, phonemes[j - 1]);
        if (strictly_better(c, here.cost)) here = {c, 3, 1, &phonemes[j - 1]};
      }
    }
  }

  if (cell(G, P).cost >= kInf) {
    throw AlignmentError("no legal alignment for '" + entry.word() + "' (transcription " +
                         std::to_string(transcription_index) + ": " + join(phonemes, " ") + ")");
  }

  AlignmentTrace trace;
  trace.moves.resize(G);
  std::size_t i = G, j = P;
  while (i > 0) {
    const Cell& here = cell(i, j);
    AlignMove& move = trace.moves[i - 1];
    move.grapheme = graphemes[i - 1];
    switch (here.move) {
      case 1:
        move.kind = AlignMoveKind::NullInsert;
        move.output = inventory.null_symbol();
        move.cost = null_cost;
        break;
      case 2:
        move.kind = AlignMoveKind::CompoundMatch;
        move.output = *here.symbol;
        move.cost = -model.score(move.grapheme, move.output);
        break;
      case 3:
        move.kind = AlignMoveKind::Match;
        move.output = *here.symbol;
        move.cost = -model.score(move.grapheme, move.output);
        break;
      default:
        throw InternalError("alignment backtrace hit an unfilled cell");
    }
    j -= here.span;
    --i;
  }

  trace.entry.orthography = graphemes;
  trace.entry.word = entry.word();
  trace.entry.transcription_index = transcription_index;
  trace.entry.phonemes.reserve(G);
  trace.total_cost = 0.0;
  for (const auto& move : trace.moves) {
    trace.entry.phonemes.push_back(move.output);
    trace.total_cost += move.cost;
  }
  return trace;
}

AlignedEntry align_entry(const LexiconEntry& entry, int transcription_index,
                         const AssociationModel& model, const PhonemeInventory& inventory) {
  return align_entry_traced(entry, transcription_index, model, inventory).entry;
}

CorpusAlignment align_corpus(const std::vector<LexiconEntry>& entries,
                             const AssociationModel& model, const PhonemeInventory& inventory) {
  CorpusAlignment out;
  for (const auto& entry : entries) {
    for (std::size_t t = 0; t < entry.transcriptions.size(); ++t) {
      try {
        out.entries.push_back(align_entry(entry, static_cast<int>(t), model, inventory));
      } catch (const AlignmentError& e) {
        out.failures.push_back({entry.word(), static_cast<int>(t), e.what()});
      }
    }
  }
  return out;
}

void save_aligned(std::ostream& out, const std::vector<AlignedEntry>& entries) {
  for (const auto& entry : entries) {
    out << entry.word << '\t' << join(entry.phonemes, " ") << '\n';
  }
}

std::vector<AlignedEntry> load_aligned(const std::string& path,
                                       const PhonemeInventory& inventory) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open aligned lexicon file: " + path);
  return parse_aligned(in, inventory, path);
}

std::vector<AlignedEntry> parse_aligned(std::istream& in, const PhonemeInventory& inventory,
                                        const std::string& source_name) {
  std::vector<AlignedEntry> entries;
  std::map<std::string, int> seen;  // word -> next transcription index
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source_name + ":" + std::to_string(lineno);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view sv = trim(line);
    if (sv.empty() || sv[0] == '#') continue;
    auto fields = split(std::string(sv), '\t');
    if (fields.size() != 2) throw ParseError(where + ": expected `word<TAB>symbols`");

    AlignedEntry entry;
    entry.word = std::string(trim(fields[0]));
    if (entry.word.empty()) throw ParseError(where + ": empty orthography");
    entry.orthography = utf8_graphemes(entry.word);
    entry.phonemes = split_ws(fields[1]);
    if (entry.phonemes.size() != entry.orthography.size()) {
      throw ParseError(where + ": word '" + entry.word + "' has " +
                       std::to_string(entry.orthography.size()) + " graphemes but " +
                       std::to_string(entry.phonemes.size()) + " aligned symbols");
    }
    for (const auto& sym : entry.phonemes) {
      if (!inventory.contains(sym)) {
        throw ParseError(where + ": unknown phoneme symbol '" + sym + "'");
      }
    }
    entry.transcription_index = seen[entry.word]++;
    entries.push_back(std::move(entry));
  }
  return entries;
}

}  // namespace g2p
