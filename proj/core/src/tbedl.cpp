#include "g2pstack/tbedl.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <unordered_map>

#include "g2pstack/error.hpp"
#include "g2pstack/feature_stats.hpp"
#include "g2pstack/text.hpp"

namespace g2p {

namespace {

bool context_holds_ids(TemplateKind kind, int span, int value, const std::vector<int>& symbols,
                       std::size_t i) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(symbols.size());
  const std::ptrdiff_t p = static_cast<std::ptrdiff_t>(i);
  switch (kind) {
    case TemplateKind::PrevExact:
      return p - span >= 0 && symbols[static_cast<std::size_t>(p - span)] == value;
    case TemplateKind::NextExact:
      return p + span < n && symbols[static_cast<std::size_t>(p + span)] == value;
    case TemplateKind::PrevWithin:
      for (int d = 1; d <= span; ++d) {
        if (p - d >= 0 && symbols[static_cast<std::size_t>(p - d)] == value) return true;
      }
      return false;
    case TemplateKind::NextWithin:
      for (int d = 1; d <= span; ++d) {
        if (p + d < n && symbols[static_cast<std::size_t>(p + d)] == value) return true;
      }
      return false;
    case TemplateKind::WordStartWithin:
      return p < span;
    case TemplateKind::WordEndWithin:
      return p + span >= n;
  }
  return false;
}

// Candidate key packing: (from, to, template index, value) into one word.
// Symbol and template counts stay far below the field widths.
std::uint64_t pack_key(int from, int to, int tmpl, int value) {
  return (static_cast<std::uint64_t>(from) << 48) | (static_cast<std::uint64_t>(to) << 32) |
         (static_cast<std::uint64_t>(tmpl) << 24) | static_cast<std::uint64_t>(value);
}

struct UnpackedKey {
  int from, to, tmpl, value;
};

UnpackedKey unpack_key(std::uint64_t key) {
  return {static_cast<int>(key >> 48), static_cast<int>((key >> 32) & 0xffff),
          static_cast<int>((key >> 24) & 0xff), static_cast<int>(key & 0xffffff)};
}

struct Candidate {
  std::uint64_t key = 0;
  std::int64_t good = 0;
  std::int64_t bad = 0;
};

}  // namespace

std::vector<ContextTemplate> default_templates() {
  std::vector<ContextTemplate> templates;
  for (int span = 1; span <= 3; ++span) templates.push_back({TemplateKind::PrevExact, span});
  for (int span = 1; span <= 3; ++span) templates.push_back({TemplateKind::NextExact, span});
  for (int span = 2; span <= 3; ++span) templates.push_back({TemplateKind::PrevWithin, span});
  for (int span = 2; span <= 3; ++span) templates.push_back({TemplateKind::NextWithin, span});
  for (int span = 1; span <= 2; ++span) templates.push_back({TemplateKind::WordStartWithin, span});
  for (int span = 1; span <= 2; ++span) templates.push_back({TemplateKind::WordEndWithin, span});
  return templates;
}

bool context_holds(const TransformationRule& rule, const std::vector<std::string>& symbols,
                   std::size_t i) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(symbols.size());
  const std::ptrdiff_t p = static_cast<std::ptrdiff_t>(i);
  const int span = rule.context.span;
  switch (rule.context.kind) {
    case TemplateKind::PrevExact:
      return p - span >= 0 && symbols[static_cast<std::size_t>(p - span)] == rule.context_value;
    case TemplateKind::NextExact:
      return p + span < n && symbols[static_cast<std::size_t>(p + span)] == rule.context_value;
    case TemplateKind::PrevWithin:
      for (int d = 1; d <= span; ++d) {
        if (p - d >= 0 && symbols[static_cast<std::size_t>(p - d)] == rule.context_value) {
          return true;
        }
      }
      return false;
    case TemplateKind::NextWithin:
      for (int d = 1; d <= span; ++d) {
        if (p + d < n && symbols[static_cast<std::size_t>(p + d)] == rule.context_value) {
          return true;
        }
      }
      return false;
    case TemplateKind::WordStartWithin:
      return p < span;
    case TemplateKind::WordEndWithin:
      return p + span >= n;
  }
  return false;
}

std::vector<std::string> apply_rule(const TransformationRule& rule,
                                    const std::vector<std::string>& symbols) {
  std::vector<std::string> out = symbols;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (symbols[i] == rule.from && context_holds(rule, symbols, i)) out[i] = rule.to;
  }
  return out;
}

std::vector<std::string> apply_rules(const RuleProgram& program,
                                     const std::vector<std::string>& symbols) {
  std::vector<std::string> current = symbols;
  for (const auto& rule : program.rules) current = apply_rule(rule, current);
  return current;
}

RuleProgram learn_tbedl(const std::vector<AlignedPair>& pairs,
                        const std::vector<ContextTemplate>& raw_templates, int threshold) {
  if (threshold < 1) throw ArgumentError("tbedl: threshold must be >= 1");
  std::vector<ContextTemplate> templates = raw_templates;
  {
    // Duplicate templates would make candidate tie-breaking ambiguous.
    std::vector<ContextTemplate> unique;
    for (const auto& tmpl : templates) {
      if (tmpl.span < 1) throw ArgumentError("tbedl: template span must be >= 1");
      bool seen = false;
      for (const auto& u : unique) {
        if (u.kind == tmpl.kind && u.span == tmpl.span) seen = true;
      }
      if (!seen) unique.push_back(tmpl);
    }
    templates = std::move(unique);
  }
  for (const auto& [a, b] : pairs) {
    if (a.word != b.word) {
      throw PairingError("tbedl: unpaired words '" + a.word + "' vs '" + b.word + "'");
    }
    if (a.phonemes.size() != b.phonemes.size()) {
      throw PairingError("tbedl: aligned lengths differ for word '" + a.word + "'");
    }
  }

  // Intern every symbol (current strings mutate toward the truth but only
  // ever hold symbols from either side).
  SymbolTable symbols;
  const int boundary = symbols.intern(kBoundaryMarker);
  std::vector<std::vector<int>> current(pairs.size());
  std::vector<std::vector<int>> truth(pairs.size());
  for (std::size_t w = 0; w < pairs.size(); ++w) {
    for (const auto& s : pairs[w].first.phonemes) current[w].push_back(symbols.intern(s));
    for (const auto& s : pairs[w].second.phonemes) truth[w].push_back(symbols.intern(s));
  }

  const int n_templates = static_cast<int>(templates.size());
  RuleProgram program;
  program.threshold = threshold;

  // Reused per iteration: every (template, value) instantiation at one site.
  std::vector<std::pair<int, int>> site_contexts;  // (template index, value id)
  auto collect_contexts = [&](const std::vector<int>& word, std::size_t i) {
    site_contexts.clear();
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(word.size());
    const std::ptrdiff_t p = static_cast<std::ptrdiff_t>(i);
    for (int t = 0; t < n_templates; ++t) {
      const auto& tmpl = templates[static_cast<std::size_t>(t)];
      switch (tmpl.kind) {
        case TemplateKind::PrevExact:
          if (p - tmpl.span >= 0) {
            site_contexts.emplace_back(t, word[static_cast<std::size_t>(p - tmpl.span)]);
          }
          break;
        case TemplateKind::NextExact:
          if (p + tmpl.span < n) {
            site_contexts.emplace_back(t, word[static_cast<std::size_t>(p + tmpl.span)]);
          }
          break;
        case TemplateKind::PrevWithin:
          for (int d = 1; d <= tmpl.span; ++d) {
            if (p - d < 0) break;
            const int v = word[static_cast<std::size_t>(p - d)];
            bool dup = false;
            for (int e = 1; e < d; ++e) {
              if (word[static_cast<std::size_t>(p - e)] == v) dup = true;
            }
            if (!dup) site_contexts.emplace_back(t, v);
          }
          break;
        case TemplateKind::NextWithin:
          for (int d = 1; d <= tmpl.span; ++d) {
            if (p + d >= n) break;
            const int v = word[static_cast<std::size_t>(p + d)];
            bool dup = false;
            for (int e = 1; e < d; ++e) {
              if (word[static_cast<std::size_t>(p + e)] == v) dup = true;
            }
            if (!dup) site_contexts.emplace_back(t, v);
          }
          break;
        case TemplateKind::WordStartWithin:
          if (p < tmpl.span) site_contexts.emplace_back(t, boundary);
          break;
        case TemplateKind::WordEndWithin:
          if (p + tmpl.span >= n) site_contexts.emplace_back(t, boundary);
          break;
      }
    }
  };

  for (;;) {
    // Mismatch targets observed per `from` symbol in this iteration.
    std::unordered_map<int, std::vector<int>> to_set;
    bool any_mismatch = false;
    for (std::size_t w = 0; w < pairs.size(); ++w) {
      for (std::size_t i = 0; i < current[w].size(); ++i) {
        if (current[w][i] == truth[w][i]) continue;
        any_mismatch = true;
        auto& tos = to_set[current[w][i]];
        if (std::find(tos.begin(), tos.end(), truth[w][i]) == tos.end()) {
          tos.push_back(truth[w][i]);
        }
      }
    }
    if (!any_mismatch) break;

    // Score every instantiable candidate in one pass over the corpus.
    std::unordered_map<std::uint64_t, std::pair<std::int64_t, std::int64_t>> scores;
    for (std::size_t w = 0; w < pairs.size(); ++w) {
      const auto& word = current[w];
      for (std::size_t i = 0; i < word.size(); ++i) {
        auto ts = to_set.find(word[i]);
        if (ts == to_set.end()) continue;  // this symbol is never wrong anywhere
        collect_contexts(word, i);
        if (word[i] != truth[w][i]) {
          // A rule sending it to the truth fixes this site; other targets
          // leave it wrong either way.
          for (const auto& [t, value] : site_contexts) {
            ++scores[pack_key(word[i], truth[w][i], t, value)].first;
          }
        } else {
          // Any rule rewriting this symbol here breaks a correct site.
          for (int to : ts->second) {
            for (const auto& [t, value] : site_contexts) {
              ++scores[pack_key(word[i], to, t, value)].second;
            }
          }
        }
      }
    }

    // Argmax by score, then good, then rendered rule text.
    Candidate best;
    bool have_best = false;
    auto render_key = [&](std::uint64_t key) {
      const auto k = unpack_key(key);
      TransformationRule rule;
      rule.from = symbols.name(k.from);
      rule.to = symbols.name(k.to);
      rule.context = templates[static_cast<std::size_t>(k.tmpl)];
      rule.context_value = symbols.name(k.value);
      return render_transformation_rule(rule);
    };
    for (const auto& [key, gb] : scores) {
      const Candidate cand{key, gb.first, gb.second};
      const std::int64_t score = cand.good - cand.bad;
      if (!have_best) {
        best = cand;
        have_best = true;
        continue;
      }
      const std::int64_t best_score = best.good - best.bad;
      if (score > best_score || (score == best_score && cand.good > best.good)) {
        best = cand;
      } else if (score == best_score && cand.good == best.good &&
                 render_key(cand.key) < render_key(best.key)) {
        best = cand;
      }
    }
    if (!have_best || best.good - best.bad < threshold) break;

    const auto k = unpack_key(best.key);
    TransformationRule rule;
    rule.from = symbols.name(k.from);
    rule.to = symbols.name(k.to);
    rule.context = templates[static_cast<std::size_t>(k.tmpl)];
    rule.context_value = symbols.name(k.value);
    rule.good = best.good;
    rule.bad = best.bad;

    // Apply simultaneously, reading each pre-pass string.
    for (std::size_t w = 0; w < pairs.size(); ++w) {
      auto& word = current[w];
      std::vector<int> next = word;
      for (std::size_t i = 0; i < word.size(); ++i) {
        if (word[i] == k.from &&
            context_holds_ids(rule.context.kind, rule.context.span, k.value, word, i)) {
          next[i] = k.to;
        }
      }
      word = std::move(next);
    }
    program.rules.push_back(std::move(rule));
  }
  return program;
}

OverlapReport overlap_report(const std::vector<AlignedPair>& pairs, const RuleProgram* program) {
  std::int64_t positions = 0, position_hits = 0;
  std::int64_t words = 0, word_hits = 0;
  for (const auto& [a, b] : pairs) {
    if (a.phonemes.size() != b.phonemes.size()) {
      throw PairingError("overlap: aligned lengths differ for word '" + a.word + "'");
    }
    const std::vector<std::string> left =
        program ? apply_rules(*program, a.phonemes) : a.phonemes;
    bool all = true;
    for (std::size_t i = 0; i < left.size(); ++i) {
      ++positions;
      if (left[i] == b.phonemes[i]) {
        ++position_hits;
      } else {
        all = false;
      }
    }
    ++words;
    if (all) ++word_hits;
  }
  OverlapReport report;
  report.phoneme_overlap =
      positions == 0 ? 1.0 : static_cast<double>(position_hits) / static_cast<double>(positions);
  report.word_overlap =
      words == 0 ? 1.0 : static_cast<double>(word_hits) / static_cast<double>(words);
  return report;
}

std::string template_name(TemplateKind kind) {
  switch (kind) {
    case TemplateKind::PrevWithin: return "PREV_WITHIN";
    case TemplateKind::NextWithin: return "NEXT_WITHIN";
    case TemplateKind::PrevExact: return "PREV_EXACT";
    case TemplateKind::NextExact: return "NEXT_EXACT";
    case TemplateKind::WordStartWithin: return "WORD_START_WITHIN";
    case TemplateKind::WordEndWithin: return "WORD_END_WITHIN";
  }
  throw InternalError("unhandled template kind");
}

TemplateKind template_kind_from_name(const std::string& name) {
  if (name == "PREV_WITHIN") return TemplateKind::PrevWithin;
  if (name == "NEXT_WITHIN") return TemplateKind::NextWithin;
  if (name == "PREV_EXACT") return TemplateKind::PrevExact;
  if (name == "NEXT_EXACT") return TemplateKind::NextExact;
  if (name == "WORD_START_WITHIN") return TemplateKind::WordStartWithin;
  if (name == "WORD_END_WITHIN") return TemplateKind::WordEndWithin;
  throw ParseError("unknown rule template '" + name + "'");
}

std::string render_transformation_rule(const TransformationRule& rule) {
  return rule.from + " " + rule.to + " " + template_name(rule.context.kind) + " " +
         std::to_string(rule.context.span) + " " + rule.context_value;
}

void save_rule_program(std::ostream& out, const RuleProgram& program) {
  out << "# threshold " << program.threshold << '\n';
  for (const auto& rule : program.rules) {
    out << render_transformation_rule(rule) << " # good=" << rule.good << " bad=" << rule.bad
        << '\n';
  }
}

RuleProgram load_rule_program(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open rule file: " + path);
  return parse_rule_program(in, path);
}

RuleProgram parse_rule_program(std::istream& in, const std::string& source_name) {
  RuleProgram program;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source_name + ":" + std::to_string(lineno);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // Strip a trailing `# ...` comment; full-line comments may carry the
    // threshold header written by save_rule_program.
    std::string body = line;
    std::int64_t good = 0, bad = 0;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      body = line.substr(0, hash);
      const auto comment = split_ws(line.substr(hash + 1));
      if (trim(body).empty() && comment.size() == 2 && comment[0] == "threshold") {
        program.threshold = static_cast<int>(std::stoll(comment[1]));
        continue;
      }
      for (const auto& token : comment) {
        if (token.rfind("good=", 0) == 0) good = std::stoll(token.substr(5));
        if (token.rfind("bad=", 0) == 0) bad = std::stoll(token.substr(4));
      }
    }
    const auto fields = split_ws(body);
    if (fields.empty()) continue;
    if (fields.size() != 5) {
      throw ParseError(where + ": expected `from to TEMPLATE span value`");
    }
    TransformationRule rule;
    rule.from = fields[0];
    rule.to = fields[1];
    rule.context.kind = template_kind_from_name(fields[2]);
    try {
      rule.context.span = static_cast<int>(std::stoll(fields[3]));
    } catch (const std::exception&) {
      throw ParseError(where + ": bad span '" + fields[3] + "'");
    }
    if (rule.context.span < 1) throw ParseError(where + ": span must be >= 1");
    rule.context_value = fields[4];
    rule.good = good;
    rule.bad = bad;
    if (rule.from == rule.to) throw ParseError(where + ": rule must change the symbol");
    program.rules.push_back(std::move(rule));
  }
  return program;
}

}  // namespace g2p
