#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "g2pstack/align.hpp"

namespace g2p {

/// Context pattern restricting where a transformation may fire. `WithinK`
/// kinds test "one of the k previous/next symbols equals the value";
/// `Exact` kinds test the symbol exactly k positions away; the word-boundary
/// kinds test whether the word edge lies within k positions.
enum class TemplateKind {
  PrevWithin,
  NextWithin,
  PrevExact,
  NextExact,
  WordStartWithin,
  WordEndWithin
};

struct ContextTemplate {
  TemplateKind kind = TemplateKind::PrevExact;
  int span = 1;  // >= 1
};

/// Word-boundary marker used in rule files and displays.
inline constexpr const char* kBoundaryMarker = "STAART";

/// "Change `from` to `to` when the context holds", with the training scores
/// recorded at adoption time (good = errors fixed, bad = matches broken).
struct TransformationRule {
  std::string from;
  std::string to;
  ContextTemplate context;
  std::string context_value;  // kBoundaryMarker for word-boundary templates
  std::int64_t good = 0;
  std::int64_t bad = 0;
};

/// Ordered rule list; application order equals learning order.
struct RuleProgram {
  std::vector<TransformationRule> rules;
  int threshold = 15;
};

/// The spans used when no explicit template list is given: exact contexts at
/// distance 1-3, disjunctive contexts over 2-3 neighbours, word boundaries
/// within 1-2.
std::vector<ContextTemplate> default_templates();

using AlignedPair = std::pair<AlignedEntry, AlignedEntry>;  // (variant A, variant B)

/// Greedy error-driven learning: repeatedly adopt the candidate rule with
/// the largest good - bad score over the whole corpus (ties: larger good,
/// then lexicographically smallest rendering) until the best score drops
/// below the threshold. Each pass applies simultaneously over the pre-pass
/// string.
RuleProgram learn_tbedl(const std::vector<AlignedPair>& pairs,
                        const std::vector<ContextTemplate>& templates, int threshold);

/// Whether a rule fires at position `i` of `symbols` (ignoring `from`).
bool context_holds(const TransformationRule& rule, const std::vector<std::string>& symbols,
                   std::size_t i);

std::vector<std::string> apply_rule(const TransformationRule& rule,
                                    const std::vector<std::string>& symbols);
std::vector<std::string> apply_rules(const RuleProgram& program,
                                     const std::vector<std::string>& symbols);

struct OverlapReport {
  double word_overlap = 0.0;
  double phoneme_overlap = 0.0;
};

/// Fraction of matching positions / fully matching words between the two
/// sides, after transforming variant A by `program` when given.
OverlapReport overlap_report(const std::vector<AlignedPair>& pairs,
                             const RuleProgram* program = nullptr);

std::string template_name(TemplateKind kind);
TemplateKind template_kind_from_name(const std::string& name);

/// `<from> <to> <TEMPLATE> <span> <value>` with a `# good=.. bad=..` comment.
std::string render_transformation_rule(const TransformationRule& rule);
void save_rule_program(std::ostream& out, const RuleProgram& program);
RuleProgram load_rule_program(const std::string& path);
RuleProgram parse_rule_program(std::istream& in, const std::string& source_name);

}  // namespace g2p
