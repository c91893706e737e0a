#include "g2pstack/instances.hpp"

#include <ostream>

#include "g2pstack/error.hpp"
#include "g2pstack/text.hpp"

namespace g2p {

std::vector<Instance> window_sequence(const std::vector<std::string>& symbols,
                                      const std::vector<std::string>& labels,
                                      const InstanceSchema& schema, int word_id) {
  if (symbols.size() != labels.size()) {
    throw ArgumentError("window_sequence: symbol and label counts differ");
  }
  const int n = static_cast<int>(symbols.size());
  std::vector<Instance> out;
  out.reserve(symbols.size());
  for (int i = 0; i < n; ++i) {
    Instance inst;
    inst.word_id = word_id;
    inst.position = i;
    inst.label = labels[static_cast<std::size_t>(i)];
    inst.features.reserve(static_cast<std::size_t>(schema.width()));
    for (int d = -schema.left_context; d <= schema.right_context; ++d) {
      const int p = i + d;
      inst.features.push_back(p >= 0 && p < n ? symbols[static_cast<std::size_t>(p)]
                                              : schema.pad_symbol);
    }
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<Instance> window_instances(const AlignedEntry& entry, const InstanceSchema& schema,
                                       int word_id) {
  return window_sequence(entry.orthography, entry.phonemes, schema, word_id);
}

std::vector<std::string> window_at(const std::vector<std::string>& symbols, int position,
                                   const InstanceSchema& schema) {
  const int n = static_cast<int>(symbols.size());
  std::vector<std::string> features;
  features.reserve(static_cast<std::size_t>(schema.left_context + 1 + schema.right_context));
  for (int d = -schema.left_context; d <= schema.right_context; ++d) {
    const int p = position + d;
    features.push_back(p >= 0 && p < n ? symbols[static_cast<std::size_t>(p)]
                                       : schema.pad_symbol);
  }
  return features;
}

std::vector<Instance> augment_instances(const std::vector<Instance>& base,
                                        const std::vector<PredictionStream>& predictions,
                                        InstanceSchema& schema) {
  for (const auto& stream : predictions) {
    if (stream.symbols.size() != base.size()) {
      throw AlignmentError("augment_instances: stream '" + stream.name + "' has " +
                           std::to_string(stream.symbols.size()) + " symbols for " +
                           std::to_string(base.size()) + " instances");
    }
  }
  std::vector<Instance> out = base;
  for (const auto& stream : predictions) {
    schema.extra_feature_names.push_back(stream.name);
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i].features.push_back(stream.symbols[i]);
    }
  }
  return out;
}

std::vector<std::string> labels_to_transformation_classes(const AlignedEntry& a,
                                                          const AlignedEntry& b) {
  if (a.word != b.word) {
    throw PairingError("transformation classes: words differ ('" + a.word + "' vs '" + b.word +
                       "')");
  }
  if (a.phonemes.size() != b.phonemes.size()) {
    throw PairingError("transformation classes: aligned lengths differ for '" + a.word + "'");
  }
  std::vector<std::string> classes;
  classes.reserve(a.phonemes.size());
  for (std::size_t i = 0; i < a.phonemes.size(); ++i) {
    classes.push_back(a.phonemes[i] == b.phonemes[i] ? "0" : b.phonemes[i]);
  }
  return classes;
}

void save_instances(std::ostream& out, const std::vector<Instance>& instances) {
  for (const auto& inst : instances) {
    out << join(inst.features, ",") << ',' << inst.label << '\n';
  }
}

}  // namespace g2p
