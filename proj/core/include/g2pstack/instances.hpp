#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "g2pstack/align.hpp"

namespace g2p {

/// One fixed-width windowed classification case.
struct Instance {
  std::vector<std::string> features;
  std::string label;
  int word_id = 0;
  int position = 0;
};

/// Window geometry plus any appended prediction features.
struct InstanceSchema {
  int left_context = 3;
  int right_context = 3;
  std::vector<std::string> extra_feature_names;
  std::string pad_symbol = "=";

  int width() const {
    return left_context + 1 + right_context + static_cast<int>(extra_feature_names.size());
  }
};

/// One instance per symbol position: the window of symbols around it as
/// features, the aligned phoneme as label. `symbols` defaults to the
/// orthography (grapheme window); pass a phoneme sequence for tasks windowed
/// over phonemes.
std::vector<Instance> window_instances(const AlignedEntry& entry, const InstanceSchema& schema,
                                       int word_id = 0);

/// Windows over an arbitrary symbol sequence with explicit labels.
std::vector<Instance> window_sequence(const std::vector<std::string>& symbols,
                                      const std::vector<std::string>& labels,
                                      const InstanceSchema& schema, int word_id = 0);

/// The window features alone for one position of a sequence.
std::vector<std::string> window_at(const std::vector<std::string>& symbols, int position,
                                   const InstanceSchema& schema);

/// A named per-position prediction stream to append as a feature column.
struct PredictionStream {
  std::string name;
  std::vector<std::string> symbols;  // one per base instance, in base order
};

/// Extend every instance with the stream symbols, in declared order.
/// Streams must line up with the base instances one-to-one.
std::vector<Instance> augment_instances(const std::vector<Instance>& base,
                                        const std::vector<PredictionStream>& predictions,
                                        InstanceSchema& schema);

/// Per-position classes for the variant translation task: "0" where the two
/// aligned phonemes agree, the variant-b phoneme where they differ.
std::vector<std::string> labels_to_transformation_classes(const AlignedEntry& a,
                                                          const AlignedEntry& b);

/// C4.5-style data file: `f1,f2,...,fk,label` per line.
void save_instances(std::ostream& out, const std::vector<Instance>& instances);

}  // namespace g2p
