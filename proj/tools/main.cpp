// g2pstack command line tool: synthesis, alignment, instance generation,
// training, prediction, stacking experiments, transformation-rule learning,
// and evaluation, end to end over lexicon TSV files.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "g2pstack/align.hpp"
#include "g2pstack/error.hpp"
#include "g2pstack/eval.hpp"
#include "g2pstack/instances.hpp"
#include "g2pstack/learner.hpp"
#include "g2pstack/lexicon.hpp"
#include "g2pstack/phoneme.hpp"
#include "g2pstack/stacking.hpp"
#include "g2pstack/synth.hpp"
#include "g2pstack/tbedl.hpp"
#include "g2pstack/text.hpp"

namespace {

using namespace g2p;

/// Stream for a `--out` path; "-" selects standard output.
class OutputFile {
 public:
  explicit OutputFile(const std::string& path) : path_(path) {
    if (path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw DataError("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return path_ == "-" ? std::cout : file_; }
  void finish() {
    if (path_ != "-") {
      file_.close();
      if (!file_) throw DataError("error writing output file: " + path_);
    }
  }

 private:
  std::string path_;
  std::ofstream file_;
};

std::ifstream open_input(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(std::string("cannot open ") + what + " file: " + path);
  return in;
}

std::vector<Instance> load_instances_csv(const std::string& path) {
  std::ifstream in = open_input(path, "instances");
  std::vector<Instance> instances;
  std::string line;
  int lineno = 0;
  int width = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    auto fields = split(line, ',');
    if (fields.size() < 2) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected `f1,...,fk,label`");
    }
    if (width < 0) width = static_cast<int>(fields.size()) - 1;
    if (static_cast<int>(fields.size()) - 1 != width) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": inconsistent feature count");
    }
    Instance inst;
    inst.label = fields.back();
    fields.pop_back();
    inst.features = std::move(fields);
    inst.word_id = lineno;
    instances.push_back(std::move(inst));
  }
  return instances;
}

/// Schema of a given width, as symmetric a window as possible.
InstanceSchema schema_for_width(int width) {
  InstanceSchema schema;
  schema.left_context = (width - 1) / 2;
  schema.right_context = width - 1 - schema.left_context;
  return schema;
}

/// First-listed transcription per word, paired across the two variants.
std::vector<AlignedPair> pair_first_transcriptions(const std::vector<AlignedEntry>& a,
                                                   const std::vector<AlignedEntry>& b) {
  std::map<std::string, const AlignedEntry*> first_b;
  for (const auto& entry : b) {
    if (entry.transcription_index == 0) first_b.emplace(entry.word, &entry);
  }
  std::vector<AlignedPair> pairs;
  for (const auto& entry : a) {
    if (entry.transcription_index != 0) continue;
    auto it = first_b.find(entry.word);
    if (it == first_b.end()) {
      throw PairingError("word '" + entry.word + "' is missing from the second aligned lexicon");
    }
    pairs.emplace_back(entry, *it->second);
  }
  return pairs;
}

// ---------------------------------------------------------------------------
// Subcommand option blocks.

struct SynthOptions {
  std::string out_dir;
  SyntheticSpec spec;
  bool no_dialect_rules = false;
  bool gold_aligned = false;
};

void run_synth(const SynthOptions& opt) {
  SyntheticSpec spec = opt.spec;
  spec.dialect_rules = opt.no_dialect_rules ? std::vector<TransformationRule>{}
                                            : default_dialect_rules();
  const SyntheticCorpus corpus = generate_synthetic(spec);

  auto write = [&](const std::string& name, auto&& writer) {
    const std::string path = opt.out_dir + "/" + name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + path);
    writer(out);
    out.close();
    if (!out) throw DataError("error writing output file: " + path);
  };
  write("inventory.txt", [&](std::ostream& out) { corpus.inventory.save(out); });
  write("lexicon_a.tsv", [&](std::ostream& out) { save_lexicon(out, corpus.lexicon_a); });
  write("lexicon_b.tsv", [&](std::ostream& out) { save_lexicon(out, corpus.lexicon_b); });
  write("rules_true.txt", [&](std::ostream& out) { save_rule_program(out, corpus.true_rules); });
  if (opt.gold_aligned) {
    write("aligned_a.tsv", [&](std::ostream& out) { save_aligned(out, corpus.gold_aligned_a); });
    write("aligned_b.tsv", [&](std::ostream& out) { save_aligned(out, corpus.gold_aligned_b); });
  }
  std::cerr << "synth: wrote " << corpus.lexicon_a.size() << " words to " << opt.out_dir << "\n";
}

struct AlignOptions {
  std::string lexicon, inventory, out = "-", report;
  double null_penalty = -2.302585092994046;
  int em_iters = 3;
};

void run_align(const AlignOptions& opt) {
  const PhonemeInventory inventory = PhonemeInventory::load(opt.inventory);
  const auto entries = load_lexicon(opt.lexicon, inventory);
  const FilterResult filtered = filter_alignable(entries, inventory);
  const AssociationModel model =
      estimate_associations(filtered.kept, opt.em_iters, inventory, opt.null_penalty);
  const CorpusAlignment aligned = align_corpus(filtered.kept, model, inventory);

  OutputFile out(opt.out);
  save_aligned(out.stream(), aligned.entries);
  out.finish();

  if (!opt.report.empty()) {
    std::ofstream report(opt.report, std::ios::binary);
    if (!report) throw DataError("cannot open report file: " + opt.report);
    for (const auto& entry : filtered.dropped) {
      report << entry.word() << "\tunalignable: transcription longer than orthography\n";
    }
    for (const auto& failure : aligned.failures) {
      report << failure.word << "\t" << failure.message << "\n";
    }
  }
  std::cerr << "align: " << aligned.entries.size() << " aligned, " << filtered.dropped.size()
            << " filtered, " << aligned.failures.size() << " failed\n";
}

struct InstancesOptions {
  std::string aligned, aligned_b, inventory, out = "-";
  std::string task = "g2p";
  int left = 3, right = 3;
};

void run_instances(const InstancesOptions& opt) {
  const PhonemeInventory inventory = PhonemeInventory::load(opt.inventory);
  const auto entries = load_aligned(opt.aligned, inventory);
  InstanceSchema schema;
  schema.left_context = opt.left;
  schema.right_context = opt.right;

  std::vector<Instance> instances;
  if (opt.task == "g2p") {
    int word_id = 0;
    for (const auto& entry : entries) {
      auto rows = window_instances(entry, schema, word_id++);
      instances.insert(instances.end(), rows.begin(), rows.end());
    }
  } else if (opt.task == "translate") {
    if (opt.aligned_b.empty()) {
      throw UsageError("--task translate requires --aligned-b");
    }
    const auto entries_b = load_aligned(opt.aligned_b, inventory);
    const auto pairs = pair_first_transcriptions(entries, entries_b);
    int word_id = 0;
    for (const auto& [a, b] : pairs) {
      const auto classes = labels_to_transformation_classes(a, b);
      auto rows = window_sequence(a.phonemes, classes, schema, word_id++);
      instances.insert(instances.end(), rows.begin(), rows.end());
    }
  } else {
    throw UsageError("unknown task '" + opt.task + "' (expected g2p|translate)");
  }

  OutputFile out(opt.out);
  save_instances(out.stream(), instances);
  out.finish();
  std::cerr << "instances: wrote " << instances.size() << " rows\n";
}

struct TrainOptions {
  std::string data, out, learner = "ib1ig";
  LearnerParams params;
  std::string weighting = "gainratio";
};

void run_train(const TrainOptions& opt) {
  const auto instances = load_instances_csv(opt.data);
  if (instances.empty()) throw DataError("no instances in " + opt.data);
  if (opt.weighting == "ig") {
    // flag shared with the igtree feature ordering
  } else if (opt.weighting != "gainratio") {
    throw UsageError("unknown weighting '" + opt.weighting + "' (expected ig|gainratio)");
  }
  LearnerParams params = opt.params;
  params.plain_ig = opt.weighting == "ig";
  const InstanceSchema schema = schema_for_width(static_cast<int>(instances[0].features.size()));
  const TrainedModel model =
      TrainedModel::train(learner_kind_from_name(opt.learner), instances, schema, params);

  OutputFile out(opt.out);
  model.save(out.stream());
  out.finish();
  std::cerr << "train: " << opt.learner << " model on " << instances.size() << " instances\n";
}

struct PredictOptions {
  std::string model, aligned, inventory, out = "-";
};

void run_predict(const PredictOptions& opt) {
  std::ifstream model_in = open_input(opt.model, "model");
  const TrainedModel model = TrainedModel::load(model_in);
  const PhonemeInventory inventory = PhonemeInventory::load(opt.inventory);
  const auto entries = load_aligned(opt.aligned, inventory);

  InstanceSchema schema;
  OutputFile out(opt.out);
  std::map<std::string, bool> done;  // one prediction per word
  for (const auto& entry : entries) {
    if (done[entry.word]) continue;
    done[entry.word] = true;
    std::vector<std::string> predicted;
    for (int i = 0; i < static_cast<int>(entry.orthography.size()); ++i) {
      predicted.push_back(model.classify(window_at(entry.orthography, i, schema)));
    }
    out.stream() << entry.word << '\t' << join(predicted, " ") << '\n';
  }
  out.finish();
}

struct EvalOptions {
  std::string gold, predicted, inventory;
  bool json = false;
  bool per_phoneme = false;
};

void run_eval(const EvalOptions& opt) {
  const PhonemeInventory inventory = PhonemeInventory::load(opt.inventory);
  const auto gold_entries = load_aligned(opt.gold, inventory);
  const auto predicted_entries = load_aligned(opt.predicted, inventory);

  const auto gold = gold_from_aligned(gold_entries);
  std::map<std::string, const AlignedEntry*> by_word;
  for (const auto& entry : predicted_entries) by_word.emplace(entry.word, &entry);
  std::vector<PredictedWord> predicted;
  for (const auto& g : gold) {
    auto it = by_word.find(g.word);
    if (it == by_word.end()) {
      throw ScoringError("no prediction for word '" + g.word + "'");
    }
    predicted.push_back({g.word, it->second->phonemes});
  }
  const FoldScore score = score_predictions(gold, predicted);

  if (opt.json) {
    nlohmann::json j;
    j["words"] = score.word_count;
    j["word_accuracy"] = score.word_accuracy;
    j["phonemes"] = score.phoneme_count;
    j["phoneme_accuracy"] = score.phoneme_accuracy;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "words            " << score.word_count << "\n";
    std::cout << "word_accuracy    " << format_fixed(score.word_accuracy, 6) << "\n";
    std::cout << "phonemes         " << score.phoneme_count << "\n";
    std::cout << "phoneme_accuracy " << format_fixed(score.phoneme_accuracy, 6) << "\n";
  }

  if (opt.per_phoneme) {
    // Positionwise error counts against the best-matching alternative.
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> table;  // gold -> (seen, wrong)
    for (std::size_t w = 0; w < gold.size(); ++w) {
      const auto& alternatives = gold[w].alternatives;
      const auto& hyp = predicted[w].phonemes;
      std::size_t best = 0;
      std::int64_t best_matches = -1;
      for (std::size_t a = 0; a < alternatives.size(); ++a) {
        std::int64_t matches = 0;
        for (std::size_t i = 0; i < hyp.size(); ++i) {
          if (alternatives[a][i] == hyp[i]) ++matches;
        }
        if (matches > best_matches) {
          best_matches = matches;
          best = a;
        }
      }
      for (std::size_t i = 0; i < hyp.size(); ++i) {
        auto& row = table[alternatives[best][i]];
        ++row.first;
        if (alternatives[best][i] != hyp[i]) ++row.second;
      }
    }
    std::cout << "\nphoneme\tcount\terrors\n";
    for (const auto& [sym, row] : table) {
      std::cout << sym << '\t' << row.first << '\t' << row.second << '\n';
    }
  }
}

struct StackOptions {
  std::string lexicon_a, lexicon_b, inventory, out = "-";
  std::string arch = "single", target = "b";
  std::string learner = "ib1ig", combiner = "ib1ig";
  std::string meta_learners = "rules,ib1ig,igtree,maxent";
  int folds = 10, inner_folds = 5;
  bool with_spelling = false, resubstitution = false;
  std::uint64_t seed = 0;
  int jobs = 0;
  int em_iters = 3;
  double null_penalty = -2.302585092994046;
  LearnerParams params;
};

void run_stack(const StackOptions& opt) {
  const PhonemeInventory inventory = PhonemeInventory::load(opt.inventory);
  const auto entries_a = load_lexicon(opt.lexicon_a, inventory);
  const auto entries_b = load_lexicon(opt.lexicon_b, inventory);
  const ParallelLexicon lexicon = pair_lexicons(entries_a, entries_b);

  PrepareOptions prep;
  prep.em_iterations = opt.em_iters;
  prep.null_penalty = opt.null_penalty;
  const PreparedCorpus corpus = prepare_corpus(lexicon, inventory, prep);
  if (!corpus.skipped.empty()) {
    std::cerr << "stack: skipped " << corpus.skipped.size() << " unalignable shared word(s)\n";
  }

  std::vector<std::string> words;
  words.reserve(corpus.words.size());
  for (const auto& w : corpus.words) words.push_back(w.word);
  const FoldAssignment folds = make_folds(words, opt.folds, opt.seed);

  StackingPlan plan;
  plan.arch = architecture_from_name(opt.arch);
  if (opt.target == "a") {
    plan.target = Variant::A;
  } else if (opt.target == "b") {
    plan.target = Variant::B;
  } else {
    throw UsageError("unknown target '" + opt.target + "' (expected a|b)");
  }
  plan.component = learner_kind_from_name(opt.learner);
  plan.combiner = learner_kind_from_name(opt.combiner);
  plan.meta_learners.clear();
  for (const auto& name : split(opt.meta_learners, ',')) {
    plan.meta_learners.push_back(learner_kind_from_name(std::string(trim(name))));
  }
  plan.with_spelling = opt.with_spelling;
  plan.resubstitution = opt.resubstitution;
  plan.inner_folds = opt.inner_folds;
  plan.seed = opt.seed;
  plan.jobs = opt.jobs > 0 ? opt.jobs
                           : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  plan.params = opt.params;

  const StackingRunResult result = run_plan(plan, corpus, folds);

  OutputFile out(opt.out);
  out.stream() << "fold\tphoneme_acc\tword_acc\n";
  for (std::size_t f = 0; f < result.evaluation.per_fold.size(); ++f) {
    const auto& fold = result.evaluation.per_fold[f];
    out.stream() << f << '\t' << format_fixed(fold.phoneme_accuracy, 6) << '\t'
                 << format_fixed(fold.word_accuracy, 6) << '\n';
  }
  out.stream() << "mean\t" << format_fixed(result.evaluation.mean_phoneme, 6) << '\t'
               << format_fixed(result.evaluation.mean_word, 6) << '\n';
  out.stream() << "stddev\t" << format_fixed(result.evaluation.stddev_phoneme, 6) << '\t'
               << format_fixed(result.evaluation.stddev_word, 6) << '\n';
  out.finish();

  std::cerr << "stack: " << architecture_name(plan.arch) << " target=" << opt.target
            << " combiner_width=" << result.combiner_width << " leakage_checks="
            << result.audit.checks << " violations=" << result.audit.violations << "\n";
}

struct TbedlLearnOptions {
  std::string a, b, inventory, out = "-";
  int threshold = 15;
};

void run_tbedl_learn(const TbedlLearnOptions& opt) {
  const PhonemeInventory inventory = PhonemeInventory::load(opt.inventory);
  const auto entries_a = load_aligned(opt.a, inventory);
  const auto entries_b = load_aligned(opt.b, inventory);
  const auto pairs = pair_first_transcriptions(entries_a, entries_b);

  const OverlapReport before = overlap_report(pairs);
  const RuleProgram program = learn_tbedl(pairs, default_templates(), opt.threshold);
  const OverlapReport after = overlap_report(pairs, &program);

  OutputFile out(opt.out);
  save_rule_program(out.stream(), program);
  out.finish();

  std::cerr << "tbedl learn: " << program.rules.size() << " rules; overlap word "
            << format_fixed(before.word_overlap * 100, 2) << "% -> "
            << format_fixed(after.word_overlap * 100, 2) << "%, phoneme "
            << format_fixed(before.phoneme_overlap * 100, 2) << "% -> "
            << format_fixed(after.phoneme_overlap * 100, 2) << "%\n";
}

struct TbedlApplyOptions {
  std::string rules, aligned, inventory, out = "-";
};

void run_tbedl_apply(const TbedlApplyOptions& opt) {
  const PhonemeInventory inventory = PhonemeInventory::load(opt.inventory);
  const RuleProgram program = load_rule_program(opt.rules);
  auto entries = load_aligned(opt.aligned, inventory);
  for (auto& entry : entries) entry.phonemes = apply_rules(program, entry.phonemes);
  OutputFile out(opt.out);
  save_aligned(out.stream(), entries);
  out.finish();
}

struct TbedlOverlapOptions {
  std::string a, b, inventory, rules;
};

void run_tbedl_overlap(const TbedlOverlapOptions& opt) {
  const PhonemeInventory inventory = PhonemeInventory::load(opt.inventory);
  const auto entries_a = load_aligned(opt.a, inventory);
  const auto entries_b = load_aligned(opt.b, inventory);
  const auto pairs = pair_first_transcriptions(entries_a, entries_b);
  std::unique_ptr<RuleProgram> program;
  if (!opt.rules.empty()) program = std::make_unique<RuleProgram>(load_rule_program(opt.rules));
  const OverlapReport report = overlap_report(pairs, program.get());
  std::cout << "word_overlap    " << format_fixed(report.word_overlap, 6) << "\n";
  std::cout << "phoneme_overlap " << format_fixed(report.phoneme_overlap, 6) << "\n";
}

struct RulesPrintOptions {
  std::string model;
  std::string stem = "f";
  int left = 3, right = 3;
};

void run_rules_print(const RulesPrintOptions& opt) {
  std::ifstream in = open_input(opt.model, "model");
  const TrainedModel model = TrainedModel::load(in);
  const RuleListModel& rules = model.as_rules();

  InstanceSchema schema;
  schema.left_context = opt.left;
  schema.right_context = opt.right;
  std::vector<std::string> names = window_feature_names(schema, opt.stem);
  // Pad names for any higher feature indices (prediction columns etc.).
  int max_feature = -1;
  for (const auto& rule : rules.rules()) {
    for (const auto& cond : rule.conditions) max_feature = std::max(max_feature, cond.feature);
  }
  while (static_cast<int>(names.size()) <= max_feature) {
    names.push_back("x" + std::to_string(names.size()));
  }
  std::cout << render_rules(rules, names);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grapheme-to-phoneme learning toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "g2pstack 1.0.0");

  SynthOptions synth_opt;
  auto* synth = app.add_subcommand("synth", "generate a synthetic dialect pair");
  synth->set_config("--config");
  synth->add_option("--words", synth_opt.spec.word_count, "number of words")->capture_default_str();
  synth->add_option("--seed", synth_opt.spec.seed, "random seed")
      ->envname("G2PSTACK_SEED")
      ->capture_default_str();
  synth->add_option("--out-dir", synth_opt.out_dir, "output directory")->required();
  synth->add_option("--ambiguity", synth_opt.spec.ambiguity_rate,
                    "fraction of words with a second variant-B transcription")
      ->capture_default_str();
  synth->add_option("--min-syllables", synth_opt.spec.min_syllables, "")->capture_default_str();
  synth->add_option("--max-syllables", synth_opt.spec.max_syllables, "")->capture_default_str();
  synth->add_option("--digraph-rate", synth_opt.spec.digraph_rate, "")->capture_default_str();
  synth->add_option("--compound-rate", synth_opt.spec.compound_rate, "")->capture_default_str();
  synth->add_flag("--no-dialect-rules", synth_opt.no_dialect_rules,
                  "variant B equals variant A (up to ambiguity)");
  synth->add_flag("--gold-aligned", synth_opt.gold_aligned,
                  "also write the generator's aligned forms");
  synth->callback([&] { run_synth(synth_opt); });

  AlignOptions align_opt;
  auto* align = app.add_subcommand("align", "align lexicon transcriptions to spellings");
  align->set_config("--config");
  align->add_option("--lexicon", align_opt.lexicon, "lexicon TSV")->required();
  align->add_option("--inventory", align_opt.inventory, "phoneme inventory file")->required();
  align->add_option("--out", align_opt.out, "aligned TSV output")->capture_default_str();
  align->add_option("--report", align_opt.report, "write unalignable-entry report");
  align->add_option("--null-penalty", align_opt.null_penalty,
                    "log-probability of a null insertion")
      ->capture_default_str();
  align->add_option("--em-iters", align_opt.em_iters, "association estimation iterations")
      ->capture_default_str();
  align->callback([&] { run_align(align_opt); });

  InstancesOptions inst_opt;
  auto* inst = app.add_subcommand("instances", "emit windowed instances as CSV");
  inst->set_config("--config");
  inst->add_option("--aligned", inst_opt.aligned, "aligned TSV")->required();
  inst->add_option("--aligned-b", inst_opt.aligned_b, "second aligned TSV (translate task)");
  inst->add_option("--inventory", inst_opt.inventory, "phoneme inventory file")->required();
  inst->add_option("--task", inst_opt.task, "g2p|translate")->capture_default_str();
  inst->add_option("--left", inst_opt.left, "left context size")->capture_default_str();
  inst->add_option("--right", inst_opt.right, "right context size")->capture_default_str();
  inst->add_option("--out", inst_opt.out, "output file")->capture_default_str();
  inst->callback([&] { run_instances(inst_opt); });

  TrainOptions train_opt;
  auto* train = app.add_subcommand("train", "train one classifier on an instances CSV");
  train->set_config("--config");
  train->add_option("--data", train_opt.data, "instances CSV")->required();
  train->add_option("--learner", train_opt.learner, "ib1ig|igtree|rules|maxent")
      ->capture_default_str();
  train->add_option("--out", train_opt.out, "model output file")->required();
  train->add_option("--k", train_opt.params.k, "ib1ig neighborhood size")->capture_default_str();
  train->add_option("--weighting", train_opt.weighting, "ig|gainratio feature weighting")
      ->capture_default_str();
  train->add_option("--gis-iters", train_opt.params.gis_max_iterations, "GIS iteration cap")
      ->capture_default_str();
  train->add_option("--gis-tol", train_opt.params.gis_tolerance, "GIS convergence tolerance")
      ->capture_default_str();
  train->callback([&] { run_train(train_opt); });

  PredictOptions predict_opt;
  auto* predict = app.add_subcommand("predict", "predict pronunciations for aligned words");
  predict->set_config("--config");
  predict->add_option("--model", predict_opt.model, "model file")->required();
  predict->add_option("--aligned", predict_opt.aligned, "aligned TSV with the words")->required();
  predict->add_option("--inventory", predict_opt.inventory, "phoneme inventory file")->required();
  predict->add_option("--out", predict_opt.out, "output file")->capture_default_str();
  predict->callback([&] { run_predict(predict_opt); });

  EvalOptions eval_opt;
  auto* eval = app.add_subcommand("eval", "score predictions against a gold aligned lexicon");
  eval->set_config("--config");
  eval->add_option("--gold", eval_opt.gold, "gold aligned TSV")->required();
  eval->add_option("--predicted", eval_opt.predicted, "predicted TSV")->required();
  eval->add_option("--inventory", eval_opt.inventory, "phoneme inventory file")->required();
  eval->add_flag("--json", eval_opt.json, "machine-readable output");
  eval->add_flag("--per-phoneme", eval_opt.per_phoneme, "per-phoneme error table");
  eval->callback([&] { run_eval(eval_opt); });

  StackOptions stack_opt;
  auto* stack = app.add_subcommand("stack", "stacking experiments");
  auto* stack_run = stack->add_subcommand("run", "run one architecture over CV folds");
  stack_run->set_config("--config");
  stack_run->add_option("--lexicon-a", stack_opt.lexicon_a, "variant A lexicon TSV")->required();
  stack_run->add_option("--lexicon-b", stack_opt.lexicon_b, "variant B lexicon TSV")->required();
  stack_run->add_option("--inventory", stack_opt.inventory, "phoneme inventory file")->required();
  stack_run->add_option("--arch", stack_opt.arch, "single|cascade|combo1|combo2|metameta")
      ->capture_default_str();
  stack_run->add_option("--target", stack_opt.target, "a|b")->capture_default_str();
  stack_run->add_option("--folds", stack_opt.folds, "outer folds")->capture_default_str();
  stack_run->add_option("--inner-folds", stack_opt.inner_folds, "inner folds")
      ->capture_default_str();
  stack_run->add_option("--seed", stack_opt.seed, "random seed")
      ->envname("G2PSTACK_SEED")
      ->capture_default_str();
  stack_run->add_option("--learner", stack_opt.learner, "component learner")
      ->capture_default_str();
  stack_run->add_option("--combiner", stack_opt.combiner, "combiner learner")
      ->capture_default_str();
  stack_run->add_option("--meta-learners", stack_opt.meta_learners,
                        "comma-separated meta learner kinds")
      ->capture_default_str();
  stack_run->add_flag("--with-spelling", stack_opt.with_spelling,
                      "meta-meta combiner also sees the spelling window");
  stack_run->add_flag("--resubstitution", stack_opt.resubstitution,
                      "training-side predictions without inner CV (optimistic)");
  stack_run->add_option("--jobs", stack_opt.jobs, "fold parallelism (0 = all cores)")
      ->capture_default_str();
  stack_run->add_option("--em-iters", stack_opt.em_iters, "alignment EM iterations")
      ->capture_default_str();
  stack_run->add_option("--null-penalty", stack_opt.null_penalty, "alignment null penalty")
      ->capture_default_str();
  stack_run->add_option("--out", stack_opt.out, "result TSV output")->capture_default_str();
  stack_run->add_option("--gis-iters", stack_opt.params.gis_max_iterations, "GIS iteration cap")
      ->capture_default_str();
  stack_run->callback([&] { run_stack(stack_opt); });
  stack->require_subcommand(1);

  TbedlLearnOptions tbedl_learn_opt;
  TbedlApplyOptions tbedl_apply_opt;
  TbedlOverlapOptions tbedl_overlap_opt;
  auto* tbedl = app.add_subcommand("tbedl", "transformation rule learning");
  auto* tbedl_learn = tbedl->add_subcommand("learn", "learn rules from an aligned pair");
  tbedl_learn->set_config("--config");
  tbedl_learn->add_option("--a", tbedl_learn_opt.a, "variant A aligned TSV")->required();
  tbedl_learn->add_option("--b", tbedl_learn_opt.b, "variant B aligned TSV (truth)")->required();
  tbedl_learn->add_option("--inventory", tbedl_learn_opt.inventory, "phoneme inventory file")
      ->required();
  tbedl_learn->add_option("--threshold", tbedl_learn_opt.threshold,
                          "stop when the best rule fixes fewer errors")
      ->capture_default_str();
  tbedl_learn->add_option("--out", tbedl_learn_opt.out, "rule file output")
      ->capture_default_str();
  tbedl_learn->callback([&] { run_tbedl_learn(tbedl_learn_opt); });

  auto* tbedl_apply = tbedl->add_subcommand("apply", "apply a rule file to an aligned lexicon");
  tbedl_apply->set_config("--config");
  tbedl_apply->add_option("--rules", tbedl_apply_opt.rules, "rule file")->required();
  tbedl_apply->add_option("--aligned", tbedl_apply_opt.aligned, "aligned TSV")->required();
  tbedl_apply->add_option("--inventory", tbedl_apply_opt.inventory, "phoneme inventory file")
      ->required();
  tbedl_apply->add_option("--out", tbedl_apply_opt.out, "output file")->capture_default_str();
  tbedl_apply->callback([&] { run_tbedl_apply(tbedl_apply_opt); });

  auto* tbedl_overlap = tbedl->add_subcommand("overlap", "measure overlap between two sides");
  tbedl_overlap->set_config("--config");
  tbedl_overlap->add_option("--a", tbedl_overlap_opt.a, "variant A aligned TSV")->required();
  tbedl_overlap->add_option("--b", tbedl_overlap_opt.b, "variant B aligned TSV")->required();
  tbedl_overlap->add_option("--inventory", tbedl_overlap_opt.inventory, "phoneme inventory file")
      ->required();
  tbedl_overlap->add_option("--rules", tbedl_overlap_opt.rules,
                            "apply this rule file to variant A first");
  tbedl_overlap->callback([&] { run_tbedl_overlap(tbedl_overlap_opt); });
  tbedl->require_subcommand(1);

  RulesPrintOptions rules_opt;
  auto* rules = app.add_subcommand("rules", "production rule utilities");
  auto* rules_print = rules->add_subcommand("print", "render a rules model");
  rules_print->set_config("--config");
  rules_print->add_option("--model", rules_opt.model, "rules model file")->required();
  rules_print->add_option("--stem", rules_opt.stem, "feature name stem")->capture_default_str();
  rules_print->add_option("--left", rules_opt.left, "window left context")->capture_default_str();
  rules_print->add_option("--right", rules_opt.right, "window right context")
      ->capture_default_str();
  rules_print->callback([&] { run_rules_print(rules_opt); });
  rules->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
