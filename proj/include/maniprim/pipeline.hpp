#pragma once

// File-to-file pipeline stages behind the command-line tool. Each stage reads
// its inputs from disk and writes its artifacts; log lines go to `log`.

#include <algorithm>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "maniprim/bank.hpp"
#include "maniprim/config.hpp"
#include "maniprim/eval.hpp"
#include "maniprim/extraction.hpp"
#include "maniprim/parallel.hpp"
#include "maniprim/synth.hpp"
#include "maniprim/tokens.hpp"

namespace maniprim {

namespace fs = std::filesystem;

enum class SplitPart { train, test, all };

inline SplitPart parse_split_part(const std::string& s) {
  if (s == "train") return SplitPart::train;
  if (s == "test") return SplitPart::test;
  if (s == "all") return SplitPart::all;
  throw ArgumentError("unknown split '" + s + "' (expected train, test or all)");
}

inline bool in_part(const Config& cfg, const std::string& subject, SplitPart part) {
  if (part == SplitPart::all) return true;
  const bool test = std::find(cfg.test_subjects.begin(), cfg.test_subjects.end(), subject) != cfg.test_subjects.end();
  return part == SplitPart::test ? test : !test;
}

// Checks the configured test subjects against the subjects actually present.
inline void check_split(const Config& cfg, const std::vector<std::string>& subjects) {
  if (cfg.test_subjects.empty()) return;
  split_by_subjects(subjects, std::set<std::string>(cfg.test_subjects.begin(), cfg.test_subjects.end()));
}

inline ProfileModel profile_model(const Config& cfg) {
  return cfg.profile.empty() ? ProfileModel::min_jerk() : load_profile(cfg.profile);
}

// ---------------------------------------------------------------------------
// synth

inline std::size_t run_synth(const Config& cfg, const fs::path& out_dir, std::ostream& log) {
  const auto ds = generate_dataset(cfg.dataset());
  write_dataset(ds, out_dir);
  for (const auto& w : ds.warnings) log << "warning: " << w << '\n';
  log << "wrote " << ds.items.size() << " trials to " << out_dir.string() << '\n';
  return ds.items.size();
}

// ---------------------------------------------------------------------------
// dataset loading

struct LoadedDataset {
  std::vector<ManifestRow> manifest;
  std::vector<Trial> trials;  // manifest order, resampled to the configured rate
};

inline LoadedDataset load_dataset(const Config& cfg, const fs::path& dir, std::size_t jobs) {
  const auto manifest_path = dir / "manifest.tsv";
  if (!fs::exists(manifest_path)) throw IoError("missing manifest " + manifest_path.string());
  LoadedDataset ds;
  ds.manifest = load_manifest(manifest_path.string());
  if (ds.manifest.empty()) throw StateError("dataset " + dir.string() + " is empty");
  ds.trials.resize(ds.manifest.size());
  parallel_for(ds.manifest.size(), jobs, [&](std::size_t i) {
    const auto& row = ds.manifest[i];
    Trial t = load_trial((dir / (row.trial_id + ".csv")).string());
    if (std::abs(t.rate - cfg.rate) > 1e-9 * cfg.rate) t = resample(t, cfg.rate);
    t.id = row.trial_id;
    t.subject = row.subject;
    if (!row.action.empty()) t.action_label = row.action;
    ds.trials[i] = std::move(t);
  });
  return ds;
}

// ---------------------------------------------------------------------------
// extract

struct ExtractLevels {
  LevelSet force;
  LevelSet bend;
};

inline ExtractLevels training_levels(const Config& cfg, const std::vector<Trial>& trials, std::ostream& log) {
  std::vector<Trial> train;
  for (const auto& t : trials)
    if (in_part(cfg, t.subject, SplitPart::train)) train.push_back(t);
  if (train.empty()) throw StateError("no training trials for level computation");
  ExtractLevels lv;
  lv.force = compute_levels(train, ChannelGroup::pressure);
  try {
    lv.bend = compute_levels(train, ChannelGroup::bend);
  } catch (const NumericError&) {
    log << "warning: bend channels are zero in every training trial; bend/extend tokens disabled\n";
    lv.bend = LevelSet::inactive();
  }
  return lv;
}

inline std::vector<SequenceRecord> run_extract(const Config& cfg, const fs::path& data_dir, const fs::path& out_file,
                                               std::size_t jobs, std::ostream& log) {
  const auto ds = load_dataset(cfg, data_dir, jobs);
  std::vector<std::string> subjects;
  for (const auto& t : ds.trials) subjects.push_back(t.subject);
  check_split(cfg, subjects);

  const auto levels = training_levels(cfg, ds.trials, log);
  const auto model = profile_model(cfg);
  std::vector<SequenceRecord> records(ds.trials.size());
  parallel_for(ds.trials.size(), jobs, [&](std::size_t i) {
    const auto& t = ds.trials[i];
    records[i] = {t.id, t.subject, t.action_label.value_or(""),
                  extract_sequence(t, levels.force, levels.bend, model, cfg.extraction).names()};
  });
  text::write_file(out_file.string(), sequences_to_text(records));

  std::map<std::string, std::size_t> histogram;
  for (const auto& r : records)
    for (const auto& tok : r.tokens) ++histogram[tok];
  log << "force levels A=" << text::fmt(levels.force.A, 6);
  if (levels.bend.active()) log << ", bend levels A=" << text::fmt(levels.bend.A, 6);
  log << '\n' << "extracted " << records.size() << " sequences to " << out_file.string() << '\n';
  log << "token histogram:\n";
  for (const auto& [tok, n] : histogram) log << "  " << tok << '\t' << n << '\n';
  return records;
}

// ---------------------------------------------------------------------------
// train

inline std::vector<std::string> labels_of(const std::vector<std::string>& actions) {
  std::set<std::string> s;
  for (const auto& a : actions)
    if (!a.empty()) s.insert(a);
  return {s.begin(), s.end()};
}

inline void require_actions(const std::vector<std::string>& required, const std::set<std::string>& present) {
  for (const auto& l : required)
    if (!present.count(l)) throw StateError("training split has no usable trial for action '" + l + "'");
}

inline ActionModelBank train_token_bank(const Config& cfg, const std::vector<SequenceRecord>& records,
                                        std::size_t jobs, std::ostream& log) {
  std::vector<std::string> subjects, actions;
  for (const auto& r : records) {
    subjects.push_back(r.subject);
    actions.push_back(r.action);
  }
  check_split(cfg, subjects);

  ActionModelBank bank;
  bank.required = labels_of(actions);
  if (bank.required.empty()) throw StateError("sequence file carries no action labels");

  std::map<std::string, std::vector<std::vector<std::string>>> by_action;
  std::vector<std::vector<std::string>> all_train;
  std::size_t dropped = 0;
  for (const auto& r : records) {
    if (!in_part(cfg, r.subject, SplitPart::train) || r.action.empty()) continue;
    if (r.tokens.empty()) {
      ++dropped;
      continue;
    }
    by_action[r.action].push_back(r.tokens);
    all_train.push_back(r.tokens);
  }
  if (dropped) log << "warning: skipped " << dropped << " empty training sequence(s)\n";
  std::set<std::string> present;
  for (const auto& [a, _] : by_action) present.insert(a);
  require_actions(bank.required, present);

  bank.vocabulary = build_vocabulary(all_train);
  const auto V = bank.vocabulary.size();
  std::vector<SelectedModel> selected(bank.required.size());
  parallel_for(bank.required.size(), jobs, [&](std::size_t k) {
    std::vector<EncodedSequence> enc;
    for (const auto& s : by_action.at(bank.required[k])) enc.push_back(bank.vocabulary.encode(s));
    auto opt = cfg.selection();
    opt.train.seed = derive_seed(cfg.seed, k);
    selected[k] = select_model(enc, V, opt);
  });
  for (std::size_t k = 0; k < bank.required.size(); ++k) {
    const auto& s = selected[k];
    log << bank.required[k] << ": " << topology_name(s.model.topology) << " N=" << s.model.states()
        << " loglik=" << text::fmt(s.loglik, 8) << '\n';
    bank.models[bank.required[k]] = {s.model, s.loglik};
  }
  return bank;
}

inline GaussianModelBank train_raw_bank(const Config& cfg, const std::vector<Trial>& trials, std::size_t jobs,
                                        std::ostream& log) {
  std::vector<std::string> subjects, actions;
  for (const auto& t : trials) {
    subjects.push_back(t.subject);
    actions.push_back(t.action_label.value_or(""));
  }
  check_split(cfg, subjects);

  GaussianModelBank bank;
  bank.full_features = cfg.raw_full;
  bank.decimate = cfg.raw_decimate;
  bank.required = labels_of(actions);
  if (bank.required.empty()) throw StateError("dataset carries no action labels");

  std::map<std::string, std::vector<FeatureSequence>> by_action;
  for (const auto& t : trials) {
    if (!in_part(cfg, t.subject, SplitPart::train) || !t.action_label) continue;
    by_action[*t.action_label].push_back(raw_feature_sequence(t, bank.full_features, bank.decimate));
  }
  std::set<std::string> present;
  for (const auto& [a, _] : by_action) present.insert(a);
  require_actions(bank.required, present);

  std::vector<SelectedGaussianModel> selected(bank.required.size());
  parallel_for(bank.required.size(), jobs, [&](std::size_t k) {
    auto opt = cfg.gaussian_selection();
    opt.train.seed = derive_seed(cfg.seed, k);
    selected[k] = select_gaussian_model(by_action.at(bank.required[k]), opt);
  });
  for (std::size_t k = 0; k < bank.required.size(); ++k) {
    const auto& s = selected[k];
    log << bank.required[k] << ": " << topology_name(s.model.topology) << " N=" << s.model.states()
        << " loglik=" << text::fmt(s.loglik, 8) << '\n';
    bank.models[bank.required[k]] = {s.model, s.loglik};
  }
  return bank;
}

// ---------------------------------------------------------------------------
// predict / eval

struct Prediction {
  std::string trial_id;
  std::string subject;
  std::string truth;
  std::string label;
};

inline std::vector<Prediction> predict_tokens(const Config& cfg, const ActionModelBank& bank,
                                              const std::vector<SequenceRecord>& records, SplitPart part,
                                              std::size_t jobs) {
  bank.ensure_complete();
  std::vector<const SequenceRecord*> chosen;
  for (const auto& r : records)
    if (in_part(cfg, r.subject, part)) chosen.push_back(&r);

  // Tokens the bank has never seen all map to one unknown column; if nothing
  // at all overlaps, the sequences were extracted under a different setup.
  std::size_t tokens = 0, known = 0;
  for (const auto* r : chosen)
    for (const auto& t : r->tokens) {
      ++tokens;
      if (bank.vocabulary.encode(t) != bank.vocabulary.unknown_id()) ++known;
    }
  if (tokens > 0 && known == 0) throw SchemaError("vocabulary mismatch: no evaluated token is known to the bank");

  std::vector<Prediction> out(chosen.size());
  parallel_for(chosen.size(), jobs, [&](std::size_t i) {
    const auto* r = chosen[i];
    out[i] = {r->trial_id, r->subject, r->action, classify(bank, r->tokens).label};
  });
  return out;
}

inline std::vector<Prediction> predict_raw(const Config& cfg, const GaussianModelBank& bank,
                                           const std::vector<Trial>& trials, SplitPart part, std::size_t jobs) {
  bank.ensure_complete();
  std::vector<const Trial*> chosen;
  for (const auto& t : trials)
    if (in_part(cfg, t.subject, part)) chosen.push_back(&t);
  std::vector<Prediction> out(chosen.size());
  parallel_for(chosen.size(), jobs, [&](std::size_t i) {
    const auto* t = chosen[i];
    const auto label = classify(bank, raw_feature_sequence(*t, bank.full_features, bank.decimate)).label;
    out[i] = {t->id, t->subject, t->action_label.value_or(""), label};
  });
  return out;
}

inline std::string predictions_to_text(const std::vector<Prediction>& preds) {
  std::string out = "trial_id\tsubject\ttruth\tprediction\n";
  for (const auto& p : preds) out += p.trial_id + "\t" + p.subject + "\t" + p.truth + "\t" + p.label + "\n";
  return out;
}

struct EvalResult {
  ConfusionMatrix cm;
  ScoreReport report;
};

inline EvalResult evaluate_predictions(const std::vector<Prediction>& preds,
                                       const std::vector<std::string>& labels) {
  if (preds.empty()) throw StateError("evaluation split is empty");
  std::vector<std::string> p, t;
  for (const auto& x : preds) {
    p.push_back(x.label);
    t.push_back(x.truth);
  }
  EvalResult r;
  r.cm = confusion(p, t, labels);
  r.report = f1_report(r.cm);
  return r;
}

// Appends one fold to a report TSV (header written when the file is new).
inline void write_report(const EvalResult& r, const std::string& fold, const fs::path& path, bool append) {
  const bool fresh = !append || !fs::exists(path);
  std::string content = fresh ? std::string() : text::read_file(path.string());
  content += report_to_tsv(r.report, fold, fresh);
  text::write_file(path.string(), content);
}

// ---------------------------------------------------------------------------
// ttest

struct PairedTTest {
  std::vector<std::string> folds;
  std::vector<double> differences;
  TTestResult result;
};

inline PairedTTest paired_fold_ttest(const fs::path& report_a, const fs::path& report_b) {
  const auto a = load_report_folds(report_a.string());
  const auto b = load_report_folds(report_b.string());
  if (a.size() != b.size()) throw SchemaError("fold mismatch: reports have different fold counts");
  std::map<std::string, double> bmap(b.begin(), b.end());
  PairedTTest out;
  for (const auto& [fold, f1] : a) {
    const auto it = bmap.find(fold);
    if (it == bmap.end()) throw SchemaError("fold mismatch: '" + fold + "' missing from " + report_b.string());
    out.folds.push_back(fold);
    out.differences.push_back(f1 - it->second);
  }
  out.result = one_sample_ttest(out.differences);
  return out;
}

inline std::string ttest_to_text(const PairedTTest& t, double alpha = 0.05) {
  std::string out;
  for (std::size_t i = 0; i < t.folds.size(); ++i)
    out += "fold " + t.folds[i] + "\tdiff " + text::fmt(t.differences[i], 6) + "\n";
  const auto& r = t.result;
  out += "t = " + (r.t >= kInfiniteT ? std::string("+inf") : r.t <= -kInfiniteT ? "-inf" : text::fmt(r.t, 6));
  out += "  df = " + text::fmt(r.df, 6) + "  p = " + text::fmt(r.p, 6) + "\n";
  if (r.zero_variance) out += "note: differences have zero variance; t reported as a sentinel\n";
  out += std::string(r.p < alpha ? "significant" : "not significant") + " at the " + text::fmt(alpha, 3) +
         " level\n";
  return out;
}

}  // namespace maniprim
