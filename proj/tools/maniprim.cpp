// maniprim: command-line front end for the primitive-token action pipeline.
//
//   maniprim synth   --out DIR
//   maniprim extract --data DIR --out SEQ
//   maniprim train   --sequences SEQ --out BANK
//   maniprim train   --raw --data DIR --out BANK
//   maniprim predict --bank BANK (--sequences SEQ | --data DIR) [--split test] [--out FILE]
//   maniprim eval    --bank BANK (--sequences SEQ | --data DIR) --report TSV [--fold NAME] [--append]
//   maniprim ttest   --a TSV --b TSV

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "maniprim/pipeline.hpp"

namespace mp = maniprim;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::vector<std::string> set;
  std::string test_subjects;
  bool test_subjects_given = false;
};

mp::Config make_config(const Globals& g) {
  mp::Config cfg = g.config_path.empty() ? mp::Config{} : mp::load_config(g.config_path);
  for (const auto& kv : g.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw mp::ArgumentError("--set expects key=value, got '" + kv + "'");
    mp::set_config_value(cfg, std::string(mp::text::trim(std::string_view(kv).substr(0, eq))),
                         std::string(mp::text::trim(std::string_view(kv).substr(eq + 1))));
  }
  if (g.seed) cfg.seed = *g.seed;
  if (g.test_subjects_given) mp::set_config_value(cfg, "test_subjects", g.test_subjects);
  cfg.validate();
  return cfg;
}

int fail(mp::ErrorCode code, std::string msg) {
  for (auto& c : msg)
    if (c == '\n' || c == '\r') c = ' ';
  std::cerr << "error[" << mp::code_tag(code) << "]: " << msg << '\n';
  return static_cast<int>(code);
}

struct Inputs {
  std::string bank;
  std::string sequences;
  std::string data;
  std::string split = "test";
};

// Predictions for either bank kind; the bank file says which input it needs.
std::vector<mp::Prediction> run_predictions(const mp::Config& cfg, const Inputs& in, std::size_t jobs,
                                            std::vector<std::string>& labels) {
  const auto content = mp::text::read_file(in.bank);
  const auto kind = mp::bank_kind(content);
  const auto part = mp::parse_split_part(in.split);
  if (kind == "discrete") {
    if (in.sequences.empty()) throw mp::ArgumentError("a token bank needs --sequences");
    const auto bank = mp::bank_from_text(content);
    labels = bank.required;
    return mp::predict_tokens(cfg, bank, mp::load_sequences(in.sequences), part, jobs);
  }
  if (kind == "gaussian") {
    if (in.data.empty()) throw mp::ArgumentError("a raw bank needs --data");
    const auto bank = mp::gaussian_bank_from_text(content);
    labels = bank.required;
    const auto ds = mp::load_dataset(cfg, in.data, jobs);
    return mp::predict_raw(cfg, bank, ds.trials, part, jobs);
  }
  throw mp::SchemaError(in.bank + ": unknown bank kind '" + kind + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Primitive-token recognition of manipulation actions"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "override the configured seed");
  app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--set", g.set, "override one config key (key=value); repeatable");
  auto* ts = app.add_option("--test-subjects", g.test_subjects, "comma-separated held-out subjects");

  std::string out, data, sequences;
  auto* synth = app.add_subcommand("synth", "generate a labelled synthetic dataset");
  synth->add_option("--out", out, "output directory")->required();

  auto* extract = app.add_subcommand("extract", "turn a dataset into token sequences");
  extract->add_option("--data", data, "dataset directory")->required();
  extract->add_option("--out", out, "sequence file")->required();

  bool raw = false;
  auto* train = app.add_subcommand("train", "train one HMM per action");
  train->add_option("--sequences", sequences, "sequence file (token models)");
  train->add_option("--data", data, "dataset directory (raw models)");
  train->add_flag("--raw", raw, "train the Gaussian-mixture baseline on raw frames");
  train->add_option("--out", out, "model bank file")->required();

  Inputs in;
  auto* predict = app.add_subcommand("predict", "classify trials with a model bank");
  predict->add_option("--bank", in.bank, "model bank file")->required()->check(CLI::ExistingFile);
  predict->add_option("--sequences", in.sequences, "sequence file");
  predict->add_option("--data", in.data, "dataset directory");
  predict->add_option("--split", in.split, "train, test or all");
  predict->add_option("--out", out, "prediction TSV (default: stdout)");

  std::string report, fold = "0", pgm;
  bool append = false;
  auto* eval = app.add_subcommand("eval", "score a model bank on a split");
  eval->add_option("--bank", in.bank, "model bank file")->required()->check(CLI::ExistingFile);
  eval->add_option("--sequences", in.sequences, "sequence file");
  eval->add_option("--data", in.data, "dataset directory");
  eval->add_option("--split", in.split, "train, test or all");
  eval->add_option("--report", report, "report TSV")->required();
  eval->add_option("--fold", fold, "fold name written into the report");
  eval->add_flag("--append", append, "append this fold to an existing report");
  eval->add_option("--pgm", pgm, "confusion matrix as a PGM image");

  std::string report_a, report_b;
  auto* ttest = app.add_subcommand("ttest", "paired t-test over the folds of two reports");
  ttest->add_option("--a", report_a, "first report")->required()->check(CLI::ExistingFile);
  ttest->add_option("--b", report_b, "second report")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(mp::ErrorCode::usage, e.what());
  }
  g.test_subjects_given = ts->count() > 0;

  try {
    const auto cfg = make_config(g);
    if (synth->parsed()) {
      mp::run_synth(cfg, out, std::cout);
    } else if (extract->parsed()) {
      mp::run_extract(cfg, data, out, g.jobs, std::cout);
    } else if (train->parsed()) {
      std::string bank_text;
      if (raw) {
        if (data.empty()) throw mp::ArgumentError("train --raw needs --data");
        const auto ds = mp::load_dataset(cfg, data, g.jobs);
        bank_text = mp::bank_to_text(mp::train_raw_bank(cfg, ds.trials, g.jobs, std::cout));
      } else {
        if (sequences.empty()) throw mp::ArgumentError("train needs --sequences (or --raw --data)");
        bank_text = mp::bank_to_text(mp::train_token_bank(cfg, mp::load_sequences(sequences), g.jobs, std::cout));
      }
      mp::text::write_file(out, bank_text);
      std::cout << "wrote " << out << '\n';
    } else if (predict->parsed()) {
      std::vector<std::string> labels;
      const auto text = mp::predictions_to_text(run_predictions(cfg, in, g.jobs, labels));
      if (out.empty()) std::cout << text;
      else mp::text::write_file(out, text);
    } else if (eval->parsed()) {
      std::vector<std::string> labels;
      const auto r = mp::evaluate_predictions(run_predictions(cfg, in, g.jobs, labels), labels);
      mp::write_report(r, fold, report, append);
      if (!pgm.empty()) mp::text::write_file(pgm, mp::confusion_to_pgm(r.cm));
      std::cout << mp::report_to_text(r.report, r.cm);
    } else if (ttest->parsed()) {
      std::cout << mp::ttest_to_text(mp::paired_fold_ttest(report_a, report_b));
    }
  } catch (const mp::Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(mp::ErrorCode::data, e.what());
  } catch (const std::exception& e) {
    return fail(mp::ErrorCode::data, e.what());
  }
  return 0;
}
