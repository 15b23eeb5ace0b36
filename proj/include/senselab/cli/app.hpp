#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "senselab/cli/config_file.hpp"
#include "senselab/cli/selfcheck.hpp"
#include "senselab/corpus/annotated.hpp"
#include "senselab/corpus/tokenize.hpp"
#include "senselab/corpus/vocabulary.hpp"
#include "senselab/error.hpp"
#include "senselab/eval/pseudo.hpp"
#include "senselab/eval/score.hpp"
#include "senselab/io.hpp"
#include "senselab/lstm/checkpoint.hpp"
#include "senselab/lstm/inference.hpp"
#include "senselab/lstm/train.hpp"
#include "senselab/wsd/classify.hpp"
#include "senselab/wsd/label_propagation.hpp"

namespace senselab::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

struct Logger {
  std::ostream& err;
  bool quiet = false;
  void info(const std::string& msg) const {
    if (!quiet) err << "[senselab] " << msg << '\n';
  }
  void warn(const std::string& msg) const { err << "[senselab] warning: " << msg << '\n'; }
};

// Every option of every subcommand, bound by CLI11. Defaults here are the
// documented defaults.
struct Settings {
  std::string config;
  bool quiet = false;
  std::size_t threads = 1;
  std::size_t log_every = 50;

  // inputs / outputs
  std::string corpus, vocab, checkpoint, senses, xml, keys, train_xml, train_keys, out, pred, gold,
      report, out_dir, templates, mfs_xml, mfs_keys, loss_curve;

  // corpus
  std::size_t max_size = 20000;
  std::uint64_t min_count = 1;
  bool lowercase = true;
  bool map_digits = true;
  std::size_t max_len = 100;

  // model
  std::size_t dim = 32;
  std::size_t hidden = 64;
  double lr = 1.0;
  double clip = 1.0;
  std::size_t batch_size = 8;
  std::size_t epochs = 20;
  std::uint64_t seed = 1;
  double train_fraction = 1.0;

  // wsd
  std::string mode = "nn";
  bool fallback = true;
  std::size_t k = 10;
  std::string sigma = "auto";
  double tol = 1e-6;
  std::size_t max_iter = 1000;

  // synth
  std::size_t n_lm = 2000;
  std::size_t n_annotated = 20;
  std::size_t n_test = 100;
  std::string pseudoword;

  corpus::TokenizeOptions tokens() const { return {lowercase, map_digits}; }
  lstm::ExtractOptions extract() const { return {tokens(), max_len, threads}; }
};

inline void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("missing --") + what);
  if (!fs::is_regular_file(path)) throw Error("input file not found: " + path);
}

// Manifest written beside every artifact: the resolved options of the run
// and digests of its inputs.
class Manifest {
 public:
  explicit Manifest(std::string subcommand) : text_("subcommand\t" + subcommand + "\n") {}

  void option(const std::string& name, const std::string& value) { text_ += "option." + name + '\t' + value + '\n'; }
  void input(const std::string& role, const std::string& path) {
    text_ += "input." + role + '\t' + path + '\t' + io::hex(io::sha256(io::read_file(path))) + '\n';
  }
  void output(const std::string& role, const std::string& path) { text_ += "output." + role + '\t' + path + '\n'; }
  void write(const fs::path& path) const { io::atomic_write(path, text_); }

 private:
  std::string text_;
};

namespace detail {

inline std::string join_results(const CLI::Option* opt) {
  std::string s;
  for (const auto& r : opt->results()) {
    if (!s.empty()) s += ',';
    s += r;
  }
  return s;
}

inline void echo_options(Manifest& m, const CLI::App* sub) {
  std::map<std::string, std::string> opts;
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config" || name == "quiet" || name == "threads" ||
        name == "log-every") {
      continue;
    }
    opts[name] = opt->count() ? join_results(opt) : opt->get_default_str();
  }
  for (const auto& [k, v] : opts) m.option(k, v);
}

inline corpus::AnnotatedCorpus load_annotated(const std::string& xml_path, const std::string& key_path,
                                              const Logger& log) {
  const std::string xml = io::read_file(xml_path);
  const std::string keys = key_path.empty() ? std::string() : io::read_file(key_path);
  corpus::AnnotatedCorpus c;
  try {
    c = corpus::parse_annotated_corpus(xml, keys);
  } catch (const ParseError& e) {
    throw Error(xml_path + ": " + e.what());
  }
  for (const auto& w : c.warnings) log.warn(w);
  return c;
}

struct Model {
  corpus::Vocabulary vocab;
  lstm::LstmParams params;
};

inline Model load_model(const Settings& s) {
  require_file(s.vocab, "vocab");
  require_file(s.checkpoint, "checkpoint");
  const std::string vocab_bytes = io::read_file(s.vocab);
  Model m{corpus::Vocabulary::parse(vocab_bytes), {}};
  m.params = lstm::load_checkpoint(s.checkpoint, io::sha256(vocab_bytes)).params;
  if (m.params.vocab_size() != m.vocab.size()) {
    throw Error("checkpoint vocabulary size differs from " + s.vocab);
  }
  return m;
}

inline std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("SENSELAB_SEED");
  if (!v || !*v) return std::nullopt;
  try {
    return io::parse_int<std::uint64_t>(v);
  } catch (const Error&) {
    throw UsageError(std::string("SENSELAB_SEED is not an unsigned integer: ") + v);
  }
}

inline std::string format_loss_curve(const std::vector<double>& curve) {
  std::string out;
  for (std::size_t e = 0; e < curve.size(); ++e) out += std::to_string(e + 1) + '\t' + io::format_double(curve[e]) + '\n';
  return out;
}

}  // namespace detail

// --- subcommands -----------------------------------------------------------

inline void cmd_build_vocab(const Settings& s, const CLI::App* sub, const Logger& log) {
  require_file(s.corpus, "corpus");
  if (s.out.empty()) throw UsageError("missing --out");
  const auto sentences = corpus::tokenize(io::read_file(s.corpus), s.tokens());
  const auto vocab = corpus::build_vocabulary(sentences, s.max_size, s.min_count);
  io::atomic_write(s.out, vocab.serialize());
  log.info("vocabulary of " + std::to_string(vocab.size()) + " entries from " +
           std::to_string(sentences.size()) + " sentences -> " + s.out);
  Manifest m("build-vocab");
  detail::echo_options(m, sub);
  m.input("corpus", s.corpus);
  m.output("vocab", s.out);
  m.write(s.out + ".manifest");
}

inline void cmd_train_lm(const Settings& s, const CLI::App* sub, const Logger& log) {
  require_file(s.corpus, "corpus");
  require_file(s.vocab, "vocab");
  if (s.out.empty()) throw UsageError("missing --out");
  const std::string vocab_bytes = io::read_file(s.vocab);
  const auto vocab = corpus::Vocabulary::parse(vocab_bytes);
  const auto surfaces = corpus::split_long(corpus::tokenize(io::read_file(s.corpus), s.tokens()), s.max_len - 1);
  std::vector<corpus::Sentence> sentences;
  sentences.reserve(surfaces.size());
  for (const auto& ss : surfaces) sentences.push_back(corpus::encode(ss, vocab));

  lstm::ModelConfig cfg;
  cfg.vocab_size = vocab.size();
  cfg.context_dim = s.dim;
  cfg.hidden_dim = s.hidden;
  cfg.learning_rate = s.lr;
  cfg.clip_norm = s.clip;
  cfg.batch_size = s.batch_size;
  cfg.epochs = s.epochs;
  cfg.seed = s.seed;
  cfg.max_len = s.max_len;
  cfg.train_fraction = s.train_fraction;
  cfg.threads = s.threads;
  log.info("training V=" + std::to_string(cfg.vocab_size) + " p=" + std::to_string(cfg.context_dim) +
           " h=" + std::to_string(cfg.hidden_dim) + " on " + std::to_string(sentences.size()) +
           " sentences, seed " + std::to_string(cfg.seed));
  const auto progress = [&](const lstm::TrainProgress& p) {
    if (s.log_every && (p.batch % s.log_every == 0 || p.batch == p.batches)) {
      log.info("epoch " + std::to_string(p.epoch + 1) + " batch " + std::to_string(p.batch) + "/" +
               std::to_string(p.batches) + " loss " + std::to_string(p.running_loss));
    }
  };
  const auto result = lstm::train(cfg, sentences, vocab, progress);
  lstm::save_checkpoint(result.params, cfg, io::sha256(vocab_bytes), s.out);
  const std::string curve_path = s.loss_curve.empty() ? s.out + ".loss" : s.loss_curve;
  io::atomic_write(curve_path, detail::format_loss_curve(result.loss_curve));
  log.info("checkpoint -> " + s.out);

  Manifest m("train-lm");
  detail::echo_options(m, sub);
  m.option("seed.resolved", std::to_string(cfg.seed));
  m.input("corpus", s.corpus);
  m.input("vocab", s.vocab);
  m.output("checkpoint", s.out);
  m.output("loss-curve", curve_path);
  m.write(s.out + ".manifest");
}

inline void cmd_build_senses(const Settings& s, const CLI::App* sub, const Logger& log) {
  require_file(s.xml, "xml");
  require_file(s.keys, "keys");
  if (s.out.empty()) throw UsageError("missing --out");
  const auto model = detail::load_model(s);
  auto corpus = detail::load_annotated(s.xml, s.keys, log);
  std::vector<corpus::AnnotatedInstance> labeled;
  for (auto& inst : corpus.instances) {
    if (inst.gold_keys.empty()) {
      log.warn("instance '" + inst.id + "' has no gold key, skipped");
    } else {
      labeled.push_back(std::move(inst));
    }
  }
  const auto table = wsd::build_sense_table(labeled, model.params, model.vocab, s.extract());
  io::atomic_write(s.out, table.serialize());
  log.info(std::to_string(table.size()) + " sense embeddings from " + std::to_string(labeled.size()) +
           " instances -> " + s.out);
  Manifest m("build-senses");
  detail::echo_options(m, sub);
  m.input("checkpoint", s.checkpoint);
  m.input("vocab", s.vocab);
  m.input("xml", s.xml);
  m.input("keys", s.keys);
  m.output("senses", s.out);
  m.write(s.out + ".manifest");
}

inline void cmd_disambiguate(const Settings& s, const CLI::App* sub, const Logger& log) {
  require_file(s.senses, "senses");
  require_file(s.xml, "xml");
  if (s.out.empty()) throw UsageError("missing --out");
  if (s.mode != "nn" && s.mode != "mfs") throw UsageError("--mode must be nn or mfs");
  auto table = wsd::SenseEmbeddingTable::parse(io::read_file(s.senses));
  if (!s.mfs_xml.empty()) {
    require_file(s.mfs_xml, "mfs-xml");
    require_file(s.mfs_keys, "mfs-keys");
    const auto extra = detail::load_annotated(s.mfs_xml, s.mfs_keys, log);
    table.merge_mfs(wsd::mfs_from_instances(extra.instances));
  }
  const auto test = detail::load_annotated(s.xml, "", log);
  std::vector<wsd::Prediction> preds;
  Manifest m("disambiguate");
  if (s.mode == "mfs") {
    preds = eval::mfs_baseline(table, test.instances);
  } else {
    const auto model = detail::load_model(s);
    if (model.params.context_dim() != table.dim()) throw Error("sense table dimension differs from the model");
    preds = wsd::classify_all(test.instances, model.params, table, model.vocab, s.extract(), s.fallback);
    m.input("checkpoint", s.checkpoint);
    m.input("vocab", s.vocab);
  }
  io::atomic_write(s.out, wsd::format_predictions(preds));
  const auto abstained = std::count_if(preds.begin(), preds.end(), [](const auto& p) { return p.abstained(); });
  log.info(std::to_string(preds.size() - static_cast<std::size_t>(abstained)) + " of " +
           std::to_string(preds.size()) + " instances attempted -> " + s.out);
  detail::echo_options(m, sub);
  m.input("senses", s.senses);
  m.input("xml", s.xml);
  m.output("predictions", s.out);
  m.write(s.out + ".manifest");
}

inline void cmd_propagate(const Settings& s, const CLI::App* sub, const Logger& log) {
  require_file(s.train_xml, "train-xml");
  require_file(s.train_keys, "train-keys");
  require_file(s.xml, "xml");
  if (s.out.empty()) throw UsageError("missing --out");
  std::optional<double> fixed_sigma;
  if (s.sigma != "auto") {
    try {
      fixed_sigma = io::parse_double(s.sigma);
    } catch (const Error&) {
      throw UsageError("--sigma must be 'auto' or a number");
    }
  }
  const auto model = detail::load_model(s);
  const auto train = detail::load_annotated(s.train_xml, s.train_keys, log);
  const auto test = detail::load_annotated(s.xml, "", log);

  std::vector<corpus::AnnotatedInstance> labeled;
  for (const auto& inst : train.instances) {
    if (!inst.gold_keys.empty()) labeled.push_back(inst);
  }
  const auto train_vecs = lstm::extract_contexts(model.params, labeled, model.vocab, s.extract());
  const auto test_vecs = lstm::extract_contexts(model.params, test.instances, model.vocab, s.extract());
  const auto mfs = wsd::mfs_from_instances(labeled);

  std::map<wsd::LemmaPos, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> groups;
  for (std::size_t i = 0; i < labeled.size(); ++i) groups[{labeled[i].lemma, labeled[i].pos}].first.push_back(i);
  for (std::size_t i = 0; i < test.instances.size(); ++i) {
    groups[{test.instances[i].lemma, test.instances[i].pos}].second.push_back(i);
  }

  std::vector<wsd::Prediction> preds(test.instances.size());
  for (std::size_t i = 0; i < preds.size(); ++i) preds[i].instance_id = test.instances[i].id;
  std::size_t isolated = 0;
  for (const auto& [lp, members] : groups) {
    const auto& [li, ti] = members;
    if (ti.empty()) continue;
    if (li.empty()) continue;  // no labeled neighbors: abstain
    wsd::LpProblem problem;
    std::map<std::string, std::size_t> label_index;
    for (std::size_t i : li) label_index.emplace(labeled[i].gold_keys.front(), 0);
    for (auto& [key, idx] : label_index) {
      idx = problem.label_names.size();
      problem.label_names.push_back(key);
    }
    for (std::size_t i : li) {
      problem.vectors.push_back(train_vecs[i]);
      problem.labels.push_back(label_index.at(labeled[i].gold_keys.front()));
    }
    for (std::size_t i : ti) {
      problem.vectors.push_back(test_vecs[i]);
      problem.labels.push_back(std::nullopt);
    }
    problem.k = std::min(s.k, problem.vectors.size() - 1);
    problem.sigma = fixed_sigma ? *fixed_sigma : wsd::median_sigma(problem.vectors);
    problem.tol = s.tol;
    problem.max_iter = s.max_iter;
    const auto result = wsd::propagate_labels(problem);
    for (std::size_t u = 0; u < ti.size(); ++u) {
      auto p = result.predictions[u];
      p.instance_id = test.instances[ti[u]].id;
      preds[ti[u]] = std::move(p);
      isolated += result.isolated[u];
    }
  }
  if (s.fallback) {
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (!preds[i].abstained()) continue;
      auto it = mfs.find({test.instances[i].lemma, test.instances[i].pos});
      if (it == mfs.end()) continue;
      preds[i].sense_key = it->second;
      preds[i].strategy = wsd::Strategy::mfs;
    }
  }
  if (isolated) log.warn(std::to_string(isolated) + " test nodes had no affinities and kept a uniform distribution");
  io::atomic_write(s.out, wsd::format_predictions(preds));
  log.info("label propagation over " + std::to_string(groups.size()) + " lemma groups -> " + s.out);
  Manifest m("propagate");
  detail::echo_options(m, sub);
  m.input("checkpoint", s.checkpoint);
  m.input("vocab", s.vocab);
  m.input("train-xml", s.train_xml);
  m.input("train-keys", s.train_keys);
  m.input("xml", s.xml);
  m.output("predictions", s.out);
  m.write(s.out + ".manifest");
}

inline void cmd_score(const Settings& s, const CLI::App* sub, std::ostream& out, const Logger& log) {
  require_file(s.pred, "pred");
  require_file(s.gold, "gold");
  const auto gold = corpus::parse_key_file(io::read_file(s.gold));
  std::map<std::string, corpus::Pos> pos_of;
  if (!s.xml.empty()) {
    require_file(s.xml, "xml");
    pos_of = eval::pos_map(detail::load_annotated(s.xml, "", log).instances);
  }
  const auto report = eval::score_key_file(io::read_file(s.pred), gold, s.xml.empty() ? nullptr : &pos_of);
  out << report.human();
  if (!s.report.empty()) {
    io::atomic_write(s.report, report.machine());
    Manifest m("score");
    detail::echo_options(m, sub);
    m.input("pred", s.pred);
    m.input("gold", s.gold);
    m.output("report", s.report);
    m.write(s.report + ".manifest");
  }
}

inline void cmd_synth(const Settings& s, const CLI::App* sub, const Logger& log) {
  if (s.out_dir.empty()) throw UsageError("missing --out-dir");
  eval::PseudoCorpusSpec spec = eval::default_pseudo_spec();
  if (!s.templates.empty()) {
    require_file(s.templates, "templates");
    spec.senses = eval::parse_templates(io::read_file(s.templates));
  }
  if (!s.pseudoword.empty()) spec.pseudoword = s.pseudoword;
  spec.n_train_lm = s.n_lm;
  spec.n_train_annotated = s.n_annotated;
  spec.n_test = s.n_test;
  spec.seed = s.seed;
  const auto pc = eval::make_pseudo_corpus(spec);

  const fs::path dir(s.out_dir);
  std::string lm;
  for (const auto& sent : pc.lm) lm += eval::detail::join(sent) + '\n';
  io::atomic_write(dir / "lm.txt", lm);
  io::atomic_write(dir / "train.xml", corpus::to_xml(pc.train));
  io::atomic_write(dir / "train.key", corpus::format_key_file(corpus::gold_keys_of(pc.train)));
  io::atomic_write(dir / "test.xml", corpus::to_xml(pc.test));
  io::atomic_write(dir / "test.key", corpus::format_key_file(corpus::gold_keys_of(pc.test)));
  log.info("pseudoword corpus: " + std::to_string(pc.lm.size()) + " LM sentences, " +
           std::to_string(pc.train.size()) + " train and " + std::to_string(pc.test.size()) +
           " test instances -> " + s.out_dir);
  Manifest m("synth");
  detail::echo_options(m, sub);
  m.option("seed.resolved", std::to_string(spec.seed));
  if (!s.templates.empty()) m.input("templates", s.templates);
  for (const char* f : {"lm.txt", "train.xml", "train.key", "test.xml", "test.key"}) m.output(f, (dir / f).string());
  m.write(dir / "manifest.txt");
}

inline bool cmd_selfcheck(const Settings& s, std::ostream& out) {
  const auto lines = run_selfcheck(s.seed);
  std::size_t passed = 0;
  for (const auto& l : lines) {
    out << (l.passed ? "PASS " : "FAIL ") << l.name << "  " << l.detail << '\n';
    passed += l.passed;
  }
  const bool ok = passed == lines.size();
  out << "selfcheck: " << passed << "/" << lines.size() << (ok ? " checks passed" : " checks passed, FAILURES") << '\n';
  return ok;
}

// --- front end -------------------------------------------------------------

// Runs one subcommand. `args` excludes the program name. Returns the
// process exit status: 0 success, 1 usage error, 2 data error.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Settings s;
  CLI::App app{"senselab: held-out-word LSTM word sense disambiguation", "senselab"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  auto common = [&](CLI::App* sub) {
    sub->option_defaults()->always_capture_default();
    sub->add_option("--config", s.config, "flat key = value file; flags override its values");
    sub->add_flag("--quiet", s.quiet, "suppress progress logging");
    sub->add_option("--threads", s.threads, "worker cap");
    return sub;
  };
  auto tokens = [&](CLI::App* sub) {
    sub->add_option("--lowercase", s.lowercase, "case-fold corpus tokens");
    sub->add_option("--map-digits", s.map_digits, "map number tokens to <num>");
    sub->add_option("--max-len", s.max_len, "maximum sentence length in tokens");
  };
  auto model_inputs = [&](CLI::App* sub) {
    sub->add_option("--checkpoint", s.checkpoint, "trained LM checkpoint");
    sub->add_option("--vocab", s.vocab, "vocabulary file the checkpoint was trained with");
  };

  auto* build_vocab = common(app.add_subcommand("build-vocab", "build a vocabulary from a plain-text corpus"));
  build_vocab->add_option("--corpus", s.corpus, "one sentence per line");
  build_vocab->add_option("--out", s.out, "vocabulary file to write");
  build_vocab->add_option("--max-size", s.max_size, "vocabulary size including specials");
  build_vocab->add_option("--min-count", s.min_count, "minimum frequency");
  tokens(build_vocab);

  auto* train_lm = common(app.add_subcommand("train-lm", "train the held-out-word LSTM language model"));
  train_lm->add_option("--corpus", s.corpus, "one sentence per line");
  train_lm->add_option("--vocab", s.vocab, "vocabulary file");
  train_lm->add_option("--out", s.out, "checkpoint to write");
  train_lm->add_option("--loss-curve", s.loss_curve, "per-epoch loss file (default <out>.loss)");
  train_lm->add_option("--dim", s.dim, "embedding/context dimension p");
  train_lm->add_option("--hidden", s.hidden, "LSTM hidden dimension h");
  train_lm->add_option("--lr", s.lr, "SGD learning rate");
  train_lm->add_option("--clip", s.clip, "global gradient-norm clip");
  train_lm->add_option("--batch-size", s.batch_size, "examples per batch");
  train_lm->add_option("--epochs", s.epochs, "passes over the corpus");
  train_lm->add_option("--seed", s.seed, "random seed (SENSELAB_SEED overrides the config file)");
  train_lm->add_option("--train-fraction", s.train_fraction, "share of the corpus to train on");
  train_lm->add_option("--log-every", s.log_every, "progress every N batches");
  tokens(train_lm);

  auto* build_senses = common(app.add_subcommand("build-senses", "average context vectors into sense embeddings"));
  model_inputs(build_senses);
  build_senses->add_option("--xml", s.xml, "annotated corpus XML");
  build_senses->add_option("--keys", s.keys, "gold key file");
  build_senses->add_option("--out", s.out, "sense table to write");
  tokens(build_senses);

  auto* disambiguate = common(app.add_subcommand("disambiguate", "nearest-sense classification"));
  model_inputs(disambiguate);
  disambiguate->add_option("--senses", s.senses, "sense table");
  disambiguate->add_option("--xml", s.xml, "test corpus XML");
  disambiguate->add_option("--out", s.out, "predictions file to write");
  disambiguate->add_option("--mode", s.mode, "nn or mfs (baseline)");
  disambiguate->add_option("--fallback", s.fallback, "fall back to the most frequent sense for unseen lemmas");
  disambiguate->add_option("--mfs-xml", s.mfs_xml, "extra annotated corpus for most-frequent senses");
  disambiguate->add_option("--mfs-keys", s.mfs_keys, "key file of --mfs-xml");
  tokens(disambiguate);

  auto* propagate = common(app.add_subcommand("propagate", "label propagation over a kNN graph"));
  model_inputs(propagate);
  propagate->add_option("--train-xml", s.train_xml, "labeled corpus XML");
  propagate->add_option("--train-keys", s.train_keys, "labeled corpus key file");
  propagate->add_option("--xml", s.xml, "test corpus XML");
  propagate->add_option("--out", s.out, "predictions file to write");
  propagate->add_option("--k", s.k, "neighbors per node");
  propagate->add_option("--sigma", s.sigma, "kernel bandwidth or 'auto' (median distance)");
  propagate->add_option("--tol", s.tol, "convergence threshold");
  propagate->add_option("--max-iter", s.max_iter, "iteration cap");
  propagate->add_option("--fallback", s.fallback, "most frequent sense for lemmas without labeled data");
  tokens(propagate);

  auto* score = common(app.add_subcommand("score", "precision/recall/F1 against a gold key file"));
  score->add_option("--pred", s.pred, "predictions key file");
  score->add_option("--gold", s.gold, "gold key file");
  score->add_option("--xml", s.xml, "test corpus XML for per-POS figures");
  score->add_option("--report", s.report, "write `metric TAB value` lines here");

  auto* synth = common(app.add_subcommand("synth", "generate the pseudoword benchmark"));
  synth->add_option("--out-dir", s.out_dir, "output directory");
  synth->add_option("--n-lm", s.n_lm, "LM corpus sentences");
  synth->add_option("--n-annotated", s.n_annotated, "annotated training instances per sense");
  synth->add_option("--n-test", s.n_test, "test instances in total");
  synth->add_option("--seed", s.seed, "random seed (SENSELAB_SEED overrides the config file)");
  synth->add_option("--templates", s.templates, "templates file: key TAB word TAB template");
  synth->add_option("--pseudoword", s.pseudoword, "pseudoword surface");

  auto* selfcheck = common(app.add_subcommand("selfcheck", "run the gradient and oracle checks"));
  selfcheck->add_option("--seed", s.seed, "first random seed");

  auto usage = [&](const std::string& msg, const CLI::App* which) {
    err << "error: " << msg << "\n\n" << (which ? which->help() : app.help());
    return kExitUsage;
  };

  // Splice config-file values in as flags ahead of the command line, for
  // keys the chosen subcommand knows and the command line does not set.
  CLI::App* chosen = nullptr;
  try {
    if (!args.empty()) {
      for (auto* sub : app.get_subcommands({})) {
        if (sub->get_name() == args.front()) chosen = sub;
      }
    }
    auto given = [&](const std::string& key) {
      return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
        return a == "--" + key || a.starts_with("--" + key + "=");
      });
    };
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
      if (args[i].starts_with("--config=")) config_path = args[i].substr(9);
    }
    const bool seed_on_command_line = given("seed");
    if (chosen && !config_path.empty()) {
      if (!fs::is_regular_file(config_path)) throw Error("input file not found: " + config_path);
      std::vector<std::string> injected;
      for (const auto& [key, value] : parse_config(io::read_file(config_path))) {
        if (key == "config" || given(key) || !chosen->get_option_no_throw("--" + key)) continue;
        injected.push_back("--" + key);
        injected.push_back(value);
      }
      args.insert(args.begin() + 1, injected.begin(), injected.end());
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
    if (chosen && chosen->get_option_no_throw("--seed") && !seed_on_command_line) {
      if (auto env = detail::env_seed()) s.seed = *env;
    }
  } catch (const CLI::CallForHelp&) {
    out << (chosen ? chosen->help() : app.help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return usage(e.what(), chosen);
  } catch (const UsageError& e) {
    return usage(e.what(), chosen);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }

  const Logger log{err, s.quiet};
  try {
    if (build_vocab->parsed()) cmd_build_vocab(s, build_vocab, log);
    else if (train_lm->parsed()) cmd_train_lm(s, train_lm, log);
    else if (build_senses->parsed()) cmd_build_senses(s, build_senses, log);
    else if (disambiguate->parsed()) cmd_disambiguate(s, disambiguate, log);
    else if (propagate->parsed()) cmd_propagate(s, propagate, log);
    else if (score->parsed()) cmd_score(s, score, out, log);
    else if (synth->parsed()) cmd_synth(s, synth, log);
    else if (selfcheck->parsed()) return cmd_selfcheck(s, out) ? kExitOk : kExitData;
  } catch (const UsageError& e) {
    return usage(e.what(), chosen);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace senselab::cli
