// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "senselab/cli/app.hpp"
#include "senselab/cli/selfcheck.hpp"
#include "senselab/senselab.hpp"

namespace fs = std::filesystem;
using namespace senselab;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int failures = 0;

void criterion(int n, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  if (!in_time) o.detail += "; over the " + fmt("%.0f", budget_s) + " s budget";
  const bool ok = o.passed && in_time;
  failures += !ok;
  std::printf("AC%d %s %s: %s [%.2f s]\n", n, ok ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

// --- 1 -------------------------------------------------------------------

Outcome gradient_suite() {
  double worst = 0.0;
  std::size_t checks = 0, passed = 0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto [params, sentence] = cli::random_lstm_point(seed);
    if (sentence.ids.size() != 5 || params.vocab_size() != 12 || params.context_dim() != 4 || params.hidden_dim() != 6) {
      return {false, "unexpected fixture dimensions"};
    }
    for (std::size_t m = 0; m < 7; ++m) {
      const auto r = cli::check_lstm_matrix(params, sentence, 1 + seed % 3, m, 1e-4);
      worst = std::max(worst, r.max_rel_error);
      ++checks;
      passed += r.passed();
    }
  }
  return {passed == checks, std::to_string(passed) + "/" + std::to_string(checks) +
                                " matrices within 1e-4, worst relative error " + fmt("%.2e", worst)};
}

// --- 2 -------------------------------------------------------------------

Outcome uniform_anchor() {
  std::vector<corpus::SurfaceSentence> surf{{"a", "b", "c"}, {"d", "e", "a", "b"}, {"c", "c", "f", "g", "h"}};
  const auto vocab = corpus::build_vocabulary(surf, 100, 1);
  std::vector<corpus::Sentence> sentences;
  for (const auto& s : surf) sentences.push_back(corpus::encode(s, vocab));
  lstm::ModelConfig cfg;
  cfg.vocab_size = vocab.size();
  cfg.context_dim = 8;
  cfg.hidden_dim = 8;
  const auto params = lstm::init_params(cfg, 5, lstm::InitMode::zero_output);
  const double V = static_cast<double>(vocab.size());
  double worst_loss = 0.0;
  for (const auto& s : sentences) {
    for (std::size_t t : lstm::eligible_positions(s)) {
      worst_loss = std::max(worst_loss, std::abs(lstm::forward_heldout(params, s, t).loss - std::log(V)));
    }
  }
  const double ppl_err = std::abs(lstm::perplexity(params, sentences) - V);
  return {worst_loss <= 1e-9 && ppl_err <= 1e-9,
          "V=" + std::to_string(vocab.size()) + ", |loss - ln V| <= " + fmt("%.1e", worst_loss) +
              ", |perplexity - V| = " + fmt("%.1e", ppl_err)};
}

// --- 3 -------------------------------------------------------------------

Outcome overfit_oracle() {
  // 50 sentences, each one word from a 10-word set repeated 4 to 8 times.
  Rng rng(1);
  std::vector<corpus::SurfaceSentence> surf(50);
  for (auto& s : surf) s.assign(4 + rng.index(5), "w" + std::to_string(rng.index(10)));
  const auto vocab = corpus::build_vocabulary(surf, 1000, 1);
  std::vector<corpus::Sentence> sentences;
  for (const auto& s : surf) sentences.push_back(corpus::encode(s, vocab));

  lstm::ModelConfig cfg;
  cfg.vocab_size = vocab.size();
  cfg.context_dim = 16;
  cfg.hidden_dim = 32;
  cfg.learning_rate = 1.0;
  cfg.batch_size = 1;
  cfg.clip_norm = 1.0;
  cfg.seed = 1;
  lstm::Trainer trainer(cfg, lstm::init_params(cfg, cfg.seed));
  double first = 0.0, ppl = 0.0;
  int halved_at = 0, ppl_at = 0;
  for (int e = 1; e <= 200 && !(halved_at && ppl_at); ++e) {
    const double loss = trainer.epoch(sentences, static_cast<std::size_t>(e - 1));
    if (e == 1) first = loss;
    if (!halved_at && loss <= 0.5 * first) halved_at = e;
    ppl = lstm::perplexity(trainer.params(), sentences);
    if (!ppl_at && ppl < 1.5) ppl_at = e;
  }
  const bool ok = halved_at && halved_at <= 30 && ppl_at;
  return {ok, "epoch-1 loss " + fmt("%.3f", first) + ", halved at epoch " + std::to_string(halved_at) +
                  " (limit 30), perplexity < 1.5 at epoch " + std::to_string(ppl_at) + " (limit 200)"};
}

// --- 4 -------------------------------------------------------------------

std::string brute_force(const std::vector<double>& q, const std::vector<std::pair<std::string, std::vector<double>>>& c,
                        std::size_t& tied) {
  auto cos = [](const std::vector<double>& a, const std::vector<double>& b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      ab += a[i] * b[i];
      aa += a[i] * a[i];
      bb += b[i] * b[i];
    }
    return aa == 0 || bb == 0 ? 0.0 : ab / (std::sqrt(aa) * std::sqrt(bb));
  };
  std::string best;
  double best_score = -2.0;
  tied = 0;
  for (const auto& [key, v] : c) {
    const double s = cos(q, v);
    if (s > best_score || (s == best_score && key < best)) {
      tied = s == best_score ? tied + 1 : 1;
      best = key;
      best_score = s;
    } else if (s == best_score) {
      ++tied;
    }
  }
  return best;
}

Outcome nn_oracle() {
  Rng rng(4);
  std::size_t agree = 0, tie_cases = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t p = 1 + rng.index(16), n = 1 + rng.index(8);
    lstm::ModelConfig cfg;
    cfg.vocab_size = 10;
    cfg.context_dim = p;
    cfg.hidden_dim = 4;
    const auto params = lstm::init_params(cfg, 1000 + trial);
    corpus::Vocabulary vocab = corpus::build_vocabulary({{"a", "b", "c", "d", "e", "f"}}, 10, 1);
    corpus::AnnotatedInstance inst;
    inst.id = "i" + std::to_string(trial);
    inst.lemma = "w";
    inst.pos = corpus::Pos::noun;
    for (std::size_t k = 0, len = 2 + rng.index(6); k < len; ++k) inst.sentence.push_back(std::string(1, static_cast<char>('a' + rng.index(6))));
    inst.target_position = rng.index(inst.sentence.size());
    const auto query = lstm::extract_context(params, inst, vocab).values;

    wsd::SenseEmbeddingTable table(p);
    std::vector<std::pair<std::string, std::vector<double>>> cands;
    for (std::size_t k = 0; k < n; ++k) {
      const std::string key = "w%" + std::to_string(rng.index(100));
      if (table.find(key)) continue;
      std::vector<double> v(p);
      switch (rng.index(4)) {
        case 0:  // exact copy of another candidate: a tie
          if (!cands.empty()) {
            v = cands[rng.index(cands.size())].second;
            break;
          }
          [[fallthrough]];
        case 1:  // positive multiple of the query: a tie at cosine 1
          if (rng.index(2)) {
            for (std::size_t i = 0; i < p; ++i) v[i] = query[i] * 2.0;
            break;
          }
          [[fallthrough]];
        default:
          for (auto& x : v) x = rng.uniform(-1, 1);
      }
      cands.emplace_back(key, v);
      table.insert(key, wsd::SenseEntry{"w", corpus::Pos::noun, v, 1});
    }
    std::size_t tied = 0;
    const std::string oracle = brute_force(query, cands, tied);
    tie_cases += tied > 1;
    const auto pred = wsd::classify_nn(inst, params, table, vocab);
    agree += pred.sense_key == oracle && pred.strategy == wsd::Strategy::nn;
  }
  return {agree == 1000 && tie_cases > 0,
          std::to_string(agree) + "/1000 agree with the brute-force scan, " + std::to_string(tie_cases) + " tie cases"};
}

// --- 5 -------------------------------------------------------------------

Outcome lp_chain() {
  wsd::LpProblem chain;
  chain.vectors = {{0.0}, {10.0}, {1.0}};
  chain.labels = {0, 1, std::nullopt};
  chain.label_names = {"A", "B"};
  chain.k = 2;
  chain.sigma = 1.0;
  chain.tol = 1e-6;
  bool one_hot = true;
  const auto r = wsd::propagate_labels(chain, [&](std::size_t, const numeric::Matrix& y) {
    one_hot = one_hot && y(0, 0) == 1.0 && y(0, 1) == 0.0 && y(1, 0) == 0.0 && y(1, 1) == 1.0;
  });
  // Fixed point: node 2 links to A with e^-1 and to B with e^-81.
  const double expected = 1.0 / (1.0 + std::exp(-80.0));
  const double mass = r.distributions.at(0).at(0);
  const bool ok = one_hot && r.predictions.at(0).sense_key == "A" && mass > 0.99 &&
                  std::abs(mass - expected) <= 1e-6 && r.converged;
  const double mass_b = r.distributions.at(0).at(1);
  return {ok, "mass(A) = " + fmt("%.12f", mass) + ", mass(B) = " + fmt("%.6e", mass_b) + " vs closed form " +
                  fmt("%.6e", std::exp(-80.0) / (1.0 + std::exp(-80.0))) + ", " + std::to_string(r.iterations) +
                  " iterations, labeled rows one-hot every iteration: " + (one_hot ? "yes" : "no")};
}

// --- 6 -------------------------------------------------------------------

Outcome scorer_counts() {
  using wsd::Prediction;
  using wsd::Strategy;
  const corpus::KeyMap gold3{{"a", {"x"}}, {"b", {"y"}}, {"c", {"z"}}};
  const std::vector<Prediction> p3{{"a", "x", 0, Strategy::nn}, {"b", "y", 0, Strategy::nn}, {"c", "q", 0, Strategy::nn}};
  const auto r1 = eval::score(p3, gold3);
  const corpus::KeyMap gold2{{"a", {"x"}}, {"b", {"y"}}};
  const std::vector<Prediction> p2{{"a", "x", 0, Strategy::nn}, {"b", std::nullopt, 0, Strategy::abstain}};
  const auto r2 = eval::score(p2, gold2);
  const bool ok = std::abs(r1.precision() - 2.0 / 3) <= 1e-9 && std::abs(r1.recall() - 2.0 / 3) <= 1e-9 &&
                  std::abs(r1.f1() - 2.0 / 3) <= 1e-9 && std::abs(r2.precision() - 1.0) <= 1e-9 &&
                  std::abs(r2.recall() - 0.5) <= 1e-9 && std::abs(r2.f1() - 2.0 / 3) <= 1e-9;
  return {ok, "2-of-3: P=R=F1=" + fmt("%.6f", r1.f1()) + "; 1 correct + 1 abstain: P=" + fmt("%.6f", r2.precision()) +
                  " R=" + fmt("%.6f", r2.recall()) + " F1=" + fmt("%.6f", r2.f1())};
}

// --- 7 and 8 ---------------------------------------------------------------

struct PipelineRun {
  bool ok = false;
  std::string error;
  double nn_f1 = 0.0, mfs_f1 = 0.0;
  double seconds = 0.0;
  fs::path dir;
};

double metric(const fs::path& report, const std::string& name) {
  std::istringstream in(io::read_file(report));
  std::string line;
  while (std::getline(in, line)) {
    if (line.starts_with(name + "\t")) return io::parse_double(line.substr(name.size() + 1));
  }
  throw Error("metric " + name + " missing from " + report.string());
}

PipelineRun pipeline(const fs::path& dir, std::size_t n_annotated) {
  PipelineRun run;
  run.dir = dir;
  const auto t0 = std::chrono::steady_clock::now();
  fs::remove_all(dir);
  const std::string d = dir.string() + "/";
  const std::vector<std::vector<std::string>> steps{
      {"synth", "--out-dir", d + "data", "--n-lm", "2000", "--n-annotated", std::to_string(n_annotated), "--n-test",
       "100", "--seed", "1"},
      {"build-vocab", "--corpus", d + "data/lm.txt", "--out", d + "vocab.tsv"},
      {"train-lm", "--corpus", d + "data/lm.txt", "--vocab", d + "vocab.tsv", "--out", d + "lm.ckpt", "--dim", "32",
       "--hidden", "64", "--epochs", "20", "--seed", "1"},
      {"build-senses", "--checkpoint", d + "lm.ckpt", "--vocab", d + "vocab.tsv", "--xml", d + "data/train.xml",
       "--keys", d + "data/train.key", "--out", d + "senses.tsv"},
      {"disambiguate", "--checkpoint", d + "lm.ckpt", "--vocab", d + "vocab.tsv", "--senses", d + "senses.tsv",
       "--xml", d + "data/test.xml", "--out", d + "nn.key"},
      {"disambiguate", "--mode", "mfs", "--senses", d + "senses.tsv", "--xml", d + "data/test.xml", "--out",
       d + "mfs.key"},
      {"score", "--pred", d + "nn.key", "--gold", d + "data/test.key", "--report", d + "nn.report"},
      {"score", "--pred", d + "mfs.key", "--gold", d + "data/test.key", "--report", d + "mfs.report"},
  };
  for (auto args : steps) {
    args.push_back("--quiet");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    if (code != 0) {
      run.error = args[0] + " exited " + std::to_string(code) + ": " + err.str();
      return run;
    }
  }
  run.nn_f1 = metric(dir / "nn.report", "f1");
  run.mfs_f1 = metric(dir / "mfs.report", "f1");
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  run.ok = true;
  return run;
}

PipelineRun first_run;

Outcome pseudoword() {
  const fs::path root = fs::temp_directory_path() / "senselab_acceptance";
  first_run = pipeline(root / "n20", 20);
  if (!first_run.ok) return {false, first_run.error};
  const auto fewer = pipeline(root / "n10", 10);
  if (!fewer.ok) return {false, fewer.error};
  const bool ok = first_run.nn_f1 >= 0.90 && first_run.nn_f1 - first_run.mfs_f1 >= 0.25 &&
                  fewer.nn_f1 - fewer.mfs_f1 >= 0.15 && first_run.seconds < 600 && fewer.seconds < 600;
  return {ok, "20/sense: F1 " + fmt("%.4f", first_run.nn_f1) + " vs MFS " + fmt("%.4f", first_run.mfs_f1) +
                  " (need >= 0.90 and +0.25) in " + fmt("%.0f", first_run.seconds) + " s; 10/sense: F1 " +
                  fmt("%.4f", fewer.nn_f1) + " vs MFS " + fmt("%.4f", fewer.mfs_f1) + " (need +0.15) in " +
                  fmt("%.0f", fewer.seconds) + " s (limit 600 s per run)"};
}

Outcome determinism() {
  if (!first_run.ok) return {false, "first pseudoword run unavailable"};
  const auto again = pipeline(fs::temp_directory_path() / "senselab_acceptance" / "n20_again", 20);
  if (!again.ok) return {false, again.error};
  std::string detail;
  bool ok = true;
  for (const char* f : {"lm.ckpt", "senses.tsv", "nn.key", "mfs.key"}) {
    const bool same = io::read_file(first_run.dir / f) == io::read_file(again.dir / f);
    ok = ok && same;
    detail += std::string(detail.empty() ? "" : ", ") + f + (same ? " identical" : " DIFFERS");
  }
  return {ok, detail};
}

// --- 9 -------------------------------------------------------------------

Outcome round_trips() {
  std::string detail;
  bool ok = true;

  lstm::ModelConfig cfg;
  cfg.vocab_size = 30;
  cfg.context_dim = 7;
  cfg.hidden_dim = 5;
  const auto params = lstm::init_params(cfg, 99);
  const auto digest = io::sha256("vocabulary");
  const fs::path ck = fs::temp_directory_path() / "senselab_acceptance_ckpt.bin";
  lstm::save_checkpoint(params, cfg, digest, ck);
  const auto loaded = lstm::load_checkpoint(ck, digest);
  const bool ck_ok = loaded.params == params &&
                     lstm::serialize_checkpoint(loaded.params, loaded.config, loaded.vocab_digest) == io::read_file(ck);
  fs::remove(ck);
  ok = ok && ck_ok;
  detail += std::string("checkpoint ") + (ck_ok ? "bit-exact" : "MISMATCH");

  Rng rng(17);
  wsd::SenseEmbeddingTable table(9);
  for (int k = 0; k < 12; ++k) {
    std::vector<double> c(9);
    for (auto& v : c) v = std::tanh(rng.uniform(-3, 3)) / 7.0;
    table.insert("lemma" + std::to_string(k % 3) + "%" + std::to_string(k), {"lemma" + std::to_string(k % 3), corpus::Pos::verb, c, 1 + rng.index(9)});
  }
  const auto back = wsd::SenseEmbeddingTable::parse(table.serialize());
  bool table_ok = back.size() == table.size();
  for (int k = 0; k < 12 && table_ok; ++k) {
    const std::string key = "lemma" + std::to_string(k % 3) + "%" + std::to_string(k);
    table_ok = back.find(key) && back.find(key)->centroid == table.find(key)->centroid &&
               back.find(key)->support == table.find(key)->support;
  }
  ok = ok && table_ok;
  detail += std::string("; sense table ") + (table_ok ? "centroids exact" : "MISMATCH");

  const std::string fixtures = SENSELAB_FIXTURES;
  const auto good = corpus::parse_annotated_corpus(io::read_file(fixtures + "/corpus.xml"), io::read_file(fixtures + "/corpus.key"));
  const bool good_ok = good.instances.size() == 5 && good.instances[0].target_position == 1;
  ok = ok && good_ok;
  detail += "; fixture " + std::string(good_ok ? "accepted (5 instances)" : "NOT ACCEPTED");

  std::vector<std::string> kinds;
  for (const char* f : {"malformed_mismatched.xml", "malformed_unterminated.xml", "malformed_missing_id.xml"}) {
    try {
      corpus::parse_annotated_corpus(io::read_file(fixtures + "/" + f), "");
      kinds.push_back("accepted");
    } catch (const ParseError& e) {
      kinds.push_back(std::string(ParseError::kind_name(e.kind())));
    }
  }
  const bool distinct = kinds[0] != kinds[1] && kinds[1] != kinds[2] && kinds[0] != kinds[2] &&
                        std::find(kinds.begin(), kinds.end(), "accepted") == kinds.end();
  ok = ok && distinct;
  detail += "; malformed variants rejected as " + kinds[0] + ", " + kinds[1] + ", " + kinds[2];
  return {ok, detail};
}

}  // namespace

int main() {
  criterion(1, "gradient suite", 10, gradient_suite);
  criterion(2, "uniform-softmax anchor", 1, uniform_anchor);
  criterion(3, "overfit oracle", 120, overfit_oracle);
  criterion(4, "nearest-sense oracle", 5, nn_oracle);
  criterion(5, "label-propagation closed form", 1, lp_chain);
  criterion(6, "scorer hand counts", 1, scorer_counts);
  criterion(7, "pseudoword end-to-end", 1200, pseudoword);
  criterion(8, "determinism", 600, determinism);
  criterion(9, "format round-trips", 5, round_trips);
  fs::remove_all(fs::temp_directory_path() / "senselab_acceptance");
  std::printf("%d of 9 criteria failed\n", failures);
  return failures ? 1 : 0;
}
