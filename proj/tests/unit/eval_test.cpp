#include <gtest/gtest.h>

#include <set>
#include <string>
#include <vector>

#include "senselab/eval/pseudo.hpp"
#include "senselab/eval/score.hpp"
#include "senselab/random.hpp"

namespace senselab::eval {
namespace {

using wsd::Prediction;
using wsd::Strategy;

Prediction pred(std::string id, std::optional<std::string> key, Strategy s = Strategy::nn) {
  return Prediction{std::move(id), std::move(key), 0.0, key ? s : Strategy::abstain};
}

TEST(Score, TwoOfThree) {
  const corpus::KeyMap gold{{"a", {"x"}}, {"b", {"y"}}, {"c", {"z"}}};
  const std::vector<Prediction> p{pred("a", "x"), pred("b", "y"), pred("c", "q")};
  const auto r = score(p, gold);
  EXPECT_NEAR(r.precision(), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.recall(), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.f1(), 2.0 / 3.0, 1e-12);
  EXPECT_NE(r.human().find("f1 0.6667"), std::string::npos);
  EXPECT_NE(r.machine().find("f1\t0.6666666666666666\n"), std::string::npos);
}

TEST(Score, AbstainIsUnattempted) {
  const corpus::KeyMap gold{{"a", {"x"}}, {"b", {"y"}}};
  const std::vector<Prediction> p{pred("a", "x"), pred("b", std::nullopt)};
  const auto r = score(p, gold);
  EXPECT_EQ(r.overall.attempted, 1u);
  EXPECT_EQ(r.precision(), 1.0);
  EXPECT_EQ(r.recall(), 0.5);
  EXPECT_NEAR(r.f1(), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(r.per_strategy.at("abstain"), 1u);
}

TEST(Score, MultiGoldIsSetMembershipAndMissingCountsTowardTotal) {
  const corpus::KeyMap gold{{"a", {"x", "w"}}, {"b", {"y"}}, {"c", {"z"}}};
  const std::vector<Prediction> p{pred("a", "w")};
  const auto r = score(p, gold);
  EXPECT_EQ(r.overall.correct, 1u);
  EXPECT_EQ(r.overall.total, 3u);
  EXPECT_EQ(r.precision(), 1.0);
  EXPECT_NEAR(r.recall(), 1.0 / 3.0, 1e-15);
}

TEST(Score, AllCorrectAndEmpty) {
  const corpus::KeyMap gold{{"a", {"x"}}, {"b", {"y"}}};
  const auto r = score(std::vector<Prediction>{pred("a", "x"), pred("b", "y")}, gold);
  EXPECT_EQ(r.f1(), 1.0);
  const auto none = score(std::vector<Prediction>{}, gold);
  EXPECT_EQ(none.f1(), 0.0);
  EXPECT_EQ(none.precision(), 0.0);
}

TEST(Score, UnknownAndDuplicateIdsAreErrors) {
  const corpus::KeyMap gold{{"a", {"x"}}};
  const std::vector<Prediction> p{pred("a", "x"), pred("zz", "x"), pred("a", "y")};
  const auto r = score(p, gold);
  EXPECT_EQ(r.overall.attempted, 1u);
  EXPECT_EQ(r.overall.correct, 1u);
  ASSERT_EQ(r.errors.size(), 2u);
  EXPECT_NE(r.errors[0].find("zz"), std::string::npos);
  EXPECT_NE(r.machine().find("errors\t2\n"), std::string::npos);
}

corpus::KeyMap random_gold(Rng& rng, std::size_t n) {
  corpus::KeyMap gold;
  for (std::size_t i = 0; i < n; ++i) {
    auto& keys = gold["i" + std::to_string(i)];
    keys.push_back("k" + std::to_string(rng.index(3)));
    if (rng.index(4) == 0) keys.push_back("k3");
  }
  return gold;
}

std::vector<Prediction> random_preds(Rng& rng, const corpus::KeyMap& gold) {
  std::vector<Prediction> p;
  for (const auto& [id, keys] : gold) {
    const std::size_t r = rng.index(6);
    if (r == 5) continue;
    p.push_back(r == 4 ? pred(id, std::nullopt) : pred(id, "k" + std::to_string(r)));
  }
  return p;
}

TEST(Score, PermutationInvariant) {
  Rng rng(12);
  const auto gold = random_gold(rng, 40);
  auto p = random_preds(rng, gold);
  const std::string ref = score(p, gold).machine();
  for (int t = 0; t < 10; ++t) {
    rng.shuffle(p);
    EXPECT_EQ(score(p, gold).machine(), ref);
  }
}

TEST(Score, DisjointMergeAddsCounts) {
  Rng rng(13);
  const auto gold = random_gold(rng, 40);
  const auto p = random_preds(rng, gold);
  const std::size_t half = p.size() / 2;
  const std::vector<Prediction> a(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(half)), b(p.begin() + static_cast<std::ptrdiff_t>(half), p.end());
  const auto ra = score(a, gold), rb = score(b, gold), rab = score(p, gold);
  EXPECT_EQ(rab.overall.correct, ra.overall.correct + rb.overall.correct);
  EXPECT_EQ(rab.overall.attempted, ra.overall.attempted + rb.overall.attempted);
}

TEST(Score, FullAttemptGivesEqualMetrics) {
  Rng rng(14);
  const auto gold = random_gold(rng, 30);
  std::vector<Prediction> p;
  for (const auto& [id, keys] : gold) p.push_back(pred(id, "k" + std::to_string(rng.index(3))));
  const auto r = score(p, gold);
  EXPECT_EQ(r.precision(), r.recall());
  EXPECT_EQ(r.precision(), r.f1());
}

TEST(Score, PerPosBreakdown) {
  const corpus::KeyMap gold{{"a", {"x"}}, {"b", {"y"}}};
  const std::map<std::string, corpus::Pos> pos{{"a", corpus::Pos::noun}, {"b", corpus::Pos::verb}};
  const auto r = score(std::vector<Prediction>{pred("a", "x"), pred("b", "q")}, gold, &pos);
  EXPECT_EQ(r.per_pos.at(corpus::Pos::noun).f1(), 1.0);
  EXPECT_EQ(r.per_pos.at(corpus::Pos::verb).f1(), 0.0);
  EXPECT_NE(r.human().find("NOUN p=1.0000"), std::string::npos);
}

TEST(Score, KeyFilePredictions) {
  const corpus::KeyMap gold{{"a", {"x"}}, {"b", {"y"}}, {"c", {"z"}}};
  const auto r = score_key_file("a x\nb y\nc q\n", gold);
  EXPECT_NEAR(r.f1(), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(r.per_strategy.at("file"), 3u);
}

TEST(MfsBaseline, PredictsDominantSenseOrAbstains) {
  wsd::SenseEmbeddingTable t(1);
  t.insert("w%a", {"w", corpus::Pos::noun, {1.0}, 3});
  t.insert("w%b", {"w", corpus::Pos::noun, {1.0}, 1});
  t.insert("v%only", {"v", corpus::Pos::noun, {1.0}, 2});
  std::vector<corpus::AnnotatedInstance> insts(4);
  insts[0].id = "1", insts[0].lemma = "w", insts[0].gold_keys = {"w%a"};
  insts[1].id = "2", insts[1].lemma = "w", insts[1].gold_keys = {"w%b"};
  insts[2].id = "3", insts[2].lemma = "unseen";
  insts[3].id = "4", insts[3].lemma = "v", insts[3].gold_keys = {"v%only"};
  for (auto& i : insts) i.pos = corpus::Pos::noun;
  const auto p = mfs_baseline(t, insts);
  EXPECT_EQ(p[0].sense_key, "w%a");
  EXPECT_EQ(p[1].sense_key, "w%a");
  EXPECT_TRUE(p[2].abstained());
  EXPECT_EQ(p[3].strategy, Strategy::mfs);
  const corpus::KeyMap gold{{"4", {"v%only"}}};
  EXPECT_EQ(score(std::vector<Prediction>{p[3]}, gold).f1(), 1.0);
}

PseudoCorpusSpec small_spec() {
  PseudoCorpusSpec spec = default_pseudo_spec();
  spec.n_train_lm = 200;
  spec.n_train_annotated = 7;
  spec.n_test = 11;
  spec.seed = 5;
  return spec;
}

TEST(Pseudo, CountsAndBalance) {
  const auto c = make_pseudo_corpus(small_spec());
  EXPECT_EQ(c.lm.size(), 200u);
  EXPECT_EQ(c.train.size(), 14u);
  EXPECT_EQ(c.test.size(), 11u);
  std::map<std::string, std::size_t> train_per, test_per;
  for (const auto& i : c.train) ++train_per[i.gold_keys.at(0)];
  for (const auto& i : c.test) {
    ASSERT_EQ(i.gold_keys.size(), 1u);
    ++test_per[i.gold_keys[0]];
    EXPECT_EQ(i.sentence[i.target_position], "bananadoor");
    EXPECT_EQ(i.lemma, "bananadoor");
  }
  EXPECT_EQ(train_per.at("bananadoor%banana"), 7u);
  EXPECT_EQ(train_per.at("bananadoor%door"), 7u);
  EXPECT_EQ(test_per.at("bananadoor%banana") + test_per.at("bananadoor%door"), 11u);
  EXPECT_LE(std::max(test_per.at("bananadoor%banana"), test_per.at("bananadoor%door")) -
                std::min(test_per.at("bananadoor%banana"), test_per.at("bananadoor%door")),
            1u);
}

TEST(Pseudo, SplitsAreDisjointAndLmAvoidsTest) {
  auto spec = small_spec();
  spec.n_train_lm = 2000;
  const auto c = make_pseudo_corpus(spec);
  std::set<std::string> train, test, ids;
  for (const auto& i : c.train) {
    train.insert(detail::join(i.sentence));
    EXPECT_TRUE(ids.insert(i.id).second);
  }
  for (const auto& i : c.test) {
    test.insert(detail::join(i.sentence));
    EXPECT_TRUE(ids.insert(i.id).second);
  }
  for (const auto& s : test) EXPECT_EQ(train.count(s), 0u);
  for (const auto& s : c.lm) {
    const std::string j = detail::join(s);
    EXPECT_EQ(j.find("bananadoor"), std::string::npos);
    std::string merged = j;
    for (const char* w : {"banana", "door"}) {
      for (std::size_t at = 0; (at = merged.find(std::string(" ") + w + " ", at)) != std::string::npos;) {
        merged.replace(at + 1, std::string(w).size(), "bananadoor");
      }
    }
    EXPECT_EQ(test.count(merged), 0u) << j;
  }
}

TEST(Pseudo, DeterministicInSeed) {
  const auto a = make_pseudo_corpus(small_spec()), b = make_pseudo_corpus(small_spec());
  EXPECT_EQ(a.lm, b.lm);
  ASSERT_EQ(a.test.size(), b.test.size());
  for (std::size_t i = 0; i < a.test.size(); ++i) {
    EXPECT_EQ(a.test[i].id, b.test[i].id);
    EXPECT_EQ(a.test[i].sentence, b.test[i].sentence);
  }
  auto spec = small_spec();
  spec.seed = 6;
  EXPECT_NE(make_pseudo_corpus(spec).lm, a.lm);
}

TEST(Pseudo, TooFewTemplatesIsAnError) {
  PseudoCorpusSpec spec;
  spec.pseudoword = "xy";
  spec.senses = {{"xy%x", "x", {"{a|b} _"}}, {"xy%y", "y", {"{c|d} _ {e|f}"}}};
  spec.n_train_annotated = 2;
  spec.n_test = 4;
  EXPECT_THROW(make_pseudo_corpus(spec), Error);
  spec.n_train_annotated = 1;
  spec.n_test = 2;
  EXPECT_NO_THROW(make_pseudo_corpus(spec));
  spec.senses.pop_back();
  EXPECT_THROW(make_pseudo_corpus(spec), Error);
}

TEST(Pseudo, TemplateFileParsing) {
  const auto senses = parse_templates("# comment\nk%a\ta\t{x|y} _ z\n\nk%b\tb\t_ w\nk%a\ta\tq _\n");
  ASSERT_EQ(senses.size(), 2u);
  EXPECT_EQ(senses[0].templates.size(), 2u);
  EXPECT_EQ(senses[1].word, "b");
  EXPECT_THROW(parse_templates("k%a\ta\n"), Error);
  EXPECT_THROW(parse_templates("k%a\ta\t_\nk%a\tb\t_\n"), Error);
  PseudoCorpusSpec spec;
  spec.pseudoword = "ab";
  spec.senses = parse_templates("k%a\ta\t{x|y} _\nk%b\tb\t_ {v|w}\n");
  spec.senses[0].templates.push_back("_ _");
  EXPECT_THROW(make_pseudo_corpus(spec), Error);
}

TEST(Pseudo, SampleDistinctGivesDistinctValues) {
  Rng rng(1);
  for (std::uint64_t n : {1u, 5u, 100u}) {
    for (std::size_t k = 0; k <= std::min<std::uint64_t>(n, 20); ++k) {
      const auto v = detail::sample_distinct(rng, n, k);
      EXPECT_EQ(v.size(), k);
      EXPECT_EQ(std::set<std::uint64_t>(v.begin(), v.end()).size(), k);
      for (auto x : v) EXPECT_LT(x, n);
    }
  }
}

}  // namespace
}  // namespace senselab::eval
