#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "stylefactor/error.hpp"
#include "stylefactor/sampler.hpp"
#include "stylefactor/synth.hpp"

namespace sf = stylefactor;

namespace {

sf::Hyperparams Hp(std::size_t K, double alpha, double beta, std::uint64_t seed = 1) {
  sf::Hyperparams hp;
  hp.num_topics = K;
  hp.alpha = alpha;
  hp.beta = beta;
  hp.seed = seed;
  return hp;
}

std::vector<std::uint32_t> Flat(const sf::ModelState& s) { return {s.topics().begin(), s.topics().end()}; }

sf::Corpus Build(const std::vector<std::vector<std::pair<std::string, std::vector<std::string>>>>& docs,
                 const std::vector<std::pair<std::string, std::vector<std::string>>>& vocab = {}) {
  sf::CorpusBuilder b;
  for (const auto& [region, tokens] : vocab) b.DeclareVocabulary(region, tokens);
  for (std::size_t d = 0; d < docs.size(); ++d) b.AddDocument("d" + std::to_string(d), docs[d]);
  return std::move(b).Build();
}

sf::ModelState RandomState(std::mt19937_64& gen, const sf::Corpus& c, std::size_t K) {
  auto hp = Hp(K, 1.0, 1.0, gen());
  return sf::ModelState::Initialize(c, hp);
}

sf::Corpus TokenCorpus(std::size_t tokens_total, std::size_t vocab, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<std::vector<std::pair<std::string, std::vector<std::string>>>> docs;
  for (std::size_t i = 0; i < tokens_total; i += 10) {
    std::vector<std::string> bag;
    for (std::size_t j = 0; j < 10; ++j) bag.push_back("w" + std::to_string(gen() % vocab));
    docs.push_back({{"r", bag}});
  }
  return Build(docs);
}

}  // namespace

TEST(Initialize, SingleTopicForcesZero) {
  const auto c = TokenCorpus(50, 7, 1);
  const auto s = sf::ModelState::Initialize(c, Hp(1, 1, 1));
  for (auto z : s.topics()) EXPECT_EQ(z, 0u);
  for (std::size_t d = 0; d < s.num_documents(); ++d) EXPECT_EQ(s.doc_topic(d, 0), (std::int64_t)s.doc_length(d));
}

TEST(Initialize, SameSeedSameAssignments) {
  const auto c = TokenCorpus(200, 9, 2);
  EXPECT_EQ(sf::ModelState::Initialize(c, Hp(5, 1, 1, 3)), sf::ModelState::Initialize(c, Hp(5, 1, 1, 3)));
  EXPECT_NE(Flat(sf::ModelState::Initialize(c, Hp(5, 1, 1, 3))), Flat(sf::ModelState::Initialize(c, Hp(5, 1, 1, 4))));
}

TEST(Initialize, TopicSharesAreNearUniform) {
  // Binomial(1000, 0.1): P(share outside [0.05, 0.15]) is about 1e-7 per topic.
  const auto c = TokenCorpus(1000, 30, 3);
  int within = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto s = sf::ModelState::Initialize(c, Hp(10, 1, 1, seed));
    std::vector<double> share(10, 0.0);
    for (auto z : s.topics()) share[z] += 1.0 / 1000.0;
    within += std::all_of(share.begin(), share.end(), [](double v) { return v >= 0.05 && v <= 0.15; });
  }
  EXPECT_GE(within, 198);
}

TEST(Initialize, RejectsEmptyCorpusAndBadHyperparams) {
  sf::Corpus empty;
  EXPECT_THROW(sf::ModelState::Initialize(empty, Hp(2, 1, 1)), sf::Error);
  const auto c = TokenCorpus(10, 3, 1);
  EXPECT_THROW(sf::ModelState::Initialize(c, Hp(0, 1, 1)), sf::Error);
  EXPECT_THROW(sf::ModelState::Initialize(c, Hp(2, 0, 1)), sf::Error);
  EXPECT_THROW(sf::ModelState::Initialize(c, Hp(2, 1, -1)), sf::Error);
  auto hp = Hp(2, 1, 1);
  hp.burn_in = hp.sweeps;
  EXPECT_THROW(sf::ModelState::Initialize(c, hp), sf::Error);
  hp = Hp(2, 1, 1);
  hp.sample_lag = 0;
  EXPECT_THROW(sf::ModelState::Initialize(c, hp), sf::Error);
}

TEST(FullConditional, SingleTopicIsCertain) {
  const auto c = TokenCorpus(20, 4, 1);
  auto s = sf::ModelState::Initialize(c, Hp(1, 1, 1));
  s.Exclude(3);
  EXPECT_EQ(sf::FullConditional(s, Hp(1, 1, 1), 0, 0, s.token_word(3)), std::vector<double>{1.0});
}

TEST(FullConditional, EmptyCountsGiveUniform) {
  const auto c = Build({{{"r", {"a"}}}}, {{"r", {"a", "b", "c"}}});
  for (std::size_t K : {2u, 3u, 7u}) {
    auto s = sf::ModelState::Initialize(c, Hp(K, 0.3, 0.2));
    s.Exclude(0);
    for (std::uint32_t w = 0; w < 3; ++w) {
      for (double p : sf::FullConditional(s, Hp(K, 0.3, 0.2), 0, 0, w)) EXPECT_DOUBLE_EQ(p, 1.0 / K);
    }
  }
}

TEST(FullConditional, MatchesEnumeratedJointOnTwoTokens) {
  // M=1, two tokens, K=2, alpha=beta=1, V=2; first token on topic 0.
  const auto c = Build({{{"r", {"a", "b"}}}});
  for (std::uint32_t z1 : {0u, 1u}) {
    auto s = sf::ModelState::FromAssignments(c, 2, {{{0u, z1}}});
    s.Exclude(1);
    const auto p = sf::FullConditional(s, Hp(2, 1, 1), 0, 0, s.token_word(1));
    const auto oracle = sftest::BruteConditional(c, {0u, z1}, 1, 2, 1.0, 1.0);
    ASSERT_EQ(p.size(), 2u);
    EXPECT_NEAR(p[0], oracle[0], 1e-12);
    EXPECT_NEAR(p[1], oracle[1], 1e-12);
    // (1+1)(0+1)/(1+2) : (0+1)(0+1)/(0+2)  =>  [4/7, 3/7]
    EXPECT_NEAR(p[0], 4.0 / 7.0, 1e-12);
  }
}

TEST(FullConditional, MatchesOracleOnRandomStates) {
  std::mt19937_64 gen(55);
  sftest::CorpusShape shape{2, 3, 3, 2};
  for (int trial = 0; trial < 60; ++trial) {
    const auto c = sftest::RandomCorpus(gen, shape);
    const std::size_t K = 1 + gen() % 3;
    const double alpha = 0.1 + (gen() % 100) / 40.0;
    const double beta = 0.05 + (gen() % 100) / 50.0;
    const auto hp = Hp(K, alpha, beta);
    const auto base = RandomState(gen, c, K);
    const auto tokens = sftest::FlattenTokens(c);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      auto s = base;
      s.Exclude(i);
      const auto p = sf::FullConditional(s, hp, tokens[i].doc, tokens[i].region, tokens[i].word);
      const auto oracle = sftest::BruteConditional(c, Flat(base), i, K, alpha, beta);
      double total = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        EXPECT_NEAR(p[k], oracle[k], 1e-10);
        EXPECT_GT(p[k], 0.0);
        total += p[k];
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(FullConditional, PermutingTopicsPermutesOutput) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 40; ++trial) {
    const auto c = sftest::RandomCorpus(gen);
    const std::size_t K = 2 + gen() % 5;
    const auto hp = Hp(K, 0.7, 0.3);
    const auto s = RandomState(gen, c, K);
    const auto perm = sftest::RandomPermutation(gen, K);
    const auto t = s.Permuted(perm);
    const std::size_t i = gen() % s.num_tokens();
    std::size_t d = 0;
    while (s.doc_end(d) <= i) ++d;
    auto se = s;
    auto te = t;
    se.Exclude(i);
    te.Exclude(i);
    const auto p = sf::FullConditional(se, hp, d, s.token_region(i), s.token_word(i));
    const auto q = sf::FullConditional(te, hp, d, s.token_region(i), s.token_word(i));
    for (std::size_t k = 0; k < K; ++k) EXPECT_NEAR(q[perm[k]], p[k], 1e-14);
  }
}

TEST(GibbsSweep, SingleTopicOnlyAdvancesRng) {
  const auto c = TokenCorpus(30, 5, 4);
  const auto hp = Hp(1, 1, 1);
  auto s = sf::ModelState::Initialize(c, hp);
  const auto before = s;
  sf::GibbsSweep(s, hp);
  EXPECT_EQ(Flat(s), Flat(before));
  EXPECT_EQ(s.Assignments(), before.Assignments());
  EXPECT_FALSE(s.rng() == before.rng());
}

TEST(GibbsSweep, CountInvariantsHoldAfterEverySweep) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = sftest::RandomCorpus(gen);
    const std::size_t K = 1 + gen() % 6;
    const auto hp = Hp(K, 0.05 + (gen() % 100) / 20.0, 0.01 + (gen() % 100) / 50.0, gen());
    auto s = sf::ModelState::Initialize(c, hp);
    ASSERT_TRUE(s.CheckInvariants().empty());
    for (int sweep = 0; sweep < 5; ++sweep) {
      sf::GibbsSweep(s, hp);
      const auto problems = s.CheckInvariants();
      ASSERT_TRUE(problems.empty()) << "trial " << trial << ": " << problems.front();
    }
  }
}

TEST(GibbsSweep, CheckInvariantsDetectsCorruption) {
  const auto c = TokenCorpus(20, 4, 1);
  auto s = sf::ModelState::Initialize(c, Hp(3, 1, 1));
  s.Exclude(0);
  EXPECT_FALSE(s.CheckInvariants().empty());
  s.Include(0, 2);
  EXPECT_TRUE(s.CheckInvariants().empty());
}

TEST(GibbsSweep, RestoredStateReproducesSweep) {
  const auto synth = [] {
    sf::SynthSpec spec;
    spec.num_docs = 30;
    return sf::GenerateSynthetic(spec);
  }();
  const auto hp = Hp(5, 2.0, 0.1, 9);
  auto s = sf::ModelState::Initialize(synth.corpus, hp);
  for (int i = 0; i < 3; ++i) sf::GibbsSweep(s, hp);
  auto restored = sf::ModelState::Deserialize(synth.corpus, s.Serialize());
  EXPECT_EQ(restored, s);
  sf::GibbsSweep(s, hp);
  sf::GibbsSweep(restored, hp);
  EXPECT_EQ(restored, s);
}

TEST(GibbsSweep, DeserializeRejectsForeignState) {
  const auto c = TokenCorpus(20, 4, 1);
  const auto other = TokenCorpus(30, 4, 1);
  const auto s = sf::ModelState::Initialize(c, Hp(3, 1, 1));
  EXPECT_THROW(sf::ModelState::Deserialize(other, s.Serialize()), sf::Error);
  EXPECT_THROW(sf::ModelState::Deserialize(c, "{not json"), sf::Error);
}

TEST(LogLikelihood, SingleTokenClosedForm) {
  // log[beta / (V beta)] + log[alpha / (K alpha)] with alpha=beta=1, V=2, K=1.
  const auto c = Build({{{"r", {"a"}}}}, {{"r", {"a", "b"}}});
  const auto s = sf::ModelState::Initialize(c, Hp(1, 1, 1));
  EXPECT_NEAR(sf::LogLikelihood(s, Hp(1, 1, 1)), std::log(0.5) + std::log(1.0), 1e-12);
}

TEST(LogLikelihood, MatchesChainRuleOracle) {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = sftest::RandomCorpus(gen);
    const std::size_t K = 1 + gen() % 4;
    const double alpha = 0.05 + (gen() % 100) / 25.0;
    const double beta = 0.01 + (gen() % 100) / 40.0;
    const auto s = RandomState(gen, c, K);
    const double oracle = sftest::ChainRuleLogJoint(c, Flat(s), K, alpha, beta);
    EXPECT_NEAR(sf::LogLikelihood(s, Hp(K, alpha, beta)), oracle, 1e-9 * std::max(1.0, std::abs(oracle)));
  }
}

TEST(LogLikelihood, DuplicatedCorpusIsLessLikely) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto c = sftest::RandomCorpus(gen);
    const std::size_t K = 1 + gen() % 4;
    const auto hp = Hp(K, 0.5, 0.5);
    const auto s = RandomState(gen, c, K);
    auto doubled = c;
    for (const auto& doc : c.documents) {
      auto copy = doc;
      copy.id += "_copy";
      doubled.documents.push_back(copy);
    }
    auto z = s.Assignments();
    const auto z_copy = z;
    z.insert(z.end(), z_copy.begin(), z_copy.end());
    const auto t = sf::ModelState::FromAssignments(doubled, K, z);
    // p(x, x) = p(x) p(x | x): equal only when the single copy is certain.
    const double single = sf::LogLikelihood(s, hp);
    if (single < -1e-12) {
      EXPECT_LT(sf::LogLikelihood(t, hp), single);
    } else {
      EXPECT_NEAR(sf::LogLikelihood(t, hp), 0.0, 1e-12);
    }
  }
}

TEST(LogLikelihood, InvariantUnderTopicPermutation) {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 30; ++trial) {
    const auto c = sftest::RandomCorpus(gen);
    const std::size_t K = 2 + gen() % 4;
    const auto hp = Hp(K, 0.8, 0.2);
    const auto s = RandomState(gen, c, K);
    const auto t = s.Permuted(sftest::RandomPermutation(gen, K));
    EXPECT_NEAR(sf::LogLikelihood(t, hp), sf::LogLikelihood(s, hp), 1e-9);
  }
}

TEST(Train, SingleTokenCorpusConcentratesPhi) {
  std::vector<std::vector<std::pair<std::string, std::vector<std::string>>>> docs(
      20, {{"r", {"hat", "hat", "hat", "hat", "hat"}}});
  const auto c = Build(docs, {{"r", {"hat", "scarf", "belt"}}});
  auto hp = sf::Hyperparams::Defaults(2);
  hp.sweeps = 60;
  hp.burn_in = 20;
  hp.seed = 3;
  const auto model = sf::Train(c, hp);
  // Per sample: phi = (n + beta) / (n + V beta) with n >= 20 tokens per
  // topic under alpha = 25 spread over 100 tokens.
  const double floor = (20.0 + hp.beta) / (20.0 + 3 * hp.beta);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_GE(model.phi[0](k, 0), floor);

  // Closed form from a single state.
  const auto s = sf::ModelState::Initialize(c, hp);
  const auto phi = sf::EstimatePhi(s, hp);
  for (std::size_t k = 0; k < 2; ++k) {
    const double n = static_cast<double>(s.topic_total(0, k));
    EXPECT_DOUBLE_EQ(phi[0](k, 0), (n + hp.beta) / (n + 3 * hp.beta));
  }
}

TEST(Train, DeterministicUnderSeed) {
  sf::SynthSpec spec;
  spec.num_docs = 60;
  const auto synth = sf::GenerateSynthetic(spec);
  auto hp = sf::Hyperparams::Defaults(5);
  hp.sweeps = 40;
  hp.burn_in = 10;
  hp.seed = 21;
  const auto a = sf::Train(synth.corpus, hp);
  EXPECT_EQ(a, sf::Train(synth.corpus, hp));
  hp.seed = 22;
  EXPECT_NE(a.phi, sf::Train(synth.corpus, hp).phi);
}

TEST(Train, OutputsLieOnTheSimplex) {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = sftest::RandomCorpus(gen);
    auto hp = Hp(1 + gen() % 5, 0.5, 0.1, gen());
    hp.sweeps = 30;
    hp.burn_in = 10;
    hp.sample_lag = 3;
    const auto m = sf::Train(c, hp);
    auto check = [](const sf::Matrix& x) {
      for (std::size_t r = 0; r < x.rows(); ++r) {
        double total = 0.0;
        for (double v : x.row(r)) {
          EXPECT_GE(v, 0.0);
          total += v;
        }
        EXPECT_NEAR(total, 1.0, 1e-9);
      }
    };
    check(m.theta_train);
    for (const auto& p : m.phi) check(p);
    EXPECT_EQ(m.provenance.num_samples, (hp.sweeps - hp.burn_in) / hp.sample_lag);
  }
}

TEST(Train, MonoIsTheSingleRegionCase) {
  sf::SynthSpec spec;
  spec.num_docs = 40;
  const auto synth = sf::GenerateSynthetic(spec);
  const auto flat = sf::FlattenToMono(synth.corpus, true);
  // The same documents assembled directly as a one-region corpus.
  sf::CorpusBuilder b;
  b.AddRegion("global");
  for (const auto& doc : synth.corpus.documents) {
    std::vector<std::string> bag;
    for (std::size_t r = 0; r < doc.tokens_by_region.size(); ++r) {
      for (auto w : doc.tokens_by_region[r]) {
        bag.push_back(synth.corpus.regions[r] + "/" + synth.corpus.vocabularies[r].token(w));
      }
    }
    b.AddDocument(doc.id, {{"global", bag}});
  }
  const auto direct = std::move(b).Build();
  auto hp = sf::Hyperparams::Defaults(5);
  hp.sweeps = 30;
  hp.burn_in = 10;
  const auto a = sf::Train(flat, hp);
  const auto d = sf::Train(direct, hp);
  EXPECT_EQ(a.phi, d.phi);
  EXPECT_EQ(a.theta_train, d.theta_train);
}

TEST(Train, LabelsDoNotInfluenceTraining) {
  sf::SynthSpec spec;
  spec.num_docs = 30;
  const auto synth = sf::GenerateSynthetic(spec);
  auto hp = sf::Hyperparams::Defaults(5);
  hp.sweeps = 20;
  hp.burn_in = 5;
  EXPECT_EQ(sf::Train(synth.corpus, hp), sf::Train(sf::StripLabels(synth.corpus), hp));
}

TEST(Train, ReportsProgress) {
  const auto c = TokenCorpus(40, 5, 1);
  auto hp = Hp(2, 1, 1);
  hp.sweeps = 25;
  hp.burn_in = 5;
  sf::TrainOptions opts;
  opts.progress_every = 10;
  std::vector<std::size_t> seen;
  opts.on_progress = [&](std::size_t sweep, double ll) {
    seen.push_back(sweep);
    EXPECT_TRUE(std::isfinite(ll));
  };
  sf::Train(c, hp, opts);
  EXPECT_EQ(seen, (std::vector<std::size_t>{10, 20, 25}));
}
