#include <gtest/gtest.h>

#include <memory>

#include "json.hpp"
#include "stylefactor/api.hpp"
#include "stylefactor/synth.hpp"

namespace sf = stylefactor;
using nlohmann::json;

namespace {

class ApiTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    sf::SynthSpec spec;
    spec.k_true = 3;
    spec.num_docs = 60;
    spec.vocab_sizes = {15, 15, 15};
    spec.seed = 21;
    auto synth = sf::GenerateSynthetic(spec);
    auto hp = sf::Hyperparams::Defaults(3);
    hp.sweeps = 60;
    hp.burn_in = 30;
    hp.sample_lag = 5;
    auto model = sf::Train(synth.corpus, hp);
    sf::FoldInParams fold;
    fold.sweeps = 30;
    fold.burn_in = 10;
    auto collection = sf::EmbedCorpus(model, synth.corpus, fold, 1).collection;
    service_ = std::make_unique<sf::StyleService>(std::move(model), std::move(collection), std::move(synth.corpus));
  }
  static void TearDownTestSuite() { service_.reset(); }

  static const sf::StyleService& svc() { return *service_; }

  static sf::ErrorKind KindOf(const std::function<void()>& f) {
    try {
      f();
    } catch (const sf::Error& e) {
      return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return sf::ErrorKind::kIo;
  }

 private:
  static std::unique_ptr<sf::StyleService> service_;
};

std::unique_ptr<sf::StyleService> ApiTest::service_;

}  // namespace

TEST_F(ApiTest, EveryPayloadEndsWithNewline) {
  for (const auto& p : {svc().Health(), svc().Styles(), svc().Document("doc00"), svc().Summary({}),
                        svc().Mix({{0}, 3}), svc().Traverse({}), svc().Retrieve({"doc01", std::nullopt, 3, "tv"})}) {
    ASSERT_FALSE(p.empty());
    EXPECT_EQ(p.back(), '\n');
    EXPECT_EQ(p.find('\n'), p.size() - 1);
    EXPECT_TRUE(json::accept(p));
  }
}

TEST_F(ApiTest, HealthReportsModel) {
  const auto j = json::parse(svc().Health());
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["K"], 3);
  EXPECT_EQ(j["documents"], 60);
  EXPECT_EQ(j["model_digest"], sf::ModelDigest(svc().model()));
}

TEST_F(ApiTest, StylesListTopTokensPerRegion) {
  const auto j = json::parse(svc().Styles());
  ASSERT_EQ(j.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(j[k]["topic"], k);
    ASSERT_EQ(j[k]["regions"].size(), 3u);
    for (const auto& [region, tokens] : j[k]["regions"].items()) {
      EXPECT_EQ(tokens.size(), 10u) << region;
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        EXPECT_GE(tokens[i - 1]["weight"].get<double>(), tokens[i]["weight"].get<double>());
      }
    }
  }
  const auto few = json::parse(svc().Styles(2));
  EXPECT_EQ(few[0]["regions"]["upper"].size(), 2u);
  EXPECT_EQ(json::parse(svc().Styles(100))[0]["regions"]["upper"].size(), 15u);
}

TEST_F(ApiTest, DocumentPayload) {
  const auto j = json::parse(svc().Document("doc05"));
  EXPECT_EQ(j["id"], "doc05");
  EXPECT_EQ(j["theta"].size(), 3u);
  EXPECT_TRUE(j["tokens"].contains("outer"));
  EXPECT_FALSE(j.contains("image_url"));
  EXPECT_EQ(KindOf([] { (void)svc().Document("nope"); }), sf::ErrorKind::kNotFound);
}

TEST_F(ApiTest, RetrieveByIdAndTheta) {
  const auto by_id = json::parse(svc().Retrieve({"doc00", std::nullopt, 5, "hellinger"}));
  ASSERT_EQ(by_id.size(), 5u);
  for (const auto& e : by_id) EXPECT_NE(e["id"], "doc00");
  const auto theta = svc().collection().Find("doc00")->theta;
  const auto by_theta = json::parse(svc().Retrieve({std::nullopt, theta, 1, "hellinger"}));
  EXPECT_EQ(by_theta[0]["id"], "doc00");
  EXPECT_NEAR(by_theta[0]["score"].get<double>(), 0.0, 1e-7);

  EXPECT_EQ(KindOf([] { (void)svc().Retrieve({}); }), sf::ErrorKind::kInvalidArgument);
  EXPECT_EQ(KindOf([&] { (void)svc().Retrieve({"doc00", theta, 5, "hellinger"}); }), sf::ErrorKind::kInvalidArgument);
  EXPECT_EQ(KindOf([] { (void)svc().Retrieve({"zzz", std::nullopt, 5, "hellinger"}); }), sf::ErrorKind::kNotFound);
  EXPECT_EQ(KindOf([] { (void)svc().Retrieve({"doc00", std::nullopt, 5, "cosine"}); }),
            sf::ErrorKind::kInvalidArgument);
}

TEST_F(ApiTest, MixValidatesIndices) {
  const auto j = json::parse(svc().Mix({{0, 2}, 4}));
  EXPECT_EQ(j.size(), 4u);
  EXPECT_EQ(KindOf([] { (void)svc().Mix({{3}, 4}); }), sf::ErrorKind::kOutOfRange);
  EXPECT_EQ(KindOf([] { (void)svc().Mix({{-1}, 4}); }), sf::ErrorKind::kOutOfRange);
  EXPECT_EQ(KindOf([] { (void)svc().Mix({{}, 4}); }), sf::ErrorKind::kInvalidArgument);
}

TEST_F(ApiTest, TraverseShape) {
  sf::TraverseRequest r;
  r.from = 0;
  r.to = 2;
  r.steps = 4;
  r.n = 3;
  const auto j = json::parse(svc().Traverse(r));
  ASSERT_EQ(j.size(), 4u);
  for (const auto& step : j) EXPECT_EQ(step.size(), 3u);
  r.to = 0;
  EXPECT_EQ(KindOf([&] { (void)svc().Traverse(r); }), sf::ErrorKind::kInvalidArgument);
  r.to = 7;
  EXPECT_EQ(KindOf([&] { (void)svc().Traverse(r); }), sf::ErrorKind::kOutOfRange);
}

TEST_F(ApiTest, SummaryInfluenceSumsToCollectionSize) {
  const auto j = json::parse(svc().Summary({2, 3}));
  EXPECT_EQ(j["documents"], 60);
  double total = 0.0;
  for (double v : j["influence"]) total += v;
  EXPECT_NEAR(total, 60.0, 1e-6);
  EXPECT_EQ(j["top_styles"].size(), 2u);
  EXPECT_EQ(j["exemplars"].size(), 2u);
  EXPECT_EQ(j["exemplars"][0].size(), 3u);
  EXPECT_EQ(j["insignificant"]["styles"].size(), 1u);
  const std::size_t rest = j["insignificant"]["styles"][0];
  EXPECT_NEAR(j["insignificant"]["influence"].get<double>(), j["influence"][rest].get<double>(), 1e-12);
}

TEST_F(ApiTest, RejectsEmbeddingsFromAnotherModel) {
  auto model = svc().model();
  model.hyperparams.seed += 1;
  try {
    sf::StyleService other(model, svc().collection(), svc().corpus());
    FAIL();
  } catch (const sf::Error& e) {
    EXPECT_EQ(e.kind(), sf::ErrorKind::kDigestMismatch);
  }
}

TEST(ApiParse, RequestBodies) {
  const auto r = sf::ParseRetrieveRequest(R"({"query_id":"a","n":3,"metric":"tv"})");
  EXPECT_EQ(*r.query_id, "a");
  EXPECT_EQ(r.n, 3u);
  EXPECT_EQ(r.metric, "tv");
  EXPECT_FALSE(r.theta.has_value());
  EXPECT_EQ(sf::ParseRetrieveRequest(R"({"theta":[0.5,0.5]})").theta->size(), 2u);

  const auto m = sf::ParseMixRequest(R"({"styles":[1,4]})");
  EXPECT_EQ(m.styles, (std::vector<long long>{1, 4}));
  EXPECT_EQ(m.n, 10u);

  const auto t = sf::ParseTraverseRequest(R"({"from":2,"to":0,"steps":3,"distinct":true})");
  EXPECT_EQ(t.from, 2);
  EXPECT_EQ(t.to, 0);
  EXPECT_EQ(t.steps, 3u);
  EXPECT_TRUE(t.distinct);

  for (const char* bad : {"not json", "[1,2]", R"({"n":-1,"query_id":"a"})", R"({"n":"3"})"}) {
    EXPECT_THROW(sf::ParseRetrieveRequest(bad), sf::Error) << bad;
  }
  EXPECT_THROW(sf::ParseMixRequest("{}"), sf::Error);
  EXPECT_THROW(sf::ParseMixRequest(R"({"styles":"1"})"), sf::Error);
  EXPECT_THROW(sf::ParseTraverseRequest(R"({"from":1})"), sf::Error);
}

TEST(ApiErrors, StatusMappingAndPayload) {
  EXPECT_EQ(sf::HttpStatusFor(sf::ErrorKind::kInvalidArgument), 400);
  EXPECT_EQ(sf::HttpStatusFor(sf::ErrorKind::kParse), 400);
  EXPECT_EQ(sf::HttpStatusFor(sf::ErrorKind::kNotFound), 404);
  EXPECT_EQ(sf::HttpStatusFor(sf::ErrorKind::kOutOfRange), 422);
  EXPECT_EQ(sf::HttpStatusFor(sf::ErrorKind::kIo), 500);
  const auto p = sf::ErrorPayload(sf::Error(sf::ErrorKind::kNotFound, "gone"));
  EXPECT_EQ(p.back(), '\n');
  const auto j = json::parse(p);
  EXPECT_NE(j["error"].get<std::string>().find("gone"), std::string::npos);
  EXPECT_FALSE(j["kind"].get<std::string>().empty());
}
