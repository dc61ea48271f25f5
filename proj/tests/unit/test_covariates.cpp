#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "rumor/covariates.hpp"
#include "rumor/error.hpp"

namespace rumor {
namespace {

std::vector<Stance> with_counts(std::size_t s, std::size_t d, std::size_t q, std::size_t c) {
  std::vector<Stance> out;
  out.insert(out.end(), s, Stance::kSupport);
  out.insert(out.end(), d, Stance::kDeny);
  out.insert(out.end(), q, Stance::kQuery);
  out.insert(out.end(), c, Stance::kComment);
  return out;
}

TEST(StanceDistribution, SmallCounts) {
  const StanceDistribution v = stance_distribution(with_counts(2, 1, 1, 4));
  EXPECT_EQ(v, (StanceDistribution{0.25, 0.125, 0.125, 0.5}));
}

TEST(StanceDistribution, AllComments) {
  EXPECT_EQ(stance_distribution(with_counts(0, 0, 0, 7)), (StanceDistribution{0, 0, 0, 1}));
}

TEST(StanceDistribution, RumEvalTestCounts) {
  const StanceDistribution v = stance_distribution(with_counts(94, 71, 106, 778));
  EXPECT_NEAR(v[0], 0.0896, 1e-4);
  EXPECT_NEAR(v[1], 0.0677, 1e-4);
  EXPECT_NEAR(v[2], 0.1011, 1e-4);
  EXPECT_NEAR(v[3], 0.7417, 1e-4);
}

TEST(StanceDistribution, EmptyIsZero) { EXPECT_EQ(stance_distribution({}), (StanceDistribution{0, 0, 0, 0})); }

TEST(StanceDistribution, SumsToOneAndMatchesOracle) {
  nn::Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Stance> stances(1 + rng.below(200));
    for (Stance& s : stances) s = stance_from_index(rng.below(kNumStances));
    const StanceDistribution v = stance_distribution(stances);
    const auto oracle = testing::oracle_stance_distribution(stances);
    double sum = 0.0;
    for (std::size_t k = 0; k < kNumStances; ++k) {
      EXPECT_GE(v[k], 0.0);
      EXPECT_NEAR(v[k], oracle[k], 1e-12);
      sum += v[k];
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(DepthOneHot, Examples) {
  EXPECT_EQ(depth_one_hot(3, 6), (Vector{0, 0, 0, 1, 0, 0}));
  EXPECT_EQ(depth_one_hot(10, 6), (Vector{0, 0, 0, 0, 0, 1}));
  EXPECT_EQ(depth_one_hot(0, 1), (Vector{1}));
  EXPECT_THROW(depth_one_hot(0, 0), ConfigError);
}

TEST(DepthOneHot, ClippingIdempotence) {
  for (std::size_t levels = 1; levels <= 30; ++levels) {
    for (std::size_t h = 0; h < 60; ++h) {
      const Vector v = depth_one_hot(h, levels);
      EXPECT_EQ(v, depth_one_hot(std::min(h, levels - 1), levels));
      EXPECT_EQ(std::accumulate(v.begin(), v.end(), 0.0), 1.0);
    }
  }
}

TEST(AverageDepthByStance, Singleton) {
  const std::vector<DepthStance> replies = {{2, Stance::kSupport}};
  const StanceSlots d = average_depth_by_stance(replies, 4);
  EXPECT_EQ(d[0], (Vector{0, 0, 1, 0}));
  for (std::size_t s = 1; s < kNumStances; ++s) EXPECT_EQ(d[s], Vector(4, 0.0));
}

TEST(AverageDepthByStance, TwoComments) {
  const std::vector<DepthStance> replies = {{1, Stance::kComment}, {3, Stance::kComment}};
  EXPECT_EQ(average_depth_by_stance(replies, 4)[3], (Vector{0, 0.5, 0, 0.5}));
}

TEST(AverageDepthByStance, MatchesOracle) {
  nn::Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t levels = 1 + rng.below(10);
    std::vector<DepthStance> replies;
    std::vector<std::size_t> depths;
    std::vector<Stance> stances;
    for (int i = 0; i < 40; ++i) {
      replies.push_back({1 + rng.below(15), stance_from_index(rng.below(kNumStances))});
      depths.push_back(replies.back().depth);
      stances.push_back(replies.back().stance);
    }
    const StanceSlots got = average_depth_by_stance(replies, levels);
    const auto expected = testing::oracle_depth_averages(depths, stances, levels);
    for (std::size_t s = 0; s < kNumStances; ++s) {
      double sum = 0.0;
      for (std::size_t l = 0; l < levels; ++l) {
        EXPECT_NEAR(got[s][l], expected[s][l], 1e-6);
        EXPECT_GE(got[s][l], 0.0);
        EXPECT_LE(got[s][l], 1.0);
        sum += got[s][l];
      }
      if (std::find(stances.begin(), stances.end(), stance_from_index(s)) != stances.end()) {
        EXPECT_NEAR(sum, 1.0, 1e-12);
      } else {
        EXPECT_EQ(sum, 0.0);
      }
    }
  }
}

TEST(CovariateVector, ConcatenationOrder) {
  StanceSlots d;
  for (std::size_t s = 0; s < kNumStances; ++s) d[s] = {10.0 * (s + 1), 10.0 * (s + 1) + 1};
  const Vector v = covariate_vector({0.1, 0.2, 0.3, 0.4}, d);
  EXPECT_EQ(v, (Vector{0.1, 0.2, 0.3, 0.4, 10, 11, 20, 21, 30, 31, 40, 41}));
}

TEST(AttentionMode, Parsing) {
  EXPECT_EQ(parse_attention_mode("single"), AttentionMode::kSingle);
  EXPECT_EQ(parse_attention_mode("tokens"), AttentionMode::kTokens);
  EXPECT_THROW(parse_attention_mode("both"), ConfigError);
  EXPECT_EQ(attention_mode_name(AttentionMode::kTokens), "tokens");
}

void randomize(nn::ParameterSet& params, nn::Rng& rng, double scale = 0.5) {
  for (nn::Parameter& p : params) {
    for (double& v : p.value) v = rng.uniform(-scale, scale);
  }
}

Vector random_covariates(nn::Rng& rng, std::size_t levels) {
  std::vector<DepthStance> replies;
  std::vector<Stance> stances;
  const std::size_t n = 1 + rng.below(20);
  for (std::size_t i = 0; i < n; ++i) {
    replies.push_back({1 + rng.below(8), stance_from_index(rng.below(kNumStances))});
    stances.push_back(replies.back().stance);
  }
  return covariate_vector(stance_distribution(stances), average_depth_by_stance(replies, levels));
}

TEST(AttendCovariates, HeadsMustDivideModelWidth) {
  nn::ParameterSet params;
  EXPECT_THROW(add_covariate_attention(params, AttentionMode::kTokens, 4, 10, 3), ConfigError);
  EXPECT_THROW(add_covariate_attention(params, AttentionMode::kSingle, 4, 8, 0), ConfigError);
}

TEST(AttendCovariates, WrongLengthIsAnError) {
  nn::ParameterSet params;
  const auto ids = add_covariate_attention(params, AttentionMode::kTokens, 4, 8, 2);
  EXPECT_THROW(attend_covariates(Vector(19, 0.0), params, ids), ShapeMismatchError);
}

TEST(AttendCovariates, SingleModeIdentityProjectionsPassValuesThrough) {
  // L = 1 gives s' of length 8; with d_model = 8 every projection can be the
  // identity, so the (only) head returns V = s' exactly.
  nn::ParameterSet params;
  const auto ids = add_covariate_attention(params, AttentionMode::kSingle, 1, 8, 1);
  for (nn::ParamId id : {ids.attention.query, ids.attention.key, ids.attention.value, ids.attention.out_weight}) {
    nn::Parameter& p = params[id];
    std::fill(p.value.begin(), p.value.end(), 0.0);
    for (std::size_t i = 0; i < 8; ++i) p.at(i, i) = 1.0;
  }
  nn::Rng rng(4);
  const Vector s = random_covariates(rng, 1);
  CovariateAttentionCache cache;
  attend_covariates(s, params, ids, &cache);
  ASSERT_EQ(cache.attention.weights.size(), 1u);
  EXPECT_EQ(cache.attention.weights[0](0, 0), 1.0);
  const auto head_out = cache.attention.concat.row(0);
  EXPECT_TRUE(std::equal(head_out.begin(), head_out.end(), s.begin()));
}

TEST(AttendCovariates, SingleModeIgnoresQueryAndKeyWeights) {
  nn::Rng rng(9);
  nn::ParameterSet params;
  const auto ids = add_covariate_attention(params, AttentionMode::kSingle, 6, 16, 4);
  randomize(params, rng);
  const Vector s = random_covariates(rng, 6);
  const Vector before = attend_covariates(s, params, ids);
  for (int trial = 0; trial < 20; ++trial) {
    for (nn::ParamId id : {ids.attention.query, ids.attention.key}) {
      for (double& v : params[id].value) v = rng.uniform(-10.0, 10.0);
    }
    EXPECT_EQ(attend_covariates(s, params, ids), before);
  }
}

TEST(AttendCovariates, TokensModeIdenticalTokensGiveUniformWeights) {
  // L = 4 makes all five token inputs 4 wide; with equal inputs and equal
  // projections the five tokens coincide.
  nn::Rng rng(12);
  nn::ParameterSet params;
  const auto ids = add_covariate_attention(params, AttentionMode::kTokens, 4, 8, 2);
  randomize(params, rng);
  for (std::size_t k = 1; k < 5; ++k) {
    params[ids.token_projections[k][0]].value = params[ids.token_projections[0][0]].value;
    params[ids.token_projections[k][1]].value = params[ids.token_projections[0][1]].value;
  }
  const Vector token = {0.25, 0.25, 0.0, 0.5};
  Vector s;
  for (int k = 0; k < 5; ++k) s.insert(s.end(), token.begin(), token.end());

  CovariateAttentionCache cache;
  const Vector out = attend_covariates(s, params, ids, &cache);
  for (const nn::Matrix& w : cache.attention.weights) {
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(w(i, j), 0.2, 1e-15);
    }
  }

  // The uniform average of five equal rows is that row: compare with the
  // same attention block applied to the lone token.
  nn::Matrix one(1, 8);
  nn::linear_forward(params[ids.token_projections[0][0]], params[ids.token_projections[0][1]], token, one.row(0));
  const nn::Matrix single = nn::multi_head_attention(params, ids.attention, one, nullptr);
  Vector normed(8);
  Vector expected(8);
  nn::layer_norm_forward(params[ids.norm_gain], params[ids.norm_bias], single.row(0), normed, nullptr);
  nn::relu_forward(normed, expected);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(out[i], expected[i], 1e-12);
}

TEST(AttendCovariates, TokensModeWeightsAreRowStochastic) {
  nn::Rng rng(13);
  nn::ParameterSet params;
  const auto ids = add_covariate_attention(params, AttentionMode::kTokens, 24, 32, 4);
  randomize(params, rng, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    CovariateAttentionCache cache;
    const Vector out = attend_covariates(random_covariates(rng, 24), params, ids, &cache);
    ASSERT_EQ(out.size(), 32u);
    for (double v : out) {
      EXPECT_TRUE(std::isfinite(v));
      EXPECT_GE(v, 0.0);
    }
    ASSERT_EQ(cache.attention.weights.size(), 4u);
    for (const nn::Matrix& w : cache.attention.weights) {
      for (std::size_t i = 0; i < 5; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < 5; ++j) {
          EXPECT_GT(w(i, j), 0.0);
          EXPECT_LT(w(i, j), 1.0);
          sum += w(i, j);
        }
        EXPECT_NEAR(sum, 1.0, 1e-9);
      }
    }
  }
}

TEST(AttendCovariates, ReplylessThreadStillProducesFiniteOutput) {
  nn::Rng rng(14);
  nn::ParameterSet params;
  const auto ids = add_covariate_attention(params, AttentionMode::kTokens, 24, 32, 4);
  randomize(params, rng);
  const Vector s = covariate_vector(stance_distribution({}), average_depth_by_stance({}, 24));
  EXPECT_EQ(s, Vector(100, 0.0));
  for (double v : attend_covariates(s, params, ids)) EXPECT_TRUE(std::isfinite(v));
}

}  // namespace
}  // namespace rumor
