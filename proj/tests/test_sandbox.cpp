// Copyright 2026 The specfilter Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "specfilter/errors.hpp"
#include "specfilter/sandbox.hpp"
#include "specfilter/svd.hpp"

namespace specfilter {
namespace {

SandboxConfig small_config(SandboxMode mode) {
  SandboxConfig cfg;
  cfg.steps = 10;
  cfg.schedule.total_steps = 10;
  cfg.layers = 2;
  cfg.points = 16;
  cfg.spec.dim = 12;
  cfg.spec.tokens = 6;
  cfg.spec.style_sigmas = {5.0};
  cfg.spec.content_sigmas = {0.8, 0.4};
  cfg.mode = mode;
  return cfg;
}

TEST(StyleEmbedding, SpectrumIsPlanted) {
  SyntheticStyleSpec spec{8, 6, {5.0}, {0.5}, 3};
  const auto e = make_style_embedding(spec);
  const auto sigma = svd(e.key).sigma;
  EXPECT_NEAR(sigma[0], 5.0, 1e-9);
  EXPECT_NEAR(sigma[1], 0.5, 1e-9);
  for (std::size_t i = 2; i < sigma.size(); ++i) EXPECT_LE(sigma[i], 1e-9);
  const auto vsigma = svd(e.value).sigma;
  EXPECT_NEAR(vsigma[1], 0.5, 1e-9);
}

TEST(StyleEmbedding, EmptyContentIsRankOne) {
  const auto e = make_style_embedding({8, 6, {5.0}, {}, 4});
  const auto sigma = svd(e.key).sigma;
  EXPECT_NEAR(sigma[0], 5.0, 1e-12);
  EXPECT_LE(sigma[1], 1e-12 * sigma[0]);
  EXPECT_EQ(e.content_basis.cols(), 0u);
}

TEST(StyleEmbedding, ContentEnergyIsParseval) {
  const auto e = make_style_embedding({16, 10, {6.0, 4.0}, {1.0, 0.5, 0.25}, 9});
  EXPECT_NEAR(basis_energy(e.key, e.content_basis), 1.0 + 0.25 + 0.0625, 1e-9);
  EXPECT_NEAR(basis_energy(e.value, e.value_content_basis), 1.0 + 0.25 + 0.0625, 1e-9);
  EXPECT_LE(testing::orthogonality_defect(e.content_basis), 1e-12);
}

TEST(StyleEmbedding, InvalidSpecs) {
  EXPECT_THROW(make_style_embedding({3, 6, {5.0}, {0.5, 0.4, 0.3}, 1}), ConfigError);
  EXPECT_THROW(make_style_embedding({8, 6, {0.5}, {0.5}, 1}), ConfigError);
  EXPECT_THROW(make_style_embedding({8, 6, {}, {0.5}, 1}), ConfigError);
}

TEST(Sampler, NoOpInvarianceAgainstBaseline) {
  auto full = small_config(SandboxMode::kFull);
  full.schedule.alpha0 = 0.0;
  full.filter.top_k = 6;
  const auto a = run_sampler(full);
  const auto b = run_sampler(small_config(SandboxMode::kBaseline));
  EXPECT_LE(max_abs_diff(a.samples, b.samples), 1e-10);
}

TEST(Sampler, ContentEnergyMatchesClosedForm) {
  auto cfg = small_config(SandboxMode::kFull);
  cfg.schedule.variant = ScheduleVariant::kFixed;
  cfg.schedule.alpha0 = 0.5;
  const auto r = run_sampler(cfg).report;
  double num = 0.0, den = 0.0;
  for (double s : cfg.spec.content_sigmas) {
    num += std::pow(std::exp(-0.5 * s) * s, 2);
    den += s * s;
  }
  EXPECT_NEAR(r.content_energy_after / r.content_energy_before, num / den, 1e-6);
  EXPECT_NEAR(r.content_energy_before, 2.0 * 2.0 * den, 1e-9);  // 2 layers x (K, V)
}

TEST(Sampler, UnitGuidanceIgnoresUnconditionalBranch) {
  auto cfg = small_config(SandboxMode::kFull);
  cfg.omega = 1.0;
  const auto clean = run_sampler(cfg);
  testing::Gen gen(77);
  const auto garbage = run_sampler(cfg, [&](int, GuidanceBranches& b) {
    for (auto& kv : b.uncond) {
      kv.key = gen.matrix(kv.key.rows(), kv.key.cols());
      kv.value = gen.matrix(kv.value.rows(), kv.value.cols());
    }
  });
  EXPECT_LE(max_abs_diff(clean.samples, garbage.samples), 1e-10);
}

TEST(Sampler, Deterministic) {
  const auto cfg = small_config(SandboxMode::kFull);
  const auto a = run_sampler(cfg);
  const auto b = run_sampler(cfg);
  EXPECT_TRUE(bit_identical(a.samples, b.samples));
  EXPECT_EQ(report_to_json(a.report), report_to_json(b.report));
  EXPECT_EQ(trace_to_csv(a.trace), trace_to_csv(b.trace));
}

TEST(Sampler, PerStepAlphaFollowsSchedule) {
  const auto cfg = small_config(SandboxMode::kFull);
  const auto r = run_sampler(cfg).report;
  ASSERT_EQ(r.per_step_alpha.size(), 10u);
  for (int t = 0; t < 10; ++t) EXPECT_EQ(r.per_step_alpha[t], alpha_at(cfg.schedule, t));
}

TEST(Sampler, AblationModesDifferOnlyWhereExpected) {
  std::vector<GuidanceBranches> full, cs_only, ss_only, base;
  auto capture = [](std::vector<GuidanceBranches>& sink) {
    return [&sink](int, GuidanceBranches& b) { sink.push_back(b); };
  };
  run_sampler(small_config(SandboxMode::kFull), capture(full));
  run_sampler(small_config(SandboxMode::kCsSvdOnly), capture(cs_only));
  run_sampler(small_config(SandboxMode::kSsCfgOnly), capture(ss_only));
  run_sampler(small_config(SandboxMode::kBaseline), capture(base));
  // The latent trajectories differ between modes, but the branch tensors at
  // every step depend only on the embeddings and alpha_t.
  for (std::size_t t = 0; t < full.size(); ++t) {
    for (std::size_t l = 0; l < full[t].cond.size(); ++l) {
      EXPECT_TRUE(bit_identical(full[t].cond[l].key, cs_only[t].cond[l].key));
      EXPECT_FALSE(bit_identical(full[t].uncond[l].key, cs_only[t].uncond[l].key));
      EXPECT_TRUE(bit_identical(ss_only[t].cond[l].key, base[t].cond[l].key));
      EXPECT_FALSE(bit_identical(ss_only[t].uncond[l].key, base[t].uncond[l].key));
      EXPECT_TRUE(bit_identical(ss_only[t].uncond[l].value, full[t].uncond[l].value));
    }
  }
}

TEST(Sampler, PositiveAlphaReducesContentEnergy) {
  for (double a0 : {0.01, 0.1, 1.0}) {
    auto cfg = small_config(SandboxMode::kFull);
    cfg.schedule.alpha0 = a0;
    const auto r = run_sampler(cfg).report;
    EXPECT_LT(r.content_energy_after, r.content_energy_before);
  }
}

TEST(Sampler, JointInjectionRuns) {
  auto cfg = small_config(SandboxMode::kFull);
  cfg.injection = Injection::kJoint;
  const auto r = run_sampler(cfg);
  EXPECT_EQ(r.samples.rows(), 16u);
  EXPECT_TRUE(std::isfinite(r.report.sample_content_correlation));
}

TEST(Sampler, DivergenceNamesStep) {
  auto cfg = small_config(SandboxMode::kFull);
  cfg.omega = 1e308;
  cfg.style_weight = 1e308;
  try {
    run_sampler(cfg);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.step(), 0);
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

TEST(SandboxConfigJson, RoundTripAndValidation) {
  auto cfg = small_config(SandboxMode::kSsCfgOnly);
  cfg.schedule.variant = ScheduleVariant::kLinear;
  const std::string text = sandbox_config_to_json(cfg);
  const SandboxConfig back = sandbox_config_from_json(text);
  EXPECT_EQ(sandbox_config_to_json(back), text);
  EXPECT_EQ(back.mode, SandboxMode::kSsCfgOnly);

  EXPECT_THROW(sandbox_config_from_json(R"({"steps": 10, "bogus": 1})"), ConfigError);
  EXPECT_THROW(sandbox_config_from_json(R"({"steps": 10, "schedule": {"total_steps": 12}})"), ConfigError);
  EXPECT_THROW(sandbox_config_from_json(R"({"mode": "turbo"})"), ConfigError);
  EXPECT_THROW(sandbox_config_from_json(R"({"spec": {"dim": "big"}})"), ConfigError);
  const SandboxConfig defaults = sandbox_config_from_json("{}");
  EXPECT_EQ(defaults.steps, 30);
  EXPECT_EQ(defaults.omega, 5.0);
  EXPECT_EQ(defaults.filter.top_k, 1u);
  EXPECT_EQ(defaults.schedule.alpha0, 0.01);
}

TEST(SandboxReport, TraceCsvHeader) {
  const auto r = run_sampler(small_config(SandboxMode::kFull));
  const std::string csv = trace_to_csv(r.trace);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,layer,role,index,sigma,sigma_filtered,alpha_t");
  // steps x layers x (K + V) x min(d, N)
  EXPECT_EQ(r.trace.size(), 10u * 2u * 2u * 6u);
}

}  // namespace
}  // namespace specfilter
