//*****************************************************************************
// Copyright 2026 The ARM Forecasting Authors
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
//*****************************************************************************

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "arm/errors.hpp"
#include "arm/gradcheck.hpp"
#include "arm/moe.hpp"
#include "arm/module.hpp"
#include "arm/ops.hpp"
#include "arm/optimizer.hpp"
#include "arm/rng.hpp"

namespace arm {
namespace {

Tensor random_block(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t = Tensor::matrix(rows, cols);
  for (double& v : t.values()) v = rng.normal();
  return t;
}

void randomize_experts(ParameterStore& store, const Moe& moe, std::uint64_t seed) {
  Rng rng(seed);
  for (const Moe::Expert& e : moe.experts())
    for (ParamId id : {e.w1, e.b1, e.w2, e.b2})
      for (double& v : store.value(id).values()) v = rng.normal(0.0, 0.5);
}

MoeConfig eval_config(std::size_t experts) {
  MoeConfig c;
  c.experts = experts;
  return c;
}

TEST(Route, ZeroRouterPicksFirstExpertWithHalfGate) {
  ParameterStore store;
  Rng init(1);
  Moe moe(store, "m", 4, 2, eval_config(2), init);
  store.value(moe.router_weight()).fill(0.0);
  const std::vector<double> z{0.3, -1.0, 2.0, 0.5};
  const Route r = moe.route(store, z);
  EXPECT_EQ(r.expert, 0u);
  EXPECT_DOUBLE_EQ(r.gate, 0.5);
}

TEST(Route, DominantLogitSelectsThatExpert) {
  ParameterStore store;
  Rng init(1);
  Moe moe(store, "m", 3, 2, eval_config(2), init);
  store.value(moe.router_weight()).fill(0.0);
  store.value(moe.router_bias()) = Tensor::from_rows({{0.0, 50.0}});
  const Route r = moe.route(store, std::vector<double>{1.0, 2.0, 3.0});
  EXPECT_EQ(r.expert, 1u);
  EXPECT_NEAR(r.gate, 1.0, 1e-12);
}

TEST(Route, WrongInputWidthIsRejected) {
  ParameterStore store;
  Rng init(1);
  Moe moe(store, "m", 3, 2, eval_config(2), init);
  EXPECT_THROW(moe.route(store, std::vector<double>{1.0}), ShapeError);
}

TEST(Forward, AgreesWithRouteAndGate) {
  ParameterStore store;
  Rng init(2);
  Moe moe(store, "m", 5, 3, eval_config(3), init);
  randomize_experts(store, moe, 9);
  Rng rr(4);
  for (double& v : store.value(moe.router_weight()).values()) v = rr.normal();
  const Tensor z = random_block(6, 5, 3);
  Graph g(&store);
  Var out = moe.forward(g, g.constant(z), g.constant(Tensor::matrix(6, 3)), ForwardContext{});
  for (std::size_t r = 0; r < 6; ++r) {
    const Route route = moe.route(store, std::span<const double>(z.raw() + r * 5, 5));
    // evaluate the chosen expert by hand
    const Moe::Expert& e = moe.experts()[route.expert];
    const Tensor& w1 = store.value(e.w1);
    const Tensor& b1 = store.value(e.b1);
    const Tensor& w2 = store.value(e.w2);
    const Tensor& b2 = store.value(e.b2);
    std::vector<double> h(w1.cols());
    for (std::size_t j = 0; j < h.size(); ++j) {
      double s = b1[j];
      for (std::size_t i = 0; i < 5; ++i) s += z(r, i) * w1(i, j);
      h[j] = 0.5 * s * (1.0 + std::erf(s / std::sqrt(2.0)));
    }
    for (std::size_t o = 0; o < 3; ++o) {
      double s = b2[o];
      for (std::size_t j = 0; j < h.size(); ++j) s += h[j] * w2(j, o);
      EXPECT_NEAR(out.value()(r, o), route.gate * s, 1e-10);
    }
  }
}

TEST(Forward, ZeroInitialisedExpertsReturnResidual) {
  ParameterStore store;
  Rng init(3);
  Moe moe(store, "m", 6, 4, eval_config(2), init);
  const Tensor res = random_block(5, 4, 8);
  Graph g(&store);
  Var out = moe.forward(g, g.constant(random_block(5, 6, 7)), g.constant(res), ForwardContext{});
  EXPECT_EQ(out.value(), res);
}

TEST(Forward, SingleExpertHasUnitGate) {
  ParameterStore store;
  Rng init(3);
  Moe moe(store, "m", 4, 2, eval_config(1), init);
  for (std::size_t r = 0; r < 5; ++r) {
    const Tensor z = random_block(1, 4, r);
    EXPECT_EQ(moe.route(store, z.values()).gate, 1.0);
  }
}

TEST(Forward, ResidualWidthMismatchIsRejected) {
  ParameterStore store;
  Rng init(3);
  Moe moe(store, "m", 4, 2, eval_config(2), init);
  Graph g(&store);
  EXPECT_THROW(moe.forward(g, g.constant(Tensor::matrix(3, 4)), g.constant(Tensor::matrix(3, 3)),
                           ForwardContext{}),
               ShapeError);
}

TEST(Gradients, GateAndExpertsMatchFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ParameterStore store;
    Rng init(seed);
    Moe moe(store, "m", 5, 3, eval_config(2), init);
    randomize_experts(store, moe, seed + 50);
    Rng rr(seed + 90);
    for (double& v : store.value(moe.router_weight()).values()) v = rr.normal();
    const Tensor z = random_block(4, 5, seed + 20);
    const Tensor w = random_block(4, 3, seed + 30);
    const GradCheckReport r = check_parameter_gradients(
        "moe", store, [&](Graph& g) {
          Var out = moe.forward(g, g.constant(z), g.constant(Tensor::matrix(4, 3)), ForwardContext{});
          return ops::sum(out * g.constant(w));
        });
    EXPECT_NE(r.status, GradCheckStatus::kFail) << r.summary();
  }
}

TEST(Gradients, OnlyTheSelectedExpertReceivesGradient) {
  ParameterStore store;
  Rng init(5);
  Moe moe(store, "m", 4, 2, eval_config(3), init);
  randomize_experts(store, moe, 6);
  Rng rr(7);
  for (double& v : store.value(moe.router_weight()).values()) v = rr.normal();
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Tensor z = random_block(1, 4, 100 + s);
    const std::size_t chosen = moe.route(store, z.values()).expert;
    Graph g(&store);
    Var out = moe.forward(g, g.constant(z), g.constant(Tensor::matrix(1, 2)), ForwardContext{});
    g.backward(ops::sum(out * out));
    Gradients grads(store);
    g.collect(grads);
    for (std::size_t e = 0; e < moe.expert_count(); ++e) {
      const Moe::Expert& ex = moe.experts()[e];
      double norm = 0.0;
      for (ParamId id : {ex.w1, ex.b1, ex.w2, ex.b2})
        for (double v : grads[id].values()) norm += v * v;
      if (e == chosen) {
        EXPECT_GT(norm, 0.0);
      } else {
        EXPECT_EQ(norm, 0.0);
      }
    }
  }
}

TEST(Forward, EvaluationIsDeterministicAndTrainingUsesDropout) {
  ParameterStore store;
  Rng init(5);
  Moe moe(store, "m", 6, 3, eval_config(2), init);
  randomize_experts(store, moe, 1);
  const Tensor z = random_block(4, 6, 2);
  auto run = [&](bool training, std::uint64_t seed) {
    Graph g(&store);
    Rng rng(seed);
    ForwardContext ctx{training, &rng, nullptr};
    return moe.forward(g, g.constant(z), g.constant(Tensor::matrix(4, 3)), ctx).value();
  };
  EXPECT_EQ(run(false, 1), run(false, 2));
  EXPECT_NE(run(true, 1), run(true, 2));
  EXPECT_EQ(run(true, 3), run(true, 3));
}

TEST(Forward, LoadBalanceTermIsAddedOnlyWhenEnabled) {
  MoeConfig cfg = eval_config(2);
  cfg.load_balance = 0.01;
  ParameterStore store;
  Rng init(5);
  Moe moe(store, "m", 3, 2, cfg, init);
  Graph g(&store);
  Rng rng(1);
  std::vector<Var> aux;
  ForwardContext ctx{true, &rng, &aux};
  moe.forward(g, g.constant(random_block(8, 3, 1)), g.constant(Tensor::matrix(8, 2)), ctx);
  ASSERT_EQ(aux.size(), 1u);
  EXPECT_GT(aux[0].value()[0], 0.0);

  ParameterStore plain_store;
  Rng init2(5);
  Moe plain(plain_store, "m", 3, 2, eval_config(2), init2);
  Graph g2(&plain_store);
  std::vector<Var> none;
  ForwardContext ctx2{true, &rng, &none};
  plain.forward(g2, g2.constant(random_block(8, 3, 1)), g2.constant(Tensor::matrix(8, 2)), ctx2);
  EXPECT_TRUE(none.empty());
}

// Two families of short series: oscillations around zero and rising ramps
// at a positive level. Each needs a different one-step linear predictor.
struct ToySet {
  Tensor z;
  Tensor target;
  std::vector<int> family;
};

ToySet two_family_set(std::uint64_t seed, std::size_t per_family) {
  Rng rng(seed);
  const std::size_t li = 3;
  ToySet set{Tensor::matrix(2 * per_family, li + 1), Tensor::matrix(2 * per_family, 1), {}};
  for (std::size_t r = 0; r < 2 * per_family; ++r) {
    const bool sine = r % 2 == 0;
    std::vector<double> x(li + 1);
    if (sine) {
      const double phase = rng.uniform(0.0, 6.283185307179586);
      for (std::size_t t = 0; t <= li; ++t) x[t] = std::sin(1.2 * static_cast<double>(t) + phase);
    } else {
      const double level = rng.uniform(2.0, 4.0), slope = rng.uniform(0.2, 0.6);
      for (std::size_t t = 0; t <= li; ++t) x[t] = level + slope * static_cast<double>(t);
    }
    for (std::size_t t = 0; t < li; ++t) set.z(r, t) = x[t];
    set.target[r] = x[li];
    set.family.push_back(sine ? 0 : 1);
  }
  return set;
}

bool families_separate(std::uint64_t seed) {
  MoeConfig cfg;
  cfg.experts = 2;
  cfg.activation = "identity";
  cfg.dropout = 0.0;
  cfg.hidden_mult = 1;
  ParameterStore store;
  Rng init(seed);
  Moe moe(store, "m", 4, 1, cfg, init);
  Adam adam(store);
  const ToySet train = two_family_set(seed + 1000, 32);
  for (int step = 0; step < 600; ++step) {
    Graph g(&store);
    Var out = moe.forward(g, g.constant(train.z), g.constant(Tensor::matrix(train.z.rows(), 1)),
                          ForwardContext{});
    g.backward(ops::mse(out, g.constant(train.target)));
    Gradients grads(store);
    g.collect(grads);
    adam.step(store, grads, 1e-2);
  }
  const ToySet test = two_family_set(seed + 2000, 16);
  std::size_t votes[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t r = 0; r < test.z.rows(); ++r) {
    const Route route = moe.route(store, std::span<const double>(test.z.raw() + r * 4, 4));
    ++votes[test.family[r]][route.expert];
  }
  const std::size_t sine_expert = votes[0][1] > votes[0][0] ? 1 : 0;
  const std::size_t ramp_expert = votes[1][1] > votes[1][0] ? 1 : 0;
  return sine_expert != ramp_expert;
}

TEST(Routing, TwoFamiliesEndUpOnDistinctExperts) {
  int separated = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) separated += families_separate(seed) ? 1 : 0;
  EXPECT_GE(separated, 8);
}

}  // namespace
}  // namespace arm
