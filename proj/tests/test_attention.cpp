#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "core/errors.hpp"
#include "core/gradcheck.hpp"
#include "core/graph.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "doctest.h"
#include "nn/attention.hpp"
#include "nn/layers.hpp"

using namespace attnfc;

namespace {

Tensor random_vec(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t({n});
  for (std::size_t i = 0; i < n; ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

AttentionScorerParams zero_scorer(std::size_t state_dim, std::size_t out_dim) {
  AttentionScorerParams p;
  p.hidden.weight = Tensor::zeros({4, 2 * state_dim});
  p.hidden.bias = Tensor::zeros({4});
  p.output.weight = Tensor::zeros({out_dim, 4});
  p.output.bias = Tensor::zeros({out_dim});
  return p;
}

}  // namespace

TEST_CASE("tied scores give exactly uniform weights and the mean context") {
  const std::size_t n = 3, T = 4;
  Graph g;
  AttentionScorerNodes scorer = bind(g, zero_scorer(n, n));
  Rng rng(2);
  std::vector<NodeId> hs;
  for (std::size_t t = 0; t < T; ++t) hs.push_back(g.leaf(random_vec(n, rng)));
  NodeId d = g.leaf(random_vec(n, rng));

  AttentionResult fine = attend_fine(g, scorer, hs, d);
  const Tensor& a = g.value(fine.weights);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(std::fabs(a.at(t, j) - 0.25) <= 1e-12);
    }
  }
  const Tensor& ctx = g.value(fine.context);
  for (std::size_t j = 0; j < n; ++j) {
    double mean = 0.0;
    for (std::size_t t = 0; t < T; ++t) mean += g.value(hs[t])[j];
    mean /= static_cast<double>(T);
    CHECK(std::fabs(ctx[j] - mean) <= 1e-12);
  }

  AttentionScorerNodes basic = bind(g, zero_scorer(n, 1));
  AttentionResult r = attend_basic(g, basic, hs, d);
  for (std::size_t t = 0; t < T; ++t) {
    CHECK(std::fabs(g.value(r.weights)[t] - 0.25) <= 1e-12);
  }
}

TEST_CASE("attention weights normalize over time") {
  Rng rng(8);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 1 + rng.bits() % 5;
    const std::size_t T = 2 + rng.bits() % 6;
    Graph g;
    AttentionScorerParams p = AttentionScorerParams::init(n, 7, n, rng);
    AttentionScorerNodes scorer = bind(g, p);
    std::vector<NodeId> hs;
    for (std::size_t t = 0; t < T; ++t) hs.push_back(g.leaf(random_vec(n, rng, -3.0, 3.0)));
    NodeId d = g.leaf(random_vec(n, rng, -3.0, 3.0));

    AttentionResult fine = attend_fine(g, scorer, hs, d);
    const Tensor& a = g.value(fine.weights);
    for (std::size_t j = 0; j < n; ++j) {
      double total = 0.0;
      for (std::size_t t = 0; t < T; ++t) {
        CHECK(a.at(t, j) >= 0.0);
        total += a.at(t, j);
      }
      CHECK(std::fabs(total - 1.0) <= 1e-9);
    }

    AttentionScorerParams pb = AttentionScorerParams::init(n, 7, 1, rng);
    AttentionResult basic = attend_basic(g, bind(g, pb), hs, d);
    double total = 0.0;
    for (std::size_t t = 0; t < T; ++t) total += g.value(basic.weights)[t];
    CHECK(std::fabs(total - 1.0) <= 1e-9);
  }
}

TEST_CASE("context stays inside the per-dimension envelope of the steps") {
  Rng rng(14);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 4, T = 6;
    Graph g;
    AttentionScorerParams p = AttentionScorerParams::init(n, 7, n, rng);
    AttentionScorerNodes scorer = bind(g, p);
    std::vector<NodeId> hs;
    for (std::size_t t = 0; t < T; ++t) hs.push_back(g.leaf(random_vec(n, rng, -2.0, 2.0)));
    NodeId d = g.leaf(random_vec(n, rng));
    const Tensor& ctx = g.value(attend_fine(g, scorer, hs, d).context);
    for (std::size_t j = 0; j < n; ++j) {
      double lo = 1e300, hi = -1e300;
      for (std::size_t t = 0; t < T; ++t) {
        lo = std::min(lo, g.value(hs[t])[j]);
        hi = std::max(hi, g.value(hs[t])[j]);
      }
      CHECK(ctx[j] >= lo - 1e-12);
      CHECK(ctx[j] <= hi + 1e-12);
    }
  }
}

TEST_CASE("with a single hidden dimension fine and basic attention coincide") {
  Rng rng(19);
  Graph g;
  AttentionScorerParams p = AttentionScorerParams::init(1, 7, 1, rng);
  AttentionScorerNodes scorer = bind(g, p);
  std::vector<NodeId> hs;
  for (std::size_t t = 0; t < 5; ++t) hs.push_back(g.leaf(random_vec(1, rng)));
  NodeId d = g.leaf(random_vec(1, rng));

  AttentionResult fine = attend_fine(g, scorer, hs, d);
  AttentionResult basic = attend_basic(g, scorer, hs, d);
  for (std::size_t t = 0; t < 5; ++t) {
    CHECK(g.value(fine.weights).at(t, 0) == doctest::Approx(g.value(basic.weights)[t]).epsilon(1e-15));
  }
  CHECK(g.value(fine.context)[0] == doctest::Approx(g.value(basic.context)[0]).epsilon(1e-15));
}

TEST_CASE("a dominant score concentrates the weight on its step") {
  // scorer reads h_t[0] through a saturating tanh and scales it by 40, so the
  // step with the largest first component takes essentially all the mass
  const std::size_t n = 2;
  AttentionScorerParams p = zero_scorer(n, 1);
  p.hidden.weight[0] = 5.0;  // hidden unit 0 looks only at h_t[0]
  p.output.weight[0] = 40.0;
  Graph g;
  AttentionScorerNodes scorer = bind(g, p);
  std::vector<NodeId> hs = {
      g.leaf(Tensor::vector({-1.0, 0.3})),
      g.leaf(Tensor::vector({0.0, -0.8})),
      g.leaf(Tensor::vector({1.0, 0.5})),
  };
  NodeId d = g.leaf(Tensor::zeros({n}));
  AttentionResult r = attend_basic(g, scorer, hs, d);
  CHECK(g.value(r.weights)[2] > 0.999);
  CHECK(g.value(r.context)[1] == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("attention gradients match finite differences") {
  Rng rng(26);
  const std::size_t n = 3, T = 4;
  AttentionScorerParams p = AttentionScorerParams::init(n, 5, n, rng);
  std::vector<Tensor> params = {p.hidden.weight, p.hidden.bias, p.output.weight, p.output.bias};
  for (std::size_t t = 0; t < T; ++t) params.push_back(random_vec(n, rng));
  params.push_back(random_vec(n, rng));  // decoder state

  auto run = [](const std::vector<Tensor>& q, Graph& g, std::vector<NodeId>& leaves) {
    leaves.clear();
    for (const Tensor& t : q) leaves.push_back(g.leaf(t));
    AttentionScorerNodes scorer{{leaves[0], leaves[1]}, {leaves[2], leaves[3]}};
    std::vector<NodeId> hs(leaves.begin() + 4, leaves.end() - 1);
    AttentionResult r = attend_fine(g, scorer, hs, leaves.back());
    NodeId flat = g.concat(g.reshape(r.weights, {4 * 3}), r.context, 0);
    return g.sum_all(g.hadamard(flat, flat));
  };

  Graph g;
  std::vector<NodeId> leaves;
  NodeId loss = run(params, g, leaves);
  g.backward(loss);
  std::vector<Tensor> analytic;
  for (NodeId id : leaves) analytic.push_back(g.grad(id));

  ScalarFn fn = [&](const std::vector<Tensor>& q) {
    Graph fresh;
    std::vector<NodeId> tmp;
    return fresh.value(run(q, fresh, tmp))[0];
  };
  GradCheckReport report = finite_diff_check(fn, params, analytic, 1e-5, 1e-4);
  CHECK_MESSAGE(report.ok(), "max rel error ", report.max_rel_error);
}

TEST_CASE("attention contract violations are rejected") {
  Rng rng(33);
  Graph g;
  AttentionScorerParams p = AttentionScorerParams::init(3, 7, 3, rng);
  AttentionScorerNodes scorer = bind(g, p);
  NodeId d = g.leaf(random_vec(3, rng));
  CHECK_THROWS_AS(attend_fine(g, scorer, std::vector<NodeId>{}, d), ContractError);
  CHECK_THROWS_AS(score_basic(g, scorer, std::vector<NodeId>{g.leaf(random_vec(3, rng))}, d),
                  ContractError);  // arity 3 read-out is not a basic scorer

  AttentionScorerParams pb = AttentionScorerParams::init(3, 7, 1, rng);
  AttentionScorerNodes basic = bind(g, pb);
  CHECK_THROWS_AS(attend_fine(g, basic, std::vector<NodeId>{g.leaf(random_vec(3, rng))}, d),
                  ContractError);
}

TEST_CASE("attention is bitwise deterministic across graphs") {
  Rng rng_a(55);
  Rng rng_b(55);
  auto build = [](Rng& rng) {
    Graph g;
    AttentionScorerParams p = AttentionScorerParams::init(4, 7, 4, rng);
    AttentionScorerNodes scorer = bind(g, p);
    std::vector<NodeId> hs;
    for (std::size_t t = 0; t < 5; ++t) hs.push_back(g.leaf(random_vec(4, rng)));
    AttentionResult r = attend_fine(g, scorer, hs, g.leaf(random_vec(4, rng)));
    return g.value(r.context);
  };
  Tensor a = build(rng_a);
  Tensor b = build(rng_b);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}
