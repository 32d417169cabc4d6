#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "core/errors.hpp"
#include "core/gradcheck.hpp"
#include "core/graph.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "doctest.h"

using namespace attnfc;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("matmul identity and hand values") {
  Graph g;
  NodeId eye = g.leaf(Tensor::identity(2));
  NodeId col = g.leaf(Tensor::matrix(2, 1, {3, 4}));
  NodeId out = g.matmul(eye, col);
  CHECK(g.value(out)[0] == 3.0);
  CHECK(g.value(out)[1] == 4.0);

  NodeId a = g.leaf(Tensor::matrix(2, 2, {1, 2, 3, 4}));
  NodeId ones = g.leaf(Tensor::matrix(2, 1, {1, 1}));
  NodeId prod = g.matmul(a, ones);
  CHECK(g.value(prod)[0] == 3.0);
  CHECK(g.value(prod)[1] == 7.0);

  NodeId zero = g.leaf(Tensor::zeros({2, 2}));
  NodeId zprod = g.matmul(zero, col);
  CHECK(g.value(zprod)[0] == 0.0);
  CHECK(g.value(zprod)[1] == 0.0);
}

TEST_CASE("matmul rejects mismatched inner dimensions naming both shapes") {
  Graph g;
  NodeId a = g.leaf(Tensor::zeros({2, 3}));
  NodeId b = g.leaf(Tensor::zeros({2, 2}));
  CHECK_THROWS_WITH_AS(g.matmul(a, b),
                       "matmul: inner dimensions disagree, [2x3] vs [2x2]", DimensionError);
}

TEST_CASE("matmul with identity is bitwise associative") {
  Rng rng(7);
  Tensor a = random_tensor({3, 3}, rng);
  Tensor x = random_tensor({3}, rng);
  Graph g;
  NodeId an = g.leaf(a);
  NodeId xn = g.leaf(x);
  NodeId eye = g.leaf(Tensor::identity(3));
  NodeId direct = g.matmul(an, xn);
  NodeId via = g.matmul(g.matmul(an, eye), xn);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(g.value(direct)[i] == g.value(via)[i]);
  }
}

TEST_CASE("elementwise hand values") {
  Graph g;
  NodeId a = g.leaf(Tensor::vector({1, 2}));
  NodeId b = g.leaf(Tensor::vector({3, 4}));
  NodeId had = g.hadamard(a, b);
  CHECK(g.value(had)[0] == 3.0);
  CHECK(g.value(had)[1] == 8.0);

  NodeId zeros = g.leaf(Tensor::zeros({2}));
  NodeId same = g.add(a, zeros);
  CHECK(g.value(same)[0] == 1.0);
  CHECK(g.value(same)[1] == 2.0);

  NodeId diff = g.sub(a, a);
  CHECK(g.value(diff)[0] == 0.0);
  CHECK(g.value(diff)[1] == 0.0);

  CHECK_THROWS_AS(g.add(a, g.leaf(Tensor::vector({1, 2, 3}))), DimensionError);
}

TEST_CASE("activations at canonical points") {
  Graph g;
  NodeId x = g.leaf(Tensor::vector({0.0, -3.0, 3.0}));
  CHECK(g.value(g.sigmoid(x))[0] == 0.5);
  CHECK(g.value(g.tanh_(x))[0] == 0.0);
  NodeId r = g.relu(x);
  CHECK(g.value(r)[1] == 0.0);
  CHECK(g.value(r)[2] == 3.0);

  NodeId bad = g.leaf(Tensor::vector({std::nan("")}));
  CHECK_THROWS_AS(g.sigmoid(bad), ContractError);
}

TEST_CASE("softmax values and stability") {
  Graph g;
  NodeId flat = g.softmax(g.leaf(Tensor::vector({0, 0})), 0);
  CHECK(g.value(flat)[0] == doctest::Approx(0.5).epsilon(1e-12));

  NodeId big = g.softmax(g.leaf(Tensor::vector({1000, 1000})), 0);
  CHECK(g.value(big).all_finite());
  CHECK(g.value(big)[0] == doctest::Approx(0.5).epsilon(1e-12));

  NodeId logs = g.softmax(g.leaf(Tensor::vector({std::log(1.0), std::log(3.0)})), 0);
  CHECK(g.value(logs)[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(g.value(logs)[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("softmax slices sum to one and stay nonnegative") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor m = random_tensor({4, 3}, rng, -8.0, 8.0);
    for (std::size_t axis : {std::size_t{0}, std::size_t{1}}) {
      Graph g;
      const Tensor& y = g.value(g.softmax(g.leaf(m), axis));
      std::size_t nslices = axis == 0 ? 3 : 4;
      for (std::size_t s = 0; s < nslices; ++s) {
        double total = 0.0;
        for (std::size_t i = 0; i < (axis == 0 ? 4u : 3u); ++i) {
          double v = axis == 0 ? y.at(i, s) : y.at(s, i);
          CHECK(v >= 0.0);
          total += v;
        }
        CHECK(std::fabs(total - 1.0) < 1e-9);
      }
    }
  }
}

TEST_CASE("concat values and gradient routing") {
  Graph g;
  NodeId joined = g.concat(g.leaf(Tensor::vector({1})), g.leaf(Tensor::vector({2})), 0);
  CHECK(g.value(joined).size() == 2);
  CHECK(g.value(joined)[0] == 1.0);
  CHECK(g.value(joined)[1] == 2.0);

  NodeId x = g.leaf(Tensor::vector({5, 6}));
  NodeId with_empty = g.concat(x, g.leaf(Tensor::vector({})), 0);
  CHECK(g.value(with_empty).size() == 2);
  CHECK(g.value(with_empty)[1] == 6.0);

  // gradient of sum(concat(a,b)) w.r.t. a is all ones
  Graph g2;
  NodeId a = g2.leaf(Tensor::vector({1, 2, 3}));
  NodeId b = g2.leaf(Tensor::vector({4, 5}));
  NodeId loss = g2.sum_all(g2.concat(a, b, 0));
  g2.backward(loss);
  for (std::size_t i = 0; i < 3; ++i) CHECK(g2.grad(a)[i] == 1.0);
  for (std::size_t i = 0; i < 2; ++i) CHECK(g2.grad(b)[i] == 1.0);
}

TEST_CASE("backward hand-computed cases") {
  // loss = w², w = 3 → dloss/dw = 6
  Graph g;
  NodeId w = g.leaf(Tensor::scalar(3.0));
  NodeId loss = g.hadamard(w, w);
  g.backward(loss);
  CHECK(g.grad(w)[0] == 6.0);

  // loss independent of u → gradient 0
  NodeId u = g.leaf(Tensor::scalar(2.0));
  g.backward(loss);
  CHECK(g.grad(u)[0] == 0.0);
}

TEST_CASE("backward rejects non-scalar loss") {
  Graph g;
  NodeId v = g.leaf(Tensor::vector({1, 2}));
  CHECK_THROWS_AS(g.backward(v), ContractError);
}

TEST_CASE("backward is bitwise deterministic across repeated calls") {
  Rng rng(3);
  Graph g;
  NodeId a = g.leaf(random_tensor({4, 3}, rng));
  NodeId b = g.leaf(random_tensor({3}, rng));
  NodeId y = g.tanh_(g.matmul(a, b));
  NodeId loss = g.sum_all(g.hadamard(y, y));
  g.backward(loss);
  Tensor first_a = g.grad(a);
  Tensor first_b = g.grad(b);
  g.backward(loss);
  for (std::size_t i = 0; i < first_a.size(); ++i) CHECK(g.grad(a)[i] == first_a[i]);
  for (std::size_t i = 0; i < first_b.size(); ++i) CHECK(g.grad(b)[i] == first_b[i]);
}

TEST_CASE("finite_diff_check on w² and on a constant") {
  ScalarFn square = [](const std::vector<Tensor>& p) { return p[0][0] * p[0][0]; };
  std::vector<Tensor> params = {Tensor::scalar(1.0)};
  std::vector<Tensor> analytic = {Tensor::scalar(2.0)};
  GradCheckReport report = finite_diff_check(square, params, analytic, 1e-5, 1e-4);
  CHECK(report.ok());
  CHECK(report.max_rel_error < 1e-6);

  ScalarFn constant = [](const std::vector<Tensor>&) { return 42.0; };
  std::vector<Tensor> zeros = {Tensor::scalar(0.0)};
  report = finite_diff_check(constant, params, zeros, 1e-5, 1e-4);
  CHECK(report.ok());
}

TEST_CASE("finite_diff_check flags a wrong gradient") {
  ScalarFn square = [](const std::vector<Tensor>& p) { return p[0][0] * p[0][0]; };
  std::vector<Tensor> params = {Tensor::scalar(1.0)};
  std::vector<Tensor> wrong = {Tensor::scalar(3.0)};
  GradCheckReport report = finite_diff_check(square, params, wrong, 1e-5, 1e-4, {"w"});
  CHECK_FALSE(report.ok());
  REQUIRE(report.failures.size() == 1);
  CHECK(report.failures[0].name == "w");
}

TEST_CASE("every differentiable op passes the finite-difference oracle") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor a0 = random_tensor({3, 4}, rng);
    Tensor b0 = random_tensor({4}, rng);
    Tensor c0 = random_tensor({3}, rng);
    Tensor gain0 = random_tensor({3}, rng, 0.5, 1.5);
    Tensor off0 = random_tensor({3}, rng);

    auto run = [](const std::vector<Tensor>& p, Graph& g, std::vector<NodeId>& leaves) {
      leaves.clear();
      for (const Tensor& t : p) leaves.push_back(g.leaf(t));
      NodeId mv = g.matmul(leaves[0], leaves[1]);             // [3]
      NodeId act = g.tanh_(g.add(mv, leaves[2]));             // [3]
      NodeId sg = g.sigmoid(g.sub(act, leaves[2]));           // [3]
      NodeId rl = g.relu(g.hadamard(sg, act));                // [3]
      NodeId ln = g.layer_norm(rl, leaves[3], leaves[4], 1e-5);
      NodeId cat = g.concat(ln, act, 0);                      // [6]
      NodeId sm = g.softmax(cat, 0);                          // [6]
      NodeId st = g.stack_rows(std::vector<NodeId>{ln, act}); // [2×3]
      NodeId tr = g.transpose(st);                            // [3×2]
      NodeId sr = g.sum_rows(tr);                             // [2]
      NodeId rs = g.reshape(sr, {2, 1});
      NodeId joined = g.concat(g.reshape(sm, {6, 1}), g.concat(rs, rs, 0), 0);
      return g.sum_all(g.hadamard(joined, joined));
    };

    std::vector<Tensor> params = {a0, b0, c0, gain0, off0};
    Graph g;
    std::vector<NodeId> leaves;
    NodeId loss = run(params, g, leaves);
    g.backward(loss);
    std::vector<Tensor> analytic;
    for (NodeId id : leaves) analytic.push_back(g.grad(id));

    ScalarFn fn = [&](const std::vector<Tensor>& p) {
      Graph fresh;
      std::vector<NodeId> tmp;
      return fresh.value(run(p, fresh, tmp))[0];
    };
    GradCheckReport report = finite_diff_check(fn, params, analytic, 1e-5, 1e-4);
    CHECK_MESSAGE(report.ok(), "max rel error ", report.max_rel_error);
  }
}

TEST_CASE("forward ops keep finite inputs finite") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    Graph g;
    NodeId a = g.leaf(random_tensor({5}, rng, -50.0, 50.0));
    NodeId big = g.leaf(random_tensor({5}, rng, -1000.0, 1000.0));
    CHECK(g.value(g.sigmoid(big)).all_finite());
    CHECK(g.value(g.tanh_(big)).all_finite());
    CHECK(g.value(g.softmax(big, 0)).all_finite());
    CHECK(g.value(g.hadamard(a, a)).all_finite());
  }
}
