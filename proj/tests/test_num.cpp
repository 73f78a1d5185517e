#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "support/scalar_adam.hpp"
#include "wordforge/num/adam.hpp"
#include "wordforge/num/gradcheck.hpp"
#include "wordforge/num/rng.hpp"
#include "wordforge/num/tape.hpp"
#include "wordforge/num/tensor.hpp"

using namespace wf::num;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  return Tensor::uniform(std::move(shape), lo, hi, rng);
}

}  // namespace

TEST_CASE("rng: streams are deterministic and fork-independent") {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c = a.fork("init");
  Rng d = a.fork("shuffle");
  CHECK(c.next_u64() != d.next_u64());
  // named forks do not depend on the parent's counter position
  Rng e(42);
  e.next_u64();
  CHECK(e.fork("init").next_u64() == Rng(42).fork("init").next_u64());
}

TEST_CASE("rng: next_below stays in range") {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) CHECK(rng.next_below(13) < 13);
}

TEST_CASE("tensor: shape/data invariant enforced") {
  CHECK_THROWS(Tensor({2, 3}, std::vector<double>{1.0}));
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
}

TEST_CASE("matmul by identity returns the input") {
  Tape tape;
  Tensor a({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor eye({3, 3});
  for (int i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
  Value r = matmul(tape.constant(a), tape.constant(eye));
  for (int64_t i = 0; i < 6; ++i) CHECK(tape.val(r).at(i) == doctest::Approx(a.at(i)));
}

TEST_CASE("matmul rejects mismatched inner dims with a useful message") {
  Tape tape;
  Value a = tape.constant(Tensor({2, 3}));
  Value b = tape.constant(Tensor({4, 5}));
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("matmul"), std::invalid_argument);
}

TEST_CASE("softmax of a constant row is uniform and sums to one") {
  Tape tape;
  Value s = softmax_rows(tape.constant(Tensor({3}, {0.0, 0.0, 0.0})));
  for (int i = 0; i < 3; ++i) CHECK(tape.val(s).at(i) == doctest::Approx(1.0 / 3));

  Rng rng(11);
  for (int it = 0; it < 50; ++it) {
    Tape t2;
    Value v = softmax_rows(t2.constant(random_tensor({4, 7}, rng, -5, 5)));
    const Tensor& out = t2.val(v);
    for (int64_t r = 0; r < 4; ++r) {
      double sum = 0;
      for (int64_t c = 0; c < 7; ++c) {
        double p = out.at(r, c);
        CHECK(p > 0.0);
        CHECK(p < 1.0);
        sum += p;
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("cross entropy of a near-one-hot prediction approaches zero") {
  Tape tape;
  Tensor logits({1, 4}, {50.0, 0.0, 0.0, 0.0});
  std::vector<int32_t> target{0};
  std::vector<double> w{1.0};
  Value ce = cross_entropy_sum(tape.constant(logits), target, w);
  CHECK(tape.val(ce).item() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("backward: d(x*x)/dx = 2x") {
  Tape tape;
  Tensor x = Tensor::scalar(3.0);
  x.set_requires_grad(true);
  Value vx = tape.leaf(x);
  Value loss = sum_all(vx * vx);
  tape.backward(loss);
  CHECK(tape.grad(vx).at(0) == doctest::Approx(6.0));
}

TEST_CASE("backward: tanh'(0) = 1") {
  Tape tape;
  Tensor x = Tensor::scalar(0.0);
  x.set_requires_grad(true);
  Value vx = tape.leaf(x);
  Value loss = sum_all(tanh(vx));
  tape.backward(loss);
  CHECK(tape.grad(vx).at(0) == doctest::Approx(1.0));
}

TEST_CASE("backward: unreachable leaf gets a zero gradient of its shape") {
  Tape tape;
  Parameter used("used", Tensor({2}, {1.0, 2.0}));
  Parameter unused("unused", Tensor({3}, {1.0, 1.0, 1.0}));
  Value vu = tape.watch(used);
  tape.watch(unused);
  tape.backward(sum_all(vu * vu));
  Tensor g = tape.grad_of(unused);
  CHECK(g.shape() == Shape{3});
  for (int i = 0; i < 3; ++i) CHECK(g.at(i) == 0.0);
}

TEST_CASE("backward: errors on non-scalar loss and on double invocation") {
  Tape tape;
  Parameter p("p", Tensor({2}, {1.0, 2.0}));
  Value v = tape.watch(p);
  CHECK_THROWS_AS(tape.backward(v), std::invalid_argument);

  Tape t2;
  Value v2 = t2.watch(p);
  Value loss = sum_all(v2);
  t2.backward(loss);
  CHECK_THROWS_AS(t2.backward(loss), std::logic_error);
}

TEST_CASE("forward/backward are bit-deterministic") {
  auto run = [] {
    Rng rng(5);
    Parameter w("w", random_tensor({4, 4}, rng));
    Tape tape;
    Value vw = tape.watch(w);
    Value loss = mean_all(tanh(matmul(vw, vw)) * vw);
    tape.backward(loss);
    Tensor g = tape.grad_of(w);
    std::vector<double> out(g.data(), g.data() + g.size());
    out.push_back(tape.val(loss).item());
    return out;
  };
  auto a = run(), b = run();
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

// Finite-difference sweep over each primitive, 100+ random instances total
// per op family.
TEST_CASE("gradient check: every primitive vs central differences") {
  Rng rng(123);
  double worst = 0.0;

  for (int it = 0; it < 100; ++it) {
    Parameter a("a", random_tensor({3, 4}, rng));
    Parameter b("b", random_tensor({4, 2}, rng));
    Parameter c("c", random_tensor({3, 2}, rng));
    Parameter row("row", random_tensor({2}, rng));
    Parameter col("col", random_tensor({3, 1}, rng));
    std::vector<Parameter*> params{&a, &b, &c, &row, &col};

    auto f = [&](Tape& t) {
      Value va = t.watch(a), vb = t.watch(b), vc = t.watch(c);
      Value m = matmul(va, vb);                       // 3x2
      Value s = m + vc * t.watch(col) + t.watch(row); // broadcast both ways
      Value u = tanh(s) * sigmoid(s - vc);
      Value soft = softmax_rows(u);
      Value cat = concat_cols(std::vector<Value>{u, soft});
      Value sl = slice_cols(slice_rows(cat, 0, 2), 1, 4);
      Value rs = reshape(cat, Shape{2, 6});
      return mean_all(sl) + sum_all(rs) * mean_all(add_const(soft, 0.25));
    };
    worst = std::max(worst, gradient_check(f, params).max_rel_err);
  }
  CHECK(worst < 1e-4);
}

// relu and max are piecewise; keep the finite-difference probes away from
// the kinks or the comparison is meaningless.
TEST_CASE("gradient check: relu and max_over_rows away from their kinks") {
  Rng rng(55);
  double worst = 0.0;
  for (int it = 0; it < 100; ++it) {
    Parameter a("a", Tensor({4, 3}));
    for (int64_t i = 0; i < a.value.size(); ++i) {
      double v = rng.uniform(0.01, 1.0);
      a.value.at(i) = rng.next_double() < 0.5 ? -v : v;
    }
    // separate column entries so the argmax cannot flip under +-h
    for (int64_t c = 0; c < 3; ++c) {
      for (int64_t r = 0; r < 4; ++r) a.value.at(r, c) += 0.01 * static_cast<double>(r);
    }
    std::vector<Parameter*> params{&a};
    auto f = [&](Tape& t) {
      Value v = t.watch(a);
      return sum_all(relu(v)) + sum_all(max_over_rows(v));
    };
    worst = std::max(worst, gradient_check(f, params).max_rel_err);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("gradient check: embedding + cross entropy + bce") {
  Rng rng(321);
  double worst = 0.0;
  for (int it = 0; it < 100; ++it) {
    Parameter table("table", random_tensor({6, 3}, rng));
    Parameter w("w", random_tensor({3, 5}, rng));
    std::vector<int32_t> ids{0, 3, 5, 3};
    std::vector<int32_t> targets{1, 0, 4, 2};
    std::vector<double> weights{1.0, 0.0, 1.0, 0.5};  // one masked row
    std::vector<double> bce_targets{1.0, 0.0, 0.9, 0.1};
    std::vector<Parameter*> params{&table, &w};
    auto f = [&](Tape& t) {
      Value e = embedding_lookup(t.watch(table), ids);       // 4x3
      Value logits = matmul(e, t.watch(w));                  // 4x5
      Value ce = cross_entropy_sum(logits, targets, weights);
      Value bce = bce_with_logits_sum(slice_cols(logits, 0, 1), bce_targets);
      return ce + scale(bce, 0.3);
    };
    worst = std::max(worst, gradient_check(f, params).max_rel_err);
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("gradient check: sum of squares of 10 random params") {
  Rng rng(9);
  std::vector<Parameter> ps;
  ps.reserve(10);
  for (int i = 0; i < 10; ++i) {
    ps.emplace_back("p" + std::to_string(i), random_tensor({1}, rng, 0.1, 1.0));
  }
  std::vector<Parameter*> ptrs;
  for (auto& p : ps) ptrs.push_back(&p);
  auto f = [&](Tape& t) {
    Value acc = t.constant(Tensor::scalar(0.0));
    for (auto& p : ps) {
      Value v = t.watch(p);
      acc = acc + sum_all(v * v);
    }
    return acc;
  };
  CHECK(gradient_check(f, ptrs).max_rel_err < 1e-6);
}

TEST_CASE("adam: first step with unit gradient moves by about -lr") {
  Parameter p("p", Tensor({2}, {0.0, 0.0}));
  std::vector<Parameter*> params{&p};
  Adam adam({.lr = 0.1});
  Tensor g({2}, {1.0, 1.0});
  adam.step(params, std::vector<Tensor>{g});
  // bias-corrected m_hat = 1, v_hat = 1 -> delta = -lr / (1 + eps)
  CHECK(std::abs(p.value.at(0) - (-0.1)) < 1e-6);
  CHECK(std::abs(p.value.at(1) - (-0.1)) < 1e-6);
  CHECK(adam.steps() == 1);
}

TEST_CASE("adam: zero gradient leaves params unchanged but advances the counter") {
  Parameter p("p", Tensor({3}, {1.0, -2.0, 0.5}));
  std::vector<Parameter*> params{&p};
  Adam adam({.lr = 0.1});
  adam.step(params, std::vector<Tensor>{Tensor({3})});
  CHECK(p.value.at(0) == 1.0);
  CHECK(p.value.at(1) == -2.0);
  CHECK(p.value.at(2) == 0.5);
  CHECK(adam.steps() == 1);
}

TEST_CASE("adam: matches an independent scalar reference over several steps") {
  Parameter p("p", Tensor({1}, {0.7}));
  std::vector<Parameter*> params{&p};
  Adam adam({.lr = 0.05});
  wf::testsupport::ScalarAdam ref(0.05);
  double ref_param = 0.7;
  for (int stepi = 0; stepi < 5; ++stepi) {
    double g = 0.25;  // constant gradient
    ref_param = ref.update(ref_param, g);
    adam.step(params, std::vector<Tensor>{Tensor({1}, {g})});
    CHECK(p.value.at(0) == doctest::Approx(ref_param).epsilon(1e-12));
  }
}

TEST_CASE("adam: lr=0 leaves parameters bit-identical") {
  Rng rng(77);
  Parameter p("p", random_tensor({4, 4}, rng));
  Tensor before = p.value;
  std::vector<Parameter*> params{&p};
  Adam adam({.lr = 0.0});
  for (int i = 0; i < 3; ++i) {
    adam.step(params, std::vector<Tensor>{random_tensor({4, 4}, rng)});
  }
  for (int64_t i = 0; i < before.size(); ++i) CHECK(p.value.at(i) == before.at(i));
}

TEST_CASE("adam: shape mismatch and non-finite gradients are named errors") {
  Parameter p("embedding", Tensor({2, 2}));
  std::vector<Parameter*> params{&p};
  Adam adam;
  CHECK_THROWS_AS(adam.step(params, std::vector<Tensor>{Tensor({3})}),
                  std::invalid_argument);
  Tensor bad({2, 2});
  bad.at(2) = std::nan("");
  CHECK_THROWS_WITH_AS(adam.step(params, std::vector<Tensor>{bad}),
                       doctest::Contains("embedding"), std::runtime_error);
}
