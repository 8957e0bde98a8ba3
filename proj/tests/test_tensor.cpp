#include <catch2/catch.hpp>

#include <cmath>

#include "graphpb/gradcheck.hpp"
#include "graphpb/optim.hpp"
#include "graphpb/rng.hpp"
#include "graphpb/tensor.hpp"
#include "oracles.hpp"

using namespace graphpb;

TEST_CASE("matmul against identity and the naive triple loop", "[tensor]") {
    Rng rng(21);
    const Tensor x = Tensor::random_uniform(3, 5, -2, 2, rng);
    REQUIRE(max_abs_diff(matmul(Tensor::identity(3), x), x) == 0.0);

    for (int i = 0; i < 50; ++i) {
        const int m = static_cast<int>(rng.uniform_int(1, 8));
        const int k = static_cast<int>(rng.uniform_int(1, 8));
        const int n = static_cast<int>(rng.uniform_int(1, 8));
        const Tensor a = Tensor::random_uniform(m, k, -3, 3, rng);
        const Tensor b = Tensor::random_uniform(k, n, -3, 3, rng);
        const auto expected = oracles::nm_mul(oracles::nm_from(a), oracles::nm_from(b));
        REQUIRE(oracles::nm_max_diff(expected, matmul(a, b)) < 1e-12);
    }
}

TEST_CASE("elementwise op values", "[tensor]") {
    const Tensor z = Tensor::zeros(1, 3);
    REQUIRE(sigmoid(z).at(0, 0) == 0.5);
    REQUIRE(tanh(z).at(0, 1) == 0.0);
    REQUIRE(relu(Tensor::full(1, 1, -1.0)).at(0, 0) == 0.0);
    REQUIRE(relu(Tensor::full(1, 1, 2.5)).at(0, 0) == 2.5);
    REQUIRE(affine(Tensor::full(2, 2, 3.0), -1.0, 1.0).at(1, 1) == -2.0);
}

TEST_CASE("shape mismatches name both shapes", "[tensor]") {
    const Tensor a(2, 3), b(2, 3);
    REQUIRE_THROWS_WITH(matmul(a, b), Catch::Contains("2x3 and 2x3"));
    REQUIRE_THROWS_AS(add(Tensor(2, 3), Tensor(3, 3)), ShapeMismatch);
    REQUIRE_THROWS_AS(hadamard(Tensor(2, 3), Tensor(2, 2)), ShapeMismatch);
    REQUIRE_THROWS_AS(concat_cols(Tensor(2, 3), Tensor(3, 3)), ShapeMismatch);
    REQUIRE_THROWS_AS(mse_loss(Tensor(2, 3), Tensor(2, 2)), ShapeMismatch);
    REQUIRE_THROWS_AS(slice(Tensor(2, 3), 0, 3, 0, 1), ShapeMismatch);
}

TEST_CASE("softmax rows sum to one and lie in (0,1)", "[tensor]") {
    Rng rng(22);
    for (int i = 0; i < 30; ++i) {
        const Tensor x = Tensor::random_uniform(4, 6, -5, 5, rng);
        const Tensor s = softmax_rows(x);
        for (int r = 0; r < s.rows(); ++r) {
            double sum = 0;
            for (int c = 0; c < s.cols(); ++c) {
                sum += s.at(r, c);
                REQUIRE(s.at(r, c) > 0.0);
                REQUIRE(s.at(r, c) < 1.0);
            }
            REQUIRE(std::abs(sum - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("structural ops", "[tensor]") {
    const Tensor a = Tensor::from_rows({{1, 2}, {3, 4}});
    const Tensor b = Tensor::from_rows({{5}, {6}});
    const Tensor cc = concat_cols(a, b);
    REQUIRE(cc.cols() == 3);
    REQUIRE(cc.at(1, 2) == 6.0);
    const Tensor cr = concat_rows(a, a);
    REQUIRE(cr.rows() == 4);
    REQUIRE(cr.at(3, 1) == 4.0);
    const Tensor tr = transpose(a);
    REQUIRE(tr.at(0, 1) == 3.0);
    const Tensor sl = slice(a, 0, 1, 1, 2);
    REQUIRE(sl.rows() == 1);
    REQUIRE(sl.at(0, 0) == 2.0);
    REQUIRE(sum_all(a).value() == 10.0);
    REQUIRE(mse_loss(a, a).value() == 0.0);
}

TEST_CASE("broadcast add over rows", "[tensor]") {
    const Tensor m = Tensor::from_rows({{1, 1}, {2, 2}});
    const Tensor row = Tensor::from_rows({{10, 20}});
    const Tensor out = add(m, row);
    REQUIRE(out.at(0, 0) == 11.0);
    REQUIRE(out.at(1, 1) == 22.0);
}

TEST_CASE("backward on mse against zero gives 2x", "[tensor][grad]") {
    Tape tape;
    Tensor x = Tensor::scalar(1.7);
    x.attach(tape);
    Tensor loss = mse_loss(x, Tensor::zeros(1, 1));
    tape.backward(loss);
    REQUIRE(x.grad()[0] == Approx(2.0 * 1.7).epsilon(1e-12));
}

TEST_CASE("backward validates the loss", "[tensor][grad]") {
    Tape tape;
    Tensor x = Tensor::from_rows({{1, 2}});
    x.attach(tape);
    Tensor y = affine(x, 2.0, 0.0);
    REQUIRE_THROWS_AS(tape.backward(y), NotScalarLoss);
    Tensor untracked = Tensor::scalar(1.0);
    REQUIRE_THROWS_AS(tape.backward(untracked), DetachedTensor);
}

TEST_CASE("double backward is rejected", "[tensor][grad]") {
    Tape tape;
    Tensor x = Tensor::scalar(2.0);
    x.attach(tape);
    Tensor loss = sum_all(sigmoid(x));
    tape.backward(loss);
    REQUIRE_THROWS_AS(tape.backward(loss), Error);
}

TEST_CASE("mixing tapes is rejected", "[tensor][grad]") {
    Tape t1, t2;
    Tensor a = Tensor::scalar(1.0);
    Tensor b = Tensor::scalar(2.0);
    a.attach(t1);
    b.attach(t2);
    REQUIRE_THROWS_AS(add(a, b), Error);
}

TEST_CASE("sum(sigmoid(Wx)) matches finite differences", "[tensor][grad]") {
    Rng rng(23);
    Tensor w = Tensor::random_uniform(4, 4, -1, 1, rng);
    Tensor x = Tensor::random_uniform(4, 2, -1, 1, rng);
    const auto result = gradcheck({&w, &x}, [&] { return sum_all(sigmoid(matmul(w, x))); });
    REQUIRE(result.entries_checked == 24);
    REQUIRE(result.max_rel_error < 1e-6);
}

TEST_CASE("every primitive passes a finite-difference check", "[tensor][grad]") {
    Rng rng(24);
    Tensor a = Tensor::random_uniform(3, 4, -1, 1, rng);
    Tensor b = Tensor::random_uniform(3, 4, -1, 1, rng);
    Tensor w = Tensor::random_uniform(4, 3, -1, 1, rng);
    Tensor row = Tensor::random_uniform(1, 4, -1, 1, rng);
    Tensor target = Tensor::random_uniform(3, 4, -1, 1, rng);

    const auto check = [&](const std::function<Tensor()>& fn) {
        return gradcheck({&a, &b, &w, &row}, fn).max_rel_error;
    };
    REQUIRE(check([&] { return sum_all(matmul(a, w)); }) < 1e-6);
    REQUIRE(check([&] { return sum_all(add(a, b)); }) < 1e-6);
    REQUIRE(check([&] { return sum_all(add(a, row)); }) < 1e-6);
    REQUIRE(check([&] { return sum_all(hadamard(a, b)); }) < 1e-6);
    REQUIRE(check([&] { return sum_all(sigmoid(a)); }) < 1e-6);
    REQUIRE(check([&] { return sum_all(tanh(a)); }) < 1e-6);
    REQUIRE(check([&] { return sum_all(relu(a)); }) < 1e-5);
    // sum of a softmax row is constant, so the meaningful probe is weighted:
    REQUIRE(check([&] { return sum_all(hadamard(softmax_rows(a), b)); }) < 1e-5);
    REQUIRE(check([&] { return sum_all(concat_cols(a, b)); }) < 1e-6);
    REQUIRE(check([&] { return sum_all(concat_rows(a, b)); }) < 1e-6);
    REQUIRE(check([&] { return sum_all(transpose(a)); }) < 1e-6);
    REQUIRE(check([&] { return sum_all(slice(a, 1, 3, 0, 2)); }) < 1e-6);
    REQUIRE(check([&] { return sum_all(affine(a, -1.5, 0.25)); }) < 1e-6);
    REQUIRE(check([&] { return mse_loss(a, target); }) < 1e-6);
}

TEST_CASE("forward ops stay finite on bounded inputs", "[tensor][property]") {
    Rng rng(25);
    for (int i = 0; i < 50; ++i) {
        const Tensor a = Tensor::random_uniform(3, 3, -100, 100, rng);
        const Tensor b = Tensor::random_uniform(3, 3, -100, 100, rng);
        REQUIRE(matmul(a, b).all_finite());
        REQUIRE(sigmoid(a).all_finite());
        REQUIRE(tanh(a).all_finite());
        REQUIRE(relu(a).all_finite());
        REQUIRE(softmax_rows(a).all_finite());
        REQUIRE(hadamard(a, b).all_finite());
        REQUIRE(mse_loss(a, b).all_finite());
        REQUIRE(affine(a, -3.0, 7.0).all_finite());
    }
}

TEST_CASE("forward results are identical across runs", "[tensor]") {
    const auto run = [] {
        Rng rng(99);
        Tensor a = Tensor::random_uniform(5, 5, -1, 1, rng);
        Tensor b = Tensor::random_uniform(5, 5, -1, 1, rng);
        return matmul(sigmoid(a), tanh(b));
    };
    REQUIRE(max_abs_diff(run(), run()) == 0.0);
}

TEST_CASE("adam with zero gradients leaves parameters alone", "[optim]") {
    Tensor p = Tensor::from_rows({{1, 2}, {3, 4}});
    const Tensor before = p.clone();
    AdamMoments state(p.size());
    adam_step(p, Tensor::zeros(2, 2), state, 1, 1e-3);
    REQUIRE(max_abs_diff(p, before) == 0.0);
    for (double m : state.m) REQUIRE(m == 0.0);
    for (double v : state.v) REQUIRE(v == 0.0);
}

TEST_CASE("adam step size is bounded by lr under a constant gradient", "[optim]") {
    Tensor p = Tensor::scalar(5.0);
    AdamMoments state(1);
    const double lr = 1e-3;
    double prev = p.value();
    for (int t = 1; t <= 100; ++t) {
        adam_step(p, Tensor::scalar(0.3), state, t, lr);
        REQUIRE(std::abs(p.value() - prev) <= lr * (1.0 + 1e-3));
        prev = p.value();
    }
}

TEST_CASE("adam descends a quadratic bowl monotonically after warmup", "[optim]") {
    Tensor p = Tensor::from_rows({{2.0, -1.5, 0.7}});
    AdamMoments state(p.size());
    std::vector<double> losses;
    for (int t = 1; t <= 200; ++t) {
        Tape tape;
        p.attach(tape);
        Tensor loss = mse_loss(p, Tensor::zeros(1, 3));
        tape.backward(loss);
        losses.push_back(loss.value());
        Tensor g = p.grad_tensor();
        p.detach();
        adam_step(p, g, state, t, 1e-3);
    }
    for (std::size_t i = 20; i + 1 < losses.size(); ++i)
        REQUIRE(losses[i + 1] < losses[i]);
}

TEST_CASE("learning-rate schedule anneals to the floor at the decay horizon", "[optim]") {
    const LrSchedule lr;
    REQUIRE(lr.at(1) == Approx(1e-3).epsilon(1e-2));
    REQUIRE(lr.at(5000) == Approx(1e-5));
    REQUIRE(lr.at(20000) == Approx(1e-5));
    for (int t = 1; t < 5000; t += 500) REQUIRE(lr.at(t) > lr.at(t + 500));
}
