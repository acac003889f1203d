#include <doctest.h>

#include <cmath>
#include <vector>

#include "hfrec/kernels.hpp"
#include "hfrec/rng.hpp"
#include "testutil.hpp"

using namespace hfrec;
using namespace hfrec::testutil;

namespace {

// Independent oracle: plain triple loop, double accumulation.
void naive_gemm(const std::vector<float>& a, const std::vector<float>& b, std::vector<float>& c,
                int64_t m, int64_t n, int64_t k, char mode, bool accumulate) {
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      double acc = accumulate ? c[i * n + j] : 0.0;
      for (int64_t p = 0; p < k; ++p) {
        const double av = mode == 't' ? a[p * m + i] : a[i * k + p];
        const double bv = mode == 'n' || mode == 't' ? b[p * n + j] : b[j * k + p];
        acc += av * bv;
      }
      c[i * n + j] = static_cast<float>(acc);
    }
  }
}

}  // namespace

TEST_CASE("gemm variants match a naive oracle and each other") {
  Rng rng(42);
  const struct { int64_t m, n, k; } shapes[] = {
      {1, 1, 1}, {3, 5, 7}, {4, 16, 8}, {9, 33, 17}, {64, 70, 31}, {37, 128, 129}, {128, 257, 65},
  };
  for (const auto& s : shapes) {
    for (bool accumulate : {false, true}) {
      auto a = random_vec(rng, s.m * s.k);
      auto at = random_vec(rng, s.k * s.m);
      auto b = random_vec(rng, s.k * s.n);
      auto bt = random_vec(rng, s.n * s.k);
      auto c0 = random_vec(rng, s.m * s.n);

      for (char mode : {'n', 't', 'x'}) {
        std::vector<float> want = c0;
        naive_gemm(mode == 't' ? at : a, mode == 'x' ? bt : b, want, s.m, s.n, s.k, mode,
                   accumulate);
        for (const auto* impl : kern::available()) {
          std::vector<float> got = c0;
          if (mode == 'n') impl->gemm_nn(a.data(), b.data(), got.data(), s.m, s.n, s.k, accumulate);
          if (mode == 't') impl->gemm_tn(at.data(), b.data(), got.data(), s.m, s.n, s.k, accumulate);
          if (mode == 'x') impl->gemm_nt(a.data(), bt.data(), got.data(), s.m, s.n, s.k, accumulate);
          const double err = max_rel_diff(want.data(), got.data(), s.m * s.n, 1e-3);
          INFO("impl=", impl->name, " mode=", mode, " m=", s.m, " n=", s.n, " k=", s.k,
               " acc=", accumulate);
          CHECK(err < 2e-5);
        }
      }
    }
  }
}

TEST_CASE("elementwise kernels agree across implementations") {
  Rng rng(7);
  for (int64_t n : {1, 7, 8, 63, 64, 1000, 4097}) {
    auto a = random_vec(rng, n, -3.0f, 3.0f);
    auto b = random_vec(rng, n, -3.0f, 3.0f);
    const auto& ref = kern::scalar_ops();
    for (const auto* impl : kern::available()) {
      std::vector<float> ya(n), yb(n);

      ref.add(a.data(), b.data(), ya.data(), n);
      impl->add(a.data(), b.data(), yb.data(), n);
      CHECK(max_abs_diff(ya.data(), yb.data(), n) == 0.0);

      ref.sub(a.data(), b.data(), ya.data(), n);
      impl->sub(a.data(), b.data(), yb.data(), n);
      CHECK(max_abs_diff(ya.data(), yb.data(), n) == 0.0);

      ref.mul(a.data(), b.data(), ya.data(), n);
      impl->mul(a.data(), b.data(), yb.data(), n);
      CHECK(max_abs_diff(ya.data(), yb.data(), n) == 0.0);

      ref.leaky_relu(a.data(), 0.1f, ya.data(), n);
      impl->leaky_relu(a.data(), 0.1f, yb.data(), n);
      CHECK(max_abs_diff(ya.data(), yb.data(), n) == 0.0);

      ref.leaky_relu_grad(a.data(), b.data(), 0.1f, ya.data(), n);
      impl->leaky_relu_grad(a.data(), b.data(), 0.1f, yb.data(), n);
      CHECK(max_abs_diff(ya.data(), yb.data(), n) == 0.0);

      ref.half_sq_diff(a.data(), b.data(), ya.data(), n);
      impl->half_sq_diff(a.data(), b.data(), yb.data(), n);
      CHECK(max_abs_diff(ya.data(), yb.data(), n) == 0.0);

      ref.affine(a.data(), 1.5f, -0.25f, ya.data(), n);
      impl->affine(a.data(), 1.5f, -0.25f, yb.data(), n);
      CHECK(max_rel_diff(ya.data(), yb.data(), n) < 1e-6);

      ya = b; yb = b;
      ref.axpy(0.37f, a.data(), ya.data(), n);
      impl->axpy(0.37f, a.data(), yb.data(), n);
      CHECK(max_rel_diff(ya.data(), yb.data(), n) < 1e-6);
    }
  }
}

TEST_CASE("reductions agree across implementations") {
  Rng rng(9);
  for (int64_t n : {1, 5, 8, 100, 4095, 4096, 100001}) {
    auto a = random_vec(rng, n, -2.0f, 2.0f);
    auto b = random_vec(rng, n, -2.0f, 2.0f);
    const auto& ref = kern::scalar_ops();
    for (const auto* impl : kern::available()) {
      CHECK(std::abs(ref.sum(a.data(), n) - impl->sum(a.data(), n)) < 1e-6 * (1 + std::abs(ref.sum(a.data(), n))));
      CHECK(std::abs(ref.dot(a.data(), b.data(), n) - impl->dot(a.data(), b.data(), n)) < 1e-6 * n);
      CHECK(std::abs(ref.sumsq_diff(a.data(), 0.5f, n) - impl->sumsq_diff(a.data(), 0.5f, n)) < 1e-6 * n);
      CHECK(ref.max(a.data(), n) == impl->max(a.data(), n));
    }
  }
}

TEST_CASE("norm helpers and sgd agree across implementations") {
  Rng rng(11);
  const int64_t n = 1003;
  auto x = random_vec(rng, n, -1.0f, 1.0f);
  auto g = random_vec(rng, n, -0.5f, 0.5f);
  auto ss = random_vec(rng, n, 0.0f, 4.0f);
  const auto& ref = kern::scalar_ops();
  for (const auto* impl : kern::available()) {
    std::vector<float> ya(n, 0.5f), yb(n, 0.5f);
    ref.sq_accum(x.data(), ya.data(), n);
    impl->sq_accum(x.data(), yb.data(), n);
    CHECK(max_rel_diff(ya.data(), yb.data(), n) < 1e-6);

    ya.assign(n, 0.25f); yb.assign(n, 0.25f);
    ref.mul_accum(x.data(), g.data(), ya.data(), n);
    impl->mul_accum(x.data(), g.data(), yb.data(), n);
    CHECK(max_rel_diff(ya.data(), yb.data(), n) < 1e-6);

    ref.norm_inv(ss.data(), 1e-12f, ya.data(), n);
    impl->norm_inv(ss.data(), 1e-12f, yb.data(), n);
    CHECK(max_rel_diff(ya.data(), yb.data(), n) < 1e-5);

    std::vector<float> pa = x, pb = x, va(n, 0.1f), vb(n, 0.1f);
    ref.sgd_step(pa.data(), va.data(), g.data(), 0.4f, 0.9f, 1e-4f, n);
    impl->sgd_step(pb.data(), vb.data(), g.data(), 0.4f, 0.9f, 1e-4f, n);
    CHECK(max_rel_diff(pa.data(), pb.data(), n) < 1e-5);
    CHECK(max_rel_diff(va.data(), vb.data(), n) < 1e-5);
  }
}

TEST_CASE("kernel results are reproducible across repeated calls") {
  Rng rng(5);
  const int64_t m = 45, n = 77, k = 33;
  auto a = random_vec(rng, m * k);
  auto b = random_vec(rng, k * n);
  for (const auto* impl : kern::available()) {
    std::vector<float> c1(m * n), c2(m * n);
    impl->gemm_nn(a.data(), b.data(), c1.data(), m, n, k, false);
    impl->gemm_nn(a.data(), b.data(), c2.data(), m, n, k, false);
    CHECK(max_abs_diff(c1.data(), c2.data(), m * n) == 0.0);
  }
}
