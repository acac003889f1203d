#include <algorithm>
#include <cmath>
#include <cstdint>

#include "hfrec/kernels.hpp"
#include "hfrec/parallel.hpp"

// Reference kernels. Plain loops, no platform assumptions; the SIMD variants
// are tested against these.

namespace hfrec::kern {
namespace {

constexpr int64_t kRedChunk = 4096;  // fixed reduction chunking, thread-count independent

void s_gemm_nn(const float* a, const float* b, float* c, int64_t m, int64_t n, int64_t k,
               bool accumulate) {
  parallel_for(m, 8, [&](int64_t r0, int64_t r1) {
    for (int64_t i = r0; i < r1; ++i) {
      float* crow = c + i * n;
      if (!accumulate) std::fill(crow, crow + n, 0.0f);
      const float* arow = a + i * k;
      for (int64_t p = 0; p < k; ++p) {
        const float av = arow[p];
        if (av == 0.0f) continue;
        const float* brow = b + p * n;
        for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  });
}

void s_gemm_nt(const float* a, const float* b, float* c, int64_t m, int64_t n, int64_t k,
               bool accumulate) {
  parallel_for(m, 8, [&](int64_t r0, int64_t r1) {
    for (int64_t i = r0; i < r1; ++i) {
      const float* arow = a + i * k;
      float* crow = c + i * n;
      for (int64_t j = 0; j < n; ++j) {
        const float* brow = b + j * k;
        float acc = 0.0f;
        for (int64_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
        crow[j] = accumulate ? crow[j] + acc : acc;
      }
    }
  });
}

void s_gemm_tn(const float* a, const float* b, float* c, int64_t m, int64_t n, int64_t k,
               bool accumulate) {
  parallel_for(m, 8, [&](int64_t r0, int64_t r1) {
    for (int64_t i = r0; i < r1; ++i) {
      float* crow = c + i * n;
      if (!accumulate) std::fill(crow, crow + n, 0.0f);
      for (int64_t p = 0; p < k; ++p) {
        const float av = a[p * m + i];
        if (av == 0.0f) continue;
        const float* brow = b + p * n;
        for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  });
}

void s_add(const float* a, const float* b, float* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

void s_sub(const float* a, const float* b, float* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = a[i] - b[i];
}

void s_mul(const float* a, const float* b, float* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

void s_axpy(float alpha, const float* x, float* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void s_scale(const float* x, float alpha, float* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = alpha * x[i];
}

void s_affine(const float* x, float a, float b, float* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = a * x[i] + b;
}

void s_relu(const float* x, float* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void s_leaky_relu(const float* x, float slope, float* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : slope * x[i];
}

void s_leaky_relu_grad(const float* x, const float* dy, float slope, float* dx, int64_t n) {
  for (int64_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0f ? dy[i] : slope * dy[i];
}

double chunked(int64_t n, double (*block)(const void*, int64_t, int64_t), const void* ctx) {
  double total = 0.0;
  for (int64_t i = 0; i < n; i += kRedChunk) total += block(ctx, i, std::min(i + kRedChunk, n));
  return total;
}

void s_sq_accum(const float* x, float* acc, int64_t n) {
  for (int64_t i = 0; i < n; ++i) acc[i] += x[i] * x[i];
}

void s_mul_accum(const float* a, const float* b, float* acc, int64_t n) {
  for (int64_t i = 0; i < n; ++i) acc[i] += a[i] * b[i];
}

double s_sum(const float* x, int64_t n) {
  struct Ctx { const float* x; } ctx{x};
  return chunked(n, [](const void* c, int64_t i0, int64_t i1) {
    const float* p = static_cast<const Ctx*>(c)->x;
    double s = 0.0;
    for (int64_t i = i0; i < i1; ++i) s += p[i];
    return s;
  }, &ctx);
}

double s_sumsq_diff(const float* x, float mean, int64_t n) {
  struct Ctx { const float* x; float m; } ctx{x, mean};
  return chunked(n, [](const void* c, int64_t i0, int64_t i1) {
    const auto* t = static_cast<const Ctx*>(c);
    double s = 0.0;
    for (int64_t i = i0; i < i1; ++i) {
      const double d = static_cast<double>(t->x[i]) - t->m;
      s += d * d;
    }
    return s;
  }, &ctx);
}

double s_dot(const float* a, const float* b, int64_t n) {
  struct Ctx { const float* a; const float* b; } ctx{a, b};
  return chunked(n, [](const void* c, int64_t i0, int64_t i1) {
    const auto* t = static_cast<const Ctx*>(c);
    double s = 0.0;
    for (int64_t i = i0; i < i1; ++i) s += static_cast<double>(t->a[i]) * t->b[i];
    return s;
  }, &ctx);
}

float s_max(const float* x, int64_t n) {
  float m = x[0];
  for (int64_t i = 1; i < n; ++i) m = std::max(m, x[i]);
  return m;
}

void s_norm_inv(const float* ss, float eps, float* inv, int64_t n) {
  for (int64_t i = 0; i < n; ++i) inv[i] = 1.0f / (std::sqrt(ss[i]) + eps);
}

void s_half_sq_diff(const float* a, const float* b, float* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) {
    const float d = a[i] - b[i];
    y[i] = 0.5f * d * d;
  }
}

void s_sgd_step(float* p, float* v, const float* g, float lr, float mu, float wd, int64_t n) {
  for (int64_t i = 0; i < n; ++i) {
    v[i] = mu * v[i] + g[i] + wd * p[i];
    p[i] -= lr * v[i];
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops = {
      "scalar",
      s_gemm_nn, s_gemm_nt, s_gemm_tn,
      s_add, s_sub, s_mul, s_axpy, s_scale, s_affine,
      s_relu, s_leaky_relu, s_leaky_relu_grad,
      s_sum, s_sumsq_diff, s_dot, s_max,
      s_sq_accum, s_mul_accum, s_norm_inv, s_half_sq_diff,
      s_sgd_step,
  };
  return ops;
}

}  // namespace hfrec::kern
