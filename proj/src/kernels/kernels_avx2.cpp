#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "hfrec/kernels.hpp"
#include "hfrec/parallel.hpp"

// AVX2+FMA kernels. Compiled with -mavx2 -mfma; only reachable through the
// dispatch table after a cpuid check. Accumulation order per output element is
// fixed (k ascending, lane order fixed), so results are bitwise reproducible
// for any thread count.

namespace hfrec::kern {
namespace {

inline double hsum4(__m256d v) {
  // fixed combination order: (l0+l1) + (l2+l3)
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(s) + _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
}

inline float hmax8(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  __m128 m = _mm_max_ps(lo, hi);
  m = _mm_max_ps(m, _mm_movehl_ps(m, m));
  m = _mm_max_ss(m, _mm_shuffle_ps(m, m, 1));
  return _mm_cvtss_f32(m);
}

inline float hsum8f(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  __m128 s = _mm_add_ps(lo, hi);
  s = _mm_add_ps(s, _mm_movehl_ps(s, s));
  s = _mm_add_ss(s, _mm_shuffle_ps(s, s, 1));
  return _mm_cvtss_f32(s);
}

// ---- gemm helpers ----------------------------------------------------------
// 4x16 register-tiled kernel, full-K inner loop. b is indexed with row stride
// ldb and an optional row gather for the transposed-A case.

template <bool kAccum>
inline void micro_4x16_nn(const float* a0, const float* a1, const float* a2, const float* a3,
                          const float* b, int64_t ldb, int64_t k, float* c, int64_t ldc) {
  __m256 acc[4][2];
  for (int r = 0; r < 4; ++r) {
    if (kAccum) {
      acc[r][0] = _mm256_loadu_ps(c + r * ldc);
      acc[r][1] = _mm256_loadu_ps(c + r * ldc + 8);
    } else {
      acc[r][0] = _mm256_setzero_ps();
      acc[r][1] = _mm256_setzero_ps();
    }
  }
  const float* arow[4] = {a0, a1, a2, a3};
  for (int64_t p = 0; p < k; ++p) {
    const __m256 b0 = _mm256_loadu_ps(b + p * ldb);
    const __m256 b1 = _mm256_loadu_ps(b + p * ldb + 8);
    for (int r = 0; r < 4; ++r) {
      const __m256 av = _mm256_set1_ps(arow[r][p]);
      acc[r][0] = _mm256_fmadd_ps(av, b0, acc[r][0]);
      acc[r][1] = _mm256_fmadd_ps(av, b1, acc[r][1]);
    }
  }
  for (int r = 0; r < 4; ++r) {
    _mm256_storeu_ps(c + r * ldc, acc[r][0]);
    _mm256_storeu_ps(c + r * ldc + 8, acc[r][1]);
  }
}

// Generic edge: rows < 4 or cols < 16, scalar-in-k with FMA over col vectors
// is not worth it; do a plain loop matching scalar accumulation order.
inline void edge_nn(const float* a, int64_t lda_row_stride, const float* b, int64_t ldb,
                    float* c, int64_t ldc, int64_t rows, int64_t cols, int64_t k, bool accum,
                    bool a_transposed, int64_t a_col_stride) {
  for (int64_t r = 0; r < rows; ++r) {
    for (int64_t j = 0; j < cols; ++j) {
      float acc = accum ? c[r * ldc + j] : 0.0f;
      for (int64_t p = 0; p < k; ++p) {
        const float av = a_transposed ? a[p * a_col_stride + r] : a[r * lda_row_stride + p];
        acc += av * b[p * ldb + j];
      }
      c[r * ldc + j] = acc;
    }
  }
}

void v_gemm_nn(const float* a, const float* b, float* c, int64_t m, int64_t n, int64_t k,
               bool accumulate) {
  const int64_t nb = n / 16 * 16;
  const int64_t mb = m / 4 * 4;
  const int64_t blocks = mb / 4;
  // Each worker takes a contiguous panel of row-blocks and sweeps column tiles
  // inside it, keeping the active 16-column slab of b cache-resident.
  parallel_for(blocks, 32, [&](int64_t rb0, int64_t rb1) {
    for (int64_t n0 = 0; n0 < nb; n0 += 16) {
      for (int64_t rb = rb0; rb < rb1; ++rb) {
        const int64_t i = rb * 4;
        const float* ar = a + i * k;
        if (accumulate)
          micro_4x16_nn<true>(ar, ar + k, ar + 2 * k, ar + 3 * k, b + n0, n, k, c + i * n + n0, n);
        else
          micro_4x16_nn<false>(ar, ar + k, ar + 2 * k, ar + 3 * k, b + n0, n, k, c + i * n + n0, n);
      }
    }
    if (n > nb)
      edge_nn(a + rb0 * 4 * k, k, b + nb, n, c + rb0 * 4 * n + nb, n, (rb1 - rb0) * 4, n - nb, k,
              accumulate, false, 0);
  });
  if (m > mb) edge_nn(a + mb * k, k, b, n, c + mb * n, n, m - mb, n, k, accumulate, false, 0);
}

void v_gemm_tn(const float* a, const float* b, float* c, int64_t m, int64_t n, int64_t k,
               bool accumulate) {
  const int64_t nb = n / 16 * 16;
  const int64_t mb = m / 4 * 4;
  const int64_t blocks = mb / 4;
  parallel_for(blocks, 32, [&](int64_t rb0, int64_t rb1) {
    for (int64_t n0 = 0; n0 < nb; n0 += 16) {
      for (int64_t rb = rb0; rb < rb1; ++rb) {
        const int64_t i = rb * 4;
        __m256 acc[4][2];
        for (int r = 0; r < 4; ++r) {
          if (accumulate) {
            acc[r][0] = _mm256_loadu_ps(c + (i + r) * n + n0);
            acc[r][1] = _mm256_loadu_ps(c + (i + r) * n + n0 + 8);
          } else {
            acc[r][0] = _mm256_setzero_ps();
            acc[r][1] = _mm256_setzero_ps();
          }
        }
        for (int64_t p = 0; p < k; ++p) {
          const __m256 b0 = _mm256_loadu_ps(b + p * n + n0);
          const __m256 b1 = _mm256_loadu_ps(b + p * n + n0 + 8);
          const float* acol = a + p * m + i;
          for (int r = 0; r < 4; ++r) {
            const __m256 av = _mm256_set1_ps(acol[r]);
            acc[r][0] = _mm256_fmadd_ps(av, b0, acc[r][0]);
            acc[r][1] = _mm256_fmadd_ps(av, b1, acc[r][1]);
          }
        }
        for (int r = 0; r < 4; ++r) {
          _mm256_storeu_ps(c + (i + r) * n + n0, acc[r][0]);
          _mm256_storeu_ps(c + (i + r) * n + n0 + 8, acc[r][1]);
        }
      }
    }
    if (n > nb)
      edge_nn(a + rb0 * 4, 0, b + nb, n, c + rb0 * 4 * n + nb, n, (rb1 - rb0) * 4, n - nb, k,
              accumulate, true, m);
  });
  if (m > mb) edge_nn(a + mb, 0, b, n, c + mb * n, n, m - mb, n, k, accumulate, true, m);
}

void v_gemm_nt(const float* a, const float* b, float* c, int64_t m, int64_t n, int64_t k,
               bool accumulate) {
  const int64_t kb = k / 8 * 8;
  parallel_for(m, 4, [&](int64_t m0, int64_t m1) {
    for (int64_t i = m0; i < m1; ++i) {
      const float* arow = a + i * k;
      float* crow = c + i * n;
      int64_t j = 0;
      for (; j + 4 <= n; j += 4) {
        __m256 acc0 = _mm256_setzero_ps(), acc1 = _mm256_setzero_ps();
        __m256 acc2 = _mm256_setzero_ps(), acc3 = _mm256_setzero_ps();
        const float* b0 = b + j * k;
        const float* b1 = b0 + k;
        const float* b2 = b1 + k;
        const float* b3 = b2 + k;
        for (int64_t p = 0; p < kb; p += 8) {
          const __m256 av = _mm256_loadu_ps(arow + p);
          acc0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b0 + p), acc0);
          acc1 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b1 + p), acc1);
          acc2 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b2 + p), acc2);
          acc3 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b3 + p), acc3);
        }
        float s0 = hsum8f(acc0), s1 = hsum8f(acc1), s2 = hsum8f(acc2), s3 = hsum8f(acc3);
        for (int64_t p = kb; p < k; ++p) {
          s0 += arow[p] * b0[p];
          s1 += arow[p] * b1[p];
          s2 += arow[p] * b2[p];
          s3 += arow[p] * b3[p];
        }
        if (accumulate) {
          crow[j] += s0; crow[j + 1] += s1; crow[j + 2] += s2; crow[j + 3] += s3;
        } else {
          crow[j] = s0; crow[j + 1] = s1; crow[j + 2] = s2; crow[j + 3] = s3;
        }
      }
      for (; j < n; ++j) {
        const float* brow = b + j * k;
        __m256 acc = _mm256_setzero_ps();
        for (int64_t p = 0; p < kb; p += 8)
          acc = _mm256_fmadd_ps(_mm256_loadu_ps(arow + p), _mm256_loadu_ps(brow + p), acc);
        float s = hsum8f(acc);
        for (int64_t p = kb; p < k; ++p) s += arow[p] * brow[p];
        crow[j] = accumulate ? crow[j] + s : s;
      }
    }
  });
}

// ---- elementwise -----------------------------------------------------------

void v_add(const float* a, const float* b, float* y, int64_t n) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) y[i] = a[i] + b[i];
}

void v_sub(const float* a, const float* b, float* y, int64_t n) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) y[i] = a[i] - b[i];
}

void v_mul(const float* a, const float* b, float* y, int64_t n) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) y[i] = a[i] * b[i];
}

void v_axpy(float alpha, const float* x, float* y, int64_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void v_scale(const float* x, float alpha, float* y, int64_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, _mm256_mul_ps(va, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) y[i] = alpha * x[i];
}

void v_affine(const float* x, float a, float b, float* y, int64_t n) {
  const __m256 va = _mm256_set1_ps(a);
  const __m256 vb = _mm256_set1_ps(b);
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), vb));
  for (; i < n; ++i) y[i] = a * x[i] + b;
}

void v_relu(const float* x, float* y, int64_t n) {
  const __m256 zero = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, _mm256_max_ps(zero, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void v_leaky_relu(const float* x, float slope, float* y, int64_t n) {
  const __m256 vs = _mm256_set1_ps(slope);
  const __m256 zero = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_loadu_ps(x + i);
    const __m256 neg = _mm256_mul_ps(vs, v);
    _mm256_storeu_ps(y + i, _mm256_blendv_ps(neg, v, _mm256_cmp_ps(v, zero, _CMP_GT_OQ)));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : slope * x[i];
}

void v_leaky_relu_grad(const float* x, const float* dy, float slope, float* dx, int64_t n) {
  const __m256 vs = _mm256_set1_ps(slope);
  const __m256 zero = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 vx = _mm256_loadu_ps(x + i);
    const __m256 vdy = _mm256_loadu_ps(dy + i);
    const __m256 neg = _mm256_mul_ps(vs, vdy);
    _mm256_storeu_ps(dx + i, _mm256_blendv_ps(neg, vdy, _mm256_cmp_ps(vx, zero, _CMP_GT_OQ)));
  }
  for (; i < n; ++i) dx[i] = x[i] > 0.0f ? dy[i] : slope * dy[i];
}

// ---- reductions (double accumulators) --------------------------------------

double v_sum(const float* x, int64_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_loadu_ps(x + i);
    acc0 = _mm256_add_pd(acc0, _mm256_cvtps_pd(_mm256_castps256_ps128(v)));
    acc1 = _mm256_add_pd(acc1, _mm256_cvtps_pd(_mm256_extractf128_ps(v, 1)));
  }
  double s = hsum4(acc0) + hsum4(acc1);
  for (; i < n; ++i) s += x[i];
  return s;
}

double v_sumsq_diff(const float* x, float mean, int64_t n) {
  const __m256d vm = _mm256_set1_pd(static_cast<double>(mean));
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_loadu_ps(x + i);
    const __m256d d0 = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(v)), vm);
    const __m256d d1 = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(v, 1)), vm);
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  double s = hsum4(acc0) + hsum4(acc1);
  for (; i < n; ++i) {
    const double d = static_cast<double>(x[i]) - static_cast<double>(mean);
    s += d * d;
  }
  return s;
}

double v_dot(const float* a, const float* b, int64_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 va = _mm256_loadu_ps(a + i);
    const __m256 vb = _mm256_loadu_ps(b + i);
    acc0 = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(va)),
                           _mm256_cvtps_pd(_mm256_castps256_ps128(vb)), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(va, 1)),
                           _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1)), acc1);
  }
  double s = hsum4(acc0) + hsum4(acc1);
  for (; i < n; ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

float v_max(const float* x, int64_t n) {
  if (n < 8) {
    float m = x[0];
    for (int64_t i = 1; i < n; ++i) m = std::max(m, x[i]);
    return m;
  }
  __m256 acc = _mm256_loadu_ps(x);
  int64_t i = 8;
  for (; i + 8 <= n; i += 8) acc = _mm256_max_ps(acc, _mm256_loadu_ps(x + i));
  float m = hmax8(acc);
  for (; i < n; ++i) m = std::max(m, x[i]);
  return m;
}

void v_sq_accum(const float* x, float* acc, int64_t n) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_loadu_ps(x + i);
    _mm256_storeu_ps(acc + i, _mm256_fmadd_ps(v, v, _mm256_loadu_ps(acc + i)));
  }
  for (; i < n; ++i) acc[i] += x[i] * x[i];
}

void v_mul_accum(const float* a, const float* b, float* acc, int64_t n) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(acc + i, _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i),
                                              _mm256_loadu_ps(acc + i)));
  }
  for (; i < n; ++i) acc[i] += a[i] * b[i];
}

void v_norm_inv(const float* ss, float eps, float* inv, int64_t n) {
  const __m256 veps = _mm256_set1_ps(eps);
  const __m256 one = _mm256_set1_ps(1.0f);
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 root = _mm256_sqrt_ps(_mm256_loadu_ps(ss + i));
    _mm256_storeu_ps(inv + i, _mm256_div_ps(one, _mm256_add_ps(root, veps)));
  }
  for (; i < n; ++i) inv[i] = 1.0f / (std::sqrt(ss[i]) + eps);
}

void v_half_sq_diff(const float* a, const float* b, float* y, int64_t n) {
  const __m256 half = _mm256_set1_ps(0.5f);
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 d = _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
    _mm256_storeu_ps(y + i, _mm256_mul_ps(half, _mm256_mul_ps(d, d)));
  }
  for (; i < n; ++i) {
    const float d = a[i] - b[i];
    y[i] = 0.5f * d * d;
  }
}

void v_sgd_step(float* p, float* v, const float* g, float lr, float mu, float wd, int64_t n) {
  const __m256 vmu = _mm256_set1_ps(mu);
  const __m256 vwd = _mm256_set1_ps(wd);
  const __m256 vlr = _mm256_set1_ps(-lr);
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 vp = _mm256_loadu_ps(p + i);
    const __m256 vg = _mm256_fmadd_ps(vwd, vp, _mm256_loadu_ps(g + i));
    const __m256 vv = _mm256_fmadd_ps(vmu, _mm256_loadu_ps(v + i), vg);
    _mm256_storeu_ps(v + i, vv);
    _mm256_storeu_ps(p + i, _mm256_fmadd_ps(vlr, vv, vp));
  }
  for (; i < n; ++i) {
    v[i] = mu * v[i] + g[i] + wd * p[i];
    p[i] -= lr * v[i];
  }
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops ops = {
      "avx2",
      v_gemm_nn, v_gemm_nt, v_gemm_tn,
      v_add, v_sub, v_mul, v_axpy, v_scale, v_affine,
      v_relu, v_leaky_relu, v_leaky_relu_grad,
      v_sum, v_sumsq_diff, v_dot, v_max,
      v_sq_accum, v_mul_accum, v_norm_inv, v_half_sq_diff,
      v_sgd_step,
  };
  return ops;
}

}  // namespace hfrec::kern
