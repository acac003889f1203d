#pragma once

#include <cstdint>
#include <vector>

namespace hfrec::kern {

// Flat-array compute primitives. Every entry has a scalar reference
// implementation and may have SIMD variants; the active table is picked at
// startup from cpuid (HFREC_KERNELS=scalar|avx2 overrides).
//
// Determinism contract: for a fixed implementation, every output element is
// accumulated in a fixed order by exactly one caller thread, so results are
// bitwise reproducible regardless of thread count. Different implementations
// may differ by rounding; equivalence tests bound the difference.
struct Ops {
  const char* name;

  // Row-major matmuls. accumulate=false overwrites C.
  // nn: C[M,N] += A[M,K] * B[K,N]
  // nt: C[M,N] += A[M,K] * B[N,K]^T
  // tn: C[M,N] += A[K,M]^T * B[K,N]
  void (*gemm_nn)(const float* a, const float* b, float* c, int64_t m, int64_t n, int64_t k,
                  bool accumulate);
  void (*gemm_nt)(const float* a, const float* b, float* c, int64_t m, int64_t n, int64_t k,
                  bool accumulate);
  void (*gemm_tn)(const float* a, const float* b, float* c, int64_t m, int64_t n, int64_t k,
                  bool accumulate);

  void (*add)(const float* a, const float* b, float* y, int64_t n);
  void (*sub)(const float* a, const float* b, float* y, int64_t n);
  void (*mul)(const float* a, const float* b, float* y, int64_t n);
  void (*axpy)(float alpha, const float* x, float* y, int64_t n);   // y += alpha*x
  void (*scale)(const float* x, float alpha, float* y, int64_t n);  // y = alpha*x
  void (*affine)(const float* x, float a, float b, float* y, int64_t n);  // y = a*x + b

  void (*relu)(const float* x, float* y, int64_t n);
  void (*leaky_relu)(const float* x, float slope, float* y, int64_t n);
  // dx = dy * (x > 0 ? 1 : slope)
  void (*leaky_relu_grad)(const float* x, const float* dy, float slope, float* dx, int64_t n);

  // Reductions accumulate in double.
  double (*sum)(const float* x, int64_t n);
  double (*sumsq_diff)(const float* x, float mean, int64_t n);  // sum((x-mean)^2)
  double (*dot)(const float* a, const float* b, int64_t n);
  float (*max)(const float* x, int64_t n);

  void (*sq_accum)(const float* x, float* acc, int64_t n);                  // acc += x^2
  void (*mul_accum)(const float* a, const float* b, float* acc, int64_t n); // acc += a*b
  // inv = 1 / (sqrt(ss) + eps)
  void (*norm_inv)(const float* ss, float eps, float* inv, int64_t n);
  // y = 0.5 * (a - b)^2
  void (*half_sq_diff)(const float* a, const float* b, float* y, int64_t n);

  // v = mu*v + g + wd*p ; p -= lr*v
  void (*sgd_step)(float* p, float* v, const float* g, float lr, float mu, float wd, int64_t n);
};

const Ops& ops();               // active implementation
const Ops& scalar_ops();        // reference implementation
const Ops& avx2_ops();          // defined even if unsupported at runtime
bool avx2_supported();
std::vector<const Ops*> available();  // implementations runnable on this host

}  // namespace hfrec::kern
