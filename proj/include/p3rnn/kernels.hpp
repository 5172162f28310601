#pragma once

#include <cstddef>
#include <string>

#include "p3rnn/common.hpp"

namespace p3rnn::kern {

enum class Isa { scalar, avx2 };

// Selects the widest ISA the CPU supports (or honors P3RNN_ISA=scalar|avx2)
// on first use. set_isa() exists for the equivalence tests.
void set_isa(Isa isa);
Isa active_isa();
const char* isa_name(Isa isa);

double dot(const double* x, const double* y, size_t n);

// y += a * x
void axpy(double a, const double* x, double* y, size_t n);

// out[j] += sum_r v[r] * W[r][j]   (vector-matrix product, accumulating)
void vm_acc(const double* v, const Mat& W, double* out);

// out[r] = dot(W.row(r), v)
void mv_rows(const Mat& W, const double* v, double* out);

// A.row(r) += u[r] * v   (rank-1 update)
void outer_acc(Mat& A, const double* u, const double* v);

double l1_norm(const double* x, size_t n);

// One optimizer step over a flat parameter block; the bias-correction
// powers beta1^t, beta1^{t+1}, beta2^t are precomputed by the caller.
void nadam_update(double* theta, const double* g, double* m, double* v, size_t n,
                  double lr, double beta1, double beta2, double eps,
                  double pow_b1_t, double pow_b1_t1, double pow_b2_t);

} // namespace p3rnn::kern
