#include "p3rnn/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

#if defined(__x86_64__) || defined(__i386__)
#define P3RNN_X86 1
#include <immintrin.h>
#else
#define P3RNN_X86 0
#endif

namespace p3rnn::kern {

// ---------------------------------------------------------------- scalar ---

namespace ref {

static double dot(const double* x, const double* y, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

static void axpy(double a, const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

static void vm_acc(const double* v, const Mat& W, double* out) {
    for (size_t r = 0; r < W.rows; ++r) axpy(v[r], W.row(r), out, W.cols);
}

static void mv_rows(const Mat& W, const double* v, double* out) {
    for (size_t r = 0; r < W.rows; ++r) out[r] = dot(W.row(r), v, W.cols);
}

static void outer_acc(Mat& A, const double* u, const double* v) {
    for (size_t r = 0; r < A.rows; ++r) axpy(u[r], v, A.row(r), A.cols);
}

static double l1_norm(const double* x, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += std::fabs(x[i]);
    return s;
}

static void nadam_update(double* theta, const double* g, double* m, double* v, size_t n,
                         double lr, double beta1, double beta2, double eps,
                         double pow_b1_t, double pow_b1_t1, double pow_b2_t) {
    const double cm = 1.0 - pow_b1_t1;
    const double cg = 1.0 - pow_b1_t;
    const double cv = 1.0 - pow_b2_t;
    for (size_t i = 0; i < n; ++i) {
        const double gi = g[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
        v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
        const double mhat = m[i] / cm;
        const double ghat = gi / cg;
        const double vhat = v[i] / cv;
        theta[i] -= lr * (beta1 * mhat + (1.0 - beta1) * ghat) / (std::sqrt(vhat) + eps);
    }
}

} // namespace ref

// ----------------------------------------------------------------- avx2 ---

#if P3RNN_X86

#define P3RNN_AVX2 __attribute__((target("avx2,fma")))

namespace avx2 {

P3RNN_AVX2 static inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

P3RNN_AVX2 static double dot(const double* x, const double* y, size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

P3RNN_AVX2 static void axpy(double a, const double* x, double* y, size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

P3RNN_AVX2 static void vm_acc(const double* v, const Mat& W, double* out) {
    for (size_t r = 0; r < W.rows; ++r) axpy(v[r], W.row(r), out, W.cols);
}

P3RNN_AVX2 static void mv_rows(const Mat& W, const double* v, double* out) {
    for (size_t r = 0; r < W.rows; ++r) out[r] = dot(W.row(r), v, W.cols);
}

P3RNN_AVX2 static void outer_acc(Mat& A, const double* u, const double* v) {
    for (size_t r = 0; r < A.rows; ++r) axpy(u[r], v, A.row(r), A.cols);
}

P3RNN_AVX2 static double l1_norm(const double* x, size_t n) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(x + i)));
    double s = hsum(acc);
    for (; i < n; ++i) s += std::fabs(x[i]);
    return s;
}

P3RNN_AVX2 static void nadam_update(double* theta, const double* g, double* m, double* v, size_t n,
                                    double lr, double beta1, double beta2, double eps,
                                    double pow_b1_t, double pow_b1_t1, double pow_b2_t) {
    const __m256d vb1 = _mm256_set1_pd(beta1);
    const __m256d vb2 = _mm256_set1_pd(beta2);
    const __m256d v1mb1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d v1mb2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d vcm = _mm256_set1_pd(1.0 - pow_b1_t1);
    const __m256d vcg = _mm256_set1_pd(1.0 - pow_b1_t);
    const __m256d vcv = _mm256_set1_pd(1.0 - pow_b2_t);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d veps = _mm256_set1_pd(eps);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vg = _mm256_loadu_pd(g + i);
        __m256d vm = _mm256_loadu_pd(m + i);
        __m256d vv = _mm256_loadu_pd(v + i);
        vm = _mm256_fmadd_pd(vb1, vm, _mm256_mul_pd(v1mb1, vg));
        vv = _mm256_fmadd_pd(vb2, vv, _mm256_mul_pd(v1mb2, _mm256_mul_pd(vg, vg)));
        _mm256_storeu_pd(m + i, vm);
        _mm256_storeu_pd(v + i, vv);
        const __m256d mhat = _mm256_div_pd(vm, vcm);
        const __m256d ghat = _mm256_div_pd(vg, vcg);
        const __m256d vhat = _mm256_div_pd(vv, vcv);
        const __m256d num =
            _mm256_fmadd_pd(vb1, mhat, _mm256_mul_pd(v1mb1, ghat));
        const __m256d den = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
        __m256d vt = _mm256_loadu_pd(theta + i);
        vt = _mm256_sub_pd(vt, _mm256_mul_pd(vlr, _mm256_div_pd(num, den)));
        _mm256_storeu_pd(theta + i, vt);
    }
    if (i < n)
        ref::nadam_update(theta + i, g + i, m + i, v + i, n - i, lr, beta1, beta2, eps,
                          pow_b1_t, pow_b1_t1, pow_b2_t);
}

} // namespace avx2

#endif // P3RNN_X86

// -------------------------------------------------------------- dispatch ---

namespace {

struct Table {
    double (*dot)(const double*, const double*, size_t);
    void (*axpy)(double, const double*, double*, size_t);
    void (*vm_acc)(const double*, const Mat&, double*);
    void (*mv_rows)(const Mat&, const double*, double*);
    void (*outer_acc)(Mat&, const double*, const double*);
    double (*l1_norm)(const double*, size_t);
    void (*nadam)(double*, const double*, double*, double*, size_t, double, double, double,
                  double, double, double, double);
};

constexpr Table kScalar = {ref::dot, ref::axpy, ref::vm_acc, ref::mv_rows,
                           ref::outer_acc, ref::l1_norm, ref::nadam_update};

#if P3RNN_X86
constexpr Table kAvx2 = {avx2::dot, avx2::axpy, avx2::vm_acc, avx2::mv_rows,
                         avx2::outer_acc, avx2::l1_norm, avx2::nadam_update};
#endif

bool avx2_supported() {
#if P3RNN_X86
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa pick_default() {
    if (const char* e = std::getenv("P3RNN_ISA")) {
        if (std::strcmp(e, "scalar") == 0) return Isa::scalar;
        if (std::strcmp(e, "avx2") == 0 && avx2_supported()) return Isa::avx2;
        return Isa::scalar;
    }
    return avx2_supported() ? Isa::avx2 : Isa::scalar;
}

struct State {
    Isa isa;
    const Table* tab;
};

State& state() {
    static State st = [] {
        State s;
        s.isa = pick_default();
#if P3RNN_X86
        s.tab = (s.isa == Isa::avx2) ? &kAvx2 : &kScalar;
#else
        s.tab = &kScalar;
#endif
        return s;
    }();
    return st;
}

} // namespace

void set_isa(Isa isa) {
    if (isa == Isa::avx2 && !avx2_supported()) isa = Isa::scalar;
    State& st = state();
    st.isa = isa;
#if P3RNN_X86
    st.tab = (isa == Isa::avx2) ? &kAvx2 : &kScalar;
#else
    st.tab = &kScalar;
#endif
}

Isa active_isa() { return state().isa; }

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

double dot(const double* x, const double* y, size_t n) { return state().tab->dot(x, y, n); }
void axpy(double a, const double* x, double* y, size_t n) { state().tab->axpy(a, x, y, n); }
void vm_acc(const double* v, const Mat& W, double* out) { state().tab->vm_acc(v, W, out); }
void mv_rows(const Mat& W, const double* v, double* out) { state().tab->mv_rows(W, v, out); }
void outer_acc(Mat& A, const double* u, const double* v) { state().tab->outer_acc(A, u, v); }
double l1_norm(const double* x, size_t n) { return state().tab->l1_norm(x, n); }
void nadam_update(double* theta, const double* g, double* m, double* v, size_t n, double lr,
                  double beta1, double beta2, double eps, double pow_b1_t, double pow_b1_t1,
                  double pow_b2_t) {
    state().tab->nadam(theta, g, m, v, n, lr, beta1, beta2, eps, pow_b1_t, pow_b1_t1, pow_b2_t);
}

} // namespace p3rnn::kern
