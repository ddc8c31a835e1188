#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

#ifndef EIGEN_DONT_PARALLELIZE
#define EIGEN_DONT_PARALLELIZE
#endif
#include <Eigen/Dense>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace berezin {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

/// Environment variable holding the worker-thread count.
inline constexpr const char* threads_env = "BEREZIN_THREADS";

inline int& thread_override() {
    static int n = 0;
    return n;
}

inline int thread_count() {
    if (thread_override() > 0) return thread_override();
    if (const char* s = std::getenv(threads_env)) {
        int n = std::atoi(s);
        if (n > 0) return n;
    }
#ifdef _OPENMP
    return omp_get_num_procs();
#else
    return 1;
#endif
}

inline void set_thread_count(int n) { thread_override() = n; }

/// Runs f(i) for i in [0, n). Iterations must be independent; each one
/// writes only its own outputs, so results do not depend on the schedule.
/// The exception of the lowest failing index is rethrown.
template <class F>
void parallel_for(std::ptrdiff_t n, F&& f) {
#ifdef _OPENMP
    const int nt = std::max(1, std::min<int>(thread_count(), static_cast<int>(std::max<std::ptrdiff_t>(n, 1))));
    std::exception_ptr err;
    std::ptrdiff_t err_index = n;
#pragma omp parallel for schedule(static) num_threads(nt)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            f(i);
        } catch (...) {
#pragma omp critical(berezin_parallel_error)
            if (i < err_index) {
                err_index = i;
                err = std::current_exception();
            }
        }
    }
    if (err) std::rethrow_exception(err);
#else
    for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
#endif
}

/// Short scientific rendering for messages.
inline std::string fmt_g(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

/// Pairwise summation over a fixed ordering.
template <class T>
T tree_sum(const T* x, std::size_t n) {
    if (n == 0) return T(0);
    if (n <= 8) {
        T s(0);
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t h = n / 2;
    return tree_sum(x, h) + tree_sum(x + h, n - h);
}

template <class T>
T tree_sum(const std::vector<T>& v) {
    return tree_sum(v.data(), v.size());
}

inline bool is_integer(double r) { return std::abs(r - std::round(r)) < 1e-13 && std::abs(r) <= 256; }

/// base^r on the principal branch. Integer exponents use repeated squaring.
inline cplx kpow(cplx base, double r) {
    if (is_integer(r)) {
        long n = std::lround(r);
        bool inv = n < 0;
        unsigned long m = static_cast<unsigned long>(inv ? -n : n);
        cplx acc(1.0, 0.0), b = base;
        while (m) {
            if (m & 1UL) acc *= b;
            b *= b;
            m >>= 1;
        }
        return inv ? 1.0 / acc : acc;
    }
    return std::pow(base, r);
}

inline double rpow(double base, double r) {
    if (is_integer(r)) {
        long n = std::lround(r);
        bool inv = n < 0;
        unsigned long m = static_cast<unsigned long>(inv ? -n : n);
        double acc = 1.0, b = base;
        while (m) {
            if (m & 1UL) acc *= b;
            b *= b;
            m >>= 1;
        }
        return inv ? 1.0 / acc : acc;
    }
    return std::pow(base, r);
}

/// A*B computed in fixed row blocks. Block boundaries do not depend on the
/// thread count, so the result is bitwise reproducible.
inline Eigen::MatrixXcd blocked_product(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
    constexpr Eigen::Index block = 64;
    Eigen::MatrixXcd C(A.rows(), B.cols());
    const Eigen::Index nb = (A.rows() + block - 1) / block;
    parallel_for(nb, [&](std::ptrdiff_t k) {
        const Eigen::Index r0 = k * block;
        const Eigen::Index rows = std::min(block, A.rows() - r0);
        C.middleRows(r0, rows).noalias() = A.middleRows(r0, rows) * B;
    });
    return C;
}

struct Estimate {
    double value = 0;
    double tail = 0;
};

struct ComplexEstimate {
    cplx value{0, 0};
    double tail = 0;
};

}  // namespace berezin
