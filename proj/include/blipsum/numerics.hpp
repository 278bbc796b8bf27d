// numerics.hpp — Small numerical utilities: compensated summation, Gauss-Legendre
// rules, a keyed counter RNG for reproducible parallel streams, local cubic
// interpolation and adaptive Simpson quadrature.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace blipsum::num {

// Kahan compensated accumulator. Drop-in for += / value() reads.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double value) {
        const double y = value - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

// Sums a span with compensation, in index order.
double kahan_total(std::span<const double> values);

struct QuadratureRule {
    std::vector<double> nodes;    // on [0,1]
    std::vector<double> weights;  // sum to 1
};

// Gauss-Legendre rule mapped to [0,1]. Cached per point count; thread-safe.
const QuadratureRule& gauss_legendre_01(int points);

// ---- keyed counter RNG -----------------------------------------------------
//
// Stateless 64-bit mixer (splitmix64 finalizer). Streams are derived purely
// from (seed, lane indices), so any work partition reproduces the same draws.

std::uint64_t mix64(std::uint64_t x);

// Combines seed and up to four lane indices into one key.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                         std::uint64_t c = 0, std::uint64_t d = 0);

// Uniform double in [0,1) from a key (53 mantissa bits).
double uniform01(std::uint64_t key);

// ---- interpolation ----------------------------------------------------------

// Local cubic (4-point Lagrange) interpolation on a strictly increasing grid.
// `hint` caches the last interval index for sequential access patterns.
double interp_cubic(std::span<const double> xs, std::span<const double> ys, double x,
                    std::size_t* hint = nullptr);

// ---- adaptive Simpson -------------------------------------------------------

// Globally adaptive Simpson with interval-halving error control.
// Returns the integral of f over [a,b]; sets *converged to false when the
// depth limit was hit before reaching abs_tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth, bool* converged);

// ---- deterministic parallel blocks ------------------------------------------

// Runs fn(block_index) for block_index in [0, n_blocks) on up to `threads`
// workers (0 = hardware concurrency). Each block must write only its own
// slot so that results are independent of the schedule.
void parallel_blocks(std::int64_t n_blocks, int threads,
                     const std::function<void(std::int64_t)>& fn);

// Evenly spaced grid from 0 to t_max inclusive.
std::vector<double> linspace0(double t_max, int points);

}  // namespace blipsum::num
