#include "blipsum/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <atomic>

#include "blipsum/errors.hpp"

namespace blipsum::num {

double kahan_total(std::span<const double> values) {
    KahanSum acc;
    for (double v : values) acc.add(v);
    return acc.value();
}

namespace {

// Legendre nodes on (-1,1) by Newton iteration on P_n (standard recurrence).
QuadratureRule make_gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre_01: points must be >= 1");
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));  // Tricomi initial guess
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            if (n == 1) p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double pn = (n == 1) ? x : p1;
            pp = n * (x * pn - p0) / (x * x - 1.0);
            const double dx = pn / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        // map (-1,1) -> (0,1); weight 2/((1-x^2) pp^2) halved
        rule.nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);  // descending x -> ascending node
        rule.weights[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - x * x) * pp * pp);
    }
    std::reverse(rule.nodes.begin(), rule.nodes.end());
    std::reverse(rule.weights.begin(), rule.weights.end());
    return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre_01(int points) {
    static std::mutex mutex;
    static std::map<int, QuadratureRule> cache;
    std::scoped_lock lock(mutex);
    auto it = cache.find(points);
    if (it == cache.end()) it = cache.emplace(points, make_gauss_legendre(points)).first;
    return it->second;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                         std::uint64_t c, std::uint64_t d) {
    std::uint64_t k = mix64(seed ^ 0x243f6a8885a308d3ull);
    k = mix64(k ^ a);
    k = mix64(k ^ b);
    k = mix64(k ^ c);
    k = mix64(k ^ d);
    return k;
}

double uniform01(std::uint64_t key) {
    return static_cast<double>(key >> 11) * 0x1.0p-53;
}

double interp_cubic(std::span<const double> xs, std::span<const double> ys, double x,
                    std::size_t* hint) {
    const std::size_t n = xs.size();
    if (n < 2 || ys.size() != n) throw std::invalid_argument("interp_cubic: bad table");
    if (x < xs.front() || x > xs.back()) throw DomainError("interp_cubic: query outside grid");
    if (n == 2) {  // linear fallback for degenerate tables
        const double w = (x - xs[0]) / (xs[1] - xs[0]);
        return ys[0] + w * (ys[1] - ys[0]);
    }

    std::size_t i;
    if (hint && *hint + 1 < n && xs[*hint] <= x && x <= xs[*hint + 1]) {
        i = *hint;
    } else {
        i = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
        i = (i == 0) ? 0 : i - 1;
        if (i >= n - 1) i = n - 2;
        if (hint) *hint = i;
    }

    // 4-point stencil clamped to the grid
    std::size_t j0 = (i == 0) ? 0 : i - 1;
    if (j0 + 3 >= n) j0 = n - 4;

    double result = 0.0;
    for (std::size_t a = j0; a < j0 + 4; ++a) {
        double l = 1.0;
        for (std::size_t b = j0; b < j0 + 4; ++b) {
            if (a == b) continue;
            l *= (x - xs[b]) / (xs[a] - xs[b]);
        }
        result += l * ys[a];
    }
    return result;
}

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double fa,
                            double b, double fb, double m, double fm, double whole,
                            double tol, int depth, bool* converged) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(a, fa, m, fm, flm);
    const double right = simpson(m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth <= 0) {
        if (converged) *converged = false;
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, converged) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, converged);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth, bool* converged) {
    if (converged) *converged = true;
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = simpson(a, fa, b, fb, fm);
    return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth, converged);
}

void parallel_blocks(std::int64_t n_blocks, int threads,
                     const std::function<void(std::int64_t)>& fn) {
    if (n_blocks <= 0) return;
    int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = static_cast<int>(std::min<std::int64_t>(workers, n_blocks));

    if (workers == 1) {
        for (std::int64_t i = 0; i < n_blocks; ++i) fn(i);
        return;
    }

    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::int64_t i = next.fetch_add(1);
                if (i >= n_blocks) return;
                try {
                    fn(i);
                } catch (...) {
                    std::scoped_lock lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::vector<double> linspace0(double t_max, int points) {
    if (points < 1 || t_max < 0) throw std::invalid_argument("linspace0: bad grid request");
    std::vector<double> grid(static_cast<std::size_t>(points));
    if (points == 1) {
        grid[0] = 0.0;
        return grid;
    }
    for (int i = 0; i < points; ++i)
        grid[static_cast<std::size_t>(i)] = t_max * static_cast<double>(i) / (points - 1);
    return grid;
}

}  // namespace blipsum::num
