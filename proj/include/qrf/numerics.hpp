#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace qrf {

// ---------------------------------------------------------------------------
// Stable combinatorics
// ---------------------------------------------------------------------------

/// Natural log of the binomial coefficient C(n,k).
/// Returns -infinity for k < 0 or k > n (the conventional sentinel).
/// Evaluated in extended precision so that exp(log_binomial(n,k)) matches the
/// exact integer value to ~1e-13 relative even at n = 10^4.
inline double log_binomial(long long n, long long k) {
    if (n < 0) throw std::invalid_argument("log_binomial: n must be nonnegative");
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    if (k == 0 || k == n) return 0.0;
    const long double r = std::lgamma(static_cast<long double>(n) + 1.0L) -
                          std::lgamma(static_cast<long double>(k) + 1.0L) -
                          std::lgamma(static_cast<long double>(n - k) + 1.0L);
    return static_cast<double>(r);
}

/// ln(n!) in extended precision.
inline long double log_factorial(long long n) {
    if (n < 0) throw std::invalid_argument("log_factorial: n must be nonnegative");
    return std::lgamma(static_cast<long double>(n) + 1.0L);
}

/// Precomputed table of ln(i!) for i = 0..max_n, for hot loops that evaluate
/// many binomials with a known upper bound.
class LogFactorialTable {
  public:
    explicit LogFactorialTable(std::size_t max_n) : ln_(max_n + 1, 0.0L) {
        for (std::size_t i = 2; i <= max_n; ++i)
            ln_[i] = ln_[i - 1] + std::log(static_cast<long double>(i));
    }

    long double factorial(long long n) const { return ln_[static_cast<std::size_t>(n)]; }

    /// ln C(n,k); -inf out of range. n must be <= max_n.
    long double binomial(long long n, long long k) const {
        if (k < 0 || k > n) return -std::numeric_limits<long double>::infinity();
        return ln_[static_cast<std::size_t>(n)] - ln_[static_cast<std::size_t>(k)] -
               ln_[static_cast<std::size_t>(n - k)];
    }

    std::size_t max_n() const { return ln_.size() - 1; }

  private:
    std::vector<long double> ln_;
};

// ---------------------------------------------------------------------------
// Symmetric tridiagonal extreme eigenpairs
// ---------------------------------------------------------------------------

struct TridiagonalSymmetric {
    std::vector<double> diagonal;     // length n
    std::vector<double> offdiagonal;  // length n-1

    std::size_t dimension() const { return diagonal.size(); }

    void validate() const {
        if (diagonal.empty())
            throw std::invalid_argument("TridiagonalSymmetric: dimension must be >= 1");
        if (offdiagonal.size() + 1 != diagonal.size())
            throw std::invalid_argument("TridiagonalSymmetric: offdiagonal length must be n-1");
        for (double v : diagonal)
            if (!std::isfinite(v))
                throw std::invalid_argument("TridiagonalSymmetric: non-finite diagonal entry");
        for (double v : offdiagonal)
            if (!std::isfinite(v))
                throw std::invalid_argument("TridiagonalSymmetric: non-finite offdiagonal entry");
    }

    double inf_norm() const {
        double best = 0.0;
        const std::size_t n = dimension();
        for (std::size_t i = 0; i < n; ++i) {
            double row = std::abs(diagonal[i]);
            if (i > 0) row += std::abs(offdiagonal[i - 1]);
            if (i + 1 < n) row += std::abs(offdiagonal[i]);
            best = std::max(best, row);
        }
        return best;
    }
};

enum class WhichEigenpair { largest, smallest };

struct Eigenpair {
    double eigenvalue = 0.0;
    std::vector<double> eigenvector;
};

namespace detail {

// Number of eigenvalues of the block strictly less than x (Sturm count).
inline std::size_t sturm_count_less(const double* d, const double* e, std::size_t n, double x,
                                    double scale) {
    const double tiny = 1e-300 + scale * 1e-30;
    std::size_t count = 0;
    double q = d[0] - x;
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < n; ++i) {
        if (q == 0.0) q = tiny;
        q = (d[i] - x) - (e[i - 1] * e[i - 1]) / q;
        if (q < 0.0) ++count;
    }
    return count;
}

// Largest eigenvalue of an unreduced block by bisection on the Sturm count.
inline double largest_eigenvalue_bisect(const double* d, const double* e, std::size_t n) {
    double lo = d[0], hi = d[0];
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(e[i - 1]);
        if (i + 1 < n) r += std::abs(e[i]);
        lo = std::min(lo, d[i] - r);
        hi = std::max(hi, d[i] + r);
    }
    const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
    hi += scale * 1e-12;  // keep count(hi) == n even if lambda_max sits on the bound
    lo -= scale * 1e-12;
    for (int iter = 0; iter < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * scale;
         ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (sturm_count_less(d, e, n, mid, scale) >= n)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

// Solve (T - sigma I) w = rhs by Gaussian elimination with partial pivoting.
// The matrix is nearly singular by construction; pivoting keeps it stable and
// the large solution vector is exactly what inverse iteration wants.
inline void solve_shifted_tridiagonal(const double* d, const double* e, std::size_t n,
                                      double sigma, std::vector<double>& w) {
    std::vector<double> a(n), b(n > 1 ? n - 1 : 0), c(n > 1 ? n - 1 : 0), f(n > 2 ? n - 2 : 0, 0.0);
    for (std::size_t i = 0; i < n; ++i) a[i] = d[i] - sigma;
    for (std::size_t i = 0; i + 1 < n; ++i) b[i] = c[i] = e[i];
    const double tiny = 1e-300;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(c[i]) > std::abs(a[i])) {
            std::swap(a[i], c[i]);
            double bi = b[i];
            b[i] = a[i + 1];
            a[i + 1] = bi;
            if (i + 2 < n) {
                f[i] = b[i + 1];
                b[i + 1] = 0.0;
            }
            std::swap(w[i], w[i + 1]);
        }
        if (a[i] == 0.0) a[i] = tiny;
        const double m = c[i] / a[i];
        a[i + 1] -= m * b[i];
        if (i + 2 < n) b[i + 1] -= m * (i < f.size() ? f[i] : 0.0);
        w[i + 1] -= m * w[i];
    }
    if (a[n - 1] == 0.0) a[n - 1] = tiny;
    for (std::size_t ip = n; ip-- > 0;) {
        double s = w[ip];
        if (ip + 1 < n) s -= b[ip] * w[ip + 1];
        if (ip + 2 < n && ip < f.size()) s -= f[ip] * w[ip + 2];
        w[ip] = s / a[ip];
    }
}

inline void tridiagonal_apply(const double* d, const double* e, std::size_t n,
                              const std::vector<double>& v, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) {
        double s = d[i] * v[i];
        if (i > 0) s += e[i - 1] * v[i - 1];
        if (i + 1 < n) s += e[i] * v[i + 1];
        out[i] = s;
    }
}

// Largest eigenpair of an unreduced block: bisection + inverse iteration,
// polished with a Rayleigh quotient.
inline Eigenpair largest_eigenpair_block(const double* d, const double* e, std::size_t n) {
    Eigenpair out;
    if (n == 1) {
        out.eigenvalue = d[0];
        out.eigenvector = {1.0};
        return out;
    }
    const double lambda = largest_eigenvalue_bisect(d, e, n);
    const double norm = std::max(1.0, std::abs(lambda));

    // Deterministic pseudo-random start vector; an all-ones start can be
    // (near-)orthogonal to the wanted eigenvector for sign-alternating modes.
    std::uint64_t rng = 0x9e3779b97f4a7c15ull;
    auto next_unit = [&rng]() {
        rng ^= rng << 13;
        rng ^= rng >> 7;
        rng ^= rng << 17;
        return static_cast<double>(rng >> 11) / 9007199254740992.0 - 0.5;
    };
    std::vector<double> v(n);
    for (double& x : v) x = next_unit() + 1.0;  // biased positive, never the zero vector
    std::vector<double> tv(n);
    double best_resid = std::numeric_limits<double>::infinity();
    std::vector<double> best_v = v;
    double best_lambda = lambda;
    for (int iter = 0; iter < 12; ++iter) {
        solve_shifted_tridiagonal(d, e, n, lambda, v);
        double nrm = 0.0;
        for (double x : v) nrm += x * x;
        nrm = std::sqrt(nrm);
        if (!(nrm > 0.0) || !std::isfinite(nrm)) {
            for (double& x : v) x = next_unit();
            continue;
        }
        for (double& x : v) x /= nrm;
        tridiagonal_apply(d, e, n, v, tv);
        double rayleigh = 0.0;
        for (std::size_t i = 0; i < n; ++i) rayleigh += v[i] * tv[i];
        double resid = 0.0;
        for (std::size_t i = 0; i < n; ++i) resid = std::max(resid, std::abs(tv[i] - rayleigh * v[i]));
        if (resid < best_resid) {
            best_resid = resid;
            best_v = v;
            best_lambda = rayleigh;
        }
        if (best_resid <= 1e-14 * norm * static_cast<double>(n)) break;
        if (iter >= 3 && resid > 1e-10 * norm) {
            // stuck on a wrong invariant subspace; re-randomize
            for (double& x : v) x = next_unit();
        }
    }
    out.eigenvalue = best_lambda;
    out.eigenvector = std::move(best_v);
    return out;
}

}  // namespace detail

/// Extreme (largest or smallest) eigenpair of a symmetric tridiagonal matrix.
/// The eigenvector is unit-norm with its first nonzero entry positive.
inline Eigenpair extreme_eigenpair(const TridiagonalSymmetric& m, WhichEigenpair which) {
    m.validate();
    if (which == WhichEigenpair::smallest) {
        TridiagonalSymmetric neg = m;
        for (double& v : neg.diagonal) v = -v;
        for (double& v : neg.offdiagonal) v = -v;
        Eigenpair p = extreme_eigenpair(neg, WhichEigenpair::largest);
        p.eigenvalue = -p.eigenvalue;
        return p;
    }

    const std::size_t n = m.dimension();
    // Split at zero couplings: the matrix decouples into unreduced blocks.
    Eigenpair best;
    best.eigenvalue = -std::numeric_limits<double>::infinity();
    std::size_t best_start = 0;
    std::size_t start = 0;
    while (start < n) {
        std::size_t end = start;
        while (end + 1 < n && m.offdiagonal[end] != 0.0) ++end;
        Eigenpair p = detail::largest_eigenpair_block(m.diagonal.data() + start,
                                                      m.offdiagonal.data() + start, end - start + 1);
        if (p.eigenvalue > best.eigenvalue) {
            best = std::move(p);
            best_start = start;
        }
        start = end + 1;
    }

    Eigenpair out;
    out.eigenvalue = best.eigenvalue;
    out.eigenvector.assign(n, 0.0);
    for (std::size_t i = 0; i < best.eigenvector.size(); ++i)
        out.eigenvector[best_start + i] = best.eigenvector[i];

    double maxabs = 0.0;
    for (double v : out.eigenvector) maxabs = std::max(maxabs, std::abs(v));
    for (double v : out.eigenvector) {
        if (std::abs(v) > 1e-12 * maxabs) {
            if (v < 0.0)
                for (double& w : out.eigenvector) w = -w;
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Least squares
// ---------------------------------------------------------------------------

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
    std::size_t point_count = 0;
};

/// Ordinary least-squares line through (xs, ys).
inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size())
        throw std::invalid_argument("fit_line: xs and ys must have equal length");
    const std::size_t n = xs.size();
    if (n < 2) throw std::invalid_argument("fit_line: need at least two points");
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]))
            throw std::invalid_argument("fit_line: non-finite input");

    double xm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xm += xs[i];
        ym += ys[i];
    }
    xm /= static_cast<double>(n);
    ym /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - xm) * (xs[i] - xm);
        sxy += (xs[i] - xm) * (ys[i] - ym);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate xs (all equal)");

    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ym - fit.slope * xm;
    fit.point_count = n;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss += r * r;
    }
    fit.residual_rms = std::sqrt(ss / static_cast<double>(n));
    return fit;
}

// ---------------------------------------------------------------------------
// Probability vectors
// ---------------------------------------------------------------------------

/// Diagonal populations of a density matrix: entries in [-tol, 1+tol]
/// summing to 1.
struct ProbabilityVector {
    std::vector<double> entries;

    static constexpr double entry_tolerance = 1e-12;
    static constexpr double sum_tolerance = 1e-10;

    double sum() const {
        double s = 0.0;
        for (double v : entries) s += v;
        return s;
    }

    bool is_valid() const {
        if (entries.empty()) return false;
        for (double v : entries) {
            if (!std::isfinite(v)) return false;
            if (v < -entry_tolerance || v > 1.0 + entry_tolerance) return false;
        }
        return std::abs(sum() - 1.0) <= sum_tolerance;
    }

    void validate() const {
        if (!is_valid())
            throw std::invalid_argument("ProbabilityVector: entries outside [0,1] or sum != 1");
    }
};

}  // namespace qrf
