#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "qrf/matrix.hpp"
#include "qrf/numerics.hpp"

namespace qrf {

// ---------------------------------------------------------------------------
// Spin-j directional reference frame.
//
// States live on the (2j+1)-dimensional spin-j space and are indexed by
// x = j - m, so x = 0 is the maximal-weight (fully aligned) level. The frame
// is consumed by repeated optimal relative-orientation measurements of
// spin-1/2 probes; each use applies the outcome-averaged update map once.
// ---------------------------------------------------------------------------

namespace detail {
inline void require_two_j(int two_j) {
    if (two_j <= 0) throw std::invalid_argument("directional RF: twoJ must be a positive integer");
}
}  // namespace detail

/// The six Kraus operators of the optimal relative-orientation measurement,
/// stored as bands in the x basis. The off-diagonal pair is stored once;
/// the "-" outcome variants carry the opposite sign.
struct DirectionalKraus {
    int two_j = 0;
    std::vector<double> e00_plus;   // [E+00]_xx = (2j+1-x)/(2j+1)
    std::vector<double> e00_minus;  // [E-00]_xx = x/(2j+1)
    std::vector<double> e11_plus;   // [E+11]_xx = (x+1)/(2j+1)
    std::vector<double> e11_minus;  // [E-11]_xx = (2j-x)/(2j+1)
    std::vector<double> e01;        // [E+01]_{x,x-1} = sqrt(x(2j+1-x))/(2j+1), x = 1..2j

    std::size_t dimension() const { return static_cast<std::size_t>(two_j) + 1; }

    /// Reconstructs the joint-space projector (dimension 2(2j+1)) for the
    /// "+" (sign=+1) or "-" (sign=-1) outcome. Joint index is 2x + a with
    /// a in {0,1} the probe level.
    Matrix projector(int sign) const {
        const std::size_t d = dimension();
        Matrix pi(2 * d, 2 * d);
        const double s = sign >= 0 ? 1.0 : -1.0;
        for (std::size_t x = 0; x < d; ++x) {
            pi(2 * x + 0, 2 * x + 0) = sign >= 0 ? e00_plus[x] : e00_minus[x];
            pi(2 * x + 1, 2 * x + 1) = sign >= 0 ? e11_plus[x] : e11_minus[x];
        }
        for (std::size_t x = 1; x < d; ++x) {
            const double v = s * e01[x - 1];
            pi(2 * x + 0, 2 * (x - 1) + 1) = v;  // E01 at (x, x-1)
            pi(2 * (x - 1) + 1, 2 * x + 0) = v;  // E10 at (x-1, x)
        }
        return pi;
    }
};

inline DirectionalKraus kraus_directional(int two_j) {
    detail::require_two_j(two_j);
    const std::size_t d = static_cast<std::size_t>(two_j) + 1;
    const double denom = static_cast<double>(two_j) + 1.0;
    DirectionalKraus k;
    k.two_j = two_j;
    k.e00_plus.resize(d);
    k.e00_minus.resize(d);
    k.e11_plus.resize(d);
    k.e11_minus.resize(d);
    k.e01.resize(d - 1);
    for (std::size_t x = 0; x < d; ++x) {
        const double xd = static_cast<double>(x);
        k.e00_plus[x] = (denom - xd) / denom;
        k.e00_minus[x] = xd / denom;
        k.e11_plus[x] = (xd + 1.0) / denom;
        k.e11_minus[x] = (static_cast<double>(two_j) - xd) / denom;
    }
    for (std::size_t x = 1; x < d; ++x)
        k.e01[x - 1] = std::sqrt(static_cast<double>(x) * (denom - static_cast<double>(x))) / denom;
    return k;
}

/// Directional RF state: either diagonal populations (the fast path; the
/// update map keeps diagonal states diagonal) or a full Hermitian matrix.
class SpinRFState {
  public:
    static SpinRFState diagonal(int two_j, ProbabilityVector populations) {
        detail::require_two_j(two_j);
        if (populations.entries.size() != static_cast<std::size_t>(two_j) + 1)
            throw std::invalid_argument("SpinRFState: populations must have length 2j+1");
        populations.validate();
        return SpinRFState(two_j, std::move(populations));
    }

    static SpinRFState full(int two_j, Matrix rho) {
        detail::require_two_j(two_j);
        const std::size_t d = static_cast<std::size_t>(two_j) + 1;
        if (rho.rows() != d || rho.cols() != d)
            throw std::invalid_argument("SpinRFState: density matrix must be (2j+1) x (2j+1)");
        if (!rho.is_hermitian(1e-12))
            throw std::invalid_argument("SpinRFState: density matrix not Hermitian");
        if (std::abs(rho.trace() - cplx{1.0, 0.0}) > 1e-10)
            throw std::invalid_argument("SpinRFState: trace must be 1");
        if (!is_positive_semidefinite(rho, 1e-10))
            throw std::invalid_argument("SpinRFState: density matrix not positive semidefinite");
        return SpinRFState(two_j, std::move(rho));
    }

    int two_j() const { return two_j_; }
    std::size_t dimension() const { return static_cast<std::size_t>(two_j_) + 1; }
    bool is_diagonal() const { return std::holds_alternative<ProbabilityVector>(repr_); }

    const ProbabilityVector& populations() const {
        if (!is_diagonal()) throw std::logic_error("SpinRFState: not in diagonal representation");
        return std::get<ProbabilityVector>(repr_);
    }
    const Matrix& density_matrix() const {
        if (is_diagonal()) throw std::logic_error("SpinRFState: not in full representation");
        return std::get<Matrix>(repr_);
    }

    SpinRFState to_full() const {
        if (!is_diagonal()) return *this;
        const auto& p = populations().entries;
        Matrix rho(p.size(), p.size());
        for (std::size_t x = 0; x < p.size(); ++x) rho(x, x) = p[x];
        return SpinRFState(two_j_, std::move(rho));
    }

  private:
    SpinRFState(int two_j, ProbabilityVector p) : two_j_(two_j), repr_(std::move(p)) {}
    SpinRFState(int two_j, Matrix m) : two_j_(two_j), repr_(std::move(m)) {}

    int two_j_;
    std::variant<ProbabilityVector, Matrix> repr_;
};

/// The initial state maximizing the quality measure: |j, m=j>, i.e. all
/// population at x = 0 (the SU(2) coherent state).
inline SpinRFState optimal_directional_state(int two_j) {
    detail::require_two_j(two_j);
    ProbabilityVector p;
    p.entries.assign(static_cast<std::size_t>(two_j) + 1, 0.0);
    p.entries[0] = 1.0;
    return SpinRFState::diagonal(two_j, std::move(p));
}

namespace detail {

// One application of the averaged measurement map to diagonal populations:
// (2j+1)^2 p'_x = (2j^2+2j+1+2(j-x)^2) p_x + x(2j+1-x) p_{x-1}
//                + (x+1)(2j-x) p_{x+1}
inline void update_populations(int two_j, const std::vector<double>& p, std::vector<double>& out) {
    const std::size_t d = p.size();
    const double tj = static_cast<double>(two_j);
    const double j = 0.5 * tj;
    const double inv = 1.0 / ((tj + 1.0) * (tj + 1.0));
    const double base = 2.0 * j * j + 2.0 * j + 1.0;
    out.resize(d);
    for (std::size_t x = 0; x < d; ++x) {
        const double xd = static_cast<double>(x);
        double acc = (base + 2.0 * (j - xd) * (j - xd)) * p[x];
        if (x >= 1) acc += xd * (tj + 1.0 - xd) * p[x - 1];
        if (x + 1 < d) acc += (xd + 1.0) * (tj - xd) * p[x + 1];
        out[x] = acc * inv;
    }
}

inline double success_from_populations(int two_j, const std::vector<double>& p) {
    double s = 0.0;
    for (std::size_t x = p.size(); x-- > 0;) s += (static_cast<double>(x) + 0.5) * p[x];
    return 1.0 - s / (static_cast<double>(two_j) + 1.0);
}

}  // namespace detail

inline SpinRFState update_diagonal(const SpinRFState& state) {
    if (!state.is_diagonal())
        throw std::invalid_argument("update_diagonal: state must be in diagonal representation");
    ProbabilityVector next;
    detail::update_populations(state.two_j(), state.populations().entries, next.entries);
    return SpinRFState::diagonal(state.two_j(), std::move(next));
}

/// Full-matrix update:
/// (2j+1)^2 r'_xy = (2j^2+2j+1+2(j-x)(j-y)) r_xy
///                 + sqrt(xy(2j+1-x)(2j+1-y)) r_{x-1,y-1}
///                 + sqrt((x+1)(y+1)(2j-x)(2j-y)) r_{x+1,y+1}
inline SpinRFState update_full(const SpinRFState& state) {
    if (state.is_diagonal())
        throw std::invalid_argument("update_full: state must be in full representation");
    const int two_j = state.two_j();
    const Matrix& rho = state.density_matrix();
    const std::size_t d = rho.rows();
    const double tj = static_cast<double>(two_j);
    const double j = 0.5 * tj;
    const double inv = 1.0 / ((tj + 1.0) * (tj + 1.0));
    const double base = 2.0 * j * j + 2.0 * j + 1.0;
    Matrix out(d, d);
    for (std::size_t x = 0; x < d; ++x) {
        for (std::size_t y = 0; y < d; ++y) {
            const double xd = static_cast<double>(x), yd = static_cast<double>(y);
            cplx acc = (base + 2.0 * (j - xd) * (j - yd)) * rho(x, y);
            if (x >= 1 && y >= 1)
                acc += std::sqrt(xd * yd * (tj + 1.0 - xd) * (tj + 1.0 - yd)) * rho(x - 1, y - 1);
            if (x + 1 < d && y + 1 < d)
                acc += std::sqrt((xd + 1.0) * (yd + 1.0) * (tj - xd) * (tj - yd)) * rho(x + 1, y + 1);
            out(x, y) = acc * inv;
        }
    }
    return SpinRFState::full(two_j, std::move(out));
}

enum class ClosedFormRoute { automatic, finite_sum, recurrence };

namespace detail {

// n iterations of the j >> 1 limit of the diagonal recurrence, starting from
// all population at x = 0. Support after n steps is x = 0..n.
inline std::vector<double> iterate_large_j_populations(double two_j, long long n) {
    std::vector<double> p(static_cast<std::size_t>(n) + 1, 0.0), q(p.size(), 0.0);
    p[0] = 1.0;
    const double inv2j = 1.0 / two_j;
    for (long long step = 0; step < n; ++step) {
        const std::size_t top = static_cast<std::size_t>(step) + 1;
        for (std::size_t x = 0; x <= top; ++x) {
            const double xd = static_cast<double>(x);
            double acc = (1.0 - inv2j * (2.0 * xd + 1.0)) * p[x];
            if (x >= 1) acc += inv2j * xd * p[x - 1];
            acc += inv2j * (xd + 1.0) * (x + 1 < p.size() ? p[x + 1] : 0.0);
            q[x] = acc;
        }
        std::swap(p, q);
    }
    return p;
}

}  // namespace detail

/// Populations after n uses in the large-j limit, from the initial state
/// |j,j>. Valid regime: j >> n. The alternating finite sum
///   p_x(n) = sum_{k=x}^{n} (-1)^{k+x} C(n,k) C(k,x) k! / (2j)^k
/// is evaluated in log space; when the estimated cancellation error of an
/// entry exceeds 1e-8 relative, the whole vector falls back to iterating the
/// limiting recurrence.
inline ProbabilityVector closed_form_populations(int two_j, long long n,
                                                 ClosedFormRoute route = ClosedFormRoute::automatic) {
    detail::require_two_j(two_j);
    if (n < 0) throw std::invalid_argument("closed_form_populations: n must be nonnegative");
    ProbabilityVector out;
    if (n == 0) {
        out.entries = {1.0};
        return out;
    }
    if (route != ClosedFormRoute::recurrence) {
        const LogFactorialTable table(static_cast<std::size_t>(n));
        const long double ln2j = std::log(static_cast<long double>(two_j));
        std::vector<double> p(static_cast<std::size_t>(n) + 1, 0.0);
        bool ok = true;
        for (long long x = 0; x <= n && ok; ++x) {
            long double sum = 0.0L, sumabs = 0.0L;
            for (long long k = x; k <= n; ++k) {
                const long double lt = table.binomial(n, k) + table.binomial(k, x) +
                                       table.factorial(k) - static_cast<long double>(k) * ln2j;
                const long double t = std::exp(lt);
                sumabs += t;
                sum += ((k + x) % 2 == 0) ? t : -t;
            }
            if (!std::isfinite(static_cast<double>(sumabs)) ||
                (sumabs > 1e-14L && std::fabs(sum) < 1e-9L * sumabs)) {
                ok = false;  // overflow, or more than ~8 digits cancelled
                break;
            }
            p[static_cast<std::size_t>(x)] = static_cast<double>(sum);
        }
        if (ok) {
            out.entries = std::move(p);
            return out;
        }
        if (route == ClosedFormRoute::finite_sum)
            throw std::domain_error(
                "closed_form_populations: finite sum too ill-conditioned here (need j >> n)");
    }
    out.entries = detail::iterate_large_j_populations(static_cast<double>(two_j), n);
    return out;
}

/// Average success probability of the alignment test, Ps = 1 - <x + 1/2>/(2j+1).
inline double success_probability_directional(const SpinRFState& state) {
    if (state.is_diagonal())
        return detail::success_from_populations(state.two_j(), state.populations().entries);
    const Matrix& rho = state.density_matrix();
    double s = 0.0;
    for (std::size_t x = 0; x < rho.rows(); ++x)
        s += (static_cast<double>(x) + 0.5) * std::real(rho(x, x));
    return 1.0 - s / (static_cast<double>(state.two_j()) + 1.0);
}

/// Decay law for the optimal initial state:
/// Ps(n) = 1/2 + (j/(2j+1)) (1 - 2/(2j+1)^2)^n. Matches the iterated
/// recurrence to machine precision for every (j, n) tested.
inline double analytic_success_directional(int two_j, long long n) {
    detail::require_two_j(two_j);
    if (n < 0) throw std::invalid_argument("analytic_success_directional: n must be nonnegative");
    const double d = static_cast<double>(two_j) + 1.0;
    const double j = 0.5 * static_cast<double>(two_j);
    return 0.5 + (j / d) * std::pow(1.0 - 2.0 / (d * d), static_cast<double>(n));
}

/// First-use drop of the success probability, R = -2j/(2j+1)^3.
inline double initial_slope_directional(int two_j) {
    detail::require_two_j(two_j);
    const double d = static_cast<double>(two_j) + 1.0;
    return -static_cast<double>(two_j) / (d * d * d);
}

/// A recorded degradation run: success probability after n = steps[i] uses.
struct DegradationTrace {
    std::vector<long long> steps;
    std::vector<double> success_probability;

    void validate() const {
        if (steps.size() != success_probability.size())
            throw std::invalid_argument("DegradationTrace: length mismatch");
        for (std::size_t i = 0; i < success_probability.size(); ++i) {
            const double p = success_probability[i];
            if (!(p >= 0.5 - 1e-12 && p <= 1.0 + 1e-12))
                throw std::invalid_argument("DegradationTrace: success probability out of range");
            if (i > 0 && p > success_probability[i - 1] + 1e-12)
                throw std::invalid_argument("DegradationTrace: success probability increased");
        }
    }
};

}  // namespace qrf
