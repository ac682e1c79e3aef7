#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "qrf/matrix.hpp"
#include "qrf/numerics.hpp"

namespace qrf {

// ---------------------------------------------------------------------------
// Bounded-energy phase reference: a truncated oscillator mode, degraded by
// repeated optimal relative-phase measurements of single-rail qubit probes.
//
// Density matrices are stored by diagonal bands, d_k[m] = rho_{m,m+k} for
// m = 0..M-k. The update map evolves every band independently, so tracking
// bands 0 and 1 suffices for the success probability.
// ---------------------------------------------------------------------------

/// Truncated oscillator state in band storage. Entries pushed past the cutoff
/// by an update are dropped; the cumulative dropped magnitude per band is
/// carried along so callers can bound the truncation error.
struct FockBandState {
    int cutoff = 0;                            // M: largest retained Fock index
    std::vector<std::vector<cplx>> bands;      // bands[k][m] = rho_{m,m+k}
    std::vector<double> dropped;               // cumulative |dropped| per band

    int tracked_band_count() const { return static_cast<int>(bands.size()); }

    double trace() const {
        double t = 0.0;
        for (const cplx& v : bands[0]) t += std::real(v);
        return t;
    }

    double dropped_mass() const {
        double t = 0.0;
        for (double v : dropped) t += v;
        return t;
    }

    /// Hermitian matrix reconstruction; requires all M+1 bands tracked.
    Matrix reconstruct() const {
        const std::size_t d = static_cast<std::size_t>(cutoff) + 1;
        if (bands.size() != d)
            throw std::logic_error("FockBandState: reconstruction needs all bands tracked");
        Matrix rho(d, d);
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t m = 0; m + k < d; ++m) {
                rho(m, m + k) = bands[k][m];
                rho(m + k, m) = std::conj(bands[k][m]);
            }
        return rho;
    }

    void validate() const {
        if (bands.empty()) throw std::invalid_argument("FockBandState: no bands tracked");
        for (std::size_t k = 0; k < bands.size(); ++k)
            if (bands[k].size() != static_cast<std::size_t>(cutoff) + 1 - k)
                throw std::invalid_argument("FockBandState: band length inconsistent with cutoff");
        double sum = 0.0;
        for (const cplx& v : bands[0]) {
            if (std::abs(std::imag(v)) > 1e-12)
                throw std::invalid_argument("FockBandState: diagonal band must be real");
            if (std::real(v) < -1e-12)
                throw std::invalid_argument("FockBandState: negative population");
            sum += std::real(v);
        }
        if (std::abs(sum + dropped_mass_band0_() - 1.0) > 1e-10)
            throw std::invalid_argument("FockBandState: populations plus dropped mass must sum to 1");
        if (bands.size() == static_cast<std::size_t>(cutoff) + 1) {
            if (!is_positive_semidefinite(reconstruct(), 1e-10))
                throw std::invalid_argument("FockBandState: not positive semidefinite");
        }
    }

  private:
    double dropped_mass_band0_() const { return dropped.empty() ? 0.0 : dropped[0]; }
};

struct PhaseStateOptions {
    int tracked_bands = 2;  // bands 0..K; 2 is enough for the success measure
    int cutoff = -1;        // -1: smallest cutoff holding the state; larger pads with zeros
};

namespace detail {

// Bands of the pure state with real amplitudes c_m.
inline FockBandState bands_from_amplitudes(const std::vector<double>& c,
                                           const PhaseStateOptions& opt) {
    const int support_top = static_cast<int>(c.size()) - 1;
    const int cutoff = opt.cutoff < 0 ? support_top : opt.cutoff;
    if (cutoff < support_top)
        throw std::invalid_argument("phase state: cutoff below the state's support");
    int tracked = opt.tracked_bands;
    if (tracked < 1) throw std::invalid_argument("phase state: must track at least band 0");
    tracked = std::min(tracked, cutoff + 1);
    FockBandState s;
    s.cutoff = cutoff;
    s.bands.resize(static_cast<std::size_t>(tracked));
    s.dropped.assign(static_cast<std::size_t>(tracked), 0.0);
    for (int k = 0; k < tracked; ++k) {
        auto& band = s.bands[static_cast<std::size_t>(k)];
        band.assign(static_cast<std::size_t>(cutoff + 1 - k), cplx{});
        for (int m = 0; m + k <= support_top && m + k <= cutoff; ++m)
            band[static_cast<std::size_t>(m)] = c[static_cast<std::size_t>(m)] *
                                                c[static_cast<std::size_t>(m + k)];
    }
    return s;
}

}  // namespace detail

/// Optimal phase-encoding state with at most N photons: amplitudes
/// proportional to sin((m+1)pi/(N+2)). Built from the extreme eigenpair of
/// the coupling matrix M_N and cross-checked against the sine form.
inline FockBandState optimal_phase_state(int max_photon, PhaseStateOptions opt = {}) {
    if (max_photon < 0) throw std::invalid_argument("optimal_phase_state: N must be nonnegative");
    const std::size_t dim = static_cast<std::size_t>(max_photon) + 1;
    TridiagonalSymmetric m;
    m.diagonal.assign(dim, 0.0);
    m.offdiagonal.assign(dim - 1, 1.0);
    const Eigenpair pair = extreme_eigenpair(m, WhichEigenpair::largest);

    const double theta = std::numbers::pi / (static_cast<double>(max_photon) + 2.0);
    std::vector<double> sine(dim);
    double norm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        sine[i] = std::sin(static_cast<double>(i + 1) * theta);
        norm += sine[i] * sine[i];
    }
    norm = std::sqrt(norm);
    for (double& v : sine) v /= norm;
    for (std::size_t i = 0; i < dim; ++i)
        if (std::abs(pair.eigenvector[i] - sine[i]) > 1e-10)
            throw std::logic_error("optimal_phase_state: eigenvector disagrees with sine profile");

    return detail::bands_from_amplitudes(pair.eigenvector, opt);
}

/// Truncated coherent state |alpha>: c_m = e^{-a^2/2} a^m / sqrt(m!), cut at
/// the smallest M whose neglected tail probability is below tail_tolerance,
/// then renormalized. The untruncated mean photon number is alpha^2.
inline FockBandState coherent_state(double alpha, double tail_tolerance = 1e-12,
                                    PhaseStateOptions opt = {}) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("coherent_state: alpha must be >= 0");
    if (!(tail_tolerance > 0.0) || tail_tolerance > 1e-6)
        throw std::invalid_argument("coherent_state: tail_tolerance must be in (0, 1e-6]");
    const double lambda = alpha * alpha;
    std::vector<double> prob;
    prob.push_back(std::exp(-lambda));
    double cum = prob[0];
    while (cum < 1.0 - tail_tolerance) {
        const double next = prob.back() * lambda / static_cast<double>(prob.size());
        prob.push_back(next);
        cum += next;
        if (prob.size() > 100000)
            throw std::runtime_error("coherent_state: cutoff search did not converge");
    }
    std::vector<double> c(prob.size());
    const double renorm = 1.0 / std::sqrt(cum);
    for (std::size_t m = 0; m < prob.size(); ++m) c[m] = std::sqrt(prob[m]) * renorm;
    return detail::bands_from_amplitudes(c, opt);
}

struct OptimalBounded {
    int max_photon = 0;
};
struct Coherent {
    double alpha = 0.0;
    double tail_tolerance = 1e-12;
};
using PhaseStateSpec = std::variant<OptimalBounded, Coherent>;

inline FockBandState make_phase_state(const PhaseStateSpec& spec, PhaseStateOptions opt = {}) {
    if (const auto* ob = std::get_if<OptimalBounded>(&spec))
        return optimal_phase_state(ob->max_photon, opt);
    const auto& c = std::get<Coherent>(spec);
    return coherent_state(c.alpha, c.tail_tolerance, opt);
}

/// Two-outcome relative-phase projectors on the truncated joint space of
/// dimension 2(M+1), joint index 2m + s. The single vector |M>_R|1>_S has no
/// partner below the cutoff and is left out of both projectors, so
/// Pi+ + Pi- = I - |M,1><M,1| on the truncated space.
inline std::pair<Matrix, Matrix> phase_projectors(int cutoff) {
    if (cutoff < 0) throw std::invalid_argument("phase_projectors: cutoff must be >= 0");
    const std::size_t d = 2 * (static_cast<std::size_t>(cutoff) + 1);
    Matrix plus(d, d), minus(d, d);
    plus(0, 0) = 1.0;  // |0>_R|0>_S counts as the in-phase outcome
    for (int m = 1; m <= cutoff; ++m) {
        const std::size_t hi = 2 * static_cast<std::size_t>(m);      // |m>_R |0>_S
        const std::size_t lo = 2 * static_cast<std::size_t>(m) - 1;  // |m-1>_R |1>_S
        plus(hi, hi) += 0.5;
        plus(lo, lo) += 0.5;
        plus(hi, lo) += 0.5;
        plus(lo, hi) += 0.5;
        minus(hi, hi) += 0.5;
        minus(lo, lo) += 0.5;
        minus(hi, lo) -= 0.5;
        minus(lo, hi) -= 0.5;
    }
    return {std::move(plus), std::move(minus)};
}

/// One use of the phase reference: E(rho) = rho/2 + |0><0|rho|0><0|/4
/// + A'rho A/4 + A rho A'/4, applied band by band. Band k obeys
/// d'_k[m] = d_k[m]/2 + d_k[m+1]/4 + d_k[m-1]/4 (+ d_0[0]/4 at k=m=0).
/// The shift past the cutoff is dropped and accounted.
inline FockBandState update_phase(const FockBandState& state) {
    if (state.bands.empty()) throw std::invalid_argument("update_phase: no bands tracked");
    FockBandState out;
    out.cutoff = state.cutoff;
    out.bands.resize(state.bands.size());
    out.dropped = state.dropped;
    if (out.dropped.size() != state.bands.size()) out.dropped.resize(state.bands.size(), 0.0);
    for (std::size_t k = 0; k < state.bands.size(); ++k) {
        const auto& b = state.bands[k];
        auto& nb = out.bands[k];
        const std::size_t len = b.size();
        nb.assign(len, cplx{});
        for (std::size_t m = 0; m < len; ++m) {
            cplx acc = 0.5 * b[m];
            if (m + 1 < len) acc += 0.25 * b[m + 1];
            if (m >= 1) acc += 0.25 * b[m - 1];
            nb[m] = acc;
        }
        if (k == 0 && len > 0) nb[0] += 0.25 * b[0];
        if (len > 0) out.dropped[k] += 0.25 * std::abs(b[len - 1]);
    }
    return out;
}

/// Average success probability of the in-phase/out-of-phase test:
/// Ps = 1/2 + (1/2) sum_m Re rho_{m,m+1}. Requires band 1.
inline double success_probability_phase(const FockBandState& state) {
    if (state.tracked_band_count() < 2)
        throw std::invalid_argument("success_probability_phase: band 1 not tracked");
    double s = 0.0;
    for (const cplx& v : state.bands[1]) s += std::real(v);
    return 0.5 + 0.5 * s;
}

inline double mean_photon_number(const FockBandState& state) {
    double s = 0.0;
    for (std::size_t m = 0; m < state.bands[0].size(); ++m)
        s += static_cast<double>(m) * std::real(state.bands[0][m]);
    return s;
}

namespace detail {

// rho_{m,m+1}(n) = 4^{-n} sum_{j>=1} [C(2n, n-j+(m+1)) - C(2n, n-j-(m+1))] rho_{j-1,j}(0).
// The labels run from 1 (the band vanishes at the lower wall), which is the
// indexing that reproduces the recurrence; the two binomials are the direct
// and reflected random-walk kernels.
inline cplx closed_form_band1_entry(const std::vector<cplx>& initial_band1, long long n,
                                    long long m, const LogFactorialTable& table) {
    const long double ln4n = static_cast<long double>(n) * std::log(4.0L);
    auto kernel = [&](long long q) -> long double {
        if (q < 0 || q > 2 * n) return 0.0L;
        return std::exp(table.binomial(2 * n, q) - ln4n);
    };
    cplx acc = 0.0;
    const long long mt = m + 1;
    const long long jmax = static_cast<long long>(initial_band1.size());
    for (long long jj = 1; jj <= jmax; ++jj) {
        const long double w = kernel(n - jj + mt) - kernel(n - jj - mt);
        if (w != 0.0L) acc += static_cast<double>(w) * initial_band1[static_cast<std::size_t>(jj - 1)];
    }
    return acc;
}

}  // namespace detail

/// Band-1 element after n uses via the closed-form random-walk kernel.
inline cplx closed_form_band1(const FockBandState& initial, long long n, int m) {
    if (n < 0) throw std::invalid_argument("closed_form_band1: n must be nonnegative");
    if (m < 0) throw std::invalid_argument("closed_form_band1: m must be nonnegative");
    if (initial.tracked_band_count() < 2)
        throw std::invalid_argument("closed_form_band1: band 1 not tracked in the initial state");
    const auto& b1 = initial.bands[1];
    if (n == 0) return m < static_cast<int>(b1.size()) ? b1[static_cast<std::size_t>(m)] : cplx{};
    const LogFactorialTable table(static_cast<std::size_t>(2 * n));
    return detail::closed_form_band1_entry(b1, n, m, table);
}

/// Whole band-1 vector after n uses (entries m = 0..max_m), sharing one
/// factorial table across entries.
inline std::vector<cplx> closed_form_band1_all(const FockBandState& initial, long long n,
                                               int max_m) {
    if (n < 0) throw std::invalid_argument("closed_form_band1_all: n must be nonnegative");
    if (initial.tracked_band_count() < 2)
        throw std::invalid_argument("closed_form_band1_all: band 1 not tracked");
    const auto& b1 = initial.bands[1];
    std::vector<cplx> out(static_cast<std::size_t>(max_m) + 1, cplx{});
    if (n == 0) {
        for (std::size_t m = 0; m < out.size() && m < b1.size(); ++m) out[m] = b1[m];
        return out;
    }
    const LogFactorialTable table(static_cast<std::size_t>(2 * n));
    for (int m = 0; m <= max_m; ++m)
        out[static_cast<std::size_t>(m)] = detail::closed_form_band1_entry(b1, n, m, table);
    return out;
}

}  // namespace qrf
