#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "qrf/directional.hpp"
#include "qrf/numerics.hpp"
#include "qrf/phase.hpp"

namespace qrf {

// ---------------------------------------------------------------------------
// Longevity: how many uses a reference frame supports before the test error
// probability 1 - Ps(n) exceeds a threshold epsilon, plus the quadratic
// size-scaling experiments and the MRFM-style analytic estimate.
// ---------------------------------------------------------------------------

struct DirectionalKind {
    int two_j = 0;
};
struct PhaseOptimalKind {
    int max_photon = 0;
};
struct PhaseCoherentKind {
    double alpha = 0.0;
    double tail_tolerance = 1e-12;
};
using RfKind = std::variant<DirectionalKind, PhaseOptimalKind, PhaseCoherentKind>;

/// Comparable size across families: j for spins, mean photon number for
/// phase references (N/2 for the bounded-optimal state, alpha^2 coherent).
inline double size_metric(const RfKind& kind) {
    if (const auto* d = std::get_if<DirectionalKind>(&kind)) return 0.5 * d->two_j;
    if (const auto* p = std::get_if<PhaseOptimalKind>(&kind)) return 0.5 * p->max_photon;
    return std::get<PhaseCoherentKind>(kind).alpha * std::get<PhaseCoherentKind>(kind).alpha;
}

enum class LongevityStatus {
    converged,               // threshold crossing found
    initial_error_exceeded,  // 1 - Ps(0) >= epsilon already; longevity 0
    censored                 // max_steps exhausted before crossing
};

enum class LongevityMethod { simulated, analytic_directional };

struct LongevityResult {
    RfKind kind;
    double size = 0.0;
    double epsilon = 0.0;
    long long n_uses = 0;
    LongevityMethod method = LongevityMethod::simulated;
    LongevityStatus status = LongevityStatus::converged;
};

namespace detail {

inline void require_epsilon(double epsilon) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw std::invalid_argument("longevity: epsilon must be in (0,1)");
}

// Cutoff headroom for phase runs: band content random-walks outward by
// ~sqrt(n/2) indices over n steps; 4.5 sigma keeps the dropped mass below
// ~1e-9 throughout.
inline int phase_headroom(long long max_steps) {
    return static_cast<int>(std::ceil(4.5 * std::sqrt(static_cast<double>(max_steps)))) + 8;
}

template <typename StepFn, typename SuccessFn>
inline LongevityResult longevity_loop(RfKind kind, double epsilon, long long max_steps,
                                      StepFn&& step, SuccessFn&& success) {
    LongevityResult res;
    res.kind = kind;
    res.size = size_metric(kind);
    res.epsilon = epsilon;
    res.method = LongevityMethod::simulated;
    if (1.0 - success() >= epsilon) {
        res.n_uses = 0;
        res.status = LongevityStatus::initial_error_exceeded;
        return res;
    }
    for (long long n = 1; n <= max_steps; ++n) {
        step();
        if (1.0 - success() > epsilon) {
            res.n_uses = n - 1;
            res.status = LongevityStatus::converged;
            return res;
        }
    }
    res.n_uses = max_steps;
    res.status = LongevityStatus::censored;
    return res;
}

}  // namespace detail

/// Longevity by direct iteration of the appropriate update map from the
/// family's initial state. Deterministic; censored runs are flagged.
inline LongevityResult longevity_simulated(const RfKind& kind, double epsilon,
                                           long long max_steps) {
    detail::require_epsilon(epsilon);
    if (max_steps < 0) throw std::invalid_argument("longevity: max_steps must be nonnegative");

    if (const auto* dk = std::get_if<DirectionalKind>(&kind)) {
        detail::require_two_j(dk->two_j);
        std::vector<double> p(static_cast<std::size_t>(dk->two_j) + 1, 0.0), q(p.size());
        p[0] = 1.0;
        return detail::longevity_loop(
            kind, epsilon, max_steps,
            [&] {
                detail::update_populations(dk->two_j, p, q);
                std::swap(p, q);
            },
            [&] { return detail::success_from_populations(dk->two_j, p); });
    }

    PhaseStateOptions opt;
    opt.tracked_bands = 2;
    FockBandState state = [&] {
        if (const auto* pk = std::get_if<PhaseOptimalKind>(&kind)) {
            opt.cutoff = pk->max_photon + detail::phase_headroom(max_steps);
            return optimal_phase_state(pk->max_photon, opt);
        }
        const auto& ck = std::get<PhaseCoherentKind>(kind);
        FockBandState minimal = coherent_state(ck.alpha, ck.tail_tolerance);
        opt.cutoff = minimal.cutoff + detail::phase_headroom(max_steps);
        return coherent_state(ck.alpha, ck.tail_tolerance, opt);
    }();
    return detail::longevity_loop(
        kind, epsilon, max_steps, [&] { state = update_phase(state); },
        [&] { return success_probability_phase(state); });
}

/// Directional crossing index evaluated from the exact decay law
/// Ps(n) = 1/2 + (j/(2j+1)) a^n instead of stepping the recurrence.
/// Agrees with longevity_simulated (the decay law is exact); used as the
/// fast path for large sweeps.
inline LongevityResult longevity_directional_fast(int two_j, double epsilon,
                                                  long long max_steps) {
    detail::require_two_j(two_j);
    detail::require_epsilon(epsilon);
    LongevityResult res;
    res.kind = DirectionalKind{two_j};
    res.size = 0.5 * two_j;
    res.epsilon = epsilon;
    res.method = LongevityMethod::simulated;

    const double d = static_cast<double>(two_j) + 1.0;
    const double j = 0.5 * static_cast<double>(two_j);
    const double amp = j / d;
    const double a = 1.0 - 2.0 / (d * d);
    // same floating-point route as the simulation's first check, so the two
    // paths agree even when the initial error sits exactly on epsilon
    if (1.0 - (1.0 - 0.5 / d) >= epsilon) {
        res.n_uses = 0;
        res.status = LongevityStatus::initial_error_exceeded;
        return res;
    }
    const double target = 0.5 - epsilon;  // crossing: amp * a^n < target
    if (target <= 0.0) {  // epsilon >= 1/2: the error never exceeds it
        res.n_uses = max_steps;
        res.status = LongevityStatus::censored;
        return res;
    }
    long long n = static_cast<long long>(std::floor(std::log(target / amp) / std::log(a)));
    if (n < 0) n = 0;
    while (amp * std::pow(a, static_cast<double>(n + 1)) >= target) ++n;
    while (n > 0 && amp * std::pow(a, static_cast<double>(n)) < target) --n;
    if (n > max_steps) {
        res.n_uses = max_steps;
        res.status = LongevityStatus::censored;
        return res;
    }
    res.n_uses = n;
    res.status = LongevityStatus::converged;
    return res;
}

/// The paper-style linearized estimate: n_max = round(epsilon j^2). A lower
/// bound in spirit; exact arithmetic is kept so round(1e-4 * (1e6)^2) = 1e8.
inline LongevityResult longevity_analytic_directional(double j, double epsilon) {
    detail::require_epsilon(epsilon);
    if (!(j > 0.0)) throw std::invalid_argument("longevity: j must be positive");
    LongevityResult res;
    res.kind = DirectionalKind{static_cast<int>(std::llround(2.0 * j))};
    res.size = j;
    res.epsilon = epsilon;
    res.method = LongevityMethod::analytic_directional;
    res.status = LongevityStatus::converged;
    res.n_uses = std::llround(epsilon * j * j);
    return res;
}

enum class RfFamily { directional, phase_optimal, phase_coherent };

/// Builds the family member of a given size (j, or mean photon number).
inline RfKind make_kind(RfFamily family, double size) {
    switch (family) {
        case RfFamily::directional: {
            const int two_j = static_cast<int>(std::llround(2.0 * size));
            if (two_j <= 0 || std::abs(2.0 * size - two_j) > 1e-9)
                throw std::invalid_argument("make_kind: directional size must be a positive half-integer");
            return DirectionalKind{two_j};
        }
        case RfFamily::phase_optimal: {
            const int n = static_cast<int>(std::llround(2.0 * size));
            if (n < 0 || std::abs(2.0 * size - n) > 1e-9)
                throw std::invalid_argument("make_kind: optimal phase size must be a half-integer (N/2)");
            return PhaseOptimalKind{n};
        }
        case RfFamily::phase_coherent:
            if (!(size >= 0.0))
                throw std::invalid_argument("make_kind: coherent size (mean photon number) must be >= 0");
            return PhaseCoherentKind{std::sqrt(size)};
    }
    throw std::logic_error("make_kind: unknown family");
}

struct ScalingResult {
    double epsilon = 0.0;
    std::vector<double> sizes;        // points included in the fit
    std::vector<long long> longevities;
    LineFit loglog_fit;
    std::vector<double> excluded_sizes;  // censored / zero / flagged points
    std::vector<std::string> warnings;
};

using LongevityFn = std::function<LongevityResult(const RfKind&, double, long long)>;

namespace detail {

inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const unsigned hw = std::thread::hardware_concurrency();
    const std::size_t workers = std::min<std::size_t>(count, hw == 0 ? 1 : hw);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace detail

/// Runs the longevity sweep over sizes for each epsilon and fits
/// log(longevity) against log(size). Censored or zero-longevity points are
/// excluded from the fit and reported; nothing is asserted here.
/// Sweep points run concurrently; results merge in (epsilon, size) order.
inline std::vector<ScalingResult> scaling_experiment(RfFamily family,
                                                     const std::vector<double>& epsilons,
                                                     const std::vector<double>& sizes,
                                                     long long max_steps,
                                                     const LongevityFn& longevity = {}) {
    for (double eps : epsilons) detail::require_epsilon(eps);
    for (std::size_t i = 1; i < sizes.size(); ++i)
        if (!(sizes[i] > sizes[i - 1]))
            throw std::invalid_argument("scaling_experiment: sizes must be strictly increasing");

    const LongevityFn run = longevity
                                ? longevity
                                : LongevityFn([](const RfKind& k, double e, long long m) {
                                      return longevity_simulated(k, e, m);
                                  });

    std::vector<LongevityResult> grid(epsilons.size() * sizes.size());
    detail::parallel_for(grid.size(), [&](std::size_t idx) {
        const std::size_t ei = idx / sizes.size();
        const std::size_t si = idx % sizes.size();
        grid[idx] = run(make_kind(family, sizes[si]), epsilons[ei], max_steps);
    });

    std::vector<ScalingResult> out(epsilons.size());
    for (std::size_t ei = 0; ei < epsilons.size(); ++ei) {
        ScalingResult& sr = out[ei];
        sr.epsilon = epsilons[ei];
        std::vector<double> xs, ys;
        for (std::size_t si = 0; si < sizes.size(); ++si) {
            const LongevityResult& r = grid[ei * sizes.size() + si];
            if (r.status != LongevityStatus::converged || r.n_uses <= 0) {
                sr.excluded_sizes.push_back(sizes[si]);
                sr.warnings.push_back(
                    "size " + std::to_string(sizes[si]) +
                    (r.status == LongevityStatus::censored
                         ? ": censored at max_steps, excluded from fit"
                         : (r.status == LongevityStatus::initial_error_exceeded
                                ? ": initial error already above epsilon, excluded from fit"
                                : ": zero longevity, excluded from fit")));
                continue;
            }
            sr.sizes.push_back(sizes[si]);
            sr.longevities.push_back(r.n_uses);
            xs.push_back(std::log(sizes[si]));
            ys.push_back(std::log(static_cast<double>(r.n_uses)));
        }
        if (xs.size() >= 2) sr.loglog_fit = fit_line(xs, ys);
    }
    return out;
}

enum class MrfmSpinConvention {
    j_equals_spin_count,      // reproduces the headline 10^8 figure
    j_equals_half_spin_count  // j = N/2 for N constituent spin-1/2 systems
};

/// Longevity estimate for a magnet of `spin_count` parallel spins used as a
/// single-spin measurement reference.
inline LongevityResult mrfm_estimate(long long spin_count, double epsilon,
                                     MrfmSpinConvention convention =
                                         MrfmSpinConvention::j_equals_spin_count) {
    if (spin_count < 1) throw std::invalid_argument("mrfm_estimate: spin_count must be >= 1");
    const double j = convention == MrfmSpinConvention::j_equals_spin_count
                         ? static_cast<double>(spin_count)
                         : 0.5 * static_cast<double>(spin_count);
    return longevity_analytic_directional(j, epsilon);
}

// ---------------------------------------------------------------------------
// Degradation traces (the raw data behind the quality-vs-uses plots)
// ---------------------------------------------------------------------------

inline DegradationTrace run_directional_trace(int two_j, long long steps) {
    detail::require_two_j(two_j);
    if (steps < 0) throw std::invalid_argument("run_directional_trace: steps must be nonnegative");
    std::vector<double> p(static_cast<std::size_t>(two_j) + 1, 0.0), q(p.size());
    p[0] = 1.0;
    DegradationTrace trace;
    trace.steps.reserve(static_cast<std::size_t>(steps) + 1);
    trace.success_probability.reserve(static_cast<std::size_t>(steps) + 1);
    for (long long n = 0;; ++n) {
        trace.steps.push_back(n);
        trace.success_probability.push_back(detail::success_from_populations(two_j, p));
        if (n == steps) break;
        detail::update_populations(two_j, p, q);
        std::swap(p, q);
    }
    return trace;
}

inline DegradationTrace run_phase_trace(const PhaseStateSpec& spec, long long steps) {
    if (steps < 0) throw std::invalid_argument("run_phase_trace: steps must be nonnegative");
    PhaseStateOptions opt;
    opt.tracked_bands = 2;
    FockBandState minimal = make_phase_state(spec);
    opt.cutoff = minimal.cutoff + detail::phase_headroom(steps);
    FockBandState state = make_phase_state(spec, opt);
    DegradationTrace trace;
    trace.steps.reserve(static_cast<std::size_t>(steps) + 1);
    trace.success_probability.reserve(static_cast<std::size_t>(steps) + 1);
    for (long long n = 0;; ++n) {
        trace.steps.push_back(n);
        trace.success_probability.push_back(success_probability_phase(state));
        if (n == steps) break;
        state = update_phase(state);
    }
    return trace;
}

}  // namespace qrf
