// qrf: quantum reference frame degradation simulator.
//
// Subcommands:
//   direction-sim  success probability vs uses for a spin-j directional frame
//   phase-sim      success probability vs uses for a bounded phase reference
//   longevity      uses supported before the error exceeds a threshold
//   scaling        longevity sweeps over frame size with log-log fits
//   mrfm           analytic estimate for a magnet of N parallel spins
//
// Output is CSV (default) or JSON, byte-identical across runs of the same
// configuration. Exit codes: 0 success, 2 invalid arguments, 3 completed
// with censored or degenerate results.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qrf/qrf.hpp"

using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitDegenerate = 3;

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::fwrite(content.data(), 1, content.size(), stdout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string status_name(qrf::LongevityStatus s) {
    switch (s) {
        case qrf::LongevityStatus::converged: return "converged";
        case qrf::LongevityStatus::initial_error_exceeded: return "initial-error-exceeded";
        case qrf::LongevityStatus::censored: return "censored";
    }
    return "unknown";
}

std::string trace_output(const qrf::DegradationTrace& trace, const std::string& format,
                         const std::string& command, const json& params) {
    if (format == "json") {
        json doc;
        doc["command"] = command;
        doc["parameters"] = params;
        json records = json::array();
        for (std::size_t i = 0; i < trace.steps.size(); ++i)
            records.push_back({{"n", trace.steps[i]}, {"p_success", trace.success_probability[i]}});
        doc["records"] = records;
        return doc.dump(2) + "\n";
    }
    qrf::CsvTable table;
    table.header = {"n", "p_success"};
    for (std::size_t i = 0; i < trace.steps.size(); ++i)
        table.rows.push_back(
            {qrf::format_integer(trace.steps[i]), qrf::format_double(trace.success_probability[i])});
    return qrf::to_csv(table);
}

struct PhaseArgs {
    std::string state;
    int n_max = -1;
    double alpha = -1.0;
    double tail_tol = 1e-12;
};

// Returns the state spec or exits with a message naming the offending flag.
qrf::PhaseStateSpec phase_spec_from_args(const PhaseArgs& a, bool alpha_set, bool nmax_set,
                                         bool tail_set) {
    if (a.state == "optimal") {
        if (alpha_set)
            throw CLI::ValidationError("--alpha is only valid with --state coherent");
        if (tail_set)
            throw CLI::ValidationError("--tail-tol is only valid with --state coherent");
        if (!nmax_set) throw CLI::ValidationError("--n-max is required with --state optimal");
        if (a.n_max < 0) throw CLI::ValidationError("--n-max must be nonnegative");
        return qrf::OptimalBounded{a.n_max};
    }
    if (a.state == "coherent") {
        if (nmax_set)
            throw CLI::ValidationError("--n-max is only valid with --state optimal");
        if (!alpha_set) throw CLI::ValidationError("--alpha is required with --state coherent");
        if (!(a.alpha >= 0.0)) throw CLI::ValidationError("--alpha must be >= 0");
        return qrf::Coherent{a.alpha, a.tail_tol};
    }
    throw CLI::ValidationError("--state must be 'optimal' or 'coherent'");
}

json fit_to_json(const qrf::LineFit& fit) {
    return {{"slope", fit.slope},
            {"intercept", fit.intercept},
            {"residual_rms", fit.residual_rms},
            {"point_count", fit.point_count}};
}

json scaling_to_json(const std::vector<qrf::ScalingResult>& results, const std::string& family,
                     long long max_steps) {
    json doc;
    doc["command"] = "scaling";
    doc["family"] = family;
    doc["max_steps"] = max_steps;
    json arr = json::array();
    for (const auto& r : results) {
        json points = json::array();
        for (std::size_t i = 0; i < r.sizes.size(); ++i)
            points.push_back({{"size", r.sizes[i]}, {"longevity", r.longevities[i]}});
        json entry;
        entry["epsilon"] = r.epsilon;
        entry["points"] = points;
        if (r.sizes.size() >= 2) entry["fit"] = fit_to_json(r.loglog_fit);
        entry["excluded_sizes"] = r.excluded_sizes;
        entry["warnings"] = r.warnings;
        arr.push_back(entry);
    }
    doc["results"] = arr;
    return doc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum reference frame degradation simulator"};
    app.require_subcommand(1);

    std::string out_path = "-";
    std::string format = "csv";
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", out_path, "output file path, '-' for stdout");
        sub->add_option("--format", format, "output format")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    // direction-sim
    auto* dir_sim = app.add_subcommand("direction-sim",
                                       "simulate degradation of a spin-j directional frame");
    int two_j = 0;
    long long steps = 0;
    dir_sim->add_option("--two-j", two_j, "twice the spin quantum number (positive integer)")
        ->required()
        ->check(CLI::PositiveNumber);
    dir_sim->add_option("--steps", steps, "number of uses to simulate")
        ->required()
        ->check(CLI::NonNegativeNumber);
    add_common(dir_sim);

    // phase-sim
    auto* ph_sim = app.add_subcommand("phase-sim",
                                      "simulate degradation of a bounded phase reference");
    PhaseArgs ph;
    long long ph_steps = 0;
    ph_sim->add_option("--state", ph.state, "initial state family: optimal | coherent")->required();
    auto* opt_nmax = ph_sim->add_option("--n-max", ph.n_max, "photon number bound N (optimal state)");
    auto* opt_alpha = ph_sim->add_option("--alpha", ph.alpha, "coherent amplitude");
    auto* opt_tail = ph_sim->add_option("--tail-tol", ph.tail_tol,
                                        "coherent truncation tail probability (default 1e-12)");
    ph_sim->add_option("--steps", ph_steps, "number of uses to simulate")
        ->required()
        ->check(CLI::NonNegativeNumber);
    add_common(ph_sim);

    // longevity
    auto* lon = app.add_subcommand("longevity",
                                   "uses supported before the error probability exceeds epsilon");
    std::string family;
    int lon_two_j = 0;
    PhaseArgs lon_ph;
    double epsilon = 0.0;
    long long max_steps = 1000000;
    lon->add_option("--family", family, "direction | phase-optimal | phase-coherent")->required();
    auto* lon_twoj_opt = lon->add_option("--two-j", lon_two_j, "twice the spin (direction family)");
    auto* lon_nmax_opt = lon->add_option("--n-max", lon_ph.n_max, "photon bound (phase-optimal)");
    auto* lon_alpha_opt = lon->add_option("--alpha", lon_ph.alpha, "amplitude (phase-coherent)");
    auto* lon_tail_opt = lon->add_option("--tail-tol", lon_ph.tail_tol,
                                         "coherent truncation tail probability");
    lon->add_option("--epsilon", epsilon, "error threshold in (0,1)")->required();
    lon->add_option("--max-steps", max_steps, "step budget before censoring")
        ->check(CLI::PositiveNumber);
    add_common(lon);

    // scaling
    auto* sc = app.add_subcommand("scaling", "longevity vs size sweep with log-log fit");
    std::string sc_family;
    std::vector<double> sc_epsilons;
    std::vector<double> sc_sizes;
    long long sc_max_steps = 1000000;
    std::string fit_out;
    sc->add_option("--family", sc_family, "direction | phase-optimal | phase-coherent")->required();
    sc->add_option("--epsilon", sc_epsilons, "error threshold(s) in (0,1)")
        ->required()
        ->delimiter(',');
    sc->add_option("--sizes", sc_sizes,
                   "frame sizes (j for direction, mean photon number for phase families)")
        ->required()
        ->delimiter(',');
    sc->add_option("--max-steps", sc_max_steps, "per-point step budget")->check(CLI::PositiveNumber);
    sc->add_option("--fit-out", fit_out, "write fit results as JSON to this path");
    add_common(sc);

    // mrfm
    auto* mr = app.add_subcommand("mrfm", "analytic longevity of a magnet of N parallel spins");
    double spins = 0.0;
    double mr_epsilon = 0.0;
    std::string convention = "spins";
    mr->add_option("--spins", spins, "number of constituent spins")->required();
    mr->add_option("--epsilon", mr_epsilon, "error threshold in (0,1)")->required();
    mr->add_option("--j-convention", convention, "spins (j = N, headline figure) | half-spins (j = N/2)")
        ->check(CLI::IsMember({"spins", "half-spins"}));
    add_common(mr);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (dir_sim->parsed()) {
            const qrf::DegradationTrace trace = qrf::run_directional_trace(two_j, steps);
            write_output(out_path, trace_output(trace, format, "direction-sim",
                                                {{"two_j", two_j}, {"steps", steps}}));
            return kExitOk;
        }

        if (ph_sim->parsed()) {
            qrf::PhaseStateSpec spec;
            try {
                spec = phase_spec_from_args(ph, opt_alpha->count() > 0, opt_nmax->count() > 0,
                                            opt_tail->count() > 0);
            } catch (const CLI::ValidationError& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitUsage;
            }
            const qrf::DegradationTrace trace = qrf::run_phase_trace(spec, ph_steps);
            json params = {{"state", ph.state}, {"steps", ph_steps}};
            if (ph.state == "optimal") params["n_max"] = ph.n_max;
            if (ph.state == "coherent") {
                params["alpha"] = ph.alpha;
                params["tail_tolerance"] = ph.tail_tol;
            }
            write_output(out_path, trace_output(trace, format, "phase-sim", params));
            return kExitOk;
        }

        if (lon->parsed()) {
            qrf::RfKind kind;
            try {
                if (family == "direction") {
                    if (lon_nmax_opt->count() || lon_alpha_opt->count() || lon_tail_opt->count())
                        throw CLI::ValidationError(
                            "--n-max/--alpha/--tail-tol are not valid with --family direction");
                    if (!lon_twoj_opt->count())
                        throw CLI::ValidationError("--two-j is required with --family direction");
                    kind = qrf::DirectionalKind{lon_two_j};
                } else if (family == "phase-optimal") {
                    lon_ph.state = "optimal";
                    if (lon_twoj_opt->count())
                        throw CLI::ValidationError("--two-j is only valid with --family direction");
                    auto spec = phase_spec_from_args(lon_ph, lon_alpha_opt->count() > 0,
                                                     lon_nmax_opt->count() > 0,
                                                     lon_tail_opt->count() > 0);
                    kind = qrf::PhaseOptimalKind{std::get<qrf::OptimalBounded>(spec).max_photon};
                } else if (family == "phase-coherent") {
                    lon_ph.state = "coherent";
                    if (lon_twoj_opt->count())
                        throw CLI::ValidationError("--two-j is only valid with --family direction");
                    auto spec = phase_spec_from_args(lon_ph, lon_alpha_opt->count() > 0,
                                                     lon_nmax_opt->count() > 0,
                                                     lon_tail_opt->count() > 0);
                    const auto& c = std::get<qrf::Coherent>(spec);
                    kind = qrf::PhaseCoherentKind{c.alpha, c.tail_tolerance};
                } else {
                    throw CLI::ValidationError(
                        "--family must be direction, phase-optimal or phase-coherent");
                }
            } catch (const CLI::ValidationError& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitUsage;
            }
            const qrf::LongevityResult r = qrf::longevity_simulated(kind, epsilon, max_steps);
            if (format == "json") {
                json doc;
                doc["command"] = "longevity";
                doc["family"] = family;
                doc["epsilon"] = r.epsilon;
                doc["size"] = r.size;
                doc["longevity"] = r.n_uses;
                doc["status"] = status_name(r.status);
                doc["method"] = "simulated";
                write_output(out_path, doc.dump(2) + "\n");
            } else {
                qrf::CsvTable table;
                table.header = {"epsilon", "size", "longevity"};
                table.rows.push_back({qrf::format_double(r.epsilon), qrf::format_double(r.size),
                                      qrf::format_integer(r.n_uses)});
                write_output(out_path, qrf::to_csv(table));
            }
            if (r.status != qrf::LongevityStatus::converged) {
                std::cerr << "warning: longevity " << status_name(r.status) << "\n";
                return kExitDegenerate;
            }
            return kExitOk;
        }

        if (sc->parsed()) {
            qrf::RfFamily fam;
            if (sc_family == "direction")
                fam = qrf::RfFamily::directional;
            else if (sc_family == "phase-optimal")
                fam = qrf::RfFamily::phase_optimal;
            else if (sc_family == "phase-coherent")
                fam = qrf::RfFamily::phase_coherent;
            else {
                std::cerr << "error: --family must be direction, phase-optimal or phase-coherent\n";
                return kExitUsage;
            }
            std::vector<qrf::ScalingResult> results;
            try {
                results = qrf::scaling_experiment(fam, sc_epsilons, sc_sizes, sc_max_steps);
            } catch (const std::invalid_argument& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitUsage;
            }
            bool degenerate = false;
            for (const auto& r : results) {
                for (const auto& w : r.warnings) {
                    std::cerr << "warning: epsilon " << qrf::format_double(r.epsilon) << ": " << w
                              << "\n";
                    degenerate = true;
                }
            }
            if (format == "json") {
                write_output(out_path, scaling_to_json(results, sc_family, sc_max_steps).dump(2) + "\n");
            } else {
                qrf::CsvTable table;
                table.header = {"epsilon", "size", "longevity"};
                for (const auto& r : results)
                    for (std::size_t i = 0; i < r.sizes.size(); ++i)
                        table.rows.push_back({qrf::format_double(r.epsilon),
                                              qrf::format_double(r.sizes[i]),
                                              qrf::format_integer(r.longevities[i])});
                write_output(out_path, qrf::to_csv(table));
            }
            if (!fit_out.empty()) {
                json fits = json::array();
                for (const auto& r : results) {
                    json entry;
                    entry["epsilon"] = r.epsilon;
                    if (r.sizes.size() >= 2) entry["fit"] = fit_to_json(r.loglog_fit);
                    entry["excluded_sizes"] = r.excluded_sizes;
                    entry["warnings"] = r.warnings;
                    fits.push_back(entry);
                }
                write_output(fit_out, fits.dump(2) + "\n");
            }
            return degenerate ? kExitDegenerate : kExitOk;
        }

        if (mr->parsed()) {
            if (!(spins >= 1.0) || spins != std::floor(spins) || spins > 9e15) {
                std::cerr << "error: --spins must be a positive integer\n";
                return kExitUsage;
            }
            const auto conv = convention == "spins"
                                  ? qrf::MrfmSpinConvention::j_equals_spin_count
                                  : qrf::MrfmSpinConvention::j_equals_half_spin_count;
            qrf::LongevityResult r;
            try {
                r = qrf::mrfm_estimate(static_cast<long long>(spins), mr_epsilon, conv);
            } catch (const std::invalid_argument& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitUsage;
            }
            if (format == "json") {
                json doc;
                doc["command"] = "mrfm";
                doc["spins"] = static_cast<long long>(spins);
                doc["epsilon"] = r.epsilon;
                doc["j_convention"] = convention;
                doc["j"] = r.size;
                doc["n_uses"] = r.n_uses;
                doc["method"] = "analytic-directional";
                write_output(out_path, doc.dump(2) + "\n");
            } else {
                qrf::CsvTable table;
                table.header = {"spins", "epsilon", "j", "n_uses"};
                table.rows.push_back({qrf::format_integer(static_cast<long long>(spins)),
                                      qrf::format_double(r.epsilon), qrf::format_double(r.size),
                                      qrf::format_integer(r.n_uses)});
                write_output(out_path, qrf::to_csv(table));
            }
            return kExitOk;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
