#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "psnf/averaging.hpp"
#include "psnf/experiments.hpp"
#include "psnf/integrate.hpp"
#include "psnf/io.hpp"

using nlohmann::json;
using namespace psnf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct ParamFlags {
    double g = 0.5, b_max = 1.0, d = 0.015, s = 0.15, c = 0.5, k = 0.05;

    void attach(CLI::App* cmd) {
        cmd->add_option("--g", g, "growth rate, 1/month")->capture_default_str();
        cmd->add_option("--bmax", b_max, "carrying capacity, kg/cm^2")->capture_default_str();
        cmd->add_option("--d", d, "death rate, 1/month")->capture_default_str();
        cmd->add_option("--s", s, "toxin sensitivity, cm^2/(kg month)")->capture_default_str();
        cmd->add_option("--c", c, "toxin production rate")->capture_default_str();
        cmd->add_option("--k", k, "toxin decay rate, 1/month")->capture_default_str();
    }
    PlantParams build() const { return PlantParams::make(g, b_max, d, s, c, k); }
    json echo() const {
        return json{{"g", g}, {"bmax", b_max}, {"d", d}, {"s", s}, {"c", c}, {"k", k}};
    }
};

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
}

void write_json(const std::filesystem::path& path, const json& j) {
    write_file(path, j.dump(2) + "\n");
}

std::string settling_text(const std::optional<int>& ps) {
    return ps ? std::to_string(*ps) : "not-settled";
}

json report_json(const RunResult& run, const json& config_echo, std::uint64_t seed) {
    json metrics{{"e_r_percent", run.report.e_r_percent},
                 {"d_max", run.report.d_max},
                 {"ise", run.report.ise},
                 {"itae", run.report.itae}};
    if (run.report.settling_periods) {
        metrics["settling_periods"] = *run.report.settling_periods;
    } else {
        metrics["settling_periods"] = nullptr;
    }
    return json{{"metrics", metrics},
                {"d_ref", run.d_ref},
                {"duty_history", run.report.duty_history},
                {"error_history", run.report.error_history},
                {"final_state", json{{"b", run.report.final_state.b},
                                     {"t", run.report.final_state.t}}},
                {"clamp_count", run.report.clamp_count},
                {"config", config_echo},
                {"seed", seed}};
}

std::vector<double> make_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || hi < lo) throw std::invalid_argument("bad grid bounds/step");
    const long n = std::lround((hi - lo) / step) + 1;
    std::vector<double> grid(n);
    for (long i = 0; i < n; ++i) grid[i] = lo + static_cast<double>(i) * step;
    return grid;
}

// ---- simulate ----------------------------------------------------------

struct SimulateFlags {
    ParamFlags params;
    std::string controller = "pi";
    double bref = 0.9;
    int periods = 20;
    double period = 2.0;
    double gamma = 0.3;
    double h = 0.005;
    std::uint64_t seed = 1;
    double kp = 0.1, ki = 26.0, quant = 0.01;
    bool no_antiwindup = false;
    int horizon = 5;
    double duty = -1.0;
    double init_b = -1.0, init_t = -1.0;
    std::string out;
    std::string ga_log;
};

json simulate_echo(const SimulateFlags& f) {
    return json{{"controller", f.controller},
                {"bref", f.bref},
                {"periods", f.periods},
                {"period", f.period},
                {"gamma", f.gamma},
                {"h", f.h},
                {"kp", f.kp},
                {"ki", f.ki},
                {"quant", f.quant},
                {"antiwindup", !f.no_antiwindup},
                {"horizon", f.horizon},
                {"duty", f.duty},
                {"init_b", f.init_b},
                {"init_t", f.init_t},
                {"params", f.params.echo()}};
}

RunConfig simulate_config(const SimulateFlags& f) {
    RunConfig cfg;
    cfg.params = f.params.build();
    cfg.prediction_params = cfg.params;
    cfg.wave = PulseWave::make(f.period, 0.0, f.gamma);
    const auto kind = controller_from_name(f.controller);
    if (!kind) throw std::invalid_argument("unknown controller '" + f.controller + "'");
    cfg.controller = *kind;
    cfg.open_loop_duty = f.duty;
    cfg.pi.kp = f.kp;
    cfg.pi.ki = f.ki;
    cfg.pi.quantization_step = f.quant;
    cfg.pi.anti_windup = !f.no_antiwindup;
    cfg.mpc_horizon = f.horizon;
    cfg.b_ref_av = f.bref;
    cfg.n_periods = f.periods;
    cfg.h = f.h;
    cfg.seed = f.seed;
    if (f.init_b >= 0.0 && f.init_t >= 0.0) cfg.initial = State{f.init_b, f.init_t};
    return cfg;
}

int run_simulate(const SimulateFlags& f) {
    const RunConfig cfg = simulate_config(f);
    std::vector<EvolveResult> ga_trace;
    const RunResult run = run_closed_loop(cfg, f.ga_log.empty() ? nullptr : &ga_trace);

    const std::filesystem::path dir(f.out);
    std::filesystem::create_directories(dir);
    {
        std::ofstream traj(dir / "trajectory.csv", std::ios::binary);
        write_trajectory_csv(traj, run.trajectory);
        std::ofstream duty(dir / "duty.csv", std::ios::binary);
        write_duty_csv(duty, run.report);
    }
    write_json(dir / "report.json", report_json(run, simulate_echo(f), f.seed));
    if (!f.ga_log.empty()) {
        std::ofstream log(f.ga_log, std::ios::binary);
        log << "generation,best_cost,mean_cost\n";
        for (const auto& step : ga_trace) {
            int gen = 1;
            for (const auto& [best, mean] : step.history) {
                log << gen++ << ',' << format_double(best) << ',' << format_double(mean)
                    << '\n';
            }
        }
    }
    std::printf("e_r%%=%s P_s=%s ISE=%s ITAE=%s Dmax=%s\n",
                format_double(run.report.e_r_percent).c_str(),
                settling_text(run.report.settling_periods).c_str(),
                format_double(run.report.ise).c_str(),
                format_double(run.report.itae).c_str(),
                format_double(run.report.d_max).c_str());
    return kExitOk;
}

// ---- equilibria / feedforward / curve ----------------------------------

int run_equilibria(const ParamFlags& f, bool as_json) {
    const PlantParams p = f.build();
    const Equilibria eq = equilibria(p);
    if (as_json) {
        json j{{"params", f.echo()},
               {"alpha", p.alpha()},
               {"beta", p.beta()},
               {"kappa", p.kappa()},
               {"discriminant", p.discriminant()},
               {"dimensionless", json{{"b", eq.coexistence_scaled.b},
                                      {"t", eq.coexistence_scaled.t}}},
               {"dimensional", json{{"b", eq.coexistence.b}, {"t", eq.coexistence.t}}},
               {"ideal_biomass", ideal_biomass(p)}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::printf("alpha = %.15g\nbeta = %.15g\nkappa = %.15g\ndiscriminant = %.15g\n",
                    p.alpha(), p.beta(), p.kappa(), p.discriminant());
        std::printf("dimensionless equilibrium: B = %.15g, T = %.15g\n",
                    eq.coexistence_scaled.b, eq.coexistence_scaled.t);
        std::printf("dimensional equilibrium:   B = %.15g, T = %.15g\n",
                    eq.coexistence.b, eq.coexistence.t);
        std::printf("ideal biomass (toxin-free): %.15g\n", ideal_biomass(p));
    }
    return kExitOk;
}

int run_feedforward(const ParamFlags& f, double gamma, double bref, bool as_json) {
    const PlantParams p = f.build();
    const FeedforwardResult res = invert_feedforward(p, gamma, bref);
    if (as_json) {
        json j{{"params", f.echo()}, {"gamma", gamma}, {"bref", bref},
               {"duty", res.duty},   {"eta", res.eta}, {"saturated", res.saturated}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::printf("D_ref = %.15g (eta = %.15g)%s\n", res.duty, res.eta,
                    res.saturated ? "  [saturated at 1]" : "");
    }
    return kExitOk;
}

int run_curve(const ParamFlags& f, double gamma, int points, double bref,
              const std::string& out) {
    const PlantParams p = f.build();
    const FeedforwardCurve curve = tabulate_feedforward_curve(p, gamma, points);
    const std::filesystem::path dir(out);
    std::filesystem::create_directories(dir);
    {
        std::ofstream csv(dir / "curve.csv", std::ios::binary);
        write_curve_csv(csv, curve.duties(), curve.values());
    }
    json manifest{{"command", "curve"},
                  {"flags", json{{"gamma", gamma}, {"points", points}, {"bref", bref}}},
                  {"params", f.echo()}};
    write_json(dir / "manifest.json", manifest);
    if (bref > 0.0) {
        std::printf("lookup(%s) = %s\n", format_double(bref).c_str(),
                    format_double(curve.lookup(bref)).c_str());
    }
    return kExitOk;
}

// ---- tune-pi ------------------------------------------------------------

struct TuneFlags {
    ParamFlags params;
    double bref = 0.9;
    int periods = 20;
    double period = 2.0;
    double gamma = 0.3;
    double h = 0.005;
    double quant = 0.0;
    double kp_min = 0.0, kp_max = 2.0, kp_step = 0.1;
    double ki_min = 1.0, ki_max = 30.0, ki_step = 1.0;
    bool include_unsettled = false;
    int workers = 0;
    std::string out;
};

int run_tune(const TuneFlags& f) {
    RunConfig base;
    base.params = f.params.build();
    base.prediction_params = base.params;
    base.wave = PulseWave::make(f.period, 0.0, f.gamma);
    base.b_ref_av = f.bref;
    base.n_periods = f.periods;
    base.h = f.h;
    base.pi.quantization_step = f.quant;

    SweepConfig sweep;
    sweep.kp_grid = make_grid(f.kp_min, f.kp_max, f.kp_step);
    sweep.ki_grid = make_grid(f.ki_min, f.ki_max, f.ki_step);
    sweep.exclude_unsettled = !f.include_unsettled;
    sweep.workers = f.workers;

    const auto rows = tune_pi_grid(base, sweep);

    const std::filesystem::path dir(f.out);
    std::filesystem::create_directories(dir);
    {
        std::ofstream csv(dir / "tuning.csv", std::ios::binary);
        write_tuning_csv(csv, rows);
    }
    json manifest{{"command", "tune-pi"},
                  {"flags", json{{"bref", f.bref},
                                 {"periods", f.periods},
                                 {"period", f.period},
                                 {"gamma", f.gamma},
                                 {"h", f.h},
                                 {"quant", f.quant},
                                 {"kp-min", f.kp_min},
                                 {"kp-max", f.kp_max},
                                 {"kp-step", f.kp_step},
                                 {"ki-min", f.ki_min},
                                 {"ki-max", f.ki_max},
                                 {"ki-step", f.ki_step},
                                 {"include-unsettled", f.include_unsettled}}},
                  {"params", f.params.echo()}};
    write_json(dir / "manifest.json", manifest);

    int excluded = 0;
    for (const auto& row : rows) excluded += row.excluded ? 1 : 0;
    std::printf("evaluated %zu pairs, %d excluded -> %s\n", rows.size(), excluded,
                (dir / "tuning.csv").c_str());
    return kExitOk;
}

// ---- robustness ----------------------------------------------------------

struct RobustnessFlags {
    ParamFlags params;
    double bref = 0.9;
    int periods = 20;
    double period = 2.0;
    double gamma = 0.3;
    double h = 0.005;
    std::uint64_t seed = 1;
    std::vector<double> cv{0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
    int runs = 50;
    std::vector<std::string> controllers{"openloop", "pi", "mpc"};
    double kp = 0.1, ki = 26.0, quant = 0.01;
    int horizon = 5;
    int workers = 0;
    std::string out;
};

int run_robustness(const RobustnessFlags& f) {
    RunConfig base;
    base.params = f.params.build();
    base.prediction_params = base.params;
    base.wave = PulseWave::make(f.period, 0.0, f.gamma);
    base.b_ref_av = f.bref;
    base.n_periods = f.periods;
    base.h = f.h;
    base.seed = f.seed;
    base.pi.kp = f.kp;
    base.pi.ki = f.ki;
    base.pi.quantization_step = f.quant;
    base.mpc_horizon = f.horizon;

    SweepConfig sweep;
    sweep.cv_values = f.cv;
    sweep.runs_per_cv = f.runs;
    sweep.controllers.clear();
    for (const auto& name : f.controllers) {
        const auto kind = controller_from_name(name);
        if (!kind) throw std::invalid_argument("unknown controller '" + name + "'");
        sweep.controllers.push_back(*kind);
    }
    sweep.workers = f.workers;

    const RobustnessResult result = robustness_sweep(base, sweep);

    const std::filesystem::path dir(f.out);
    std::filesystem::create_directories(dir);
    {
        std::ofstream csv(dir / "robustness.csv", std::ios::binary);
        write_robustness_csv(csv, result.rows, base.n_periods);
    }
    json cells = json::array();
    for (const auto& cell : result.aggregates) {
        cells.push_back(json{
            {"controller", controller_name(cell.controller)},
            {"cv", cell.cv},
            {"n", cell.n},
            {"diverged", cell.diverged},
            {"not_settled", cell.not_settled},
            {"redraws", cell.redraws},
            {"e_r_percent", json{{"mean", cell.mean_e_r}, {"std", cell.std_e_r}}},
            {"settling_periods",
             json{{"mean", cell.mean_settling}, {"std", cell.std_settling}}},
            {"ise", json{{"mean", cell.mean_ise}, {"std", cell.std_ise}}},
            {"itae", json{{"mean", cell.mean_itae}, {"std", cell.std_itae}}}});
    }
    write_json(dir / "aggregate.json", json{{"cells", cells}});
    json manifest{{"command", "robustness"},
                  {"flags", json{{"bref", f.bref},
                                 {"periods", f.periods},
                                 {"period", f.period},
                                 {"gamma", f.gamma},
                                 {"h", f.h},
                                 {"seed", f.seed},
                                 {"cv", f.cv},
                                 {"runs", f.runs},
                                 {"controllers", f.controllers},
                                 {"kp", f.kp},
                                 {"ki", f.ki},
                                 {"quant", f.quant},
                                 {"horizon", f.horizon}}},
                  {"params", f.params.echo()}};
    write_json(dir / "manifest.json", manifest);
    std::printf("%zu rows -> %s\n", result.rows.size(), (dir / "robustness.csv").c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Plant-soil feedback mitigation toolkit: pulse-width modulated "
                 "toxin removal with feedforward, PI and MPC duty-cycle control"};
    app.require_subcommand(1);
    // --h is the integration-step flag, so help gets no short alias.
    app.set_help_flag("--help", "print help");

    ParamFlags eq_params;
    bool eq_json = false;
    auto* eq = app.add_subcommand("equilibria", "plant equilibria and dimensionless groups");
    eq_params.attach(eq);
    eq->set_help_flag("--help", "print help");
    eq->add_flag("--json", eq_json, "machine-readable output");
    eq->set_config("--config");

    ParamFlags ff_params;
    double ff_gamma = 0.3, ff_bref = 0.9;
    bool ff_json = false;
    auto* ff = app.add_subcommand("feedforward", "invert the averaged model for D_ref");
    ff_params.attach(ff);
    ff->set_help_flag("--help", "print help");
    ff->add_option("--gamma", ff_gamma, "removal amplitude, units of g")->capture_default_str();
    ff->add_option("--bref", ff_bref, "target average biomass (dimensionless)")
        ->capture_default_str();
    ff->add_flag("--json", ff_json, "machine-readable output");
    ff->set_config("--config");

    ParamFlags curve_params;
    double curve_gamma = 0.3, curve_bref = -1.0;
    int curve_points = 101;
    std::string curve_out = "curve_out";
    auto* cu = app.add_subcommand("curve", "tabulate the feedforward curve to CSV");
    curve_params.attach(cu);
    cu->set_help_flag("--help", "print help");
    cu->add_option("--gamma", curve_gamma)->capture_default_str();
    cu->add_option("--points", curve_points)->capture_default_str();
    cu->add_option("--bref", curve_bref, "also print lookup(bref)");
    cu->add_option("--out", curve_out, "output directory")->capture_default_str();
    cu->set_config("--config");

    SimulateFlags sim;
    auto* sc = app.add_subcommand("simulate", "one closed-loop run");
    sim.params.attach(sc);
    sc->set_help_flag("--help", "print help");
    sc->add_option("--controller", sim.controller, "openloop | pi | mpc")->capture_default_str();
    sc->add_option("--bref", sim.bref)->capture_default_str();
    sc->add_option("--periods", sim.periods)->capture_default_str();
    sc->add_option("--period", sim.period, "pulse period, months")->capture_default_str();
    sc->add_option("--gamma", sim.gamma)->capture_default_str();
    sc->add_option("--h", sim.h, "integration step, months")->capture_default_str();
    sc->add_option("--seed", sim.seed)->capture_default_str();
    sc->add_option("--kp", sim.kp)->capture_default_str();
    sc->add_option("--ki", sim.ki)->capture_default_str();
    sc->add_option("--quant", sim.quant, "duty quantum (0 disables)")->capture_default_str();
    sc->add_flag("--no-antiwindup", sim.no_antiwindup, "disable conditional integration");
    sc->add_option("--horizon", sim.horizon, "MPC horizon, periods")->capture_default_str();
    sc->add_option("--duty", sim.duty, "open-loop duty (default: feedforward D_ref)");
    sc->add_option("--init-b", sim.init_b, "initial biomass (default: settled start)");
    sc->add_option("--init-t", sim.init_t, "initial toxin (default: settled start)");
    sc->add_option("--ga-log", sim.ga_log, "per-generation GA log CSV (mpc only)");
    sc->add_option("--out", sim.out, "output directory")->required();
    sc->set_config("--config");

    TuneFlags tune;
    auto* tc = app.add_subcommand("tune-pi", "PI gain grid sweep");
    tune.params.attach(tc);
    tc->set_help_flag("--help", "print help");
    tc->add_option("--bref", tune.bref)->capture_default_str();
    tc->add_option("--periods", tune.periods)->capture_default_str();
    tc->add_option("--period", tune.period)->capture_default_str();
    tc->add_option("--gamma", tune.gamma)->capture_default_str();
    tc->add_option("--h", tune.h)->capture_default_str();
    tc->add_option("--quant", tune.quant)->capture_default_str();
    tc->add_option("--kp-min", tune.kp_min)->capture_default_str();
    tc->add_option("--kp-max", tune.kp_max)->capture_default_str();
    tc->add_option("--kp-step", tune.kp_step)->capture_default_str();
    tc->add_option("--ki-min", tune.ki_min)->capture_default_str();
    tc->add_option("--ki-max", tune.ki_max)->capture_default_str();
    tc->add_option("--ki-step", tune.ki_step)->capture_default_str();
    tc->add_flag("--include-unsettled", tune.include_unsettled,
                 "keep pairs that settle slower than 7 periods");
    tc->add_option("--workers", tune.workers, "0 = auto")->capture_default_str();
    tc->add_option("--out", tune.out, "output directory")->required();
    tc->set_config("--config");

    RobustnessFlags rob;
    auto* rc = app.add_subcommand("robustness", "Monte Carlo parameter sweep");
    rob.params.attach(rc);
    rc->set_help_flag("--help", "print help");
    rc->add_option("--bref", rob.bref)->capture_default_str();
    rc->add_option("--periods", rob.periods)->capture_default_str();
    rc->add_option("--period", rob.period)->capture_default_str();
    rc->add_option("--gamma", rob.gamma)->capture_default_str();
    rc->add_option("--h", rob.h)->capture_default_str();
    rc->add_option("--seed", rob.seed, "master seed")->capture_default_str();
    rc->add_option("--cv", rob.cv, "coefficients of variation")
        ->delimiter(',')
        ->capture_default_str();
    rc->add_option("--runs", rob.runs, "runs per CV")->capture_default_str();
    rc->add_option("--controllers", rob.controllers)->delimiter(',')->capture_default_str();
    rc->add_option("--kp", rob.kp)->capture_default_str();
    rc->add_option("--ki", rob.ki)->capture_default_str();
    rc->add_option("--quant", rob.quant)->capture_default_str();
    rc->add_option("--horizon", rob.horizon)->capture_default_str();
    rc->add_option("--workers", rob.workers, "0 = auto (PSNF_WORKERS overrides)")
        ->capture_default_str();
    rc->add_option("--out", rob.out, "output directory")->required();
    rc->set_config("--config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*eq) return run_equilibria(eq_params, eq_json);
        if (*ff) return run_feedforward(ff_params, ff_gamma, ff_bref, ff_json);
        if (*cu) return run_curve(curve_params, curve_gamma, curve_points, curve_bref, curve_out);
        if (*sc) return run_simulate(sim);
        if (*tc) return run_tune(tune);
        if (*rc) return run_robustness(rob);
    } catch (const IntegrationError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
