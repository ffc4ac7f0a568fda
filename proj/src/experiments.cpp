#include "psnf/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "psnf/averaging.hpp"
#include "psnf/integrate.hpp"
#include "psnf/io.hpp"

namespace psnf {

const char* controller_name(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::open_loop: return "openloop";
        case ControllerKind::pi: return "pi";
        case ControllerKind::mpc: return "mpc";
    }
    return "?";
}

std::uint64_t controller_id(ControllerKind kind) {
    return static_cast<std::uint64_t>(kind);
}

std::optional<ControllerKind> controller_from_name(const std::string& name) {
    if (name == "openloop" || name == "open-loop") return ControllerKind::open_loop;
    if (name == "pi") return ControllerKind::pi;
    if (name == "mpc") return ControllerKind::mpc;
    return std::nullopt;
}

void RunConfig::validate() const {
    params.validate();
    prediction_params.validate();
    wave.validate();
    pi.validate();
    ga.validate();
    if (mpc_horizon < 1) throw std::invalid_argument("MPC horizon must be at least one period");
    if (n_periods < 6) throw std::invalid_argument("need at least 6 periods (metrics use a 5-period tail)");
    if (!(b_ref_av > 0.0) || b_ref_av > 1.0) {
        throw std::invalid_argument("reference biomass must lie in (0, 1] (dimensionless)");
    }
    if (!(h > 0.0)) throw std::invalid_argument("integration step must be positive");
    if (controller == ControllerKind::open_loop && open_loop_duty > 1.0) {
        throw std::invalid_argument("open-loop duty outside [0, 1]");
    }
}

namespace {

// Default initial state: the plant's own periodic regime under the duty the
// run starts with. Starting from the uncontrolled equilibrium instead would
// make every early error sample saturate the duty: the removal amplitude
// bounds how fast the accumulated toxin can leave, so the loop would spend
// several periods at the actuator limit no matter the controller.
State settled_start(const PlantParams& params, const PulseWave& wave, double duty,
                    double h) {
    const double eta = wave.gamma * duty / params.kappa();
    const double b_av = averaged_equilibrium(params, wave.gamma, duty);
    const State guess = dimensionalize(params, State{b_av, averaged_toxin_at(params, eta, b_av)});
    const double warm_end =
        std::ceil(240.0 / wave.period) * wave.period;  // slowest pole ~0.1/month
    return simulate_period_mean(params, wave, duty, guess, 0.0, warm_end, h).end_state;
}

void append_segment(Trajectory& full, const Trajectory& seg) {
    if (!full.empty()) {
        // Boundary sample is re-emitted by the new segment (right-continuous input).
        full.times.pop_back();
        full.states.pop_back();
        full.inputs.pop_back();
    }
    full.times.insert(full.times.end(), seg.times.begin(), seg.times.end());
    full.states.insert(full.states.end(), seg.states.begin(), seg.states.end());
    full.inputs.insert(full.inputs.end(), seg.inputs.begin(), seg.inputs.end());
    full.clamp_count += seg.clamp_count;
}

}  // namespace

RunResult run_closed_loop(const RunConfig& cfg, std::vector<EvolveResult>* ga_trace) {
    cfg.validate();
    const double period = cfg.wave.period;
    const double b_ref = cfg.b_ref_av * cfg.prediction_params.b_max;

    const double d_ref =
        invert_feedforward(cfg.prediction_params, cfg.wave.gamma, cfg.b_ref_av).duty;
    double duty = d_ref;
    if (cfg.controller == ControllerKind::open_loop && cfg.open_loop_duty >= 0.0) {
        duty = cfg.open_loop_duty;
    }

    PiConfig pi_cfg = cfg.pi;
    pi_cfg.d_ref = d_ref;
    pi_cfg.validate();
    PiState pi_state{0.0, duty};

    MpcConfig mpc_cfg;
    mpc_cfg.horizon = cfg.mpc_horizon;
    mpc_cfg.ga = cfg.ga;
    mpc_cfg.b_ref_av = cfg.b_ref_av;
    mpc_cfg.prediction_params = cfg.prediction_params;
    mpc_cfg.wave = cfg.wave;
    mpc_cfg.h = cfg.h;

    State state =
        cfg.initial ? *cfg.initial : settled_start(cfg.params, cfg.wave, duty, cfg.h);

    Trajectory full;
    full.period = period;
    RunReport report;
    report.error_history.push_back(0.0);  // the first duty precedes any measurement

    for (int i = 0; i < cfg.n_periods; ++i) {
        report.duty_history.push_back(duty);
        const Trajectory seg = integrate_segment(cfg.params, cfg.wave, duty, state,
                                                 i * period, (i + 1) * period, cfg.h);
        state = seg.back_state();
        append_segment(full, seg);

        if (i + 1 < cfg.n_periods) {
            const double mean = period_mean_biomass(seg, i * period, (i + 1) * period);
            const double error = b_ref - mean;
            switch (cfg.controller) {
                case ControllerKind::open_loop:
                    break;
                case ControllerKind::pi:
                    duty = pi_step(pi_cfg, pi_state, error);
                    break;
                case ControllerKind::mpc: {
                    EvolveResult detail;
                    duty = mpc_step(
                        mpc_cfg, state, duty,
                        derive_stream(cfg.seed, {streams::mpc_period,
                                                 static_cast<std::uint64_t>(i + 1)}),
                        ga_trace != nullptr ? &detail : nullptr);
                    if (ga_trace != nullptr) ga_trace->push_back(std::move(detail));
                    break;
                }
            }
            report.error_history.push_back(error);
        }
    }

    report.d_max = max_duty(report.duty_history);
    report.e_r_percent = steady_state_error_percent(full, b_ref, cfg.n_periods);
    report.settling_periods = settling_periods(full, b_ref, 0.10);
    report.ise = ise(full, b_ref, period, cfg.n_periods * period);
    report.itae = itae(full, b_ref, period, cfg.n_periods * period);
    report.final_state = state;
    report.clamp_count = full.clamp_count;

    return RunResult{std::move(full), std::move(report), d_ref};
}

int resolve_workers(int requested) {
    if (const char* env = std::getenv("PSNF_WORKERS")) {
        const int forced = std::atoi(env);
        if (forced > 0) return forced;
    }
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& body) {
    workers = std::max(1, workers);
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    const int n_threads = static_cast<int>(std::min<std::size_t>(workers, n));
    pool.reserve(n_threads);
    for (int w = 0; w < n_threads; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::vector<TuneRow> tune_pi_grid(const RunConfig& base, const SweepConfig& sweep) {
    if (sweep.kp_grid.empty() || sweep.ki_grid.empty()) {
        throw std::invalid_argument("tuning grids must be non-empty");
    }
    const std::size_t n = sweep.kp_grid.size() * sweep.ki_grid.size();
    std::vector<TuneRow> rows(n);

    parallel_for(n, resolve_workers(sweep.workers), [&](std::size_t idx) {
        const std::size_t ip = idx / sweep.ki_grid.size();
        const std::size_t ii = idx % sweep.ki_grid.size();
        TuneRow& row = rows[idx];
        row.kp = sweep.kp_grid[ip];
        row.ki = sweep.ki_grid[ii];

        RunConfig cfg = base;
        cfg.controller = ControllerKind::pi;
        cfg.pi.kp = row.kp;
        cfg.pi.ki = row.ki;
        try {
            const RunResult run = run_closed_loop(cfg);
            row.e_r_percent = run.report.e_r_percent;
            row.settling_periods = run.report.settling_periods;
            row.d_max = run.report.d_max;
            row.ise = run.report.ise;
            row.itae = run.report.itae;
            bool saturated = false;
            for (double d : run.report.duty_history) {
                if (d >= 0.995 || d <= 0.005) saturated = true;
            }
            if (saturated) {
                row.excluded = true;
                row.reason = "saturation";
            } else if (sweep.exclude_unsettled &&
                       (!run.report.settling_periods || *run.report.settling_periods > 7)) {
                row.excluded = true;
                row.reason = "settling";
            }
        } catch (const IntegrationError&) {
            row.excluded = true;
            row.reason = "diverged";
            row.e_r_percent = std::numeric_limits<double>::quiet_NaN();
            row.d_max = std::numeric_limits<double>::quiet_NaN();
            row.ise = std::numeric_limits<double>::quiet_NaN();
            row.itae = std::numeric_limits<double>::quiet_NaN();
        }
    });
    return rows;
}

PlantParams draw_params(const PlantParams& nominal, double cv, Rng& rng,
                        long& redraws) {
    if (cv < 0.0) throw std::invalid_argument("coefficient of variation must be non-negative");
    for (int attempt = 0; attempt < 100000; ++attempt) {
        PlantParams p = nominal;  // draw order: g, b_max, d, s, c, k
        p.g = rng.normal(nominal.g, cv * nominal.g);
        p.b_max = rng.normal(nominal.b_max, cv * nominal.b_max);
        p.d = rng.normal(nominal.d, cv * nominal.d);
        p.s = rng.normal(nominal.s, cv * nominal.s);
        p.c = rng.normal(nominal.c, cv * nominal.c);
        p.k = rng.normal(nominal.k, cv * nominal.k);
        if (p.g > 0.0 && p.b_max > 0.0 && p.d > 0.0 && p.s > 0.0 && p.c > 0.0 &&
            p.k > 0.0 && p.g > p.d) {
            return p;
        }
        ++redraws;
    }
    throw std::runtime_error("parameter draw kept violating positivity/g>d");
}

RobustnessResult robustness_sweep(const RunConfig& base, const SweepConfig& sweep) {
    if (sweep.cv_values.empty()) throw std::invalid_argument("no CV values given");
    if (sweep.runs_per_cv < 1) throw std::invalid_argument("need at least one run per CV");
    if (sweep.controllers.empty()) throw std::invalid_argument("no controllers selected");

    const double d_ref_nominal =
        invert_feedforward(base.prediction_params, base.wave.gamma, base.b_ref_av).duty;

    const std::size_t n_ctrl = sweep.controllers.size();
    const std::size_t n_tasks =
        sweep.cv_values.size() * static_cast<std::size_t>(sweep.runs_per_cv);

    RobustnessResult result;
    result.rows.resize(n_tasks * n_ctrl);

    parallel_for(n_tasks, resolve_workers(sweep.workers), [&](std::size_t task) {
        const std::size_t cv_idx = task / sweep.runs_per_cv;
        const int run_idx = static_cast<int>(task % sweep.runs_per_cv);
        const double cv = sweep.cv_values[cv_idx];

        Rng param_rng(derive_stream(base.seed, {streams::parameter_draw,
                                                static_cast<std::uint64_t>(cv_idx),
                                                static_cast<std::uint64_t>(run_idx)}));
        long redraws = 0;
        const PlantParams drawn = draw_params(base.params, cv, param_rng, redraws);
        // The field has been under the nominally designed schedule; every
        // controller takes over from that same state.
        const State initial = settled_start(drawn, base.wave, d_ref_nominal, base.h);

        for (std::size_t ci = 0; ci < n_ctrl; ++ci) {
            const ControllerKind kind = sweep.controllers[ci];
            RobustnessRow& row = result.rows[task * n_ctrl + ci];
            row.controller = kind;
            row.cv = cv;
            row.run = run_idx;
            row.drawn = drawn;
            row.redraws = redraws;
            row.seed = derive_stream(base.seed, {streams::controller,
                                                 static_cast<std::uint64_t>(cv_idx),
                                                 static_cast<std::uint64_t>(run_idx),
                                                 controller_id(kind)});

            RunConfig cfg = base;
            cfg.params = drawn;
            cfg.controller = kind;
            cfg.initial = initial;
            cfg.seed = row.seed;
            if (kind == ControllerKind::open_loop) cfg.open_loop_duty = d_ref_nominal;
            try {
                const RunResult run = run_closed_loop(cfg);
                row.e_r_percent = run.report.e_r_percent;
                row.settling_periods = run.report.settling_periods;
                row.ise = run.report.ise;
                row.itae = run.report.itae;
            } catch (const IntegrationError&) {
                row.diverged = true;
                row.e_r_percent = std::numeric_limits<double>::quiet_NaN();
                row.ise = std::numeric_limits<double>::quiet_NaN();
                row.itae = std::numeric_limits<double>::quiet_NaN();
            }
        }
    });

    result.aggregates = aggregate_rows(result.rows, sweep, base.n_periods);
    return result;
}

namespace {

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd out;
    if (xs.empty()) return out;
    // Identical samples (e.g. cv = 0) must report exactly zero spread.
    if (std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); })) {
        out.mean = xs.front();
        return out;
    }
    for (double x : xs) out.mean += x;
    out.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        out.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return out;
}

}  // namespace

std::vector<AggregateCell> aggregate_rows(const std::vector<RobustnessRow>& rows,
                                          const SweepConfig& sweep, int n_periods) {
    std::vector<AggregateCell> cells;
    for (ControllerKind kind : sweep.controllers) {
        for (double cv : sweep.cv_values) {
            AggregateCell cell;
            cell.controller = kind;
            cell.cv = cv;
            std::vector<double> e_r, ps, ise_v, itae_v;
            for (const auto& row : rows) {
                if (row.controller != kind || row.cv != cv) continue;
                cell.redraws += row.redraws;
                if (row.diverged) {
                    ++cell.diverged;
                    continue;
                }
                ++cell.n;
                e_r.push_back(row.e_r_percent);
                ise_v.push_back(row.ise);
                itae_v.push_back(row.itae);
                if (row.settling_periods) {
                    ps.push_back(static_cast<double>(*row.settling_periods));
                } else {
                    ++cell.not_settled;
                    ps.push_back(static_cast<double>(n_periods));
                }
            }
            const MeanStd m_er = mean_std(e_r);
            const MeanStd m_ps = mean_std(ps);
            const MeanStd m_ise = mean_std(ise_v);
            const MeanStd m_itae = mean_std(itae_v);
            cell.mean_e_r = m_er.mean;
            cell.std_e_r = m_er.std;
            cell.mean_settling = m_ps.mean;
            cell.std_settling = m_ps.std;
            cell.mean_ise = m_ise.mean;
            cell.std_ise = m_ise.std;
            cell.mean_itae = m_itae.mean;
            cell.std_itae = m_itae.std;
            cells.push_back(cell);
        }
    }
    return cells;
}

void write_tuning_csv(std::ostream& out, const std::vector<TuneRow>& rows) {
    out << "kp,ki,excluded,reason,e_r_percent,settling_periods,d_max,ise,itae\n";
    for (const auto& row : rows) {
        out << format_double(row.kp) << ',' << format_double(row.ki) << ','
            << (row.excluded ? 1 : 0) << ',' << row.reason << ','
            << format_double(row.e_r_percent) << ',';
        if (row.settling_periods) {
            out << *row.settling_periods;
        } else {
            out << -1;
        }
        out << ',' << format_double(row.d_max) << ',' << format_double(row.ise) << ','
            << format_double(row.itae) << '\n';
    }
}

void write_robustness_csv(std::ostream& out, const std::vector<RobustnessRow>& rows,
                          int n_periods) {
    (void)n_periods;
    out << "controller,cv,run,seed,e_r_percent,settling_periods,ise,itae,diverged\n";
    for (const auto& row : rows) {
        out << controller_name(row.controller) << ',' << format_double(row.cv) << ','
            << row.run << ',' << row.seed << ',' << format_double(row.e_r_percent)
            << ',';
        if (row.settling_periods) {
            out << *row.settling_periods;
        } else {
            out << -1;  // aggregates substitute n_periods
        }
        out << ',' << format_double(row.ise) << ',' << format_double(row.itae) << ','
            << (row.diverged ? 1 : 0) << '\n';
    }
}

void write_duty_csv(std::ostream& out, const RunReport& report) {
    out << "period_index,duty,error\n";
    for (std::size_t i = 0; i < report.duty_history.size(); ++i) {
        out << i << ',' << format_double(report.duty_history[i]) << ','
            << format_double(report.error_history[i]) << '\n';
    }
}

void write_curve_csv(std::ostream& out, const std::vector<double>& duties,
                     const std::vector<double>& values) {
    out << "D,B_av_star\n";
    for (std::size_t i = 0; i < duties.size(); ++i) {
        out << format_double(duties[i]) << ',' << format_double(values[i]) << '\n';
    }
}

}  // namespace psnf
