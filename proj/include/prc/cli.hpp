#pragma once

// prc_bench command line. run_cli() is the whole program; main() only forwards argv.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prc/prc.hpp"

namespace prc::cli {

namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

inline int exit_code(ErrorCategory c)
{
    switch (c) {
    case ErrorCategory::Usage: return kUsage;
    case ErrorCategory::Data: return kData;
    case ErrorCategory::Numerical: return kNumerical;
    }
    return kData;
}

inline std::string trial_name(int item, int index)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "item%d_trial%02d", item, index);
    return buf;
}

/// Every synced trial file in `dir` (name order), or raw *_daq/*_cam pairs when no synced files exist.
inline experiments::Dataset load_dataset(const fs::path& dir, const io::PayloadTable& table)
{
    if (!fs::is_directory(dir)) fail(ErrorKind::IoError, "data directory not found: " + dir.string());
    std::vector<fs::path> synced, raw;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
        const auto stem = e.path().stem().string();
        if (stem.ends_with("_daq")) raw.push_back(e.path().parent_path() / stem.substr(0, stem.size() - 4));
        else if (!stem.ends_with("_cam")) synced.push_back(e.path());
    }
    std::sort(synced.begin(), synced.end());
    std::sort(raw.begin(), raw.end());
    experiments::Dataset d;
    auto add = [&](reservoir::SyncedTrial t, const fs::path& p) {
        if (t.payload.item < 1 || t.payload.item > 5) fail(ErrorKind::SchemaError, p.string() + ": item_id must be 1..5");
        d[t.payload.item - 1].push_back(std::move(t));
    };
    if (!synced.empty()) {
        for (const auto& p : synced) add(io::read_trial(p, table), p);
    } else {
        for (const auto& p : raw) add(reservoir::decimate(io::read_raw(p, table)), p);
    }
    if (synced.empty() && raw.empty()) fail(ErrorKind::EmptySelection, "no trial files in " + dir.string());
    return d;
}

inline reservoir::FeatureSource parse_source(const std::string& s)
{
    if (s == "sensor") return reservoir::FeatureSource::Sensor;
    if (s == "visual") return reservoir::FeatureSource::Visual;
    fail(ErrorKind::ValidationError, "--source must be sensor or visual");
}

struct Options {
    std::string config;
    std::string out;
    std::string data;
    std::string model;
    std::string trial;
    std::string task = "all";
    std::string source = "sensor";
    std::string kind;
    std::string title;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    double window_start = 0.0;
    bool raw = false;
};

inline io::Config load(const Options& o)
{
    io::Config c = o.config.empty() ? io::Config{} : io::load_config(o.config);
    if (o.seed) c.plan.seed = *o.seed;
    if (o.trials) c.plan.trials = *o.trials;
    c.validate();
    return c;
}

inline int cmd_simulate(const Options& o, std::ostream& out)
{
    const auto cfg = load(o);
    const fs::path dir = o.out.empty() ? fs::path(cfg.paths.data) : fs::path(o.out);
    std::size_t n = 0;
    for (int item = 1; item <= 5; ++item) {
        for (int i = 0; i < cfg.plan.trials; ++i) {
            const auto seed = experiments::trial_seed(cfg.plan.seed, item, i);
            const auto raw = plant::simulate_trial(cfg.setup.plant, cfg.setup.payloads[item - 1], cfg.setup.plant.schedule.duration, seed);
            Rng rng(derive_seed({seed, kStreamCircuit}));
            const auto rec = reservoir::measure_trial(raw, cfg.setup.circuit, {}, rng);
            io::write_trial(reservoir::decimate(rec), dir / (trial_name(item, i) + ".csv"));
            if (o.raw) io::write_raw(rec, dir / "raw" / trial_name(item, i));
            ++n;
        }
    }
    out << "wrote " << n << " trials to " << dir.string() << "\n";
    return kOk;
}

inline int cmd_train(const Options& o, std::ostream& out)
{
    const auto cfg = load(o);
    const auto src = parse_source(o.source);
    const auto d = load_dataset(o.data.empty() ? cfg.paths.data : o.data, cfg.setup.payloads);
    const fs::path model = o.out.empty() ? fs::path(cfg.paths.model) : fs::path(o.out);
    tasks::ReadoutBank bank = fs::exists(model) ? io::load_model(model) : tasks::ReadoutBank{};

    static constexpr std::array<int, 5> all{1, 2, 3, 4, 5};
    static constexpr std::array<int, 2> dir{2, 3};
    static constexpr std::array<int, 2> close{4, 5};
    const auto& plan = cfg.plan;
    auto set = [&](int item) -> const std::vector<const reservoir::SyncedTrial*> {
        if (d[item - 1].empty()) fail(ErrorKind::MissingCondition, "no trials for item " + std::to_string(item));
        return experiments::training_set(d, plan, std::array<int, 1>{item});
    };
    auto need = [&](std::span<const int> items) {
        for (int i : items) set(i);
        return items;
    };
    const bool every = o.task == "all";
    if (!every && o.task != "posture" && o.task != "weight" && o.task != "direction" && o.task != "closeweight") {
        fail(ErrorKind::ValidationError, "--task must be posture, weight, direction, closeweight or all");
    }
    if (every || o.task == "posture") {
        if (src != reservoir::FeatureSource::Sensor) fail(ErrorKind::ValidationError, "posture readouts use the sensor source");
        for (int item : all) {
            if (d[item - 1].empty()) continue;
            bank[item] = tasks::train_posture(*set(item)[0], plan.lambda);
            out << "trained W(" << item << ") posture\n";
        }
    }
    if (every || o.task == "weight") {
        bank[6] = tasks::train_weight(experiments::training_set(d, plan, need(all)), src, plan.lambda);
        out << "trained W(6) weight [" << reservoir::to_string(src) << "]\n";
    }
    if (every || o.task == "direction") {
        bank[7] = tasks::train_direction(experiments::training_set(d, plan, need(dir)), src, plan.lambda);
        out << "trained W(7) direction [" << reservoir::to_string(src) << "]\n";
    }
    if (every || o.task == "closeweight") {
        bank[8] = tasks::train_closeweight(experiments::training_set(d, plan, need(close)), src, plan.lambda);
        out << "trained W(8) closeweight [" << reservoir::to_string(src) << "]\n";
    }
    io::save_model(bank, model);
    out << "model written to " << model.string() << "\n";
    return kOk;
}

inline void print_row(std::ostream& out, const std::string& a, const std::string& b)
{
    out << "  " << a << std::string(a.size() < 28 ? 28 - a.size() : 1, ' ') << b << "\n";
}

inline int cmd_eval(const Options& o, std::ostream& out)
{
    const auto cfg = load(o);
    const auto d = load_dataset(o.data.empty() ? cfg.paths.data : o.data, cfg.setup.payloads);
    const auto bank = io::load_model(o.model.empty() ? cfg.paths.model : o.model);
    const auto& plan = cfg.plan;

    out << "posture (gripper NRMSE, frames 120-239, held-out trials)\n";
    for (int item = 1; item <= 5; ++item) {
        if (!bank[item] || d[item - 1].empty()) continue;
        std::vector<double> v;
        const int skip = experiments::training_trial(plan, item, static_cast<int>(d[item - 1].size()));
        for (std::size_t a = 0; a < d[item - 1].size(); ++a) {
            if (static_cast<int>(a) == skip && d[item - 1].size() > 1) continue;
            v.push_back(tasks::eval_posture(*bank[item], d[item - 1][a])[reservoir::kTracked - 1]);
        }
        const auto m = experiments::mean_std(v);
        print_row(out, "W(" + std::to_string(item) + ") on item " + std::to_string(item), io::format_double(m.mean) + " +- " + io::format_double(m.std));
    }
    if (bank[6]) {
        const auto s = experiments::weight_box_stats(bank, d, plan);
        out << "weight estimate [" << reservoir::to_string(s.source) << "] (g, p25 / p50 / p75 over " << plan.repeats << " windows)\n";
        for (int c = 0; c < 5; ++c) {
            const auto& b = s.boxes[c];
            print_row(out, "item " + std::to_string(c + 1) + " (" + io::format_double(cfg.setup.payloads[c].mass) + " g)",
                      io::format_double(b.p25) + " / " + io::format_double(b.p50) + " / " + io::format_double(b.p75));
        }
        if (!o.out.empty()) io::write_file(fs::path(o.out) / "weight_boxes.csv", io::box_stats_csv(std::span(&s, 1)));
    }
    if (bank[7] && bank[8]) {
        const auto a = experiments::accuracy_eval(bank, d, plan);
        out << "classification\n";
        print_row(out, "direction accuracy", std::to_string(a.direction_correct) + "/" + std::to_string(a.direction_total));
        print_row(out, "close-weight accuracy", std::to_string(a.closeweight_correct) + "/" + std::to_string(a.closeweight_total));
        print_row(out, "close-weight relative MAE", io::format_double(a.closeweight_relative_mae));
        if (!o.out.empty()) io::write_file(fs::path(o.out) / "accuracy.csv", io::accuracy_csv(std::span(&a, 1)));
    }
    if (bank.complete()) {
        const auto t = experiments::pipeline_eval(bank, d, plan, cfg.setup.thresholds);
        out << "pipeline (correct item over " << plan.repeats << " runs)\n";
        for (int c = 0; c < 5; ++c) print_row(out, "item " + std::to_string(c + 1), std::to_string(t.correct[c]) + "/" + std::to_string(t.runs[c]));
    }
    return kOk;
}

inline int cmd_pipeline(const Options& o, std::ostream& out)
{
    const auto cfg = load(o);
    const auto bank = io::load_model(o.model.empty() ? cfg.paths.model : o.model);
    if (o.trial.empty()) fail(ErrorKind::ValidationError, "pipeline needs --trial");
    const auto trial = io::read_trial(o.trial, cfg.setup.payloads);
    const auto window = reservoir::FrameRange::from_seconds(o.window_start, cfg.plan.window);
    const auto r = tasks::run_pipeline(bank, trial, window, cfg.setup.thresholds);
    out << "window        frames " << r.window.begin << "-" << r.window.end - 1 << "\n";
    out << "weight        " << io::format_double(r.weight) << " g\n";
    out << "scenario      " << tasks::to_string(r.scenario) << "\n";
    if (r.direction_output) out << "direction     " << io::format_double(*r.direction_output) << "\n";
    if (r.closeweight_output) out << "close-weight  " << io::format_double(*r.closeweight_output) << " g\n";
    out << "item          " << r.item << "\n";
    out << "readout       W(" << r.readout << ")\n";
    out << "trajectory    " << r.trajectory.rows() << " frames\n";
    const fs::path dest = o.out.empty() ? fs::path(cfg.paths.out) / "trajectory.csv" : fs::path(o.out);
    io::write_file(dest, io::trajectory_csv(r, &trial));
    out << "trajectory written to " << dest.string() << "\n";
    return kOk;
}

inline int cmd_sweep(const Options& o, std::ostream& out)
{
    const auto cfg = load(o);
    if (o.kind != "reduction" && o.kind != "failure") fail(ErrorKind::ValidationError, "--kind must be reduction or failure");
    const auto d = load_dataset(o.data.empty() ? cfg.paths.data : o.data, cfg.setup.payloads);
    const auto s = o.kind == "reduction" ? experiments::sensor_reduction_sweep(d, cfg.plan) : experiments::failure_sweep(d, cfg.plan);
    const fs::path dest = o.out.empty() ? fs::path(cfg.paths.out) / (o.kind + ".csv") : fs::path(o.out);
    io::write_file(dest, io::sweep_csv(s));
    for (const auto& p : s.points) {
        out << (o.kind == "reduction" ? "k=" : "f=") << p.x << "  posture " << io::format_double(p.posture.mean) << "  weight "
            << io::format_double(p.weight.mean) << "  closeweight " << io::format_double(p.closeweight.mean) << "\n";
    }
    out << "sweep written to " << dest.string() << "\n";
    return kOk;
}

inline int cmd_report(const Options& o, std::ostream& out)
{
    if (o.data.empty()) fail(ErrorKind::ValidationError, "report needs --data <results.csv>");
    const fs::path src(o.data);
    const fs::path dest = o.out.empty() ? fs::path(src).replace_extension(".svg") : fs::path(o.out);
    io::write_file(dest, io::render_svg(io::read_file(src), o.title.empty() ? src.stem().string() : o.title));
    out << "plot written to " << dest.string() << "\n";
    return kOk;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Reservoir-computing sensing workbench for a simulated soft arm", "prc_bench"};
    app.require_subcommand(0, 1);
    Options o;
    bool print_defaults = false;
    app.add_flag("--print-defaults", print_defaults, "Print the default configuration and exit");

    auto common = [&](CLI::App* c) {
        c->add_option("--config", o.config, "Configuration file");
        c->add_option("--seed", o.seed, "Base seed (overrides plan.seed)");
    };
    auto* sim = app.add_subcommand("simulate", "Simulate trials and write trial CSV files");
    common(sim);
    sim->add_option("--out", o.out, "Output directory");
    sim->add_option("--trials", o.trials, "Trials per payload condition");
    sim->add_flag("--raw", o.raw, "Also write 1 kHz / 60 fps raw files under <out>/raw");

    auto* train = app.add_subcommand("train", "Train readouts into a model file (existing slots are replaced)");
    common(train);
    train->add_option("--task", o.task, "posture | weight | direction | closeweight | all");
    train->add_option("--data", o.data, "Trial directory");
    train->add_option("--source", o.source, "sensor | visual");
    train->add_option("--out", o.out, "Model file");

    auto* eval = app.add_subcommand("eval", "Print NRMSE and accuracy tables for a model");
    common(eval);
    eval->add_option("--model", o.model, "Model file");
    eval->add_option("--data", o.data, "Trial directory");
    eval->add_option("--out", o.out, "Directory for result CSVs");

    auto* pipe = app.add_subcommand("pipeline", "Run hierarchical inference on one trial");
    common(pipe);
    pipe->add_option("--model", o.model, "Model file (complete bank)");
    pipe->add_option("--trial", o.trial, "Trial CSV");
    pipe->add_option("--window-start", o.window_start, "Window start in seconds");
    pipe->add_option("--out", o.out, "Trajectory CSV");

    auto* sweep = app.add_subcommand("sweep", "Sensor reduction or failure sweep");
    common(sweep);
    sweep->add_option("--kind", o.kind, "reduction | failure")->required();
    sweep->add_option("--data", o.data, "Trial directory");
    sweep->add_option("--out", o.out, "Result CSV");

    auto* report = app.add_subcommand("report", "Render a result CSV as an SVG plot");
    report->add_option("--data", o.data, "Result CSV")->required();
    report->add_option("--out", o.out, "SVG file");
    report->add_option("--title", o.title, "Plot title");

    auto* defaults = app.add_subcommand("print-defaults", "Print the default configuration");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kUsage;
    }

    try {
        if (print_defaults || defaults->parsed()) {
            out << io::print_defaults();
            return kOk;
        }
        if (sim->parsed()) return cmd_simulate(o, out);
        if (train->parsed()) return cmd_train(o, out);
        if (eval->parsed()) return cmd_eval(o, out);
        if (pipe->parsed()) return cmd_pipeline(o, out);
        if (sweep->parsed()) return cmd_sweep(o, out);
        if (report->parsed()) return cmd_report(o, out);
        err << app.help();
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e.category());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kData;
    }
}

} // namespace prc::cli
