#include <catch_amalgamated.hpp>

#include <filesystem>
#include <limits>

#include "prc/experiments.hpp"
#include "prc/io/config.hpp"
#include "prc/io/model_file.hpp"
#include "prc/io/report.hpp"
#include "prc/io/trial_file.hpp"
#include "xml_check.hpp"

using namespace prc;
using namespace prc::io;
namespace fs = std::filesystem;
using reservoir::FeatureSource;

namespace {

reservoir::SyncedTrial sim_trial(int item = 3)
{
    experiments::Setup s;
    return experiments::simulate_synced(s, s.payloads[item - 1], 77);
}

ErrorKind kind_of(auto&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error raised");
    return ErrorKind::IoError;
}

fs::path scratch(const std::string& name)
{
    const auto p = fs::current_path() / "io_scratch" / name;
    fs::create_directories(p.parent_path());
    return p;
}

} // namespace

TEST_CASE("shortest round-trip number formatting")
{
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 4.9e-324, -0.0, 123456789.0}) {
        const auto s = format_double(v);
        const auto back = parse_double(s);
        REQUIRE(back.has_value());
        CHECK(std::bit_cast<std::uint64_t>(*back) == std::bit_cast<std::uint64_t>(v));
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK_FALSE(parse_double("1.5x").has_value());
    CHECK_FALSE(parse_double("").has_value());
    CHECK(parse_double(" +2 ").value() == 2.0);
}

TEST_CASE("trial files round-trip bitwise")
{
    const auto t = sim_trial();
    const auto p = scratch("trial.csv");
    write_trial(t, p);
    const auto back = read_trial(p);
    CHECK(back.sensors == t.sensors);
    CHECK(back.markers == t.markers);
    CHECK(back.tracked == t.tracked);
    CHECK(back.payload.item == 3);
    CHECK(back.payload.mass == 100.0);
    CHECK(format_trial(back) == format_trial(t));
}

TEST_CASE("partial trial files")
{
    auto t = sim_trial(1);
    auto sensor_only = t;
    sensor_only.markers.resize(0, 0);
    sensor_only.tracked.resize(0, 0);
    const auto s = parse_trial(format_trial(sensor_only));
    CHECK(s.has_sensors());
    CHECK_FALSE(s.has_visual());
    CHECK_THROWS_AS(reservoir::assemble(s, FeatureSource::Visual, {0, 10}), Error);

    auto visual_only = t;
    visual_only.sensors.resize(0, 0);
    const auto v = parse_trial(format_trial(visual_only));
    CHECK(v.has_visual());
    CHECK(v.tracked == t.tracked);
}

TEST_CASE("trial schema errors")
{
    std::string header = "t";
    for (int i = 1; i <= 11; ++i) header += ",s" + std::to_string(i);
    header += ",item_id\n";
    std::string eleven = header + "0";
    for (int i = 0; i < 11; ++i) eleven += ",1";
    eleven += ",1\n";
    CHECK(kind_of([&] { parse_trial(eleven); }) == ErrorKind::SchemaError);

    const auto good = format_trial(sim_trial());
    auto ls = lines(good);
    std::string swapped = std::string(ls[0]) + "\n" + std::string(ls[2]) + "\n" + std::string(ls[1]) + "\n";
    CHECK(kind_of([&] { parse_trial(swapped); }) == ErrorKind::SchemaError);

    std::string short_row = std::string(ls[0]) + "\n0,1,2\n";
    try {
        parse_trial(short_row);
        FAIL("expected SchemaError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SchemaError);
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
    std::string nan_cell = std::string(ls[0]) + "\n" + std::string(ls[1]);
    nan_cell.replace(nan_cell.rfind(','), 1, ",x,");
    CHECK(kind_of([&] { parse_trial(nan_cell); }) == ErrorKind::SchemaError);
    CHECK(kind_of([&] { read_trial(scratch("does_not_exist.csv")); }) == ErrorKind::IoError);
}

TEST_CASE("foreign log with the same schema trains readouts")
{
    // hand-built log: different values, same columns, item 2
    std::string csv = "t";
    for (int i = 1; i <= 12; ++i) csv += ",s" + std::to_string(i);
    for (int i = 1; i <= 9; ++i) csv += ",m" + std::to_string(i);
    csv += ",item_id\n";
    for (int k = 0; k < 300; ++k) {
        csv += format_double(k / 20.0);
        for (int j = 0; j < 12; ++j) csv += "," + format_double(0.5 + 0.1 * std::sin(0.3 * k + j));
        for (int m = 0; m < 9; ++m) csv += "," + format_double(3.0 + std::cos(0.3 * k + m));
        csv += ",2\n";
    }
    const auto t = parse_trial(csv);
    CHECK(t.frames() == 300);
    CHECK(t.payload.mass == 100.0);
    const auto w = tasks::train_posture(t, 0.1);
    CHECK(w.condition == 2);
    CHECK(tasks::eval_posture(w, t)[4] < 1.0);
}

TEST_CASE("raw recordings round-trip and decimate")
{
    experiments::Setup s;
    const auto raw = plant::simulate_trial(s.plant, s.payloads[0], 2.0, 5);
    Rng rng(1);
    const auto rec = reservoir::measure_trial(raw, s.circuit, {}, rng);
    const auto stem = scratch("raw/item1");
    write_raw(rec, stem);
    const auto back = read_raw(stem);
    CHECK(back.sensors == rec.sensors);
    CHECK(back.markers == rec.markers);
    CHECK(back.daq_rate == 1000.0);
    CHECK(back.camera_rate == 60.0);
    CHECK(reservoir::decimate(back).sensors == reservoir::decimate(rec).sensors);
}

TEST_CASE("config parsing")
{
    const auto d = parse_config("");
    CHECK(d.setup.thresholds.low == 75.0);
    CHECK(d.plan.lambda == experiments::ExperimentPlan{}.lambda);

    const auto c = parse_config("thresholds.low = 70\n[arm]\nk = 310  # stiffer\nc = 50, 40, 30, 20\n[payload]\nitem1.label = shears\n");
    CHECK(c.setup.thresholds.low == 70.0);
    CHECK(c.setup.plant.arm.stiffness == plant::ModuleArray{310, 310, 310, 310});
    CHECK(c.setup.plant.arm.damping[2] == 30.0);
    CHECK(c.setup.payloads[0].label == "shears");

    CHECK(kind_of([] { parse_config("arm.k = -1\n"); }) == ErrorKind::ValidationError);
    try {
        parse_config("\n\nplan.trials = 3\nbogus.key = 1\n");
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ParseError);
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
        CHECK(std::string(e.what()).find("bogus.key") != std::string::npos);
    }
    CHECK(kind_of([] { parse_config("plan.trials = many\n"); }) == ErrorKind::ParseError);
    CHECK(kind_of([] { parse_config("arm.c = 1, 2\n"); }) == ErrorKind::ParseError);
    CHECK(kind_of([] { parse_config("[arm\n"); }) == ErrorKind::ParseError);
    CHECK(kind_of([] { parse_config("thresholds.low = 130\n"); }) == ErrorKind::ValidationError);
}

TEST_CASE("print-defaults parses back to the defaults")
{
    const auto text = print_defaults();
    const auto c = parse_config(text);
    CHECK(format_config(c) == text);
    CHECK(text.find("[circuit]") != std::string::npos);
    auto custom = parse_config("plan.reduction = 12, 6, 1\ncircuit.noise = 0.02\n");
    CHECK(format_config(parse_config(format_config(custom))) == format_config(custom));
    CHECK(custom.plan.reduction == std::vector<int>{12, 6, 1});
}

TEST_CASE("model files round-trip bit-exactly")
{
    experiments::ExperimentPlan plan;
    plan.trials = 1;
    const auto d = experiments::run_dataset(experiments::Setup{}, plan);
    const auto bank = experiments::build_bank(d, plan, FeatureSource::Sensor);
    const auto p = scratch("model.prc");
    save_model(bank, p);
    const auto back = load_model(p);
    REQUIRE(back.complete());
    for (int n = 1; n <= tasks::kReadouts; ++n) {
        CHECK(back.at(n).coef == bank.at(n).coef);
        CHECK(back.at(n).task == bank.at(n).task);
        CHECK(back.at(n).features == bank.at(n).features);
        CHECK(back.at(n).targets == bank.at(n).targets);
        CHECK(back.at(n).lambda == bank.at(n).lambda);
    }
    CHECK(format_model(back) == format_model(bank));

    const auto visual = experiments::build_bank(d, plan, FeatureSource::Visual);
    CHECK(format_model(parse_model(format_model(visual))) == format_model(visual));

    auto text = format_model(bank);
    text.replace(0, 11, "prc-model 9");
    CHECK(kind_of([&] { parse_model(text); }) == ErrorKind::SchemaError);
    CHECK(kind_of([&] { parse_model("prc-model 1\nreadout 6\ntask posture\n"); }) == ErrorKind::SchemaError);
}

TEST_CASE("SVG reports are well formed with one series per column")
{
    const std::string line = "t,x1,x2,x3\n0,1,2,3\n0.05,1.5,2.5,2\n0.1,1,3,4\n";
    const auto svg = render_svg(line, "traj <test> & more");
    std::string why;
    CHECK(xml_check::well_formed(svg, &why));
    INFO(why);
    CHECK(xml_check::count(svg, "class=\"series\"") == 3);
    CHECK(svg.find("data-column=\"x2\"") != std::string::npos);

    experiments::SweepResult s{experiments::SweepKind::Failure, {}};
    for (int f = 0; f < 4; ++f) {
        experiments::SweepPoint p;
        p.x = f;
        p.posture = {0.01 * (f + 1), 0.002 * f, 10};
        p.weight = {0.05 * (f + 1), 0.01 * f, 10};
        p.closeweight = {0.02, 0.001, 10};
        s.points.push_back(p);
    }
    const auto band = render_svg(sweep_csv(s), "failure");
    CHECK(xml_check::well_formed(band));
    CHECK(detect_plot(parse_csv_text(sweep_csv(s))) == PlotKind::Band);
    CHECK(xml_check::count(band, "class=\"series\"") == 3);

    experiments::WeightStudy w;
    for (int c = 0; c < 5; ++c) w.boxes[c] = experiments::box_stats({1.0 + c, 2.0 + c, 3.0 + c, 4.0 + c, 40.0});
    const auto box = render_svg(box_stats_csv(std::span(&w, 1)), "weights");
    CHECK(xml_check::well_formed(box));
    CHECK(xml_check::count(box, "class=\"series\"") == 5);

    CHECK(xml_check::well_formed(render_svg("a,b\n", "empty")));
    CHECK_FALSE(xml_check::well_formed("<svg><g></svg>"));
}
