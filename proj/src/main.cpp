// mapfix: map-assisted TDOA error prediction and compensation pipeline.
// Subcommands: gen, label, train, predict, eval, plot, pipeline.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "mapfix/compensate.hpp"
#include "mapfix/config.hpp"
#include "mapfix/labeling.hpp"
#include "mapfix/metrics.hpp"
#include "mapfix/model.hpp"
#include "mapfix/plot.hpp"
#include "mapfix/train.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace mapfix;

namespace {

struct CommonOpts {
    std::string case_str = "3s";
    std::string config_path;
    bool nominal = false;
    bool serial = false;
    std::int64_t seed_override = -1;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_case = true) {
    if (with_case)
        cmd->add_option("--case", o.case_str, "dataset case: 3s, 3m, 6s or 6m")
            ->check(CLI::IsMember({"3s", "3m", "6s", "6m"}));
    cmd->add_option("--config", o.config_path, "key=value config overlay file");
    cmd->add_flag("--nominal", o.nominal, "paper-scale preset (default: --desk)");
    bool desk_dummy = false;
    cmd->add_flag("--desk", desk_dummy, "desk-scale preset (the default)");
    cmd->add_flag("--serial", o.serial, "disable the OpenMP code paths");
    cmd->add_option("--seed", o.seed_override, "override the master seed");
}

RunConfig resolve_config(const CommonOpts& o) {
    RunConfig c = o.nominal ? nominal_config() : desk_config();
    if (!o.config_path.empty()) c = read_config(o.config_path, c);
    if (o.seed_override >= 0)
        c.master_seed = static_cast<std::uint64_t>(o.seed_override);
#if defined(_OPENMP)
    if (c.threads > 0) omp_set_num_threads(c.threads);
#endif
    return c;
}

Case resolve_case(const CommonOpts& o) {
    Case c{};
    if (!parse_case(o.case_str, c)) throw std::runtime_error("bad case");
    return c;
}

Exec exec_mode(const CommonOpts& o) { return o.serial ? Exec::Serial : Exec::Parallel; }

std::vector<Sample> load_split(const Manifest& m, const fs::path& dir,
                               const std::vector<std::string>& rel) {
    std::vector<Sample> out;
    out.reserve(rel.size());
    for (const std::string& r : rel) out.push_back(read_sample((dir / r).string()));
    (void)m;
    return out;
}

ModelConfig model_config_for(Case c, const RunConfig& rc) {
    ModelConfig mc;
    mc.grid_size = rc.raster_size;
    mc.mode = case_mode(c);
    return mc;
}

int cmd_gen(const CommonOpts& o, const std::string& out_dir) {
    const RunConfig rc = resolve_config(o);
    const Case c = resolve_case(o);
    fs::create_directories(out_dir);
    LinkConfig link = rc.link;
    const std::string manifest =
        build_dataset(c, rc.counts, rc.master_seed, out_dir, link, rc.tdoa,
                      rc.scene, rc.raster_size, exec_mode(o));
    write_config((fs::path(out_dir) / "run_config.txt").string(), rc);
    std::printf("wrote %s (%d train / %d val / %d test)\n", manifest.c_str(),
                rc.counts.train, rc.counts.val, rc.counts.test);
    return 0;
}

int cmd_label(const CommonOpts& o, const std::string& scene_path,
              const std::string& out_path, std::int64_t scene_seed,
              const std::string& save_scene) {
    const RunConfig rc = resolve_config(o);
    const Case c = resolve_case(o);
    Scene scene;
    if (!scene_path.empty()) {
        std::ifstream f(scene_path);
        if (!f) throw std::runtime_error("cannot read " + scene_path);
        std::ostringstream os;
        os << f.rdbuf();
        scene = scene_from_json(os.str());
    } else {
        const std::uint64_t seed =
            scene_seed >= 0 ? static_cast<std::uint64_t>(scene_seed)
                            : sample_seed(rc.master_seed, c, 0);
        scene = generate_scene(c, seed, rc.scene);
    }
    if (!save_scene.empty()) {
        std::ofstream f(save_scene);
        f << scene_to_json(scene);
    }
    LinkConfig link = rc.link;
    link.seed = scene.seed;
    Sample s = build_sample(scene, link, rc.tdoa, rc.raster_size, exec_mode(o));
    s.case_id = c;
    write_sample(out_path, s);
    int feasible = 0;
    for (int k = 0; k < 120; ++k) feasible += s.mask[k];
    std::printf("wrote %s (%d/120 feasible)\n", out_path.c_str(), feasible);
    return 0;
}

int cmd_train(const CommonOpts& o, const std::string& data_dir,
              const std::string& model_path, const std::string& log_path,
              bool verbose) {
    const RunConfig rc = resolve_config(o);
    const Case c = resolve_case(o);
    const fs::path dir(data_dir);
    const Manifest m = read_manifest((dir / "manifest.txt").string());
    const std::vector<Sample> train = load_split(m, dir, m.train);
    const std::vector<Sample> val = load_split(m, dir, m.val);
    const Exec ex = exec_mode(o);
    const PackedDataset ptrain = pack_dataset(train, ex);
    const PackedDataset pval = pack_dataset(val, ex);

    Model model(model_config_for(c, rc));
    const TrainResult res =
        train_model(model, ptrain, pval, rc.train, log_path, ex, verbose);
    model.save(model_path);
    std::printf("wrote %s (best val %.5f at epoch %d)\n", model_path.c_str(),
                res.best_val, res.best_epoch);
    return 0;
}

int cmd_predict(const CommonOpts& o, const std::string& model_path,
                const std::string& grid_path, const std::string& out_path) {
    const Model model = Model::load(model_path);
    const ElevationGrid grid = read_elevation(grid_path);
    const auto pred = model.predict(grid, exec_mode(o));
    std::ofstream f(out_path);
    if (!f) throw std::runtime_error("cannot write " + out_path);
    f << "rx,r,theta\n";
    char line[64];
    for (int k = 0; k < 120; ++k) {
        std::snprintf(line, sizeof(line), "%d,%.6f,%.6f\n", k, pred[k].r,
                      pred[k].theta);
        f << line;
    }
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

int cmd_eval(const CommonOpts& o, const std::string& data_dir,
             const std::string& model_path, const std::string& report_path,
             const std::string& cdf_path) {
    const CommonOpts oo = o;
    const RunConfig rc = resolve_config(oo);
    (void)rc;
    const fs::path dir(data_dir);
    const Manifest m = read_manifest((dir / "manifest.txt").string());
    const std::vector<Sample> train = load_split(m, dir, m.train);
    const std::vector<Sample> test = load_split(m, dir, m.test);
    const Model model = Model::load(model_path);
    const auto baseline = baseline_mean_r(train);
    const EvalResult r = evaluate(model, test, baseline, exec_mode(o));
    const std::string report = format_report(o.case_str, r);
    std::fputs(report.c_str(), stdout);
    if (!report_path.empty()) {
        std::ofstream f(report_path);
        f << report;
    }
    if (!cdf_path.empty()) write_cdf_csv(cdf_path, r);
    return 0;
}

int cmd_plot(const std::string& log_path, const std::string& cdf_path,
             const std::string& out_path) {
    if (!log_path.empty()) {
        std::ifstream f(log_path);
        if (!f) throw std::runtime_error("cannot read " + log_path);
        std::string line;
        std::getline(f, line);  // header
        PlotSeries tr{"train", "#1f77b4", {}, {}}, va{"val", "#d62728", {}, {}};
        while (std::getline(f, line)) {
            int ep;
            double lr, t, v;
            if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf", &ep, &lr, &t, &v) == 4) {
                tr.x.push_back(ep);
                tr.y.push_back(t);
                va.x.push_back(ep);
                va.y.push_back(v);
            }
        }
        write_svg_plot(out_path, {"training loss", "epoch", "RMSE loss", true},
                       {tr, va});
    } else {
        std::ifstream f(cdf_path);
        if (!f) throw std::runtime_error("cannot read " + cdf_path);
        std::string line;
        std::getline(f, line);
        PlotSeries before{"before", "#d62728", {}, {}}, after{"after", "#2ca02c", {}, {}};
        while (std::getline(f, line)) {
            double e, c;
            char tag[16];
            if (std::sscanf(line.c_str(), "%lf,%lf,%15s", &e, &c, tag) == 3) {
                if (tag[0] == 'b') {
                    before.x.push_back(e);
                    before.y.push_back(c);
                } else {
                    after.x.push_back(e);
                    after.y.push_back(c);
                }
            }
        }
        write_svg_plot(out_path,
                       {"localization error CDF", "error (m)", "P(error <= x)", false},
                       {before, after});
    }
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

int cmd_pipeline(const CommonOpts& o, const std::string& out_dir, bool verbose) {
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    int rcode = cmd_gen(o, out_dir);
    if (rcode) return rcode;
    const std::string model_path = (dir / "model.cnnw").string();
    const std::string log_path = (dir / "train_log.csv").string();
    rcode = cmd_train(o, out_dir, model_path, log_path, verbose);
    if (rcode) return rcode;
    rcode = cmd_eval(o, out_dir, model_path, (dir / "report.txt").string(),
                     (dir / "cdf.csv").string());
    if (rcode) return rcode;
    cmd_plot(log_path, "", (dir / "train_curves.svg").string());
    cmd_plot("", (dir / "cdf.csv").string(), (dir / "cdf.svg").string());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"map-assisted TDOA error prediction and compensation"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string out_dir = "data";
    std::string scene_path, out_path = "sample.daer", save_scene;
    std::int64_t scene_seed = -1;
    std::string data_dir = "data", model_path = "model.cnnw", log_path;
    std::string grid_path, report_path, cdf_path;
    bool verbose = false;

    auto* gen = app.add_subcommand("gen", "generate a labeled dataset");
    add_common(gen, o);
    gen->add_option("--out", out_dir, "output directory");

    auto* label = app.add_subcommand("label", "label a single scene");
    add_common(label, o);
    label->add_option("--scene", scene_path, "scene JSON (default: generate)");
    label->add_option("--scene-seed", scene_seed, "scene seed when generating");
    label->add_option("--out", out_path, "output DAER path");
    label->add_option("--save-scene", save_scene, "also write the scene JSON");

    auto* train = app.add_subcommand("train", "train the predictor");
    add_common(train, o);
    train->add_option("--data", data_dir, "dataset directory (from gen)");
    train->add_option("--out", model_path, "output model path");
    train->add_option("--log", log_path, "training log CSV path");
    train->add_flag("--verbose", verbose, "per-epoch stdout progress");

    auto* predict = app.add_subcommand("predict", "predict DA errors for a grid");
    add_common(predict, o, false);
    predict->add_option("--model", model_path, "CNNW model path")->required();
    predict->add_option("--grid", grid_path, "ELEV elevation grid path")->required();
    predict->add_option("--out", out_path, "output CSV path");

    auto* eval = app.add_subcommand("eval", "evaluate a model on the test split");
    add_common(eval, o);
    eval->add_option("--data", data_dir, "dataset directory (from gen)");
    eval->add_option("--model", model_path, "CNNW model path");
    eval->add_option("--report", report_path, "report output path");
    eval->add_option("--cdf", cdf_path, "CDF CSV output path");

    auto* plot = app.add_subcommand("plot", "render SVG charts");
    plot->add_option("--log", log_path, "training log CSV to plot");
    plot->add_option("--cdf", cdf_path, "CDF CSV to plot");
    plot->add_option("--out", out_path, "output SVG path")->required();

    auto* pipeline = app.add_subcommand("pipeline", "gen + train + eval + plot");
    add_common(pipeline, o);
    pipeline->add_option("--out", out_dir, "working directory");
    pipeline->add_flag("--verbose", verbose, "per-epoch stdout progress");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(o, out_dir);
        if (label->parsed())
            return cmd_label(o, scene_path, out_path, scene_seed, save_scene);
        if (train->parsed())
            return cmd_train(o, data_dir, model_path, log_path, verbose);
        if (predict->parsed()) return cmd_predict(o, model_path, grid_path, out_path);
        if (eval->parsed())
            return cmd_eval(o, data_dir, model_path, report_path, cdf_path);
        if (plot->parsed()) return cmd_plot(log_path, cdf_path, out_path);
        if (pipeline->parsed()) return cmd_pipeline(o, out_dir, verbose);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
