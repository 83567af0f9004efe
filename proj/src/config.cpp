#include "mapfix/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mapfix {

RunConfig desk_config() {
    RunConfig c;
    c.raster_size = 128;
    c.scene.raster_size = 128;
    c.counts = {300, 50, 20};
    c.link.jitter_std = 5e-11;  // see README: desk jitter keeps Eq. 1 solvable
    c.master_seed = 42;
    c.threads = 8;
    c.train.batch_size = 4;
    c.train.lr0 = 1e-6;   // calibrated desk schedule (nominal keeps 1e-5)
    c.train.decay = 0.97;
    c.train.epochs = 150;
    c.train.seed = 7;
    return c;
}

RunConfig nominal_config() {
    RunConfig c;
    c.raster_size = 512;
    c.scene.raster_size = 512;
    c.counts = {1100, 100, 100};
    c.link.jitter_std = 1e-9;
    c.master_seed = 42;
    c.threads = 8;
    c.train.batch_size = 4;
    c.train.lr0 = 1e-5;
    c.train.decay = 0.95;
    c.train.epochs = 200;
    c.train.seed = 7;
    return c;
}

std::string config_to_text(const RunConfig& c) {
    std::ostringstream os;
    char b[128];
    auto put = [&](const char* k, double v) {
        std::snprintf(b, sizeof(b), "%s = %.17g\n", k, v);
        os << b;
    };
    auto puti = [&](const char* k, long long v) { os << k << " = " << v << "\n"; };
    os << "# mapfix run configuration\n";
    puti("master_seed", static_cast<long long>(c.master_seed));
    puti("threads", c.threads);
    puti("raster_size", c.raster_size);
    puti("train_count", c.counts.train);
    puti("val_count", c.counts.val);
    puti("test_count", c.counts.test);
    put("scene.extent", c.scene.extent);
    put("scene.side_min", c.scene.side_min);
    put("scene.side_max", c.scene.side_max);
    put("scene.height_min", c.scene.height_min);
    put("scene.height_max", c.scene.height_max);
    put("scene.tx_height", c.scene.tx_height);
    put("scene.rx_height", c.scene.rx_height);
    put("scene.lattice_margin", c.scene.lattice_margin);
    puti("scene.max_place_attempts", c.scene.max_place_attempts);
    put("link.carrier_hz", c.link.carrier_hz);
    put("link.bandwidth_hz", c.link.bandwidth_hz);
    put("link.rel_threshold_db", c.link.rel_threshold_db);
    put("link.noise_figure_db", c.link.noise_figure_db);
    put("link.jitter_std", c.link.jitter_std);
    put("tdoa.grid_pitch", c.tdoa.grid_pitch);
    puti("tdoa.max_iters", c.tdoa.max_iters);
    put("tdoa.step_tol", c.tdoa.step_tol);
    puti("train.batch_size", c.train.batch_size);
    put("train.lr0", c.train.lr0);
    put("train.decay", c.train.decay);
    puti("train.epochs", c.train.epochs);
    put("train.beta1", c.train.beta1);
    put("train.beta2", c.train.beta2);
    put("train.eps", c.train.eps);
    puti("train.seed", static_cast<long long>(c.train.seed));
    return os.str();
}

RunConfig config_from_text(const std::string& text, const RunConfig& base) {
    RunConfig c = base;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": expected key = value");
            continue;
        }
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const double d = std::stod(val);
        const long long i = static_cast<long long>(d);

        if (key == "master_seed") c.master_seed = static_cast<std::uint64_t>(i);
        else if (key == "threads") c.threads = static_cast<int>(i);
        else if (key == "raster_size") { c.raster_size = static_cast<int>(i); c.scene.raster_size = static_cast<int>(i); }
        else if (key == "train_count") c.counts.train = static_cast<int>(i);
        else if (key == "val_count") c.counts.val = static_cast<int>(i);
        else if (key == "test_count") c.counts.test = static_cast<int>(i);
        else if (key == "scene.extent") c.scene.extent = d;
        else if (key == "scene.side_min") c.scene.side_min = d;
        else if (key == "scene.side_max") c.scene.side_max = d;
        else if (key == "scene.height_min") c.scene.height_min = d;
        else if (key == "scene.height_max") c.scene.height_max = d;
        else if (key == "scene.tx_height") c.scene.tx_height = d;
        else if (key == "scene.rx_height") c.scene.rx_height = d;
        else if (key == "scene.lattice_margin") c.scene.lattice_margin = d;
        else if (key == "scene.max_place_attempts") c.scene.max_place_attempts = static_cast<int>(i);
        else if (key == "link.carrier_hz") c.link.carrier_hz = d;
        else if (key == "link.bandwidth_hz") c.link.bandwidth_hz = d;
        else if (key == "link.rel_threshold_db") c.link.rel_threshold_db = d;
        else if (key == "link.noise_figure_db") c.link.noise_figure_db = d;
        else if (key == "link.jitter_std") c.link.jitter_std = d;
        else if (key == "tdoa.grid_pitch") c.tdoa.grid_pitch = d;
        else if (key == "tdoa.max_iters") c.tdoa.max_iters = static_cast<int>(i);
        else if (key == "tdoa.step_tol") c.tdoa.step_tol = d;
        else if (key == "train.batch_size") c.train.batch_size = static_cast<int>(i);
        else if (key == "train.lr0") c.train.lr0 = d;
        else if (key == "train.decay") c.train.decay = d;
        else if (key == "train.epochs") c.train.epochs = static_cast<int>(i);
        else if (key == "train.beta1") c.train.beta1 = d;
        else if (key == "train.beta2") c.train.beta2 = d;
        else if (key == "train.eps") c.train.eps = d;
        else if (key == "train.seed") c.train.seed = static_cast<std::uint64_t>(i);
        else throw std::runtime_error("config line " + std::to_string(lineno) +
                                      ": unknown key '" + key + "'");
    }
    return c;
}

void write_config(const std::string& path, const RunConfig& c) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << config_to_text(c);
}

RunConfig read_config(const std::string& path, const RunConfig& base) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return config_from_text(os.str(), base);
}

}  // namespace mapfix
