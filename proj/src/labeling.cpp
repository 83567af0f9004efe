#include "mapfix/labeling.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mapfix/rng.hpp"

namespace mapfix {

DaError compute_da_error(const Vec2& truth, const Vec2& fix) {
    const double dx = fix.x - truth.x;
    const double dy = fix.y - truth.y;
    DaError e;
    e.r = std::min(std::hypot(dx, dy), kWorstCaseLabel);
    double t = (dx == 0.0 && dy == 0.0) ? 0.0 : std::atan2(dy, dx);
    if (t >= kPi) t = -kPi;  // atan2 returns (-pi, pi]; labels live in [-pi, pi)
    e.theta = t;
    return e;
}

Sample build_sample(const Scene& scene, const LinkConfig& link_cfg,
                    const TdoaParams& tdoa_prm, int raster_size, Exec mode) {
    Sample s;
    s.grid = rasterize(scene, raster_size);
    s.case_id = scene.mode == PathMode::SinglePath
                    ? (scene.buildings.size() == 3 ? Case::B3Single : Case::B6Single)
                    : (scene.buildings.size() == 3 ? Case::B3Multi : Case::B6Multi);
    s.seed = scene.seed;
    for (auto& bs : s.used_bs) bs = {0xFF, 0xFF, 0xFF};

    LinkConfig cfg = link_cfg;
    cfg.seed = scene.seed;

    parallel_for(120, mode, [&](std::size_t k) {
        const Vec2 truth = scene.rx[k].xy();

        std::array<ToaMeasurement, 7> toas;
        std::uint8_t det_bits = 0;
        int det_count = 0;
        for (int t = 0; t < 7; ++t) {
            toas[static_cast<std::size_t>(t)] = measure_toa(scene, cfg, t, static_cast<int>(k));
            if (toas[static_cast<std::size_t>(t)].status == ToaStatus::Detected) {
                det_bits |= static_cast<std::uint8_t>(1u << t);
                ++det_count;
            }
        }
        s.det_mask[k] = det_bits;

        bool covered = false;
        for (const Building& b : scene.buildings) {
            if (b.contains_xy(truth.x, truth.y)) {
                covered = true;
                break;
            }
        }
        if (covered || det_count < 3) {
            s.labels[k] = {kWorstCaseLabel, 0.0};
            s.mask[k] = 0;
            return;
        }

        const TdoaFix fix = solve_fix(scene.tx, toas, tdoa_prm);
        s.labels[k] = compute_da_error(truth, fix.position);
        s.mask[k] = 1;
        s.fix[k] = fix.position;
        for (int i = 0; i < 3; ++i) {
            s.used_bs[k][static_cast<std::size_t>(i)] =
                static_cast<std::uint8_t>(fix.used_bs[static_cast<std::size_t>(i)]);
        }
    });
    return s;
}

std::uint64_t sample_seed(std::uint64_t master_seed, Case c, int global_index) {
    return derive_seed({master_seed, static_cast<std::uint64_t>(case_index(c)),
                        static_cast<std::uint64_t>(global_index)});
}

namespace {

void write_elev_block(std::ofstream& f, const ElevationGrid& g) {
    f.write("ELEV", 4);
    const std::uint32_t h = static_cast<std::uint32_t>(g.h);
    const std::uint32_t w = static_cast<std::uint32_t>(g.w);
    f.write(reinterpret_cast<const char*>(&h), 4);
    f.write(reinterpret_cast<const char*>(&w), 4);
    f.write(reinterpret_cast<const char*>(&g.resolution), 4);
    f.write(reinterpret_cast<const char*>(g.cells.data()),
            static_cast<std::streamsize>(g.cells.size() * sizeof(float)));
}

ElevationGrid read_elev_block(std::ifstream& f, const std::string& path) {
    char magic[4];
    f.read(magic, 4);
    if (!f || std::string(magic, 4) != "ELEV") {
        throw std::runtime_error("read_sample: bad ELEV block in " + path);
    }
    ElevationGrid g;
    std::uint32_t h = 0;
    std::uint32_t w = 0;
    f.read(reinterpret_cast<char*>(&h), 4);
    f.read(reinterpret_cast<char*>(&w), 4);
    f.read(reinterpret_cast<char*>(&g.resolution), 4);
    g.h = static_cast<int>(h);
    g.w = static_cast<int>(w);
    g.cells.resize(static_cast<std::size_t>(g.h) * g.w);
    f.read(reinterpret_cast<char*>(g.cells.data()),
           static_cast<std::streamsize>(g.cells.size() * sizeof(float)));
    return g;
}

}  // namespace

void write_sample(const std::string& path, const Sample& s) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_sample: cannot open " + path);
    f.write("DAER", 4);
    const std::uint32_t version = 1;
    f.write(reinterpret_cast<const char*>(&version), 4);
    write_elev_block(f, s.grid);
    const std::uint32_t count = 120;
    f.write(reinterpret_cast<const char*>(&count), 4);
    for (int k = 0; k < 120; ++k) {
        const float r = static_cast<float>(s.labels[static_cast<std::size_t>(k)].r);
        const float th = static_cast<float>(s.labels[static_cast<std::size_t>(k)].theta);
        const std::uint8_t mask = s.mask[static_cast<std::size_t>(k)];
        const float fx = static_cast<float>(s.fix[static_cast<std::size_t>(k)].x);
        const float fy = static_cast<float>(s.fix[static_cast<std::size_t>(k)].y);
        f.write(reinterpret_cast<const char*>(&r), 4);
        f.write(reinterpret_cast<const char*>(&th), 4);
        f.write(reinterpret_cast<const char*>(&mask), 1);
        f.write(reinterpret_cast<const char*>(&fx), 4);
        f.write(reinterpret_cast<const char*>(&fy), 4);
    }
    // Diagnostics: used stations + detection bitmask per Rx.
    f.write("DIAG", 4);
    for (int k = 0; k < 120; ++k) {
        f.write(reinterpret_cast<const char*>(s.used_bs[static_cast<std::size_t>(k)].data()), 3);
        f.write(reinterpret_cast<const char*>(&s.det_mask[static_cast<std::size_t>(k)]), 1);
    }
    if (!f) throw std::runtime_error("write_sample: write failed for " + path);
}

Sample read_sample(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_sample: cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::string(magic, 4) != "DAER") {
        throw std::runtime_error("read_sample: bad magic in " + path);
    }
    std::uint32_t version = 0;
    f.read(reinterpret_cast<char*>(&version), 4);
    Sample s;
    s.grid = read_elev_block(f, path);
    std::uint32_t count = 0;
    f.read(reinterpret_cast<char*>(&count), 4);
    if (count != 120) throw std::runtime_error("read_sample: bad label count in " + path);
    for (int k = 0; k < 120; ++k) {
        float r = 0.0f, th = 0.0f, fx = 0.0f, fy = 0.0f;
        std::uint8_t mask = 0;
        f.read(reinterpret_cast<char*>(&r), 4);
        f.read(reinterpret_cast<char*>(&th), 4);
        f.read(reinterpret_cast<char*>(&mask), 1);
        f.read(reinterpret_cast<char*>(&fx), 4);
        f.read(reinterpret_cast<char*>(&fy), 4);
        s.labels[static_cast<std::size_t>(k)] = {r, th};
        s.mask[static_cast<std::size_t>(k)] = mask;
        s.fix[static_cast<std::size_t>(k)] = {fx, fy};
    }
    if (!f) throw std::runtime_error("read_sample: truncated " + path);
    // Optional trailing diagnostics.
    char diag[4];
    f.read(diag, 4);
    if (f && std::string(diag, 4) == "DIAG") {
        for (int k = 0; k < 120; ++k) {
            f.read(reinterpret_cast<char*>(s.used_bs[static_cast<std::size_t>(k)].data()), 3);
            f.read(reinterpret_cast<char*>(&s.det_mask[static_cast<std::size_t>(k)]), 1);
        }
    }
    return s;
}

void write_manifest(const std::string& path, const Manifest& m) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_manifest: cannot open " + path);
    f << "case " << case_name(m.case_id) << "\n";
    f << "master_seed " << m.master_seed << "\n";
    for (const auto& p : m.train) f << "train " << p << "\n";
    for (const auto& p : m.val) f << "val " << p << "\n";
    for (const auto& p : m.test) f << "test " << p << "\n";
}

Manifest read_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_manifest: cannot open " + path);
    Manifest m;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream is(line);
        std::string key;
        is >> key;
        if (key == "case") {
            std::string cs;
            is >> cs;
            if (!parse_case(cs, m.case_id)) {
                throw std::runtime_error("read_manifest: bad case '" + cs + "'");
            }
        } else if (key == "master_seed") {
            is >> m.master_seed;
        } else if (key == "train" || key == "val" || key == "test") {
            std::string p;
            is >> p;
            if (key == "train") m.train.push_back(p);
            else if (key == "val") m.val.push_back(p);
            else m.test.push_back(p);
        }
    }
    return m;
}

std::string build_dataset(Case c, const DatasetCounts& counts, std::uint64_t master_seed,
                          const std::string& out_dir, const LinkConfig& link_cfg,
                          const TdoaParams& tdoa_prm, const SceneParams& scene_prm,
                          int raster_size, Exec mode) {
    namespace fs = std::filesystem;
    const fs::path root(out_dir);
    const fs::path samples = root / "samples";
    fs::create_directories(samples);

    Manifest man;
    man.case_id = c;
    man.master_seed = master_seed;

    struct SplitSpec {
        const char* name;
        int count;
        std::vector<std::string>* list;
    };
    SplitSpec splits[3] = {{"train", counts.train, &man.train},
                           {"val", counts.val, &man.val},
                           {"test", counts.test, &man.test}};

    int gi = 0;
    for (const SplitSpec& sp : splits) {
        std::vector<int> indices(static_cast<std::size_t>(sp.count));
        for (int i = 0; i < sp.count; ++i) indices[static_cast<std::size_t>(i)] = gi + i;
        gi += sp.count;

        std::vector<std::string> files(indices.size());
        // Parallel across samples; each iteration generates and writes one
        // self-contained file, so order does not matter.
        parallel_for(indices.size(), mode, [&](std::size_t i) {
            const std::uint64_t seed = sample_seed(master_seed, c, indices[i]);
            const Scene scene = generate_scene(c, seed, scene_prm);
            const Sample s = build_sample(scene, link_cfg, tdoa_prm, raster_size, Exec::Serial);
            char name[64];
            std::snprintf(name, sizeof(name), "%s_%04d.daer", sp.name, static_cast<int>(i));
            const fs::path out = samples / name;
            write_sample(out.string(), s);
            files[i] = (fs::path("samples") / name).string();
        });
        for (auto& fpath : files) sp.list->push_back(std::move(fpath));
    }

    const fs::path manifest = root / "manifest.txt";
    write_manifest(manifest.string(), man);
    return manifest.string();
}

}  // namespace mapfix
