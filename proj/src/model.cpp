#include "mapfix/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mapfix {

namespace {

constexpr int kRows = kCorridorRows;       // 7
constexpr int kCols = kCorridorCols;       // 48
constexpr int kColsP = kCols / 2;          // after the 1x2 max pool
constexpr int kSlots = 120;

std::size_t conv_wsize(int ic, int oc) {
    return static_cast<std::size_t>(oc) * ic * kKernel * kKernel;
}

void write_u32(std::ofstream& f, std::uint32_t v) {
    f.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::ifstream& f) {
    std::uint32_t v = 0;
    f.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

}  // namespace

ParamLayout make_layout(const ModelConfig& cfg) {
    ParamLayout l{};
    std::size_t at = 0;
    auto take = [&at](std::size_t n) {
        const std::size_t o = at;
        at += n;
        return o;
    };
    l.conv1_w = take(conv_wsize(1, cfg.conv1_ch));
    l.conv1_b = take(cfg.conv1_ch);
    l.conv2_w = take(conv_wsize(cfg.conv1_ch, cfg.conv2_ch));
    l.conv2_b = take(cfg.conv2_ch);
    l.emb = take(static_cast<std::size_t>(kSlots) * cfg.emb_dim);
    l.d1_w = take(static_cast<std::size_t>(cfg.hidden) * cfg.head_in());
    l.d1_b = take(cfg.hidden);
    l.d2_w = take(static_cast<std::size_t>(cfg.hidden) * cfg.hidden);
    l.d2_b = take(cfg.hidden);
    l.d3_w = take(static_cast<std::size_t>(2) * cfg.hidden);
    l.d3_b = take(2);
    l.table = take(static_cast<std::size_t>(kSlots) * kNumPatterns * 2);
    l.gate = take(static_cast<std::size_t>(kSlots) * kNumPatterns);
    l.trainable = l.table;
    l.total = at;
    return l;
}

Workspace::Workspace(const ModelConfig& c) : cfg(c) {
    const std::size_t plane1 = static_cast<std::size_t>(c.conv1_ch) * kRows * kCols;
    const std::size_t plane1p = static_cast<std::size_t>(c.conv1_ch) * kRows * kColsP;
    const std::size_t plane2 = static_cast<std::size_t>(c.conv2_ch) * kRows * kColsP;
    cor.resize(kSlots * static_cast<std::size_t>(kRows) * kCols);
    c1.resize(kSlots * plane1);
    r1.resize(kSlots * plane1);
    p1.resize(kSlots * plane1p);
    p1_idx.resize(kSlots * plane1p);
    c2.resize(kSlots * plane2);
    r2.resize(kSlots * plane2);
    cemb.resize(kSlots * static_cast<std::size_t>(c.conv2_ch));
    geo_n.resize(kSlots * static_cast<std::size_t>(kGeoNormDim));
    h0.resize(kSlots * static_cast<std::size_t>(c.head_in()));
    z1.resize(kSlots * static_cast<std::size_t>(c.hidden));
    a1.resize(kSlots * static_cast<std::size_t>(c.hidden));
    z2.resize(kSlots * static_cast<std::size_t>(c.hidden));
    a2.resize(kSlots * static_cast<std::size_t>(c.hidden));
    corr.resize(kSlots * 2);
    base.resize(kSlots * 2);
    u.resize(kSlots * 2);
    pattern.resize(kSlots);
    // Per-slot buffers: conv weight grads plus the stored dense-layer
    // deltas that the fixed-order reduction consumes.
    slot_grad_stride = conv_wsize(1, c.conv1_ch) + c.conv1_ch +
                       conv_wsize(c.conv1_ch, c.conv2_ch) + c.conv2_ch +
                       2 * static_cast<std::size_t>(c.hidden) + 2 +
                       // scratch: gz(hidden), gh0, gr2/gc2, gp1, gr1/gc1
                       c.hidden + c.head_in() + 2 * plane2 + plane1p + 2 * plane1;
    slot_grad.resize(kSlots * slot_grad_stride);
}

Model::Model(const ModelConfig& cfg) : cfg_(cfg), lay_(make_layout(cfg)) {
    params_.assign(lay_.total, 0.0);
}

void Model::init(std::uint64_t seed) {
    const ModelConfig& c = cfg_;
    struct Tensor {
        std::size_t off, n;
        int fan_in;
    };
    // d3 stays zero so the correction term starts at exactly zero and the
    // freshly initialized model is the pure statistical predictor.
    const Tensor tensors[] = {
        {lay_.conv1_w, conv_wsize(1, c.conv1_ch), 1 * kKernel * kKernel},
        {lay_.conv2_w, conv_wsize(c.conv1_ch, c.conv2_ch), c.conv1_ch * kKernel * kKernel},
        {lay_.emb, static_cast<std::size_t>(kSlots) * c.emb_dim, c.emb_dim},
        {lay_.d1_w, static_cast<std::size_t>(c.hidden) * c.head_in(), c.head_in()},
        {lay_.d2_w, static_cast<std::size_t>(c.hidden) * c.hidden, c.hidden},
    };
    std::fill(params_.begin(), params_.end(), 0.0);
    std::uint64_t idx = 0;
    for (const Tensor& t : tensors) {
        Rng rng(derive_seed({seed, 0x1A17u, idx++}));
        he_uniform_fill(params_.data() + t.off, t.n, t.fan_in, rng);
    }
    // Statistical layer: gate off (pass the oracle vector through) until
    // train_model derives the group statistics.
    for (int i = 0; i < kSlots * kNumPatterns; ++i)
        params_[lay_.gate + i] = kGateOff;
}

void normalize_geo(const float* geo, double extent, double* out) {
    out[0] = geo[0] / 50.0;
    out[1] = geo[1] / 50.0;
    out[2] = geo[2] / 50.0;
    out[3] = geo[3];
    for (int j = 0; j < 7; ++j) {
        out[4 + j] = geo[4 + j];
        out[11 + j] = std::tanh(geo[11 + j] / 10.0);
        out[18 + j] = geo[18 + j] / 100.0;
    }
    out[25] = geo[25] / 7.0;
    out[26] = geo[26] / extent;
    out[27] = geo[27] / extent;
    const double th = std::atan2(geo[1], geo[0]);
    out[28] = th / kPi;
    out[29] = std::cos(th);
    out[30] = std::sin(th);
}

int pattern_index(const float* geo_row) {
    int p = 0;
    for (int j = 0; j < 7; ++j)
        if (geo_row[4 + j] > 0.5f) p |= 1 << j;
    return p;
}

void Model::forward(const float* geo, const float* corridors, Workspace& ws,
                    double* out, Exec exec) const {
    const ModelConfig& c = cfg_;
    const double* P = params_.data();
    const double extent = SceneParams{}.extent;  // 512 m at both presets
    const std::size_t corN = static_cast<std::size_t>(kRows) * kCols;
    const std::size_t plane1 = static_cast<std::size_t>(c.conv1_ch) * kRows * kCols;
    const std::size_t plane1p = static_cast<std::size_t>(c.conv1_ch) * kRows * kColsP;
    const std::size_t plane2 = static_cast<std::size_t>(c.conv2_ch) * kRows * kColsP;

    parallel_for(kSlots, exec, [&](std::size_t k) {
        double* cor = ws.cor.data() + k * corN;
        for (std::size_t i = 0; i < corN; ++i) cor[i] = corridors[k * corN + i];

        double* c1 = ws.c1.data() + k * plane1;
        double* r1 = ws.r1.data() + k * plane1;
        double* p1 = ws.p1.data() + k * plane1p;
        int* idx = ws.p1_idx.data() + k * plane1p;
        double* c2 = ws.c2.data() + k * plane2;
        double* r2 = ws.r2.data() + k * plane2;
        double* ce = ws.cemb.data() + k * c.conv2_ch;

        conv2d_forward(cor, 1, kRows, kCols, P + lay_.conv1_w, P + lay_.conv1_b,
                       c.conv1_ch, c1, Exec::Serial);
        relu_forward(c1, static_cast<int>(plane1), r1);
        maxpool_forward(r1, c.conv1_ch, kRows, kCols, 1, 2, p1, idx);
        conv2d_forward(p1, c.conv1_ch, kRows, kColsP, P + lay_.conv2_w,
                       P + lay_.conv2_b, c.conv2_ch, c2, Exec::Serial);
        relu_forward(c2, static_cast<int>(plane2), r2);
        avgpool_forward(r2, c.conv2_ch, kRows, kColsP, ce);

        double* h0 = ws.h0.data() + k * c.head_in();
        normalize_geo(geo + k * kGeoFeatDim, extent, h0);
        for (int i = 0; i < c.conv2_ch; ++i) h0[kGeoNormDim + i] = ce[i];
        const double* er = P + lay_.emb + k * c.emb_dim;
        for (int i = 0; i < c.emb_dim; ++i) h0[kGeoNormDim + c.conv2_ch + i] = er[i];

        double* z1 = ws.z1.data() + k * c.hidden;
        double* a1 = ws.a1.data() + k * c.hidden;
        double* z2 = ws.z2.data() + k * c.hidden;
        double* a2 = ws.a2.data() + k * c.hidden;
        double* cr = ws.corr.data() + k * 2;
        dense_forward(h0, c.head_in(), P + lay_.d1_w, P + lay_.d1_b, c.hidden, z1,
                      Exec::Serial);
        relu_forward(z1, c.hidden, a1);
        dense_forward(a1, c.hidden, P + lay_.d2_w, P + lay_.d2_b, c.hidden, z2,
                      Exec::Serial);
        relu_forward(z2, c.hidden, a2);
        dense_forward(a2, c.hidden, P + lay_.d3_w, P + lay_.d3_b, 2, cr, Exec::Serial);

        // Vector head: gated table/oracle blend, complex multiplicative
        // correction, polar readout.
        const int p = pattern_index(geo + k * kGeoFeatDim);
        ws.pattern[k] = p;
        const double g = 1.0 / (1.0 + std::exp(-P[lay_.gate + k * kNumPatterns + p]));
        const double* T = P + lay_.table + (k * static_cast<std::size_t>(kNumPatterns) + p) * 2;
        double* b = ws.base.data() + k * 2;
        double* uv = ws.u.data() + k * 2;
        b[0] = g * T[0] + (1.0 - g) * h0[0];
        b[1] = g * T[1] + (1.0 - g) * h0[1];
        uv[0] = b[0] * (1.0 + cr[0]) - b[1] * cr[1];
        uv[1] = b[1] * (1.0 + cr[0]) + b[0] * cr[1];
        out[k] = std::sqrt(uv[0] * uv[0] + uv[1] * uv[1] + 1e-12);
        out[kSlots + k] = std::atan2(uv[1], uv[0] + 1e-12) / kPi;
    });
}

void Model::backward(const double* grad_out, Workspace& ws, double* grad,
                     Exec exec) const {
    const ModelConfig& c = cfg_;
    const double* P = params_.data();
    const std::size_t plane1 = static_cast<std::size_t>(c.conv1_ch) * kRows * kCols;
    const std::size_t plane1p = static_cast<std::size_t>(c.conv1_ch) * kRows * kColsP;
    const std::size_t plane2 = static_cast<std::size_t>(c.conv2_ch) * kRows * kColsP;
    const std::size_t c1w = conv_wsize(1, c.conv1_ch);
    const std::size_t c2w = conv_wsize(c.conv1_ch, c.conv2_ch);

    // Per-slot buffer partition.
    const std::size_t o_gc1w = 0;
    const std::size_t o_gc1b = o_gc1w + c1w;
    const std::size_t o_gc2w = o_gc1b + c.conv1_ch;
    const std::size_t o_gc2b = o_gc2w + c2w;
    const std::size_t o_ga1 = o_gc2b + c.conv2_ch;          // hidden
    const std::size_t o_ga2 = o_ga1 + c.hidden;             // hidden
    const std::size_t o_go2 = o_ga2 + c.hidden;             // 2
    const std::size_t o_scr = o_go2 + 2;

    // Phase A: per-slot deltas and conv gradients (disjoint buffers).
    parallel_for(kSlots, exec, [&](std::size_t k) {
        double* buf = ws.slot_grad.data() + k * ws.slot_grad_stride;
        std::memset(buf, 0, ws.slot_grad_stride * sizeof(double));
        double* ga1 = buf + o_ga1;
        double* ga2 = buf + o_ga2;
        double* go2 = buf + o_go2;
        double* scr = buf + o_scr;
        double* gz = scr;                       // hidden
        double* gh0 = gz + c.hidden;            // head_in
        double* gr2 = gh0 + c.head_in();        // plane2
        double* gc2 = gr2 + plane2;             // plane2
        double* gp1 = gc2 + plane2;             // plane1p
        double* gr1 = gp1 + plane1p;            // plane1
        double* gc1 = gr1 + plane1;             // plane1

        // Polar readout and complex-multiplication derivatives. The table,
        // gate, and oracle vector are not trained, so the chain stops at the
        // correction (sx, sy).
        const double* uv = ws.u.data() + k * 2;
        const double* b = ws.base.data() + k * 2;
        const double r = std::sqrt(uv[0] * uv[0] + uv[1] * uv[1] + 1e-12);
        const double xq = uv[0] + 1e-12;
        const double q = xq * xq + uv[1] * uv[1];
        const double gr_ = grad_out[k];
        const double gt_ = grad_out[kSlots + k] / kPi;
        const double dux = gr_ * uv[0] / r - gt_ * uv[1] / q;
        const double duy = gr_ * uv[1] / r + gt_ * xq / q;
        go2[0] = dux * b[0] + duy * b[1];
        go2[1] = duy * b[0] - dux * b[1];

        const double* z1 = ws.z1.data() + k * c.hidden;
        const double* z2 = ws.z2.data() + k * c.hidden;

        // d3 input grad -> gz (w.r.t. a2), then back through the relus.
        dense_backward(nullptr, c.hidden, P + lay_.d3_w, 2, go2, gz, nullptr,
                       nullptr, Exec::Serial);
        relu_backward(z2, gz, c.hidden, ga2);
        dense_backward(nullptr, c.hidden, P + lay_.d2_w, c.hidden, ga2, gz,
                       nullptr, nullptr, Exec::Serial);
        relu_backward(z1, gz, c.hidden, ga1);
        dense_backward(nullptr, c.head_in(), P + lay_.d1_w, c.hidden, ga1, gh0,
                       nullptr, nullptr, Exec::Serial);

        // Slot-embedding rows are touched by exactly one slot each.
        double* ge = grad + lay_.emb + k * c.emb_dim;
        for (int i = 0; i < c.emb_dim; ++i)
            ge[i] += gh0[kGeoNormDim + c.conv2_ch + i];

        avgpool_backward(gh0 + kGeoNormDim, c.conv2_ch, kRows, kColsP, gr2);
        relu_backward(ws.c2.data() + k * plane2, gr2, static_cast<int>(plane2), gc2);
        conv2d_backward(ws.p1.data() + k * plane1p, c.conv1_ch, kRows, kColsP,
                        P + lay_.conv2_w, c.conv2_ch, gc2, gp1, buf + o_gc2w,
                        buf + o_gc2b, Exec::Serial);
        maxpool_backward(ws.p1_idx.data() + k * plane1p, gp1, c.conv1_ch, kRows,
                         kCols, 1, 2, gr1);
        relu_backward(ws.c1.data() + k * plane1, gr1, static_cast<int>(plane1), gc1);
        conv2d_backward(ws.cor.data() + k * static_cast<std::size_t>(kRows) * kCols,
                        1, kRows, kCols, P + lay_.conv1_w, c.conv1_ch, gc1, nullptr,
                        buf + o_gc1w, buf + o_gc1b, Exec::Serial);
    });

    // Phase B: reductions in fixed slot order, parallel over disjoint
    // parameter indices/rows. Bitwise identical for Serial and Parallel.
    const std::size_t convN = c1w + c.conv1_ch + c2w + c.conv2_ch;
    parallel_for(convN, exec, [&](std::size_t i) {
        double acc = 0.0;
        for (int k = 0; k < kSlots; ++k)
            acc += ws.slot_grad[k * ws.slot_grad_stride + i];
        grad[lay_.conv1_w + i] += acc;  // conv tensors are contiguous from conv1_w
    });

    auto reduce_dense = [&](std::size_t w_off, std::size_t b_off, std::size_t delta_off,
                            int n_out, const std::vector<double>& in_act,
                            std::size_t in_stride) {
        parallel_for(static_cast<std::size_t>(n_out), exec, [&](std::size_t o) {
            double* gw = grad + w_off + o * in_stride;
            double gb = 0.0;
            for (int k = 0; k < kSlots; ++k) {
                const double d =
                    ws.slot_grad[k * ws.slot_grad_stride + delta_off + o];
                gb += d;
                const double* x = in_act.data() + k * in_stride;
                for (std::size_t i = 0; i < in_stride; ++i) gw[i] += d * x[i];
            }
            grad[b_off + o] += gb;
        });
    };
    reduce_dense(lay_.d1_w, lay_.d1_b, o_ga1, c.hidden, ws.h0,
                 static_cast<std::size_t>(c.head_in()));
    reduce_dense(lay_.d2_w, lay_.d2_b, o_ga2, c.hidden, ws.a1,
                 static_cast<std::size_t>(c.hidden));
    reduce_dense(lay_.d3_w, lay_.d3_b, o_go2, 2, ws.a2,
                 static_cast<std::size_t>(c.hidden));
}

std::array<DaError, 120> denormalize_outputs(const double* out) {
    std::array<DaError, 120> res{};
    for (int k = 0; k < 120; ++k) {
        res[k].r = std::clamp(out[k] * 50.0, 0.0, 50.0);
        double th = std::remainder(out[120 + k] * kPi, 2.0 * kPi);
        if (th >= kPi) th -= 2.0 * kPi;
        res[k].theta = th;
    }
    return res;
}

std::array<DaError, 120> Model::predict(const ElevationGrid& grid, Exec exec) const {
    if (grid.w != cfg_.grid_size || grid.h != cfg_.grid_size)
        throw std::runtime_error("model/grid size mismatch");
    std::vector<float> geo, cor;
    geometric_features(grid, cfg_.mode, geo, exec);
    corridor_tensor(grid, cor, exec);
    Workspace ws(cfg_);
    std::vector<double> out(240);
    forward(geo.data(), cor.data(), ws, out.data(), exec);
    return denormalize_outputs(out.data());
}

void Model::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f.write("CNNW", 4);
    write_u32(f, 2);  // version
    write_u32(f, static_cast<std::uint32_t>(cfg_.grid_size));
    write_u32(f, cfg_.mode == PathMode::MultiPath ? 1 : 0);
    write_u32(f, 2);  // conv block count
    const int convs[2][2] = {{1, cfg_.conv1_ch}, {cfg_.conv1_ch, cfg_.conv2_ch}};
    const int pools[2][2] = {{1, 2}, {kRows, kColsP}};  // second block: global avg
    for (int b = 0; b < 2; ++b) {
        write_u32(f, static_cast<std::uint32_t>(convs[b][0]));
        write_u32(f, static_cast<std::uint32_t>(convs[b][1]));
        write_u32(f, kKernel);
        write_u32(f, static_cast<std::uint32_t>(pools[b][0]));
        write_u32(f, static_cast<std::uint32_t>(pools[b][1]));
    }
    write_u32(f, kSlots);
    write_u32(f, static_cast<std::uint32_t>(cfg_.emb_dim));
    write_u32(f, 3);  // dense layer count
    const int dn[3][2] = {{cfg_.head_in(), cfg_.hidden},
                          {cfg_.hidden, cfg_.hidden},
                          {cfg_.hidden, 2}};
    for (auto& d : dn) {
        write_u32(f, static_cast<std::uint32_t>(d[0]));
        write_u32(f, static_cast<std::uint32_t>(d[1]));
    }
    write_u32(f, kNumPatterns);  // statistical table rows per slot
    std::vector<float> p32(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i)
        p32[i] = static_cast<float>(params_[i]);
    f.write(reinterpret_cast<const char*>(p32.data()),
            static_cast<std::streamsize>(p32.size() * 4));
    if (!f) throw std::runtime_error("short write " + path);
}

Model Model::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path);
    char magic[4];
    f.read(magic, 4);
    if (std::memcmp(magic, "CNNW", 4) != 0)
        throw std::runtime_error(path + ": not a CNNW file");
    if (read_u32(f) != 2) throw std::runtime_error(path + ": unsupported version");
    ModelConfig cfg;
    cfg.grid_size = static_cast<int>(read_u32(f));
    cfg.mode = read_u32(f) == 1 ? PathMode::MultiPath : PathMode::SinglePath;
    if (read_u32(f) != 2) throw std::runtime_error(path + ": conv block count");
    for (int b = 0; b < 2; ++b) {
        const int ic = static_cast<int>(read_u32(f));
        const int oc = static_cast<int>(read_u32(f));
        if (read_u32(f) != kKernel) throw std::runtime_error(path + ": kernel");
        read_u32(f);
        read_u32(f);
        if (b == 0) {
            if (ic != 1) throw std::runtime_error(path + ": conv1 input");
            cfg.conv1_ch = oc;
        } else {
            if (ic != cfg.conv1_ch) throw std::runtime_error(path + ": conv2 input");
            cfg.conv2_ch = oc;
        }
    }
    if (read_u32(f) != kSlots) throw std::runtime_error(path + ": slot count");
    cfg.emb_dim = static_cast<int>(read_u32(f));
    if (read_u32(f) != 3) throw std::runtime_error(path + ": dense layer count");
    const std::uint32_t d1_in = read_u32(f);
    cfg.hidden = static_cast<int>(read_u32(f));
    read_u32(f);
    read_u32(f);
    read_u32(f);
    if (read_u32(f) != 2) throw std::runtime_error(path + ": output width");
    if (d1_in != static_cast<std::uint32_t>(cfg.head_in()))
        throw std::runtime_error(path + ": head width");
    if (read_u32(f) != kNumPatterns)
        throw std::runtime_error(path + ": pattern table width");

    Model m(cfg);
    std::vector<float> p32(m.params_.size());
    f.read(reinterpret_cast<char*>(p32.data()),
           static_cast<std::streamsize>(p32.size() * 4));
    if (!f) throw std::runtime_error(path + ": truncated parameters");
    for (std::size_t i = 0; i < p32.size(); ++i) m.params_[i] = p32[i];
    return m;
}

// ---------------------------------------------------------------------------

TinyModel::TinyModel() {
    params.assign(conv_wsize(1, kCh) + kCh +
                      static_cast<std::size_t>(kOut) * (kCh * 8 * 8) + kOut,
                  0.0);
}

void TinyModel::init(std::uint64_t seed) {
    Rng r1(derive_seed({seed, 1u}));
    Rng r2(derive_seed({seed, 2u}));
    double* p = params.data();
    he_uniform_fill(p, conv_wsize(1, kCh), kKernel * kKernel, r1);
    he_uniform_fill(p + conv_wsize(1, kCh) + kCh,
                    static_cast<std::size_t>(kOut) * (kCh * 8 * 8), kCh * 8 * 8, r2);
}

double TinyModel::loss(const double* input, const double* target, double* grad) const {
    const std::size_t cw = conv_wsize(1, kCh);
    const double* conv_w = params.data();
    const double* conv_b = conv_w + cw;
    const double* d_w = conv_b + kCh;
    const double* d_b = d_w + static_cast<std::size_t>(kOut) * (kCh * 8 * 8);

    const int plane = kCh * kIn * kIn;
    const int flat = kCh * 8 * 8;
    std::vector<double> c(plane), r(plane), p(flat), y(kOut);
    std::vector<int> idx(flat);
    conv2d_forward(input, 1, kIn, kIn, conv_w, conv_b, kCh, c.data());
    relu_forward(c.data(), plane, r.data());
    maxpool_forward(r.data(), kCh, kIn, kIn, 2, 2, p.data(), idx.data());
    dense_forward(p.data(), flat, d_w, d_b, kOut, y.data());

    double se = 0.0;
    for (int i = 0; i < kOut; ++i) se += (y[i] - target[i]) * (y[i] - target[i]);
    const double loss = std::sqrt(se / kOut);
    if (!grad) return loss;

    std::vector<double> gy(kOut), gp(flat), gr(plane), gc(plane);
    for (int i = 0; i < kOut; ++i)
        gy[i] = (y[i] - target[i]) / (kOut * std::max(loss, 1e-30));
    double* g_conv_w = grad;
    double* g_conv_b = grad + cw;
    double* g_d_w = g_conv_b + kCh;
    double* g_d_b = g_d_w + static_cast<std::size_t>(kOut) * flat;
    std::fill(grad, grad + params.size(), 0.0);
    dense_backward(p.data(), flat, d_w, kOut, gy.data(), gp.data(), g_d_w, g_d_b);
    maxpool_backward(idx.data(), gp.data(), kCh, kIn, kIn, 2, 2, gr.data());
    relu_backward(c.data(), gr.data(), plane, gc.data());
    conv2d_backward(input, 1, kIn, kIn, conv_w, kCh, gc.data(), nullptr, g_conv_w,
                    g_conv_b);
    return loss;
}

double gradient_check(const TinyModel& model, const double* input,
                      const double* target, double h) {
    TinyModel m = model;
    std::vector<double> ana(m.n_params());
    m.loss(input, target, ana.data());
    double worst = 0.0;
    for (std::size_t i = 0; i < m.n_params(); ++i) {
        const double keep = m.params[i];
        m.params[i] = keep + h;
        const double lp = m.loss(input, target, nullptr);
        m.params[i] = keep - h;
        const double lm = m.loss(input, target, nullptr);
        m.params[i] = keep;
        const double num = (lp - lm) / (2.0 * h);
        const double rel =
            std::abs(num - ana[i]) / std::max({std::abs(num), std::abs(ana[i]), 1e-4});
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace mapfix
