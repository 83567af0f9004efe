#include "mapfix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mapfix/compensate.hpp"

namespace mapfix {

std::array<double, 120> baseline_mean_r(const std::vector<Sample>& train) {
    std::array<double, 120> mean{};
    std::array<int, 120> count{};
    for (const Sample& s : train) {
        for (int k = 0; k < 120; ++k) {
            if (s.mask[k]) {
                mean[k] += s.labels[k].r;
                ++count[k];
            }
        }
    }
    for (int k = 0; k < 120; ++k)
        mean[k] = count[k] ? mean[k] / count[k] : kWorstCaseLabel;
    return mean;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

EvalResult evaluate_predictions(
    const std::vector<Sample>& test,
    const std::vector<std::array<DaError, 120>>& predictions,
    const std::array<double, 120>& baseline) {
    EvalResult r;
    r.n_samples = static_cast<int>(test.size());
    SceneParams sp;
    const auto rx = rx_lattice(sp);
    double se_r = 0.0, se_th = 0.0, se_base = 0.0;
    double sum_before = 0.0, sum_after = 0.0;
    int total_slots = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const Sample& s = test[i];
        const auto& pred = predictions[i];
        for (int k = 0; k < 120; ++k) {
            ++total_slots;
            if (!s.mask[k]) continue;
            ++r.n_masked;
            const double dr = pred[k].r - s.labels[k].r;
            const double dth = pred[k].theta - s.labels[k].theta;
            se_r += dr * dr;
            se_th += dth * dth;
            const double db = baseline[k] - s.labels[k].r;
            se_base += db * db;

            const Vec2 truth{rx[k].x, rx[k].y};
            const Vec2 fix = s.fix[k];
            const Vec2 corrected = compensate_fix(fix, rx, pred);
            const double before = std::hypot(fix.x - truth.x, fix.y - truth.y);
            const double after =
                std::hypot(corrected.x - truth.x, corrected.y - truth.y);
            r.before.push_back(before);
            r.after.push_back(after);
            sum_before += before;
            sum_after += after;
        }
    }
    if (r.n_masked) {
        r.rmse_r = std::sqrt(se_r / r.n_masked);
        r.rmse_theta = std::sqrt(se_th / r.n_masked);
        r.rmse_r_baseline = std::sqrt(se_base / r.n_masked);
        r.mean_before = sum_before / r.n_masked;
        r.mean_after = sum_after / r.n_masked;
    }
    r.feasible_rate = total_slots ? static_cast<double>(r.n_masked) / total_slots : 0.0;
    r.median_before = median(r.before);
    r.median_after = median(r.after);
    r.improvement =
        r.median_before > 0.0 ? 1.0 - r.median_after / r.median_before : 0.0;
    std::sort(r.before.begin(), r.before.end());
    std::sort(r.after.begin(), r.after.end());
    return r;
}

EvalResult evaluate(const Model& model, const std::vector<Sample>& test,
                    const std::array<double, 120>& baseline, Exec exec) {
    std::vector<std::array<DaError, 120>> preds(test.size());
    for (std::size_t i = 0; i < test.size(); ++i)
        preds[i] = model.predict(test[i].grid, exec);
    return evaluate_predictions(test, preds, baseline);
}

std::string format_report(const std::string& case_label, const EvalResult& r) {
    std::ostringstream os;
    char buf[160];
    os << "case " << case_label << "\n";
    std::snprintf(buf, sizeof(buf), "  samples               %d (%d masked-true points, %.1f%% feasible)\n",
                  r.n_samples, r.n_masked, 100.0 * r.feasible_rate);
    os << buf;
    std::snprintf(buf, sizeof(buf), "  distance RMSE         %.4f m   (baseline %.4f m, %+.1f%% vs baseline)\n",
                  r.rmse_r, r.rmse_r_baseline,
                  r.rmse_r_baseline > 0.0
                      ? 100.0 * (r.rmse_r / r.rmse_r_baseline - 1.0)
                      : 0.0);
    os << buf;
    std::snprintf(buf, sizeof(buf), "  angle RMSE            %.4f rad\n", r.rmse_theta);
    os << buf;
    std::snprintf(buf, sizeof(buf), "  median error before   %.4f m\n", r.median_before);
    os << buf;
    std::snprintf(buf, sizeof(buf), "  median error after    %.4f m\n", r.median_after);
    os << buf;
    std::snprintf(buf, sizeof(buf), "  mean   error before   %.4f m\n", r.mean_before);
    os << buf;
    std::snprintf(buf, sizeof(buf), "  mean   error after    %.4f m\n", r.mean_after);
    os << buf;
    std::snprintf(buf, sizeof(buf), "  improvement           %.1f%% (1 - median_after/median_before)\n",
                  100.0 * r.improvement);
    os << buf;
    return os.str();
}

void write_cdf_csv(const std::string& path, const EvalResult& r) {
    std::ofstream f(path);
    f << "error_m,cdf,series\n";
    const std::size_t n = r.before.size();
    char line[96];
    for (std::size_t i = 0; i < n; ++i) {
        std::snprintf(line, sizeof(line), "%.6f,%.6f,before\n", r.before[i],
                      (i + 1.0) / n);
        f << line;
    }
    for (std::size_t i = 0; i < r.after.size(); ++i) {
        std::snprintf(line, sizeof(line), "%.6f,%.6f,after\n", r.after[i],
                      (i + 1.0) / r.after.size());
        f << line;
    }
}

}  // namespace mapfix
