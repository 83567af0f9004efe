#pragma once
// Evaluation: Table-2-style accuracy report, before/after compensation
// errors, empirical CDFs, and the constant-baseline comparison behind the
// acceptance thresholds.

#include <array>
#include <string>
#include <vector>

#include "mapfix/labeling.hpp"
#include "mapfix/model.hpp"

namespace mapfix {

// Per-slot mean of the training labels over masked-true points (the
// constant-predictor baseline; slots never feasible fall back to the cap).
std::array<double, 120> baseline_mean_r(const std::vector<Sample>& train);

struct EvalResult {
    int n_samples = 0;
    int n_masked = 0;            // feasible (masked-true) points evaluated
    double feasible_rate = 0.0;
    double rmse_r = 0.0;         // predicted distance RMSE (m)
    double rmse_theta = 0.0;     // predicted angle RMSE (rad)
    double rmse_r_baseline = 0.0;
    double median_before = 0.0;  // uncompensated |fix - truth| (m)
    double median_after = 0.0;   // compensated via nearest-slot Eq. 3
    double mean_before = 0.0;
    double mean_after = 0.0;
    double improvement = 0.0;    // 1 - median_after / median_before
    std::vector<double> before;  // per-point errors (sorted, for CDFs)
    std::vector<double> after;
};

// Runs the model over every sample, compares against labels, and applies
// compensation through the nearest-slot lookup.
EvalResult evaluate(const Model& model, const std::vector<Sample>& test,
                    const std::array<double, 120>& baseline, Exec exec);

// Same contract with injected predictions (tests use perfect/zero/constant
// predictors without touching a trained model).
EvalResult evaluate_predictions(
    const std::vector<Sample>& test,
    const std::vector<std::array<DaError, 120>>& predictions,
    const std::array<double, 120>& baseline);

// Table-2-style textual report for one case.
std::string format_report(const std::string& case_label, const EvalResult& r);

// Sorted-errors -> CDF CSV: "error_m,cdf" rows for before and after.
void write_cdf_csv(const std::string& path, const EvalResult& r);

double median(std::vector<double> v);

}  // namespace mapfix
