// Coupling scans, the Redfield-type kernel, and the convolution case

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gkslcp/cp_analysis.hpp"
#include "gkslcp/propagators.hpp"

namespace gkslcp {

struct LogLogFit {
    double slope{0.0};
    double intercept{0.0};
    double rms_residual{0.0};  // natural-log units
    int points{0};
};

/// Least squares of log(y) against log(x); pairs with x <= 0 or y <= 0 are skipped.
/// Returns nullopt with fewer than two usable points.
std::optional<LogLogFit> fit_log_log(const std::vector<double>& x, const std::vector<double>& y);

struct GScanPoint {
    double g{0.0};
    double distance{0.0};
    bool ok{true};
    std::string error;
};

struct GScanResult {
    std::string pairing;  // which two trajectories were compared
    std::vector<GScanPoint> points;
    std::optional<LogLogFit> fit;
    bool monotone{true};  // distances nondecreasing in g (flagged, never fatal)
    /// Non-fatal remarks, e.g. a g-list too short or too narrow for a meaningful fit.
    std::vector<std::string> notes;
};

/// Sorted, validated g-list: finite, >= 0, strictly increasing after sorting.
std::vector<double> normalize_g_list(std::vector<double> g_list);

/// g_list of `count` log-spaced values between lo and hi inclusive.
std::vector<double> log_spaced(double lo, double hi, int count);

/// sup_t || Lambda^{nonlocal,full} - Lambda^{weak-localized} ||_F for each g.
GScanResult g_scan(const GKSLKernel& k, const TimeGrid& grid, const std::vector<double>& g_list);

struct RedfieldModel {
    Matrix h_s;               // system Hamiltonian, Hermitian
    Matrix s;                 // coupling operator, Hermitian
    ScalarProfile correlation;  // C(tau), evaluated as correlation(tau, 0)
    double g{1.0};
};

/// Eigenoperators of the interaction-picture coupling: S^I(t) = sum_k exp(i omega_k t) S_k.
struct EigenOperator {
    double omega{0.0};
    Matrix op;
};
std::vector<EigenOperator> eigenoperators(const Matrix& h_s, const Matrix& s);

enum class RedfieldTerms {
    all,      // every (omega, omega') pair
    secular,  // only omega' = -omega, the pairs whose phase depends on t - t' alone
};

/// Interaction-picture Redfield kernel
///   K_{t,t'} rho = g^2 [ -C(t-t') S(t) S(t') rho + C*(t-t') S(t) rho S(t') ] + h.c.
/// with S(t) = S^I(t), in separable form. The time-local form applies the same kernel to rho(t).
SuperopKernel redfield_kernel(const RedfieldModel& m, RedfieldTerms terms = RedfieldTerms::all);

/// sup_t || Lambda^{local} - Lambda^{nonlocal} ||_F of the Redfield kernel, for each g.
GScanResult g_scan(const RedfieldModel& m, const TimeGrid& grid, const std::vector<double>& g_list);

json gscan_to_json(const GScanResult& r);
/// Columns g, distance; a trailing "# slope=..., residual=..." footer record when a fit exists.
std::string gscan_csv(const GScanResult& r);

/// Reproducible random kernel for the test corpus: one Hermitian term with a real profile and
/// one or two Lindblad operators with one or two terms each; g = 1.
GKSLKernel random_corpus_kernel(int dim, std::uint64_t seed);
/// `count` kernels alternating d = 2, 3, seeded from `seed`.
std::vector<GKSLKernel> corpus(int count, std::uint64_t seed = 2024);

struct ConvolutionReport {
    CPReport full;
    CPReport z_only;
    bool z_map_cp{false};
    bool kraus_condition{false};
    int kraus_condition_first_failure{-1};  // node index, -1 when the condition held everywhere
    KrausClause kraus_failed_clause{KrausClause::none};
    int max_kraus_rank{0};
    bool full_cp{false};
    bool hypotheses_held() const { return z_map_cp && kraus_condition; }
};

/// Non-local equation with a convolution kernel: full trajectory, Z-only companion, Kraus condition
/// on the Z maps, CP of the full maps. Throws std::invalid_argument if a profile is not convolution.
ConvolutionReport convolution_case(const GKSLKernel& k, const TimeGrid& grid, double eps_cp = kDefaultEpsCP);
json convolution_report_to_json(const ConvolutionReport& r);

}  // namespace gkslcp
