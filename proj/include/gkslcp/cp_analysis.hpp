// Complete positivity, trace preservation and divisibility of dynamical maps
//
// Choi convention. With column stacking, the Choi matrix is indexed so that
//   C[a + d*i, b + d*j] = Lambda(|i><j|)[a, b],
// i.e. the ancilla index is the slow one. For Lambda = sum_k K_k . K_k^dagger this gives
// C = sum_k vec(K_k) vec(K_k)^dagger, so Kraus operators are unvec'd eigenvectors.
// The spectrum equals that of (Lambda x 1)|Phi+><Phi+| in any tensor ordering.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gkslcp/propagators.hpp"

namespace gkslcp {

inline constexpr double kDefaultEpsCP = 1e-8;
inline constexpr double kDefaultKrausCutoff = 1e-12;
inline constexpr double kDefaultCondLimit = 1e12;
inline constexpr std::uint64_t kDefaultSeed = 12345;

struct ChoiMatrix {
    int dim{0};
    Matrix matrix;
};

ChoiMatrix choi(const Superop& map);
/// Inverse of choi(): the superoperator whose Choi matrix is `c`.
Superop superop_from_choi(const ChoiMatrix& c);

struct CPCheck {
    bool cp{false};
    double lambda_min{0.0};
    double threshold{0.0};  // -eps_cp * d
    bool hermitian{true};   // false when the Choi matrix failed the Hermiticity check
};

/// CP iff the smallest Choi eigenvalue is >= -eps_cp * d.
CPCheck cp_check(const ChoiMatrix& c, double eps_cp = kDefaultEpsCP);

/// Smallest Choi eigenvalue and its eigenvector, a certificate against CP when negative.
struct ChoiWitness {
    double lambda_min{0.0};
    Vector eigenvector;
};
ChoiWitness choi_witness(const ChoiMatrix& c);

/// M(Lambda) = <Psi| (Lambda x 1)(|Phi><Phi|) |Psi> for unit vectors in C^d (x) C^d.
/// Vectors use the same ordering as the Choi matrix: component a + d*i is |a>_sys |i>_anc.
double measure_value(const Superop& map, const Vector& psi, const Vector& phi);

struct MeasureSample {
    double min_value{0.0};
    Vector psi;
    Vector phi;
    int samples{0};
    std::uint64_t seed{kDefaultSeed};
};

/// Minimum of M over `samples` pairs of normalized complex-normal vectors drawn from mt19937_64(seed).
MeasureSample measure_sample(const Superop& map, int samples, std::uint64_t seed = kDefaultSeed);

struct KrausSet {
    std::vector<Matrix> operators;
    std::vector<double> weights;  // Choi eigenvalues absorbed into each operator
};

/// Thrown by kraus_extract when the Choi matrix is not CP.
class NotCPError : public std::invalid_argument {
public:
    explicit NotCPError(double lambda_min)
        : std::invalid_argument("map is not completely positive: lambda_min = " + std::to_string(lambda_min)),
          lambda_min_(lambda_min) {}
    double lambda_min() const noexcept { return lambda_min_; }

private:
    double lambda_min_;
};

/// Keeps eigenpairs with lambda > cutoff * trace(C); K = sqrt(lambda) unvec(v).
KrausSet kraus_extract(const ChoiMatrix& c, double cutoff = kDefaultKrausCutoff, double eps_cp = kDefaultEpsCP);
/// sum_j K_j . K_j^dagger
Superop kraus_reconstruct(const KrausSet& k);
/// max |sum_j K_j^dagger K_j - 1| entrywise
double kraus_completeness_defect(const KrausSet& k);

enum class KrausClause { none, singular, diagonal, off_diagonal };
std::string to_string(KrausClause c);

/// (K_j)^{-1} K_k = 1 delta_jk. For j != k this asks the product to vanish, so only single-element
/// sets (or degenerate ones) can satisfy it; the first failing clause is reported.
struct KrausConditionResult {
    bool holds{false};
    KrausClause failed{KrausClause::none};
    double max_condition{0.0};        // largest 2-norm condition number among the K_j
    double diagonal_residual{0.0};    // max_j ||K_j^{-1} K_j - 1||_F
    double off_diagonal_residual{0.0};  // max_{j != k} ||K_j^{-1} K_k||_F
    int singular_index{-1};
};
KrausConditionResult kraus_condition_check(const KrausSet& k, double tol = 1e-8,
                                           double cond_limit = kDefaultCondLimit);

enum class IntervalStatus { cp, not_cp, indeterminate };
std::string to_string(IntervalStatus s);

struct IntervalVerdict {
    int from{0};  // interval [t_from, t_from+1]
    IntervalStatus status{IntervalStatus::cp};
    double lambda_min{0.0};  // of Lambda_{m+1} Lambda_m^{-1}; NaN when indeterminate
    double condition{1.0};   // 2-norm condition number of Lambda_m
};

/// Intermediate maps Lambda_{m+1} Lambda_m^{-1} by linear solve, each cp_check'ed.
std::vector<IntervalVerdict> divisibility_check(const MapTrajectory& traj, double eps_cp = kDefaultEpsCP,
                                                double cond_limit = kDefaultCondLimit);

/// Sign reading of the diagonal of W. `nonpositive`: CP needs the time-integrated real part of
/// every diagonal element to be <= 0. `nonnegative`: the opposite reading.
enum class WSignConvention { nonpositive, nonnegative };
std::string to_string(WSignConvention c);

struct SignResolution {
    WSignConvention convention{WSignConvention::nonpositive};
    double lambda_min_negative_w{0.0};  // Choi minimum at T for W = -1
    double lambda_min_positive_w{0.0};  // Choi minimum at T for W = +1
    double measure_min_negative_w{0.0};
    double measure_min_positive_w{0.0};
};

/// Runs the non-local Z-only equation for W = +1 and W = -1 (identity operator, d = 2) and decides
/// which sign of the integrated real part keeps the map CP, by Choi spectrum and sampled M.
/// Computed once and cached.
const SignResolution& resolve_w_sign_convention();

struct WConditionReport {
    double max_off_diagonal{0.0};
    std::vector<double> integrated_diagonal_real;  // int_0^T int_0^t Re <n|W|n>, per basis state
    bool diagonal{false};
    bool uniform_diagonal{false};  // all diagonal elements equal at every sample
    bool pass_nonpositive{false};
    bool pass_nonnegative{false};
    WSignConvention resolved{WSignConvention::nonpositive};
    bool verdict{false};  // diagonal and passing under the resolved reading
};

/// Samples W on the grid triangle in the given orthonormal basis (columns of `basis`).
WConditionReport w_strict_condition_check(const TwoTimeOperatorFunction& w, const TimeGrid& grid,
                                          const Matrix& basis, double tol = 1e-12);

struct ZWitness {
    double t{0.0};
    int node{0};
    Vector psi;
    Vector phi;
    double measure{0.0};
    double choi_lambda_min{0.0};  // at the same node, cross-check
    int l{0};
    int n{0};
    double phase{0.0};  // theta_n - theta_l used
};

struct ZCounterexampleOptions {
    double eps_cp{kDefaultEpsCP};
    int amplitude_points{64};
    /// Relative phase theta_n - theta_l = phase_offset - phi_{l,n}. The default 0 aligns the
    /// cross term so that the second-order contribution to M is negative.
    double phase_offset{0.0};
};

/// Two-component ansatz search on the non-local Z-only trajectory. Returns nullopt when W has no
/// off-diagonal element or no sample drops below -10 eps_cp.
std::optional<ZWitness> z_counterexample(const TwoTimeOperatorFunction& w, const TimeGrid& grid,
                                         const ZCounterexampleOptions& opt = {});

/// Non-local equation with kernel -(W . + . W^dagger) only.
MapTrajectory solve_nonlocal_z(const TwoTimeOperatorFunction& w, const TimeGrid& grid);

struct NodeVerdict {
    double t{0.0};
    double lambda_min{0.0};
    double trace_dev{0.0};
    std::optional<double> div_lambda_min;
    std::optional<IntervalStatus> div_status;
    bool cp{false};
};

struct CertifyOptions {
    double eps_cp{kDefaultEpsCP};
    double tol_tp{1e-8};
    bool divisibility{true};
    double cond_limit{kDefaultCondLimit};
};

struct CPReport {
    Family family{Family::local_full};
    CertifyOptions options;
    std::vector<NodeVerdict> nodes;
    bool trace_preserving_family{false};

    bool all_cp() const;
    /// True when trace_dev <= tol_tp at every node (only meaningful for TP families).
    bool all_tp() const;
    int non_cp_intervals() const;
    int indeterminate_intervals() const;
};

CPReport certify(const MapTrajectory& traj, const CertifyOptions& opt = {});
json cp_report_to_json(const CPReport& r);
/// Columns t, lambda_min, trace_dev, div_lambda_min, verdict.
std::string cp_report_csv(const CPReport& r);

}  // namespace gkslcp
