#include "gkslcp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gkslcp {

namespace {

// Portable uniform draw in [lo, hi); std::uniform_real_distribution is implementation-defined.
double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

int pick(std::mt19937_64& rng, int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }

ScalarProfile real_profile(std::mt19937_64& rng) {
    switch (pick(rng, 3)) {
        case 0: return ScalarProfile::constant(1.0);
        case 1: return ScalarProfile::exponential_decay(uniform(rng, 0.5, 1.5));
        default: return ScalarProfile::gaussian(uniform(rng, 0.5, 2.0));
    }
}

ScalarProfile any_profile(std::mt19937_64& rng) {
    switch (pick(rng, 5)) {
        case 0: return ScalarProfile::constant(1.0);
        case 1: return ScalarProfile::exponential_decay(uniform(rng, 0.5, 1.5));
        case 2: return ScalarProfile::gaussian(uniform(rng, 0.5, 2.0));
        case 3: return ScalarProfile::oscillatory(uniform(rng, -2.0, 2.0));
        default:
            return ScalarProfile::separable(ScalarProfile::exponential_decay(uniform(rng, 0.2, 1.0)),
                                            ScalarProfile::oscillatory(uniform(rng, -2.0, 2.0)));
    }
}

void finish_scan(GScanResult& r) {
    std::vector<double> gs, ds;
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        const auto& p = r.points[i];
        if (!p.ok) continue;
        gs.push_back(p.g);
        ds.push_back(p.distance);
        if (i > 0 && r.points[i - 1].ok && p.distance < r.points[i - 1].distance * (1.0 - 1e-12)) r.monotone = false;
    }
    r.fit = fit_log_log(gs, ds);
    std::vector<double> positive;
    for (double g : gs) {
        if (g > 0.0) positive.push_back(g);
    }
    if (positive.size() < 4) r.notes.push_back("fewer than 4 positive g values; slope is not meaningful");
    if (!positive.empty() && positive.back() < 10.0 * positive.front()) {
        r.notes.push_back("g values span less than one decade");
    }
    if (!r.monotone) r.notes.push_back("distance is not monotone in g");
}

template <typename Distance>
GScanResult run_scan(std::string pairing, const std::vector<double>& g_list, const Distance& distance) {
    GScanResult r;
    r.pairing = std::move(pairing);
    for (double g : normalize_g_list(g_list)) {
        GScanPoint p;
        p.g = g;
        try {
            p.distance = distance(g);
            if (!std::isfinite(p.distance)) {
                p.ok = false;
                p.error = "non-finite distance";
            }
        } catch (const std::exception& e) {
            p.ok = false;
            p.error = e.what();
        }
        r.points.push_back(std::move(p));
    }
    finish_scan(r);
    return r;
}

}  // namespace

std::optional<LogLogFit> fit_log_log(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_log_log: size mismatch");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0 && y[i] > 0.0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    if (lx.size() < 2) return std::nullopt;
    const double n = static_cast<double>(lx.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) return std::nullopt;
    LogLogFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (f.intercept + f.slope * lx[i]);
        ss += r * r;
    }
    f.rms_residual = std::sqrt(ss / n);
    f.points = static_cast<int>(lx.size());
    return f;
}

std::vector<double> normalize_g_list(std::vector<double> g_list) {
    if (g_list.empty()) throw std::invalid_argument("g list is empty");
    for (double g : g_list) {
        if (!std::isfinite(g) || g < 0.0) throw std::invalid_argument("g values must be finite and >= 0");
    }
    std::sort(g_list.begin(), g_list.end());
    if (std::adjacent_find(g_list.begin(), g_list.end()) != g_list.end()) {
        throw std::invalid_argument("g values must be distinct");
    }
    return g_list;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) throw std::invalid_argument("log_spaced needs 0 < lo < hi, count >= 2");
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
    }
    out.back() = hi;
    return out;
}

GScanResult g_scan(const GKSLKernel& k, const TimeGrid& grid, const std::vector<double>& g_list) {
    return run_scan("nonlocal-full vs weak-nonlocal-full", g_list, [&](double g) {
        const GKSLKernel kg = k.with_coupling(g);
        return sup_distance(solve_nonlocal(kg, grid), weak_coupling_localize(kg, grid));
    });
}

std::vector<EigenOperator> eigenoperators(const Matrix& h_s, const Matrix& s) {
    if (h_s.rows() != s.rows()) throw std::invalid_argument("H_S and S dimensions differ");
    const auto eig = hermitian_eig(h_s);
    const int d = static_cast<int>(h_s.rows());
    const double tol = 1e-9 * std::max(1.0, eig.eigenvalues.cwiseAbs().maxCoeff());

    // Group eigenvectors into spectral projectors.
    std::vector<double> energies;
    std::vector<Matrix> projectors;
    for (int a = 0; a < d; ++a) {
        const double e = eig.eigenvalues(a);
        const Vector v = eig.eigenvectors.col(a);
        if (!energies.empty() && std::abs(e - energies.back()) <= tol) {
            projectors.back() += v * v.adjoint();
        } else {
            energies.push_back(e);
            projectors.push_back(v * v.adjoint());
        }
    }
    std::vector<EigenOperator> out;
    for (std::size_t a = 0; a < energies.size(); ++a) {
        for (std::size_t b = 0; b < energies.size(); ++b) {
            const Matrix op = projectors[a] * s * projectors[b];
            if (op.norm() <= 1e-14 * std::max(1.0, s.norm())) continue;
            const double omega = energies[a] - energies[b];
            auto same = std::find_if(out.begin(), out.end(),
                                     [&](const EigenOperator& e) { return std::abs(e.omega - omega) <= tol; });
            if (same != out.end()) {
                same->op += op;
            } else {
                out.push_back({omega, op});
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const EigenOperator& x, const EigenOperator& y) { return x.omega < y.omega; });
    return out;
}

SuperopKernel redfield_kernel(const RedfieldModel& m, RedfieldTerms terms) {
    if (hermiticity_defect(m.h_s) > 1e-10) throw std::invalid_argument("H_S is not Hermitian");
    if (hermiticity_defect(m.s) > 1e-10) throw std::invalid_argument("S is not Hermitian");
    const int d = static_cast<int>(m.h_s.rows());
    const Matrix id = ops::identity(d);
    const double g2 = m.g * m.g;
    const auto eops = eigenoperators(m.h_s, m.s);
    const double tol = 1e-9;
    const ScalarProfile& c = m.correlation;
    const ScalarProfile c_star = c.conj();

    SuperopKernel k(d);
    for (const auto& x : eops) {
        for (const auto& y : eops) {
            const bool secular = std::abs(x.omega + y.omega) <= tol;
            if (terms == RedfieldTerms::secular && !secular) continue;
            // exp(i omega t) exp(i omega' t')
            const ScalarProfile phase =
                secular ? ScalarProfile::oscillatory(x.omega)
                        : ScalarProfile::separable(ScalarProfile::oscillatory(x.omega),
                                                   ScalarProfile::oscillatory(y.omega));
            const Matrix xy = x.op * y.op;
            const ScalarProfile p1 = c * phase;       // C S(t) S(t') rho
            const ScalarProfile p2 = c_star * phase;  // C* S(t) rho S(t')
            if (!xy.isZero(0.0)) {
                k.add(p1, (-g2) * sandwich_superop(xy, id));
                k.add(p1.conj(), (-g2) * sandwich_superop(id, xy.adjoint()));
            }
            k.add(p2, g2 * sandwich_superop(x.op, y.op));
            k.add(p2.conj(), g2 * sandwich_superop(y.op.adjoint(), x.op.adjoint()));
        }
    }
    return k;
}

GScanResult g_scan(const RedfieldModel& m, const TimeGrid& grid, const std::vector<double>& g_list) {
    return run_scan("local vs nonlocal (Redfield kernel)", g_list, [&](double g) {
        RedfieldModel mg = m;
        mg.g = g;
        const SuperopKernel k = redfield_kernel(mg);
        return sup_distance(solve_local(k, grid, Family::local_full), solve_nonlocal(k, grid, Family::nonlocal_full));
    });
}

json gscan_to_json(const GScanResult& r) {
    json pts = json::array();
    for (const auto& p : r.points) {
        json j{{"g", p.g}, {"distance", p.distance}, {"ok", p.ok}};
        if (!p.ok) j["error"] = p.error;
        pts.push_back(std::move(j));
    }
    json fit = nullptr;
    if (r.fit) {
        fit = json{{"slope", r.fit->slope},
                   {"intercept", r.fit->intercept},
                   {"rms_residual", r.fit->rms_residual},
                   {"points", r.fit->points},
                   {"residual_units", "natural log"}};
    }
    return json{{"pairing", r.pairing}, {"points", std::move(pts)}, {"fit", std::move(fit)},
                {"monotone", r.monotone}, {"notes", r.notes}};
}

std::string gscan_csv(const GScanResult& r) {
    std::ostringstream out;
    out << "g,distance\n";
    for (const auto& p : r.points) {
        out << json(p.g).dump() << ',' << (p.ok ? json(p.distance).dump() : std::string("")) << '\n';
    }
    if (r.fit) {
        out << "# slope=" << json(r.fit->slope).dump() << ",residual=" << json(r.fit->rms_residual).dump() << '\n';
    }
    return out.str();
}

GKSLKernel random_corpus_kernel(int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    TwoTimeOperatorFunction h(dim);
    h.add(real_profile(rng), (0.5 * scale) * random::hermitian(dim, rng));
    std::vector<TwoTimeOperatorFunction> ls;
    const int n_ops = 1 + pick(rng, 2);
    for (int i = 0; i < n_ops; ++i) {
        TwoTimeOperatorFunction l(dim);
        const int n_terms = 1 + pick(rng, 2);
        for (int q = 0; q < n_terms; ++q) {
            const ScalarProfile p = any_profile(rng);
            l.add(p, (0.4 * scale) * random::complex_normal(dim, dim, rng));
        }
        ls.push_back(std::move(l));
    }
    return GKSLKernel(std::move(h), std::move(ls), 1.0);
}

std::vector<GKSLKernel> corpus(int count, std::uint64_t seed) {
    std::vector<GKSLKernel> out;
    for (int i = 0; i < count; ++i) out.push_back(random_corpus_kernel(i % 2 == 0 ? 2 : 3, seed + 7919ULL * i));
    return out;
}

ConvolutionReport convolution_case(const GKSLKernel& k, const TimeGrid& grid, double eps_cp) {
    if (!k.is_convolution()) throw std::invalid_argument("kernel has a profile that is not of convolution type");
    ConvolutionReport r;
    CertifyOptions opt;
    opt.eps_cp = eps_cp;
    r.full = certify(solve_nonlocal(k, grid, KernelPart::full), opt);
    const MapTrajectory z = solve_nonlocal(k, grid, KernelPart::Z);
    r.z_only = certify(z, opt);
    r.z_map_cp = r.z_only.all_cp();
    r.full_cp = r.full.all_cp();
    r.kraus_condition = r.z_map_cp;
    if (r.z_map_cp) {
        for (std::size_t m = 0; m < z.maps.size(); ++m) {
            const KrausSet ks = kraus_extract(choi(z.maps[m]), kDefaultKrausCutoff, eps_cp);
            r.max_kraus_rank = std::max(r.max_kraus_rank, static_cast<int>(ks.operators.size()));
            const KrausConditionResult kc = kraus_condition_check(ks);
            if (!kc.holds) {
                r.kraus_condition = false;
                r.kraus_condition_first_failure = static_cast<int>(m);
                r.kraus_failed_clause = kc.failed;
                break;
            }
        }
    }
    return r;
}

json convolution_report_to_json(const ConvolutionReport& r) {
    std::string conclusion;
    if (r.hypotheses_held()) {
        conclusion = r.full_cp ? "hypotheses held and the full map is CP"
                               : "hypotheses held but the full map is not CP";
    } else {
        conclusion = r.full_cp ? "hypotheses did not hold; the full map is CP nonetheless"
                               : "hypotheses did not hold; the full map is not CP";
    }
    return json{{"z_map_cp", r.z_map_cp},
                {"kraus_condition", r.kraus_condition},
                {"kraus_condition_first_failure", r.kraus_condition_first_failure},
                {"kraus_failed_clause", to_string(r.kraus_failed_clause)},
                {"max_kraus_rank", r.max_kraus_rank},
                {"full_cp", r.full_cp},
                {"hypotheses_held", r.hypotheses_held()},
                {"conclusion", conclusion},
                {"full", cp_report_to_json(r.full)},
                {"z_only", cp_report_to_json(r.z_only)}};
}

}  // namespace gkslcp
