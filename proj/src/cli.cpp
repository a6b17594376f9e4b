#include "gkslcp/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "gkslcp/cp_analysis.hpp"
#include "gkslcp/experiments.hpp"
#include "gkslcp/kernel_io.hpp"
#include "gkslcp/trajectory_io.hpp"

namespace gkslcp {

namespace {

namespace fs = std::filesystem;

/// Numerical failure inside a solver (exit 3).
struct SolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        f << content;
        if (!f.flush()) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

void emit_error(std::ostream& err, int code, const std::string& kind, const std::string& field,
                const std::string& message) {
    json e{{"error", {{"code", code}, {"kind", kind}, {"message", message}}}};
    if (!field.empty()) e["error"]["field"] = field;
    err << e.dump() << '\n';
}

// --- configuration -----------------------------------------------------------

template <typename T>
T get_field(const json& doc, const std::string& key) {
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError(key, std::string("wrong type: ") + e.what());
    }
}

void apply_config_file(RunConfig& c, const std::string& path) {
    const json doc = parse_json_text(read_text_file(path, "config"));
    if (!doc.is_object()) throw InputError("config", "configuration must be a JSON object");
    static const std::set<std::string> allowed{"kernel", "trajectory", "w",       "redfield", "T",
                                               "steps",  "family",     "pattern", "order",    "eps_cp",
                                               "seed",   "samples",    "out",     "g_list"};
    for (const auto& [key, _] : doc.items()) {
        if (!allowed.count(key)) throw InputError(key, "unknown key");
    }
    // Paths in a config file are resolved against the file's directory.
    const fs::path base = fs::path(path).parent_path();
    auto path_field = [&](const std::string& key) -> std::string {
        const fs::path p = get_field<std::string>(doc, key);
        return p.is_absolute() || base.empty() ? p.string() : (base / p).lexically_normal().string();
    };
    if (doc.contains("kernel")) c.kernel = path_field("kernel");
    if (doc.contains("trajectory")) c.trajectory = path_field("trajectory");
    if (doc.contains("w")) c.w = path_field("w");
    if (doc.contains("redfield")) c.redfield = path_field("redfield");
    if (doc.contains("out")) c.out = path_field("out");
    if (doc.contains("T")) c.horizon = get_field<double>(doc, "T");
    if (doc.contains("steps")) c.steps = get_field<int>(doc, "steps");
    if (doc.contains("family")) c.family = get_field<std::string>(doc, "family");
    if (doc.contains("pattern")) c.pattern = get_field<std::string>(doc, "pattern");
    if (doc.contains("order")) c.order = get_field<int>(doc, "order");
    if (doc.contains("eps_cp")) c.eps_cp = get_field<double>(doc, "eps_cp");
    if (doc.contains("seed")) c.seed = get_field<std::uint64_t>(doc, "seed");
    if (doc.contains("samples")) c.samples = get_field<int>(doc, "samples");
    if (doc.contains("g_list")) {
        const json& g = doc.at("g_list");
        if (g.is_string()) {
            c.g_list = parse_g_list(g.get<std::string>());
        } else {
            c.g_list = get_field<std::vector<double>>(doc, "g_list");
            if (c.g_list.empty()) throw InputError("g_list", "empty list");
        }
    }
}

void validate_config(const RunConfig& c) {
    if (!std::isfinite(c.horizon) || c.horizon <= 0.0) throw InputError("T", "must be finite and > 0");
    if (c.steps < 1 || c.steps > 1000000) throw InputError("steps", "must lie in [1, 1000000]");
    if (c.order < 1 || c.order > 64) throw InputError("order", "must lie in [1, 64]");
    if (!std::isfinite(c.eps_cp) || c.eps_cp <= 0.0) throw InputError("eps_cp", "must be finite and > 0");
    if (c.samples < 1) throw InputError("samples", "must be >= 1");
    if (c.pattern != "local" && c.pattern != "nonlocal" && c.pattern != "local-full") {
        throw InputError("pattern", "must be one of local, nonlocal, local-full");
    }
}

TimeGrid grid_of(const RunConfig& c) { return TimeGrid(c.horizon, c.steps); }

json provenance(const std::string& command, const RunConfig& c) {
    const json cfg = resolved_config_json(command, c);
    return json{{"tool", "gkslcp"}, {"version", GKSLCP_VERSION}, {"config", cfg}, {"config_hash", fnv1a_hex(cfg.dump())}};
}

std::string hash_of_file(const std::optional<std::string>& path) {
    if (!path) return "";
    try {
        return fnv1a_hex(read_text_file(*path, "path"));
    } catch (const InputError&) {
        return "";
    }
}

void require(const std::optional<std::string>& v, const std::string& field) {
    if (!v) throw InputError(field, "missing required option --" + field);
}

void check_finite(const MapTrajectory& traj) {
    for (std::size_t m = 0; m < traj.maps.size(); ++m) {
        if (!traj.maps[m].allFinite()) {
            throw SolverFailure("non-finite map at node " + std::to_string(m) + " (t = " +
                                std::to_string(traj.grid.node(static_cast<int>(m))) + ")");
        }
    }
}

json vector_to_json(const Vector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(json::array({v(i).real(), v(i).imag()}));
    return arr;
}

// --- subcommands ---------------------------------------------------------------

MapTrajectory run_family(const GKSLKernel& k, const RunConfig& c) {
    const TimeGrid grid = grid_of(c);
    const std::string& f = c.family;
    if (f == "local-full") return solve_local(k, grid);
    if (f == "local-B") return solve_local_B(k, grid);
    if (f == "local-Z") return solve_local_Z(k, grid);
    if (f == "nonlocal-full") return solve_nonlocal(k, grid, KernelPart::full);
    if (f == "nonlocal-B") return solve_nonlocal(k, grid, KernelPart::B);
    if (f == "nonlocal-Z") return solve_nonlocal(k, grid, KernelPart::Z);
    if (f == "weak" || f == "weak-nonlocal-full") return weak_coupling_localize(k, grid);
    if (f == "weak-local-Z") return weak_local_Z(k, grid);
    if (f == "series-local-B" || (f == "series" && c.pattern == "local")) {
        return series_B(k, grid, c.order, SeriesPattern::local);
    }
    if (f == "series-nonlocal-B" || (f == "series" && c.pattern == "nonlocal")) {
        return series_B(k, grid, c.order, SeriesPattern::nonlocal);
    }
    if (f == "series-local-full" || (f == "series" && c.pattern == "local-full")) {
        return series_local_full(k, grid, c.order);
    }
    throw InputError("family", "unknown family '" + f + "'");
}

int cmd_validate(const RunConfig& c, std::ostream& out) {
    require(c.kernel, "kernel");
    const GKSLKernel k = load_kernel_file(*c.kernel);
    out << json{{"ok", true},
                {"dim", k.dim()},
                {"coupling_g", k.coupling_g()},
                {"lindblad_operators", k.lindblad().size()},
                {"c_number", k.is_c_number()},
                {"convolution", k.is_convolution()}}
               .dump()
        << '\n';
    return kExitOk;
}

int cmd_solve(const RunConfig& c, std::ostream& out) {
    require(c.kernel, "kernel");
    const GKSLKernel k = load_kernel_file(*c.kernel);
    MapTrajectory traj;
    try {
        traj = run_family(k, c);
    } catch (const InputError&) {
        throw;
    } catch (const std::exception& e) {
        throw SolverFailure(e.what());
    }
    check_finite(traj);
    json doc = trajectory_to_json(traj);
    doc["provenance"] = provenance("solve", c);
    const fs::path dir(c.out);
    fs::create_directories(dir);
    write_atomic(dir / "trajectory.json", doc.dump() + "\n");
    write_atomic(dir / "diagnostics.csv", trajectory_diagnostics_csv(traj));
    out << json{{"trajectory", (dir / "trajectory.json").string()},
                {"family", to_string(traj.family)},
                {"nodes", traj.maps.size()},
                {"warnings", traj.warnings}}
               .dump()
        << '\n';
    return kExitOk;
}

int cmd_certify(const RunConfig& c, std::ostream& out) {
    require(c.trajectory, "trajectory");
    const MapTrajectory traj = trajectory_from_json(parse_json_text(read_text_file(*c.trajectory, "trajectory")));
    CertifyOptions opt;
    opt.eps_cp = c.eps_cp;
    const CPReport report = certify(traj, opt);
    json doc = cp_report_to_json(report);
    doc["provenance"] = provenance("certify", c);
    const fs::path dir(c.out);
    fs::create_directories(dir);
    write_atomic(dir / "cp_report.json", doc.dump(2) + "\n");
    write_atomic(dir / "cp_report.csv", cp_report_csv(report));

    const bool violation = !report.all_cp();
    json summary{{"all_cp", report.all_cp()}, {"report", (dir / "cp_report.json").string()}};
    if (violation) {
        // Witness at the most negative node: Choi eigenvector plus a sampled measure value.
        std::size_t worst = 0;
        for (std::size_t m = 0; m < report.nodes.size(); ++m) {
            if (!(report.nodes[m].lambda_min >= report.nodes[worst].lambda_min)) worst = m;
        }
        const Superop& map = traj.maps[worst];
        const ChoiMatrix cm = choi(map);
        json wit{{"t", report.nodes[worst].t}, {"node", worst}, {"lambda_min", report.nodes[worst].lambda_min}};
        try {
            const ChoiWitness cw = choi_witness(cm);
            wit["choi_eigenvector"] = vector_to_json(cw.eigenvector);
            const int d = cm.dim;
            const Vector phi = vectorize(ops::identity(d)) / std::sqrt(static_cast<double>(d));
            wit["measure_at_choi_witness"] = measure_value(map, cw.eigenvector, phi);
            const MeasureSample ms = measure_sample(map, c.samples, c.seed);
            wit["sampled_measure"] = {{"min_value", ms.min_value}, {"samples", ms.samples}, {"seed", ms.seed},
                                      {"psi", vector_to_json(ms.psi)}, {"phi", vector_to_json(ms.phi)}};
        } catch (const NotHermitianError& e) {
            wit["note"] = std::string("Choi matrix not Hermitian: ") + e.what();
        }
        wit["provenance"] = provenance("certify", c);
        write_atomic(dir / "witness.json", wit.dump(2) + "\n");
        summary["witness"] = (dir / "witness.json").string();
    }
    out << summary.dump() << '\n';
    return violation ? kExitViolation : kExitOk;
}

RedfieldModel load_redfield(const std::string& path) {
    const json doc = parse_json_text(read_text_file(path, "redfield"));
    if (!doc.is_object()) throw InputError("redfield", "document must be a JSON object");
    for (const auto& [key, _] : doc.items()) {
        if (key != "h_s" && key != "s" && key != "correlation") throw InputError("redfield." + key, "unknown key");
    }
    for (const char* key : {"h_s", "s", "correlation"}) {
        if (!doc.contains(key)) throw InputError(std::string("redfield.") + key, "missing required field");
    }
    RedfieldModel m;
    m.h_s = matrix_from_json(doc.at("h_s"), "redfield.h_s");
    m.s = matrix_from_json(doc.at("s"), "redfield.s");
    m.correlation = ScalarProfile::from_json(doc.at("correlation"), "redfield.correlation");
    if (m.h_s.rows() != m.s.rows()) throw InputError("redfield.s", "dimension differs from h_s");
    if (hermiticity_defect(m.h_s) > kHermitianTolerance) throw InputError("redfield.h_s", "not Hermitian");
    if (hermiticity_defect(m.s) > kHermitianTolerance) throw InputError("redfield.s", "not Hermitian");
    if (!m.correlation.is_convolution()) throw InputError("redfield.correlation", "must depend on t - t' only");
    return m;
}

int cmd_gscan(const RunConfig& c, std::ostream& out) {
    if (c.g_list.empty()) throw InputError("g_list", "missing or empty --g-list");
    const std::vector<double> gs = [&] {
        try {
            return normalize_g_list(c.g_list);
        } catch (const std::invalid_argument& e) {
            throw InputError("g_list", e.what());
        }
    }();
    GScanResult r;
    if (c.redfield) {
        r = g_scan(load_redfield(*c.redfield), grid_of(c), gs);
    } else {
        require(c.kernel, "kernel");
        r = g_scan(load_kernel_file(*c.kernel), grid_of(c), gs);
    }
    json doc = gscan_to_json(r);
    doc["provenance"] = provenance("gscan", c);
    const fs::path dir(c.out);
    fs::create_directories(dir);
    write_atomic(dir / "gscan.json", doc.dump(2) + "\n");
    write_atomic(dir / "gscan.csv", gscan_csv(r));
    json summary{{"result", (dir / "gscan.json").string()}};
    summary["slope"] = r.fit ? json(r.fit->slope) : json(nullptr);
    out << summary.dump() << '\n';
    for (const auto& p : r.points) {
        if (!p.ok) return kExitSolver;
    }
    return kExitOk;
}

int cmd_counterexample(const RunConfig& c, std::ostream& out) {
    TwoTimeOperatorFunction w(2);
    if (c.w) {
        w = operator_function_from_json(parse_json_text(read_text_file(*c.w, "w")));
    } else {
        require(c.kernel, "kernel");
        w = split_kernel(load_kernel_file(*c.kernel)).w_op;
    }
    ZCounterexampleOptions opt;
    opt.eps_cp = c.eps_cp;
    const auto wit = z_counterexample(w, grid_of(c), opt);
    const Matrix basis = ops::identity(w.dim());
    const WConditionReport wc = w_strict_condition_check(w, grid_of(c), basis);
    const SignResolution& sign = resolve_w_sign_convention();

    json doc;
    doc["w_condition"] = {{"max_off_diagonal", wc.max_off_diagonal},
                          {"integrated_diagonal_real", wc.integrated_diagonal_real},
                          {"diagonal", wc.diagonal},
                          {"uniform_diagonal", wc.uniform_diagonal},
                          {"pass_nonpositive_reading", wc.pass_nonpositive},
                          {"pass_nonnegative_reading", wc.pass_nonnegative},
                          {"resolved_convention", to_string(wc.resolved)},
                          {"verdict", wc.verdict}};
    doc["sign_oracle"] = {{"lambda_min_w_minus_1", sign.lambda_min_negative_w},
                          {"lambda_min_w_plus_1", sign.lambda_min_positive_w},
                          {"measure_min_w_minus_1", sign.measure_min_negative_w},
                          {"measure_min_w_plus_1", sign.measure_min_positive_w}};
    if (wit) {
        doc["witness"] = {{"t", wit->t},
                          {"node", wit->node},
                          {"measure", wit->measure},
                          {"choi_lambda_min", wit->choi_lambda_min},
                          {"l", wit->l},
                          {"n", wit->n},
                          {"relative_phase", wit->phase},
                          {"psi", vector_to_json(wit->psi)},
                          {"phi", vector_to_json(wit->phi)}};
    } else {
        doc["witness"] = "none";
    }
    doc["provenance"] = provenance("counterexample", c);
    const fs::path dir(c.out);
    fs::create_directories(dir);
    write_atomic(dir / "counterexample.json", doc.dump(2) + "\n");
    out << json{{"witness", wit.has_value()}, {"result", (dir / "counterexample.json").string()}}.dump() << '\n';
    return wit ? kExitViolation : kExitOk;
}

int cmd_convolution(const RunConfig& c, std::ostream& out) {
    require(c.kernel, "kernel");
    const GKSLKernel k = load_kernel_file(*c.kernel);
    if (!k.is_convolution()) throw InputError("kernel", "a profile is not of convolution type");
    const ConvolutionReport r = convolution_case(k, grid_of(c), c.eps_cp);
    json doc = convolution_report_to_json(r);
    doc["provenance"] = provenance("convolution", c);
    const fs::path dir(c.out);
    fs::create_directories(dir);
    write_atomic(dir / "convolution.json", doc.dump(2) + "\n");
    out << json{{"full_cp", r.full_cp}, {"hypotheses_held", r.hypotheses_held()},
                {"result", (dir / "convolution.json").string()}}
               .dump()
        << '\n';
    return r.full_cp ? kExitOk : kExitViolation;
}

}  // namespace

json resolved_config_json(const std::string& command, const RunConfig& c) {
    json j{{"command", command},
           {"T", c.horizon},
           {"steps", c.steps},
           {"family", c.family},
           {"pattern", c.pattern},
           {"order", c.order},
           {"eps_cp", c.eps_cp},
           {"seed", c.seed},
           {"samples", c.samples},
           {"g_list", c.g_list}};
    auto add_path = [&](const char* key, const std::optional<std::string>& p) {
        if (p) {
            j[key] = *p;
            j[std::string(key) + "_hash"] = hash_of_file(p);
        }
    };
    add_path("kernel", c.kernel);
    add_path("trajectory", c.trajectory);
    add_path("w", c.w);
    add_path("redfield", c.redfield);
    return j;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

std::vector<double> parse_g_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        const auto last = item.find_last_not_of(" \t");
        if (first == std::string::npos) throw InputError("g_list", "empty entry in '" + csv + "'");
        const std::string tok = item.substr(first, last - first + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) throw InputError("g_list", "not a number: '" + tok + "'");
        out.push_back(v);
    }
    if (out.empty()) throw InputError("g_list", "empty list");
    return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"gkslcp: GKSL-like kernels, dynamical maps and complete-positivity certification"};
    app.set_version_flag("--version", std::string(GKSLCP_VERSION));
    app.require_subcommand(1);

    RunConfig cli;
    std::string config_path, g_list_csv, kernel, trajectory, w, redfield;
    struct Flags {
        CLI::Option *kernel{}, *trajectory{}, *w{}, *redfield{}, *T{}, *steps{}, *family{}, *pattern{}, *order{},
            *eps{}, *seed{}, *samples{}, *out{}, *g{};
    } flags;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON configuration file (unknown keys rejected)");
        flags.kernel = sub->add_option("--kernel", kernel, "kernel document");
        flags.T = sub->add_option("--T", cli.horizon, "time horizon");
        flags.steps = sub->add_option("--steps", cli.steps, "number of time steps M");
        flags.eps = sub->add_option("--eps-cp", cli.eps_cp, "CP tolerance (scaled by d)");
        flags.seed = sub->add_option("--seed", cli.seed, "random seed");
        flags.out = sub->add_option("--out", cli.out, "output directory");
    };

    std::vector<std::pair<std::string, CLI::App*>> subs;
    auto make = [&](const std::string& name, const std::string& help) {
        CLI::App* s = app.add_subcommand(name, help);
        subs.emplace_back(name, s);
        return s;
    };

    // Each subcommand gets its own option objects; keep per-subcommand Flags to query counts.
    std::vector<std::pair<CLI::App*, Flags>> flag_sets;
    auto register_sub = [&](CLI::App* s, bool family, bool traj, bool gl, bool wopt, bool samples) {
        flags = Flags{};
        add_common(s);
        if (family) {
            flags.family = s->add_option("--family", cli.family,
                                         "local-full|local-B|local-Z|nonlocal-full|nonlocal-B|nonlocal-Z|series|weak");
            flags.pattern = s->add_option("--pattern", cli.pattern, "series pattern: local|nonlocal|local-full");
            flags.order = s->add_option("--order", cli.order, "series truncation order N");
        }
        if (traj) flags.trajectory = s->add_option("--trajectory", trajectory, "trajectory document");
        if (gl) {
            flags.g = s->add_option("--g-list", g_list_csv, "comma-separated coupling values");
            flags.redfield = s->add_option("--redfield", redfield, "Redfield model document (instead of --kernel)");
        }
        if (wopt) flags.w = s->add_option("--w", w, "W operator-function document (instead of --kernel)");
        if (samples) flags.samples = s->add_option("--samples", cli.samples, "random measure samples");
        flag_sets.emplace_back(s, flags);
    };

    register_sub(make("validate", "validate a kernel document"), false, false, false, false, false);
    register_sub(make("solve", "propagate a kernel and write the trajectory"), true, false, false, false, false);
    register_sub(make("certify", "CP / TP / divisibility report for a trajectory"), false, true, false, false, true);
    register_sub(make("gscan", "coupling scan of the local/non-local discrepancy"), false, false, true, false, false);
    register_sub(make("counterexample", "search a CP violation of the non-local Z map"), false, false, false, true,
                 false);
    register_sub(make("convolution", "convolution-kernel report"), false, false, false, false, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        emit_error(err, kExitConfig, "usage", "", e.what());
        return kExitConfig;
    }

    CLI::App* chosen = nullptr;
    Flags chosen_flags;
    for (auto& [s, f] : flag_sets) {
        if (s->parsed()) {
            chosen = s;
            chosen_flags = f;
        }
    }
    const std::string command = chosen->get_name();

    try {
        // Defaults, then the config file, then flags given explicitly on the command line.
        RunConfig c;
        if (!config_path.empty()) apply_config_file(c, config_path);
        auto given = [](CLI::Option* o) { return o != nullptr && o->count() > 0; };
        if (given(chosen_flags.kernel)) c.kernel = kernel;
        if (given(chosen_flags.trajectory)) c.trajectory = trajectory;
        if (given(chosen_flags.w)) c.w = w;
        if (given(chosen_flags.redfield)) c.redfield = redfield;
        if (given(chosen_flags.T)) c.horizon = cli.horizon;
        if (given(chosen_flags.steps)) c.steps = cli.steps;
        if (given(chosen_flags.family)) c.family = cli.family;
        if (given(chosen_flags.pattern)) c.pattern = cli.pattern;
        if (given(chosen_flags.order)) c.order = cli.order;
        if (given(chosen_flags.eps)) c.eps_cp = cli.eps_cp;
        if (given(chosen_flags.seed)) c.seed = cli.seed;
        if (given(chosen_flags.samples)) c.samples = cli.samples;
        if (given(chosen_flags.out)) c.out = cli.out;
        if (given(chosen_flags.g)) c.g_list = parse_g_list(g_list_csv);
        validate_config(c);

        if (command == "validate") return cmd_validate(c, out);
        if (command == "solve") return cmd_solve(c, out);
        if (command == "certify") return cmd_certify(c, out);
        if (command == "gscan") return cmd_gscan(c, out);
        if (command == "counterexample") return cmd_counterexample(c, out);
        return cmd_convolution(c, out);
    } catch (const InputError& e) {
        emit_error(err, kExitConfig, "input", e.field(), e.what());
        return kExitConfig;
    } catch (const SolverFailure& e) {
        emit_error(err, kExitSolver, "solver", "", e.what());
        return kExitSolver;
    } catch (const std::invalid_argument& e) {
        emit_error(err, kExitConfig, "input", "", e.what());
        return kExitConfig;
    } catch (const fs::filesystem_error& e) {
        emit_error(err, kExitConfig, "io", "", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        emit_error(err, kExitSolver, "solver", "", e.what());
        return kExitSolver;
    }
}

}  // namespace gkslcp
