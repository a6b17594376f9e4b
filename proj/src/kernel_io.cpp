#include "gkslcp/kernel_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace gkslcp {

namespace {

TwoTimeOperatorFunction terms_from_json(const json& arr, int dim, const std::string& field) {
    if (!arr.is_array()) throw InputError(field, "expected an array of terms");
    TwoTimeOperatorFunction f(dim);
    for (std::size_t k = 0; k < arr.size(); ++k) {
        const std::string tf = field + "[" + std::to_string(k) + "]";
        const json& term = arr[k];
        if (!term.is_object()) throw InputError(tf, "term must be an object");
        for (const auto& [key, _] : term.items()) {
            if (key != "profile" && key != "operator") throw InputError(tf + "." + key, "unknown key");
        }
        if (!term.contains("profile")) throw InputError(tf + ".profile", "missing required field");
        if (!term.contains("operator")) throw InputError(tf + ".operator", "missing required field");
        ScalarProfile p = ScalarProfile::from_json(term.at("profile"), tf + ".profile");
        Matrix op = matrix_from_json(term.at("operator"), tf + ".operator");
        if (op.rows() != dim) {
            throw InputError(tf + ".operator.dim", "operator dimension " + std::to_string(op.rows()) +
                                                       " does not match kernel dim " + std::to_string(dim));
        }
        f.add(std::move(p), std::move(op));
    }
    return f;
}

json terms_to_json(const TwoTimeOperatorFunction& f) {
    json arr = json::array();
    for (const auto& t : f.terms()) {
        arr.push_back(json{{"profile", t.profile.to_json()}, {"operator", matrix_to_json(t.op)}});
    }
    return arr;
}

// Smallest tabulated horizon, so validation never samples outside a table.
double validation_horizon(const json& doc) {
    double horizon = 2.0;
    const std::function<void(const json&)> visit = [&](const json& j) {
        if (j.is_object()) {
            if (j.contains("kind") && j.at("kind") == "tabulated" && j.contains("horizon") &&
                j.at("horizon").is_number()) {
                horizon = std::min(horizon, j.at("horizon").get<double>());
            }
            for (const auto& [_, v] : j.items()) visit(v);
        } else if (j.is_array()) {
            for (const auto& v : j) visit(v);
        }
    };
    visit(doc);
    return horizon;
}

}  // namespace

GKSLKernel kernel_from_json(const json& doc) {
    if (!doc.is_object()) throw InputError("", "kernel document must be a JSON object");
    static const std::set<std::string> allowed{"dim", "coupling_g", "hermitian", "lindblad"};
    for (const auto& [key, _] : doc.items()) {
        if (!allowed.count(key)) throw InputError(key, "unknown key");
    }
    if (!doc.contains("dim")) throw InputError("dim", "missing required field");
    if (!doc.at("dim").is_number_integer()) throw InputError("dim", "must be an integer");
    const auto dim = doc.at("dim").get<long long>();
    if (dim < kMinDim || dim > kMaxDim) {
        throw InputError("dim", "must lie in [" + std::to_string(kMinDim) + ", " + std::to_string(kMaxDim) + "]");
    }
    const int d = static_cast<int>(dim);

    double g = 1.0;
    if (doc.contains("coupling_g")) {
        if (!doc.at("coupling_g").is_number()) throw InputError("coupling_g", "must be a number");
        g = doc.at("coupling_g").get<double>();
        if (!std::isfinite(g) || g < 0.0) throw InputError("coupling_g", "must be finite and >= 0");
    }

    TwoTimeOperatorFunction h(d);
    if (doc.contains("hermitian")) h = terms_from_json(doc.at("hermitian"), d, "hermitian");

    std::vector<TwoTimeOperatorFunction> ls;
    if (doc.contains("lindblad")) {
        const json& arr = doc.at("lindblad");
        if (!arr.is_array()) throw InputError("lindblad", "expected an array of term lists");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            ls.push_back(terms_from_json(arr[i], d, "lindblad[" + std::to_string(i) + "]"));
        }
    }

    GKSLKernel k(std::move(h), std::move(ls), g);
    const double horizon = validation_horizon(doc);
    const double defect = k.hermitian_defect(horizon);
    if (defect > kHermitianTolerance) {
        throw InputError("hermitian", "H'(t,t') is not Hermitian: max |H' - H'^dagger| = " +
                                          std::to_string(defect) + " on sampled (t, t')");
    }
    return k;
}

json kernel_to_json(const GKSLKernel& k) {
    json ls = json::array();
    for (const auto& l : k.lindblad()) ls.push_back(terms_to_json(l));
    return json{{"dim", k.dim()},
                {"coupling_g", k.coupling_g()},
                {"hermitian", terms_to_json(k.hermitian())},
                {"lindblad", std::move(ls)}};
}

json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw InputError("line " + std::to_string(line), e.what());
    }
}

std::string read_text_file(const std::string& path, const std::string& field) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(field, "cannot open file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

GKSLKernel load_kernel_spec(const std::string& text) { return kernel_from_json(parse_json_text(text)); }

TwoTimeOperatorFunction operator_function_from_json(const json& doc) {
    if (!doc.is_object()) throw InputError("", "operator function document must be a JSON object");
    for (const auto& [key, _] : doc.items()) {
        if (key != "dim" && key != "terms") throw InputError(key, "unknown key");
    }
    if (!doc.contains("dim") || !doc.at("dim").is_number_integer()) throw InputError("dim", "missing or not an integer");
    const auto dim = doc.at("dim").get<long long>();
    if (dim < kMinDim || dim > kMaxDim) throw InputError("dim", "out of range");
    if (!doc.contains("terms")) throw InputError("terms", "missing required field");
    return terms_from_json(doc.at("terms"), static_cast<int>(dim), "terms");
}

json operator_function_to_json(const TwoTimeOperatorFunction& f) {
    return json{{"dim", f.dim()}, {"terms", terms_to_json(f)}};
}

std::string save_kernel_spec(const GKSLKernel& k) { return kernel_to_json(k).dump(2) + "\n"; }

GKSLKernel load_kernel_file(const std::string& path) { return load_kernel_spec(read_text_file(path, "kernel")); }

}  // namespace gkslcp
