#include "gkslcp/trajectory_io.hpp"

#include <set>
#include <sstream>

namespace gkslcp {

double trace_deviation(const Superop& map) {
    const int d = operator_dim(map);
    const Vector e = vectorize(ops::identity(d));
    return (e.adjoint() * map - e.adjoint()).norm();
}

json trajectory_to_json(const MapTrajectory& traj) {
    json maps = json::array();
    for (const auto& m : traj.maps) maps.push_back(matrix_to_json(m));
    return json{{"format", "gkslcp-trajectory"},
                {"family", to_string(traj.family)},
                {"grid", {{"horizon", traj.grid.horizon}, {"steps", traj.grid.steps}}},
                {"maps", std::move(maps)},
                {"tail_norms", traj.tail_norms},
                {"warnings", traj.warnings}};
}

MapTrajectory trajectory_from_json(const json& doc) {
    if (!doc.is_object()) throw InputError("", "trajectory document must be a JSON object");
    static const std::set<std::string> allowed{"format", "family", "grid", "maps", "tail_norms", "warnings",
                                               "provenance"};
    for (const auto& [key, _] : doc.items()) {
        if (!allowed.count(key)) throw InputError(key, "unknown key");
    }
    if (doc.value("format", std::string{}) != "gkslcp-trajectory") {
        throw InputError("format", "expected \"gkslcp-trajectory\"");
    }
    MapTrajectory traj;
    try {
        traj.family = family_from_string(doc.at("family").get<std::string>());
        const json& g = doc.at("grid");
        traj.grid = TimeGrid(g.at("horizon").get<double>(), g.at("steps").get<int>());
    } catch (const json::exception& e) {
        throw InputError("grid", e.what());
    } catch (const std::invalid_argument& e) {
        throw InputError("family", e.what());
    }
    if (!doc.contains("maps") || !doc.at("maps").is_array()) throw InputError("maps", "expected an array");
    const json& maps = doc.at("maps");
    if (static_cast<int>(maps.size()) != traj.grid.size()) {
        throw InputError("maps", "expected " + std::to_string(traj.grid.size()) + " maps, found " +
                                     std::to_string(maps.size()));
    }
    for (std::size_t m = 0; m < maps.size(); ++m) {
        Superop s = matrix_from_json(maps[m], "maps[" + std::to_string(m) + "]");
        const int d = operator_dim(s);
        if (d < kMinDim || d > kMaxDim) throw InputError("maps[" + std::to_string(m) + "]", "bad dimension");
        if (!traj.maps.empty() && s.rows() != traj.maps.front().rows()) {
            throw InputError("maps[" + std::to_string(m) + "]", "dimension differs from maps[0]");
        }
        traj.maps.push_back(std::move(s));
    }
    try {
        if (doc.contains("tail_norms")) traj.tail_norms = doc.at("tail_norms").get<std::vector<double>>();
        if (doc.contains("warnings")) traj.warnings = doc.at("warnings").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw InputError("tail_norms", e.what());
    }
    return traj;
}

std::string trajectory_diagnostics_csv(const MapTrajectory& traj) {
    std::ostringstream out;
    out << "t,trace_dev,tail_norm\n";
    for (std::size_t m = 0; m < traj.maps.size(); ++m) {
        out << json(traj.grid.node(static_cast<int>(m))).dump() << ',' << json(trace_deviation(traj.maps[m])).dump()
            << ',';
        if (m < traj.tail_norms.size()) out << json(traj.tail_norms[m]).dump();
        out << '\n';
    }
    return out.str();
}

}  // namespace gkslcp
