#include "cst/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cst {

namespace {

using nlohmann::json;

json rect_to_json(const Rect& r) {
    return json{{"xmin", r.xmin}, {"ymin", r.ymin}, {"xmax", r.xmax}, {"ymax", r.ymax}};
}

Rect rect_from_json(const json& j) {
    return {j.at("xmin").get<double>(), j.at("ymin").get<double>(), j.at("xmax").get<double>(),
            j.at("ymax").get<double>()};
}

std::string plume_kind_name(PlumeKind kind) {
    return kind == PlumeKind::Gaussian ? "gaussian" : "smoothed_disc";
}

PlumeKind plume_kind_from(const std::string& s) {
    if (s == "gaussian") return PlumeKind::Gaussian;
    if (s == "smoothed_disc") return PlumeKind::SmoothedDisc;
    throw ConfigError("unknown plume kind '" + s + "' (expected gaussian or smoothed_disc)");
}

SolverKind solver_kind_from(const std::string& s) {
    if (s == "tk") return SolverKind::TK;
    if (s == "art") return SolverKind::ART;
    if (s == "tv") return SolverKind::TV;
    throw ConfigError("unknown solver kind '" + s + "' (expected tk, art or tv)");
}

MeshScheme scheme_from(const std::string& s) {
    if (s == "uniform") return MeshScheme::Uniform;
    if (s == "hybrid") return MeshScheme::Hybrid;
    throw ConfigError("unknown mesh scheme '" + s + "' (expected uniform or hybrid)");
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["layout"] = {{"n_projections", c.layout.n_projections},
                   {"beams_per_projection", c.layout.beams_per_projection},
                   {"beam_spacing", c.layout.beam_spacing},
                   {"distance", c.layout.distance},
                   {"ros_side", c.layout.ros_side}};
    j["meshes"] = json::array();
    for (const auto& m : c.meshes) {
        json jm{{"name", m.name},
                {"scheme", scheme_name(m.scheme)},
                {"pixel_size", m.pixel_size},
                {"roi_rect", rect_to_json(m.roi_rect)}};
        if (m.scheme == MeshScheme::Hybrid) jm["fine_size"] = m.fine_size;
        j["meshes"].push_back(std::move(jm));
    }
    j["phantoms"] = json::array();
    for (const auto& p : c.phantoms) {
        json jp{{"name", p.name},
                {"cell_size", p.cell_size},
                {"background", p.background},
                {"temperature_k", p.temperature_k},
                {"pressure_atm", p.pressure_atm},
                {"linestrength", p.linestrength}};
        jp["frames"] = json::array();
        for (const auto& f : p.frames) {
            json jplumes = json::array();
            for (const auto& pl : f.plumes)
                jplumes.push_back({{"kind", plume_kind_name(pl.kind)},
                                   {"x", pl.center.x},
                                   {"y", pl.center.y},
                                   {"radius_or_sigma", pl.radius_or_sigma},
                                   {"peak", pl.peak}});
            jp["frames"].push_back({{"plumes", std::move(jplumes)}});
        }
        j["phantoms"].push_back(std::move(jp));
    }
    j["solvers"] = json::array();
    for (const auto& s : c.solvers)
        j["solvers"].push_back({{"kind", solver_name(s.kind)},
                                {"grid_lo", s.grid_lo},
                                {"grid_hi", s.grid_hi},
                                {"grid_steps", s.grid_steps},
                                {"max_iterations", s.opts.max_iterations},
                                {"relative_tolerance", s.opts.relative_tolerance},
                                {"nonneg", s.opts.nonneg}});
    j["snr_list"] = c.snr_list;
    j["sweep_snr_db"] = c.sweep_snr_db;
    j["n_reps"] = c.n_reps;
    j["base_seed"] = c.base_seed;
    j["output_dir"] = c.output_dir;
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    const json& jl = j.at("layout");
    c.layout.n_projections = jl.at("n_projections").get<int>();
    c.layout.beams_per_projection = jl.at("beams_per_projection").get<int>();
    c.layout.beam_spacing = jl.at("beam_spacing").get<double>();
    c.layout.distance = jl.at("distance").get<double>();
    c.layout.ros_side = jl.value("ros_side", 0.0);

    c.meshes.clear();
    for (const json& jm : j.at("meshes")) {
        MeshConfig m;
        m.name = jm.at("name").get<std::string>();
        m.scheme = scheme_from(jm.at("scheme").get<std::string>());
        m.pixel_size = jm.at("pixel_size").get<double>();
        m.roi_rect = rect_from_json(jm.at("roi_rect"));
        if (m.scheme == MeshScheme::Hybrid) m.fine_size = jm.at("fine_size").get<double>();
        c.meshes.push_back(std::move(m));
    }

    c.phantoms.clear();
    for (const json& jp : j.at("phantoms")) {
        PhantomConfig p;
        p.name = jp.at("name").get<std::string>();
        p.cell_size = jp.at("cell_size").get<double>();
        p.background = jp.at("background").get<double>();
        p.temperature_k = jp.at("temperature_k").get<double>();
        p.pressure_atm = jp.at("pressure_atm").get<double>();
        p.linestrength = jp.at("linestrength").get<double>();
        for (const json& jf : jp.at("frames")) {
            FrameConfig f;
            for (const json& jpl : jf.at("plumes")) {
                PlumeSpec pl;
                pl.kind = plume_kind_from(jpl.at("kind").get<std::string>());
                pl.center = {jpl.at("x").get<double>(), jpl.at("y").get<double>()};
                pl.radius_or_sigma = jpl.at("radius_or_sigma").get<double>();
                pl.peak = jpl.at("peak").get<double>();
                f.plumes.push_back(pl);
            }
            p.frames.push_back(std::move(f));
        }
        c.phantoms.push_back(std::move(p));
    }

    c.solvers.clear();
    for (const json& js : j.at("solvers")) {
        PerSolverConfig s;
        s.kind = solver_kind_from(js.at("kind").get<std::string>());
        s.grid_lo = js.at("grid_lo").get<double>();
        s.grid_hi = js.at("grid_hi").get<double>();
        s.grid_steps = js.at("grid_steps").get<int>();
        s.opts.max_iterations = js.at("max_iterations").get<int>();
        s.opts.relative_tolerance = js.at("relative_tolerance").get<double>();
        s.opts.nonneg = js.at("nonneg").get<bool>();
        c.solvers.push_back(s);
    }

    c.snr_list = j.at("snr_list").get<std::vector<double>>();
    c.sweep_snr_db = j.at("sweep_snr_db").get<double>();
    c.n_reps = j.at("n_reps").get<int>();
    c.base_seed = j.at("base_seed").get<uint64_t>();
    c.output_dir = j.at("output_dir").get<std::string>();
    return c;
}

void validate(const ExperimentConfig& c) {
    if (c.layout.n_projections < 1 || c.layout.beams_per_projection < 1)
        throw ConfigError("layout needs at least one projection and one beam per projection");
    if (c.layout.beam_spacing <= 0.0 || c.layout.distance <= 0.0)
        throw ConfigError("layout spacing and distance must be positive");
    if (c.layout.ros_side < 0.0) throw ConfigError("layout ros_side must be >= 0");
    if (c.n_reps < 1) throw ConfigError("n_reps must be >= 1");
    for (const auto& m : c.meshes) {
        if (m.name.empty()) throw ConfigError("every mesh needs a name");
        if (m.pixel_size <= 0.0) throw ConfigError("mesh '" + m.name + "': pixel_size must be positive");
        if (m.scheme == MeshScheme::Hybrid && m.fine_size <= 0.0)
            throw ConfigError("mesh '" + m.name + "': hybrid meshes need a positive fine_size");
    }
    for (const auto& p : c.phantoms) {
        if (p.name.empty()) throw ConfigError("every phantom needs a name");
        if (p.cell_size <= 0.0)
            throw ConfigError("phantom '" + p.name + "': cell_size must be positive");
        if (p.frames.empty()) throw ConfigError("phantom '" + p.name + "' has no frames");
    }
    for (const auto& s : c.solvers) {
        if (!(s.grid_lo > 0.0) || !(s.grid_lo < s.grid_hi) || s.grid_steps < 2)
            throw ConfigError(std::string("solver ") + solver_name(s.kind) +
                              ": sweep grid needs 0 < lo < hi and at least 2 steps");
        if (s.opts.max_iterations < 1 || !(s.opts.relative_tolerance > 0.0))
            throw ConfigError(std::string("solver ") + solver_name(s.kind) +
                              ": iterations and tolerance must be positive");
    }
}

}  // namespace

std::string scheme_name(MeshScheme scheme) {
    return scheme == MeshScheme::Uniform ? "uniform" : "hybrid";
}

bool operator==(const SolverOptions& a, const SolverOptions& b) {
    return a.max_iterations == b.max_iterations && a.relative_tolerance == b.relative_tolerance &&
           a.nonneg == b.nonneg;
}

bool operator==(const PerSolverConfig& a, const PerSolverConfig& b) {
    return a.kind == b.kind && a.grid_lo == b.grid_lo && a.grid_hi == b.grid_hi &&
           a.grid_steps == b.grid_steps && a.opts == b.opts;
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig c;
    try {
        c = config_from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is missing or mistypes a field: ") + e.what());
    }
    validate(c);
    return c;
}

std::string serialize_config(const ExperimentConfig& config) {
    return config_to_json(config).dump(2) + "\n";
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

uint64_t config_hash(const ExperimentConfig& config) {
    const std::string text = serialize_config(config);
    uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::string config_hash_hex(const ExperimentConfig& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(config)));
    return buf;
}

const MeshConfig& find_mesh(const ExperimentConfig& config, const std::string& name) {
    for (const auto& m : config.meshes)
        if (m.name == name) return m;
    throw ConfigError("config defines no mesh named '" + name + "'");
}

const PhantomConfig& find_phantom(const ExperimentConfig& config, const std::string& name) {
    for (const auto& p : config.phantoms)
        if (p.name == name) return p;
    throw ConfigError("config defines no phantom named '" + name + "'");
}

BeamLayout layout_from_config(const LayoutConfig& layout) {
    return build_beam_layout(layout.n_projections, layout.beams_per_projection, layout.beam_spacing,
                             layout.distance);
}

ConvexPolygon ros_from_config(const LayoutConfig& layout) {
    if (layout.ros_side > 0.0) return make_square({0.0, 0.0}, layout.ros_side);
    return ros_polygon(layout_from_config(layout));
}

Mesh mesh_from_config(const MeshConfig& mesh, const ConvexPolygon& ros) {
    if (mesh.scheme == MeshScheme::Uniform)
        return build_uniform_mesh(ros, mesh.pixel_size, mesh.roi_rect);
    return build_hybrid_mesh(ros, mesh.pixel_size, mesh.fine_size, mesh.roi_rect);
}

std::vector<Field> fields_from_config(const PhantomConfig& phantom, const ConvexPolygon& ros) {
    std::vector<Field> fields;
    fields.reserve(phantom.frames.size());
    for (const auto& frame : phantom.frames)
        fields.push_back(build_field(ros, phantom.cell_size, phantom.background, frame.plumes,
                                     phantom.temperature_k, phantom.pressure_atm,
                                     phantom.linestrength));
    return fields;
}

}  // namespace cst
