#include "clbm/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <openssl/evp.h>

#include "clbm/carleman.hpp"
#include "clbm/instances.hpp"

namespace clbm {

using nlohmann::json;

namespace {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

std::string num(double v) { return fmt::format("{:.17g}", v); }

Vec3 read_vec3(const json& j, const char* key) {
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 3) {
        throw ConfigError(fmt::format("'{}' must be an array of three numbers", key));
    }
    return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
    if (!j.is_object()) {
        throw ConfigError(fmt::format("{} must be a JSON object", where));
    }
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
        }
    }
}

Prism read_prism(const json& j) {
    check_keys(j, {"type", "origin", "extents"}, "prism");
    return Prism{read_vec3(j, "origin"), read_vec3(j, "extents")};
}

GeometryOracle read_geometry(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "none") {
        check_keys(j, {"type"}, "geometry");
        return AllFluid{};
    }
    if (type == "sphere") {
        check_keys(j, {"type", "center", "radius"}, "geometry");
        return Sphere{read_vec3(j, "center"), j.at("radius").get<double>()};
    }
    if (type == "prism") {
        return read_prism(j);
    }
    if (type == "prisms") {
        check_keys(j, {"type", "prisms"}, "geometry");
        PrismUnion u;
        for (const auto& p : j.at("prisms")) {
            u.prisms.push_back(read_prism(p));
        }
        return u;
    }
    throw ConfigError(fmt::format("unknown geometry type '{}'", type));
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot open config file '{}'", path));
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("malformed JSON in '{}': {}", path, e.what()));
    }
}

CarlemanConvention parse_convention(const std::string& s) {
    if (s == "padded") {
        return CarlemanConvention::padded;
    }
    if (s == "tight") {
        return CarlemanConvention::tight;
    }
    throw ConfigError(fmt::format("unknown Carleman convention '{}'", s));
}

LogBase parse_log_base(const std::string& s) {
    if (s == "two") {
        return LogBase::two;
    }
    if (s == "natural") {
        return LogBase::natural;
    }
    throw ConfigError(fmt::format("unknown log base '{}'", s));
}

QaeRounding parse_rounding(const std::string& s) {
    if (s == "one_decimal_then_ceil") {
        return QaeRounding::one_decimal_then_ceil;
    }
    if (s == "ceil") {
        return QaeRounding::ceil;
    }
    throw ConfigError(fmt::format("unknown QAE rounding '{}'", s));
}

Encoding parse_encoding(const std::string& s) {
    if (s == "bespoke") {
        return Encoding::bespoke;
    }
    if (s == "unstructured") {
        return Encoding::unstructured;
    }
    throw ConfigError(fmt::format("unknown encoding '{}'", s));
}

void apply_model_json(const json& j, CostModelConfig& c) {
    check_keys(j,
               {"encoding", "tau", "spectral_norm_A", "h", "spectral_abscissa", "c_max", "b_norm", "epsilon_rho",
                "relative_error", "delta", "error_budget", "allocation_weights", "taylor_k", "padding_p", "log_base",
                "qae_rounding", "carleman", "hull_prisms", "drag", "c0"},
               "model config");
    if (j.contains("encoding")) c.encoding = parse_encoding(j["encoding"].get<std::string>());
    if (j.contains("tau")) c.tau = j["tau"].get<double>();
    if (j.contains("spectral_norm_A")) c.spectral_norm_A = j["spectral_norm_A"].get<double>();
    if (j.contains("h")) c.h = j["h"].get<double>();
    if (j.contains("spectral_abscissa")) c.spectral_abscissa = j["spectral_abscissa"].get<double>();
    if (j.contains("c_max")) c.c_max = j["c_max"].get<double>();
    if (j.contains("b_norm")) c.b_norm = j["b_norm"].get<double>();
    if (j.contains("epsilon_rho")) c.epsilon_rho = j["epsilon_rho"].get<double>();
    if (j.contains("relative_error")) c.relative_error = j["relative_error"].get<double>();
    if (j.contains("delta")) c.delta = j["delta"].get<double>();
    if (j.contains("error_budget")) c.error_budget = j["error_budget"].get<double>();
    if (j.contains("allocation_weights")) {
        const auto w = j["allocation_weights"].get<std::vector<double>>();
        if (w.size() != 4) {
            throw ConfigError("allocation_weights needs four entries (F1, F2, F3, solver)");
        }
        std::copy(w.begin(), w.end(), c.allocation_weights.begin());
    }
    if (j.contains("taylor_k")) c.taylor_k = j["taylor_k"].get<long long>();
    if (j.contains("padding_p")) c.padding_p = j["padding_p"].get<long long>();
    if (j.contains("log_base")) c.bespoke_log_base = parse_log_base(j["log_base"].get<std::string>());
    if (j.contains("qae_rounding")) c.qae_rounding = parse_rounding(j["qae_rounding"].get<std::string>());
    if (j.contains("carleman")) c.carleman_convention = parse_convention(j["carleman"].get<std::string>());
    if (j.contains("hull_prisms")) c.hull_prisms = j["hull_prisms"].get<long long>();
    if (j.contains("drag")) c.drag_override = j["drag"].get<double>();
    if (j.contains("c0")) c.qlsa = default_qlsa_model(j["c0"].get<double>());
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& rows) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) {
            flatten(v, prefix.empty() ? k : prefix + "." + k, rows);
        }
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            flatten(j[i], fmt::format("{}[{}]", prefix, i), rows);
        }
    } else if (j.is_string()) {
        rows.emplace_back(prefix, j.get<std::string>());
    } else if (j.is_number_float()) {
        rows.emplace_back(prefix, num(j.get<double>()));
    } else {
        rows.emplace_back(prefix, j.dump());
    }
}

std::string json_as_csv(const json& j, const std::string& hash) {
    std::vector<std::pair<std::string, std::string>> rows;
    flatten(j, "", rows);
    std::string s = fmt::format("# manifest_sha256={}\nkey,value\n", hash);
    for (const auto& [k, v] : rows) {
        s += fmt::format("{},{}\n", k, v);
    }
    return s;
}

int thread_count() {
    if (const char* env = std::getenv("CLBM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) {
            return static_cast<int>(v);
        }
        throw ConfigError(fmt::format("CLBM_THREADS='{}' is not a positive integer", env));
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

struct Globals {
    std::string config_path;
    std::string out_dir;
    std::string format = "json";
    std::optional<double> tau;
    std::string encoding = "bespoke";
};

struct Emitter {
    const Globals& g;
    std::ostream& out;

    std::string path_for(const std::string& name) const {
        return g.out_dir.empty() ? std::string("-") : (std::filesystem::path(g.out_dir) / name).string();
    }

    void write(const std::string& name, const std::string& content) const {
        if (g.out_dir.empty()) {
            out << content;
            return;
        }
        std::error_code ec;
        std::filesystem::create_directories(g.out_dir, ec);
        const auto path = std::filesystem::path(g.out_dir) / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) {
            throw ConfigError(fmt::format("cannot write '{}'", path.string()));
        }
        f << content;
    }
};

RunManifest make_manifest(const std::string& command, const std::string& source, const json& overrides,
                          const Emitter& em, const std::vector<std::string>& names) {
    RunManifest m;
    m.command = command;
    m.source = source;
    m.overrides = overrides;
    for (const auto& n : names) {
        m.outputs.push_back(em.path_for(n));
    }
    return m;
}

std::string dump_with_hash(json j, const RunManifest& m) {
    j["manifest"] = m.to_json();
    j["manifest_sha256"] = m.hash();
    return j.dump(2) + "\n";
}

CostModelConfig model_from(const Globals& g, const json& flags) {
    CostModelConfig c;
    if (!g.config_path.empty()) {
        apply_model_json(read_json_file(g.config_path), c);
    }
    if (g.tau) {
        c.tau = *g.tau;
    }
    c.encoding = parse_encoding(g.encoding);
    apply_model_json(flags, c);
    validate_tau(c.tau);
    return c;
}

int cmd_simulate(const Globals& g, std::optional<long long> steps, std::ostream& out) {
    if (g.config_path.empty()) {
        throw ConfigError("simulate needs --config PATH");
    }
    SimulationSetup setup = parse_simulation_setup(read_json_file(g.config_path));
    json overrides = json::object();
    if (steps) {
        setup.options.steps = *steps;
        overrides["steps"] = *steps;
    }
    if (g.tau) {
        setup.config.tau = *g.tau;
        overrides["tau"] = *g.tau;
    }
    auto& snaps = setup.options.snapshot_steps;
    if (setup.options.steps == 0) {
        snaps.push_back(0);
    }
    std::sort(snaps.begin(), snaps.end());
    snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());
    snaps.erase(std::remove_if(snaps.begin(), snaps.end(),
                               [&](long long s) { return s < 0 || s > setup.options.steps; }),
                snaps.end());
    Emitter em{g, out};
    std::vector<std::string> names{"drag.csv"};
    for (long long s : snaps) {
        names.push_back(fmt::format("snapshot_{}.csv", s));
    }
    const RunManifest m = make_manifest("simulate", g.config_path, overrides, em, names);
    const RunResult r = run(setup.config, setup.grid, setup.geometry, setup.options);

    std::string csv = fmt::format("# manifest_sha256={}\nstep,drag_N,total_mass,max_density_deviation\n", m.hash());
    for (const auto& s : r.series) {
        csv += fmt::format("{},{},{},{}\n", s.step, num(s.drag_N), num(s.total_mass), num(s.max_density_deviation));
    }
    for (long long w : r.incompressibility_warnings) {
        csv += fmt::format("# warning: density deviation above 10 epsilon_rho at step {}\n", w);
    }
    em.write("drag.csv", csv);
    for (std::size_t i = 1; i < names.size(); ++i) {
        em.write(names[i], fmt::format("# manifest_sha256={}\n", m.hash()) + snapshot_csv(r.snapshots.at(i - 1)));
    }
    return exit_ok;
}

std::string coo_text(const SparseTriples& t, const std::string& hash) {
    std::string s = fmt::format("# manifest_sha256={}\n# rows={} cols={} nnz={}\n", hash, t.n_rows, t.n_cols, t.nnz());
    for (std::size_t i = 0; i < t.nnz(); ++i) {
        s += fmt::format("{} {} {}\n", t.rows[i], t.cols[i], num(t.values[i]));
    }
    return s;
}

int cmd_matrices(const Globals& g, std::vector<long long> grid_dims, const std::string& variant_name, long long cap,
                 std::ostream& out) {
    const Variant variant = variant_name == "dense"    ? Variant::dense
                            : variant_name == "sparse" ? Variant::sparse
                                                       : throw ConfigError("variant must be dense or sparse");
    GeometryOracle geometry = AllFluid{};
    if (!g.config_path.empty()) {
        SimulationSetup setup = parse_simulation_setup(read_json_file(g.config_path));
        geometry = setup.geometry;
        if (grid_dims.empty()) {
            grid_dims = {setup.grid.nx, setup.grid.ny, setup.grid.nz};
        }
    }
    if (grid_dims.empty()) {
        grid_dims = {1, 1, 1};
    }
    if (grid_dims.size() != 3) {
        throw ConfigError("--grid needs three extents");
    }
    const double tau = g.tau.value_or(0.6);
    validate_tau(tau);
    const GridSpec grid(grid_dims[0], grid_dims[1], grid_dims[2]);
    const auto mask = solid_mask(grid, geometry);
    Emitter em{g, out};
    json overrides = {{"grid", grid_dims}, {"variant", variant_name}, {"cap", cap}, {"tau", tau}};
    std::vector<std::string> names{"census.json"};
    if (!g.out_dir.empty()) {
        names.insert(names.end(), {"S.coo", "F1.coo", "F2.coo", "F3.coo"});
    }
    const RunManifest m = make_manifest("matrices", g.config_path.empty() ? "grid" : g.config_path, overrides, em, names);

    // Exact tau for the census when tau is a short decimal.
    const Rational tau_r(static_cast<long long>(std::llround(tau * 1000000.0)), 1000000);
    const FirstOrderBlocks blocks = assemble_first_order(grid, mask, tau, variant, cap);
    const BlockCensus c1 = census_f1(tau_r);
    const BlockCensus c2 = census_f2(tau_r, variant);
    const BlockCensus c3 = census_f3(tau_r, variant);
    json report = {
        {"grid", grid_dims},
        {"tau", tau},
        {"variant", variant_name},
        {"per_node_census",
         {{"F1", {{"nonzeros", c1.nonzeros}, {"unique_values", c1.unique_values}}},
          {"F2", {{"nonzeros", c2.nonzeros}, {"unique_values", c2.unique_values}}},
          {"F3", {{"nonzeros", c3.nonzeros}, {"unique_values", c3.unique_values}}}}},
        {"assembled_nonzeros",
         {{"S", blocks.S.nnz()}, {"F1", blocks.F1.nnz()}, {"F2", blocks.F2.nnz()}, {"F3", blocks.F3.nnz()}}},
    };
    if (g.format == "csv") {
        em.write("census.json", json_as_csv(report, m.hash()));
    } else {
        em.write("census.json", dump_with_hash(report, m));
    }
    if (!g.out_dir.empty()) {
        em.write("S.coo", coo_text(blocks.S, m.hash()));
        em.write("F1.coo", coo_text(blocks.F1, m.hash()));
        em.write("F2.coo", coo_text(blocks.F2, m.hash()));
        em.write("F3.coo", coo_text(blocks.F3, m.hash()));
    }
    return exit_ok;
}

int cmd_analyze(const Globals& g, double phi0_inf, std::ostream& out) {
    const double tau = g.tau.value_or(0.6);
    validate_tau(tau);
    const NormReport nr = norm_report(tau);
    const ConvergenceWindow cw = convergence_window(phi0_inf, tau);
    Emitter em{g, out};
    const RunManifest m = make_manifest("analyze", "norms", {{"tau", tau}, {"phi0_inf", phi0_inf}}, em, {"analyze.json"});
    json report = {
        {"tau", tau},
        {"phi0_inf", phi0_inf},
        {"norms",
         {{"S_inf", nr.s_inf},
          {"S_one", nr.s_one},
          {"F1_inf", nr.f1_inf},
          {"F1_one", nr.f1_one},
          {"F2_inf", nr.f2_inf},
          {"F2_one", nr.f2_one},
          {"F3_inf", nr.f3_inf},
          {"F3_one", nr.f3_one}}},
        {"coefficients_times_tau", nr.coefficients},
        {"coefficients_rounded_up", nr.rounded_up},
        {"bound_one", nr.bound_one},
        {"bound_inf", nr.bound_inf},
        {"spectral_bound", nr.spectral_bound},
        {"spectral_bound_rounded", std::llround(nr.spectral_bound)},
        {"convergence",
         {{"t_c_lower", cw.t_c_lower},
          {"t_c_upper", cw.t_c_upper},
          {"t_c", cw.t_c},
          {"beta0", cw.beta0},
          {"f1_tilde", cw.f1_tilde},
          {"f2_tilde", cw.f2_tilde}}},
    };
    em.write("analyze.json", g.format == "csv" ? json_as_csv(report, m.hash()) : dump_with_hash(report, m));
    return exit_ok;
}

int cmd_estimate(const Globals& g, const std::string& id, const json& flags, std::ostream& out) {
    const PhysicalInstance& inst = find_instance(id);
    const CostModelConfig cfg = model_from(g, flags);
    LatticeOptions lo;
    lo.tau = cfg.tau;
    const LatticeInstance lat = derive_lattice(inst, lo);
    const ResourceEstimate est = estimate_instance(inst, lat, cfg);
    Emitter em{g, out};
    json overrides = flags;
    overrides["encoding"] = g.encoding;
    overrides["tau"] = cfg.tau;
    const RunManifest m = make_manifest("estimate", id, overrides, em, {"estimate.json"});
    const json report = estimate_to_json(est, cfg);
    em.write("estimate.json", g.format == "csv" ? json_as_csv(report, m.hash()) : dump_with_hash(report, m));
    return exit_ok;
}

std::vector<std::string> split_ids(const std::string& s) {
    std::vector<std::string> ids;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            ids.push_back(item);
        }
    }
    return ids;
}

int cmd_sweep(const Globals& g, const std::string& ids_text, const json& flags, std::ostream& out) {
    std::vector<std::string> ids = split_ids(ids_text);
    if (ids.empty()) {
        for (const auto& p : catalog()) {
            if (p.kind == InstanceKind::sphere) {
                ids.push_back(p.id);
            }
        }
    }
    for (const auto& id : ids) {
        (void)find_instance(id);
    }
    const CostModelConfig cfg = model_from(g, flags);
    CostModelConfig other = cfg;
    other.encoding = cfg.encoding == Encoding::bespoke ? Encoding::unstructured : Encoding::bespoke;

    struct Row {
        ResourceEstimate primary;
        ResourceEstimate alternate;
    };
    std::vector<Row> rows(ids.size());
    std::vector<std::exception_ptr> errors(ids.size());
    const int threads = std::min<int>(thread_count(), static_cast<int>(ids.size()));
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = static_cast<std::size_t>(t); i < ids.size(); i += static_cast<std::size_t>(threads)) {
                try {
                    const PhysicalInstance& inst = find_instance(ids[i]);
                    LatticeOptions lo;
                    lo.tau = cfg.tau;
                    const LatticeInstance lat = derive_lattice(inst, lo);
                    rows[i].primary = estimate_instance(inst, lat, cfg);
                    rows[i].alternate = estimate_instance(inst, lat, other);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows) {
        pts.emplace_back(r.primary.reynolds, static_cast<double>(r.primary.logical_qubits) * r.primary.t_gate_total);
    }
    std::optional<PowerLawFit> fit;
    if (pts.size() >= 2) {
        fit = fit_power_law(pts);
    }

    Emitter em{g, out};
    json overrides = flags;
    overrides["encoding"] = g.encoding;
    overrides["tau"] = cfg.tau;
    const std::string name = g.format == "json" && !g.out_dir.empty() ? "sweep.json" : "sweep.csv";
    const RunManifest m = make_manifest("sweep", fmt::format("{}", fmt::join(ids, ",")), overrides, em, {name});

    auto ratio = [&](const Row& r) {
        const double b = cfg.encoding == Encoding::bespoke ? r.primary.f_encoding_t_gates : r.alternate.f_encoding_t_gates;
        const double u = cfg.encoding == Encoding::bespoke ? r.alternate.f_encoding_t_gates : r.primary.f_encoding_t_gates;
        return u / b;
    };

    if (g.format == "json") {
        json j;
        j["rows"] = json::array();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& e = rows[i].primary;
            j["rows"].push_back({{"instance", ids[i]},
                                 {"reynolds", e.reynolds},
                                 {"qubits", e.logical_qubits},
                                 {"t_gates", e.t_gate_total},
                                 {"product", static_cast<double>(e.logical_qubits) * e.t_gate_total},
                                 {"model_id", e.model_id},
                                 {"unstructured_over_bespoke_f_t_gates", ratio(rows[i])}});
        }
        if (fit) {
            j["fit"] = {{"slope", fit->slope}, {"intercept", fit->intercept}, {"residual", fit->residual}};
        }
        j["encoding"] = to_string(cfg.encoding);
        em.write(name, dump_with_hash(j, m));
        return exit_ok;
    }
    std::string csv = fmt::format("# manifest_sha256={}\nreynolds,qubits,t_gates,product,model_id\n", m.hash());
    for (const auto& r : rows) {
        const auto& e = r.primary;
        csv += fmt::format("{},{},{},{},{}\n", num(e.reynolds), e.logical_qubits, num(e.t_gate_total),
                           num(static_cast<double>(e.logical_qubits) * e.t_gate_total), e.model_id);
    }
    if (fit) {
        csv += fmt::format("# fit slope={} intercept={} residual={}\n", num(fit->slope), num(fit->intercept),
                           num(fit->residual));
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        csv += fmt::format("# ratio unstructured/bespoke F-encoding t_gates {} {}\n", ids[i], num(ratio(rows[i])));
    }
    em.write(name, csv);
    return exit_ok;
}

}  // namespace

json RunManifest::to_json() const {
    return json{{"command", command}, {"source", source}, {"overrides", overrides},
                {"outputs", outputs}, {"seed", seed},     {"version", version}};
}

std::string RunManifest::hash() const { return sha256_hex(to_json().dump()); }

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex += fmt::format("{:02x}", digest[i]);
    }
    return hex;
}

SimulationSetup parse_simulation_setup(const json& j) {
    check_keys(j, {"grid", "tau", "velocity", "epsilon_rho", "geometry", "steps", "dx", "dt", "density", "snapshot_steps"},
               "simulation config");
    SimulationSetup s;
    const auto dims = j.at("grid").get<std::vector<long long>>();
    if (dims.size() != 3) {
        throw ConfigError("'grid' must list three extents");
    }
    s.grid = GridSpec(dims[0], dims[1], dims[2]);
    s.config.tau = j.value("tau", 0.6);
    if (j.contains("velocity")) {
        s.config.initial_velocity = read_vec3(j, "velocity");
    }
    s.config.epsilon_rho = j.value("epsilon_rho", 1e-3);
    if (j.contains("geometry")) {
        s.geometry = read_geometry(j.at("geometry"));
    }
    s.options.steps = j.value("steps", 0LL);
    s.options.dx = j.value("dx", 1.0);
    s.options.dt = j.value("dt", 1.0);
    s.options.density = j.value("density", 1.0);
    if (j.contains("snapshot_steps")) {
        s.options.snapshot_steps = j.at("snapshot_steps").get<std::vector<long long>>();
    }
    validate_config(s.config);
    return s;
}

json estimate_to_json(const ResourceEstimate& est, const CostModelConfig& config) {
    json layers = json::array();
    for (const auto& l : est.layers) {
        layers.push_back({{"name", l.name}, {"calls", l.calls}, {"t_gates_each", l.t_gates_each}, {"leaf", l.leaf}});
    }
    const auto& b = est.bounds;
    return json{
        {"instance", est.instance_id},
        {"config",
         {{"model_id", est.model_id},
          {"encoding", to_string(est.encoding)},
          {"tau", config.tau},
          {"spectral_norm_A", est.spectral_norm_A},
          {"h", est.h},
          {"spectral_abscissa", config.spectral_abscissa},
          {"c_max", config.c_max},
          {"b_norm", config.b_norm},
          {"epsilon_rho", config.epsilon_rho},
          {"relative_error", config.relative_error},
          {"delta", config.delta},
          {"error_budget", config.error_budget},
          {"allocations", {{"F1", est.allocations[0]}, {"F2", est.allocations[1]}, {"F3", est.allocations[2]},
                           {"solver", est.allocations[3]}}},
          {"carleman_convention",
           config.carleman_convention == CarlemanConvention::padded ? "padded" : "tight"},
          {"bespoke_log_base", config.bespoke_log_base == LogBase::two ? "two" : "natural"}}},
        {"reynolds", est.reynolds},
        {"qubits", est.logical_qubits},
        {"t_gates", est.t_gate_total},
        {"layers", layers},
        {"history", {{"m", est.history.m}, {"k", est.history.k}, {"p", est.history.p},
                     {"block_rows", est.history.block_rows}, {"dimension", est.history.dimension}}},
        {"carleman", {{"qubits", est.carleman.qubits}, {"subnormalization", est.carleman.subnormalization},
                      {"ancillae", est.carleman.ancillae}}},
        {"qae", {{"eps_tilde", est.eps_tilde}, {"repetitions", est.qae_repetitions},
                 {"grover_iterates", est.grover_iterates}}},
        {"bounds",
         {{"f_lower", b.f_lower},
          {"f_upper", b.f_upper},
          {"phi_min", b.phi_min},
          {"phi_max", b.phi_max},
          {"v_upper", b.v_upper},
          {"C", b.C},
          {"t_tilde", b.t_tilde},
          {"grover_iterates", b.grover_iterates},
          {"grover_iterate_bound", b.grover_iterate_bound}}},
        {"drag", est.drag},
        {"f_encoding_t_gates", est.f_encoding_t_gates},
        {"carleman_t_gates", est.carleman_t_gates},
        {"diagnostics", est.diagnostics},
    };
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Carleman-linearized lattice Boltzmann simulation, matrix analysis and quantum resource estimation"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", tool_version);
    app.footer(
        "Exit codes: 0 success, 2 configuration error, 3 capacity refusal, 4 numerical failure.\n"
        "CLBM_THREADS sets the sweep thread count.\n"
        "Table reproduction rounds to one significant figure only where stated: the advective time of\n"
        "instances without a tabulated value can be rounded with the instances library option.");

    Globals g;
    app.add_option("--config", g.config_path, "JSON configuration file");
    app.add_option("--out", g.out_dir, "Output directory (stdout when omitted)");
    app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--tau", g.tau, "BGK relaxation time in (0.5, 1]");
    app.add_option("--encoding", g.encoding, "Block-encoding family")->check(CLI::IsMember({"bespoke", "unstructured"}));

    auto* sim = app.add_subcommand("simulate", "Run the D3Q27 simulator and write the drag series");
    std::optional<long long> steps;
    sim->add_option("--steps", steps, "Override the step count");

    auto* mat = app.add_subcommand("matrices", "Assemble S, F1, F2, F3 and report per-node censuses");
    std::vector<long long> grid_dims;
    std::string variant = "dense";
    long long cap = default_assembly_cap;
    mat->add_option("--grid", grid_dims, "Grid extents nx ny nz")->expected(3)->delimiter(',');
    mat->add_option("--variant", variant, "Tensor-column variant")->check(CLI::IsMember({"dense", "sparse"}));
    mat->add_option("--cap", cap, "Largest nQ assembled explicitly");

    auto* ana = app.add_subcommand("analyze", "Norm bounds and the Carleman convergence window");
    double phi0_inf = 0.2958;
    ana->add_option("--phi0-inf", phi0_inf, "Infinity norm of the initial populations");

    json model_flags = json::object();
    std::string instance_id;
    std::string instances;
    std::optional<double> c0, rel_err, delta, budget, eps_rho, drag;
    std::string carleman_conv, log_base;
    auto add_model_flags = [&](CLI::App* sub) {
        sub->add_option("--c0", c0, "Constant of the default solver call-count model");
        sub->add_option("--relative-error", rel_err, "Relative drag error");
        sub->add_option("--delta", delta, "Failure probability");
        sub->add_option("--error-budget", budget, "Total error budget split across encodings and solver");
        sub->add_option("--epsilon-rho", eps_rho, "Density deviation bound");
        sub->add_option("--drag", drag, "Drag estimate in lattice units (overrides the placeholder)");
        sub->add_option("--carleman", carleman_conv, "Carleman convention")
            ->check(CLI::IsMember({"padded", "tight"}));
        sub->add_option("--log-base", log_base, "Log base for bespoke F2/F3 costs")
            ->check(CLI::IsMember({"two", "natural"}));
    };
    auto* est = app.add_subcommand("estimate", "Resource estimate for one catalog instance");
    est->add_option("--instance", instance_id, "Catalog instance id")->required();
    add_model_flags(est);
    auto* swp = app.add_subcommand("sweep", "Resource estimates over catalog instances with a power-law fit");
    swp->add_option("--instances", instances, "Comma-separated ids (default: all spheres)");
    add_model_flags(swp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_config;
    }

    if (c0) model_flags["c0"] = *c0;
    if (rel_err) model_flags["relative_error"] = *rel_err;
    if (delta) model_flags["delta"] = *delta;
    if (budget) model_flags["error_budget"] = *budget;
    if (eps_rho) model_flags["epsilon_rho"] = *eps_rho;
    if (drag) model_flags["drag"] = *drag;
    if (!carleman_conv.empty()) model_flags["carleman"] = carleman_conv;
    if (!log_base.empty()) model_flags["log_base"] = log_base;

    try {
        if (*sim) return cmd_simulate(g, steps, out);
        if (*mat) return cmd_matrices(g, grid_dims, variant, cap, out);
        if (*ana) return cmd_analyze(g, phi0_inf, out);
        if (*est) return cmd_estimate(g, instance_id, model_flags, out);
        if (*swp) return cmd_sweep(g, instances, model_flags, out);
    } catch (const CapacityError& e) {
        err << "capacity refusal: " << e.what() << "\n";
        return exit_capacity;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const json::exception& e) {
        err << "configuration error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::invalid_argument& e) {
        err << "configuration error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::out_of_range& e) {
        err << "configuration error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    }
    return exit_config;
}

}  // namespace clbm
