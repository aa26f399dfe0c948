#pragma once

// Command-line runner: JSON configs, experiment dispatch, staged outputs and a
// manifest with SHA-256 content hashes.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "hypnet/hypnet.hpp"

namespace hypnet::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { Success = 0, ConfigFailure = 2, NumericalFailure = 3 };

// ---------------------------------------------------------------------------
// Catalog

struct ExperimentInfo {
    std::string name;
    std::string description;
    std::vector<std::string> required; ///< top-level config keys besides schema_version
};

/// Available experiments in alphabetical order.
inline const std::vector<ExperimentInfo>& catalog() {
    static const std::vector<ExperimentInfo> c = [] {
        std::vector<ExperimentInfo> v{
            {"associate", "epsilon sweep of a 1D wave jump problem against its connected solution",
             {"problem", "epsilon", "grid", "horizon"}},
            {"certify-symmetriser", "eigen-certification, projector algebra and R0 positivity for acoustics",
             {"problem", "samples"}},
            {"friedrichs-demo", "Friedrichs part of p(x,xi) = 2 + A cos x: positivity and self-adjointness",
             {"grid", "friedrichs"}},
            {"garding-probe", "Garding constant c1 of the acoustics symmetriser over an epsilon grid",
             {"problem", "epsilon", "grid"}},
            {"reduce-roundtrip", "wave form of acoustics solved directly and through the companion reduction",
             {"problem", "eps", "grid", "horizon"}},
            {"solve", "single mollified member solved with RK4, norms over time and the final state",
             {"problem", "eps", "grid", "horizon"}},
        };
        std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
        return v;
    }();
    return c;
}

inline const ExperimentInfo* find_experiment(const std::string& name) {
    for (const auto& e : catalog())
        if (e.name == name)
            return &e;
    return nullptr;
}

inline void list_experiments(std::ostream& out) {
    for (const auto& e : catalog()) {
        out << e.name << "\n  " << e.description << "\n  required keys: schema_version";
        for (const auto& k : e.required)
            out << ", " << k;
        out << "\n";
    }
}

// ---------------------------------------------------------------------------
// Configuration

struct CoefficientSpec {
    double left = 1.0;
    double right = 1.0;
    double at = 0.0;

    PiecewiseCoefficient build(int dim) const {
        if (left == right)
            return PiecewiseCoefficient::constant(dim, left);
        return PiecewiseCoefficient::step(dim, JumpVariable::Space, at, left, right);
    }
};

struct ProblemSpec {
    std::string kind; ///< acoustics | space-jump | time-jump
    // acoustics
    int n = 1;
    CoefficientSpec rho, c;
    Coord center{-1.0, 0.0};
    double width = 0.3;
    // wave jumps
    std::array<double, 2> a{1.0, 1.0};
    std::array<double, 2> b{1.0, 4.0};
    std::array<double, 2> pulse{-pi / 2, -pi / 4};
    double jump_time = 1.0;
    int mode = 2;

    int dim() const { return kind == "acoustics" ? n : 1; }
};

struct ExperimentConfig {
    std::string experiment;
    int schema_version = kSchemaVersion;
    std::uint64_t seed = 1;
    int jobs = 0; ///< 0 means the number of hardware threads
    fs::path output;
    int grid_points = 256;
    std::vector<double> eps_grid;
    std::optional<double> eps;
    MollifierRate rate = MollifierRate::logarithmic();
    double horizon = 1.0;
    double kappa = 0.5;
    int store_every = 1;
    ProblemSpec problem;
    int samples_nx = 64;
    int samples_max_frequency = 32;
    int probes = 64;
    int band = 128;
    double amplitude = 1.0;
    int friedrichs_probes = 100;

    int worker_count() const {
        if (jobs > 0)
            return jobs;
        return int(std::max(1u, std::thread::hardware_concurrency()));
    }
    TorusGrid grid() const { return TorusGrid(problem.dim(), grid_points); }
    MollifierFamily family() const { return MollifierFamily{rate, problem.dim()}; }
    EpsilonGrid epsilon_grid() const { return EpsilonGrid(eps_grid); }
    SolveOptions solve_options() const {
        SolveOptions o;
        o.kappa = kappa;
        o.store_every = store_every;
        return o;
    }
};

namespace detail {

/// Typed access to one JSON object with field paths for diagnostics.
class Node {
public:
    Node(const json& j, std::string path, std::vector<std::string> allowed) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
                throw ConfigError(field(it.key()), "unknown key");
    }

    bool has(const std::string& k) const { return j_.contains(k); }
    std::string field(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
    const json& raw(const std::string& k) const { return j_.at(k); }

    double number(const std::string& k, std::optional<double> def = {}) const {
        if (!has(k)) {
            if (def)
                return *def;
            throw ConfigError(field(k), "missing required key");
        }
        const json& v = j_.at(k);
        if (!v.is_number())
            throw ConfigError(field(k), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d))
            throw ConfigError(field(k), "must be finite");
        return d;
    }

    long integer(const std::string& k, std::optional<long> def = {}) const {
        if (!has(k)) {
            if (def)
                return *def;
            throw ConfigError(field(k), "missing required key");
        }
        const json& v = j_.at(k);
        if (!v.is_number_integer())
            throw ConfigError(field(k), "expected an integer");
        return v.get<long>();
    }

    std::string text(const std::string& k, std::optional<std::string> def = {}) const {
        if (!has(k)) {
            if (def)
                return *def;
            throw ConfigError(field(k), "missing required key");
        }
        const json& v = j_.at(k);
        if (!v.is_string())
            throw ConfigError(field(k), "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& k, std::size_t count = 0) const {
        const json& v = j_.at(k);
        if (!v.is_array())
            throw ConfigError(field(k), "expected an array of numbers");
        if (count && v.size() != count)
            throw ConfigError(field(k), "expected " + std::to_string(count) + " numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number())
                throw ConfigError(field(k) + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    Node child(const std::string& k, std::vector<std::string> allowed) const {
        return Node(j_.at(k), field(k), std::move(allowed));
    }

private:
    const json& j_;
    std::string path_;
};

inline void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok)
        throw ConfigError(field, what);
}

inline CoefficientSpec parse_coefficient(const Node& parent, const std::string& key) {
    CoefficientSpec c;
    if (!parent.has(key))
        return c;
    if (parent.raw(key).is_number()) {
        c.left = c.right = parent.number(key);
    } else {
        const Node n = parent.child(key, {"left", "right", "at"});
        c.left = n.number("left");
        c.right = n.number("right");
        c.at = n.number("at", 0.0);
        require(c.at > -pi && c.at < pi, n.field("at"), "jump position must lie in (-pi, pi)");
    }
    require(c.left > 0.0 && c.right > 0.0, parent.field(key), "coefficient values must be positive");
    return c;
}

inline ProblemSpec parse_problem(const Node& root) {
    const json& pj = root.raw("problem");
    if (!pj.is_object() || !pj.contains("kind"))
        throw ConfigError("problem.kind", "missing required key");
    const std::string kind = pj.at("kind").is_string() ? pj.at("kind").get<std::string>() : "";
    ProblemSpec p;
    p.kind = kind;
    if (kind == "acoustics") {
        const Node n = root.child("problem", {"kind", "n", "rho", "c", "pulse"});
        p.n = int(n.integer("n", 1));
        require(p.n == 1 || p.n == 2, n.field("n"), "must be 1 or 2");
        p.rho = parse_coefficient(n, "rho");
        p.c = parse_coefficient(n, "c");
        if (n.has("pulse")) {
            const Node pu = n.child("pulse", {"center", "width"});
            if (pu.has("center")) {
                const auto c = pu.numbers("center", std::size_t(p.n));
                p.center = {c[0], p.n == 2 ? c[1] : 0.0};
            }
            p.width = pu.number("width", 0.3);
            require(p.width > 0.0 && p.width < 1.0, pu.field("width"), "must lie in (0, 1)");
        }
    } else if (kind == "space-jump" || kind == "time-jump") {
        const bool space = kind == "space-jump";
        const Node n = space ? root.child("problem", {"kind", "a", "b", "pulse"})
                             : root.child("problem", {"kind", "a", "b", "jump_time", "mode"});
        for (const char* key : {"a", "b"}) {
            if (!n.has(key))
                continue;
            const auto v = n.numbers(key, 2);
            require(v[0] > 0.0 && v[1] > 0.0, n.field(key), "values must be positive");
            (std::string(key) == "a" ? p.a : p.b) = {v[0], v[1]};
        }
        if (space) {
            if (n.has("pulse")) {
                const auto v = n.numbers("pulse", 2);
                p.pulse = {v[0], v[1]};
            }
            require(p.pulse[0] > -pi && p.pulse[0] < p.pulse[1] && p.pulse[1] < 0.0, n.field("pulse"),
                    "need -pi < lo < hi < 0 (data left of the interface)");
        } else {
            p.jump_time = n.number("jump_time", 1.0);
            require(p.jump_time > 0.0, n.field("jump_time"), "must be positive");
            p.mode = int(n.integer("mode", 2));
            require(p.mode != 0, n.field("mode"), "must be nonzero");
        }
    } else {
        throw ConfigError("problem.kind", "unknown problem kind '" + kind + "' (acoustics, space-jump, time-jump)");
    }
    return p;
}

inline std::vector<double> parse_epsilon_grid(const Node& root) {
    const Node e = root.child("epsilon", {"values", "start", "ratio", "count"});
    if (e.has("values")) {
        const auto v = e.numbers("values");
        require(v.size() >= 4, e.field("values"), "need at least 4 values");
        for (std::size_t k = 0; k < v.size(); ++k) {
            require(v[k] > 0.0 && v[k] <= 1.0, e.field("values") + "[" + std::to_string(k) + "]",
                    "epsilon must lie in (0, 1]");
            require(k == 0 || v[k] < v[k - 1], e.field("values"), "values must be strictly decreasing");
        }
        return v;
    }
    const double start = e.number("start", 0.25);
    const double ratio = e.number("ratio", 0.5);
    const long count = e.integer("count", 12);
    require(start > 0.0 && start <= 1.0, e.field("start"), "epsilon must lie in (0, 1]");
    require(ratio > 0.0 && ratio < 1.0, e.field("ratio"), "must lie in (0, 1)");
    require(count >= 4 && count <= 64, e.field("count"), "must lie in [4, 64]");
    return make_geometric_grid(start, ratio, int(count)).values();
}

} // namespace detail

/// Parses and validates everything an experiment needs before any computation.
inline ExperimentConfig parse_config(const json& j, const std::string& experiment) {
    const ExperimentInfo* info = find_experiment(experiment);
    if (!info)
        throw ConfigError("experiment", "unknown experiment '" + experiment + "'");
    using detail::require;
    const detail::Node root(j, "", {"schema_version", "seed", "jobs", "output", "grid", "epsilon", "eps", "mollifier",
                                    "horizon", "solver", "problem", "samples", "garding", "friedrichs"});
    for (const auto& k : info->required)
        require(root.has(k), k, "missing required key for " + experiment);

    ExperimentConfig c;
    c.experiment = experiment;
    c.schema_version = int(root.integer("schema_version"));
    require(c.schema_version == kSchemaVersion, "schema_version",
            "unsupported version " + std::to_string(c.schema_version) + " (expected " +
                std::to_string(kSchemaVersion) + ")");
    const long seed = root.integer("seed", 1);
    require(seed >= 0, "seed", "must be nonnegative");
    c.seed = std::uint64_t(seed);
    c.jobs = int(root.integer("jobs", 0));
    require(c.jobs >= 0, "jobs", "must be nonnegative");
    c.output = root.text("output", "hypnet-out/" + experiment);

    if (root.has("problem"))
        c.problem = detail::parse_problem(root);
    else
        c.problem.kind = "none";

    const int default_points = experiment == "friedrichs-demo" ? 64 : 256;
    if (root.has("grid")) {
        const detail::Node g = root.child("grid", {"points"});
        c.grid_points = int(g.integer("points", default_points));
        require(c.grid_points >= 16 && c.grid_points <= 4096 && (c.grid_points & (c.grid_points - 1)) == 0,
                g.field("points"), "must be a power of two in [16, 4096]");
    } else {
        c.grid_points = default_points;
    }
    if (root.has("epsilon"))
        c.eps_grid = detail::parse_epsilon_grid(root);
    if (root.has("eps")) {
        c.eps = root.number("eps");
        require(*c.eps > 0.0 && *c.eps <= 1.0, "eps", "epsilon must lie in (0, 1]");
    }
    if (root.has("mollifier")) {
        const detail::Node m = root.child("mollifier", {"rate", "theta"});
        const std::string r = m.text("rate", "log");
        if (r == "log") {
            c.rate = MollifierRate::logarithmic();
        } else if (r == "power") {
            const double theta = m.number("theta", 1.0);
            require(theta > 0.0, m.field("theta"), "must be positive");
            c.rate = MollifierRate::power(theta);
        } else {
            throw ConfigError(m.field("rate"), "must be 'log' or 'power'");
        }
    }
    c.horizon = root.number("horizon", 1.0);
    require(c.horizon > 0.0, "horizon", "must be positive");
    if (root.has("solver")) {
        const detail::Node s = root.child("solver", {"kappa", "store_every"});
        c.kappa = s.number("kappa", 0.5);
        require(c.kappa > 0.0 && c.kappa <= 2.0, s.field("kappa"), "must lie in (0, 2]");
        c.store_every = int(s.integer("store_every", 1));
        require(c.store_every >= 1, s.field("store_every"), "must be >= 1");
    }
    if (root.has("samples")) {
        const detail::Node s = root.child("samples", {"nx", "max_frequency"});
        c.samples_nx = int(s.integer("nx", 64));
        c.samples_max_frequency = int(s.integer("max_frequency", 32));
        require(c.samples_nx >= 1 && c.samples_nx <= 1024, s.field("nx"), "must lie in [1, 1024]");
        require(c.samples_max_frequency >= 1 && c.samples_max_frequency <= 4096, s.field("max_frequency"),
                "must lie in [1, 4096]");
    }
    if (root.has("garding")) {
        const detail::Node s = root.child("garding", {"probes", "band"});
        c.probes = int(s.integer("probes", 64));
        c.band = int(s.integer("band", 128));
        require(c.probes >= 16, s.field("probes"), "must be >= 16");
        require(c.band >= 1, s.field("band"), "must be >= 1");
    }
    if (root.has("friedrichs")) {
        const detail::Node s = root.child("friedrichs", {"amplitude", "probes"});
        c.amplitude = s.number("amplitude", 1.0);
        c.friedrichs_probes = int(s.integer("probes", 100));
        require(c.friedrichs_probes >= 1, s.field("probes"), "must be >= 1");
    }

    // Experiment-specific consistency.
    const std::string& kind = c.problem.kind;
    if (experiment == "associate")
        require(kind == "space-jump" || kind == "time-jump", "problem.kind", "associate needs space-jump or time-jump");
    if (experiment == "certify-symmetriser" || experiment == "garding-probe" || experiment == "reduce-roundtrip")
        require(kind == "acoustics", "problem.kind", experiment + " needs an acoustics problem");
    if (kind == "time-jump")
        require(std::abs(c.problem.mode) < c.grid_points / 2, "problem.mode", "must be below the Nyquist frequency");
    if (kind == "space-jump" && (experiment == "associate" || experiment == "solve")) {
        const auto d = right_moving_pulse(c.problem.a[0], c.problem.b[0], c.problem.a[1], c.problem.b[1],
                                          Pulse{c.problem.pulse[0], c.problem.pulse[1]});
        try {
            SpaceJumpOracle(d).check_horizon(c.horizon);
        } catch (const HorizonError& e) {
            throw ConfigError("horizon", e.what());
        }
    }
    if (experiment == "garding-probe" && c.problem.n == 2)
        require(c.grid_points <= 64, "grid.points", "2D Garding probes are limited to 64 points per axis");
    if (experiment == "friedrichs-demo")
        require(c.grid_points <= 256, "grid.points", "the Friedrichs table is limited to 256 points");
    if (c.eps)
        c.rate(*c.eps);
    return c;
}

/// Line and column of a byte offset, for parse diagnostics.
inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline json read_config_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("config", "cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    const std::string text = s.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col), e.what());
    }
}

// ---------------------------------------------------------------------------
// Hashing and staged output

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256: digest failed");
    std::ostringstream o;
    for (unsigned int i = 0; i < len; ++i)
        o << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return o.str();
}

inline std::string sha256_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw Error("sha256: cannot read " + p.string());
    std::ostringstream s;
    s << in.rdbuf();
    return sha256_hex(s.str());
}

/// Stages write into a private directory; files move into the output
/// directory only when the stage succeeds, and the manifest is rewritten
/// after every completed stage.
class StagedOutput {
public:
    StagedOutput(fs::path dir, ordered_json header) : dir_(std::move(dir)), header_(std::move(header)) {
        fs::create_directories(dir_);
        clear_previous();
        write_manifest("running");
    }

    const fs::path& directory() const noexcept { return dir_; }
    const std::string& current_stage() const noexcept { return current_; }

    void stage(const std::string& name, const std::function<void(const fs::path&)>& body) {
        current_ = name;
        const fs::path tmp = dir_ / (".stage-" + name);
        fs::remove_all(tmp);
        fs::create_directories(tmp);
        try {
            body(tmp);
        } catch (...) {
            fs::remove_all(tmp);
            failed_ = name;
            write_manifest("failed");
            throw;
        }
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(tmp))
            if (e.is_regular_file())
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
        ordered_json entry;
        entry["name"] = name;
        entry["files"] = ordered_json::array();
        for (const auto& f : files) {
            const fs::path target = dir_ / f.filename();
            fs::rename(f, target);
            entry["files"].push_back({{"path", f.filename().string()}, {"sha256", sha256_file(target)}});
        }
        fs::remove_all(tmp);
        stages_.push_back(std::move(entry));
        write_manifest("running");
        current_.clear();
    }

    void finish() { write_manifest("complete"); }

    void fail(const std::string& message) {
        error_ = message;
        write_manifest("failed");
    }

private:
    void clear_previous() {
        const fs::path m = dir_ / "manifest.json";
        if (fs::exists(m)) {
            try {
                std::ifstream in(m);
                const json old = json::parse(in);
                for (const auto& s : old.at("stages"))
                    for (const auto& f : s.at("files"))
                        fs::remove(dir_ / f.at("path").get<std::string>());
            } catch (const std::exception&) {
                // An unreadable manifest is simply replaced.
            }
            fs::remove(m);
        }
        for (const auto& e : fs::directory_iterator(dir_))
            if (e.is_directory() && e.path().filename().string().rfind(".stage-", 0) == 0)
                fs::remove_all(e.path());
    }

    void write_manifest(const std::string& status) {
        ordered_json m = header_;
        m["status"] = status;
        if (!failed_.empty())
            m["failed_stage"] = failed_;
        if (!error_.empty())
            m["error"] = error_;
        m["stages"] = stages_;
        const fs::path tmp = dir_ / ".manifest.json.tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out)
                throw Error("cannot write manifest in " + dir_.string());
            out << m.dump(2) << '\n';
        }
        fs::rename(tmp, dir_ / "manifest.json");
    }

    fs::path dir_;
    ordered_json header_;
    ordered_json stages_ = ordered_json::array();
    std::string current_;
    std::string failed_;
    std::string error_;
};

// ---------------------------------------------------------------------------
// Parallel map with fixed result ordering

/// fn(i) for i = 0..n-1 on up to `jobs` threads; results are in index order
/// and the exception of the smallest failing index is rethrown.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, int jobs, F fn) {
    std::vector<std::optional<T>> out(n);
    std::vector<std::exception_ptr> err(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next++;
            if (i >= n)
                return;
            try {
                out[i].emplace(fn(i));
            } catch (...) {
                err[i] = std::current_exception();
            }
        }
    };
    const int w = std::max(1, std::min(jobs, int(n)));
    std::vector<std::thread> threads;
    for (int k = 1; k < w; ++k)
        threads.emplace_back(worker);
    worker();
    for (auto& t : threads)
        t.join();
    std::vector<T> res;
    for (std::size_t i = 0; i < n; ++i) {
        if (err[i])
            std::rethrow_exception(err[i]);
        res.push_back(std::move(*out[i]));
    }
    return res;
}

// ---------------------------------------------------------------------------
// Experiments

namespace detail {

inline void write_file(const fs::path& dir, const std::string& name, const std::function<void(std::ostream&)>& fn) {
    auto out = csv::open_out((dir / name).string());
    fn(out);
    if (!out)
        throw Error("write failed for " + name);
}

inline AcousticsProblem acoustics_problem(const ExperimentConfig& c) {
    const ProblemSpec& p = c.problem;
    AcousticsProblem pr;
    pr.n = p.n;
    pr.rho0 = p.rho.build(p.n);
    pr.c0 = p.c.build(p.n);
    const Coord x0 = p.center;
    const double w = p.width;
    const int n = p.n;
    pr.p0 = [x0, w, n](const Coord& x) {
        double d2 = 0.0;
        for (int a = 0; a < n; ++a) {
            const double d = std::remainder(x[std::size_t(a)] - x0[std::size_t(a)], 2.0 * pi);
            d2 += d * d;
        }
        return std::exp(-d2 / (w * w));
    };
    pr.v0 = {[](const Coord&) { return 0.0; }, [](const Coord&) { return 0.0; }};
    pr.T = c.horizon;
    return pr;
}

inline AcousticsCoefficients acoustics_coefficients_for(const ExperimentConfig& c, const AcousticsProblem& pr,
                                                        const TorusGrid& g, std::optional<double> eps) {
    if (!eps)
        return acoustics_coefficients(pr, g);
    return acoustics_coefficients(pr, g, std::make_pair(c.family(), *eps));
}

inline SpaceJumpData space_jump_data(const ProblemSpec& p) {
    return right_moving_pulse(p.a[0], p.b[0], p.a[1], p.b[1], Pulse{p.pulse[0], p.pulse[1]});
}

inline TimeJumpData time_jump_data(const ProblemSpec& p) {
    TimeJumpData d;
    d.a_minus = p.a[0];
    d.a_plus = p.a[1];
    d.b_minus = p.b[0];
    d.b_plus = p.b[1];
    d.jump_time = p.jump_time;
    return d;
}

/// Forward single-mode data w0 = e^{ikx}, w1 = -i c_- |k| w0.
inline std::pair<SpectralField, SpectralField> time_jump_initial(const ProblemSpec& p, const TorusGrid& g) {
    const auto d = time_jump_data(p);
    const auto w0 = SpectralField::mode(g, {double(p.mode), 0.0}, CVector::Constant(1, 1.0));
    const auto w1 = w0 * cplx(0.0, -d.c_minus() * std::abs(p.mode));
    return {w0, w1};
}

inline WaveMember wave_member(const ExperimentConfig& c, double eps) {
    const TorusGrid g = c.grid();
    if (c.problem.kind == "space-jump")
        return space_jump_member(space_jump_data(c.problem), g, c.family(), eps, c.horizon);
    const auto [w0, w1] = time_jump_initial(c.problem, g);
    return time_jump_member(time_jump_data(c.problem), w0, w1, c.family(), eps, c.horizon);
}

inline void summary_header(std::ostream& o, const ExperimentConfig& c) {
    o << "experiment " << c.experiment << "\n";
    o << "problem " << c.problem.kind << "\n";
    o << "grid points per axis " << c.grid_points << "\n";
    o << "mollifier rate omega = " << c.rate.describe() << "\n";
}

inline void run_certify(const ExperimentConfig& c, StagedOutput& out) {
    const AcousticsProblem pr = acoustics_problem(c);
    const TorusGrid g = c.grid();
    const SymbolMatrix K = acoustics_symbol(pr.n, acoustics_coefficients_for(c, pr, g, c.eps));
    const auto samples = grid_sample_set(pr.n, c.samples_nx, c.samples_max_frequency);
    out.stage("certify", [&](const fs::path& dir) {
        const EigenSystem es = eigen_decompose(K, 0.0, samples);
        const ProjectorSet ps = projectors_product_formula(K, es);
        const SymbolMatrix R0 = build_R(ps);
        const ProjectorResiduals res = check_projector_algebra(ps, es);
        const MinEigenvalue me = min_eigenvalue(R0, 0.0, samples);
        const double cancel = cancellation_check(R0, K, 0.0, samples);
        write_file(dir, "certification.csv", [&](std::ostream& o) { write_certification_csv(o, es, R0, K); });
        write_file(dir, "summary.txt", [&](std::ostream& o) {
            const int m = K.size();
            summary_header(o, c);
            o << "eps " << (c.eps ? csv::num(*c.eps) : std::string("exact")) << "\n";
            o << "samples " << samples.size() << "\n";
            o << "min relative gap " << csv::num(es.gap) << "\n";
            o << "min eigenvalue R0 " << csv::num(me.value) << " (bound 1/m^2 = " << csv::num(1.0 / (m * m))
              << ")\n";
            o << "max |R0 K1 + (R0 K1)^*| " << csv::num(cancel) << "\n";
            o << "projector partition " << csv::num(res.partition) << "\n";
            o << "projector orthogonality " << csv::num(res.orthogonality) << "\n";
            o << "projector reconstruction " << csv::num(res.reconstruction) << "\n";
        });
    });
}

inline void run_garding(const ExperimentConfig& c, StagedOutput& out) {
    const AcousticsProblem pr = acoustics_problem(c);
    const TorusGrid g = c.grid();
    const EpsilonGrid eg = c.epsilon_grid();
    std::vector<GardingReport> reports;
    out.stage("probe", [&](const fs::path& dir) {
        reports = parallel_map<GardingReport>(eg.size(), c.worker_count(), [&](std::size_t i) {
            const SymbolMatrix K = acoustics_symbol(pr.n, acoustics_coefficients_for(c, pr, g, eg[i]));
            BuildOptions bo;
            bo.trials = c.probes;
            bo.seed = c.seed;
            bo.garding.band = c.band;
            const SymmetriserPair pair = build_S(ProjectorSet(K), g, bo);
            return garding_probe(pair, g, c.probes, c.seed, bo.garding);
        });
        write_file(dir, "constants.csv", [&](std::ostream& o) {
            o << "eps,omega,c,c1,min_margin,trials\n";
            for (std::size_t i = 0; i < eg.size(); ++i)
                o << csv::num(eg[i]) << ',' << csv::num(c.rate(eg[i])) << ',' << csv::num(reports[i].c) << ','
                  << csv::num(reports[i].c1) << ',' << csv::num(reports[i].min_margin) << ',' << reports[i].trials
                  << '\n';
        });
        write_file(dir, "margins.csv", [&](std::ostream& o) {
            o << "eps,trial,margin\n";
            for (std::size_t i = 0; i < eg.size(); ++i)
                for (std::size_t k = 0; k < reports[i].margins.size(); ++k)
                    o << csv::num(eg[i]) << ',' << k << ',' << csv::num(reports[i].margins[k]) << '\n';
        });
    });
    out.stage("classify", [&](const fs::path& dir) {
        const AsymptoticClass cls = scale_classify_constants(reports, eg);
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& r : reports)
            worst = std::min(worst, r.min_margin);
        write_file(dir, "summary.txt", [&](std::ostream& o) {
            summary_header(o, c);
            o << "epsilon values " << eg.size() << "\n";
            o << "probes per epsilon " << c.probes << "\n";
            o << "min margin over all probes " << csv::num(worst) << "\n";
            o << "c1 net " << cls.describe() << "\n";
        });
    });
}

inline void run_solve(const ExperimentConfig& c, StagedOutput& out) {
    const TorusGrid g = c.grid();
    const double eps = *c.eps;
    out.stage("solve", [&](const fs::path& dir) {
        CauchyProblem problem;
        std::function<double(const SpectralField&)> energy;
        std::string energy_name;
        std::optional<WaveMember> member;
        if (c.problem.kind == "acoustics") {
            const AcousticsProblem pr = acoustics_problem(c);
            const auto co = acoustics_coefficients_for(c, pr, g, eps);
            problem = CauchyProblem{acoustics_symbol(pr.n, co), {}, acoustics_state(pr, g), c.horizon, eps};
            energy = [co](const SpectralField& u) { return weighted_norm(u, co.rho, co.c); };
            energy_name = "weighted_norm";
        } else {
            member = wave_member(c, eps);
            problem = member->problem;
            const auto a = member->a, b = member->b;
            energy = [a, b](const SpectralField& u) { return wave_energy(u, a, b); };
            energy_name = "energy";
        }
        const Trajectory tr = solve(problem, c.solve_options());
        write_file(dir, "norms.csv", [&](std::ostream& o) {
            o << "t,L2," << energy_name << "\n";
            for (std::size_t k = 0; k < tr.states.size(); ++k)
                o << csv::num(tr.times[k]) << ',' << csv::num(l2_norm(tr.states[k])) << ','
                  << csv::num(energy(tr.states[k])) << '\n';
        });
        write_file(dir, "final.csv", [&](std::ostream& o) { write_snapshot_csv(o, tr, tr.states.size() - 1); });
        write_file(dir, "summary.txt", [&](std::ostream& o) {
            summary_header(o, c);
            o << "eps " << csv::num(eps) << " omega " << csv::num(c.rate(eps)) << "\n";
            o << "steps " << tr.steps << " dt " << csv::num(tr.step_size) << "\n";
            o << energy_name << " initial " << csv::num(energy(tr.states.front())) << " final "
              << csv::num(energy(tr.final_state())) << "\n";
            if (c.problem.kind == "space-jump") {
                try {
                    const auto j = transmission_diagnostics(tr.final_state(), member->omega);
                    o << "interface jump w " << csv::num(j.jump_w) << " flux " << csv::num(j.jump_flux) << "\n";
                } catch (const ResolutionError& e) {
                    o << "interface diagnostics unavailable: " << e.what() << "\n";
                }
            }
        });
    });
}

inline void run_associate(const ExperimentConfig& c, StagedOutput& out) {
    const TorusGrid g = c.grid();
    const EpsilonGrid eg = c.epsilon_grid();
    const std::vector<double> times{c.horizon / 2, c.horizon};
    const SolveOptions opt = c.solve_options();

    struct Solved {
        std::vector<SpectralField> states; ///< full states at `times`
        double omega = 0.0;
        std::exception_ptr error;
    };
    std::vector<Solved> solved;
    ConvergenceReport report;
    out.stage("sweep", [&](const fs::path& dir) {
        solved = parallel_map<Solved>(eg.size(), c.worker_count(), [&](std::size_t i) {
            Solved s;
            try {
                const WaveMember m = wave_member(c, eg[i]);
                s.omega = m.omega;
                const auto tr = solve(m.problem, opt);
                for (double t : times) {
                    std::size_t best = 0;
                    for (std::size_t k = 0; k < tr.times.size(); ++k)
                        if (std::abs(tr.times[k] - t) < std::abs(tr.times[best] - t))
                            best = k;
                    s.states.push_back(tr.states[best]);
                }
            } catch (const Error&) {
                s.error = std::current_exception();
            }
            return s;
        });

        StudySpec spec;
        spec.id = c.problem.kind == "space-jump" ? "space_jump" : "time_jump";
        spec.grid = g;
        spec.rate = c.rate;
        spec.T = c.horizon;
        spec.times = times;
        spec.member = [&](double eps) {
            StudyMember m;
            m.problem.eps = eps;
            return m;
        };
        if (c.problem.kind == "space-jump") {
            const auto d = space_jump_data(c.problem);
            spec.oracle = [d, g](double t) { return connected_solution_space(d, g, t).w; };
        } else {
            const auto d = time_jump_data(c.problem);
            const auto [w0, w1] = time_jump_initial(c.problem, g);
            spec.oracle = [d, w0 = w0, w1 = w1](double t) { return connected_solution_time(d, w0, w1, t).w; };
        }
        spec.solver = [&](const StudyMember& m, const std::vector<double>&) {
            for (std::size_t i = 0; i < eg.size(); ++i)
                if (eg[i] == m.problem.eps) {
                    if (solved[i].error)
                        std::rethrow_exception(solved[i].error);
                    std::vector<SpectralField> comp;
                    for (const auto& s : solved[i].states)
                        comp.push_back(s.component(0));
                    return comp;
                }
            throw ArgumentError("associate: no solution for eps " + csv::num(m.problem.eps));
        };
        report = association_study(spec, eg);
        emit_report(report, dir);
    });
    if (c.problem.kind == "space-jump") {
        out.stage("interface", [&](const fs::path& dir) {
            write_file(dir, report_basename(report) + "_interface.csv", [&](std::ostream& o) {
                o << "eps,omega,jump_w,jump_flux,status\n";
                for (std::size_t i = 0; i < eg.size(); ++i) {
                    o << csv::num(eg[i]) << ',' << csv::num(c.rate(eg[i])) << ',';
                    if (solved[i].error) {
                        o << "nan,nan,failed\n";
                        continue;
                    }
                    try {
                        const auto j = transmission_diagnostics(solved[i].states.back(), solved[i].omega);
                        o << csv::num(j.jump_w) << ',' << csv::num(j.jump_flux) << ",ok\n";
                    } catch (const ResolutionError&) {
                        o << "nan,nan,unresolved\n";
                    }
                }
            });
        });
    }
}

inline void run_roundtrip(const ExperimentConfig& c, StagedOutput& out) {
    const AcousticsProblem pr = acoustics_problem(c);
    const TorusGrid g = c.grid();
    const auto co = acoustics_coefficients_for(c, pr, g, c.eps);
    const WaveForm wf = wave_form(pr, co, g);
    out.stage("reduce", [&](const fs::path& dir) {
        const CompanionSystem cs = reduce(wf.op);
        write_file(dir, "companion.txt", [&](std::ostream& o) { o << cs.describe(); });
        const auto samples = grid_sample_set(pr.n, 16, 4);
        const EigenSystem es = characteristic_roots(cs, 0.0, samples);
        write_file(dir, "roots.csv", [&](std::ostream& o) {
            o << "x1,x2,xi1,xi2,j,companion,polynomial\n";
            for (const auto& r : es.records) {
                const auto poly = polynomial_roots(wf.op, 0.0, r.point.x, r.point.xi);
                for (std::size_t j = 0; j < r.lambdas.size(); ++j)
                    o << csv::num(r.point.x[0]) << ',' << csv::num(r.point.x[1]) << ',' << csv::num(r.point.xi[0])
                      << ',' << csv::num(r.point.xi[1]) << ',' << j << ',' << csv::num(r.lambdas[j]) << ','
                      << csv::num(poly[j].real()) << '\n';
            }
        });
    });
    out.stage("roundtrip", [&](const fs::path& dir) {
        const RoundtripResult r = roundtrip_solve_check(wf.op, wf.data, c.horizon);
        write_file(dir, "summary.txt", [&](std::ostream& o) {
            summary_header(o, c);
            o << "eps " << csv::num(*c.eps) << "\n";
            o << "steps " << r.steps << " dt " << csv::num(r.step_size) << "\n";
            o << "max L2 discrepancy reduced vs direct " << csv::num(r.discrepancy) << "\n";
        });
    });
}

inline void run_friedrichs(const ExperimentConfig& c, StagedOutput& out) {
    const TorusGrid g(1, c.grid_points);
    const double amp = c.amplitude;
    const SymbolMatrix p(
        1, 0.0, 1,
        [amp](double, const Coord& x, const Coord&) {
            CMatrix v(1, 1);
            v(0, 0) = 2.0 + amp * std::cos(x[0]);
            return v;
        },
        true);
    out.stage("friedrichs", [&](const fs::path& dir) {
        const FriedrichsAmplitude fa = friedrichs_part_1d(p, g);
        const CMatrix& M = fa.matrix();
        const double defect = (M - M.adjoint()).cwiseAbs().maxCoeff();
        std::mt19937_64 rng(c.seed);
        std::vector<double> ratios;
        for (int k = 0; k < c.friedrichs_probes; ++k) {
            const auto u = random_field(g, 1, 0.5 * (k % 4), rng);
            ratios.push_back(inner(friedrichs_apply(fa, u), u).real() / inner(u, u).real());
        }
        write_file(dir, "probes.csv", [&](std::ostream& o) {
            o << "probe,form_over_norm2\n";
            for (std::size_t k = 0; k < ratios.size(); ++k)
                o << k << ',' << csv::num(ratios[k]) << '\n';
        });
        write_file(dir, "summary.txt", [&](std::ostream& o) {
            o << "experiment friedrichs-demo\n";
            o << "symbol p(x,xi) = 2 + " << csv::num(amp) << " cos x\n";
            o << "grid points " << c.grid_points << "\n";
            o << "min Re(p_F u, u) / |u|^2 " << csv::num(*std::min_element(ratios.begin(), ratios.end())) << "\n";
            o << "self-adjointness defect " << csv::num(defect) << "\n";
        });
    });
}

} // namespace detail

struct RunOptions {
    std::string experiment;
    fs::path config;
    std::optional<fs::path> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
};

/// Loads, validates and runs one experiment. Returns the exit status.
inline int run(const RunOptions& ro, std::ostream& log, std::ostream& err) {
    ExperimentConfig cfg;
    std::string config_hash;
    try {
        const json j = read_config_file(ro.config);
        cfg = parse_config(j, ro.experiment);
        if (ro.out)
            cfg.output = *ro.out;
        if (ro.seed)
            cfg.seed = *ro.seed;
        if (ro.jobs) {
            if (*ro.jobs < 0)
                throw ConfigError("--jobs", "must be nonnegative");
            cfg.jobs = *ro.jobs;
        }
        config_hash = sha256_hex(j.dump());
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return ConfigFailure;
    } catch (const Error& e) {
        err << "config error: " << e.what() << "\n";
        return ConfigFailure;
    }

    ordered_json header;
    header["schema_version"] = kSchemaVersion;
    header["experiment"] = cfg.experiment;
    header["config_sha256"] = config_hash;
    header["seed"] = cfg.seed;
    std::optional<StagedOutput> out;
    try {
        out.emplace(cfg.output, header);
        if (cfg.experiment == "associate")
            detail::run_associate(cfg, *out);
        else if (cfg.experiment == "certify-symmetriser")
            detail::run_certify(cfg, *out);
        else if (cfg.experiment == "friedrichs-demo")
            detail::run_friedrichs(cfg, *out);
        else if (cfg.experiment == "garding-probe")
            detail::run_garding(cfg, *out);
        else if (cfg.experiment == "reduce-roundtrip")
            detail::run_roundtrip(cfg, *out);
        else
            detail::run_solve(cfg, *out);
        out->finish();
    } catch (const std::exception& e) {
        const std::string stage = out && !out->current_stage().empty() ? out->current_stage() : "setup";
        err << "stage '" << stage << "' failed: " << e.what() << "\n";
        if (out) {
            try {
                out->fail(e.what());
            } catch (const std::exception&) {
            }
        }
        return NumericalFailure;
    }
    log << "wrote " << (cfg.output / "manifest.json").string() << "\n";
    return Success;
}

/// Entry point for `hypnet <experiment> --config <path> [--out <dir>] [--seed <n>] [--jobs <k>]`
/// and `hypnet list`.
inline int main(int argc, char** argv, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"hypnet: experiments for hyperbolic systems with regularised discontinuous coefficients"};
    std::string experiment, config, outdir;
    std::uint64_t seed = 0;
    int jobs = 0;
    app.add_option("experiment", experiment, "experiment kind, or 'list'")->required();
    auto* config_opt = app.add_option("--config", config, "JSON configuration file");
    auto* out_opt = app.add_option("--out", outdir, "output directory (overrides the config)");
    auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides the config)");
    auto* jobs_opt = app.add_option("--jobs", jobs, "worker threads, 0 for all available");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, log, err);
        return code == 0 ? Success : ConfigFailure;
    }
    if (experiment == "list") {
        list_experiments(log);
        return Success;
    }
    if (!find_experiment(experiment)) {
        err << "config error: experiment: unknown experiment '" << experiment << "' (see 'hypnet list')\n";
        return ConfigFailure;
    }
    if (config_opt->count() == 0) {
        err << "config error: --config: required for " << experiment << "\n";
        return ConfigFailure;
    }
    RunOptions ro;
    ro.experiment = experiment;
    ro.config = config;
    if (out_opt->count())
        ro.out = outdir;
    if (seed_opt->count())
        ro.seed = seed;
    if (jobs_opt->count())
        ro.jobs = jobs;
    return run(ro, log, err);
}

} // namespace hypnet::cli
