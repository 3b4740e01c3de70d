#include "bvwave/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bvwave {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

scalar_t to_real(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const scalar_t x = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw std::invalid_argument("config: " + key + " expects a number, got '" + value + "'");
    }
}

int to_int(const std::string& key, const std::string& value) {
    const scalar_t x = to_real(key, value);
    const int i = static_cast<int>(x);
    if (x != static_cast<scalar_t>(i))
        throw std::invalid_argument("config: " + key + " expects an integer");
    return i;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

std::map<std::string, std::string> load_file(const std::string& path) {
    std::map<std::string, std::string> kv;
    if (path.empty()) return kv;
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: malformed line " + std::to_string(lineno) +
                                        " in " + path);
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

}  // namespace

Grid RunConfig::make_grid_checked() const {
    return make_grid(dim, lo, hi, nx, T, nt);
}

RunConfig parse_config_map(ProblemKind kind, std::map<std::string, std::string> kv) {
    RunConfig cfg;
    cfg.problem = kind;

    // Per-problem defaults.
    switch (kind) {
        case ProblemKind::dirac:
            cfg.dim = 2;
            cfg.T = 2.0;
            cfg.path = RegularizationParams{};  // gamma0 = 1, nu = 0.1, kappa = gamma^4
            break;
        case ProblemKind::cantor:
            cfg.dim = 2;
            cfg.T = 5.0;
            cfg.lo = {-2.0, -2.0, -2.0};
            cfg.hi = {2.0, 2.0, 2.0};
            cfg.path.nu = 0.5;
            cfg.path.tol_gamma = 3.8e-6;
            cfg.path.tol_newton = 0.5e-4;
            cfg.path.c_kappa = 0.0;
            break;
        case ProblemKind::custom:
            break;
    }

    auto take = [&](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) return std::pair<bool, std::string>{false, ""};
        std::string v = it->second;
        kv.erase(it);
        return std::pair<bool, std::string>{true, std::move(v)};
    };

    if (auto [ok, v] = take("grid.dim"); ok) cfg.dim = to_int("grid.dim", v);
    if (auto [ok, v] = take("grid.T"); ok) cfg.T = to_real("grid.T", v);
    if (auto [ok, v] = take("grid.lo"); ok) {
        const auto parts = split(v, ',');
        for (std::size_t k = 0; k < parts.size() && k < 3; ++k)
            cfg.lo[k] = to_real("grid.lo", parts[k]);
        if (parts.size() == 1)
            for (int k = 1; k < 3; ++k) cfg.lo[k] = cfg.lo[0];
    }
    if (auto [ok, v] = take("grid.hi"); ok) {
        const auto parts = split(v, ',');
        for (std::size_t k = 0; k < parts.size() && k < 3; ++k)
            cfg.hi[k] = to_real("grid.hi", parts[k]);
        if (parts.size() == 1)
            for (int k = 1; k < 3; ++k) cfg.hi[k] = cfg.hi[0];
    }
    if (auto [ok, v] = take("grid.nx"); ok) {
        const auto parts = split(v, ',');
        for (std::size_t k = 0; k < parts.size() && k < 3; ++k)
            cfg.nx[k] = to_int("grid.nx", parts[k]);
        if (parts.size() == 1)
            for (int k = 1; k < 3; ++k) cfg.nx[k] = cfg.nx[0];
    }
    if (auto [ok, v] = take("grid.nt"); ok) cfg.nt = to_int("grid.nt", v);

    if (auto [ok, v] = take("dirac.l"); ok) cfg.l = to_int("dirac.l", v);
    if (auto [ok, v] = take("dirac.alpha"); ok) cfg.alpha = to_real("dirac.alpha", v);

    if (auto [ok, v] = take("path.gamma0"); ok) cfg.path.gamma0 = to_real("path.gamma0", v);
    if (auto [ok, v] = take("path.nu"); ok) cfg.path.nu = to_real("path.nu", v);
    if (auto [ok, v] = take("path.tol_gamma"); ok) cfg.path.tol_gamma = to_real("path.tol_gamma", v);
    if (auto [ok, v] = take("path.tol_newton"); ok)
        cfg.path.tol_newton = to_real("path.tol_newton", v);
    if (auto [ok, v] = take("path.c_kappa"); ok) cfg.path.c_kappa = to_real("path.c_kappa", v);
    if (auto [ok, v] = take("path.kappa_exp"); ok) cfg.path.kappa_exp = to_real("path.kappa_exp", v);
    if (auto [ok, v] = take("path.max_newton"); ok)
        cfg.path.max_newton_iters = to_int("path.max_newton", v);
    if (auto [ok, v] = take("path.krylov_tol"); ok) cfg.path.krylov_tol = to_real("path.krylov_tol", v);
    if (auto [ok, v] = take("path.krylov_maxit"); ok)
        cfg.path.krylov_max_iters = to_int("path.krylov_maxit", v);
    if (auto [ok, v] = take("path.krylov_restart"); ok)
        cfg.path.krylov_restart = to_int("path.krylov_restart", v);

    if (auto [ok, v] = take("out.dir"); ok) cfg.out_dir = v;
    if (auto [ok, v] = take("seed"); ok) cfg.seed = static_cast<unsigned long>(to_int("seed", v));

    if (kind == ProblemKind::custom) {
        int m = 1;
        if (auto [ok, v] = take("custom.m"); ok) m = to_int("custom.m", v);
        if (m < 1) throw std::invalid_argument("config: custom.m must be at least 1");
        cfg.components.resize(m);
        cfg.custom_alpha = vector_t::Constant(m, 1.0);
        if (auto [ok, v] = take("custom.alpha"); ok) {
            const auto parts = split(v, ',');
            if (static_cast<int>(parts.size()) != m && parts.size() != 1)
                throw std::invalid_argument("config: custom.alpha needs 1 or m values");
            for (int j = 0; j < m; ++j)
                cfg.custom_alpha(j) = to_real("custom.alpha", parts[parts.size() == 1 ? 0 : j]);
        }
        for (int j = 0; j < m; ++j) {
            const std::string base = "custom.comp" + std::to_string(j) + ".";
            auto& comp = cfg.components[j];
            if (auto [ok, v] = take(base + "g_lo"); ok) {
                const auto parts = split(v, ',');
                for (std::size_t k = 0; k < parts.size() && k < 3; ++k)
                    comp.g_lo[k] = to_real(base + "g_lo", parts[k]);
            }
            if (auto [ok, v] = take(base + "g_hi"); ok) {
                const auto parts = split(v, ',');
                for (std::size_t k = 0; k < parts.size() && k < 3; ++k)
                    comp.g_hi[k] = to_real(base + "g_hi", parts[k]);
            }
            if (auto [ok, v] = take(base + "g_value"); ok)
                comp.g_value = to_real(base + "g_value", v);
            if (auto [ok, v] = take(base + "offset"); ok) comp.offset = to_real(base + "offset", v);
            if (auto [ok, v] = take(base + "atoms"); ok && !v.empty()) {
                for (const auto& pair : split(v, ',')) {
                    const auto colon = pair.find(':');
                    if (colon == std::string::npos)
                        throw std::invalid_argument("config: " + base +
                                                    "atoms expects loc:weight pairs");
                    comp.atoms.emplace_back(to_real(base + "atoms", trim(pair.substr(0, colon))),
                                            to_real(base + "atoms", trim(pair.substr(colon + 1))));
                }
            }
        }
    }

    if (!kv.empty())
        throw std::invalid_argument("config: unknown key '" + kv.begin()->first + "'");

    // Validation.
    if (cfg.nt == 0) throw std::invalid_argument("config: grid.nt required");
    if (cfg.nx[0] == 0) throw std::invalid_argument("config: grid.nx required");
    for (int k = 1; k < cfg.dim; ++k)
        if (cfg.nx[k] == 0) cfg.nx[k] = cfg.nx[0];

    switch (kind) {
        case ProblemKind::dirac:
            if (cfg.l < 1) throw std::invalid_argument("config: dirac.l must be at least 1");
            if (!(cfg.alpha > 0.0))
                throw std::invalid_argument("config: dirac.alpha must be positive");
            cfg.T = 2.0;
            for (int k = 0; k < cfg.dim; ++k) {
                cfg.lo[k] = -1.0;
                cfg.hi[k] = 1.0;
            }
            break;
        case ProblemKind::cantor:
            if (cfg.dim != 2) throw std::invalid_argument("config: cantor requires grid.dim = 2");
            cfg.T = 5.0;
            break;
        case ProblemKind::custom:
            break;
    }

    validate(cfg.path);
    cfg.make_grid_checked();
    return cfg;
}

RunConfig parse_config(ProblemKind kind, const std::string& config_path,
                       const std::vector<std::string>& overrides,
                       const std::string& out_dir_flag) {
    auto kv = load_file(config_path);
    for (const auto& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: override '" + ov + "' is not key=value");
        kv[trim(ov.substr(0, eq))] = trim(ov.substr(eq + 1));
    }
    if (!out_dir_flag.empty()) kv["out.dir"] = out_dir_flag;
    return parse_config_map(kind, std::move(kv));
}

}  // namespace bvwave
