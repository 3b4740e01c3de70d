#include "bvwave/runner.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "bvwave/csv.hpp"
#include "bvwave/examples.hpp"

namespace bvwave {

namespace {

struct BuiltProblem {
    ProblemData data;
    std::optional<ExactControl> reference_control;
    std::optional<matrix_t> reference_adjoint;
    std::optional<scalar_t> reference_cost;
};

BuiltProblem build_problem(const RunConfig& cfg) {
    const Grid grid = cfg.make_grid_checked();
    BuiltProblem built;
    switch (cfg.problem) {
        case ProblemKind::dirac: {
            ManufacturedProblem prob = build_dirac_example(cfg.dim, cfg.l, cfg.alpha, grid);
            built.data = std::move(prob.data);
            built.reference_control = std::move(prob.exact_control);
            built.reference_adjoint = std::move(prob.exact_adjoint);
            built.reference_cost = prob.exact_cost_discrete;
            break;
        }
        case ProblemKind::cantor: {
            ManufacturedProblem prob = build_cantor_example(grid);
            built.data = std::move(prob.data);
            built.reference_control = std::move(prob.exact_control);
            built.reference_adjoint = std::move(prob.exact_adjoint);
            built.reference_cost = prob.exact_cost_discrete;
            break;
        }
        case ProblemKind::custom: {
            const int N = grid.num_space_nodes();
            const int m = static_cast<int>(cfg.components.size());
            matrix_t g = matrix_t::Zero(N, m);
            ExactControl target;
            target.components.resize(m);
            for (int j = 0; j < m; ++j) {
                const auto& comp = cfg.components[j];
                for (int node = 0; node < N; ++node) {
                    const auto x = grid.node_coords(node);
                    scalar_t weight = 1.0;
                    for (int k = 0; k < grid.dim; ++k)
                        weight *= box_node_weight(x[k], grid.hx[k], comp.g_lo[k], comp.g_hi[k]);
                    g(node, j) = comp.g_value * weight;
                }
                target.components[j].offset = comp.offset;
                for (const auto& [loc, w] : comp.atoms)
                    target.components[j].atoms.push_back({loc, w});
            }
            // Reachable target data: y_d is the state driven by the target
            // control, so small alpha recovers (a regularized version of) it.
            FemOperators ops = assemble(grid);
            const matrix_t u = evaluate_exact_control(target, grid);
            SpaceTimeField y_d = apply_L(ops, SpaceTimeField(g * u));
            built.data = make_problem_data(grid, std::move(g), cfg.custom_alpha,
                                           vector_t::Zero(N), vector_t::Zero(N), std::move(y_d));
            built.reference_control = std::move(target);
            break;
        }
    }
    return built;
}

void write_artifacts(const std::string& dir, const BuiltProblem& built, const RunConfig& cfg,
                     const PathResult& path, const DiagnosticsReport& diag) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const Grid& grid = built.data.grid;
    const int m = built.data.m;
    const int nt = grid.nt;

    auto with_time = [&](const matrix_t& rows, std::vector<std::string> names) {
        matrix_t table(nt, rows.rows() + 1);
        for (int n = 0; n < nt; ++n) table(n, 0) = grid.time(n);
        table.rightCols(rows.rows()) = rows.transpose();
        names.insert(names.begin(), "t");
        return std::pair<matrix_t, std::vector<std::string>>{table, names};
    };

    {
        const matrix_t u = cumulative_control(grid, path.control);
        std::vector<std::string> names;
        for (int j = 0; j < m; ++j) names.push_back("u_" + std::to_string(j + 1));
        auto [table, header] = with_time(u, names);
        csv::write(dir + "/control.csv", header, table);
    }
    {
        std::vector<std::string> names;
        for (int j = 0; j < m; ++j) names.push_back("v_" + std::to_string(j + 1));
        auto [table, header] = with_time(path.control.v, names);
        csv::write(dir + "/derivative.csv", header, table);
    }
    {
        FemOperators ops = assemble(grid);
        const AdjointFunctional adj =
            compute_adjoint_functional(built.data, ops, path.control);
        matrix_t rows(2 * m, nt);
        rows.topRows(m) = adj.psi;
        for (int j = 0; j < m; ++j) rows.row(m + j).setConstant(built.data.alpha(j));
        std::vector<std::string> names;
        for (int j = 0; j < m; ++j) names.push_back("psi_" + std::to_string(j + 1));
        for (int j = 0; j < m; ++j) names.push_back("alpha_" + std::to_string(j + 1));
        auto [table, header] = with_time(rows, names);
        csv::write(dir + "/adjoint.csv", header, table);
    }
    {
        int rows = 0;
        for (const auto& st : path.stages) rows += static_cast<int>(st.residual_norms.size());
        matrix_t table(rows, 4);
        int r = 0;
        for (const auto& st : path.stages)
            for (std::size_t i = 0; i < st.residual_norms.size(); ++i, ++r) {
                table(r, 0) = st.gamma;
                table(r, 1) = static_cast<scalar_t>(i);
                table(r, 2) = st.residual_norms[i];
                table(r, 3) = (i > 0 && i <= st.krylov_iters.size())
                                  ? static_cast<scalar_t>(st.krylov_iters[i - 1])
                                  : 0.0;
            }
        csv::write(dir + "/newton_history.csv", {"gamma", "iter", "residual_norm", "krylov_iters"},
                   table);
    }
    {
        matrix_t table(static_cast<index_t>(path.stages.size()), 7);
        for (std::size_t i = 0; i < path.stages.size(); ++i) {
            const auto& st = path.stages[i];
            table(static_cast<index_t>(i), 0) = st.gamma;
            table(static_cast<index_t>(i), 1) = st.value;
            table(static_cast<index_t>(i), 2) = st.cost.tracking;
            table(static_cast<index_t>(i), 3) = st.cost.tv_l1;
            table(static_cast<index_t>(i), 4) = st.cost.h1_term;
            table(static_cast<index_t>(i), 5) = st.cost.offset_term;
            table(static_cast<index_t>(i), 6) = st.tv_of_v;
        }
        csv::write(dir + "/value_function.csv",
                   {"gamma", "V", "tracking", "tv_l1", "h1_term", "offset_term", "tv_raw"}, table);
    }
    {
        std::vector<std::array<scalar_t, 2>> metrics;  // (component, value), keyed by name
        std::vector<std::string> names;
        auto push = [&](const std::string& name, int comp, scalar_t value) {
            names.push_back(name);
            metrics.push_back({static_cast<scalar_t>(comp), value});
        };
        for (int j = 0; j < m; ++j) {
            push("sparsity_mass", j + 1, diag.sparsity_mass(j));
            push("sup_psi_gap", j + 1, diag.sup_psi_gap(j));
            push("sign_separation", j + 1, diag.sign_separation(j));
        }
        push("value_monotone", 0, diag.value_monotone ? 1.0 : 0.0);
        push("max_concavity_violation", 0, diag.max_concavity_violation);
        if (!std::isnan(diag.l1_error_vs_exact)) push("l1_error_vs_exact", 0, diag.l1_error_vs_exact);
        if (!std::isnan(diag.tv_gap_vs_exact)) push("tv_gap_vs_exact", 0, diag.tv_gap_vs_exact);
        if (!diag.cost_gaps.empty()) push("fitted_gap_slope", 0, diag.fitted_gap_slope);

        std::ofstream out(dir + "/diagnostics.csv.tmp", std::ios::binary);
        out << "metric,component,value\n";
        for (std::size_t i = 0; i < names.size(); ++i)
            out << names[i] << ',' << static_cast<int>(metrics[i][0]) << ','
                << csv::format(metrics[i][1]) << '\n';
        out.close();
        std::filesystem::rename(dir + "/diagnostics.csv.tmp", dir + "/diagnostics.csv");
    }
    {
        std::ofstream out(dir + "/run_summary.txt.tmp");
        out << "problem: "
            << (cfg.problem == ProblemKind::dirac
                    ? "dirac"
                    : cfg.problem == ProblemKind::cantor ? "cantor" : "custom")
            << '\n';
        out << "grid: dim=" << grid.dim << " nx=" << grid.nx[0];
        for (int k = 1; k < grid.dim; ++k) out << 'x' << grid.nx[k];
        out << " nt=" << grid.nt << " T=" << grid.T << '\n';
        out << "path: gamma0=" << cfg.path.gamma0 << " nu=" << cfg.path.nu
            << " tol_gamma=" << cfg.path.tol_gamma << " tol_newton=" << cfg.path.tol_newton
            << '\n';
        out << "seed: " << cfg.seed << '\n';
        out << "stages: " << path.stages.size() << '\n';
        out << "completed: " << (path.completed ? "yes" : "NO (solver failure, partial artifacts)")
            << '\n';
        for (const auto& st : path.stages)
            out << "  gamma=" << csv::format(st.gamma) << " iters=" << st.newton_iters
                << " residual=" << csv::format(st.residual_norms.back())
                << " value=" << csv::format(st.value) << (st.converged ? "" : "  [not converged]")
                << '\n';
        out.close();
        std::filesystem::rename(dir + "/run_summary.txt.tmp", dir + "/run_summary.txt");
    }
}

}  // namespace

int run(const RunConfig& cfg, RunArtifacts* out) {
    BuiltProblem built;
    try {
        built = build_problem(cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }

    FemOperators ops = assemble(built.data.grid);
    DerivativeControl start(built.data.m, built.data.grid.nt);
    PathResult path = path_following(built.data, ops, cfg.path, start);

    ExactReference ref;
    if (built.reference_control) ref.control = &*built.reference_control;
    if (built.reference_adjoint) ref.adjoint = &*built.reference_adjoint;
    if (built.reference_cost) ref.cost = built.reference_cost;
    DiagnosticsReport diag = diagnostics(built.data, ops, cfg.path, path.stages, path.control, ref);

    write_artifacts(cfg.out_dir, built, cfg, path, diag);
    const bool ok = path.completed;
    if (out) {
        out->path = std::move(path);
        out->diag = std::move(diag);
        out->out_dir = cfg.out_dir;
    }
    return ok ? 0 : 3;
}

}  // namespace bvwave
