#pragma once

// Downhill simplex minimizer. The fitting objectives here are Monte Carlo
// sums evaluated with common random numbers: deterministic, but not smooth
// enough for gradient methods, which is exactly the regime the simplex
// handles well. Deterministic by construction (no randomness, stable
// tie-breaking through strict ordering).

#include <algorithm>
#include <cstddef>
#include <functional>
#include <vector>

namespace nvodmr {

struct NelderMeadOptions {
    int max_iterations = 500;
    // Convergence when every vertex is within this distance of the best one
    // (max-norm). Callers parametrize widths in log space, which makes this
    // a relative width tolerance.
    double tolerance = 1e-4;
    double initial_step = 0.5;  // offset of the non-base vertices
};

struct NelderMeadResult {
    std::vector<double> x;
    double fmin = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x0,
                                    const NelderMeadOptions& opts = {}) {
    const std::size_t n = x0.size();
    NelderMeadResult result;

    std::vector<std::vector<double>> verts(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) verts[i + 1][i] += opts.initial_step;
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fv[i] = f(verts[i]);
    result.evaluations = static_cast<int>(n) + 1;

    std::vector<std::size_t> order(n + 1);
    auto sort_order = [&] {
        for (std::size_t i = 0; i <= n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&fv](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    };

    std::vector<double> centroid(n), trial(n), trial2(n);
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        sort_order();
        const std::size_t best = order[0];
        const std::size_t worst = order[n];
        const std::size_t second_worst = order[n == 0 ? 0 : n - 1];

        double spread = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t d = 0; d < n; ++d)
                spread = std::max(spread, std::abs(verts[i][d] - verts[best][d]));
        if (spread < opts.tolerance) {
            result.converged = true;
            result.iterations = iter;
            break;
        }

        for (std::size_t d = 0; d < n; ++d) {
            double c = 0.0;
            for (std::size_t i = 0; i <= n; ++i)
                if (i != worst) c += verts[i][d];
            centroid[d] = c / static_cast<double>(n);
        }

        // Reflection.
        for (std::size_t d = 0; d < n; ++d)
            trial[d] = centroid[d] + (centroid[d] - verts[worst][d]);
        double f_trial = f(trial);
        ++result.evaluations;

        if (f_trial < fv[best]) {
            // Expansion.
            for (std::size_t d = 0; d < n; ++d)
                trial2[d] = centroid[d] + 2.0 * (centroid[d] - verts[worst][d]);
            const double f_exp = f(trial2);
            ++result.evaluations;
            if (f_exp < f_trial) {
                verts[worst] = trial2;
                fv[worst] = f_exp;
            } else {
                verts[worst] = trial;
                fv[worst] = f_trial;
            }
        } else if (f_trial < fv[second_worst]) {
            verts[worst] = trial;
            fv[worst] = f_trial;
        } else {
            // Contraction (outside if the reflected point improved on the
            // worst vertex, inside otherwise).
            const bool outside = f_trial < fv[worst];
            for (std::size_t d = 0; d < n; ++d) {
                const double toward = outside ? trial[d] : verts[worst][d];
                trial2[d] = centroid[d] + 0.5 * (toward - centroid[d]);
            }
            const double f_con = f(trial2);
            ++result.evaluations;
            if (f_con < std::min(f_trial, fv[worst])) {
                verts[worst] = trial2;
                fv[worst] = f_con;
            } else {
                // Shrink toward the best vertex.
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t d = 0; d < n; ++d)
                        verts[i][d] = verts[best][d] + 0.5 * (verts[i][d] - verts[best][d]);
                    fv[i] = f(verts[i]);
                    ++result.evaluations;
                }
            }
        }
        result.iterations = iter + 1;
    }

    sort_order();
    result.x = verts[order[0]];
    result.fmin = fv[order[0]];
    return result;
}

}  // namespace nvodmr
