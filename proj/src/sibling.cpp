#include "kronrev/sibling.hpp"

#include <algorithm>
#include <numeric>

namespace kronrev {

std::optional<PhaseBlock> gamma_fit(const BlockMatrix& c, int i, int j, double tol) {
    const int n = c.n();
    if (i == j || i < 0 || j < 0 || i >= n || j >= n) throw Error(ErrorKind::InvalidSubset, "gamma_fit needs i != j");
    int m0 = -1;
    for (int m = 0; m < n && m0 < 0; ++m)
        if (m != i && m != j) m0 = m;
    if (m0 < 0) throw Error(ErrorKind::InvalidSubset, "gamma_fit needs a clique of at least 3 blocks");
    const PhaseBlock gamma = c.block(i, m0) * invert_block(c.block(j, m0));
    for (int m = m0 + 1; m < n; ++m) {
        if (m == i || m == j) continue;
        const PhaseBlock cim = c.block(i, m);
        if ((cim - gamma * c.block(j, m)).norm() > tol * cim.norm()) return std::nullopt;
    }
    return gamma;
}

std::vector<SiblingGroup> find_sibling_groups(const BlockMatrix& c_in, double tol) {
    const BlockMatrix c = normalize_diagonal(c_in);
    const int n = c.n();
    if (n < 3) throw Error(ErrorKind::NoGroupFound, "clique has fewer than 3 blocks");

    std::map<std::pair<int, int>, PhaseBlock> passed;
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            auto g = gamma_fit(c, i, j, tol);
            if (!g) continue;
            passed[{i, j}] = *g;
            parent[find(i)] = find(j);
        }

    if (n == 3) {
        SiblingGroup all;
        all.members = {0, 1, 2};
        all.gammas = passed;
        return {all};
    }

    std::map<int, std::vector<int>> comps;
    for (int i = 0; i < n; ++i) comps[find(i)].push_back(i);
    std::vector<SiblingGroup> out;
    for (auto& [_, members] : comps) {
        if (members.size() < 2) continue;
        SiblingGroup g;
        g.members = members;
        bool complete = true;
        for (size_t a = 0; a < members.size() && complete; ++a)
            for (size_t b = a + 1; b < members.size(); ++b) {
                auto it = passed.find({members[a], members[b]});
                if (it == passed.end()) {
                    complete = false;
                    break;
                }
                g.gammas.insert(*it);
            }
        if (complete) out.push_back(std::move(g));
    }
    if (out.empty()) throw Error(ErrorKind::NoGroupFound, "no pair of clique nodes passes the gamma test");
    std::sort(out.begin(), out.end(),
              [](const SiblingGroup& a, const SiblingGroup& b) { return a.members.front() < b.members.front(); });
    return out;
}

UniformFit fit_uniform(const BlockMatrix& a, const PhaseBlock& y_unit, double tol, double zero_tol) {
    const int n = a.n();
    UniformFit fit;
    fit.mu = Eigen::MatrixXd::Zero(n, n);
    fit.ok = true;
    const double yy = y_unit.squaredNorm();
    const double floor = zero_tol * a.norm();
    // Least-squares multiple t minimizing ||B - t y||.
    auto project = [&](const PhaseBlock& b) { return (y_unit.adjoint() * b).trace().real() / yy; };
    auto residual = [&](const PhaseBlock& b, double t) {
        return (b - t * y_unit).norm() / std::max(1e-300, b.norm());
    };
    for (int j = 0; j < n; ++j) {
        double mu_sum = 0.0;
        for (int k = 0; k < n; ++k) {
            if (k == j) continue;
            const PhaseBlock b = a.block(j, k);
            if (b.norm() <= floor) continue;
            const double mu = -project(b);
            const double r = residual(b, -mu);
            fit.mu(j, k) = mu;
            fit.worst_residual = std::max(fit.worst_residual, r);
            if (!(mu > 0.0) || r > tol) fit.ok = false;
            mu_sum += mu;
        }
        const PhaseBlock d = a.block(j, j);
        const double sigma = project(d);
        fit.mu(j, j) = sigma;
        if (d.norm() > floor) {
            const double r = residual(d, sigma);
            fit.worst_residual = std::max(fit.worst_residual, r);
            if (r > tol) fit.ok = false;
        }
        if (sigma < mu_sum * (1.0 - tol)) fit.ok = false;
    }
    return fit;
}

bool check_uniform_preservation(const BlockMatrix& a, const PhaseBlock& y_unit, double tol) {
    return fit_uniform(a, y_unit, tol).ok;
}

}  // namespace kronrev
