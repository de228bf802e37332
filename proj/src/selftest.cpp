#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "pinch/harness.hpp"
#include "pinch/quad.hpp"
#include "pinch/specfun.hpp"

namespace pinch {

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

template <class Body>
SuiteResult timed(const std::string& name, Body body) {
    SuiteResult r;
    r.name = name;
    auto t0 = std::chrono::steady_clock::now();
    try {
        std::ostringstream detail;
        r.pass = body(detail);
        r.detail = detail.str();
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

struct Config {
    std::vector<double> xs;
    cd z;
};

const std::vector<Config> kRectConfigs{
    {{0.0, 0.3, 1.0, 2.5}, cd(0.4, 0.7)},   {{-1.0, 0.2, 0.9, 3.0}, cd(1.7, 0.3)},
    {{0.0, 1.0, 1.5, 4.0}, cd(-0.5, 1.2)},  {{-2.0, -1.5, 0.5, 1.0}, cd(0.1, 0.45)},
    {{0.0, 0.5, 2.0, 2.2}, cd(1.0, 2.0)},
};

const std::vector<Config> kHexConfigs{
    {{0.0, 0.3, 0.8, 1.4, 2.0, 3.0}, cd(1.1, 0.6)},  {{-1.0, 0.0, 0.5, 0.7, 1.5, 2.5}, cd(0.3, 0.4)},
    {{0.0, 0.2, 0.9, 1.2, 2.6, 4.0}, cd(2.0, 1.0)},  {{0.0, 0.5, 1.0, 1.5, 2.0, 2.5}, cd(1.25, 0.9)},
    {{-2.0, -0.5, 0.1, 0.4, 1.8, 6.0}, cd(-0.3, 0.5)},
};

struct Dsu {
    std::vector<int> p;
    explicit Dsu(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int a) {
        while (p[a] != a) a = p[a] = p[p[a]];
        return a;
    }
    void unite(int a, int b) { p[find(a)] = find(b); }
};

}  // namespace

SuiteResult suite_special_functions() {
    return timed("special functions", [](std::ostringstream& d) {
        std::mt19937_64 rng(101);
        std::uniform_real_distribution<double> P(-0.9, 1.8), X(-0.98, 0.98), Q(0.1, 1.2), M(0.01, 0.99), R(-2.0, 2.0);
        double euler = 0.0, fd = 0.0, jac = 0.0;
        for (int t = 0; t < 100; ++t) {
            double a = P(rng), b = P(rng), c = std::abs(P(rng)) + 0.2, x = X(rng);
            euler = std::max(euler, rel(gauss_2f1(a, b, c, x), std::pow(1 - x, c - a - b) * gauss_2f1(c - a, c - b, c, x)));
        }
        for (int t = 0; t < 100; ++t) {
            FdArgs g{Q(rng), {Q(rng) - 0.6}, 0.0, {cd(0.9 * X(rng), 0.0)}};
            g.c = g.a + Q(rng);
            fd = std::max(fd, rel(lauricella_fd(g).real(), gauss_2f1(g.a, g.b[0], g.c, g.x[0].real())));
        }
        for (int t = 0; t < 100; ++t) {
            auto j = jacobi_elliptic(cd(R(rng), 0.5 * R(rng)), M(rng));
            jac = std::max(jac, std::abs(j.sn * j.sn + j.cn * j.cn - 1.0));
        }
        d << "max rel err: 2F1 Euler " << euler << ", F_D one-variable " << fd << ", sn^2+cn^2 " << jac;
        return euler < 1e-9 && fd < 1e-9 && jac < 1e-9;
    });
}

SuiteResult suite_contour_identities(int configs_per_kappa) {
    return timed("contour identities", [&](std::ostringstream& d) {
        std::mt19937_64 rng(202);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        double loop_worst = 0.0, rel_worst = 0.0;
        for (double k : {6.0, 16.0 / 3.0, 5.0}) {
            for (int t = 0; t < configs_per_kappa; ++t) {
                std::vector<double> xs{0.0};
                for (int i = 0; i < 4; ++i) xs.push_back(xs.back() + 0.15 + 0.4 * U(rng));
                cd z(xs[4] * U(rng), 0.4 + U(rng));
                CoulombSpec s;
                for (double x : xs) s.add_real(x, -4.0 / k);
                s.add_pair(z, 8.0 / k - 1.0);
                double left = 0.5 * (xs[2] + xs[3]);
                cd loop = double_integral(s, 8.0 / k, ContourSpec::loop(left, xs[4] + 0.1, 0.5 * z.imag()),
                                          ContourSpec::segment(xs[3], xs[4]), QuadOptions{1e-10}, QuadOptions{1e-11});
                cd scale = double_integral(s, 8.0 / k, ContourSpec::polyline_at(z, left), ContourSpec::segment(xs[3], xs[4]),
                                           QuadOptions{1e-10}, QuadOptions{1e-11});
                loop_worst = std::max(loop_worst, std::abs(loop) / std::abs(scale));

                std::vector<double> ys{0.0, 0.2 + U(rng), 0, 0};
                ys[2] = ys[1] + 0.2 + U(rng);
                ys[3] = ys[2] + 0.2 + U(rng);
                cd w(ys[3] * U(rng), 0.1 + U(rng));
                rel_worst = std::max(rel_worst, linear_relation_check(ys, w, k).residual);
            }
        }
        d << "loop identity scaled residual " << loop_worst << ", I-relation residual " << rel_worst;
        return loop_worst < 1e-7 && rel_worst < 1e-7;
    });
}

SuiteResult suite_block_equivalence(double fd_perturbation) {
    return timed("block equivalence", [&](std::ostringstream& d) {
        struct Reset {
            ~Reset() { set_fd_perturbation(0.0); }
        } reset;
        set_fd_perturbation(fd_perturbation);
        double g_worst = 0.0, h_worst = 0.0;
        for (double k : {6.0, 16.0 / 3.0}) {
            ModelParams p = from_kappa(k);
            for (auto& c : kRectConfigs) {
                auto r = cross_ratios(c.xs, c.z);
                for (int i = 1; i <= 4; ++i) g_worst = std::max(g_worst, rel(rect_block_G(i, r, p), rect_block_G_direct(i, r, p)));
            }
            for (auto& c : kHexConfigs) {
                auto r = cross_ratios(c.xs, c.z);
                for (int i = 1; i <= 6; ++i) h_worst = std::max(h_worst, rel(hex_block_H(i, r, p), hex_block_H_direct(i, r, p)));
            }
        }
        d << "max rel diff G1..G4 " << g_worst << ", H1..H6 " << h_worst;
        return g_worst < 1e-6 && h_worst < 1e-6;
    });
}

SuiteResult suite_pde_residuals(const std::vector<double>& kappas) {
    return timed("PDE and Ward residuals", [&](std::ostringstream& d) {
        double closed = 0.0, quad = 0.0;
        auto track = [](double& worst, double r) { worst = std::max(worst, r); };
        for (double k : kappas) {
            ModelParams p = from_kappa(k);
            const Config& rc = kRectConfigs[0];
            const Config& hc = kHexConfigs[0];
            {
                WeightEvaluator w{[&](const std::vector<double>& x, cd z) { return weight_pi12(x[0], x[1], z, p); }, 1, p};
                std::vector<double> xs{0.0, 1.3};
                cd z(0.4, 0.9);
                for (int i = 1; i <= 2; ++i) track(closed, verify_null_state(w, xs, z, i));
                for (double r : verify_ward(w, xs, z)) track(closed, r);
            }
            for (int N : {2, 3}) {
                const Config& c = N == 2 ? rc : hc;
                WeightEvaluator w{[&](const std::vector<double>& x, cd z) { return weight_full_polygon(N, x, z, p); }, N, p};
                for (int i = 1; i <= 2 * N; ++i) track(closed, verify_null_state(w, c.xs, c.z, i));
                for (double r : verify_ward(w, c.xs, c.z)) track(closed, r);
            }
            for (auto l : {"12:34", "41:23"}) {
                auto e = parse_event(l);
                WeightEvaluator w{[&](const std::vector<double>& x, cd z) { return rect_one_pp_weight(e, x, z, p); }, 1, p};
                for (int i = 1; i <= 4; ++i) track(quad, verify_null_state(w, rc.xs, rc.z, i));
                for (double r : verify_ward(w, rc.xs, rc.z)) track(quad, r);
            }
            {
                auto e = parse_event("6123:45");
                WeightEvaluator w{[&](const std::vector<double>& x, cd z) { return hex_two_pp_weight(e, x, z, p); }, 2, p};
                for (int i = 1; i <= 6; ++i) track(quad, verify_null_state(w, hc.xs, hc.z, i));
                for (double r : verify_ward(w, hc.xs, hc.z)) track(quad, r);
            }
            {
                WeightEvaluator w{[&](const std::vector<double>& x, cd z) { return hex_one_pp_combo(x, z, p); }, 1, p};
                for (int i = 1; i <= 6; ++i) track(quad, verify_null_state(w, hc.xs, hc.z, i));
                for (double r : verify_ward(w, hc.xs, hc.z)) track(quad, r);
            }
        }
        d << "worst relative residual: closed-form " << closed << ", quadrature-backed " << quad;
        return closed < 1e-4 && quad < 1e-3;
    });
}

std::vector<LimitRatio> limit_ratios(double k, double sep) {
    ModelParams p = from_kappa(k);
    const double t = std::pow(sep, 6.0 / k - 1.0);
    std::vector<LimitRatio> out;
    cd z(0.5, 0.8);
    out.push_back({"rect 12:34 -> 12", k,
                   t * rect_one_pp_weight(parse_event("12:34"), {0.0, 1.0, 2.0, 2.0 + sep}, z, p) / weight_pi12(0.0, 1.0, z, p)});
    cd zh(1.5, 0.8);
    out.push_back({"hex 1234:56 -> 1234", k,
                   t * hex_two_pp_weight(parse_event("1234:56"), {0.0, 1.0, 2.0, 3.0, 4.0, 4.0 + sep}, zh, p) /
                       weight_full_polygon(2, {0.0, 1.0, 2.0, 3.0}, zh, p)});
    cd zc(1.1, 0.6);
    out.push_back({"hex one-pinch combination -> 12:34", k,
                   t * hex_one_pp_combo({0.0, 0.3, 0.8, 1.4, 1.4 + sep, 3.0}, zc, p) /
                       rect_one_pp_weight(parse_event("12:34"), {0.0, 0.3, 0.8, 3.0}, zc, p)});
    return out;
}

SuiteResult suite_limit_recovery() {
    return timed("limit recovery", [](std::ostringstream& d) {
        // the approach to 1 is from below at the rate sep^{8/kappa - 1}
        const double sep = 1e-4;
        bool ok = true;
        for (double k : {6.0, 16.0 / 3.0}) {
            for (auto& r : limit_ratios(k, sep)) {
                double slack = 3.0 * std::pow(sep, 8.0 / k - 1.0);
                d << r.name << " kappa=" << k << ": " << r.ratio << "; ";
                ok = ok && std::abs(r.ratio - 1.0) < slack;
            }
            auto fine = limit_ratios(k, sep / 10);
            double rate = std::log10((1.0 - limit_ratios(k, sep)[0].ratio) / (1.0 - fine[0].ratio));
            d << "rate " << rate << " (expected " << 8.0 / k - 1.0 << "); ";
            ok = ok && std::abs(rate - (8.0 / k - 1.0)) < 0.02;
        }
        return ok;
    });
}

SuiteResult suite_lattice_oracles() {
    return timed("lattice oracles", [](std::ostringstream& d) {
        bool ok = true;
        // every bond configuration of the 2x1 and 3x2 lattices: walk crossing vs union-find
        for (auto [lx, ly] : {std::array<int, 2>{2, 1}, {3, 2}}) {
            RectBonds b(lx, ly);
            std::vector<std::array<int, 2>> rb;
            for (int Y = 0; Y <= 2 * ly; ++Y)
                for (int X = 0; X <= 2 * lx; ++X)
                    if (b.is_random(X, Y)) rb.push_back({X, Y});
            int walk = 0, uf = 0, mismatch = 0;
            for (int mask = 0; mask < (1 << rb.size()); ++mask) {
                for (size_t k = 0; k < rb.size(); ++k) b.set(rb[k][0], rb[k][1], (mask >> k) & 1);
                Dsu s((lx + 1) * (ly + 1));
                for (auto [X, Y] : rb)
                    if (b.get(X, Y)) {
                        if (Y % 2 == 0)
                            s.unite((X - 1) / 2 + Y / 2 * (lx + 1), (X + 1) / 2 + Y / 2 * (lx + 1));
                        else
                            s.unite(X / 2 + (Y - 1) / 2 * (lx + 1), X / 2 + (Y + 1) / 2 * (lx + 1));
                    }
                for (int j = 0; j < ly; ++j) {
                    s.unite(j * (lx + 1), (j + 1) * (lx + 1));
                    s.unite(lx + j * (lx + 1), lx + (j + 1) * (lx + 1));
                }
                bool cross = s.find(0) == s.find(lx);
                bool h = rect_walks(b).horizontal;
                walk += h;
                uf += cross;
                mismatch += h != cross;
            }
            d << lx << "x" << ly << ": " << walk << "/" << (1 << rb.size()) << " crossing by walks, " << uf
              << " by union-find; ";
            ok = ok && mismatch == 0;
        }
        // every site configuration of the side-2 hexagon: walk end vertices vs wired-side clusters
        {
            HexSites h(2);
            const int L = 2;
            std::vector<std::array<int, 2>> rs;
            for (int r = -L; r <= L; ++r)
                for (int q = -L; q <= L; ++q)
                    if (h.is_random(q, r)) rs.push_back({q, r});
            std::map<std::array<int, 3>, int> by_walk, by_cluster;
            const int D[6][2] = {{1, 0}, {1, -1}, {0, -1}, {-1, 0}, {-1, 1}, {0, 1}};
            for (int mask = 0; mask < (1 << rs.size()); ++mask) {
                for (size_t k = 0; k < rs.size(); ++k) h.set(rs[k][0], rs[k][1], (mask >> k) & 1);
                ++by_walk[hex_walks(h).ends];
                Dsu s(static_cast<int>(h.active.size()));
                for (int r = -L; r <= L; ++r)
                    for (int q = -L; q <= L; ++q) {
                        if (!h.inside(q, r) || !h.get(q, r)) continue;
                        for (auto& e : D)
                            if (h.inside(q + e[0], r + e[1]) && h.get(q + e[0], r + e[1]))
                                s.unite(h.code(q, r), h.code(q + e[0], r + e[1]));
                    }
                int A = s.find(h.code(0, -L)), B = s.find(h.code(L, 0)), C = s.find(h.code(-L, L));
                std::array<int, 3> e{C == A ? 6 : (B == A ? 4 : 2), A == B ? 2 : (C == B ? 6 : 4), B == C ? 4 : (A == C ? 2 : 6)};
                ++by_cluster[e];
            }
            d << "side-2 hexagon: " << by_walk.size() << " connectivity classes, distributions "
              << (by_walk == by_cluster ? "equal" : "DIFFER") << "; ";
            ok = ok && by_walk == by_cluster;
        }
        // 3x3 Swendsen-Wang against exact Boltzmann weights of (energy, magnetization) classes
        const double p = critical_probability(LatticeKind::square_rect, ModelKind::ising_fk);
        const double K = -std::log(1.0 - p) / 2.0;
        for (bool wired : {false, true}) {
            SpinGraph g = square_graph(2, 2, wired);
            auto key = [&](const std::vector<int8_t>& s) {
                int E = 0, M = 0;
                for (auto& e : g.edges) E += s[e[0]] * s[e[1]];
                for (auto v : s) M += v;
                return std::pair<int, int>{E, M};
            };
            std::map<std::pair<int, int>, double> exact;
            double Z = 0.0;
            for (int c = 0; c < 512; ++c) {
                std::vector<int8_t> s(9);
                for (int i = 0; i < 9; ++i) s[i] = (c >> i) & 1 ? 1 : -1;
                bool allowed = true;
                for (size_t e = 0; e < g.edges.size(); ++e)
                    if (g.forced[e] && s[g.edges[e][0]] != s[g.edges[e][1]]) allowed = false;
                if (!allowed) continue;
                double w = std::exp(K * key(s).first);
                exact[key(s)] += w;
                Z += w;
            }
            const int n = 20000, thin = 3;
            std::map<std::pair<int, int>, int> seen;
            SwState st = sw_initial_state(g, 0);
            for (int k = 0; k < 100; ++k) sw_ising_sample(g, p, st, 31);
            for (int i = 0; i < n; ++i) {
                for (int k = 0; k < thin; ++k) sw_ising_sample(g, p, st, 31);
                ++seen[key(st.spin)];
            }
            double chi2 = 0.0, pe = 0.0, po = 0.0;
            int cells = 0;
            for (auto& [k, w] : exact) {
                double e = n * w / Z, o = seen.count(k) ? seen[k] : 0;
                if (e < 5.0) {
                    pe += e;
                    po += o;
                    continue;
                }
                chi2 += (o - e) * (o - e) / e;
                ++cells;
            }
            if (pe > 0) {
                chi2 += (po - pe) * (po - pe) / pe;
                ++cells;
            }
            double crit = boost::math::quantile(boost::math::chi_squared(cells - 1), 0.95);
            d << "3x3 SW " << (wired ? "wired" : "free") << ": chi2 " << chi2 << " vs " << crit << " (" << cells - 1
              << " dof); ";
            ok = ok && chi2 < crit;
        }
        return ok;
    });
}

std::vector<SuiteResult> cmd_selftest(double fd_perturbation) {
    return {suite_special_functions(), suite_contour_identities(), suite_block_equivalence(fd_perturbation),
            suite_pde_residuals(), suite_limit_recovery(), suite_lattice_oracles()};
}

}  // namespace pinch
