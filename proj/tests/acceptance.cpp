// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "idyn/analysis.hpp"
#include "idyn/dynamics.hpp"
#include "idyn/invariants.hpp"
#include "idyn/setups.hpp"
#include "idyn/splines.hpp"

using namespace idyn;

namespace {

struct Verdict {
    bool ok = true;
    std::vector<std::string> details;

    void require(bool cond, const std::string& what) {
        if (!cond) ok = false;
        details.push_back((cond ? "  ok   " : "  FAIL ") + what);
    }
    void info(const std::string& what) { details.push_back("  info " + what); }
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int failures = 0;

void report(int id, const char* title, const std::function<Verdict()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v.ok = false;
        v.details.push_back(std::string("  FAIL exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.ok) ++failures;
    std::printf("%s criterion %d: %s (%.1fs)\n", v.ok ? "PASS" : "FAIL", id, title, secs);
    for (const auto& d : v.details) std::printf("%s\n", d.c_str());
    std::fflush(stdout);
}

// 1 ----------------------------------------------------------------------

Verdict table_reproduction() {
    Verdict v;
    const std::vector<std::size_t> ns{16, 32, 64, 128, 256, 512, 1024};
    const std::vector<std::pair<double, std::vector<double>>> reference_rates{
        {0.5,
         {2.112614126300029, 2.055209004601208, 2.026777868073563, 2.013096435137189, 2.006536458546063,
          2.003256451919377, 2.001624177537549}},
        {1.0,
         {2.100856100109834, 2.051123510423984, 2.025681916479720, 2.012865860858589, 2.006433295172438,
          2.003220576642864, 2.001610772707442}}};
    for (const auto& [alpha, ref] : reference_rates) {
        ConvergenceOptions opts;
        opts.n_list = ns;
        opts.depth = 15;
        opts.n_ref = 4096;
        opts.degree = 1;
        const RateTable table = convergence_table(beverton_holt_setup(alpha), opts);
        double worst = 0.0;
        bool monotone = true;
        for (std::size_t i = 0; i < ns.size(); ++i) {
            const auto& row = table.rows[i];
            worst = std::max(worst, std::abs(row.rate - ref[i]));
            if (i > 0 && !(row.rate < table.rows[i - 1].rate)) monotone = false;
            v.info(fmt("alpha=%g n=%4zu err_n=%.6e c(n)=%.6f reference=%.6f", alpha, row.n, row.err, row.rate, ref[i]));
        }
        const double last = table.rows.back().rate;
        v.require(worst <= 0.05, fmt("alpha=%g max |c(n) - reference| = %.3e <= 0.05", alpha, worst));
        v.require(monotone, fmt("alpha=%g c(n) strictly decreasing", alpha));
        v.require(last >= 2.000 && last <= 2.010, fmt("alpha=%g c(1024) = %.6f in [2.000, 2.010]", alpha, last));
    }
    return v;
}

// 2 ----------------------------------------------------------------------

Verdict projection_orders() {
    Verdict v;
    // ||u''|| = ||u'''|| = ||u''''|| = 1 for sin on [-3, 3]
    const double factor[] = {0.0, 1.0 / 8.0, 1.0 / 24.0, 5.0 / 384.0};
    for (int l = 1; l <= 3; ++l) {
        double prev = 0.0, min_eoc = 1e300, worst_bound_ratio = 0.0;
        for (std::size_t n = 16; n <= 256; n *= 2) {
            const auto space = std::make_shared<const SplineSpace>(Grid::uniform({-3.0, 3.0}, n), l);
            const auto f = project_function(space, [](double x) { return std::sin(x); },
                                            [](double x) { return -std::sin(x); });
            double err = 0.0;
            for (double x : equispaced({-3.0, 3.0}, 16 * n + 1)) err = std::max(err, std::abs(f(x) - std::sin(x)));
            const double h = 6.0 / static_cast<double>(n);
            const double bound = factor[l] * std::pow(h, l + 1);
            worst_bound_ratio = std::max(worst_bound_ratio, err / bound);
            if (prev > 0.0) min_eoc = std::min(min_eoc, std::log2(prev / err));
            v.info(fmt("l=%d n=%3zu err=%.4e bound=%.4e", l, n, err, bound));
            prev = err;
        }
        v.require(min_eoc >= l + 0.8, fmt("l=%d min EOC = %.4f >= %.1f", l, min_eoc, l + 0.8));
        v.require(worst_bound_ratio <= 1.0, fmt("l=%d max err/bound = %.4f <= 1", l, worst_bound_ratio));
    }
    return v;
}

// 3 ----------------------------------------------------------------------

Verdict projection_stability() {
    Verdict v;
    const std::size_t trials = 200;
    std::vector<std::shared_ptr<const SplineSpace>> spaces;
    for (int l = 1; l <= 3; ++l)
        for (std::size_t n : {16u, 64u})
            spaces.push_back(std::make_shared<const SplineSpace>(Grid::uniform({-3.0, 3.0}, n), l));
    spaces.push_back(std::make_shared<const SplineSpace>(Grid({-3.0, -2.2, -2.0, -0.5, 0.3, 0.4, 1.9, 3.0}), 3));
    std::uint64_t seed = 2024;
    for (const auto& s : spaces) {
        const double p = s->stability_constant();
        const double est = lebesgue_estimate(s, trials, default_sample_count(s->intervals()), seed++);
        v.require(est <= p + 1e-9, fmt("l=%d intervals=%zu estimate %.6f <= p + 1e-9 = %.6f (%zu trials)", s->degree(),
                                       s->intervals(), est, p, trials));
    }
    return v;
}

// 4 ----------------------------------------------------------------------

Verdict operator_contracts() {
    Verdict v;
    const std::size_t trials = 100;
    const double rel = 1e-8;
    std::uint64_t seed = 31;
    auto show = [&](const CheckResult& r, const std::string& label) {
        v.require(r.passed() && r.trials >= trials,
                  fmt("%-18s %-28s trials=%zu failures=%zu worst=%.4f", r.name.c_str(), label.c_str(), r.trials,
                      r.failures, r.worst_ratio));
    };
    for (double alpha : {0.5, 1.0, 2.0}) {
        const IdeModel m = beverton_holt_setup(alpha);
        for (int l : {1, 2}) {
            const auto disc = Discretization::uniform(m.habitat, 64, l);
            for (Time t : {0, 7}) {
                const std::string label = fmt("BH alpha=%g l=%d t=%d", alpha, l, static_cast<int>(t));
                show(check_boundedness(m, disc, t, 5.0, trials, seed++, rel), label);
                show(check_lipschitz(m, disc, t, 5.0, trials, seed++, rel), label);
                if (alpha <= 1.0 && l == 1) show(check_order_preservation(m, disc, t, 5.0, trials, seed++), label);
            }
        }
    }
    const RickerSetup ricker;
    const auto disc = Discretization::uniform(ricker.habitat, 64, 1);
    show(check_boundedness(ricker.nonautonomous(), disc, 0, 5.0, trials, seed++, rel), "Ricker l=1 t=0");
    show(check_lipschitz(ricker.nonautonomous(), disc, 0, 5.0, trials, seed++, rel), "Ricker l=1 t=0");
    return v;
}

// 5 ----------------------------------------------------------------------

double worst_decay_ratio(const std::vector<std::pair<std::size_t, double>>& d, double floor) {
    double worst = 0.0;
    for (std::size_t i = 1; i < d.size() && d[i].second > floor; ++i)
        worst = std::max(worst, d[i].second / d[i - 1].second);
    return worst;
}

Verdict ricker_forward_limit() {
    Verdict v;
    const RickerSetup setup;
    const double tol = 1e-12;
    ForwardLimitOptions opts;
    opts.tol = tol;
    std::vector<std::function<double(double)>> seeds{
        [](double) { return 3.0; }, [](double) { return 0.5; }, [](double x) { return 1.0 + std::sin(x); },
        [](double x) { return 0.2 * x * x; }};
    const std::vector<std::size_t> ns{64, 128, 256, 512, 1024};
    std::vector<Discretization> discs;
    for (std::size_t n : ns) discs.push_back(Discretization::uniform(setup.habitat, n, 1));

    const auto frozen = forward_limit_experiment(setup.frozen(), setup.frozen(), discs, setup.tau, 40, seeds, opts);
    const auto nonaut =
        forward_limit_experiment(setup.nonautonomous(), setup.frozen(), discs, setup.tau, 60, seeds, opts);
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const double bound = setup.gamma * setup.k0() * discs[i].p() * std::exp(-2.0) + 0.05;
        const double ratio = worst_decay_ratio(frozen[i].distances, tol);
        v.require(ratio <= bound, fmt("n=%4zu frozen decay ratio %.4f <= gamma k0 p / e^2 + 0.05 = %.4f", ns[i], ratio,
                                      bound));
        const double end = nonaut[i].distances.back().second;
        v.require(end <= 10 * tol, fmt("n=%4zu nonautonomous distance at s=60: %.3e <= %.1e", ns[i], end, 10 * tol));
    }

    const auto finest = fixed_point_autonomous(setup.frozen(), Discretization::uniform(setup.habitat, 2048, 1),
                                               frozen.back().fixed_point, tol, 10'000, setup.tau);
    std::vector<double> gaps;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const StateFunction& next = i + 1 < ns.size() ? frozen[i + 1].fixed_point : finest.state;
        gaps.push_back(linear_sup_distance(frozen[i].fixed_point, next));
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < gaps.size(); ++i) decreasing = decreasing && gaps[i] < gaps[i - 1];
    std::string listing;
    for (std::size_t i = 0; i < gaps.size(); ++i) listing += fmt(" %zu:%.3e", ns[i], gaps[i]);
    v.require(decreasing, "||u*_n - u*_2n|| decreasing in n:" + listing);

    RickerSetup small_b = setup;
    small_b.inhomogeneity = 0.1;
    const auto d01 = forward_limit_experiment(small_b.frozen(), small_b.frozen(), {discs[1]}, 0, 40, seeds, opts);
    v.info(fmt("b=%.1f: frozen decay ratio %.4f at n=128 (b=0.1 gives %.4f)", setup.inhomogeneity,
               worst_decay_ratio(frozen[1].distances, tol), worst_decay_ratio(d01[0].distances, tol)));
    return v;
}

// 6 ----------------------------------------------------------------------

Verdict absorbing_invariance() {
    Verdict v;
    std::uint64_t seed = 500;
    for (double alpha : {1.0, 2.0}) {
        const IdeModel m = beverton_holt_setup(alpha);
        for (int l : {1, 2}) {
            const auto disc = Discretization::uniform(m.habitat, 64, l);
            for (Time tau : {0, 5, 13}) {
                const auto r = check_absorbing_invariance(m, disc, tau, 100, seed++, 1.1, 100.0);
                v.require(r.passed(), fmt("BH alpha=%g l=%d tau=%2d states up to 100 rho R: trials=%zu worst=%.4f",
                                          alpha, l, static_cast<int>(tau), r.trials, r.worst_ratio));
            }
        }
    }
    const IdeModel m = beverton_holt_setup(0.5);
    for (int l : {1, 2}) {
        const auto disc = Discretization::uniform(m.habitat, 64, l);
        for (Time tau : {0, 5, 13}) {
            const auto r = check_absorbing_invariance(m, disc, tau, 100, seed++, 1.1, 1.0);
            v.require(r.passed(), fmt("BH alpha=0.5 l=%d tau=%2d boundary of ball(rho R_tau): trials=%zu worst=%.4f", l,
                                      static_cast<int>(tau), r.trials, r.worst_ratio));
        }
    }
    return v;
}

// 7 ----------------------------------------------------------------------

Verdict oracles() {
    Verdict v;

    // Hausdorff semidistance against a direct double loop over node values
    {
        const auto disc = Discretization::uniform({-3.0, 3.0}, 40, 1);
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> val(-2.0, 2.0);
        std::uniform_int_distribution<int> size(1, 5);
        const auto nodes = disc.space->grid().nodes();
        const std::vector<double> pts(nodes.begin(), nodes.end());
        std::size_t mismatches = 0;
        for (int trial = 0; trial < 200; ++trial) {
            auto make = [&](int k) {
                std::vector<StateFunction> set;
                std::vector<std::vector<double>> raw;
                for (int i = 0; i < k; ++i) {
                    std::vector<double> c(disc.space->dim());
                    for (auto& x : c) x = val(rng);
                    raw.push_back(c);
                    set.emplace_back(SplineFunction(disc.space, std::move(c)), 0);
                }
                return std::pair{set, raw};
            };
            const auto [A, rawA] = make(size(rng));
            const auto [B, rawB] = make(size(rng));
            double brute = 0.0;
            for (const auto& a : rawA) {
                double nearest = INFINITY;
                for (const auto& b : rawB) {
                    double d = 0.0;
                    for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
                    nearest = std::min(nearest, d);
                }
                brute = std::max(brute, nearest);
            }
            if (hausdorff_semidist(A, B, pts) != brute) ++mismatches;
        }
        v.require(mismatches == 0, fmt("Hausdorff semidistance equals brute force on 200 random set pairs (%zu mismatches)",
                                       mismatches));
        const auto constant = [&](double c) { return StateFunction::constant(disc, c, 0); };
        const std::vector<StateFunction> A{constant(0.0), constant(3.0)}, B{constant(1.0)};
        const double ab = hausdorff_semidist(A, B, pts), ba = hausdorff_semidist(B, A, pts);
        v.require(ab == 2.0 && ba == 1.0, fmt("dist({0,3},{1}) = %g, dist({1},{0,3}) = %g (expected 2 and 1)", ab, ba));
    }

    // absorbing radius against 200-term partial sums
    {
        const double tol = 1e-10;
        const IdeModel m = beverton_holt_setup(0.5);
        const SupIntegralGrid grid = SupIntegralGrid::uniform(m.habitat);
        const double p = 1.0;
        const auto coeffs = growth_coefficients(m, default_zeta(m, p, -64, 0, grid), grid);
        for (Time tau : {0, 9}) {
            const auto r = absorbing_radius(coeffs, p, Direction::pullback, tau, tol);
            double sum = 0.0, prod = 1.0;
            for (int k = 0; k < 200; ++k) {
                const auto [a, b] = coeffs(tau - 1 - k);
                sum += b * prod;
                prod *= p * a;
            }
            const double partial = p * sum;
            v.require(std::abs(r.R - partial) <= tol,
                      fmt("pullback R_%d = %.15f vs partial sum %.15f, |diff| = %.1e <= %.0e", static_cast<int>(tau), r.R,
                          partial, std::abs(r.R - partial), tol));
        }
        const RickerSetup ricker;
        const IdeModel rm = ricker.frozen();
        const SupIntegralGrid rg = SupIntegralGrid::uniform(rm.habitat);
        const auto rc = growth_coefficients(rm, default_zeta(rm, p, 0, 64, rg), rg);
        const auto r = absorbing_radius(rc, p, Direction::forward, 0, tol);
        double S = 0.0;
        for (Time t = 0; t < 200; ++t) {
            const auto [a, b] = rc(t);
            S = p * a * S + b;
        }
        v.require(std::abs(r.R - p * S) <= tol, fmt("forward R_0 = %.15f vs 200-step recursion %.15f", r.R, p * S));
    }

    // global error bound, hand-expanded
    {
        ErrorModel em;
        em.gamma = [](double h) { return h * h; };
        em.C = [](double r) { return r; };
        em.ell = [](Time, double r) { return r; };
        em.neighbourhood = 1.0;
        const auto radius = [](Time) { return 1.0; };
        const double g = 1.0 / 64.0;  // Gamma(1/8)
        const double zero = global_error_bound(em, radius, 3, 3, 8);
        const double one = global_error_bound(em, radius, 3, 4, 8);
        const double three = global_error_bound(em, radius, 3, 6, 8);
        v.require(zero == 0.0, fmt("tau = t gives %g (expected 0)", zero));
        v.require(one == g * 1.0, fmt("one step gives %.17g (expected Gamma C = %.17g)", one, g));
        // C = 1, ell = r + 1 = 2: 1 + 2 + 4
        v.require(three == 7.0 * g, fmt("three steps give %.17g (expected 7 Gamma = %.17g)", three, 7.0 * g));
    }
    return v;
}

} // namespace

int main() {
    report(1, "pullback convergence rates of the Beverton-Holt table", table_reproduction);
    report(2, "spline projection orders for sin on [-3, 3]", projection_orders);
    report(3, "projection stability below p", projection_stability);
    report(4, "boundedness, Lipschitz and order preservation of F_t^n", operator_contracts);
    report(5, "Ricker forward limit", ricker_forward_limit);
    report(6, "positive invariance of absorbing balls", absorbing_invariance);
    report(7, "oracle equivalences", oracles);
    std::printf("%s: %d of 7 criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
