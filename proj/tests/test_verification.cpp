// Twin-trajectory Gronwall diagnostics, norm-bound hypotheses, functional
// inequalities with their analytic oracles, uniform-in-m decay, and the
// nested-truncation convergence study.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "nsdecay/verification.hpp"

using namespace nsdecay;

namespace {

SolverParams make_params(double nu, double dt, double t_end, Scheme scheme,
                         int sample_every = 1) {
    SolverParams p;
    p.nu = nu;
    p.dt = dt;
    p.t_end = t_end;
    p.scheme = scheme;
    p.sample_every = sample_every;
    return p;
}

}  // namespace

TEST_CASE("identical initial data gives exactly zero difference") {
    const auto basis = build_basis(2);
    const auto tensor = assemble_tensor(*basis);
    const auto forcing =
        make_forcing(Envelope::exponential(1.0), WeightsRule::LowestShell, *basis);
    const auto ic = project_initial(SpectrumSpec{1.0, 2.0, 4}, basis);
    const auto report = uniqueness_experiment(ic, ic, tensor, forcing,
                                              make_params(0.2, 1e-2, 2.0, Scheme::Rk4, 10));
    CHECK(report.h0 == 0.0);
    CHECK(report.gronwall_ok);
    for (double h : report.h) CHECK(h == 0.0);
    for (std::size_t i = 0; i < report.h.size(); ++i)
        CHECK(report.H[i] >= report.h[i]);
    CHECK(report.sup_norm_v > 0.0);
    CHECK(report.serrin_integral > 0.0);
}

TEST_CASE("perturbed initial data: linear log-growth with a stable rate") {
    const auto basis = build_basis(2);
    const auto tensor = assemble_tensor(*basis);
    const auto forcing = make_forcing(Envelope::zero(), WeightsRule::LowestShell, *basis);
    const auto params = make_params(0.1, 1e-3, 2.0, Scheme::Rk4, 50);
    const auto ic = project_initial(SpectrumSpec{1.0, 2.0, 4}, basis);

    auto perturbed = [&](double delta) {
        CoefficientState p = ic;
        p.c[0] += delta;
        return p;
    };
    const auto r1 = uniqueness_experiment(ic, perturbed(1e-6), tensor, forcing, params);
    const auto r2 = uniqueness_experiment(ic, perturbed(1e-7), tensor, forcing, params);

    CHECK(std::abs(r1.h0 - 1e-12) < 1e-20);
    CHECK(r1.gronwall_ok);
    CHECK(r2.gronwall_ok);
    CHECK(std::abs(r1.c_hat - r2.c_hat) <= 0.05 * std::abs(r1.c_hat));
    CHECK(r1.sup_norm_v > 0.0);
    CHECK(r1.serrin_integral > 0.0);
}

TEST_CASE("uniqueness experiment validates its inputs") {
    const auto b1 = build_basis(1);
    const auto b2 = build_basis(2);
    const auto tensor = assemble_tensor(*b1);
    const auto forcing = make_forcing(Envelope::zero(), WeightsRule::FirstMode, *b1);
    const auto ic1 = project_initial(std::vector<double>{1.0}, b1);
    const auto ic2 = project_initial(std::vector<double>{1.0}, b2);
    CHECK_THROWS_AS(uniqueness_experiment(ic1, ic2, tensor, forcing,
                                          make_params(0.1, 0.01, 1.0, Scheme::Rk4)),
                    ValidationError);
    CoefficientState shifted = ic1;
    shifted.t = 0.5;
    CHECK_THROWS_AS(uniqueness_experiment(ic1, shifted, tensor, forcing,
                                          make_params(0.1, 0.01, 1.0, Scheme::Rk4)),
                    ValidationError);
}

TEST_CASE("trajectory difference between dt and dt/2 shrinks 256x") {
    const auto basis = build_basis(2);
    const auto tensor = assemble_tensor(*basis);
    const auto forcing = make_forcing(Envelope::zero(), WeightsRule::LowestShell, *basis);
    const auto ic = project_initial(SpectrumSpec{4.0, 1.0, 17}, basis);

    auto final_at = [&](double dt) {
        return integrate(ic, tensor, forcing, make_params(0.3, dt, 1.0, Scheme::Rk4))
            .final_state.c;
    };
    auto h_between = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double h = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j)
            h += (a[j] - b[j]) * (a[j] - b[j]);
        return h;
    };
    const auto c1 = final_at(0.02), c2 = final_at(0.01), c3 = final_at(0.005);
    const double ratio = h_between(c1, c2) / h_between(c2, c3);
    CHECK(ratio >= 128.0);
    CHECK(ratio <= 512.0);
}

TEST_CASE("norm-bound report: zero and single-mode trajectories") {
    const auto basis = build_basis(1);
    const auto tensor = assemble_tensor(*basis);
    const auto forcing = make_forcing(Envelope::zero(), WeightsRule::FirstMode, *basis);

    const auto zero = integrate(project_initial(std::vector<double>{}, basis), tensor,
                                forcing, make_params(0.1, 0.01, 1.0, Scheme::Rk4, 10));
    const auto rz = dirichlet_norm_check(zero.trace, 1.0);
    CHECK(rz.sup_norm == 0.0);
    CHECK(rz.serrin_integral == 0.0);
    CHECK(rz.within);

    const auto single = integrate(project_initial(std::vector<double>{1.0}, basis),
                                  tensor, forcing,
                                  make_params(0.1, 0.01, 1.0, Scheme::Rk4, 10));
    const auto rs = dirichlet_norm_check(single.trace, 0.5);
    CHECK(rs.sup_norm == 1.0);  // attained at t = 0 under monotone decay
    CHECK(!rs.within);

    EnergyTrace empty;
    CHECK_THROWS_AS(dirichlet_norm_check(empty, 1.0), ValidationError);
}

TEST_CASE("Serrin-type integral converges for decaying forcing") {
    const auto basis = build_basis(2);
    const auto tensor = assemble_tensor(*basis);
    const double nu = 0.5;
    const auto forcing = make_forcing(Envelope::exponential(2.0 * nu),
                                      WeightsRule::LowestShell, *basis);
    const auto ic = project_initial(SpectrumSpec{1.0, 2.0, 8}, basis);

    auto serrin_at = [&](double t_end) {
        const auto run = integrate(ic, tensor, forcing,
                                   make_params(nu, 5e-3, t_end, Scheme::Rk4, 10));
        return dirichlet_norm_check(run.trace, 1e300).serrin_integral;
    };
    const double at25 = serrin_at(25.0);
    const double at50 = serrin_at(50.0);
    CHECK(std::abs(at50 - at25) <= 0.01 * at25);
}

TEST_CASE("Ladyzhenskaya ratio: analytic oracle and scale invariance") {
    const auto basis = build_basis(2);
    const int grid = 4 * basis->k_max + 1;

    // single cosine mode: integral of cos^4 gives r = sqrt(3/(2 V))
    CoefficientState single = project_initial(std::vector<double>{}, basis);
    for (int j = 0; j < basis->m(); ++j)
        if (basis->modes[j].k == Vec3i{1, 0, 0} && basis->modes[j].polarization == 1 &&
            basis->modes[j].parity == Parity::Cosine)
            single.c[j] = 1.0;
    const double oracle = 0.07776350497646633;  // sqrt(3/(2 (2 pi)^3))
    CHECK(std::abs(ladyzhenskaya_ratio(single, grid) - oracle) < 1e-10);

    const auto state = project_initial(SpectrumSpec{1.0, 1.0, 13}, basis);
    const double base = ladyzhenskaya_ratio(state, grid);
    for (double alpha : {1e-3, 1e3}) {
        CoefficientState scaled = state;
        for (double& c : scaled.c) c *= alpha;
        CHECK(std::abs(ladyzhenskaya_ratio(scaled, grid) - base) < 1e-10 * base);
    }

    CHECK_THROWS_AS(ladyzhenskaya_ratio(state, grid - 1), AliasingError);
    const auto zero = project_initial(std::vector<double>{}, basis);
    CHECK_THROWS_AS(ladyzhenskaya_ratio(zero, grid), DivisionError);
}

TEST_CASE("Ladyzhenskaya ratio across seeded random states") {
    const auto basis = build_basis(2);
    const int grid = 4 * basis->k_max + 1;
    double lo = 1e300, hi = 0.0;
    for (int seed = 0; seed < 100; ++seed) {
        const auto state =
            project_initial(SpectrumSpec{1.0, 1.0, static_cast<std::uint64_t>(seed)}, basis);
        const double r = ladyzhenskaya_ratio(state, grid);
        CHECK(std::isfinite(r));
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    CHECK(hi / lo <= 10.0);
    INFO("empirical Ladyzhenskaya constant range: " << lo << " .. " << hi);
}

TEST_CASE("Poincare ratio: equality on the lowest shell, lambda on others") {
    const auto basis = build_basis(2);
    CoefficientState lowest = project_initial(std::vector<double>{1.0}, basis);
    CHECK(poincare_check(lowest) == 1.0);

    CoefficientState second = project_initial(std::vector<double>{}, basis);
    for (int j = 0; j < basis->m(); ++j)
        if (basis->modes[j].lambda == 2.0) {
            second.c[j] = 1.0;
            break;
        }
    CHECK(poincare_check(second) == 2.0);

    double worst = 1e300;
    for (int seed = 0; seed < 1000; ++seed) {
        const auto state =
            project_initial(SpectrumSpec{1.0, 1.0, static_cast<std::uint64_t>(seed)}, basis);
        worst = std::min(worst, poincare_check(state));
    }
    CHECK(worst >= 1.0 - 1e-12);

    const auto zero = project_initial(std::vector<double>{}, basis);
    CHECK_THROWS_AS(poincare_check(zero), DivisionError);
}

TEST_CASE("uniform decay: unforced lowest-shell data is flat across m") {
    RefinementScenario scenario;
    scenario.coefficients = {0.4, -0.3, 0.5, 0.2, -0.1, 0.3, 0.25, -0.2, 0.15, 0.1, -0.35, 0.2};
    scenario.envelope = Envelope::zero();
    scenario.weights_rule = WeightsRule::LowestShell;
    scenario.params = make_params(1.0, 2e-3, 3.0, Scheme::IfRk4, 10);

    const auto table = uniform_decay_check(scenario, {1, 2}, 1.5);
    REQUIRE(table.sup_reweighted.size() == 2);
    double g0 = 0.0;
    for (double c : scenario.coefficients) g0 += c * c;
    for (double sup : table.sup_reweighted)
        CHECK(std::abs(sup - g0) < 1e-9);
    CHECK(table.bounded);
    CHECK(!table.increasing_trend);
}

TEST_CASE("uniform decay: forced runs stay bounded across truncations") {
    RefinementScenario scenario;
    scenario.coefficients = {0.4, -0.3, 0.5, 0.2, -0.1, 0.3, 0.25, -0.2, 0.15, 0.1, -0.35, 0.2};
    scenario.envelope = Envelope::exponential(2.0);  // = 2 gamma for nu = 1
    scenario.weights_rule = WeightsRule::LowestShell;
    scenario.params = make_params(1.0, 2e-3, 3.0, Scheme::IfRk4, 10);

    const auto table = uniform_decay_check(scenario, {1, 2}, 1.5);
    CHECK(table.bounded);
    CHECK(!table.increasing_trend);
}

TEST_CASE("uniform decay rejects slow envelopes and bad lists") {
    RefinementScenario scenario;
    scenario.coefficients = {1.0};
    scenario.params = make_params(1.0, 1e-2, 1.0, Scheme::IfRk4);

    scenario.envelope = Envelope::polynomial(2.0);
    CHECK_THROWS_AS(uniform_decay_check(scenario, {1, 2}), ValidationError);
    scenario.envelope = Envelope::exponential(1.0);  // k < 2 gamma
    CHECK_THROWS_AS(uniform_decay_check(scenario, {1, 2}), ValidationError);
    scenario.envelope = Envelope::zero();
    CHECK_THROWS_AS(uniform_decay_check(scenario, {2, 1}), ValidationError);
}

TEST_CASE("convergence study: single-wavevector data is truncation-exact") {
    const auto b1 = build_basis(1);
    RefinementScenario scenario;
    scenario.coefficients.assign(b1->m(), 0.0);
    for (int j = 0; j < b1->m(); ++j)
        if (b1->modes[j].k == Vec3i{1, 0, 0}) scenario.coefficients[j] = 0.7;
    scenario.envelope = Envelope::zero();
    scenario.weights_rule = WeightsRule::LowestShell;
    scenario.params = make_params(0.5, 1e-2, 1.0, Scheme::IfRk4, 10);

    const auto table = convergence_study(scenario, {1, 2}, {0.5, 1.0});
    for (const auto& d : table.diffs)
        for (double v : d) CHECK(v < 1e-10);
}

TEST_CASE("convergence study: smooth spectra refine monotonically") {
    RefinementScenario scenario;
    scenario.use_spectrum = true;
    scenario.spectrum = SpectrumSpec{1.0, 2.0, 29};
    scenario.envelope = Envelope::exponential(2.0);
    scenario.weights_rule = WeightsRule::LowestShell;
    scenario.params = make_params(1.0, 1e-3, 1.0, Scheme::IfRk4, 10);

    const auto table = convergence_study(scenario, {1, 2, 3}, {0.0, 1.0});
    REQUIRE(table.diffs.size() == 2);

    // at t = 0 the difference is exactly the truncated tail energy
    const auto largest = build_basis(3);
    const auto master = project_initial(scenario.spectrum, largest);
    const auto b1 = build_basis(1);
    const auto b2 = build_basis(2);
    double tail12 = 0.0;
    for (int j = b1->m(); j < b2->m(); ++j) tail12 += master.c[j] * master.c[j];
    CHECK(std::abs(table.diffs[0][0] - tail12) < 1e-12);

    // Cauchy differences at t = 1 shrink as the truncation refines
    CHECK(table.diffs[1][1] < table.diffs[0][1]);
}

TEST_CASE("convergence study validates checkpoints and nesting") {
    RefinementScenario scenario;
    scenario.coefficients = {1.0};
    scenario.params = make_params(0.5, 1e-2, 1.0, Scheme::IfRk4, 10);
    CHECK_THROWS_AS(convergence_study(scenario, {2, 1}, {1.0}), ValidationError);
    CHECK_THROWS_AS(convergence_study(scenario, {1, 2}, {0.333}), ValidationError);
    CHECK_THROWS_AS(convergence_study(scenario, {1, 2}, {}), ValidationError);
}
