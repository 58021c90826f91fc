#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "thermodemon/gas.hpp"

using namespace thermodemon;
using namespace thermodemon::gas;

namespace
{

// Kolmogorov–Smirnov distance of samples from a continuous CDF.
template <class Cdf>
double ks_distance(std::vector<double> xs, Cdf cdf)
{
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        const double f = cdf(xs[i]);
        d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
    }
    return d;
}

}  // namespace

TEST_CASE("free flight")
{
    Rng rng(1);
    BoxWorld w;
    w.x = 0.2;
    w.v = 0.1;
    step_dynamics(w, 1.0, rng);
    CHECK(w.x == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(w.wall_collisions == 0);
}

TEST_CASE("thermal wall speeds follow the flux-weighted Maxwell law")
{
    Rng rng(2);
    BoxWorld w = make_world(rng, 1.0, 1.5);
    std::vector<double> speeds;
    while (speeds.size() < 20000)
    {
        const auto before = w.wall_collisions;
        step_dynamics(w, 1e-3, rng);
        if (w.wall_collisions == before + 1) speeds.push_back(std::abs(w.v));
    }
    // p(s) ∝ s·exp(−s²/2T) integrates to 1 − exp(−s²/2T).
    const double T = 1.5;
    const double d = ks_distance(speeds, [&](double s) { return 1.0 - std::exp(-s * s / (2.0 * T)); });
    CHECK(d < 1.63 / std::sqrt(static_cast<double>(speeds.size())));
}

TEST_CASE("equipartition: time-averaged kinetic energy is T/2")
{
    Rng rng(3);
    const double T = 1.0;
    BoxWorld w = make_world(rng, 1.0, T);
    const std::size_t batches = 50, per_batch = 20000;
    std::vector<double> means;
    for (std::size_t b = 0; b < batches; ++b)
    {
        double s = 0.0;
        for (std::size_t k = 0; k < per_batch; ++k)
        {
            step_dynamics(w, 0.05, rng);
            s += w.kinetic_energy();
        }
        means.push_back(s / per_batch);
    }
    double m = 0, m2 = 0;
    for (double x : means)
    {
        m += x;
        m2 += x * x;
    }
    m /= batches;
    const double se = std::sqrt((m2 / batches - m * m) / (batches - 1));
    CHECK(std::abs(m - 0.5 * T) < 2.576 * se);
}

TEST_CASE("isothermal compression by two and by four")
{
    EnsembleConfig c;
    c.trajectories = 2000;
    c.speed = 0.005;
    c.master_seed = 42;
    const auto s2 = summarize(run_volume_change_ensemble(c));
    CHECK(s2.mean_work_on_gas == doctest::Approx(std::log(2.0)).epsilon(0.05));
    CHECK(s2.max_bookkeeping_error < 1e-9);

    // Oracle for factor 4: integrate the measured equilibrium pressure over volume (Simpson).
    const int k = 12;
    const double v0 = 1.0, v1 = 0.25, h = (v0 - v1) / k;
    double integral = 0.0;
    for (int i = 0; i <= k; ++i)
    {
        const double v = v1 + i * h;
        Rng rng(derive_seed(9, i));
        const auto p = pressure_estimate(make_world(rng, v, 1.0), 2e4, rng);
        integral += (i == 0 || i == k ? 1.0 : (i % 2 ? 4.0 : 2.0)) * p.mean;
    }
    integral *= h / 3.0;
    CHECK(integral == doctest::Approx(std::log(4.0)).epsilon(0.03));

    c.factor = 4.0;
    const auto s4 = summarize(run_volume_change_ensemble(c));
    CHECK(s4.mean_work_on_gas == doctest::Approx(integral).epsilon(0.05));
    CHECK(s4.max_bookkeeping_error < 1e-9);
}

TEST_CASE("finite speed dissipates: work falls toward the reversible value as the piston slows")
{
    EnsembleConfig c;
    c.trajectories = 2000;
    c.master_seed = 5;
    double prev = 1e9;
    for (double speed : {0.1, 0.03, 0.01})
    {
        c.speed = speed;
        const auto s = summarize(run_volume_change_ensemble(c));
        CHECK(s.mean_work_on_gas >= std::log(2.0) - 3 * s.stderr_work);
        CHECK(s.mean_work_on_gas < prev);
        prev = s.mean_work_on_gas;
    }
}

TEST_CASE("volume change edge cases")
{
    Rng rng(4);
    BoxWorld w = make_world(rng);
    const auto r = isothermal_volume_change(w, {PistonSide::right, 1.0, 1.0, 0.01}, rng);
    CHECK(r.work_on_gas == 0.0);
    CHECK(r.heat_from_bath == 0.0);
    CHECK_THROWS_AS(isothermal_volume_change(w, {PistonSide::right, 1.0, 0.5, 0.0}, rng), PreconditionError);
    CHECK_THROWS_AS(isothermal_volume_change(w, {PistonSide::right, 0.9, 0.5, 0.01}, rng), PreconditionError);
    CHECK_THROWS_AS(isothermal_volume_change(w, {PistonSide::right, 1.0, 0.0, 0.01}, rng), PreconditionError);
}

TEST_CASE("partition insertion, removal and free piston moves")
{
    Rng rng(6);
    BoxWorld w = make_world(rng);
    w.x = 0.3;
    w.v = 0.7;
    insert_partition(w, 0.5);
    CHECK(measure_side(w).side == Side::L);
    CHECK(measure_side(w).cost == OperationCost{});
    const auto paid = measure_side(w, 1.0);
    CHECK(paid.cost.env_entropy == 1.0);
    CHECK(paid.cost.work == doctest::Approx(ln2));
    for (int i = 0; i < 1000; ++i)
    {
        step_dynamics(w, 0.01, rng);
        REQUIRE(w.x <= 0.5);
    }
    const double before = w.work_on_gas;
    advance_piston_free(w, PistonSide::right, 0.5);
    CHECK(w.work_on_gas == before);
    CHECK_THROWS_AS(advance_piston_free(w, PistonSide::left, 0.2), PreconditionError);
    remove_partition(w);
    CHECK_THROWS_AS(remove_partition(w), PreconditionError);

    BoxWorld r = make_world(rng);
    r.x = 0.8;
    insert_partition(r, 0.5);
    CHECK(measure_side(r).side == Side::R);
    remove_partition(r);
    CHECK(r.accessible_length() == doctest::Approx(1.0));
    CHECK_THROWS_AS(insert_partition(r, r.x), PreconditionError);
    CHECK_THROWS_AS(insert_partition(r, 1.5), PreconditionError);
}

TEST_CASE("pressure and free energy")
{
    Rng rng(8);
    CHECK(pressure_estimate(make_world(rng, 1.0), 2e4, rng).mean == doctest::Approx(1.0).epsilon(0.05));
    CHECK(pressure_estimate(make_world(rng, 2.0), 2e4, rng).mean == doctest::Approx(0.5).epsilon(0.05));
    CHECK_THROWS_AS(pressure_estimate(make_world(rng), 0.0, rng), PreconditionError);
    CHECK(free_energy_delta(1, 1, 0.5) == doctest::Approx(std::log(2.0)));
    CHECK(free_energy_delta(1, 1, 1) == 0.0);
    // Oracle: T·ΔS with ΔS = −ln 2 at T = 2.
    CHECK(free_energy_delta(2, 1, 0.5) == doctest::Approx(2.0 * std::log(2.0)));
}

TEST_CASE("trajectory csv is deterministic")
{
    EnsembleConfig c;
    c.trajectories = 50;
    c.master_seed = 3;
    CHECK(trajectories_csv(run_volume_change_ensemble(c)) == trajectories_csv(run_volume_change_ensemble(c)));
}
