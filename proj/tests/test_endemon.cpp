#include <doctest.h>

#include <cmath>

#include "thermodemon/endemon.hpp"

using namespace thermodemon;
using namespace thermodemon::endemon;

TEST_CASE("ideal cycle: both subroutines net ln 2 and reduce entropy by one bit")
{
    bool saw_left = false, saw_right = false;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        Rng g(derive_seed(seed, 0)), m(derive_seed(seed, 1));
        TwoStateMemory mem;
        const auto o = run_en_cycle({}, mem, g, m);
        CHECK(mem.value == Side::L);
        CHECK(o.memory_correct);
        CHECK(o.net_work == doctest::Approx(ln2).epsilon(1e-12));
        const auto a = ideal_ledger_check(o);
        REQUIRE(a.violations.size() == 1);
        CHECK(a.min_ds_total_bits == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(o.branch == (o.molecule_side == Side::L ? Branch::L_subroutine : Branch::R_subroutine));
        saw_left |= o.molecule_side == Side::L;
        saw_right |= o.molecule_side == Side::R;
        for (const auto& op : o.trace) CHECK(op.find("compress_memory") == std::string::npos);
    }
    CHECK(saw_left);
    CHECK(saw_right);
}

TEST_CASE("violations add up and the blind reset removes them")
{
    const auto many = run_en_cycles({}, {}, 10, 4);
    double sum = 0.0;
    for (const auto& o : many) sum += ideal_ledger_check(o).violation_bits();
    CHECK(sum == doctest::Approx(-10.0).epsilon(1e-12));
    CHECK(summarize(many, {}).violation_bits == doctest::Approx(sum));

    ENConfig blind;
    blind.substitute_blind_reset = true;
    for (const auto& o : run_en_cycles(blind, {}, 10, 4))
    {
        CHECK(ideal_ledger_check(o).ok());
        CHECK(std::abs(o.net_work) < 1e-12);
    }
}

TEST_CASE("memory must start at L")
{
    Rng g(1), m(2);
    TwoStateMemory mem{Side::R};
    CHECK_THROWS_AS(run_en_cycle({}, mem, g, m), PreconditionError);
    ENConfig bad;
    bad.error.p_err = 1.5;
    mem.value = Side::L;
    CHECK_THROWS_AS(run_en_cycle(bad, mem, g, m), PreconditionError);
}

TEST_CASE("expected net work")
{
    CHECK(expected_net_work(0.0, 17.0) == doctest::Approx(ln2));
    CHECK(expected_net_work(0.5, ln2) == 0.0);
    CHECK(expected_net_work(0.5, 1.0) < 0.0);
    for (double p = 0.0; p < 1.0; p += 0.1) CHECK(expected_net_work(p + 0.1, 1.0) < expected_net_work(p, 1.0));

    // Oracle: Bernoulli Monte Carlo over 1e5 branches.
    Rng rng(99);
    const int n = 100000;
    const double w_wrong = 2.0, p = 0.3;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i)
    {
        const double x = rng.bernoulli(p) ? -w_wrong : ln2;
        s += x;
        s2 += x * x;
    }
    const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / (n - 1));
    CHECK(std::abs(mean - expected_net_work(p, w_wrong)) < 3.0 * se);
}

TEST_CASE("cycles with record errors match the expectation")
{
    ENConfig c;
    c.error.p_err = 0.5;
    c.error.w_wrong = ln2;
    const auto out = run_en_cycles(c, {}, 20000, 8);
    const auto s = summarize(out, c);
    CHECK(s.expected_net_work == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(s.mean_net_work - s.expected_net_work) < 3.0 * s.stderr_net_work);
    CHECK(s.observed_error_rate == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("physical wrong branch costs the measured push")
{
    ENConfig c;
    c.mode = Mode::physical;
    c.error.p_err = 1.0;
    const auto out = run_en_cycles(c, {}, 50, 9);
    for (const auto& o : out)
    {
        CHECK_FALSE(o.memory_correct);
        CHECK(-o.net_work > c.error.work_cap);
        CHECK(-o.net_work < c.error.work_cap + 1.0);
        CHECK(o.max_bookkeeping_error < 1e-9);
        CHECK(o.audit.ok());
    }
}

TEST_CASE("thermal memory")
{
    Rng rng(5);
    TwoStateMemory frozen{Side::L, std::numeric_limits<double>::infinity(), 1.0};
    for (int i = 0; i < 1000; ++i) frozen = thermal_memory_step(frozen, 10.0, 1.0, rng);
    CHECK(frozen.value == Side::L);

    // Barrier 5 kT, r·dt = 0.01: flip probability 1 − exp(−0.01).
    TwoStateMemory m{Side::L, 5.0, 1.0};
    const double dt = 0.01 / std::exp(-5.0);
    int flips = 0;
    const int n = 400000;
    for (int i = 0; i < n; ++i)
    {
        TwoStateMemory x = m;
        flips += thermal_memory_step(x, dt, 1.0, rng).value == Side::R;
    }
    const double p = -std::expm1(-0.01);
    CHECK(std::abs(static_cast<double>(flips) / n - p) < 4.0 * std::sqrt(p * (1 - p) / n));

    CHECK(std::abs(empirical_p_err({Side::L, 0.0, 1.0}, 1.0, 1.0, 50, 20000, 3) - 0.5) < 0.02);
    CHECK_THROWS_AS(thermal_memory_step(m, 0.0, 1.0, rng), PreconditionError);
    CHECK(hold_flip_probability({Side::L, 0.0, 1.0}, 1e6, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("csv columns")
{
    const auto csv = cycles_csv(run_en_cycles({}, {}, 2, 1));
    CHECK(csv.rfind("cycle,branch,memory_correct,net_work_kT,violation_bits\n", 0) == 0);
    CHECK(csv.find("-subroutine,1,") != std::string::npos);
}
