#include <doctest.h>

#include <cmath>

#include "thermodemon/szilard.hpp"

using namespace thermodemon;
using namespace thermodemon::szilard;

namespace
{

std::vector<double> s_trace(const ledger::Ledger& l)
{
    std::vector<double> v;
    for (const auto& e : l.entries()) v.push_back(e.s_sys_bits);
    return v;
}

std::vector<double> env_trace(const ledger::Ledger& l)
{
    std::vector<double> v;
    for (const auto& e : l.entries()) v.push_back(e.ds_env_bits);
    return v;
}

}  // namespace

TEST_CASE("ideal cycle trace")
{
    const auto r = run_cycles({}, 1, 1).front();
    const std::vector<double> s{1, 1, 1, 2, 1}, env{0, 0, 0, -1, 1};
    const auto st = s_trace(r.ledger), et = env_trace(r.ledger);
    REQUIRE(st.size() == 5);
    for (std::size_t i = 0; i < 5; ++i)
    {
        CHECK(std::abs(st[i] - s[i]) < 1e-9);
        CHECK(std::abs(et[i] - env[i]) < 1e-9);
    }
    CHECK(r.audit.ok());
    CHECK(std::abs(r.audit.cumulative_ds_total_bits) < 1e-9);
    CHECK(std::abs(r.net_work) < 1e-12);
    CHECK(r.audit.cycle_closed);
}

TEST_CASE("skipping the reset leaves an open cycle")
{
    const auto r = run_cycles({}, 1, 1, true).front();
    CHECK(r.ledger.final_entropy_bits() == doctest::Approx(2.0));
    CHECK_FALSE(r.audit.cycle_closed);
}

TEST_CASE("phases follow the cycle order")
{
    Rng rng(3);
    Engine e({}, rng);
    CHECK_THROWS_AS(e.measure_and_record(rng), PreconditionError);
    e.insert_partition(rng);
    CHECK_THROWS_AS(e.insert_partition(rng), PreconditionError);
    e.measure_and_record(rng);
    // Memory correlates with the side.
    CHECK((e.memory().value() == MemoryValue::ML) == (e.molecule_side() == Side::L));
    e.compress_empty_side(rng);
    CHECK(e.trace().back() == "remove_partition");
    e.isothermal_expansion(rng);
    CHECK(e.macrostate().total_cells() == 4);
    e.reset_memory_blind(rng);
    CHECK(e.memory().value() == MemoryValue::Z0);
    CHECK(e.reset_cost() == OperationCost::landauer(1.0));
    CHECK_THROWS_AS(e.reset_memory_blind(rng), PreconditionError);
    e.rearm(rng);
    CHECK(e.phase() == Phase::Ready);
}

TEST_CASE("memory erasure issues the same operations for L and R")
{
    Rng rng(4);
    EngineConfig c;
    MemoryRegister left, right, zero;
    left.set(MemoryValue::ML, rng);
    right.set(MemoryValue::MR, rng);
    const auto a = erase_pointer(left, c, rng);
    const auto b = erase_pointer(right, c, rng);
    CHECK(a.operations == b.operations);
    CHECK(a.cost == OperationCost::landauer(1.0));
    CHECK(b.cost == OperationCost::landauer(1.0));
    CHECK_THROWS_AS(erase_pointer(zero, c, rng), PreconditionError);

    c.mode = Mode::physical;
    const auto p = erase_pointer(right, c, rng);
    CHECK(MemoryRegister::region_of(p.final_pointer) == MemoryValue::Z0);
    CHECK(p.bookkeeping_error < 1e-9);
}

TEST_CASE("measurement with a configured cost")
{
    EngineConfig c;
    c.measurement_cost_bits = 1.0;
    const auto r = run_cycles(c, 1, 2).front();
    CHECK(r.ledger.entries()[1].ds_env_bits == 1.0);
    CHECK(r.measurement_cost.work == doctest::Approx(ln2));
    CHECK(r.audit.ok());
}

TEST_CASE("physical cycles")
{
    EngineConfig c;
    c.mode = Mode::physical;
    c.piston_speed = 0.01;
    const auto cycles = run_cycles(c, 500, 11);
    double w = 0.0, reset = 0.0, err = 0.0;
    for (const auto& r : cycles)
    {
        w += r.work_extracted;
        reset += r.reset_cost.env_entropy;
        err = std::max(err, r.max_bookkeeping_error);
        CHECK_FALSE(r.aborted);
    }
    w /= 500.0;
    reset /= 500.0;
    // Oracle: slower expansions extract more, up to ln 2.
    EngineConfig slow = c;
    slow.piston_speed = 0.002;
    double w_slow = 0.0;
    for (const auto& r : run_cycles(slow, 500, 11)) w_slow += r.work_extracted / 500.0;
    CHECK(w <= ln2);
    CHECK(w == doctest::Approx(ln2).epsilon(0.05));
    CHECK(w_slow > w - 0.01);
    CHECK(reset >= 0.97);
    CHECK(err < 1e-9);
}

TEST_CASE("a wrong record aborts with positive work")
{
    EngineConfig c;
    c.mode = Mode::physical;
    c.measurement_error = 1.0;
    const auto r = run_cycles(c, 20, 5);
    for (const auto& x : r)
    {
        CHECK(x.aborted);
        CHECK_FALSE(x.measurement_correct);
        CHECK(x.work_extracted < 0.0);
        CHECK(x.max_bookkeeping_error < 1e-9);
    }
}

TEST_CASE("cycles csv")
{
    const auto csv = cycles_csv(run_cycles({}, 2, 1));
    CHECK(csv.rfind(cycle_csv_header, 0) == 0);
}
