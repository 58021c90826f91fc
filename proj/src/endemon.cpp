#include "thermodemon/endemon.hpp"

#include <algorithm>
#include <cmath>

#include "thermodemon/gas.hpp"
#include "thermodemon/io.hpp"
#include "thermodemon/parallel.hpp"

namespace thermodemon::endemon
{

using ledger::Macrostate;

std::string_view to_string(Branch b) { return b == Branch::L_subroutine ? "L-subroutine" : "R-subroutine"; }

namespace
{

std::string label(Side gas, Side memory) { return std::string("(") + side_char(gas) + "," + side_char(memory) + ")"; }

Macrostate start_state() { return Macrostate::uniform({label(Side::L, Side::L), label(Side::R, Side::L)}); }

Macrostate expanded_state()
{
    return Macrostate::uniform(
        {label(Side::L, Side::L), label(Side::L, Side::R), label(Side::R, Side::L), label(Side::R, Side::R)});
}

gas::PistonSide piston_facing(Side side) { return side == Side::L ? gas::PistonSide::left : gas::PistonSide::right; }

void validate(const ENConfig& c)
{
    if (!(c.temperature > 0.0) || !(c.length > 0.0) || !(c.piston_speed > 0.0))
        throw PreconditionError("endemon: temperature, length and piston speed must be positive");
    if (c.error.p_err < 0.0 || c.error.p_err > 1.0) throw PreconditionError("endemon: p_err outside [0, 1]");
    if (c.error.w_wrong && *c.error.w_wrong < 0.0) throw PreconditionError("endemon: W_wrong must be >= 0");
    if (!(c.error.work_cap > 0.0)) throw PreconditionError("endemon: work cap must be positive");
    if (c.hold_time < 0.0) throw PreconditionError("endemon: hold time must be >= 0");
}

}  // namespace

ENCycleOutcome run_en_cycle(const ENConfig& config, TwoStateMemory& memory, Rng& gas_rng, Rng& memory_rng)
{
    validate(config);
    if (memory.value != Side::L) throw PreconditionError("run_en_cycle: memory must hold L at cycle start");

    const double T = config.temperature;
    const bool physical = config.mode == Mode::physical;
    Macrostate state = start_state();
    ENCycleOutcome out;
    out.ledger = ledger::Ledger(state, config.mode);
    auto record = [&](std::string name, double env, double work_on, double heat)
    { out.ledger.record({std::move(name), ledger::entropy_bits(state), env, work_on, heat, config.mode}); };
    auto env_of = [&](double heat) { return -heat / (T * ln2); };

    gas::BoxWorld world = gas::make_world(gas_rng, config.length, T);
    const double mid = 0.5 * config.length;
    while (std::abs(world.x - mid) <= 1e-12 * config.length) gas::step_dynamics(world, 1e-3, gas_rng);
    gas::insert_partition(world, mid);
    out.trace.emplace_back("insert_partition");
    record("insert_partition", 0.0, 0.0, 0.0);

    out.molecule_side = gas::measure_side(world).side;
    // Detecting R switches the memory L→R; detecting L leaves it alone.
    if (out.molecule_side == Side::R) memory.value = Side::R;
    if (config.error.p_err > 0.0 && memory_rng.bernoulli(config.error.p_err)) memory.value = opposite(memory.value);
    if (config.hold_time > 0.0 && memory_rng.bernoulli(hold_flip_probability(memory, config.hold_time, T)))
        memory.value = opposite(memory.value);
    state = ledger::apply_bijective(state, {{label(Side::L, Side::L), label(Side::L, Side::L)},
                                            {label(Side::R, Side::L), label(Side::R, Side::R)}});
    out.trace.emplace_back(out.molecule_side == Side::R ? "measure_switch(L->R)" : "measure_switch(none)");
    record("measure", 0.0, 0.0, 0.0);

    out.branch = memory.value == Side::L ? Branch::L_subroutine : Branch::R_subroutine;
    out.memory_correct = memory.value == out.molecule_side;
    const Side empty = opposite(memory.value);
    out.trace.push_back(std::string("advance_piston(") + side_char(empty) + ")");

    if (!out.memory_correct)
    {
        // The piston meant for the empty half pushes on the molecule until the cap.
        double work = config.error.configured_wrong_cost();
        double heat = -work;
        if (physical && !config.error.w_wrong)
        {
            const double start = empty == Side::L ? world.piston_left : world.piston_right;
            const auto rec = gas::isothermal_volume_change(world, {piston_facing(empty), start, mid, config.piston_speed},
                                                           gas_rng, {config.error.work_cap});
            work = rec.work_on_gas;
            heat = rec.heat_from_bath;
            out.max_bookkeeping_error = rec.bookkeeping_error();
        }
        out.trace.emplace_back("abort");
        record("compress_empty_side(aborted)", env_of(heat), work, heat);
        out.trace.push_back(std::string("switch_memory(") + side_char(memory.value) + "->L)");
        memory.value = Side::L;
        record("reset_memory_state_dependent", 0.0, 0.0, 0.0);
        out.net_work = -work;
        out.audit = ledger::audit_second_law(out.ledger);
        return out;
    }

    gas::advance_piston_free(world, piston_facing(empty), mid);
    gas::remove_partition(world);
    out.trace.emplace_back("remove_partition");
    record("compress_empty_side", 0.0, 0.0, 0.0);

    double work_on = -T * ln2;
    double heat = T * ln2;
    if (physical)
    {
        const double start = empty == Side::L ? world.piston_left : world.piston_right;
        const double end = empty == Side::L ? 0.0 : config.length;
        const auto rec = gas::isothermal_volume_change(world, {piston_facing(empty), start, end, config.piston_speed}, gas_rng);
        work_on = rec.work_on_gas;
        heat = rec.heat_from_bath;
        out.max_bookkeeping_error = std::max(out.max_bookkeeping_error, rec.bookkeeping_error());
    }
    out.trace.push_back(std::string("isothermal_expansion(") + side_char(empty) + ")");
    state = ledger::expand_onto(state, expanded_state()).state;
    record("isothermal_expansion", env_of(heat), work_on, heat);
    out.net_work = -work_on;

    state = ledger::compress_onto(state, start_state()).state;
    if (config.substitute_blind_reset)
    {
        double reset_work = T * ln2;
        double reset_heat = -T * ln2;
        if (physical)
        {
            // Memory as a two-unit box: L ↦ [0,1), R ↦ [1,2), compressed onto [0,1).
            gas::BoxWorld box = gas::make_world(gas_rng, 2.0, T);
            box.x = (memory.value == Side::L ? 0.0 : 1.0) + gas_rng.uniform();
            const auto rec = gas::isothermal_volume_change(box, {gas::PistonSide::right, 2.0, 1.0, config.piston_speed}, gas_rng);
            reset_work = rec.work_on_gas;
            reset_heat = rec.heat_from_bath;
            out.max_bookkeeping_error = std::max(out.max_bookkeeping_error, rec.bookkeeping_error());
        }
        out.trace.emplace_back("compress_memory_blind");
        record("reset_memory_blind", env_of(reset_heat), reset_work, reset_heat);
        out.net_work -= reset_work;
    }
    else
    {
        out.trace.push_back(std::string("switch_memory(") + side_char(memory.value) + "->L)");
        record("reset_memory_state_dependent", 0.0, 0.0, 0.0);
    }
    memory.value = Side::L;
    out.audit = ledger::audit_second_law(out.ledger);
    return out;
}

ledger::AuditReport ideal_ledger_check(const ENCycleOutcome& outcome)
{
    if (outcome.ledger.mode() != Mode::ideal) throw PreconditionError("ideal_ledger_check needs an ideal-mode outcome");
    return ledger::audit_second_law(outcome.ledger);
}

double expected_net_work(double p_err, double w_wrong) { return (1.0 - p_err) * ln2 - p_err * w_wrong; }

TwoStateMemory thermal_memory_step(TwoStateMemory memory, double dt, double temperature, Rng& rng)
{
    if (!(dt > 0.0)) throw PreconditionError("thermal_memory_step: dt must be positive");
    if (!(temperature > 0.0)) throw PreconditionError("thermal_memory_step: temperature must be positive");
    const double rate = memory.attempt_rate * std::exp(-memory.barrier_height / temperature);
    const double p_flip = -std::expm1(-rate * dt);
    if (p_flip > 0.0 && rng.bernoulli(p_flip)) memory.value = opposite(memory.value);
    return memory;
}

double hold_flip_probability(const TwoStateMemory& memory, double time, double temperature)
{
    if (time < 0.0 || !(temperature > 0.0)) throw PreconditionError("hold_flip_probability: invalid time or temperature");
    const double rate = memory.attempt_rate * std::exp(-memory.barrier_height / temperature);
    return -0.5 * std::expm1(-2.0 * rate * time);
}

double empirical_p_err(const TwoStateMemory& memory, double dt, double temperature, std::size_t steps,
                       std::size_t samples, std::uint64_t seed)
{
    if (samples == 0) throw PreconditionError("empirical_p_err: no samples");
    std::vector<std::uint8_t> wrong(samples, 0);
    parallel_for(samples,
                 [&](std::size_t i)
                 {
                     Rng rng(derive_seed(seed, i, 3));
                     TwoStateMemory m = memory;
                     m.value = Side::L;
                     for (std::size_t s = 0; s < steps; ++s) m = thermal_memory_step(m, dt, temperature, rng);
                     wrong[i] = m.value != Side::L;
                 });
    std::size_t count = 0;
    for (auto w : wrong) count += w;
    return static_cast<double>(count) / static_cast<double>(samples);
}

std::vector<ENCycleOutcome> run_en_cycles(const ENConfig& config, const TwoStateMemory& memory, std::size_t n,
                                          std::uint64_t master_seed)
{
    validate(config);
    std::vector<ENCycleOutcome> out(n);
    parallel_for(n,
                 [&](std::size_t i)
                 {
                     Rng gas_rng(derive_seed(master_seed, i, 0));
                     Rng memory_rng(derive_seed(master_seed, i, 1));
                     TwoStateMemory m = memory;
                     m.value = Side::L;
                     out[i] = run_en_cycle(config, m, gas_rng, memory_rng);
                 });
    return out;
}

ENSummary summarize(const std::vector<ENCycleOutcome>& outcomes, const ENConfig& config, const TwoStateMemory& memory)
{
    ENSummary s;
    s.cycles = outcomes.size();
    s.work_cap = config.error.work_cap;
    if (outcomes.empty()) return s;
    double sum = 0.0, sum2 = 0.0, wrong_cost = 0.0;
    std::size_t wrong = 0;
    for (const auto& o : outcomes)
    {
        sum += o.net_work;
        sum2 += o.net_work * o.net_work;
        if (!o.memory_correct)
        {
            ++wrong;
            wrong_cost += -o.net_work;
        }
        const double v = o.audit.violation_bits();
        if (v < 0.0)
        {
            s.violation_bits += v;
            ++s.violating_cycles;
        }
    }
    const double n = static_cast<double>(outcomes.size());
    s.mean_net_work = sum / n;
    if (outcomes.size() > 1) s.stderr_net_work = std::sqrt(std::max(0.0, (sum2 - n * s.mean_net_work * s.mean_net_work) / (n - 1)) / n);
    s.observed_error_rate = static_cast<double>(wrong) / n;

    // The analytic expectation combines the record error with the hold-time flips.
    double p = config.error.p_err;
    if (config.hold_time > 0.0)
    {
        const double p_hold = hold_flip_probability(memory, config.hold_time, config.temperature);
        p = p * (1.0 - p_hold) + (1.0 - p) * p_hold;
    }
    const double w = config.error.w_wrong ? *config.error.w_wrong
                     : (config.mode == Mode::physical && wrong > 0) ? wrong_cost / static_cast<double>(wrong)
                                                                    : config.error.work_cap;
    const double gain = config.substitute_blind_reset ? 0.0 : config.temperature * ln2;
    s.expected_net_work = (1.0 - p) * gain - p * w;
    return s;
}

nlohmann::json to_json(const ENSummary& s)
{
    return {{"cycles", s.cycles},
            {"mean_net_work_kT", s.mean_net_work},
            {"stderr_net_work_kT", s.stderr_net_work},
            {"expected_net_work_kT", s.expected_net_work},
            {"observed_error_rate", s.observed_error_rate},
            {"violation_bits", s.violation_bits},
            {"violation_bits_per_cycle", s.cycles ? s.violation_bits / static_cast<double>(s.cycles) : 0.0},
            {"violating_cycles", s.violating_cycles},
            {"wrong_branch_work_cap_kT", s.work_cap}};
}

std::string cycles_csv(const std::vector<ENCycleOutcome>& outcomes)
{
    io::CsvWriter csv(cycle_csv_header);
    for (std::size_t i = 0; i < outcomes.size(); ++i)
    {
        const auto& o = outcomes[i];
        csv.field(i).field(to_string(o.branch)).field(o.memory_correct).field(o.net_work).field(o.audit.violation_bits()).end_row();
    }
    return csv.str();
}

}  // namespace thermodemon::endemon
