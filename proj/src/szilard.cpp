#include "thermodemon/szilard.hpp"

#include <algorithm>
#include <cmath>

#include "thermodemon/io.hpp"
#include "thermodemon/parallel.hpp"

namespace thermodemon::szilard
{

using ledger::Macrostate;

std::string_view to_string(MemoryValue v)
{
    switch (v)
    {
    case MemoryValue::Z0: return "0";
    case MemoryValue::ML: return "L";
    case MemoryValue::MR: return "R";
    }
    return "?";
}

std::string_view to_string(Phase p)
{
    switch (p)
    {
    case Phase::Ready: return "Ready";
    case Phase::Partitioned: return "Partitioned";
    case Phase::Measured: return "Measured";
    case Phase::Compressed: return "Compressed";
    case Phase::Expanded: return "Expanded";
    case Phase::Reset: return "Reset";
    }
    return "?";
}

MemoryValue MemoryRegister::region_of(double pointer)
{
    if (!(pointer >= 0.0 && pointer < 3.0)) throw PreconditionError("pointer outside the memory box");
    if (pointer < 1.0) return MemoryValue::ML;
    if (pointer < 2.0) return MemoryValue::Z0;
    return MemoryValue::MR;
}

void MemoryRegister::set(MemoryValue v, Rng& rng)
{
    const double base = v == MemoryValue::ML ? 0.0 : v == MemoryValue::Z0 ? 1.0 : 2.0;
    place(base + rng.uniform());
}

void MemoryRegister::place(double pointer)
{
    value_ = region_of(pointer);
    pointer_ = pointer;
}

std::string joint_label(Side gas, MemoryValue memory)
{
    return std::string("(") + side_char(gas) + "," + std::string(to_string(memory)) + ")";
}

namespace
{

Macrostate ready_state()
{
    return Macrostate::uniform({joint_label(Side::L, MemoryValue::Z0), joint_label(Side::R, MemoryValue::Z0)});
}

MemoryValue record_of(Side s) { return s == Side::L ? MemoryValue::ML : MemoryValue::MR; }

}  // namespace

Engine::Engine(EngineConfig config, Rng& rng)
    : config_(config), state_(ready_state()), ledger_(state_, config.mode)
{
    if (!(config_.temperature > 0.0) || !(config_.length > 0.0) || !(config_.piston_speed > 0.0))
        throw PreconditionError("engine temperature, length and piston speed must be positive");
    if (config_.measurement_error < 0.0 || config_.measurement_error > 1.0)
        throw PreconditionError("measurement error probability outside [0, 1]");
    world_ = gas::make_world(rng, config_.length, config_.temperature);
}

void Engine::require(Phase expected, const char* op) const
{
    if (phase_ != expected)
        throw PreconditionError(std::string(op) + " called in phase " + std::string(to_string(phase_)) + ", expected " +
                                std::string(to_string(expected)));
    if (aborted_) throw PreconditionError(std::string(op) + " called on an aborted cycle");
}

void Engine::record(const std::string& name, double ds_env, double work_on, double heat)
{
    ledger_.record({name, ledger::entropy_bits(state_), ds_env, work_on, heat, config_.mode});
}

void Engine::insert_partition(Rng& rng)
{
    require(Phase::Ready, "insert_partition");
    const double mid = 0.5 * config_.length;
    // Landing exactly on the molecule is rejected; let it move and retry.
    while (std::abs(world_.x - mid) <= 1e-12 * config_.length) gas::step_dynamics(world_, 1e-3, rng);
    gas::insert_partition(world_, mid);
    side_ = gas::measure_side(world_).side;
    trace_.emplace_back("insert_partition");
    record("insert_partition", 0.0, 0.0, 0.0);
    phase_ = Phase::Partitioned;
}

void Engine::measure_and_record(Rng& rng)
{
    require(Phase::Partitioned, "measure_and_record");
    const auto m = gas::measure_side(world_, config_.measurement_cost_bits);
    Side recorded = m.side;
    if (config_.measurement_error > 0.0 && rng.bernoulli(config_.measurement_error)) recorded = opposite(recorded);
    memory_.set(record_of(recorded), rng);
    measurement_cost_ = m.cost;

    // Copying the side into the memory: (L,0)→(L,L), (R,0)→(R,R).
    state_ = ledger::apply_bijective(state_, {{joint_label(Side::L, MemoryValue::Z0), joint_label(Side::L, MemoryValue::ML)},
                                              {joint_label(Side::R, MemoryValue::Z0), joint_label(Side::R, MemoryValue::MR)}});
    trace_.emplace_back("measure_copy");
    record("measure", m.cost.env_entropy, m.cost.work, -m.cost.work);
    phase_ = Phase::Measured;
}

void Engine::compress_empty_side(Rng& rng)
{
    require(Phase::Measured, "compress_empty_side");
    const bool memory_says_left = memory_.value() == MemoryValue::ML;
    // The piston on the side the memory calls empty.
    const gas::PistonSide piston = memory_says_left ? gas::PistonSide::right : gas::PistonSide::left;
    const double mid = 0.5 * config_.length;
    trace_.emplace_back(memory_says_left ? "advance_piston(right)" : "advance_piston(left)");

    const bool correct = record_of(side_) == memory_.value();
    if (correct)
    {
        if (config_.mode == Mode::physical)
        {
            gas::advance_piston_free(world_, piston, mid);
            gas::remove_partition(world_);
        }
        trace_.emplace_back("remove_partition");
        record("compress_empty_side", 0.0, 0.0, 0.0);
        phase_ = Phase::Compressed;
        return;
    }

    // The piston meets the gas. Physical mode measures the work until the cap.
    double work = config_.wrong_branch_work_cap;
    double heat = -work;
    if (config_.mode == Mode::physical)
    {
        const double start = memory_says_left ? world_.piston_right : world_.piston_left;
        const auto rec = gas::isothermal_volume_change(world_, {piston, start, mid, config_.piston_speed}, rng,
                                                       {config_.wrong_branch_work_cap});
        work = rec.work_on_gas;
        heat = rec.heat_from_bath;
        max_bookkeeping_error_ = std::max(max_bookkeeping_error_, rec.bookkeeping_error());
    }
    wrong_branch_work_ = work;
    aborted_ = true;
    record("compress_empty_side(aborted)", -heat / (config_.temperature * ln2), work, heat);
    phase_ = Phase::Compressed;
}

void Engine::isothermal_expansion(Rng& rng)
{
    require(Phase::Compressed, "isothermal_expansion");
    const double T = config_.temperature;
    const bool left_occupied = memory_.value() == MemoryValue::ML;
    trace_.emplace_back(left_occupied ? "isothermal_expansion(right)" : "isothermal_expansion(left)");

    double work_on = -T * ln2;
    double heat = T * ln2;
    if (config_.mode == Mode::physical)
    {
        const gas::PistonSide piston = left_occupied ? gas::PistonSide::right : gas::PistonSide::left;
        const double start = left_occupied ? world_.piston_right : world_.piston_left;
        const double end = left_occupied ? config_.length : 0.0;
        const auto rec = gas::isothermal_volume_change(world_, {piston, start, end, config_.piston_speed}, rng);
        work_on = rec.work_on_gas;
        heat = rec.heat_from_bath;
        max_bookkeeping_error_ = std::max(max_bookkeeping_error_, rec.bookkeeping_error());
    }
    work_extracted_ = -work_on;
    expansion_heat_ = heat;

    state_ = ledger::expand_onto(state_, Macrostate::uniform({joint_label(Side::L, MemoryValue::ML),
                                                              joint_label(Side::L, MemoryValue::MR),
                                                              joint_label(Side::R, MemoryValue::ML),
                                                              joint_label(Side::R, MemoryValue::MR)}))
                 .state;
    record("isothermal_expansion", -heat / (T * ln2), work_on, heat);
    phase_ = Phase::Expanded;
}

PointerResetRecord erase_pointer(const MemoryRegister& memory, const EngineConfig& config, Rng& rng)
{
    if (memory.value() == MemoryValue::Z0) throw PreconditionError("erase_pointer: memory already at 0");
    PointerResetRecord out;
    out.operations = {"relabel(L,0,R -> [0,1),[2,3),[1,2))", "isothermal_compress([0,2) -> [0,1))",
                      "relabel([0,1) -> 0)"};
    const double T = config.temperature;
    if (config.mode == Mode::ideal)
    {
        out.cost = OperationCost::landauer(1.0, T);
        out.heat_from_bath = -T * ln2;
        return out;
    }

    // Fixed relabeling: L stays at [0,1), R moves to [1,2), 0 moves out to [2,3).
    const double p = memory.pointer();
    gas::BoxWorld box = gas::make_world(rng, 2.0, T);
    box.x = p < 1.0 ? p : p - 1.0;
    const auto rec = gas::isothermal_volume_change(box, {gas::PistonSide::right, 2.0, 1.0, config.piston_speed}, rng);
    out.cost = {rec.work_on_gas, -rec.heat_from_bath / (T * ln2)};
    out.heat_from_bath = rec.heat_from_bath;
    out.bookkeeping_error = rec.bookkeeping_error();
    out.final_pointer = 1.0 + std::clamp(box.x, 0.0, std::nextafter(1.0, 0.0));
    return out;
}

void Engine::reset_memory_blind(Rng& rng)
{
    require(Phase::Expanded, "reset_memory_blind");
    const auto r = erase_pointer(memory_, config_, rng);
    for (const auto& op : r.operations) trace_.push_back(op);
    memory_.place(r.final_pointer);
    reset_cost_ = r.cost;
    reset_heat_ = r.heat_from_bath;
    max_bookkeeping_error_ = std::max(max_bookkeeping_error_, r.bookkeeping_error);
    state_ = ledger::compress_onto(state_, ready_state()).state;
    record("reset_memory", r.cost.env_entropy, r.cost.work, r.heat_from_bath);
    phase_ = Phase::Reset;
}

void Engine::start_cycle(Rng& rng)
{
    if (aborted_ || config_.mode == Mode::ideal) world_ = gas::make_world(rng, config_.length, config_.temperature);
    memory_ = MemoryRegister{};
    state_ = ready_state();
    ledger_ = ledger::Ledger(state_, config_.mode);
    trace_.clear();
    aborted_ = false;
    work_extracted_ = expansion_heat_ = reset_heat_ = wrong_branch_work_ = max_bookkeeping_error_ = 0.0;
    measurement_cost_ = reset_cost_ = {};
    phase_ = Phase::Ready;
}

void Engine::rearm(Rng& rng)
{
    if (phase_ != Phase::Reset && !aborted_)
        throw PreconditionError("rearm called in phase " + std::string(to_string(phase_)));
    start_cycle(rng);
}

CycleResult run_cycle(Engine& engine, Rng& rng, bool skip_reset)
{
    if (engine.phase() != Phase::Ready || engine.aborted())
        throw PreconditionError("run_cycle needs a Ready engine, got " + std::string(to_string(engine.phase())));

    engine.insert_partition(rng);
    engine.measure_and_record(rng);
    engine.compress_empty_side(rng);
    if (!engine.aborted())
    {
        engine.isothermal_expansion(rng);
        if (!skip_reset) engine.reset_memory_blind(rng);
    }

    CycleResult r;
    r.work_extracted = engine.aborted() ? -engine.wrong_branch_work() : engine.work_extracted();
    r.heat_from_bath = engine.ledger().total_heat_kT();
    r.reset_cost = engine.reset_cost();
    r.measurement_cost = engine.measurement_cost();
    r.net_work = r.work_extracted - r.reset_cost.work - r.measurement_cost.work;
    r.audit = ledger::audit_second_law(engine.ledger());
    r.ledger = engine.ledger();
    r.trace = engine.trace();
    r.molecule_side = engine.molecule_side();
    // A wrong record always runs into the gas and aborts.
    r.measurement_correct = !engine.aborted();
    r.aborted = engine.aborted();
    r.max_bookkeeping_error = engine.max_bookkeeping_error();

    if (!skip_reset) engine.rearm(rng);
    return r;
}

std::vector<CycleResult> run_cycles(const EngineConfig& config, std::size_t n, std::uint64_t master_seed, bool skip_reset)
{
    std::vector<CycleResult> out(n);
    parallel_for(n,
                 [&](std::size_t i)
                 {
                     Rng rng(derive_seed(master_seed, i));
                     Engine engine(config, rng);
                     out[i] = run_cycle(engine, rng, skip_reset);
                 });
    return out;
}

std::string cycles_csv(const std::vector<CycleResult>& cycles)
{
    io::CsvWriter csv(cycle_csv_header);
    for (std::size_t i = 0; i < cycles.size(); ++i)
    {
        const auto& c = cycles[i];
        csv.field(i).field(c.work_extracted).field(c.heat_from_bath).field(c.reset_cost.env_entropy).field(c.audit.ok()).end_row();
    }
    return csv.str();
}

}  // namespace thermodemon::szilard
