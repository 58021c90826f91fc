#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thermodemon/core.hpp"
#include "thermodemon/gas.hpp"
#include "thermodemon/ledger.hpp"
#include "thermodemon/random.hpp"

namespace thermodemon::szilard
{

enum class MemoryValue
{
    Z0,
    ML,
    MR
};

std::string_view to_string(MemoryValue v);

/// The demon's memory: a pointer molecule in a box of three unit regions laid
/// out as L | 0 | R. The value is the region holding the pointer.
class MemoryRegister
{
public:
    MemoryRegister() = default;

    [[nodiscard]] MemoryValue value() const { return value_; }
    [[nodiscard]] double pointer() const { return pointer_; }
    /// Places the pointer uniformly inside the region for v.
    void set(MemoryValue v, Rng& rng);
    /// Puts the pointer at an exact position in [0, 3).
    void place(double pointer);

    static MemoryValue region_of(double pointer);

private:
    MemoryValue value_ = MemoryValue::Z0;
    double pointer_ = 1.5;
};

enum class Phase
{
    Ready,
    Partitioned,
    Measured,
    Compressed,
    Expanded,
    Reset
};

std::string_view to_string(Phase p);

struct EngineConfig
{
    Mode mode = Mode::ideal;
    double temperature = 1.0;
    double length = 1.0;
    double piston_speed = 0.01;          ///< physical mode: fraction of the thermal speed
    double measurement_cost_bits = 0.0;  ///< optional Brillouin-style price per measurement
    double measurement_error = 0.0;      ///< probability the record is the wrong side
    double wrong_branch_work_cap = 3.0;  ///< kT; abort threshold when a piston meets the gas
};

/// Joint labels for the six gas × memory regions, e.g. "(L,0)".
std::string joint_label(Side gas, MemoryValue memory);

/// One Szilard engine: a box, a three-region memory, a ledger of the cycle,
/// and a trace of the operations issued.
class Engine
{
public:
    Engine(EngineConfig config, Rng& rng);

    [[nodiscard]] Phase phase() const { return phase_; }
    [[nodiscard]] const EngineConfig& config() const { return config_; }
    [[nodiscard]] const gas::BoxWorld& world() const { return world_; }
    [[nodiscard]] const MemoryRegister& memory() const { return memory_; }
    [[nodiscard]] const ledger::Ledger& ledger() const { return ledger_; }
    [[nodiscard]] const ledger::Macrostate& macrostate() const { return state_; }
    [[nodiscard]] const std::vector<std::string>& trace() const { return trace_; }
    /// Side of the molecule once partitioned.
    [[nodiscard]] Side molecule_side() const { return side_; }
    [[nodiscard]] bool aborted() const { return aborted_; }

    void insert_partition(Rng& rng);
    void measure_and_record(Rng& rng);
    void compress_empty_side(Rng& rng);
    void isothermal_expansion(Rng& rng);
    void reset_memory_blind(Rng& rng);

    /// Returns a Reset (or aborted) engine to Ready with a fresh ledger.
    void rearm(Rng& rng);

    // Quantities of the current cycle.
    [[nodiscard]] double work_extracted() const { return work_extracted_; }
    [[nodiscard]] double expansion_heat() const { return expansion_heat_; }
    [[nodiscard]] OperationCost measurement_cost() const { return measurement_cost_; }
    [[nodiscard]] OperationCost reset_cost() const { return reset_cost_; }
    [[nodiscard]] double reset_heat() const { return reset_heat_; }
    [[nodiscard]] double wrong_branch_work() const { return wrong_branch_work_; }
    [[nodiscard]] double max_bookkeeping_error() const { return max_bookkeeping_error_; }

private:
    void require(Phase expected, const char* op) const;
    void record(const std::string& name, double ds_env, double work_on, double heat);
    void start_cycle(Rng& rng);

    EngineConfig config_;
    Phase phase_ = Phase::Ready;
    gas::BoxWorld world_;
    MemoryRegister memory_;
    ledger::Macrostate state_;
    ledger::Ledger ledger_;
    std::vector<std::string> trace_;
    Side side_ = Side::L;
    bool aborted_ = false;
    double work_extracted_ = 0.0;
    double expansion_heat_ = 0.0;
    OperationCost measurement_cost_;
    OperationCost reset_cost_;
    double reset_heat_ = 0.0;
    double wrong_branch_work_ = 0.0;
    double max_bookkeeping_error_ = 0.0;
};

struct PointerResetRecord
{
    OperationCost cost;
    double heat_from_bath = 0.0;
    double bookkeeping_error = 0.0;
    double final_pointer = 1.5;  ///< inside region 0
    std::vector<std::string> operations;
};

/// State-independent erasure of a pointer in L ∪ R: a fixed relabeling makes
/// L ∪ R contiguous, an isothermal compression halves it, and the survivor is
/// relabeled as region 0. The issued operations never depend on the value.
PointerResetRecord erase_pointer(const MemoryRegister& memory, const EngineConfig& config, Rng& rng);

struct CycleResult
{
    double work_extracted = 0.0;  ///< kT delivered by the gas during expansion
    double heat_from_bath = 0.0;  ///< net heat over the cycle
    OperationCost reset_cost;
    OperationCost measurement_cost;
    double net_work = 0.0;  ///< work_extracted − reset work − measurement work
    ledger::AuditReport audit;
    ledger::Ledger ledger;
    std::vector<std::string> trace;
    Side molecule_side = Side::L;
    bool measurement_correct = true;
    bool aborted = false;
    double max_bookkeeping_error = 0.0;
};

/// Runs partition, measurement, free compression, expansion and blind reset,
/// then rearms the engine. With skip_reset the memory is left set and the
/// audit reports an open cycle.
CycleResult run_cycle(Engine& engine, Rng& rng, bool skip_reset = false);

/// Independent cycles, each on its own engine seeded from (master_seed, index).
std::vector<CycleResult> run_cycles(const EngineConfig& config, std::size_t n, std::uint64_t master_seed,
                                    bool skip_reset = false);

inline constexpr const char* cycle_csv_header = "cycle,work_extracted_kT,heat_kT,reset_env_bits,audit_ok";
std::string cycles_csv(const std::vector<CycleResult>& cycles);

}  // namespace thermodemon::szilard
