#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thermodemon/core.hpp"
#include "thermodemon/ledger.hpp"
#include "thermodemon/random.hpp"

// A demon with a two-state memory {L, R} whose subroutines reset the memory
// state-dependently instead of erasing it.
namespace thermodemon::endemon
{

struct TwoStateMemory
{
    Side value = Side::L;
    double barrier_height = 0.0;  ///< kT; infinite means the memory never flips
    double attempt_rate = 1.0;    ///< r0 in r = r0·exp(−barrier/T)
};

struct ErrorModel
{
    double p_err = 0.0;
    /// Cost charged on a wrong branch. Unset: measured in physical mode, the cap in ideal mode.
    std::optional<double> w_wrong;
    double work_cap = 3.0;  ///< kT; the wrong-branch push is aborted past this

    [[nodiscard]] double configured_wrong_cost() const { return w_wrong.value_or(work_cap); }
};

struct ENConfig
{
    Mode mode = Mode::ideal;
    double temperature = 1.0;
    double length = 1.0;
    double piston_speed = 0.01;
    ErrorModel error;
    /// Memory thermalization time between measurement and branching; 0 disables.
    double hold_time = 0.0;
    /// Replace the state-dependent reset by a blind erasure of the memory.
    bool substitute_blind_reset = false;
};

enum class Branch
{
    L_subroutine,
    R_subroutine
};

std::string_view to_string(Branch b);

struct ENCycleOutcome
{
    Branch branch = Branch::L_subroutine;
    Side molecule_side = Side::L;
    bool memory_correct = true;
    double net_work = 0.0;  ///< kT delivered over the cycle
    ledger::Ledger ledger;
    ledger::AuditReport audit;
    std::vector<std::string> trace;
    double max_bookkeeping_error = 0.0;
};

/// One cycle of the program. gas_rng drives the molecule, memory_rng the
/// record errors and memory thermalization. The memory must hold L and is
/// left at L.
ENCycleOutcome run_en_cycle(const ENConfig& config, TwoStateMemory& memory, Rng& gas_rng, Rng& memory_rng);

/// Rejects physical-mode outcomes.
ledger::AuditReport ideal_ledger_check(const ENCycleOutcome& outcome);

/// (1 − p_err)·ln 2 − p_err·W_wrong, in kT at unit temperature.
double expected_net_work(double p_err, double w_wrong);

/// The memory flips with probability 1 − exp(−r·dt).
TwoStateMemory thermal_memory_step(TwoStateMemory memory, double dt, double temperature, Rng& rng);

/// Probability that the memory ends flipped after `time`: (1 − exp(−2r·time))/2.
double hold_flip_probability(const TwoStateMemory& memory, double time, double temperature);

/// Fraction of memories, started at L, found at R after `steps` thermal steps.
double empirical_p_err(const TwoStateMemory& memory, double dt, double temperature, std::size_t steps,
                       std::size_t samples, std::uint64_t seed);

/// Independent cycles seeded from (master_seed, index); gas and memory streams differ.
std::vector<ENCycleOutcome> run_en_cycles(const ENConfig& config, const TwoStateMemory& memory, std::size_t n,
                                          std::uint64_t master_seed);

struct ENSummary
{
    std::size_t cycles = 0;
    double mean_net_work = 0.0;
    double stderr_net_work = 0.0;
    double expected_net_work = 0.0;  ///< analytic, from the model's p_err and wrong-branch cost
    double observed_error_rate = 0.0;
    double violation_bits = 0.0;    ///< summed over cycles
    std::size_t violating_cycles = 0;
    double work_cap = 0.0;
};

ENSummary summarize(const std::vector<ENCycleOutcome>& outcomes, const ENConfig& config,
                    const TwoStateMemory& memory = {});
nlohmann::json to_json(const ENSummary& summary);

inline constexpr const char* cycle_csv_header = "cycle,branch,memory_correct,net_work_kT,violation_bits";
std::string cycles_csv(const std::vector<ENCycleOutcome>& outcomes);

}  // namespace thermodemon::endemon
