#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thermodemon/core.hpp"
#include "thermodemon/random.hpp"

namespace thermodemon::gas
{

enum class PistonSide
{
    left,
    right
};

/// A one-molecule gas in a 1D box between two pistons, optionally split by a
/// partition. Stationary piston faces are thermal walls at `temperature`;
/// moving pistons and the partition reflect elastically.
struct BoxWorld
{
    double length = 1.0;
    double x = 0.5;
    double v = 0.0;
    double mass = 1.0;
    double temperature = 1.0;
    std::optional<double> partition;
    double piston_left = 0.0;
    double piston_right = 1.0;
    double time = 0.0;

    // Piston motion, driven by the protocol operations. Zero velocity means at rest.
    double left_velocity = 0.0;
    double left_target = 0.0;
    double right_velocity = 0.0;
    double right_target = 1.0;

    // Running totals since construction.
    double work_on_gas = 0.0;
    double heat_from_bath = 0.0;
    double impulse_left = 0.0;   ///< momentum delivered to the left piston
    double impulse_right = 0.0;  ///< momentum delivered to the right piston
    std::uint64_t wall_collisions = 0;

    [[nodiscard]] double kinetic_energy() const { return 0.5 * mass * v * v; }
    [[nodiscard]] double thermal_speed() const;
    /// Interval the molecule can currently reach.
    [[nodiscard]] double lower_bound() const;
    [[nodiscard]] double upper_bound() const;
    [[nodiscard]] double accessible_length() const { return upper_bound() - lower_bound(); }
    [[nodiscard]] bool pistons_at_rest() const { return left_velocity == 0.0 && right_velocity == 0.0; }
};

/// An equilibrium world: pistons at the box ends, x uniform, v Maxwellian.
BoxWorld make_world(Rng& rng, double length = 1.0, double temperature = 1.0);

/// Event-driven advance by dt: free flight between exact collision times.
void step_dynamics(BoxWorld& world, double dt, Rng& rng);

/// Moves `side` from `start` to `end` at `speed` times the thermal speed.
struct PistonSchedule
{
    PistonSide side = PistonSide::right;
    double start = 1.0;
    double end = 0.5;
    double speed = 0.01;
};

struct WorkHeatRecord
{
    double work_on_gas = 0.0;
    double heat_from_bath = 0.0;
    double delta_energy = 0.0;  ///< kinetic energy change over the schedule
    double duration = 0.0;
    std::uint64_t trajectory_seed = 0;
    bool aborted = false;  ///< stopped early by a work cap

    [[nodiscard]] double work_by_gas() const { return -work_on_gas; }
    /// |ΔU − (Q − W_by_gas)|.
    [[nodiscard]] double bookkeeping_error() const;
};

struct VolumeChangeOptions
{
    /// Stop the piston once the work done on the gas exceeds this.
    std::optional<double> work_cap;
};

/// Drives a piston through the schedule, measuring work mechanically from
/// molecule-piston collisions. Throws if the schedule would close the
/// molecule's interval or if the piston is not on the molecule's side.
WorkHeatRecord isothermal_volume_change(BoxWorld& world, const PistonSchedule& schedule, Rng& rng,
                                        const VolumeChangeOptions& options = {});

/// Throws if pos is outside the pistons or within collision range of the molecule.
void insert_partition(BoxWorld& world, double pos);
void remove_partition(BoxWorld& world);

/// Instant frictionless move of a piston that the partition shields from the molecule.
void advance_piston_free(BoxWorld& world, PistonSide side, double target);

struct Measurement
{
    Side side = Side::L;
    OperationCost cost;
};

/// Reads which side of the partition holds the molecule. The default cost is
/// zero; a nonzero `cost_bits` charges (cost_bits·T·ln 2, cost_bits).
Measurement measure_side(const BoxWorld& world, double cost_bits = 0.0);

struct Estimate
{
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

/// Time-averaged momentum flux onto the right piston, with a batch-means error.
/// Runs on a copy of the world.
Estimate pressure_estimate(BoxWorld world, double duration, Rng& rng, std::size_t batches = 20);

/// T·ln(V0/V1): free energy change, equal to the reversible isothermal work on the gas.
double free_energy_delta(double temperature, double v0, double v1);

/// Ensemble of independent compressions or expansions of a fresh equilibrium box.
struct EnsembleConfig
{
    double length = 1.0;
    double temperature = 1.0;
    double factor = 2.0;  ///< V_initial / V_final; below 1 means expansion
    double speed = 0.005;
    std::size_t trajectories = 1000;
    std::uint64_t master_seed = 0;
};

std::vector<WorkHeatRecord> run_volume_change_ensemble(const EnsembleConfig& config);

struct EnsembleSummary
{
    double mean_work_on_gas = 0.0;
    double stderr_work = 0.0;
    double mean_heat_from_bath = 0.0;
    double stderr_heat = 0.0;
    double max_bookkeeping_error = 0.0;
    std::size_t n = 0;
};

EnsembleSummary summarize(const std::vector<WorkHeatRecord>& records);
nlohmann::json to_json(const EnsembleSummary& summary);

inline constexpr const char* trajectory_csv_header = "trajectory,seed,work_on_gas_kT,heat_from_bath_kT,duration";
std::string trajectories_csv(const std::vector<WorkHeatRecord>& records);

}  // namespace thermodemon::gas
