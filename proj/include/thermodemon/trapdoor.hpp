#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thermodemon/core.hpp"
#include "thermodemon/random.hpp"

// Two chambers [-L, 0) and (0, L] of a non-interacting gas joined by a
// one-way door at x = 0. The door is closed (angle 0) or swung open to
// theta_open against a spring, storing E = kappa·theta_open²/2.
namespace thermodemon::trapdoor
{

struct DoorParams
{
    double kappa = 2.0;       ///< spring constant, kT per rad²
    double theta_open = 1.0;  ///< opening angle at the hard stop
    double relax_rate = 50.0; ///< rate at which the door bath closes an open door
    double temperature = 1.0; ///< T_door; 0 is the frozen door

    [[nodiscard]] double open_energy() const { return 0.5 * kappa * theta_open * theta_open; }
};

struct WorldParams
{
    std::size_t molecules = 50;
    double chamber_length = 1.0;
    double gas_temperature = 1.0;
    double mass = 1.0;
    DoorParams door;
};

struct Molecule
{
    Side chamber = Side::L;
    double x = 0.0;
    double v = 0.0;
    double t = 0.0;  ///< time at which (x, v) hold
};

struct TwoChamberWorld
{
    WorldParams params;
    std::vector<Molecule> molecules;
    bool door_open = false;
    double time = 0.0;

    [[nodiscard]] std::size_t count(Side side) const;
    [[nodiscard]] double door_angle() const { return door_open ? params.door.theta_open : 0.0; }
};

/// Half the molecules in each chamber (the odd one left), uniform positions,
/// Maxwellian velocities, door closed.
TwoChamberWorld make_world(const WorldParams& params, Rng& rng);

struct Sample
{
    double t = 0.0;
    std::size_t n_left = 0;
    std::size_t n_right = 0;
    double door_angle = 0.0;
};

struct FluxSeries
{
    std::vector<Sample> samples;
    std::uint64_t events = 0;  ///< wall hits, door hits and door-bath transitions
    std::uint64_t crossings_left_to_right = 0;
    std::uint64_t crossings_right_to_left = 0;
    std::uint64_t blocked_hits = 0;
    std::uint64_t door_kicks = 0;  ///< door-bath transitions
};

/// Event-driven evolution over `duration`, sampling every `sample_interval`
/// (the first sample is at the start time).
FluxSeries simulate(TwoChamberWorld& world, double duration, Rng& rng, double sample_interval = 1.0);

/// Runs until at least `events` events have been processed.
FluxSeries simulate_until_events(TwoChamberWorld& world, std::uint64_t events, Rng& rng, double sample_interval = 1.0);

struct FluxStatistics
{
    double mean_net_flux = 0.0;  ///< left→right crossings per unit time
    double flux_std_error = 0.0;
    double flux_z = 0.0;
    double mean_imbalance = 0.0;  ///< n_right − n_left
    double imbalance_std_error = 0.0;
    double imbalance_z = 0.0;
    std::vector<double> imbalance;  ///< per sample
    std::string verdict;            ///< "rectification", "no rectification" or "inconclusive"
};

/// Means and batch-means standard errors over `batches` equal time blocks.
/// Rectification needs imbalance_z > 5; no rectification needs |flux_z| < 3.
FluxStatistics flux_statistics(const FluxSeries& series, std::size_t batches = 20);

struct BatchResult
{
    std::uint64_t seed = 0;
    FluxSeries series;
    FluxStatistics stats;
};

/// Independent worlds, one per seed derived from (master_seed, index).
std::vector<BatchResult> run_batches(const WorldParams& params, std::uint64_t events, std::size_t n_batches,
                                     std::uint64_t master_seed, double sample_interval = 1.0);

inline constexpr const char* series_csv_header = "t,n_left,n_right,door_angle";
std::string series_csv(const FluxSeries& series);
nlohmann::json to_json(const FluxStatistics& stats, bool with_trajectory = false);

}  // namespace thermodemon::trapdoor
