#include "thermodemon/gas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "thermodemon/io.hpp"
#include "thermodemon/parallel.hpp"

namespace thermodemon::gas
{

namespace
{

constexpr double inf = std::numeric_limits<double>::infinity();

enum class WallKind
{
    piston_left,
    piston_right,
    partition
};

struct Wall
{
    double pos;
    double vel;
    WallKind kind;
};

/// Side of the partition holding the molecule. At the partition itself the
/// velocity says which way it just bounced.
Side partition_side(const BoxWorld& w)
{
    const double p = *w.partition;
    if (w.x < p) return Side::L;
    if (w.x > p) return Side::R;
    return w.v < 0.0 ? Side::L : Side::R;
}

Wall lower_wall(const BoxWorld& w)
{
    if (w.partition && partition_side(w) == Side::R) return {*w.partition, 0.0, WallKind::partition};
    return {w.piston_left, w.left_velocity, WallKind::piston_left};
}

Wall upper_wall(const BoxWorld& w)
{
    if (w.partition && partition_side(w) == Side::L) return {*w.partition, 0.0, WallKind::partition};
    return {w.piston_right, w.right_velocity, WallKind::piston_right};
}

enum class StopReason
{
    time_elapsed,
    piston_halted,
    work_cap
};

void collide(BoxWorld& w, const Wall& wall, bool from_below, Rng& rng)
{
    const double v_in = w.v;
    w.x = wall.pos;
    ++w.wall_collisions;
    if (wall.kind == WallKind::partition)
    {
        w.v = -v_in;
        return;
    }

    double v_out;
    if (wall.vel == 0.0)
    {
        const double s = rng.flux_maxwell_speed(w.temperature, w.mass);
        v_out = from_below ? -s : s;
        w.heat_from_bath += 0.5 * w.mass * (v_out * v_out - v_in * v_in);
    }
    else
    {
        v_out = 2.0 * wall.vel - v_in;
        w.work_on_gas += 0.5 * w.mass * (v_out * v_out - v_in * v_in);
    }
    w.v = v_out;
    const double impulse = w.mass * std::abs(v_in - v_out);
    if (wall.kind == WallKind::piston_left)
        w.impulse_left += impulse;
    else
        w.impulse_right += impulse;
}

/// Core event loop. Advances until t_max elapses, until a moving piston halts
/// (when stop_on_halt), or until work_on_gas exceeds work_limit.
StopReason advance(BoxWorld& w, double t_max, Rng& rng, bool stop_on_halt, double work_limit)
{
    double remaining = t_max;
    while (true)
    {
        const Wall lo = lower_wall(w);
        const Wall hi = upper_wall(w);

        double t_hi = inf, t_lo = inf, t_stop_left = inf, t_stop_right = inf;
        if (w.v > hi.vel) t_hi = std::max(0.0, (hi.pos - w.x) / (w.v - hi.vel));
        if (w.v < lo.vel) t_lo = std::max(0.0, (lo.pos - w.x) / (w.v - lo.vel));
        if (w.left_velocity != 0.0)
            t_stop_left = std::max(0.0, (w.left_target - w.piston_left) / w.left_velocity);
        if (w.right_velocity != 0.0)
            t_stop_right = std::max(0.0, (w.right_target - w.piston_right) / w.right_velocity);

        const double t = std::min({t_hi, t_lo, t_stop_left, t_stop_right, remaining});
        if (t == inf) return StopReason::time_elapsed;  // nothing will ever happen

        w.x += w.v * t;
        w.piston_left += w.left_velocity * t;
        w.piston_right += w.right_velocity * t;
        w.time += t;
        remaining -= t;

        if (t == t_stop_left || t == t_stop_right)
        {
            if (t == t_stop_left)
            {
                w.piston_left = w.left_target;
                w.left_velocity = 0.0;
            }
            if (t == t_stop_right)
            {
                w.piston_right = w.right_target;
                w.right_velocity = 0.0;
            }
            w.x = std::clamp(w.x, lower_wall(w).pos, upper_wall(w).pos);
            if (stop_on_halt) return StopReason::piston_halted;
            continue;
        }
        if (t == t_hi)
        {
            collide(w, hi, true, rng);
            if (w.work_on_gas > work_limit) return StopReason::work_cap;
            continue;
        }
        if (t == t_lo)
        {
            collide(w, lo, false, rng);
            if (w.work_on_gas > work_limit) return StopReason::work_cap;
            continue;
        }
        return StopReason::time_elapsed;
    }
}

}  // namespace

double BoxWorld::thermal_speed() const { return std::sqrt(temperature / mass); }

double BoxWorld::lower_bound() const { return lower_wall(*this).pos; }

double BoxWorld::upper_bound() const { return upper_wall(*this).pos; }

BoxWorld make_world(Rng& rng, double length, double temperature)
{
    if (!(length > 0.0) || !(temperature > 0.0)) throw PreconditionError("make_world: length and temperature must be positive");
    BoxWorld w;
    w.length = length;
    w.temperature = temperature;
    w.piston_left = 0.0;
    w.left_target = 0.0;
    w.piston_right = length;
    w.right_target = length;
    w.x = rng.uniform(0.0, length);
    w.v = rng.normal() * w.thermal_speed();
    return w;
}

void step_dynamics(BoxWorld& world, double dt, Rng& rng)
{
    if (!(dt > 0.0)) throw PreconditionError("step_dynamics: dt must be positive");
    advance(world, dt, rng, false, inf);
}

double WorkHeatRecord::bookkeeping_error() const
{
    return std::abs(delta_energy - (heat_from_bath - work_by_gas()));
}

WorkHeatRecord isothermal_volume_change(BoxWorld& world, const PistonSchedule& schedule, Rng& rng,
                                        const VolumeChangeOptions& options)
{
    if (!(schedule.speed > 0.0)) throw PreconditionError("piston speed must be positive");
    if (!world.pistons_at_rest()) throw PreconditionError("a piston is already moving");

    const bool right = schedule.side == PistonSide::right;
    double& piston = right ? world.piston_right : world.piston_left;
    const double tol = 1e-12 * world.length;
    if (std::abs(piston - schedule.start) > tol)
        throw PreconditionError("schedule start does not match the piston position");

    if (world.partition)
    {
        const Side s = partition_side(world);
        if ((right && s == Side::L) || (!right && s == Side::R))
            throw PreconditionError("the partition shields this piston from the molecule; use advance_piston_free");
    }

    WorkHeatRecord rec;
    if (schedule.start == schedule.end) return rec;

    // The far wall of the molecule's interval, which the piston must not reach.
    const double far = right ? world.lower_bound() : world.upper_bound();
    double target = schedule.end;
    if (right ? target > world.length : target < 0.0) throw PreconditionError("schedule leaves the box");
    const bool closes = right ? target <= far : target >= far;
    if (closes)
    {
        if (!options.work_cap) throw PreconditionError("schedule would close the molecule's interval to zero width");
        // A capped push toward the far wall stops short of it.
        target = right ? far + 1e-6 * world.length : far - 1e-6 * world.length;
    }

    const double w0 = world.work_on_gas;
    const double q0 = world.heat_from_bath;
    const double e0 = world.kinetic_energy();
    const double t0 = world.time;

    const double u = schedule.speed * world.thermal_speed() * (target > piston ? 1.0 : -1.0);
    if (right)
    {
        world.right_velocity = u;
        world.right_target = target;
    }
    else
    {
        world.left_velocity = u;
        world.left_target = target;
    }

    const double limit = options.work_cap ? w0 + *options.work_cap : inf;
    const StopReason why = advance(world, inf, rng, true, limit);
    if (why == StopReason::work_cap)
    {
        rec.aborted = true;
        if (right)
        {
            world.right_velocity = 0.0;
            world.right_target = world.piston_right;
        }
        else
        {
            world.left_velocity = 0.0;
            world.left_target = world.piston_left;
        }
    }

    rec.work_on_gas = world.work_on_gas - w0;
    rec.heat_from_bath = world.heat_from_bath - q0;
    rec.delta_energy = world.kinetic_energy() - e0;
    rec.duration = world.time - t0;
    return rec;
}

void insert_partition(BoxWorld& world, double pos)
{
    if (world.partition) throw PreconditionError("partition already present");
    if (!(pos > world.piston_left && pos < world.piston_right))
        throw PreconditionError("partition must lie strictly between the pistons");
    if (std::abs(pos - world.x) <= 1e-12 * world.length)
        throw PreconditionError("partition would hit the molecule; retry after a step");
    world.partition = pos;
}

void remove_partition(BoxWorld& world)
{
    if (!world.partition) throw PreconditionError("no partition to remove");
    world.partition.reset();
}

void advance_piston_free(BoxWorld& world, PistonSide side, double target)
{
    const bool right = side == PistonSide::right;
    double& piston = right ? world.piston_right : world.piston_left;
    if (target == piston) return;
    if (!world.pistons_at_rest()) throw PreconditionError("a piston is already moving");
    if (!world.partition) throw PreconditionError("no partition shields the molecule from the piston");
    const Side s = partition_side(world);
    const double p = *world.partition;
    const bool shielded = right ? (s == Side::L && target >= p) : (s == Side::R && target <= p);
    if (!shielded) throw PreconditionError("the molecule is inside the swept interval; use isothermal_volume_change");
    if (right ? target > world.length : target < 0.0) throw PreconditionError("target outside the box");
    piston = target;
    (right ? world.right_target : world.left_target) = target;
}

Measurement measure_side(const BoxWorld& world, double cost_bits)
{
    if (!world.partition) throw PreconditionError("measure_side needs a partition");
    if (cost_bits < 0.0) throw PreconditionError("measurement cost must be non-negative");
    return {partition_side(world), OperationCost::landauer(cost_bits, world.temperature)};
}

Estimate pressure_estimate(BoxWorld world, double duration, Rng& rng, std::size_t batches)
{
    if (!(duration > 0.0)) throw PreconditionError("pressure_estimate: duration must be positive");
    if (batches < 2) throw PreconditionError("pressure_estimate: need at least two batches");
    if (!world.pistons_at_rest()) throw PreconditionError("pressure_estimate: pistons must be at rest");
    if (world.partition && partition_side(world) == Side::L)
        throw PreconditionError("pressure_estimate: partition shields the right piston");

    const double dt = duration / static_cast<double>(batches);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t b = 0; b < batches; ++b)
    {
        const double before = world.impulse_right;
        advance(world, dt, rng, false, inf);
        const double p = (world.impulse_right - before) / dt;
        sum += p;
        sum2 += p * p;
    }
    const double n = static_cast<double>(batches);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0));
    return {mean, std::sqrt(var / n), batches};
}

double free_energy_delta(double temperature, double v0, double v1)
{
    if (!(v0 > 0.0) || !(v1 > 0.0)) throw PreconditionError("free_energy_delta: volumes must be positive");
    return temperature * std::log(v0 / v1);
}

std::vector<WorkHeatRecord> run_volume_change_ensemble(const EnsembleConfig& config)
{
    if (!(config.factor > 0.0)) throw PreconditionError("volume factor must be positive");
    std::vector<WorkHeatRecord> records(config.trajectories);
    parallel_for(config.trajectories,
                 [&](std::size_t i)
                 {
                     const std::uint64_t seed = derive_seed(config.master_seed, i);
                     Rng rng(seed);
                     // The piston starts at `length`; an expansion enlarges the box to fit.
                     const double v_final = config.length / config.factor;
                     BoxWorld world = make_world(rng, std::max(config.length, v_final), config.temperature);
                     if (v_final > config.length)
                     {
                         world.piston_right = world.right_target = config.length;
                         world.x = rng.uniform(0.0, config.length);
                     }
                     auto rec = isothermal_volume_change(world, {PistonSide::right, config.length, v_final, config.speed}, rng);
                     rec.trajectory_seed = seed;
                     records[i] = rec;
                 });
    return records;
}

EnsembleSummary summarize(const std::vector<WorkHeatRecord>& records)
{
    EnsembleSummary s;
    s.n = records.size();
    if (records.empty()) return s;
    double sw = 0, sw2 = 0, sq = 0, sq2 = 0;
    for (const auto& r : records)
    {
        sw += r.work_on_gas;
        sw2 += r.work_on_gas * r.work_on_gas;
        sq += r.heat_from_bath;
        sq2 += r.heat_from_bath * r.heat_from_bath;
        s.max_bookkeeping_error = std::max(s.max_bookkeeping_error, r.bookkeeping_error());
    }
    const double n = static_cast<double>(s.n);
    s.mean_work_on_gas = sw / n;
    s.mean_heat_from_bath = sq / n;
    if (s.n > 1)
    {
        s.stderr_work = std::sqrt(std::max(0.0, (sw2 - n * s.mean_work_on_gas * s.mean_work_on_gas) / (n - 1)) / n);
        s.stderr_heat = std::sqrt(std::max(0.0, (sq2 - n * s.mean_heat_from_bath * s.mean_heat_from_bath) / (n - 1)) / n);
    }
    return s;
}

nlohmann::json to_json(const EnsembleSummary& s)
{
    return {{"N", s.n},
            {"mean_work_on_gas_kT", s.mean_work_on_gas},
            {"stderr_work_kT", s.stderr_work},
            {"mean_heat_from_bath_kT", s.mean_heat_from_bath},
            {"stderr_heat_kT", s.stderr_heat},
            {"max_bookkeeping_error_kT", s.max_bookkeeping_error}};
}

std::string trajectories_csv(const std::vector<WorkHeatRecord>& records)
{
    io::CsvWriter csv(trajectory_csv_header);
    for (std::size_t i = 0; i < records.size(); ++i)
    {
        const auto& r = records[i];
        csv.field(i).field(r.trajectory_seed).field(r.work_on_gas).field(r.heat_from_bath).field(r.duration).end_row();
    }
    return csv.str();
}

}  // namespace thermodemon::gas
