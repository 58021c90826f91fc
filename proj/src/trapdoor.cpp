#include "thermodemon/trapdoor.hpp"

#include <cmath>
#include <limits>
#include <queue>

#include "thermodemon/io.hpp"
#include "thermodemon/parallel.hpp"

namespace thermodemon::trapdoor
{

namespace
{

constexpr double inf = std::numeric_limits<double>::infinity();

void validate(const WorldParams& p)
{
    if (p.molecules == 0) throw PreconditionError("trapdoor: need at least one molecule");
    if (!(p.chamber_length > 0.0) || !(p.gas_temperature > 0.0) || !(p.mass > 0.0))
        throw PreconditionError("trapdoor: chamber length, gas temperature and mass must be positive");
    if (!(p.door.kappa >= 0.0) || !(p.door.theta_open > 0.0) || !(p.door.relax_rate > 0.0) || !(p.door.temperature >= 0.0))
        throw PreconditionError("trapdoor: invalid door parameters");
}

double next_hit_time(const Molecule& m, double L)
{
    double target;
    if (m.v > 0.0)
        target = m.chamber == Side::L ? 0.0 : L;
    else
        target = m.chamber == Side::L ? -L : 0.0;
    return m.t + (target - m.x) / m.v;
}

double opening_rate(const DoorParams& d)
{
    if (d.temperature == 0.0) return 0.0;
    return d.relax_rate * std::exp(-d.open_energy() / d.temperature);
}

struct Event
{
    double t;
    std::size_t i;
    bool operator>(const Event& o) const { return t > o.t || (t == o.t && i > o.i); }
};

class Engine
{
public:
    Engine(TwoChamberWorld& w, Rng& rng) : w_(w), rng_(rng)
    {
        validate(w_.params);
        for (std::size_t i = 0; i < w_.molecules.size(); ++i)
            heap_.push({next_hit_time(w_.molecules[i], w_.params.chamber_length), i});
        draw_door_time();
        n_left_ = w_.count(Side::L);
    }

    FluxSeries run(double t_end, std::uint64_t max_events, double dt_sample)
    {
        if (!(dt_sample > 0.0)) throw PreconditionError("trapdoor: sample interval must be positive");
        FluxSeries s;
        const double t0 = w_.time;
        std::uint64_t k = 0;
        double next_sample = t0;
        const std::size_t N = w_.molecules.size();
        auto flush = [&](double until, bool inclusive)
        {
            while (next_sample < until || (inclusive && next_sample == until))
            {
                s.samples.push_back({next_sample, n_left_, N - n_left_, w_.door_angle()});
                next_sample = t0 + static_cast<double>(++k) * dt_sample;
            }
        };

        while (s.events < max_events)
        {
            const double t_mol = heap_.top().t;
            const double t_next = std::min(t_mol, door_time_);
            if (t_next > t_end) break;
            flush(t_next, false);
            w_.time = t_next;
            ++s.events;
            if (door_time_ <= t_mol)
            {
                w_.door_open = !w_.door_open;
                ++s.door_kicks;
                draw_door_time();
                continue;
            }
            const auto ev = heap_.top();
            heap_.pop();
            collide(w_.molecules[ev.i], ev.t, s);
            heap_.push({next_hit_time(w_.molecules[ev.i], w_.params.chamber_length), ev.i});
        }
        if (t_end != inf)
        {
            w_.time = t_end;
            flush(t_end, true);
        }
        else
        {
            flush(w_.time, true);
        }
        // Bring every molecule up to the world clock.
        for (auto& m : w_.molecules)
        {
            m.x += m.v * (w_.time - m.t);
            m.t = w_.time;
        }
        return s;
    }

private:
    void draw_door_time()
    {
        const DoorParams& d = w_.params.door;
        const double rate = w_.door_open ? d.relax_rate : opening_rate(d);
        door_time_ = rate > 0.0 ? w_.time + rng_.exponential(rate) : inf;
    }

    void collide(Molecule& m, double t, FluxSeries& s)
    {
        const double L = w_.params.chamber_length;
        const double mass = w_.params.mass;
        const double Eb = w_.params.door.open_energy();
        m.x += m.v * (t - m.t);
        m.t = t;

        const bool at_door = (m.chamber == Side::L && m.v > 0.0) || (m.chamber == Side::R && m.v < 0.0);
        if (!at_door)
        {
            // Outer walls are thermal at the gas temperature.
            const double speed = rng_.flux_maxwell_speed(w_.params.gas_temperature, mass);
            m.x = m.chamber == Side::L ? -L : L;
            m.v = m.chamber == Side::L ? speed : -speed;
            return;
        }
        m.x = 0.0;
        const double ke = 0.5 * mass * m.v * m.v;
        if (m.chamber == Side::L && !w_.door_open && ke > Eb)
        {
            // Pushes the door open and passes, paying the spring energy.
            m.v = std::sqrt(2.0 * (ke - Eb) / mass);
            m.chamber = Side::R;
            --n_left_;
            w_.door_open = true;
            ++s.crossings_left_to_right;
            draw_door_time();
            return;
        }
        if (m.chamber == Side::R && w_.door_open)
        {
            // Slips back through and lets the spring shut the door behind it.
            m.v = -std::sqrt(2.0 * (ke + Eb) / mass);
            m.chamber = Side::L;
            ++n_left_;
            w_.door_open = false;
            ++s.crossings_right_to_left;
            draw_door_time();
            return;
        }
        m.v = -m.v;
        ++s.blocked_hits;
    }

    TwoChamberWorld& w_;
    Rng& rng_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> heap_;
    double door_time_ = inf;
    std::size_t n_left_ = 0;
};

}  // namespace

std::size_t TwoChamberWorld::count(Side side) const
{
    std::size_t n = 0;
    for (const auto& m : molecules) n += m.chamber == side;
    return n;
}

TwoChamberWorld make_world(const WorldParams& params, Rng& rng)
{
    validate(params);
    TwoChamberWorld w;
    w.params = params;
    const double L = params.chamber_length;
    const double sigma = std::sqrt(params.gas_temperature / params.mass);
    const std::size_t n_left = (params.molecules + 1) / 2;
    for (std::size_t i = 0; i < params.molecules; ++i)
    {
        Molecule m;
        m.chamber = i < n_left ? Side::L : Side::R;
        const double u = rng.uniform_open();
        m.x = m.chamber == Side::L ? -L * u : L * u;
        m.v = rng.normal() * sigma;
        if (m.v == 0.0) m.v = sigma;
        w.molecules.push_back(m);
    }
    return w;
}

FluxSeries simulate(TwoChamberWorld& world, double duration, Rng& rng, double sample_interval)
{
    if (!(duration >= 0.0)) throw PreconditionError("trapdoor: duration must be >= 0");
    Engine e(world, rng);
    return e.run(world.time + duration, std::numeric_limits<std::uint64_t>::max(), sample_interval);
}

FluxSeries simulate_until_events(TwoChamberWorld& world, std::uint64_t events, Rng& rng, double sample_interval)
{
    Engine e(world, rng);
    return e.run(inf, events, sample_interval);
}

namespace
{

struct MeanSe
{
    double mean = 0.0;
    double se = 0.0;
};

MeanSe batch_means(const std::vector<double>& v)
{
    const double n = static_cast<double>(v.size());
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, v.size() > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0};
}

double z_score(double mean, double se)
{
    if (se > 0.0) return mean / se;
    return mean == 0.0 ? 0.0 : std::copysign(inf, mean);
}

}  // namespace

FluxStatistics flux_statistics(const FluxSeries& series, std::size_t batches)
{
    const auto& s = series.samples;
    if (s.size() < 2) throw PreconditionError("flux_statistics: need at least two samples");
    if (batches < 2) throw PreconditionError("flux_statistics: need at least two batches");
    batches = std::min(batches, s.size() - 1);

    FluxStatistics out;
    out.imbalance.reserve(s.size());
    for (const auto& x : s) out.imbalance.push_back(static_cast<double>(x.n_right) - static_cast<double>(x.n_left));

    // Block b covers samples [edge(b), edge(b+1)].
    const std::size_t intervals = s.size() - 1;
    auto edge = [&](std::size_t b) { return b * intervals / batches; };
    std::vector<double> flux(batches), imb(batches);
    for (std::size_t b = 0; b < batches; ++b)
    {
        const auto& a = s[edge(b)];
        const auto& c = s[edge(b + 1)];
        flux[b] = (static_cast<double>(c.n_right) - static_cast<double>(a.n_right)) / (c.t - a.t);
        double sum = 0.0;
        for (std::size_t k = edge(b) + 1; k <= edge(b + 1); ++k) sum += out.imbalance[k];
        imb[b] = sum / static_cast<double>(edge(b + 1) - edge(b));
    }
    const auto f = batch_means(flux);
    const auto d = batch_means(imb);
    out.mean_net_flux = f.mean;
    out.flux_std_error = f.se;
    out.flux_z = z_score(f.mean, f.se);
    out.mean_imbalance = d.mean;
    out.imbalance_std_error = d.se;
    out.imbalance_z = z_score(d.mean, d.se);
    if (out.imbalance_z > 5.0)
        out.verdict = "rectification";
    else if (std::abs(out.flux_z) < 3.0)
        out.verdict = "no rectification";
    else
        out.verdict = "inconclusive";
    return out;
}

std::vector<BatchResult> run_batches(const WorldParams& params, std::uint64_t events, std::size_t n_batches,
                                     std::uint64_t master_seed, double sample_interval)
{
    validate(params);
    std::vector<BatchResult> out(n_batches);
    parallel_for(n_batches,
                 [&](std::size_t i)
                 {
                     const std::uint64_t seed = derive_seed(master_seed, i);
                     Rng rng(seed);
                     auto world = make_world(params, rng);
                     out[i].seed = seed;
                     out[i].series = simulate_until_events(world, events, rng, sample_interval);
                     out[i].stats = flux_statistics(out[i].series);
                 });
    return out;
}

std::string series_csv(const FluxSeries& series)
{
    io::CsvWriter csv(series_csv_header);
    for (const auto& s : series.samples) csv.field(s.t).field(s.n_left).field(s.n_right).field(s.door_angle).end_row();
    return csv.str();
}

nlohmann::json to_json(const FluxStatistics& stats, bool with_trajectory)
{
    nlohmann::json j = {{"mean_net_flux", stats.mean_net_flux},
                        {"flux_std_error", stats.flux_std_error},
                        {"flux_z", stats.flux_z},
                        {"mean_imbalance", stats.mean_imbalance},
                        {"imbalance_std_error", stats.imbalance_std_error},
                        {"imbalance_z", stats.imbalance_z},
                        {"verdict", stats.verdict}};
    if (with_trajectory) j["imbalance"] = stats.imbalance;
    return j;
}

}  // namespace thermodemon::trapdoor
