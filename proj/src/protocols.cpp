#include "thermodemon/protocols.hpp"

#include <utility>

namespace thermodemon::protocols
{

namespace
{

constexpr std::uint64_t kCellStream = 1;

void require_bit(std::uint8_t v)
{
    if (v > 1) throw PreconditionError("cell values must be 0 or 1");
}

ledger::LedgerEntry entry(std::string name, double s, const CellResult& r, double heat, Mode mode)
{
    return {std::move(name), s, r.cost.env_entropy, r.cost.work, heat, mode};
}

std::string step(std::string_view op, std::string_view tape, std::size_t i)
{
    return std::string(op) + " " + std::string(tape) + "[" + std::to_string(i) + "]";
}

/// Free controlled-inversion pass shared by copy and controlled reset.
std::uint8_t controlled_invert(std::uint8_t target, std::uint8_t control, const ProtocolOptions& options,
                               std::uint64_t index)
{
    if (control == 0) return target;
    if (options.mode == Mode::ideal) return static_cast<std::uint8_t>(1 - target);
    Rng rng(derive_seed(options.seed, index, kCellStream));
    auto box = embody(target, rng, options.temperature);
    invert_box(box);
    return read_cell(box);
}

}  // namespace

Tape::Tape(std::size_t n, std::uint8_t fill) : cells_(n, TapeCell{fill}) { require_bit(fill); }

Tape::Tape(BitPattern bits)
{
    cells_.reserve(bits.size());
    for (auto b : bits)
    {
        require_bit(b);
        cells_.push_back({b});
    }
}

Tape Tape::parse(std::string_view text)
{
    BitPattern bits;
    bits.reserve(text.size());
    for (char c : text)
    {
        if (c != '0' && c != '1') throw PreconditionError("tape strings may contain only '0' and '1'");
        bits.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return Tape(std::move(bits));
}

void Tape::set(std::size_t i, std::uint8_t value)
{
    require_bit(value);
    cells_.at(i).value = value;
}

bool Tape::all_equal(std::uint8_t value) const
{
    for (const auto& c : cells_)
        if (c.value != value) return false;
    return true;
}

BitPattern Tape::bits() const
{
    BitPattern out;
    out.reserve(cells_.size());
    for (const auto& c : cells_) out.push_back(c.value);
    return out;
}

std::string Tape::str() const
{
    std::string s;
    s.reserve(cells_.size());
    for (const auto& c : cells_) s.push_back(static_cast<char>('0' + c.value));
    return s;
}

gas::BoxWorld embody(std::uint8_t value, Rng& rng, double temperature)
{
    require_bit(value);
    gas::BoxWorld box = gas::make_world(rng, 1.0, temperature);
    box.x = value ? rng.uniform(0.5, 1.0) : rng.uniform(0.0, 0.5);
    if (box.x == 0.5) box.x = value ? 0.75 : 0.25;
    gas::insert_partition(box, 0.5);
    return box;
}

std::uint8_t read_cell(const gas::BoxWorld& box)
{
    return gas::measure_side(box).side == Side::R ? 1 : 0;
}

void invert_box(gas::BoxWorld& box)
{
    if (!box.pistons_at_rest()) throw PreconditionError("cannot turn a box over while a piston moves");
    const double L = box.length;
    box.x = L - box.x;
    box.v = -box.v;
    const double left = L - box.piston_right;
    box.piston_right = box.right_target = L - box.piston_left;
    box.piston_left = box.left_target = left;
    if (box.partition) box.partition = L - *box.partition;
}

CopyRun copy_tape(const Tape& src, const Tape& dst, const ProtocolOptions& options)
{
    if (src.size() != dst.size()) throw PreconditionError("copy_tape: tapes differ in length");
    if (!dst.all_equal(options.zero_state)) throw PreconditionError("copy_tape: destination tape is not blank");

    const double n = static_cast<double>(src.size());
    CopyRun run{src, dst, {}, ledger::Ledger(n, options.mode)};
    for (std::size_t i = 0; i < src.size(); ++i)
    {
        // Against a blank of 1s the control is the XOR with the reference.
        const std::uint8_t control = src[i].value ^ options.zero_state;
        run.dst.set(i, controlled_invert(dst[i].value, control, options, i));
        run.ledger.record({step("copy", "dst", i), n, 0.0, 0.0, 0.0, options.mode});
    }
    return run;
}

TapeRun controlled_reset(const Tape& dst, const Tape& ref, const ProtocolOptions& options)
{
    if (dst.size() != ref.size()) throw PreconditionError("controlled_reset: tapes differ in length");
    const double n = static_cast<double>(dst.size());
    TapeRun run{dst, {}, {}, ledger::Ledger(n, options.mode)};
    for (std::size_t i = 0; i < dst.size(); ++i)
    {
        const std::uint8_t control = ref[i].value ^ options.zero_state;
        const std::uint8_t out = controlled_invert(dst[i].value, control, options, i);
        run.tape.set(i, out);
        if (out != options.zero_state) run.corrupted.push_back(i);
        run.ledger.record({step("controlled_reset", "dst", i), n, 0.0, 0.0, 0.0, options.mode});
    }
    return run;
}

namespace
{

struct MeasuredReset
{
    CellResult result;
    double heat = 0.0;
};

MeasuredReset blind_reset_impl(TapeCell cell, const ProtocolOptions& options, std::uint64_t index)
{
    require_bit(cell.value);
    const double T = options.temperature;
    if (options.mode == Mode::ideal) return {{options.zero_state, OperationCost::landauer(1.0, T), false}, -T * ln2};

    Rng rng(derive_seed(options.seed, index, kCellStream));
    auto box = embody(cell.value, rng, T);
    // From here on nothing depends on where the molecule is.
    gas::remove_partition(box);
    gas::WorkHeatRecord rec;
    if (options.zero_state == 0)
    {
        rec = gas::isothermal_volume_change(box, {gas::PistonSide::right, 1.0, 0.5, options.piston_speed}, rng);
        box.partition = 0.5;
        gas::advance_piston_free(box, gas::PistonSide::right, 1.0);
    }
    else
    {
        rec = gas::isothermal_volume_change(box, {gas::PistonSide::left, 0.0, 0.5, options.piston_speed}, rng);
        box.partition = 0.5;
        gas::advance_piston_free(box, gas::PistonSide::left, 0.0);
    }
    const std::uint8_t out = read_cell(box);
    return {{out, {rec.work_on_gas, -rec.heat_from_bath / (T * ln2)}, out != options.zero_state}, rec.heat_from_bath};
}

}  // namespace

CellResult blind_reset_cell(TapeCell cell, const ProtocolOptions& options, std::uint64_t cell_index)
{
    return blind_reset_impl(cell, options, cell_index).result;
}

CellResult known_value_reset(TapeCell cell, std::uint8_t known, const ProtocolOptions& options, std::uint64_t cell_index)
{
    require_bit(cell.value);
    require_bit(known);
    CellResult r;
    if (known == options.zero_state)
    {
        r.value = cell.value;  // nothing to do
    }
    else if (options.mode == Mode::ideal)
    {
        r.value = static_cast<std::uint8_t>(1 - cell.value);
    }
    else
    {
        Rng rng(derive_seed(options.seed, cell_index, kCellStream));
        auto box = embody(cell.value, rng, options.temperature);
        invert_box(box);
        r.value = read_cell(box);
    }
    r.corrupted = r.value != options.zero_state;
    return r;
}

TapeRun blind_reset_tape(const Tape& tape, const ProtocolOptions& options)
{
    const double n = static_cast<double>(tape.size());
    TapeRun run{tape, {}, {}, ledger::Ledger(n, options.mode)};
    for (std::size_t i = 0; i < tape.size(); ++i)
    {
        const auto m = blind_reset_impl(tape[i], options, i);
        run.tape.set(i, m.result.value);
        run.cost += m.result.cost;
        if (m.result.corrupted) run.corrupted.push_back(i);
        run.ledger.record(entry(step("blind_reset", "tape", i), n - static_cast<double>(i + 1), m.result, m.heat,
                                options.mode));
    }
    return run;
}

TapeRun known_reset_tape(const Tape& tape, const Tape& known, const ProtocolOptions& options)
{
    if (tape.size() != known.size()) throw PreconditionError("known_reset_tape: pattern length differs");
    TapeRun run{tape, {}, {}, ledger::Ledger(0.0, options.mode)};
    for (std::size_t i = 0; i < tape.size(); ++i)
    {
        const auto r = known_value_reset(tape[i], known[i].value, options, i);
        run.tape.set(i, r.value);
        if (r.corrupted) run.corrupted.push_back(i);
        run.ledger.record(entry(step("known_reset", "tape", i), 0.0, r, 0.0, options.mode));
    }
    return run;
}

TapeRun reset_pair_via_copy(const Tape& t1, const Tape& t2, const ProtocolOptions& options)
{
    if (t1 != t2) throw PreconditionError("reset_pair_via_copy: tapes differ");
    const double n = static_cast<double>(t1.size());
    ledger::Ledger ledger(n, options.mode);

    const auto second = controlled_reset(t2, t1, options);
    for (std::size_t i = 0; i < t2.size(); ++i)
        ledger.record({step("controlled_reset", "t2", i), n, 0.0, 0.0, 0.0, options.mode});

    TapeRun run{t1, {}, second.corrupted, std::move(ledger)};
    ProtocolOptions first_opts = options;
    first_opts.seed = derive_seed(options.seed, 1, 7);
    for (std::size_t i = 0; i < t1.size(); ++i)
    {
        const auto m = blind_reset_impl(t1[i], first_opts, i);
        run.tape.set(i, m.result.value);
        run.cost += m.result.cost;
        run.ledger.record(entry(step("blind_reset", "t1", i), n - static_cast<double>(i + 1), m.result, m.heat,
                                options.mode));
    }
    return run;
}

double tape_information_bits(const PatternDistribution& ensemble) { return ensemble.entropy_bits(); }

}  // namespace thermodemon::protocols
