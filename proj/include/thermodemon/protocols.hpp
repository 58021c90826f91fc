#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "thermodemon/core.hpp"
#include "thermodemon/distribution.hpp"
#include "thermodemon/gas.hpp"
#include "thermodemon/ledger.hpp"
#include "thermodemon/random.hpp"

namespace thermodemon::protocols
{

/// One box of a tape. 0 is the molecule in the left half, 1 in the right half.
struct TapeCell
{
    std::uint8_t value = 0;

    [[nodiscard]] Side embodiment() const { return value ? Side::R : Side::L; }
    friend bool operator==(const TapeCell&, const TapeCell&) = default;
};

class Tape
{
public:
    Tape() = default;
    explicit Tape(std::size_t n, std::uint8_t fill = 0);
    explicit Tape(BitPattern bits);

    /// Parses a string of '0'/'1'. Throws on any other character.
    static Tape parse(std::string_view text);

    [[nodiscard]] std::size_t size() const { return cells_.size(); }
    [[nodiscard]] bool empty() const { return cells_.empty(); }
    [[nodiscard]] TapeCell operator[](std::size_t i) const { return cells_.at(i); }
    void set(std::size_t i, std::uint8_t value);
    [[nodiscard]] bool all_equal(std::uint8_t value) const;
    [[nodiscard]] BitPattern bits() const;
    [[nodiscard]] std::string str() const;

    friend bool operator==(const Tape&, const Tape&) = default;

private:
    std::vector<TapeCell> cells_;
};

struct ProtocolOptions
{
    Mode mode = Mode::ideal;
    double temperature = 1.0;
    double piston_speed = 0.005;  ///< physical mode: fraction of the thermal speed
    std::uint64_t seed = 0;       ///< physical mode: master seed, one sub-stream per cell
    std::uint8_t zero_state = 0;  ///< the reference value a reset drives cells to
};

struct CellResult
{
    std::uint8_t value = 0;
    OperationCost cost;
    bool corrupted = false;
};

/// Outcome of a tape-level protocol. `ledger` tracks the observer's entropy
/// of the tapes involved (unknown cells count one bit each).
struct TapeRun
{
    Tape tape;
    OperationCost cost;
    std::vector<std::size_t> corrupted;
    ledger::Ledger ledger;
};

struct CopyRun
{
    Tape src;
    Tape dst;
    OperationCost cost;
    ledger::Ledger ledger;
};

/// Correlates a blank dst with src by controlled inversion. Free and reversible.
CopyRun copy_tape(const Tape& src, const Tape& dst, const ProtocolOptions& options = {});

/// Controlled inversion of dst by ref. With ref equal to dst this resets dst
/// free of cost; mismatched cells end nonzero and are reported as corrupted.
TapeRun controlled_reset(const Tape& dst, const Tape& ref, const ProtocolOptions& options = {});

/// State-independent reset of one cell. Costs kT ln 2 and one bit whatever
/// the value; physical mode measures it from an isothermal half-compression.
CellResult blind_reset_cell(TapeCell cell, const ProtocolOptions& options = {}, std::uint64_t cell_index = 0);

/// Reset tailored to a known value: nothing for the zero state, otherwise
/// trap and turn the box over. Free; a wrong `known` corrupts the cell.
CellResult known_value_reset(TapeCell cell, std::uint8_t known, const ProtocolOptions& options = {},
                             std::uint64_t cell_index = 0);

TapeRun blind_reset_tape(const Tape& tape, const ProtocolOptions& options = {});
TapeRun known_reset_tape(const Tape& tape, const Tape& known, const ProtocolOptions& options = {});

/// Resets two identical tapes: t2 against t1 for free, then t1 blindly.
TapeRun reset_pair_via_copy(const Tape& t1, const Tape& t2, const ProtocolOptions& options = {});

/// Shannon entropy of a tape ensemble: the least expected reset cost in bits.
double tape_information_bits(const PatternDistribution& ensemble);

/// Physical embodiment of a cell: unit box, partition at the midpoint, molecule
/// in the half given by the value, velocity thermal.
gas::BoxWorld embody(std::uint8_t value, Rng& rng, double temperature = 1.0);
std::uint8_t read_cell(const gas::BoxWorld& box);

/// Turns a box over: x → L − x, v → −v. Zero work.
void invert_box(gas::BoxWorld& box);

}  // namespace thermodemon::protocols
