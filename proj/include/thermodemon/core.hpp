#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace thermodemon
{

/// Raised when an operation is called with arguments that violate its contract.
class PreconditionError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double ln2 = std::numbers::ln2;

/// ideal: exact phase-cell bookkeeping. physical: measured on simulated gas boxes.
enum class Mode
{
    ideal,
    physical
};

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view text);

/// Which half of a partitioned box the molecule occupies.
enum class Side
{
    L,
    R
};

inline constexpr Side opposite(Side s) { return s == Side::L ? Side::R : Side::L; }
inline constexpr char side_char(Side s) { return s == Side::L ? 'L' : 'R'; }

/// Work in kT units and entropy handed to the environment in bits.
struct OperationCost
{
    double work = 0.0;
    double env_entropy = 0.0;

    OperationCost& operator+=(const OperationCost& o)
    {
        work += o.work;
        env_entropy += o.env_entropy;
        return *this;
    }
    friend OperationCost operator+(OperationCost a, const OperationCost& b) { return a += b; }
    friend bool operator==(const OperationCost&, const OperationCost&) = default;

    /// The Landauer price of erasing `bits` bits at temperature T.
    static OperationCost landauer(double bits, double temperature = 1.0)
    {
        return {bits * temperature * ln2, bits};
    }
};

inline double bits_to_kT(double bits, double temperature) { return bits * temperature * ln2; }
inline double kT_to_bits(double energy, double temperature) { return energy / (temperature * ln2); }

}  // namespace thermodemon
