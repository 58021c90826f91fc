#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thermodemon/core.hpp"
#include "thermodemon/distribution.hpp"
#include "thermodemon/ledger.hpp"
#include "thermodemon/random.hpp"

namespace thermodemon::spins
{

inline constexpr std::int8_t ONE = +1;
inline constexpr std::int8_t ZERO = -1;

class SpinArray
{
public:
    SpinArray() = default;
    explicit SpinArray(std::vector<std::int8_t> spins);
    static SpinArray all_one(std::size_t n) { return SpinArray(std::vector<std::int8_t>(n, ONE)); }
    static SpinArray all_zero(std::size_t n) { return SpinArray(std::vector<std::int8_t>(n, ZERO)); }

    [[nodiscard]] std::size_t size() const { return spins_.size(); }
    [[nodiscard]] std::int8_t operator[](std::size_t i) const { return spins_.at(i); }
    [[nodiscard]] const std::vector<std::int8_t>& spins() const { return spins_; }
    [[nodiscard]] bool is_all_one() const;

    /// ONE ↦ 1, ZERO ↦ 0.
    [[nodiscard]] BitPattern bits() const;
    static SpinArray from_bits(const BitPattern& bits);

    friend bool operator==(const SpinArray&, const SpinArray&) = default;

private:
    std::vector<std::int8_t> spins_;
};

/// Either a finite sample of arrays or an analytic distribution.
class SpinEnsemble
{
public:
    static SpinEnsemble from_samples(std::vector<SpinArray> samples);
    static SpinEnsemble analytic(PatternDistribution distribution);
    static SpinEnsemble uniform(std::size_t n) { return analytic(PatternDistribution::uniform(n)); }
    /// Independent spins, each ONE with probability p_one.
    static SpinEnsemble product(std::size_t n, double p_one);
    static SpinEnsemble point(const SpinArray& array) { return analytic(PatternDistribution::point(array.bits())); }

    [[nodiscard]] bool is_analytic() const { return samples_.empty(); }
    [[nodiscard]] std::size_t length() const { return distribution_.length(); }
    [[nodiscard]] const std::vector<SpinArray>& samples() const { return samples_; }
    [[nodiscard]] const PatternDistribution& distribution() const { return distribution_; }

private:
    explicit SpinEnsemble(PatternDistribution d) : distribution_(std::move(d)) {}

    PatternDistribution distribution_;
    std::vector<SpinArray> samples_;
};

/// Each spin independently uniform on {ONE, ZERO}.
SpinArray thermalize(const SpinArray& array, Rng& rng);

struct EntropyEstimate
{
    double bits = 0.0;
    std::size_t samples = 0;  ///< 0 for an analytic ensemble
    std::string note;
};

/// Shannon entropy in bits; the plug-in estimate for sample ensembles, which
/// is biased low when the sample does not cover the support.
EntropyEstimate ensemble_entropy(const SpinEnsemble& ensemble);

struct RestoreOptions
{
    Mode mode = Mode::ideal;
    double temperature = 1.0;
    double piston_speed = 0.005;
    std::uint64_t seed = 0;
    std::size_t trials = 50;  ///< physical mode: arrays drawn and reset to price the ensemble
};

struct RestoreResult
{
    std::vector<SpinArray> arrays;  ///< the restored samples (one all-ONE array for analytic input)
    OperationCost cost;             ///< per array; for physical mode the mean over trials
    double cost_std_error = 0.0;    ///< physical mode only
    ledger::Ledger ledger;
};

/// RESTORE TO ONE applied without knowledge of the input. Ideal mode prices
/// the ensemble entropy; physical mode resets every spin as a gas cell.
RestoreResult restore_to_one(const SpinEnsemble& ensemble, const RestoreOptions& options = {});

struct TailoredResult
{
    SpinArray array;
    OperationCost cost;
    std::vector<std::size_t> corrupted;
};

/// Flips exactly the spins the known pattern says are ZERO. Free; spins where
/// the pattern is wrong end up ZERO and are flagged.
TailoredResult tailored_reset(const SpinArray& array, const SpinArray& known_pattern);

nlohmann::json to_json(const SpinEnsemble& ensemble);
SpinEnsemble ensemble_from_json(const nlohmann::json& j);

}  // namespace thermodemon::spins
