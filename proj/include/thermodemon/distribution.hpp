#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "thermodemon/random.hpp"

namespace thermodemon
{

using BitPattern = std::vector<std::uint8_t>;

/// −p log2 p − (1−p) log2(1−p), with 0 log 0 = 0.
double binary_entropy(double p);

/// A probability distribution over fixed-length bit patterns: either an
/// explicit list of patterns or independent per-position probabilities.
class PatternDistribution
{
public:
    /// Probabilities must sum to 1 within 1e-9; duplicate patterns are merged.
    static PatternDistribution explicit_patterns(std::vector<std::pair<BitPattern, double>> weighted);
    static PatternDistribution independent(std::vector<double> p_one);
    static PatternDistribution uniform(std::size_t length);
    static PatternDistribution point(BitPattern pattern);
    /// Empirical distribution of the samples (plug-in estimate).
    static PatternDistribution from_samples(const std::vector<BitPattern>& samples);

    [[nodiscard]] std::size_t length() const { return length_; }
    [[nodiscard]] bool is_product() const { return product_; }
    [[nodiscard]] const std::vector<double>& p_one() const { return p_one_; }
    [[nodiscard]] const std::vector<std::pair<BitPattern, double>>& patterns() const { return patterns_; }

    /// Shannon entropy in bits.
    [[nodiscard]] double entropy_bits() const;
    [[nodiscard]] BitPattern sample(Rng& rng) const;

private:
    PatternDistribution() = default;

    std::size_t length_ = 0;
    bool product_ = false;
    std::vector<double> p_one_;
    std::vector<std::pair<BitPattern, double>> patterns_;
};

}  // namespace thermodemon
