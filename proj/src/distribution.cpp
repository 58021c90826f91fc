#include "thermodemon/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "thermodemon/core.hpp"

namespace thermodemon
{

double binary_entropy(double p)
{
    if (p < 0.0 || p > 1.0) throw PreconditionError("probability outside [0, 1]");
    double h = 0.0;
    if (p > 0.0) h -= p * std::log2(p);
    if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
    return h;
}

PatternDistribution PatternDistribution::explicit_patterns(std::vector<std::pair<BitPattern, double>> weighted)
{
    if (weighted.empty()) throw PreconditionError("distribution has no patterns");
    std::map<BitPattern, double> merged;
    const std::size_t n = weighted.front().first.size();
    double total = 0.0;
    for (auto& [pattern, p] : weighted)
    {
        if (pattern.size() != n) throw PreconditionError("patterns differ in length");
        if (p < 0.0) throw PreconditionError("negative probability");
        for (auto b : pattern)
            if (b > 1) throw PreconditionError("pattern entries must be 0 or 1");
        merged[pattern] += p;
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw PreconditionError("distribution is not normalized");

    PatternDistribution d;
    d.length_ = n;
    for (auto& [pattern, p] : merged)
        if (p > 0.0) d.patterns_.emplace_back(pattern, p);
    return d;
}

PatternDistribution PatternDistribution::independent(std::vector<double> p_one)
{
    for (double p : p_one)
        if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError("per-position probability outside [0, 1]");
    PatternDistribution d;
    d.length_ = p_one.size();
    d.product_ = true;
    d.p_one_ = std::move(p_one);
    return d;
}

PatternDistribution PatternDistribution::uniform(std::size_t length)
{
    return independent(std::vector<double>(length, 0.5));
}

PatternDistribution PatternDistribution::point(BitPattern pattern)
{
    return explicit_patterns({{std::move(pattern), 1.0}});
}

PatternDistribution PatternDistribution::from_samples(const std::vector<BitPattern>& samples)
{
    if (samples.empty()) throw PreconditionError("no samples");
    std::map<BitPattern, std::size_t> counts;
    for (const auto& s : samples) ++counts[s];
    std::vector<std::pair<BitPattern, double>> weighted;
    const double n = static_cast<double>(samples.size());
    for (const auto& [pattern, c] : counts) weighted.emplace_back(pattern, static_cast<double>(c) / n);
    // Renormalize exactly against rounding in the division.
    double total = 0.0;
    for (const auto& w : weighted) total += w.second;
    for (auto& w : weighted) w.second /= total;
    return explicit_patterns(std::move(weighted));
}

double PatternDistribution::entropy_bits() const
{
    double h = 0.0;
    if (product_)
    {
        for (double p : p_one_) h += binary_entropy(p);
        return h;
    }
    for (const auto& [pattern, p] : patterns_) h -= p * std::log2(p);
    return std::max(0.0, h);
}

BitPattern PatternDistribution::sample(Rng& rng) const
{
    if (product_)
    {
        BitPattern out(length_);
        for (std::size_t i = 0; i < length_; ++i) out[i] = rng.bernoulli(p_one_[i]) ? 1 : 0;
        return out;
    }
    double u = rng.uniform();
    for (const auto& [pattern, p] : patterns_)
    {
        if (u < p) return pattern;
        u -= p;
    }
    return patterns_.back().first;
}

}  // namespace thermodemon
