#include <doctest.h>

#include <cmath>
#include <map>

#include "thermodemon/distribution.hpp"
#include "thermodemon/spins.hpp"

using namespace thermodemon;
using namespace thermodemon::spins;

namespace
{

// Oracle: −Σ p log2 p over every pattern of an independent distribution.
double entropy_by_enumeration(const std::vector<double>& p_one)
{
    const std::size_t n = p_one.size();
    double h = 0.0;
    for (unsigned v = 0; v < (1u << n); ++v)
    {
        double p = 1.0;
        for (std::size_t i = 0; i < n; ++i) p *= (v >> i) & 1u ? p_one[i] : 1.0 - p_one[i];
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

}  // namespace

TEST_CASE("binary entropy by direct summation")
{
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0));
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(0.9) == doctest::Approx(0.468996).epsilon(1e-5));
    const std::vector<double> p(4, 0.9);
    CHECK(PatternDistribution::independent(p).entropy_bits() == doctest::Approx(entropy_by_enumeration(p)).epsilon(1e-12));
    const std::vector<double> q{0.1, 0.5, 0.7, 0.99, 0.3};
    CHECK(PatternDistribution::independent(q).entropy_bits() == doctest::Approx(entropy_by_enumeration(q)).epsilon(1e-12));
}

TEST_CASE("pattern distributions")
{
    CHECK(PatternDistribution::uniform(8).entropy_bits() == doctest::Approx(8.0));
    CHECK(PatternDistribution::point({1, 0, 1}).entropy_bits() == 0.0);
    CHECK(PatternDistribution::explicit_patterns({{{0, 0}, 0.5}, {{1, 1}, 0.5}}).entropy_bits() == doctest::Approx(1.0));
    CHECK_THROWS_AS(PatternDistribution::explicit_patterns({{{0, 0}, 0.5}}), PreconditionError);
    CHECK_THROWS_AS(PatternDistribution::independent({1.2}), PreconditionError);
}

TEST_CASE("ensemble entropy")
{
    CHECK(ensemble_entropy(SpinEnsemble::uniform(5)).bits == doctest::Approx(5.0));
    CHECK(ensemble_entropy(SpinEnsemble::point(SpinArray::all_one(5))).bits == 0.0);
    const auto two = SpinEnsemble::from_samples({SpinArray::all_one(3), SpinArray::all_zero(3)});
    CHECK(ensemble_entropy(two).bits == doctest::Approx(1.0));
    CHECK(ensemble_entropy(two).samples == 2);
}

TEST_CASE("thermalization keeps the uniform ensemble stationary")
{
    Rng rng(12);
    const std::size_t n = 3, samples = 10000;
    std::map<BitPattern, int> counts;
    SpinArray a = SpinArray::all_one(n);
    for (std::size_t k = 0; k < samples; ++k)
    {
        a = thermalize(thermalize(a, rng), rng);
        ++counts[a.bits()];
    }
    // Chi-square against the uniform law, 7 degrees of freedom, 99.9% critical value.
    double chi2 = 0.0;
    const double expected = static_cast<double>(samples) / 8.0;
    for (unsigned v = 0; v < 8; ++v)
    {
        BitPattern b{static_cast<std::uint8_t>(v & 1), static_cast<std::uint8_t>((v >> 1) & 1), static_cast<std::uint8_t>((v >> 2) & 1)};
        const double o = counts[b];
        chi2 += (o - expected) * (o - expected) / expected;
    }
    CHECK(chi2 < 24.32);
    CHECK(thermalize(SpinArray(), rng).size() == 0);

    // A large thermalized sample estimates 8 bits.
    std::vector<SpinArray> many;
    for (int k = 0; k < 100000; ++k) many.push_back(thermalize(SpinArray::all_one(8), rng));
    CHECK(ensemble_entropy(SpinEnsemble::from_samples(many)).bits == doctest::Approx(8.0).epsilon(0.01));
}

TEST_CASE("restore to ONE prices the ensemble entropy")
{
    CHECK(restore_to_one(SpinEnsemble::uniform(8)).cost.env_entropy == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(restore_to_one(SpinEnsemble::point(SpinArray::all_one(8))).cost == OperationCost{});
    CHECK(restore_to_one(SpinEnsemble::product(1, 0.9)).cost.env_entropy == doctest::Approx(0.468996).epsilon(1e-5));
    const auto r = restore_to_one(SpinEnsemble::product(8, 0.9));
    CHECK(std::abs(r.cost.env_entropy - 8.0 * binary_entropy(0.9)) < 1e-6);
    CHECK(r.arrays.front().is_all_one());
    CHECK(ledger::audit_second_law(r.ledger).ok());

    RestoreOptions o;
    o.mode = Mode::physical;
    o.trials = 20;
    const auto p = restore_to_one(SpinEnsemble::uniform(8), o);
    CHECK(p.cost.env_entropy >= 8.0 - 3.0 * p.cost_std_error);
}

TEST_CASE("tailored reset")
{
    const auto zeros = SpinArray::all_zero(4);
    const auto r = tailored_reset(zeros, zeros);
    CHECK(r.array.is_all_one());
    CHECK(r.cost == OperationCost{});
    CHECK(tailored_reset(SpinArray::all_one(4), SpinArray::all_one(4)).array.is_all_one());
    const auto mismatch = tailored_reset(SpinArray({ONE, ZERO}), SpinArray({ZERO, ZERO}));
    REQUIRE(mismatch.corrupted.size() == 1);
    CHECK(mismatch.corrupted[0] == 0);
}

TEST_CASE("ensemble json")
{
    const auto e = SpinEnsemble::product(3, 0.9);
    CHECK(ensemble_entropy(ensemble_from_json(to_json(e))).bits == doctest::Approx(ensemble_entropy(e).bits));
    CHECK_THROWS_AS(ensemble_from_json(nlohmann::json::object()), PreconditionError);
}
