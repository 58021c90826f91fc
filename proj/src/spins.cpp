#include "thermodemon/spins.hpp"

#include <cmath>

#include "thermodemon/protocols.hpp"

namespace thermodemon::spins
{

SpinArray::SpinArray(std::vector<std::int8_t> spins) : spins_(std::move(spins))
{
    for (auto s : spins_)
        if (s != ONE && s != ZERO) throw PreconditionError("spins must be +1 or -1");
}

bool SpinArray::is_all_one() const
{
    for (auto s : spins_)
        if (s != ONE) return false;
    return true;
}

BitPattern SpinArray::bits() const
{
    BitPattern out;
    out.reserve(spins_.size());
    for (auto s : spins_) out.push_back(s == ONE ? 1 : 0);
    return out;
}

SpinArray SpinArray::from_bits(const BitPattern& bits)
{
    std::vector<std::int8_t> s;
    s.reserve(bits.size());
    for (auto b : bits) s.push_back(b ? ONE : ZERO);
    return SpinArray(std::move(s));
}

SpinEnsemble SpinEnsemble::from_samples(std::vector<SpinArray> samples)
{
    if (samples.empty()) throw PreconditionError("spin ensemble has no samples");
    std::vector<BitPattern> bits;
    bits.reserve(samples.size());
    for (const auto& s : samples)
    {
        if (s.size() != samples.front().size()) throw PreconditionError("spin arrays differ in length");
        bits.push_back(s.bits());
    }
    SpinEnsemble e(PatternDistribution::from_samples(bits));
    e.samples_ = std::move(samples);
    return e;
}

SpinEnsemble SpinEnsemble::analytic(PatternDistribution distribution) { return SpinEnsemble(std::move(distribution)); }

SpinEnsemble SpinEnsemble::product(std::size_t n, double p_one)
{
    return analytic(PatternDistribution::independent(std::vector<double>(n, p_one)));
}

SpinArray thermalize(const SpinArray& array, Rng& rng)
{
    std::vector<std::int8_t> out(array.size());
    for (auto& s : out) s = rng.bernoulli(0.5) ? ONE : ZERO;
    return SpinArray(std::move(out));
}

EntropyEstimate ensemble_entropy(const SpinEnsemble& ensemble)
{
    if (ensemble.is_analytic()) return {ensemble.distribution().entropy_bits(), 0, "analytic"};
    const std::size_t n = ensemble.samples().size();
    return {ensemble.distribution().entropy_bits(), n,
            "plug-in estimate from " + std::to_string(n) + " samples; biased low for undersampled supports"};
}

RestoreResult restore_to_one(const SpinEnsemble& ensemble, const RestoreOptions& options)
{
    const std::size_t n = ensemble.length();
    const double h = ensemble_entropy(ensemble).bits;
    RestoreResult result{{}, {}, 0.0, ledger::Ledger(h, options.mode)};

    const std::size_t outputs = ensemble.is_analytic() ? 1 : ensemble.samples().size();
    result.arrays.assign(outputs, SpinArray::all_one(n));

    if (options.mode == Mode::ideal)
    {
        result.cost = OperationCost::landauer(h, options.temperature);
        result.ledger.record({"restore_to_one", 0.0, result.cost.env_entropy, result.cost.work,
                              -result.cost.work, Mode::ideal});
        return result;
    }

    // Each spin is a gas cell whose reference value is ONE.
    if (options.trials == 0) throw PreconditionError("restore_to_one: physical mode needs at least one trial");
    protocols::ProtocolOptions cell_opts{Mode::physical, options.temperature, options.piston_speed, 0, 1};
    Rng pick(derive_seed(options.seed, 0, 11));
    double sum_work = 0.0, sum_env = 0.0, sum_env2 = 0.0, sum_heat = 0.0;
    for (std::size_t t = 0; t < options.trials; ++t)
    {
        const BitPattern input = ensemble.is_analytic()
                                     ? ensemble.distribution().sample(pick)
                                     : ensemble.samples()[t % ensemble.samples().size()].bits();
        cell_opts.seed = derive_seed(options.seed, t, 12);
        const auto run = protocols::blind_reset_tape(protocols::Tape(input), cell_opts);
        if (!run.corrupted.empty()) throw std::logic_error("physical blind reset left a spin unset");
        sum_work += run.cost.work;
        sum_env += run.cost.env_entropy;
        sum_env2 += run.cost.env_entropy * run.cost.env_entropy;
        sum_heat += run.ledger.total_heat_kT();
    }
    const double k = static_cast<double>(options.trials);
    result.cost = {sum_work / k, sum_env / k};
    if (options.trials > 1)
        result.cost_std_error =
            std::sqrt(std::max(0.0, (sum_env2 - k * result.cost.env_entropy * result.cost.env_entropy) / (k - 1)) / k);
    result.ledger.record({"restore_to_one", 0.0, result.cost.env_entropy, result.cost.work, sum_heat / k,
                          Mode::physical});
    return result;
}

TailoredResult tailored_reset(const SpinArray& array, const SpinArray& known_pattern)
{
    if (array.size() != known_pattern.size()) throw PreconditionError("tailored_reset: pattern length differs");
    std::vector<std::int8_t> out(array.size());
    TailoredResult r;
    for (std::size_t i = 0; i < array.size(); ++i)
    {
        // A ZERO in the pattern selects the reversible ZERO→ONE procedure for that spin.
        out[i] = known_pattern[i] == ZERO ? static_cast<std::int8_t>(-array[i]) : array[i];
        if (out[i] != ONE) r.corrupted.push_back(i);
    }
    r.array = SpinArray(std::move(out));
    return r;
}

nlohmann::json to_json(const SpinEnsemble& ensemble)
{
    if (!ensemble.is_analytic())
    {
        nlohmann::json samples = nlohmann::json::array();
        for (const auto& s : ensemble.samples()) samples.push_back(s.spins());
        return {{"samples", samples}};
    }
    const auto& d = ensemble.distribution();
    if (d.is_product()) return {{"p_one", d.p_one()}};
    nlohmann::json patterns = nlohmann::json::array();
    for (const auto& [bits, p] : d.patterns())
        patterns.push_back({{"spins", SpinArray::from_bits(bits).spins()}, {"probability", p}});
    return {{"patterns", patterns}};
}

SpinEnsemble ensemble_from_json(const nlohmann::json& j)
{
    if (j.contains("samples"))
    {
        std::vector<SpinArray> samples;
        for (const auto& s : j.at("samples")) samples.emplace_back(s.get<std::vector<std::int8_t>>());
        return SpinEnsemble::from_samples(std::move(samples));
    }
    if (j.contains("p_one")) return SpinEnsemble::analytic(PatternDistribution::independent(j.at("p_one").get<std::vector<double>>()));
    if (j.contains("patterns"))
    {
        std::vector<std::pair<BitPattern, double>> weighted;
        for (const auto& p : j.at("patterns"))
            weighted.emplace_back(SpinArray(p.at("spins").get<std::vector<std::int8_t>>()).bits(),
                                  p.at("probability").get<double>());
        return SpinEnsemble::analytic(PatternDistribution::explicit_patterns(std::move(weighted)));
    }
    throw PreconditionError("spin ensemble JSON needs 'samples', 'p_one' or 'patterns'");
}

}  // namespace thermodemon::spins
