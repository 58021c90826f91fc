#include "thermodemon/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "thermodemon/io.hpp"

namespace thermodemon::ledger
{

Macrostate::Macrostate(std::initializer_list<PhaseRegion> regions)
    : Macrostate(std::vector<PhaseRegion>(regions))
{
}

Macrostate::Macrostate(std::vector<PhaseRegion> regions) : regions_(std::move(regions))
{
    if (regions_.empty()) throw PreconditionError("macrostate needs at least one region");
    std::set<std::string> seen;
    for (const auto& r : regions_)
    {
        if (r.cell_count < 1) throw PreconditionError("region '" + r.label + "' has zero cells");
        if (!seen.insert(r.label).second) throw PreconditionError("duplicate region label '" + r.label + "'");
        if (total_ > std::numeric_limits<std::uint64_t>::max() - r.cell_count)
            throw PreconditionError("macrostate cell count overflows");
        total_ += r.cell_count;
    }
}

Macrostate Macrostate::uniform(const std::vector<std::string>& labels)
{
    std::vector<PhaseRegion> regions;
    regions.reserve(labels.size());
    for (const auto& l : labels) regions.push_back({l, 1});
    return Macrostate(std::move(regions));
}

std::vector<std::string> Macrostate::labels() const
{
    std::vector<std::string> out;
    out.reserve(regions_.size());
    for (const auto& r : regions_) out.push_back(r.label);
    return out;
}

bool Macrostate::contains(const std::string& label) const
{
    return std::any_of(regions_.begin(), regions_.end(), [&](const auto& r) { return r.label == label; });
}

std::uint64_t Macrostate::cells(const std::string& label) const
{
    for (const auto& r : regions_)
        if (r.label == label) return r.cell_count;
    return 0;
}

bool operator==(const Macrostate& a, const Macrostate& b)
{
    if (a.regions_.size() != b.regions_.size()) return false;
    return std::all_of(a.regions_.begin(), a.regions_.end(),
                       [&](const PhaseRegion& r) { return b.cells(r.label) == r.cell_count; });
}

double entropy_bits(const Macrostate& m)
{
    return std::log2(static_cast<double>(m.total_cells()));
}

Macrostate apply_bijective(const Macrostate& m, const std::map<std::string, std::string>& mapping)
{
    std::vector<PhaseRegion> out;
    std::set<std::string> images;
    for (const auto& r : m.regions())
    {
        const auto it = mapping.find(r.label);
        if (it == mapping.end()) throw PreconditionError("mapping does not cover label '" + r.label + "'");
        if (!images.insert(it->second).second)
            throw PreconditionError("mapping is not injective: two labels map to '" + it->second + "'");
        out.push_back({it->second, r.cell_count});
    }
    return Macrostate(std::move(out));
}

Transition compress(const Macrostate& m, const std::set<std::string>& survivors)
{
    if (survivors.empty()) throw PreconditionError("compress: empty survivor set");
    std::vector<PhaseRegion> kept;
    for (const auto& label : survivors)
    {
        if (!m.contains(label)) throw PreconditionError("compress: survivor '" + label + "' not in macrostate");
    }
    for (const auto& r : m.regions())
        if (survivors.contains(r.label)) kept.push_back(r);
    Macrostate after(std::move(kept));
    const double ds = entropy_bits(after) - entropy_bits(m);
    return {std::move(after), ds};
}

Transition compress_onto(const Macrostate& m, const Macrostate& target)
{
    if (target.total_cells() > m.total_cells())
        throw PreconditionError("compress_onto: target has more cells than the source");
    const double ds = entropy_bits(target) - entropy_bits(m);
    return {target, ds};
}

Transition expand_onto(const Macrostate& m, const Macrostate& target)
{
    if (target.total_cells() < m.total_cells())
        throw PreconditionError("expand_onto: target has fewer cells than the source");
    const double ds = entropy_bits(target) - entropy_bits(m);
    return {target, ds};
}

Ledger::Ledger(Macrostate initial_state, Mode mode)
    : initial_(std::move(initial_state)), initial_entropy_(entropy_bits(*initial_)), mode_(mode)
{
}

Ledger::Ledger(double initial_entropy_bits, Mode mode) : initial_entropy_(initial_entropy_bits), mode_(mode)
{
    if (!(initial_entropy_bits >= 0.0)) throw PreconditionError("initial entropy must be non-negative");
}

Ledger& Ledger::record(LedgerEntry entry)
{
    if (entry.mode != mode_)
        throw PreconditionError("ledger is " + std::string(to_string(mode_)) + " but entry '" + entry.step_name +
                                "' is " + std::string(to_string(entry.mode)));
    entries_.push_back(std::move(entry));
    return *this;
}

double Ledger::final_entropy_bits() const
{
    return entries_.empty() ? initial_entropy_bits() : entries_.back().s_sys_bits;
}

double Ledger::total_work_kT() const
{
    return std::accumulate(entries_.begin(), entries_.end(), 0.0,
                           [](double s, const LedgerEntry& e) { return s + e.work_on_system_kT; });
}

double Ledger::total_heat_kT() const
{
    return std::accumulate(entries_.begin(), entries_.end(), 0.0,
                           [](double s, const LedgerEntry& e) { return s + e.heat_from_bath_kT; });
}

double Ledger::total_env_bits() const
{
    return std::accumulate(entries_.begin(), entries_.end(), 0.0,
                           [](double s, const LedgerEntry& e) { return s + e.ds_env_bits; });
}

double AuditReport::violation_bits() const
{
    double sum = 0.0;
    for (auto i : violations) sum += steps[i].ds_total_bits;
    return sum;
}

namespace
{

void finish_report(AuditReport& report, double initial_s, double final_s, double tolerance)
{
    report.min_ds_total_bits = std::numeric_limits<double>::infinity();
    report.cumulative_ds_total_bits = 0.0;
    for (std::size_t i = 0; i < report.steps.size(); ++i)
    {
        const auto& step = report.steps[i];
        report.cumulative_ds_total_bits += step.ds_total_bits;
        report.min_ds_total_bits = std::min(report.min_ds_total_bits, step.ds_total_bits);
        if (step.ds_total_bits < -step.tolerance_bits) report.violations.push_back(i);
    }
    report.cycle_closed = std::abs(final_s - initial_s) <= tolerance;
}

}  // namespace

AuditReport audit_second_law(const Ledger& ledger, double tolerance_bits)
{
    if (ledger.empty()) throw PreconditionError("audit_second_law: empty ledger");
    AuditReport report;
    double previous = ledger.initial_entropy_bits();
    for (const auto& e : ledger.entries())
    {
        const double ds_sys = e.s_sys_bits - previous;
        report.steps.push_back({e.step_name, ds_sys, e.ds_env_bits, ds_sys + e.ds_env_bits, tolerance_bits});
        previous = e.s_sys_bits;
    }
    finish_report(report, ledger.initial_entropy_bits(), ledger.final_entropy_bits(), tolerance_bits);
    return report;
}

AuditReport audit_ensemble(std::span<const Ledger> ledgers, double sigmas, double tolerance_bits)
{
    if (ledgers.empty()) throw PreconditionError("audit_ensemble: no ledgers");
    const std::size_t steps = ledgers.front().size();
    if (steps == 0) throw PreconditionError("audit_ensemble: empty ledger");
    for (const auto& l : ledgers)
        if (l.size() != steps) throw PreconditionError("audit_ensemble: ledgers differ in length");

    const double n = static_cast<double>(ledgers.size());
    AuditReport report;
    std::vector<double> prev(ledgers.size());
    for (std::size_t j = 0; j < ledgers.size(); ++j) prev[j] = ledgers[j].initial_entropy_bits();
    double mean_initial = 0.0, mean_final = 0.0;
    for (const auto& l : ledgers)
    {
        mean_initial += l.initial_entropy_bits() / n;
        mean_final += l.final_entropy_bits() / n;
    }

    for (std::size_t k = 0; k < steps; ++k)
    {
        double sum_sys = 0.0, sum_env = 0.0, sum_tot = 0.0, sum_tot2 = 0.0;
        for (std::size_t j = 0; j < ledgers.size(); ++j)
        {
            const auto& e = ledgers[j].entries()[k];
            const double ds_sys = e.s_sys_bits - prev[j];
            prev[j] = e.s_sys_bits;
            const double tot = ds_sys + e.ds_env_bits;
            sum_sys += ds_sys;
            sum_env += e.ds_env_bits;
            sum_tot += tot;
            sum_tot2 += tot * tot;
        }
        const double mean_tot = sum_tot / n;
        const double var = n > 1 ? std::max(0.0, (sum_tot2 - n * mean_tot * mean_tot) / (n - 1)) : 0.0;
        const double se = std::sqrt(var / n);
        report.steps.push_back({ledgers.front().entries()[k].step_name, sum_sys / n, sum_env / n, mean_tot,
                                std::max(tolerance_bits, sigmas * se)});
    }
    finish_report(report, mean_initial, mean_final, tolerance_bits);
    return report;
}

nlohmann::json to_json(const Macrostate& m)
{
    nlohmann::json regions = nlohmann::json::array();
    for (const auto& r : m.regions()) regions.push_back({{"label", r.label}, {"cell_count", r.cell_count}});
    return regions;
}

Macrostate macrostate_from_json(const nlohmann::json& j)
{
    std::vector<PhaseRegion> regions;
    for (const auto& r : j) regions.push_back({r.at("label").get<std::string>(), r.at("cell_count").get<std::uint64_t>()});
    return Macrostate(std::move(regions));
}

nlohmann::json to_json(const Ledger& ledger)
{
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : ledger.entries())
    {
        entries.push_back({{"step_name", e.step_name},
                           {"S_sys", e.s_sys_bits},
                           {"dS_env", e.ds_env_bits},
                           {"work_on_system", e.work_on_system_kT},
                           {"heat_from_bath", e.heat_from_bath_kT},
                           {"mode", to_string(e.mode)}});
    }
    nlohmann::json j = {{"mode", to_string(ledger.mode())},
                        {"initial_S_sys", ledger.initial_entropy_bits()},
                        {"entries", entries}};
    if (ledger.initial_state()) j["initial_state"] = to_json(*ledger.initial_state());
    return j;
}

Ledger ledger_from_json(const nlohmann::json& j)
{
    const Mode mode = mode_from_string(j.at("mode").get<std::string>());
    Ledger ledger = j.contains("initial_state") ? Ledger(macrostate_from_json(j.at("initial_state")), mode)
                                                : Ledger(j.at("initial_S_sys").get<double>(), mode);
    for (const auto& e : j.at("entries"))
    {
        ledger.record({e.at("step_name").get<std::string>(), e.at("S_sys").get<double>(), e.at("dS_env").get<double>(),
                       e.at("work_on_system").get<double>(), e.at("heat_from_bath").get<double>(),
                       mode_from_string(e.at("mode").get<std::string>())});
    }
    return ledger;
}

nlohmann::json to_json(const AuditReport& report)
{
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : report.steps)
        steps.push_back({{"step_name", s.step_name},
                         {"dS_sys", s.ds_sys_bits},
                         {"dS_env", s.ds_env_bits},
                         {"dS_total", s.ds_total_bits},
                         {"tolerance", s.tolerance_bits}});
    return {{"ok", report.ok()},
            {"steps", steps},
            {"min_dS_total", report.min_ds_total_bits},
            {"cumulative_dS_total", report.cumulative_ds_total_bits},
            {"violations", report.violations},
            {"violation_bits", report.violation_bits()},
            {"cycle_closed", report.cycle_closed}};
}

std::string to_csv(const Ledger& ledger)
{
    io::CsvWriter csv(csv_header);
    for (const auto& e : ledger.entries())
    {
        csv.field(e.step_name)
            .field(e.s_sys_bits)
            .field(e.ds_env_bits)
            .field(e.work_on_system_kT)
            .field(e.heat_from_bath_kT)
            .field(to_string(e.mode))
            .end_row();
    }
    return csv.str();
}

}  // namespace thermodemon::ledger
