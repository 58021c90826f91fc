#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thermodemon/core.hpp"

namespace thermodemon::ledger
{

/// A labeled region of phase space measured in reference cells.
struct PhaseRegion
{
    std::string label;
    std::uint64_t cell_count = 1;

    friend bool operator==(const PhaseRegion&, const PhaseRegion&) = default;
};

/// A non-empty set of uniquely labeled regions. Entropy counts cells, so it
/// depends only on the multiset of cell counts and not on the labels.
class Macrostate
{
public:
    Macrostate(std::initializer_list<PhaseRegion> regions);
    explicit Macrostate(std::vector<PhaseRegion> regions);

    /// One cell per label.
    static Macrostate uniform(const std::vector<std::string>& labels);

    [[nodiscard]] const std::vector<PhaseRegion>& regions() const { return regions_; }
    [[nodiscard]] std::vector<std::string> labels() const;
    [[nodiscard]] bool contains(const std::string& label) const;
    [[nodiscard]] std::uint64_t cells(const std::string& label) const;
    [[nodiscard]] std::uint64_t total_cells() const { return total_; }

    /// Order-insensitive comparison.
    friend bool operator==(const Macrostate& a, const Macrostate& b);

private:
    std::vector<PhaseRegion> regions_;
    std::uint64_t total_ = 0;
};

/// log2 of the total cell count.
double entropy_bits(const Macrostate& m);

/// Relabels every region. The mapping must cover all labels of m and be injective.
Macrostate apply_bijective(const Macrostate& m, const std::map<std::string, std::string>& mapping);

struct Transition
{
    Macrostate state;
    double ds_sys_bits = 0.0;
};

/// Keeps only the surviving regions of m. dS_sys ≤ 0.
Transition compress(const Macrostate& m, const std::set<std::string>& survivors);

/// Many-to-one map of m onto a target with no more cells than m.
Transition compress_onto(const Macrostate& m, const Macrostate& target);

/// Lets the system spread onto a target with at least as many cells as m.
Transition expand_onto(const Macrostate& m, const Macrostate& target);

struct LedgerEntry
{
    std::string step_name;
    double s_sys_bits = 0.0;
    double ds_env_bits = 0.0;
    double work_on_system_kT = 0.0;
    double heat_from_bath_kT = 0.0;
    Mode mode = Mode::ideal;

    friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

/// Append-only protocol record. s_sys_bits of entry k is the system entropy
/// after step k; the entropy before the first step comes from the initial
/// macrostate, or is given directly for ensembles that are not uniform over cells.
class Ledger
{
public:
    Ledger() : Ledger(0.0, Mode::ideal) {}
    Ledger(Macrostate initial_state, Mode mode);
    Ledger(double initial_entropy_bits, Mode mode);

    /// Appends an entry. Throws PreconditionError if the entry's mode differs.
    Ledger& record(LedgerEntry entry);

    [[nodiscard]] const std::vector<LedgerEntry>& entries() const { return entries_; }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] bool empty() const { return entries_.empty(); }
    [[nodiscard]] Mode mode() const { return mode_; }
    [[nodiscard]] const std::optional<Macrostate>& initial_state() const { return initial_; }
    [[nodiscard]] double initial_entropy_bits() const { return initial_entropy_; }
    [[nodiscard]] double final_entropy_bits() const;

    [[nodiscard]] double total_work_kT() const;
    [[nodiscard]] double total_heat_kT() const;
    [[nodiscard]] double total_env_bits() const;

private:
    std::optional<Macrostate> initial_;
    double initial_entropy_ = 0.0;
    Mode mode_;
    std::vector<LedgerEntry> entries_;
};

struct StepAudit
{
    std::string step_name;
    double ds_sys_bits = 0.0;
    double ds_env_bits = 0.0;
    double ds_total_bits = 0.0;
    double tolerance_bits = 0.0;
};

struct AuditReport
{
    std::vector<StepAudit> steps;
    double min_ds_total_bits = 0.0;
    double cumulative_ds_total_bits = 0.0;
    std::vector<std::size_t> violations;  ///< indices into steps
    /// The final system entropy equals the initial one.
    bool cycle_closed = false;

    [[nodiscard]] bool ok() const { return violations.empty(); }
    [[nodiscard]] double violation_bits() const;  ///< sum of ΔS_total over violating steps
};

/// Flags every step with ΔS_sys + dS_env < −tolerance. Throws on an empty ledger.
AuditReport audit_second_law(const Ledger& ledger, double tolerance_bits = 1e-9);

/// Audits the step-wise mean of an ensemble of same-shaped physical ledgers.
/// A step is tolerated down to −max(tolerance, sigmas · standard error).
AuditReport audit_ensemble(std::span<const Ledger> ledgers, double sigmas = 3.0, double tolerance_bits = 1e-9);

nlohmann::json to_json(const Macrostate& m);
Macrostate macrostate_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Ledger& ledger);
Ledger ledger_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AuditReport& report);

inline constexpr const char* csv_header = "step,S_sys_bits,dS_env_bits,work_kT,heat_kT,mode";
std::string to_csv(const Ledger& ledger);

}  // namespace thermodemon::ledger
