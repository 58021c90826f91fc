#include "cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "thermodemon/endemon.hpp"
#include "thermodemon/gas.hpp"
#include "thermodemon/io.hpp"
#include "thermodemon/ledger.hpp"
#include "thermodemon/protocols.hpp"
#include "thermodemon/spins.hpp"
#include "thermodemon/szilard.hpp"
#include "thermodemon/trapdoor.hpp"

namespace thermodemon::cli
{

namespace
{

using nlohmann::json;
using io::format_number;

struct ArgError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct ParamSpec
{
    std::string key;
    std::string value;
    std::string help;
};

const std::vector<ParamSpec>& common_specs()
{
    static const std::vector<ParamSpec> specs = {
        {"seed", "0", "master seed"},
        {"trajectories", "", "number of trajectories, cycles or trials"},
        {"mode", "ideal", "ideal|physical"},
        {"temperature", "1", "bath temperature (kT units, k = 1)"},
        {"piston_speed", "0.01", "piston speed as a fraction of sqrt(T/m)"},
        {"out", "", "output path prefix; nothing is written when empty"},
        {"format", "csv", "csv|json"},
        {"strict", "false", "exit 2 on a second-law audit violation"},
    };
    return specs;
}

const std::map<std::string, std::vector<ParamSpec>>& subcommand_specs()
{
    static const std::map<std::string, std::vector<ParamSpec>> specs = {
        {"compress",
         {{"trajectories", "1000", ""},
          {"mode", "physical", ""},
          {"piston_speed", "0.005", ""},
          {"factor", "2", "V_initial / V_final; below 1 expands"},
          {"length", "1", "box length"}}},
        {"szilard",
         {{"trajectories", "1", ""},
          {"length", "1", "box length"},
          {"measurement_error", "0", "probability the record names the wrong side"},
          {"measurement_cost", "0", "bits charged per measurement"},
          {"work_cap", "3", "kT; abort threshold when a piston meets the gas"},
          {"skip_reset", "false", "leave the memory set (open cycle)"}}},
        {"endemon",
         {{"trajectories", "10", ""},
          {"length", "1", "box length"},
          {"p_err", "0", "probability the memory disagrees with the molecule at branch time"},
          {"w_wrong", "", "kT charged on a wrong branch; empty: measured (physical) or the cap (ideal)"},
          {"work_cap", "3", "kT; the wrong-branch push is aborted past this"},
          {"hold_time", "0", "memory thermalization time before branching"},
          {"barrier", "0", "memory barrier height, kT"},
          {"attempt_rate", "1", "memory attempt rate r0"},
          {"blind_reset", "false", "replace the state-dependent reset by blind erasure"}}},
        {"tape",
         {{"op", "blind", "blind|known|copy|pair"},
          {"tape", "", "cell values, e.g. 01101001; empty draws a random tape"},
          {"cells", "8", "length of a random tape"},
          {"known", "", "known pattern for op=known; defaults to the tape"},
          {"zero_state", "0", "reference value of a blank cell"},
          {"piston_speed", "0.005", ""}}},
        {"spins",
         {{"op", "restore", "restore|tailored"},
          {"ensemble", "uniform", "uniform|product|point|json"},
          {"n_spins", "8", "array length"},
          {"p_one", "0.5", "per-spin probability of ONE (ensemble=product)"},
          {"spins", "", "array as 1/0 or +/- (ensemble=point, op=tailored)"},
          {"known", "", "known pattern for op=tailored; defaults to the array"},
          {"ensemble_file", "", "JSON ensemble (ensemble=json)"},
          {"piston_speed", "0.005", ""},
          {"trials", "50", "physical mode: arrays drawn to price the ensemble"}}},
        {"trapdoor",
         {{"trajectories", "10", "independent seed batches"},
          {"molecules", "50", "molecule count"},
          {"events", "1000000", "events per batch"},
          {"t_door", "", "door temperature; empty means the gas temperature"},
          {"kappa", "2", "door spring constant"},
          {"theta_open", "1", "door opening angle"},
          {"relax_rate", "50", "door closing rate"},
          {"chamber_length", "1", "chamber length"},
          {"sample_interval", "1", "time between samples"}}},
        {"audit",
         {{"ledger", "", "ledger JSON: one ledger, an array of ledgers, or {\"ledger\": ...}"},
          {"tolerance", "1e-9", "bits"},
          {"sigmas", "3", "ensemble tolerance in standard errors"}}},
    };
    return specs;
}

std::string flag_name(const std::string& key)
{
    std::string s = key;
    for (auto& c : s)
        if (c == '_') c = '-';
    return s;
}

// ---------------------------------------------------------------------------
// Typed access to the merged parameter set.

class Params
{
public:
    explicit Params(ParamMap m) : m_(std::move(m)) {}

    [[nodiscard]] const ParamMap& map() const { return m_; }
    [[nodiscard]] const std::string& str(const std::string& key) const
    {
        auto it = m_.find(key);
        if (it == m_.end()) throw ArgError("missing parameter '" + key + "'");
        return it->second;
    }
    [[nodiscard]] double num(const std::string& key) const
    {
        const auto& s = str(key);
        double v = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
            throw ArgError("parameter '" + key + "' expects a number, got '" + s + "'");
        return v;
    }
    [[nodiscard]] std::uint64_t u64(const std::string& key) const
    {
        const auto& s = str(key);
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || p != s.data() + s.size())
            throw ArgError("parameter '" + key + "' expects a non-negative integer, got '" + s + "'");
        return v;
    }
    [[nodiscard]] std::size_t count(const std::string& key) const
    {
        const auto v = u64(key);
        if (v == 0) throw ArgError("parameter '" + key + "' must be at least 1");
        return static_cast<std::size_t>(v);
    }
    [[nodiscard]] bool flag(const std::string& key) const
    {
        const auto& s = str(key);
        if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
        if (s == "false" || s == "0" || s == "no" || s == "off" || s.empty()) return false;
        throw ArgError("parameter '" + key + "' expects true or false, got '" + s + "'");
    }
    [[nodiscard]] Mode mode() const
    {
        try
        {
            return mode_from_string(str("mode"));
        }
        catch (const std::exception&)
        {
            throw ArgError("--mode expects ideal or physical, got '" + str("mode") + "'");
        }
    }
    [[nodiscard]] std::string choice(const std::string& key, std::initializer_list<const char*> allowed) const
    {
        const auto& s = str(key);
        for (const char* a : allowed)
            if (s == a) return s;
        std::string list;
        for (const char* a : allowed) list += (list.empty() ? "" : "|") + std::string(a);
        throw ArgError("parameter '" + key + "' expects " + list + ", got '" + s + "'");
    }

private:
    ParamMap m_;
};

struct RunOutput
{
    std::vector<std::string> summary;
    std::string data_csv;
    std::vector<std::pair<std::string, std::string>> extra;  // suffix, content
    bool violation = false;
};

std::string join(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
    return s;
}

std::string fixed(double v, int digits = 4)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

/// Physical ledgers of different length (aborted cycles) are audited in groups.
ledger::AuditReport audit_grouped(const std::vector<ledger::Ledger>& ledgers, bool& violation)
{
    std::map<std::size_t, std::vector<ledger::Ledger>> groups;
    for (const auto& l : ledgers) groups[l.size()].push_back(l);
    ledger::AuditReport first;
    bool have_first = false;
    for (const auto& [size, group] : groups)
    {
        const auto report = ledger::audit_ensemble(group);
        if (!report.ok()) violation = true;
        if (!have_first)
        {
            first = report;
            have_first = true;
        }
    }
    return first;
}

std::string audit_phrase(const ledger::AuditReport& a)
{
    if (a.ok()) return "audit OK (cumulative dS_total = " + format_number(a.cumulative_ds_total_bits) + " bits)";
    return "audit VIOLATION (" + std::to_string(a.violations.size()) + " step(s), " + format_number(a.violation_bits()) +
           " bits)";
}

// ---------------------------------------------------------------------------
// Subcommands.

RunOutput run_compress(const Params& p)
{
    gas::EnsembleConfig c;
    c.length = p.num("length");
    c.temperature = p.num("temperature");
    c.factor = p.num("factor");
    c.speed = p.num("piston_speed");
    c.trajectories = p.count("trajectories");
    c.master_seed = p.u64("seed");
    if (!(c.factor > 0.0) || c.factor == 1.0) throw ArgError("--factor must be positive and not 1");
    const double reference = gas::free_energy_delta(c.temperature, 1.0, 1.0 / c.factor);

    std::vector<gas::WorkHeatRecord> records;
    if (p.mode() == Mode::ideal)
        records.assign(c.trajectories, {reference, -reference, 0.0, 0.0, 0, false});
    else
        records = gas::run_volume_change_ensemble(c);
    const auto s = gas::summarize(records);

    // Cells in units of the smaller volume: S falls by log2(factor) on compression.
    const double s0 = c.factor > 1.0 ? std::log2(c.factor) : 0.0;
    const double s1 = c.factor > 1.0 ? 0.0 : std::log2(1.0 / c.factor);
    std::vector<ledger::Ledger> ledgers;
    ledgers.reserve(records.size());
    for (const auto& r : records)
    {
        ledger::Ledger l(s0, p.mode());
        l.record({"isothermal_volume_change", s1, -r.heat_from_bath / (c.temperature * ln2), r.work_on_gas,
                  r.heat_from_bath, p.mode()});
        ledgers.push_back(std::move(l));
    }
    RunOutput out;
    const auto audit = ledger::audit_ensemble(ledgers);
    out.violation = !audit.ok();

    const double dev = reference != 0.0 ? (s.mean_work_on_gas - reference) / std::abs(reference) : 0.0;
    out.summary.push_back("compress: factor " + format_number(c.factor) + ", N = " + std::to_string(s.n) +
                          ", mean work_on_gas = " + fixed(s.mean_work_on_gas) + " +- " + fixed(s.stderr_work) +
                          " kT (T ln factor = " + fixed(reference) + ", deviation " + fixed(100 * dev, 2) + "%)");
    out.summary.push_back("max bookkeeping error " + format_number(s.max_bookkeeping_error) + " kT; " + audit_phrase(audit));
    out.data_csv = gas::trajectories_csv(records);
    json j = gas::to_json(s);
    j["reference_work_kT"] = reference;
    j["relative_deviation"] = dev;
    j["audit"] = ledger::to_json(audit);
    out.extra.emplace_back(".summary.json", j.dump(2) + "\n");
    return out;
}

RunOutput run_szilard(const Params& p)
{
    szilard::EngineConfig c;
    c.mode = p.mode();
    c.temperature = p.num("temperature");
    c.length = p.num("length");
    c.piston_speed = p.num("piston_speed");
    c.measurement_error = p.num("measurement_error");
    c.measurement_cost_bits = p.num("measurement_cost");
    c.wrong_branch_work_cap = p.num("work_cap");
    const bool skip_reset = p.flag("skip_reset");
    const auto cycles = szilard::run_cycles(c, p.count("trajectories"), p.u64("seed"), skip_reset);

    RunOutput out;
    std::vector<ledger::Ledger> ledgers;
    double work = 0.0, net = 0.0, reset_env = 0.0, max_err = 0.0;
    std::size_t aborted = 0;
    for (const auto& cy : cycles)
    {
        ledgers.push_back(cy.ledger);
        work += cy.work_extracted;
        net += cy.net_work;
        reset_env += cy.reset_cost.env_entropy;
        max_err = std::max(max_err, cy.max_bookkeeping_error);
        aborted += cy.aborted;
        if (c.mode == Mode::ideal && !cy.audit.ok()) out.violation = true;
    }
    ledger::AuditReport audit = cycles.front().audit;
    if (c.mode == Mode::physical) audit = audit_grouped(ledgers, out.violation);

    std::vector<double> s_trace, env_trace;
    for (const auto& e : cycles.front().ledger.entries())
    {
        s_trace.push_back(e.s_sys_bits);
        env_trace.push_back(e.ds_env_bits);
    }
    const double n = static_cast<double>(cycles.size());
    out.summary.push_back("szilard: S_sys trace " + join(s_trace) + " bits; dS_env " + join(env_trace) + " bits; " +
                          audit_phrase(audit));
    out.summary.push_back(std::to_string(cycles.size()) + " cycle(s), mean work extracted " + fixed(work / n) +
                          " kT, mean reset " + fixed(reset_env / n) + " bits, mean net work " + fixed(net / n) +
                          " kT, aborted " + std::to_string(aborted));
    out.data_csv = szilard::cycles_csv(cycles);
    out.extra.emplace_back(".ledger.json",
                           json{{"ledger", ledger::to_json(cycles.front().ledger)}, {"audit", ledger::to_json(audit)}}.dump(2) + "\n");
    out.extra.emplace_back(".summary.json", json{{"cycles", cycles.size()},
                                                 {"mean_work_extracted_kT", work / n},
                                                 {"mean_reset_env_bits", reset_env / n},
                                                 {"mean_net_work_kT", net / n},
                                                 {"aborted", aborted},
                                                 {"max_bookkeeping_error_kT", max_err},
                                                 {"s_sys_trace_bits", s_trace},
                                                 {"ds_env_trace_bits", env_trace},
                                                 {"audit_ok", !out.violation}}
                                                .dump(2) + "\n");
    return out;
}

RunOutput run_endemon(const Params& p)
{
    endemon::ENConfig c;
    c.mode = p.mode();
    c.temperature = p.num("temperature");
    c.length = p.num("length");
    c.piston_speed = p.num("piston_speed");
    c.error.p_err = p.num("p_err");
    if (!p.str("w_wrong").empty()) c.error.w_wrong = p.num("w_wrong");
    c.error.work_cap = p.num("work_cap");
    c.hold_time = p.num("hold_time");
    c.substitute_blind_reset = p.flag("blind_reset");
    endemon::TwoStateMemory memory{Side::L, p.num("barrier"), p.num("attempt_rate")};
    if (c.hold_time > 0.0 && std::isinf(memory.barrier_height)) c.hold_time = 0.0;

    const auto outcomes = endemon::run_en_cycles(c, memory, p.count("trajectories"), p.u64("seed"));
    const auto s = endemon::summarize(outcomes, c, memory);

    RunOutput out;
    std::vector<ledger::Ledger> ledgers;
    double max_err = 0.0;
    for (const auto& o : outcomes)
    {
        ledgers.push_back(o.ledger);
        max_err = std::max(max_err, o.max_bookkeeping_error);
    }
    std::string audit_text;
    if (c.mode == Mode::ideal)
    {
        out.violation = s.violating_cycles > 0;
        audit_text = out.violation ? "audit VIOLATION " + format_number(s.violation_bits / static_cast<double>(s.cycles)) +
                                         " bit/cycle (cumulative " + format_number(s.violation_bits) + " bits over " +
                                         std::to_string(s.cycles) + " cycles)"
                                   : "audit OK";
    }
    else
    {
        audit_grouped(ledgers, out.violation);
        audit_text = out.violation ? "ensemble audit VIOLATION" : "ensemble audit OK";
    }
    out.summary.push_back("endemon: " + audit_text);
    out.summary.push_back("mean net work " + fixed(s.mean_net_work) + " +- " + fixed(s.stderr_net_work) +
                          " kT (expected " + fixed(s.expected_net_work) + "), wrong-branch rate " +
                          fixed(s.observed_error_rate) + ", work cap " + format_number(s.work_cap) + " kT");
    out.data_csv = endemon::cycles_csv(outcomes);
    json j = endemon::to_json(s);
    j["max_bookkeeping_error_kT"] = max_err;
    j["audit_ok"] = !out.violation;
    out.extra.emplace_back(".summary.json", j.dump(2) + "\n");
    out.extra.emplace_back(".ledger.json", json{{"ledger", ledger::to_json(outcomes.front().ledger)},
                                                {"audit", ledger::to_json(outcomes.front().audit)}}
                                               .dump(2) + "\n");
    return out;
}

protocols::Tape tape_or_random(const Params& p)
{
    if (!p.str("tape").empty()) return protocols::Tape::parse(p.str("tape"));
    Rng rng(derive_seed(p.u64("seed"), 0, 21));
    BitPattern bits(p.count("cells"));
    for (auto& b : bits) b = rng.bernoulli(0.5) ? 1 : 0;
    return protocols::Tape(std::move(bits));
}

/// Physical single runs: the cells are the sample for the per-step audit.
bool physical_cells_violate(const ledger::Ledger& l)
{
    const auto a = ledger::audit_second_law(l, 0.0);
    if (a.steps.empty()) return false;
    double sum = 0.0, sum2 = 0.0;
    for (const auto& s : a.steps)
    {
        sum += s.ds_total_bits;
        sum2 += s.ds_total_bits * s.ds_total_bits;
    }
    const double n = static_cast<double>(a.steps.size());
    const double mean = sum / n;
    const double se = n > 1 ? std::sqrt(std::max(0.0, (sum2 - n * mean * mean) / (n - 1)) / n) : 0.0;
    return mean < -std::max(1e-9, 3.0 * se);
}

RunOutput run_tape(const Params& p)
{
    protocols::ProtocolOptions o;
    o.mode = p.mode();
    o.temperature = p.num("temperature");
    o.piston_speed = p.num("piston_speed");
    o.seed = p.u64("seed");
    const auto zero = p.u64("zero_state");
    if (zero > 1) throw ArgError("--zero-state must be 0 or 1");
    o.zero_state = static_cast<std::uint8_t>(zero);
    const std::string op = p.choice("op", {"blind", "known", "copy", "pair"});
    const auto tape = tape_or_random(p);

    ledger::Ledger led;
    OperationCost cost;
    std::string result;
    std::size_t corrupted = 0;
    if (op == "blind")
    {
        const auto r = protocols::blind_reset_tape(tape, o);
        led = r.ledger;
        cost = r.cost;
        result = r.tape.str();
        corrupted = r.corrupted.size();
    }
    else if (op == "known")
    {
        const auto known = p.str("known").empty() ? tape : protocols::Tape::parse(p.str("known"));
        const auto r = protocols::known_reset_tape(tape, known, o);
        led = r.ledger;
        cost = r.cost;
        result = r.tape.str();
        corrupted = r.corrupted.size();
    }
    else if (op == "copy")
    {
        const auto r = protocols::copy_tape(tape, protocols::Tape(tape.size(), o.zero_state), o);
        led = r.ledger;
        cost = r.cost;
        result = r.dst.str();
    }
    else
    {
        const auto r = protocols::reset_pair_via_copy(tape, tape, o);
        led = r.ledger;
        cost = r.cost;
        result = r.tape.str();
        corrupted = r.corrupted.size();
    }

    RunOutput out;
    const auto audit = ledger::audit_second_law(led);
    out.violation = o.mode == Mode::ideal ? !audit.ok() : physical_cells_violate(led);
    out.summary.push_back("tape " + op + ": input " + tape.str() + " -> " + result + ", env " +
                          format_number(o.mode == Mode::ideal ? cost.env_entropy : std::round(cost.env_entropy * 1e4) / 1e4) +
                          " bits, work " + fixed(cost.work) + " kT, corrupted " + std::to_string(corrupted));
    out.summary.push_back(o.mode == Mode::ideal ? audit_phrase(audit)
                                                : std::string(out.violation ? "cell audit VIOLATION" : "cell audit OK"));
    out.data_csv = ledger::to_csv(led);
    out.extra.emplace_back(".ledger.json", json{{"ledger", ledger::to_json(led)}, {"audit", ledger::to_json(audit)}}.dump(2) + "\n");
    return out;
}

spins::SpinArray parse_spins(const std::string& text)
{
    std::vector<std::int8_t> s;
    for (char c : text)
    {
        if (c == '1' || c == '+')
            s.push_back(spins::ONE);
        else if (c == '0' || c == '-')
            s.push_back(spins::ZERO);
        else
            throw ArgError(std::string("spin arrays use 1/0 or +/-, got '") + c + "'");
    }
    if (s.empty()) throw ArgError("empty spin array");
    return spins::SpinArray(std::move(s));
}

RunOutput run_spins(const Params& p)
{
    const std::string op = p.choice("op", {"restore", "tailored"});
    RunOutput out;
    if (op == "tailored")
    {
        if (p.str("spins").empty()) throw ArgError("op=tailored needs --spins");
        const auto array = parse_spins(p.str("spins"));
        const auto known = p.str("known").empty() ? array : parse_spins(p.str("known"));
        const auto r = spins::tailored_reset(array, known);
        ledger::Ledger led(0.0, p.mode());
        led.record({"tailored_reset", 0.0, r.cost.env_entropy, r.cost.work, -r.cost.work, p.mode()});
        out.summary.push_back("spins tailored: cost " + format_number(r.cost.env_entropy) + " bits, corrupted " +
                              std::to_string(r.corrupted.size()));
        out.data_csv = ledger::to_csv(led);
        out.violation = !ledger::audit_second_law(led).ok();
        return out;
    }

    const std::string kind = p.choice("ensemble", {"uniform", "product", "point", "json"});
    const std::size_t n = p.count("n_spins");
    spins::SpinEnsemble ensemble = spins::SpinEnsemble::uniform(1);
    if (kind == "uniform")
        ensemble = spins::SpinEnsemble::uniform(n);
    else if (kind == "product")
        ensemble = spins::SpinEnsemble::product(n, p.num("p_one"));
    else if (kind == "point")
        ensemble = spins::SpinEnsemble::point(p.str("spins").empty() ? spins::SpinArray::all_one(n) : parse_spins(p.str("spins")));
    else
    {
        if (p.str("ensemble_file").empty()) throw ArgError("ensemble=json needs --ensemble-file");
        ensemble = spins::ensemble_from_json(json::parse(io::read_file(p.str("ensemble_file"))));
    }

    spins::RestoreOptions o;
    o.mode = p.mode();
    o.temperature = p.num("temperature");
    o.piston_speed = p.num("piston_speed");
    o.seed = p.u64("seed");
    o.trials = p.count("trials");
    const auto h = spins::ensemble_entropy(ensemble);
    const auto r = spins::restore_to_one(ensemble, o);
    const auto audit = ledger::audit_second_law(r.ledger);
    out.violation = o.mode == Mode::ideal ? !audit.ok() : r.cost.env_entropy - h.bits < -3.0 * r.cost_std_error - 1e-9;
    out.summary.push_back("spins restore: H = " + format_number(h.bits) + " bits (" + h.note + "), cost " +
                          format_number(r.cost.env_entropy) + " bits to environment, work " + fixed(r.cost.work) + " kT");
    out.summary.push_back(audit_phrase(audit));
    out.data_csv = ledger::to_csv(r.ledger);
    out.extra.emplace_back(".summary.json", json{{"entropy_bits", h.bits},
                                                 {"env_bits", r.cost.env_entropy},
                                                 {"env_bits_std_error", r.cost_std_error},
                                                 {"work_kT", r.cost.work},
                                                 {"ensemble", spins::to_json(ensemble)}}
                                                .dump(2) + "\n");
    return out;
}

RunOutput run_trapdoor(const Params& p)
{
    trapdoor::WorldParams w;
    w.molecules = p.count("molecules");
    w.chamber_length = p.num("chamber_length");
    w.gas_temperature = p.num("temperature");
    w.door.kappa = p.num("kappa");
    w.door.theta_open = p.num("theta_open");
    w.door.relax_rate = p.num("relax_rate");
    w.door.temperature = p.str("t_door").empty() ? w.gas_temperature : p.num("t_door");
    const auto batches = trapdoor::run_batches(w, p.u64("events"), p.count("trajectories"), p.u64("seed"),
                                               p.num("sample_interval"));

    RunOutput out;
    std::size_t quiet = 0, rectified = 0;
    json stats = json::array();
    for (std::size_t i = 0; i < batches.size(); ++i)
    {
        const auto& b = batches[i];
        quiet += std::abs(b.stats.flux_z) < 3.0;
        rectified += b.stats.verdict == "rectification";
        json j = trapdoor::to_json(b.stats);
        j["seed"] = b.seed;
        j["events"] = b.series.events;
        j["crossings_left_to_right"] = b.series.crossings_left_to_right;
        j["crossings_right_to_left"] = b.series.crossings_right_to_left;
        j["blocked_hits"] = b.series.blocked_hits;
        j["door_kicks"] = b.series.door_kicks;
        stats.push_back(j);
        if (i > 0) out.extra.emplace_back(".batch" + std::to_string(i) + ".csv", trapdoor::series_csv(b.series));
    }
    // A thermal door that rectifies would be a perpetual motion machine.
    out.violation = w.door.temperature == w.gas_temperature && rectified > 0;
    out.summary.push_back("trapdoor: T_door = " + format_number(w.door.temperature) + ", T_gas = " +
                          format_number(w.gas_temperature) + ", " + std::to_string(batches.size()) + " batch(es): " +
                          std::to_string(quiet) + " with |mean net flux| < 3 SE, " + std::to_string(rectified) +
                          " rectifying; batch 0 imbalance " + fixed(batches.front().stats.mean_imbalance, 3) + " +- " +
                          fixed(batches.front().stats.imbalance_std_error, 3) + " (" + batches.front().stats.verdict + ")");
    out.data_csv = trapdoor::series_csv(batches.front().series);
    out.extra.emplace_back(".summary.json", json{{"batches", stats},
                                                 {"batches_flux_within_3se", quiet},
                                                 {"batches_rectifying", rectified},
                                                 {"open_energy_kT", w.door.open_energy()}}
                                                .dump(2) + "\n");
    return out;
}

RunOutput run_audit(const Params& p)
{
    if (p.str("ledger").empty()) throw ArgError("audit needs --ledger <file>");
    json j;
    try
    {
        j = json::parse(io::read_file(p.str("ledger")));
    }
    catch (const json::exception& e)
    {
        throw ArgError("cannot parse ledger JSON: " + std::string(e.what()));
    }
    if (j.is_object() && j.contains("ledger")) j = j.at("ledger");
    const double tol = p.num("tolerance");
    ledger::AuditReport a;
    if (j.is_array())
    {
        std::vector<ledger::Ledger> ledgers;
        for (const auto& x : j) ledgers.push_back(ledger::ledger_from_json(x));
        a = ledgers.size() == 1 ? ledger::audit_second_law(ledgers.front(), tol)
                                : ledger::audit_ensemble(ledgers, p.num("sigmas"), tol);
    }
    else
    {
        a = ledger::audit_second_law(ledger::ledger_from_json(j), tol);
    }
    RunOutput out;
    out.violation = !a.ok();
    out.summary.push_back("audit: " + std::to_string(a.steps.size()) + " step(s), min dS_total = " +
                          format_number(a.min_ds_total_bits) + " bits, " + audit_phrase(a));
    io::CsvWriter csv("step,dS_sys_bits,dS_env_bits,dS_total_bits,tolerance_bits");
    for (const auto& s : a.steps)
        csv.field(s.step_name).field(s.ds_sys_bits).field(s.ds_env_bits).field(s.ds_total_bits).field(s.tolerance_bits).end_row();
    out.data_csv = csv.str();
    out.extra.emplace_back(".audit.json", ledger::to_json(a).dump(2) + "\n");
    return out;
}

RunOutput dispatch(const std::string& sub, const Params& p)
{
    if (sub == "compress") return run_compress(p);
    if (sub == "szilard") return run_szilard(p);
    if (sub == "endemon") return run_endemon(p);
    if (sub == "tape") return run_tape(p);
    if (sub == "spins") return run_spins(p);
    if (sub == "trapdoor") return run_trapdoor(p);
    if (sub == "audit") return run_audit(p);
    throw ArgError("unknown subcommand '" + sub + "'");
}

// ---------------------------------------------------------------------------
// Output.

std::string csv_to_json(const std::string& csv)
{
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    {
        std::istringstream h(line);
        std::string f;
        while (std::getline(h, f, ',')) header.push_back(f);
    }
    json rows = json::array();
    while (std::getline(in, line))
    {
        json row = json::object();
        std::istringstream r(line);
        std::string f;
        for (std::size_t i = 0; i < header.size() && std::getline(r, f, ','); ++i)
        {
            double v = 0.0;
            auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (!f.empty() && ec == std::errc() && p == f.data() + f.size())
                row[header[i]] = v;
            else
                row[header[i]] = f;
        }
        rows.push_back(row);
    }
    return rows.dump(2) + "\n";
}

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int execute(const std::string& sub, const ParamMap& merged, std::ostream& out, std::ostream& err)
{
    const Params p(merged);
    const std::string format = p.choice("format", {"csv", "json"});
    const bool strict = p.flag("strict");
    (void)p.u64("seed");
    RunOutput r = dispatch(sub, p);

    const std::string& prefix = p.str("out");
    if (!prefix.empty())
    {
        std::vector<std::string> outputs;
        const std::string data_path = prefix + (format == "csv" ? ".csv" : ".json");
        io::write_file(data_path, format == "csv" ? r.data_csv : csv_to_json(r.data_csv));
        outputs.push_back(data_path);
        for (const auto& [suffix, content] : r.extra)
        {
            io::write_file(prefix + suffix, content);
            outputs.push_back(prefix + suffix);
        }
        const json manifest = {{"tool", "thermodemon"},
                               {"version", THERMODEMON_VERSION},
                               {"subcommand", sub},
                               {"seed", p.u64("seed")},
                               {"parameters", merged},
                               {"timestamp", utc_timestamp()},
                               {"outputs", outputs}};
        io::write_file(prefix + ".manifest.json", manifest.dump(2) + "\n");
        r.summary.push_back("wrote " + data_path + " and " + prefix + ".manifest.json");
    }
    for (const auto& line : r.summary) out << line << "\n";
    if (strict && r.violation)
    {
        err << "strict: second-law audit violation\n";
        return 2;
    }
    return 0;
}

}  // namespace

ParamMap parse_config(const std::string& text, const std::string& origin)
{
    ParamMap m;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    auto trim = [](std::string s)
    {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line))
    {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = origin + ":" + std::to_string(number);
        if (eq == std::string::npos) throw std::runtime_error(where + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        for (auto& c : key)
            if (c == '-') c = '_';
        if (key.empty()) throw std::runtime_error(where + ": empty key");
        if (!m.emplace(key, value).second) throw std::runtime_error(where + ": duplicate key '" + key + "'");
    }
    return m;
}

ParamMap load_config(const std::string& path) { return parse_config(io::read_file(path), path); }

ParamMap default_params(const std::string& subcommand)
{
    const auto& table = subcommand_specs();
    const auto it = table.find(subcommand);
    if (it == table.end()) throw ArgError("unknown subcommand '" + subcommand + "'");
    ParamMap m;
    for (const auto& s : common_specs()) m[s.key] = s.value;
    for (const auto& s : it->second) m[s.key] = s.value;
    return m;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"thermodemon: thermodynamics-of-computation simulator"};
    app.set_version_flag("--version", THERMODEMON_VERSION);
    app.require_subcommand(1);

    std::map<std::string, ParamMap> given;
    std::map<std::string, std::string> config_path;
    std::map<std::string, std::vector<std::pair<std::string, CLI::Option*>>> options;
    std::map<std::string, CLI::App*> subs;
    const std::map<std::string, std::string> about = {
        {"audit", "second-law audit of a saved ledger"},
        {"compress", "isothermal compression ensemble of a one-molecule gas"},
        {"endemon", "engine with a two-state memory and state-dependent reset"},
        {"spins", "RESTORE TO ONE on a spin ensemble"},
        {"szilard", "Szilard engine cycles with a three-region memory"},
        {"tape", "reset and copy protocols on a tape of gas cells"},
        {"trapdoor", "spring-loaded trapdoor between two gas chambers"},
    };
    for (const auto& [name, specs] : subcommand_specs())
    {
        auto* sc = app.add_subcommand(name, about.count(name) ? about.at(name) : name);
        subs[name] = sc;
        ParamMap defaults = default_params(name);
        std::map<std::string, std::string> help;
        for (const auto& s : common_specs()) help[s.key] = s.help;
        for (const auto& s : specs)
            if (!s.help.empty()) help[s.key] = s.help;
        for (const auto& [key, def] : defaults)
        {
            auto& slot = given[name][key];
            CLI::Option* opt;
            if (key == "strict")
                opt = sc->add_flag_callback("--strict", [&slot] { slot = "true"; }, help[key]);
            else
            {
                std::string flags = "--" + flag_name(key);
                if (key == "trajectories") flags = "-n," + flags;
                opt = sc->add_option(flags, slot, help[key] + (def.empty() ? "" : " [" + def + "]"));
            }
            options[name].emplace_back(key, opt);
        }
        sc->add_option("--config", config_path[name], "key = value parameter file");
    }
    auto* rerun = app.add_subcommand("rerun", "repeat the run recorded in a manifest");
    std::string manifest_path, rerun_out;
    rerun->add_option("manifest", manifest_path, "manifest JSON")->required();
    rerun->add_option("--out", rerun_out, "output prefix (default: the manifest's)");

    std::vector<const char*> argv{"thermodemon"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try
    {
        app.parse(static_cast<int>(argv.size()), argv.data());
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try
    {
        if (rerun->parsed())
        {
            const json m = json::parse(io::read_file(manifest_path));
            const std::string sub = m.at("subcommand").get<std::string>();
            ParamMap merged = default_params(sub);
            for (const auto& [k, v] : m.at("parameters").items())
            {
                if (!merged.count(k)) throw ArgError("manifest parameter '" + k + "' is not known");
                merged[k] = v.get<std::string>();
            }
            if (!rerun_out.empty()) merged["out"] = rerun_out;
            return execute(sub, merged, out, err);
        }

        for (const auto& [name, sc] : subs)
        {
            if (!sc->parsed()) continue;
            ParamMap merged = default_params(name);
            if (!config_path[name].empty())
            {
                for (const auto& [k, v] : load_config(config_path[name]))
                {
                    if (!merged.count(k)) throw ArgError(config_path[name] + ": unknown key '" + k + "'");
                    merged[k] = v;
                }
            }
            for (const auto& [key, opt] : options[name])
                if (opt->count() > 0) merged[key] = given[name][key];
            return execute(name, merged, out, err);
        }
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace thermodemon::cli
