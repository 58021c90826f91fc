#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "thermodemon/endemon.hpp"
#include "thermodemon/gas.hpp"
#include "thermodemon/ledger.hpp"
#include "thermodemon/protocols.hpp"
#include "thermodemon/spins.hpp"
#include "thermodemon/szilard.hpp"
#include "thermodemon/trapdoor.hpp"

namespace py = pybind11;
using namespace thermodemon;

namespace
{

py::object to_py(const nlohmann::json& j)
{
    return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_py(const py::object& o)
{
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

Mode parse_mode(const std::string& m)
{
    if (m == "ideal") return Mode::ideal;
    if (m == "physical") return Mode::physical;
    throw PreconditionError("mode must be 'ideal' or 'physical'");
}

py::dict cost_dict(const OperationCost& c)
{
    py::dict d;
    d["work"] = c.work;
    d["env_entropy_bits"] = c.env_entropy;
    return d;
}

py::dict tape_run(const protocols::TapeRun& r)
{
    py::dict d = cost_dict(r.cost);
    d["tape"] = r.tape.str();
    d["corrupted"] = r.corrupted;
    d["ledger"] = to_py(ledger::to_json(r.ledger));
    return d;
}

protocols::ProtocolOptions tape_options(const std::string& mode, double piston_speed, std::uint64_t seed)
{
    protocols::ProtocolOptions o;
    o.mode = parse_mode(mode);
    o.piston_speed = piston_speed;
    o.seed = seed;
    return o;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Single-molecule engines, bit erasure and second-law audits";
    m.attr("__version__") = THERMODEMON_VERSION;

    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);

    m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("index"), py::arg("stream") = 0);

    m.def(
        "compress",
        [](double factor, std::size_t trajectories, double speed, double temperature, std::uint64_t seed)
        {
            gas::EnsembleConfig c;
            c.factor = factor;
            c.trajectories = trajectories;
            c.speed = speed;
            c.temperature = temperature;
            c.master_seed = seed;
            std::vector<gas::WorkHeatRecord> records;
            {
                py::gil_scoped_release release;
                records = gas::run_volume_change_ensemble(c);
            }
            py::dict d = to_py(gas::to_json(gas::summarize(records)));
            std::vector<double> work;
            for (const auto& r : records) work.push_back(r.work_on_gas);
            d["work_on_gas"] = work;
            return d;
        },
        py::arg("factor") = 2.0, py::arg("trajectories") = 1000, py::arg("piston_speed") = 0.005,
        py::arg("temperature") = 1.0, py::arg("seed") = 0);

    m.def(
        "szilard",
        [](std::size_t cycles, const std::string& mode, double measurement_error, double piston_speed,
           std::uint64_t seed, bool skip_reset)
        {
            szilard::EngineConfig c;
            c.mode = parse_mode(mode);
            c.measurement_error = measurement_error;
            c.piston_speed = piston_speed;
            std::vector<szilard::CycleResult> rs;
            {
                py::gil_scoped_release release;
                rs = szilard::run_cycles(c, cycles, seed, skip_reset);
            }
            py::list out;
            for (const auto& r : rs)
            {
                py::dict d;
                d["work_extracted"] = r.work_extracted;
                d["net_work"] = r.net_work;
                d["heat_from_bath"] = r.heat_from_bath;
                d["reset"] = cost_dict(r.reset_cost);
                d["trace"] = r.trace;
                d["molecule_side"] = r.molecule_side == Side::L ? "L" : "R";
                d["measurement_correct"] = r.measurement_correct;
                d["aborted"] = r.aborted;
                d["max_bookkeeping_error"] = r.max_bookkeeping_error;
                d["ledger"] = to_py(ledger::to_json(r.ledger));
                d["audit"] = to_py(ledger::to_json(r.audit));
                out.append(d);
            }
            return out;
        },
        py::arg("cycles") = 1, py::arg("mode") = "ideal", py::arg("measurement_error") = 0.0,
        py::arg("piston_speed") = 0.01, py::arg("seed") = 0, py::arg("skip_reset") = false);

    m.def(
        "blind_reset_tape",
        [](const std::string& tape, const std::string& mode, double piston_speed, std::uint64_t seed)
        { return tape_run(protocols::blind_reset_tape(protocols::Tape::parse(tape), tape_options(mode, piston_speed, seed))); },
        py::arg("tape"), py::arg("mode") = "ideal", py::arg("piston_speed") = 0.005, py::arg("seed") = 0);

    m.def(
        "known_reset_tape",
        [](const std::string& tape, const std::string& known, const std::string& mode, std::uint64_t seed)
        {
            return tape_run(protocols::known_reset_tape(protocols::Tape::parse(tape), protocols::Tape::parse(known),
                                                        tape_options(mode, 0.005, seed)));
        },
        py::arg("tape"), py::arg("known"), py::arg("mode") = "ideal", py::arg("seed") = 0);

    m.def(
        "reset_pair_via_copy",
        [](const std::string& tape, const std::string& mode, double piston_speed, std::uint64_t seed)
        {
            const auto t = protocols::Tape::parse(tape);
            return tape_run(protocols::reset_pair_via_copy(t, t, tape_options(mode, piston_speed, seed)));
        },
        py::arg("tape"), py::arg("mode") = "ideal", py::arg("piston_speed") = 0.005, py::arg("seed") = 0);

    m.def(
        "restore_to_one",
        [](const py::object& ensemble, const std::string& mode, std::size_t trials, std::uint64_t seed)
        {
            spins::RestoreOptions o;
            o.mode = parse_mode(mode);
            o.trials = trials;
            o.seed = seed;
            const auto r = spins::restore_to_one(spins::ensemble_from_json(from_py(ensemble)), o);
            py::dict d = cost_dict(r.cost);
            d["cost_std_error"] = r.cost_std_error;
            d["ledger"] = to_py(ledger::to_json(r.ledger));
            return d;
        },
        py::arg("ensemble"), py::arg("mode") = "ideal", py::arg("trials") = 50, py::arg("seed") = 0,
        "Ensemble as a dict in the JSON ensemble format.");

    m.def(
        "product_ensemble",
        [](std::size_t n, double p_one) { return to_py(spins::to_json(spins::SpinEnsemble::product(n, p_one))); },
        py::arg("n"), py::arg("p_one"));
    m.def("uniform_ensemble", [](std::size_t n) { return to_py(spins::to_json(spins::SpinEnsemble::uniform(n))); },
          py::arg("n"));

    m.def(
        "endemon",
        [](std::size_t cycles, const std::string& mode, double p_err, std::optional<double> w_wrong, bool blind_reset,
           std::uint64_t seed)
        {
            endemon::ENConfig c;
            c.mode = parse_mode(mode);
            c.error.p_err = p_err;
            c.error.w_wrong = w_wrong;
            c.substitute_blind_reset = blind_reset;
            std::vector<endemon::ENCycleOutcome> rs;
            {
                py::gil_scoped_release release;
                rs = endemon::run_en_cycles(c, {}, cycles, seed);
            }
            py::dict d = to_py(endemon::to_json(endemon::summarize(rs, c)));
            if (!rs.empty()) d["trace"] = rs.front().trace;
            return d;
        },
        py::arg("cycles") = 10, py::arg("mode") = "ideal", py::arg("p_err") = 0.0, py::arg("w_wrong") = py::none(),
        py::arg("blind_reset") = false, py::arg("seed") = 0);

    m.def("expected_net_work", &endemon::expected_net_work, py::arg("p_err"), py::arg("w_wrong"));

    m.def(
        "trapdoor",
        [](std::size_t batches, std::uint64_t events, double t_door, std::size_t molecules, std::uint64_t seed)
        {
            trapdoor::WorldParams p;
            p.molecules = molecules;
            p.door.temperature = t_door;
            std::vector<trapdoor::BatchResult> rs;
            {
                py::gil_scoped_release release;
                rs = trapdoor::run_batches(p, events, batches, seed);
            }
            py::list out;
            for (const auto& r : rs) out.append(to_py(trapdoor::to_json(r.stats)));
            return out;
        },
        py::arg("batches") = 10, py::arg("events") = 1000000, py::arg("t_door") = 1.0, py::arg("molecules") = 50,
        py::arg("seed") = 0);

    m.def(
        "audit",
        [](const py::object& ledger, double tolerance) 
        { return to_py(ledger::to_json(ledger::audit_second_law(ledger::ledger_from_json(from_py(ledger)), tolerance))); },
        py::arg("ledger"), py::arg("tolerance") = 1e-9);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args)
        {
            std::ostringstream out, err;
            const int code = cli::run_cli(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line tool in process. Returns (exit_code, stdout, stderr).");
}
