#include "thermodemon/core.hpp"

namespace thermodemon
{

std::string_view to_string(Mode mode) { return mode == Mode::ideal ? "ideal" : "physical"; }

Mode mode_from_string(std::string_view text)
{
    if (text == "ideal") return Mode::ideal;
    if (text == "physical") return Mode::physical;
    throw PreconditionError("unknown mode '" + std::string(text) + "' (expected ideal|physical)");
}

}  // namespace thermodemon
