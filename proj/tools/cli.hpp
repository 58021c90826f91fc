#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace thermodemon::cli
{

using ParamMap = std::map<std::string, std::string>;

/// Parses `key = value` lines. '#' starts a comment. Throws std::runtime_error
/// naming the line on malformed lines and duplicate keys.
ParamMap load_config(const std::string& path);
ParamMap parse_config(const std::string& text, const std::string& origin = "config");

/// Full parameter set of a subcommand with its defaults.
ParamMap default_params(const std::string& subcommand);

/// Entry point shared by the executable and the tests. Returns the exit code:
/// 0 success, 1 invalid arguments or config, 2 audit violation under --strict.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace thermodemon::cli
