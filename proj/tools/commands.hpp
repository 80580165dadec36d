#pragma once

// Subcommand bodies, separated from argument parsing so tests can call them
// with in-memory streams.
//
// logdump output is CSV with header "page_no,type,timestamp,fields"; fields is
// a space-separated list of name=value. A page holding an unregistered type id
// yields one row "page_no,unknown,,type_id=<id> offset=<byte>".

#include <cstdint>
#include <filesystem>
#include <iosfwd>

namespace roost::cli {

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_data = 2 };

int cmd_run(const std::filesystem::path& scenario, std::uint64_t seed, const std::filesystem::path& out_dir,
            bool event_log, std::ostream& out, std::ostream& err);

int cmd_logdump(const std::filesystem::path& log, const std::filesystem::path& registry, std::ostream& out,
                std::ostream& err);

int cmd_ledger(const std::filesystem::path& journal, std::uint32_t node, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches. Usage errors return exit_usage.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace roost::cli
