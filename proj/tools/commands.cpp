#include "commands.hpp"

#include <roost/cloud.hpp>
#include <roost/pagelog.hpp>
#include <roost/report.hpp>
#include <roost/scenario.hpp>
#include <roost/tdf.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <ostream>
#include <sstream>

namespace roost::cli {

using nlohmann::json;

namespace {

void print_page(std::ostream& out, const Page& page, const tdf::MetadataRegistry& registry)
{
    std::vector<tdf::Record> records;
    try {
        records = tdf::decode_stream(page.data, registry);
    } catch (const tdf::UnknownTypeId& e) {
        out << page.page_no << ",unknown,,type_id=" << e.type_id << " offset=" << e.offset << '\n';
        return;
    } catch (const tdf::TruncatedRecord& e) {
        out << page.page_no << ",truncated,,offset=" << e.offset << '\n';
        return;
    }
    for (const auto& rec : records) {
        const auto& desc = registry.at(rec.type_id);
        const auto values = tdf::decode_fields(rec, desc);
        out << page.page_no << ',' << desc.name << ',' << rec.timestamp << ',';
        for (std::size_t i = 0; i < values.size(); ++i)
            out << (i ? " " : "") << desc.fields[i].name << '=' << values[i];
        out << '\n';
    }
}

} // namespace

int cmd_run(const std::filesystem::path& scenario, std::uint64_t seed, const std::filesystem::path& out_dir,
            bool event_log, std::ostream& out, std::ostream& err)
{
    try {
        const auto sc = Scenario::load(scenario);
        const auto report = run_to_directory(sc, seed, out_dir, event_log);
        const auto& s = report.summary;
        out << "scenario=" << report.scenario << " seed=" << report.seed << " pages_stored=" << s["pages_stored"]
            << " duplicates=" << s["ingest_duplicates"] << " latency_p50_s=" << s["latency_s"]["p50"]
            << " out=" << out_dir.string() << '\n';
        return exit_ok;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_data;
    }
}

int cmd_logdump(const std::filesystem::path& log, const std::filesystem::path& registry, std::ostream& out,
                std::ostream& err)
{
    try {
        std::ifstream reg_in(registry);
        if (!reg_in)
            throw Error("cannot open registry file " + registry.string());
        const auto reg = tdf::MetadataRegistry::from_json(json::parse(reg_in));

        std::ifstream log_in(log, std::ios::binary);
        if (!log_in)
            throw Error("cannot open page log " + log.string());
        const auto pages = PageLog::load(log_in);

        out << "page_no,type,timestamp,fields\n";
        if (const auto max = pages.max_page())
            for (PageNo p = pages.head_page_no(); p <= *max; ++p)
                print_page(out, pages.read_page(p), reg);
        return exit_ok;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_data;
    }
}

int cmd_ledger(const std::filesystem::path& journal, std::uint32_t node, std::ostream& out, std::ostream& err)
{
    try {
        std::ifstream in(journal, std::ios::binary);
        if (!in)
            throw Error("cannot open journal " + journal.string());
        const auto cloud = cloud::CloudService::replay(in);
        if (!cloud.ledger().find(node)) {
            out << "no data for node " << node << '\n';
            return exit_ok;
        }
        const auto needed = cloud.ledger().peek(node);
        out << "next=";
        if (needed.lowest)
            out << *needed.lowest;
        else
            out << "none";
        out << " pending=" << cloud::format_ranges(needed.pending) << '\n';
        return exit_ok;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_data;
    }
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"roost: simulate and inspect delay-tolerant telemetry collection"};
    app.require_subcommand(1);

    std::filesystem::path scenario, out_dir, log, registry, journal;
    std::uint64_t seed = 1;
    std::uint32_t node = 0;
    bool event_log = false;

    auto* run = app.add_subcommand("run", "run a scenario and write traces and summary");
    run->add_option("--scenario", scenario, "scenario JSON file")->required();
    run->add_option("--seed", seed, "random seed")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_flag("--event-log", event_log, "also write events.log");

    auto* dump = app.add_subcommand("logdump", "decode a node page log");
    dump->add_option("--log", log, "page log file")->required();
    dump->add_option("--registry", registry, "metadata registry JSON")->required();

    auto* ledger = app.add_subcommand("ledger", "replay a cloud journal and show a node's missing pages");
    ledger->add_option("--journal", journal, "journal file")->required();
    ledger->add_option("--node", node, "node id")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream msg, diag;
        const int rc = app.exit(e, msg, diag);
        out << msg.str();
        err << diag.str();
        return rc == 0 ? exit_ok : exit_usage;
    }

    if (run->parsed())
        return cmd_run(scenario, seed, out_dir, event_log, out, err);
    if (dump->parsed())
        return cmd_logdump(log, registry, out, err);
    return cmd_ledger(journal, node, out, err);
}

} // namespace roost::cli
