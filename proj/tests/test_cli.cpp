#include "commands.hpp"

#include <roost/cloud.hpp>
#include <roost/node.hpp>

#include "fixtures.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace roost;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / "roost_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream(p, std::ios::binary) << text;
}

std::string read_text(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int invoke(std::vector<std::string> args, std::string& out, std::string& err)
{
    args.insert(args.begin(), "roost");
    std::vector<char*> argv;
    for (auto& a : args)
        argv.push_back(a.data());
    std::ostringstream o, e;
    const int rc = cli::main(static_cast<int>(argv.size()), argv.data(), o, e);
    out = o.str();
    err = e.str();
    return rc;
}

std::size_t line_count(const std::string& s)
{
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST_CASE("run writes a deterministic summary")
{
    const std::string scenario = std::string(ROOST_SCENARIO_DIR) + "/single_node_single_gateway.json";
    std::string out, err;
    REQUIRE(invoke({"run", "--scenario", scenario, "--seed", "1", "--out", scratch("run_a").string(), "--event-log"},
                out, err) == 0);
    REQUIRE(invoke({"run", "--scenario", scenario, "--seed", "1", "--out", scratch("run_b").string(), "--event-log"},
                out, err) == 0);
    const auto summary = nlohmann::json::parse(read_text(scratch("run_a") / "summary.json"));
    CHECK(summary.at("ingest_duplicates") == 0);
    CHECK(summary.at("duplicate_transfers") == 0);
    CHECK(read_text(scratch("run_a") / "summary.json") == read_text(scratch("run_b") / "summary.json"));
    CHECK(read_text(scratch("run_a") / "events.log") == read_text(scratch("run_b") / "events.log"));
    for (const char* f : {"nodes.csv", "daily.csv", "intercontact.csv", "sessions.csv", "gateways.csv",
                          "journal.jsonl", "registry.json", "node_1.pagelog"})
        CHECK(fs::exists(scratch("run_a") / f));
}

TEST_CASE("run with a missing scenario names the path")
{
    std::string out, err;
    CHECK(invoke({"run", "--scenario", "/no/such/file.json", "--seed", "1", "--out", scratch("x").string()}, out, err) ==
          cli::exit_data);
    CHECK(err.find("/no/such/file.json") != std::string::npos);
}

TEST_CASE("usage errors exit with code 1")
{
    std::string out, err;
    CHECK(invoke({}, out, err) == cli::exit_usage);
    CHECK(invoke({"run", "--seed", "1"}, out, err) == cli::exit_usage);
    CHECK(invoke({"ledger", "--journal", "j", "--node", "abc"}, out, err) == cli::exit_usage);
    CHECK(invoke({"frobnicate"}, out, err) == cli::exit_usage);
}

TEST_CASE("logdump lists every record the node wrote")
{
    Node node = testing::quiet_node(0.9);
    node.install_task(testing::every_second(1, tdf::types::kBattery));
    node.install_task(testing::every_second(2, tdf::types::kActivity));
    node.apply(node.evaluate_tasks());
    node.step(300);
    const auto max = *node.log().max_page();
    std::uint64_t in_final_pages = 0;
    for (PageNo p = 0; p <= max; ++p)
        in_final_pages += node.records_per_page()[p];

    {
        std::ofstream f(scratch("n.pagelog"), std::ios::binary);
        node.log().dump(f);
    }
    write_text(scratch("reg.json"), tdf::builtin_registry().to_json().dump());
    std::string out, err;
    REQUIRE(invoke({"logdump", "--log", scratch("n.pagelog").string(), "--registry", scratch("reg.json").string()}, out,
                err) == 0);
    CHECK(out.rfind("page_no,type,timestamp,fields\n", 0) == 0);
    CHECK(line_count(out) == in_final_pages + 1);
    CHECK(out.find("battery_mv,0,voltage=") != std::string::npos);
}

TEST_CASE("logdump of an empty log prints the header only")
{
    write_text(scratch("empty.pagelog"), "");
    write_text(scratch("reg.json"), tdf::builtin_registry().to_json().dump());
    std::string out, err;
    REQUIRE(invoke({"logdump", "--log", scratch("empty.pagelog").string(), "--registry", scratch("reg.json").string()},
                out, err) == 0);
    CHECK(out == "page_no,type,timestamp,fields\n");
}

TEST_CASE("logdump flags a page with an unregistered type")
{
    PageLog log(32, 8);
    const Bytes good = tdf::encode_record({tdf::types::kBattery, 5, {0x10, 0x0F}});
    const Bytes bad = tdf::encode_record({0x63, 6, {1, 2}});
    log.append(good);
    log.append(Bytes(24, 0xFF));
    log.append(bad);
    log.append(Bytes(24, 0xFF));
    log.append(good);
    log.append(Bytes(24, 0xFF));
    log.append(good);
    {
        std::ofstream f(scratch("mixed.pagelog"), std::ios::binary);
        log.dump(f);
    }
    write_text(scratch("reg.json"), tdf::builtin_registry().to_json().dump());
    std::string out, err;
    REQUIRE(invoke({"logdump", "--log", scratch("mixed.pagelog").string(), "--registry", scratch("reg.json").string()},
                out, err) == 0);
    CHECK(out.find("1,unknown,,type_id=99 offset=0") != std::string::npos);
    CHECK(out.find("0,battery_mv,5,voltage=3856") != std::string::npos);
    CHECK(out.find("2,battery_mv,5,voltage=3856") != std::string::npos);
}

TEST_CASE("ledger replays a journal")
{
    std::ofstream f(scratch("j.jsonl"), std::ios::binary);
    cloud::CloudService cloud(tdf::builtin_registry());
    cloud.attach_journal(&f);
    cloud.relay_beacon({1, 41, 3800, 0, 1, 1, 0});
    for (PageNo p = 0; p < 40; ++p)
        cloud.report_page({1, p, 1, 0});
    f.close();

    std::string out, err;
    REQUIRE(invoke({"ledger", "--journal", scratch("j.jsonl").string(), "--node", "1"}, out, err) == 0);
    CHECK(out == "next=40 pending=[40..41]\n");
    REQUIRE(invoke({"ledger", "--journal", scratch("j.jsonl").string(), "--node", "2"}, out, err) == 0);
    CHECK(out == "no data for node 2\n");

    write_text(scratch("empty.jsonl"), "");
    REQUIRE(invoke({"ledger", "--journal", scratch("empty.jsonl").string(), "--node", "1"}, out, err) == 0);
    CHECK(out == "no data for node 1\n");

    const auto text = read_text(scratch("j.jsonl"));
    write_text(scratch("cut.jsonl"), text.substr(0, text.size() - 5));
    CHECK(invoke({"ledger", "--journal", scratch("cut.jsonl").string(), "--node", "1"}, out, err) == cli::exit_data);
    CHECK(err.find("byte offset") != std::string::npos);
}
