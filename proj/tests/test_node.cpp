#include <roost/cloud.hpp>
#include <roost/node.hpp>

#include "fixtures.hpp"

#include <doctest.h>

using namespace roost;

namespace {

using testing::every_second;
using testing::quiet_node;
using testing::zero_loads;

TaskConfig gps_high()
{
    TaskConfig t;
    t.task_id = 1;
    t.type_id = tdf::types::kGps;
    t.entry = {BatteryAtLeast{3900}, MotionIs{true}};
    t.exit = {BatteryBelow{3700}};
    t.activity = Activity::gps_high;
    return t;
}

} // namespace

TEST_CASE("battery arithmetic and clamp")
{
    BatteryModel b(10'000, 0.5, VoltageCurve{}, HarvestProfile{}, zero_loads());
    CHECK(b.apply(0.0) == 0.0);
    CHECK(b.charge_mj() == doctest::Approx(5000));
    // 100 mW harvest against a 40 mW load for 10 s (derive_expected.py: 600 mJ).
    b.apply((100.0 - 40.0) * 10.0);
    CHECK(b.charge_mj() == doctest::Approx(5600));
    CHECK(b.apply(1e6) > 0);
    CHECK(b.charge_mj() == doctest::Approx(10'000));
    CHECK(b.voltage_mv() == 4100);
    b.apply(-1e9);
    CHECK(b.voltage_mv() == 3300);
}

TEST_CASE("voltage curve is linear between the default end points")
{
    VoltageCurve c;
    CHECK(c.millivolts(0.0) == doctest::Approx(3300));
    CHECK(c.millivolts(0.5) == doctest::Approx(3700));
    CHECK(c.millivolts(0.75) == doctest::Approx(3900));
    CHECK(c.millivolts(1.0) == doctest::Approx(4100));
}

TEST_CASE("half-sine harvest is zero at night and peaks at noon")
{
    HarvestProfile h;
    h.peak_mw = 10;
    CHECK(h.power_mw(3 * 3600) == 0.0);
    CHECK(h.power_mw(12 * 3600) == doctest::Approx(10));
    h.daily_factor = {1.0, 0.5};
    CHECK(h.power_mw(kSecondsPerDay + 12 * 3600) == doctest::Approx(5));
}

TEST_CASE("gps_high hysteresis transitions")
{
    const std::map<TaskId, TaskConfig> tasks{{1, gps_high()}};
    std::map<TaskId, RunningTask> running{{1, {}}};
    CHECK(evaluate_tasks(tasks, running, 0, 3800, true).empty());
    CHECK(evaluate_tasks(tasks, running, 0, 3699, true) ==
          std::vector<Transition>{{Transition::Kind::stop, 1}});
    running.clear();
    CHECK(evaluate_tasks(tasks, running, 0, 3800, true).empty());
    CHECK(evaluate_tasks(tasks, running, 0, 3900, false).empty());
    CHECK(evaluate_tasks(tasks, running, 0, 3900, true) ==
          std::vector<Transition>{{Transition::Kind::start, 1}});
}

TEST_CASE("time window and sample counter conditions")
{
    TaskConfig night = every_second(2, tdf::types::kBattery);
    night.entry = {TimeWindow{18 * 3600, 6 * 3600}};
    const std::map<TaskId, TaskConfig> tasks{{2, night}};
    CHECK(evaluate_tasks(tasks, {}, 12 * 3600, 4000, false).empty());
    CHECK(evaluate_tasks(tasks, {}, 23 * 3600, 4000, false).size() == 1);

    TaskConfig five = every_second(3, tdf::types::kBattery);
    five.exit = {SamplesAtLeast{5}};
    const std::map<TaskId, TaskConfig> t2{{3, five}};
    CHECK(evaluate_tasks(t2, {{3, {4, 0}}}, 0, 4000, false).empty());
    CHECK(evaluate_tasks(t2, {{3, {5, 0}}}, 0, 4000, false) == std::vector<Transition>{{Transition::Kind::stop, 3}});
}

TEST_CASE("stops come before starts, each in task id order")
{
    TaskConfig a = every_second(5, 1);
    a.exit = {BatteryBelow{5000}};
    TaskConfig b = every_second(2, 1);
    TaskConfig c = every_second(9, 1);
    c.exit = {BatteryBelow{5000}};
    const std::map<TaskId, TaskConfig> tasks{{5, a}, {2, b}, {9, c}};
    const std::map<TaskId, RunningTask> running{{5, {}}, {9, {}}};
    CHECK(evaluate_tasks(tasks, running, 0, 4000, false) ==
          std::vector<Transition>{{Transition::Kind::stop, 5}, {Transition::Kind::stop, 9}, {Transition::Kind::start, 2}});
}

TEST_CASE("task encoding round trip and content hash")
{
    auto t = gps_high();
    t.gate = {TimeWindow{100, 200}, SamplesAtLeast{3}};
    const auto bytes = encode_task(t);
    ByteReader r(bytes);
    CHECK(decode_task(r) == t);
    CHECK(task_from_json(to_json(t)) == t);
    auto u = t;
    u.sample_period_s += 1;
    CHECK(content_hash(u) != content_hash(t));
    const auto copy = t;
    CHECK(content_hash(copy) == content_hash(t));
}

TEST_CASE("beacon reflects log, battery and versions")
{
    Node node = quiet_node((3850.0 - 3300.0) / 800.0, 16);
    CHECK_FALSE(node.emit_beacon().max_page);

    node.install_task(every_second(1, tdf::types::kBattery));
    node.apply(node.evaluate_tasks());
    // 8-byte records, two per 16-byte page: 85 samples finalize pages 0..41.
    node.step(85);
    REQUIRE(node.log().max_page() == PageNo{41});

    REQUIRE(node.handle_rpc(rpc::SetParam{"config_version", 5}).ok());
    const auto image = cloud::FirmwareImage::make(2, Bytes(100, 0x5A), 64);
    REQUIRE(node.handle_rpc(rpc::PutFwChunk{2, 0, Bytes(image.image.begin(), image.image.begin() + 64)}).ok());
    REQUIRE(node.handle_rpc(rpc::PutFwChunk{2, 1, Bytes(image.image.begin() + 64, image.image.end())}).ok());
    REQUIRE(node.handle_rpc(rpc::ApplyFw{2, 2, image.checksum}).ok());

    const auto b = node.emit_beacon();
    CHECK(b.max_page == PageNo{41});
    CHECK(b.battery_mv == 3850);
    CHECK(b.config_version == 5);
    CHECK(b.fw_version == 2);
}

TEST_CASE("page chunks reassemble to the stored page")
{
    Node node = quiet_node(0.9);
    node.install_task(every_second(1, tdf::types::kGps));
    node.apply(node.evaluate_tasks());
    node.step(40);
    REQUIRE(node.log().max_page());
    Bytes joined;
    for (std::uint8_t i = 0; i < 4; ++i) {
        const auto r = node.handle_rpc(rpc::ReadPageChunk{0, i});
        REQUIRE(r.ok());
        const auto& chunk = std::get<Bytes>(r.payload);
        joined.insert(joined.end(), chunk.begin(), chunk.end());
    }
    CHECK(joined == node.log().read_page(0).data);
    CHECK(node.handle_rpc(rpc::ReadPageChunk{0, 4}).status == rpc::Status::bad_chunk_index);
    CHECK(node.handle_rpc(rpc::ReadPageChunk{500, 0}).status == rpc::Status::page_not_ready);
}

TEST_CASE("expired page answers with the retention head")
{
    Node node = quiet_node(0.9, 16, 2);
    node.install_task(every_second(1, tdf::types::kBattery));
    node.apply(node.evaluate_tasks());
    node.step(20);
    const auto r = node.handle_rpc(rpc::ReadPageChunk{0, 0});
    CHECK(r.status == rpc::Status::page_expired);
    CHECK(std::get<rpc::RetentionHead>(r.payload).head_page_no == node.log().head_page_no());
}

TEST_CASE("firmware with a wrong checksum is rejected")
{
    Node node = quiet_node(0.9);
    REQUIRE(node.handle_rpc(rpc::PutFwChunk{3, 0, Bytes(10, 1)}).ok());
    const auto r = node.handle_rpc(rpc::ApplyFw{3, 1, 0xDEADBEEF});
    CHECK(r.status == rpc::Status::fw_checksum_mismatch);
    CHECK(node.fw_version() == 1);
}

TEST_CASE("task edits are visible and bump the config version")
{
    Node node = quiet_node(0.9);
    const auto before = node.config_version();
    auto low = gps_high();
    low.task_id = 2;
    low.activity = Activity::gps_low;
    const auto put = node.handle_rpc(rpc::PutTaskConfig{low});
    REQUIRE(put.ok());
    CHECK(std::get<rpc::ConfigVersion>(put.payload).version == before + 1);
    const auto list = node.handle_rpc(rpc::GetTaskConfigs{});
    CHECK(std::get<std::vector<TaskConfig>>(list.payload) == std::vector<TaskConfig>{low});
    CHECK(node.handle_rpc(rpc::DeleteTaskConfig{77}).status == rpc::Status::unknown_task);
}

TEST_CASE("radio answers only right after a beacon or while held")
{
    Node node = quiet_node(0.9);
    const auto packet = rpc::encode(rpc::Command{rpc::GetStatus{}});
    node.step(5);
    CHECK_FALSE(node.handle_packet(packet));
    node.emit_beacon();
    CHECK(node.handle_packet(packet));
    node.handle_rpc(rpc::HoldRadio{10});
    node.step(8);
    CHECK(node.handle_packet(packet));
    node.step(5);
    CHECK_FALSE(node.handle_packet(packet));
}

TEST_CASE("property: energy books balance over a day")
{
    HarvestProfile sun;
    sun.peak_mw = 8.0;
    BatteryModel battery(5.0e4, 0.6, VoltageCurve{}, sun, LoadTable::defaults());
    Node node(3, battery, PageLog(), std::make_shared<const tdf::MetadataRegistry>(tdf::builtin_registry()));
    node.install_task(every_second(1, tdf::types::kTemperature));
    const double start = node.battery().charge_mj();
    node.advance_to(kSecondsPerDay);
    const auto& e = node.energy();
    const double expected = start + e.harvested_mj - e.consumed_mj - e.clamped_mj;
    CHECK(node.battery().charge_mj() == doctest::Approx(expected).epsilon(1e-6));
    CHECK(e.harvested_mj > 0);
}

TEST_CASE("advance_to is deterministic")
{
    auto run = [] {
        Node n = quiet_node(0.8);
        n.install_task(every_second(1, tdf::types::kActivity));
        const auto beacons = n.advance_to(600);
        return std::make_pair(beacons, n.log().max_page());
    };
    CHECK(run() == run());
}
