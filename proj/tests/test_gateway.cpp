#include <roost/gateway.hpp>

#include "fixtures.hpp"

#include <doctest.h>

using namespace roost;
using testing::filled_node;

namespace {

GatewayParams always_on(GatewayId id = 1)
{
    GatewayParams p;
    p.id = id;
    return p;
}

/// Beacon at the node's clock, so its radio answers.
Beacon beacon_now(Node& n)
{
    return n.emit_beacon();
}

struct Session {
    DownloadResult result;
    bool planned = false;
};

Session contact(Gateway& gw, Node& node, cloud::CloudService* cloud, double window_s = 1e6)
{
    Session s;
    const auto b = beacon_now(node);
    const auto plan = gw.on_beacon(b, node.clock(), cloud);
    if (!plan)
        return s;
    s.planned = true;
    LinkParams lp;
    Rng rng(1);
    LinkSession link(lp, rng, window_s);
    s.result = gw.execute_plan(node, *plan, link, node.clock());
    return s;
}

TEST_CASE("plan fetches exactly the pages the ledger misses")
{
    cloud::CloudService cloud(tdf::builtin_registry());
    for (PageNo p = 0; p < 40; ++p)
        cloud.report_page({1, p, 9, 0});
    Node node = filled_node(41);
    Gateway gw(always_on());
    const auto plan = gw.on_beacon(node.emit_beacon(), node.clock(), &cloud);
    REQUIRE(plan);
    CHECK(plan->pages == std::vector<PageRange>{{40, 41}});
    CHECK_FALSE(plan->config);
    CHECK(plan->hold_seconds > 0);
}

TEST_CASE("nothing to do yields no plan")
{
    cloud::CloudService cloud(tdf::builtin_registry());
    Node node = testing::quiet_node(0.9);
    Gateway gw(always_on());
    CHECK_FALSE(gw.on_beacon(node.emit_beacon(), 0, &cloud));
}

TEST_CASE("config version mismatch adds a diff to the plan")
{
    cloud::CloudService cloud(tdf::builtin_registry());
    cloud.relay_beacon({1, std::nullopt, 3800, 5, 1, 1, 0});
    cloud.set_desired_config(1, {testing::every_second(7, tdf::types::kTemperature)});
    Node node = testing::quiet_node(0.9);
    node.handle_rpc(rpc::SetParam{"config_version", 5});
    Gateway gw(always_on());
    const auto plan = gw.on_beacon(node.emit_beacon(), 0, &cloud);
    REQUIRE(plan);
    CHECK(plan->pages.empty());
    REQUIRE(plan->config);
    CHECK(plan->config->version == 6);
}

TEST_CASE("ten second contact moves fifty pages of a hundred")
{
    cloud::CloudService cloud(tdf::builtin_registry());
    Node node = filled_node(99);
    Gateway gw(always_on());
    const auto s = contact(gw, node, &cloud, 10.0);
    REQUIRE(s.planned);
    // 5 pages/s for 10 s (derive_expected.py: 50).
    CHECK(s.result.pages.size() == 50);
    CHECK(s.result.contact_lost);
    CHECK(gw.cache(1)->pending == 50);
    CHECK(gw.buffered_pages() == 50);
}

TEST_CASE("short plan completes and queues one report per page")
{
    cloud::CloudService cloud(tdf::builtin_registry());
    for (PageNo p = 0; p < 40; ++p)
        cloud.report_page({1, p, 9, 0});
    Node node = filled_node(41);
    Gateway gw(always_on());
    const auto s = contact(gw, node, &cloud);
    CHECK(s.result.pages == std::vector<PageNo>{40, 41});
    CHECK_FALSE(s.result.contact_lost);
    std::size_t reports = 0;
    for (const auto& m : gw.upload_buffer())
        reports += std::holds_alternative<msg::PageReport>(m) ? 1 : 0;
    CHECK(reports == 2);
    for (const auto& m : gw.upload_buffer())
        if (const auto* p = std::get_if<msg::PageIngest>(&m))
            CHECK(p->data == node.log().read_page(p->page_no).data);
}

TEST_CASE("evicted pages become loss reports and later pages still arrive")
{
    cloud::CloudService cloud(tdf::builtin_registry());
    Node node = filled_node(9, 6);
    REQUIRE(node.log().head_page_no() == 4);
    Gateway gw(always_on());
    const auto s = contact(gw, node, &cloud);
    CHECK(s.result.expired == std::vector<PageNo>{0, 1, 2, 3});
    CHECK(s.result.pages == std::vector<PageNo>{4, 5, 6, 7, 8, 9});
    REQUIRE(gw.sync(&cloud, node.clock()));
    CHECK(cloud.ledger().peek(1) == cloud::NeededPages{std::nullopt, {}});
    CHECK(cloud.ledger().find(1)->expired.count() == 4);
}

TEST_CASE("offline buffering then sync equals an online run")
{
    auto run = [](bool offline) {
        cloud::CloudService cloud(tdf::builtin_registry());
        Gateway gw(always_on());
        gw.set_online(!offline);
        Node node = testing::quiet_node(0.9);
        node.install_task(testing::every_second(1, tdf::types::kGps));
        node.apply(node.evaluate_tasks());
        for (int k = 0; k < 6; ++k) {
            node.step(100);
            contact(gw, node, &cloud);
            gw.sync(&cloud, node.clock());
        }
        if (offline) {
            CHECK(gw.buffered_pages() > 0);
            gw.set_online(true);
            gw.sync(&cloud, node.clock());
        }
        CHECK(gw.upload_buffer().empty());
        std::vector<std::pair<PageNo, Bytes>> pages;
        for (const auto& [key, sp] : cloud.store().pages())
            pages.emplace_back(key.second, sp.data);
        return std::make_pair(pages, cloud.ledger().peek(1));
    };
    const auto online = run(false);
    const auto offline = run(true);
    CHECK(online.first.size() > 20);
    CHECK(online == offline);
}

TEST_CASE("stale caches at two gateways still store each page once")
{
    cloud::CloudService cloud(tdf::builtin_registry());
    Node node = filled_node(5);
    Gateway a(always_on(1));
    Gateway b(always_on(2));
    a.set_online(false);
    b.set_online(false);
    const auto sa = contact(a, node, &cloud);
    node.step(1);
    const auto sb = contact(b, node, &cloud);
    CHECK(sa.result.pages.size() == 6);
    CHECK(sb.result.pages.size() == 6);
    a.set_online(true);
    b.set_online(true);
    a.sync(&cloud, 100);
    b.sync(&cloud, 101);
    CHECK(cloud.store().size() == 6);
    CHECK(cloud.store().duplicates() == 6);
    CHECK(b.stats().duplicate_uploads == 6);
}

TEST_CASE("config reconcile makes the node match the desired set")
{
    cloud::CloudService cloud(tdf::builtin_registry());
    Node node = testing::quiet_node(0.9);
    node.install_task(testing::every_second(1, tdf::types::kGps));
    node.install_task(testing::every_second(2, tdf::types::kBattery));
    auto changed = testing::every_second(2, tdf::types::kBattery);
    changed.sample_period_s = 600;
    const std::vector<TaskConfig> desired{changed, testing::every_second(3, tdf::types::kTemperature)};
    const auto version = cloud.set_desired_config(1, desired, {{"beacon_period_s", 30}});
    Gateway gw(always_on());
    gw.sync(&cloud, 0);
    const auto s = contact(gw, node, &cloud);
    CHECK(s.result.config_applied);
    std::vector<TaskConfig> now;
    for (const auto& [id, t] : node.tasks())
        now.push_back(t);
    CHECK(now == desired);
    CHECK(node.config_version() == version);
    CHECK(node.beacon_period() == 30);
    gw.sync(&cloud, 1);
    REQUIRE(cloud.applied_configs(1).size() == 1);
    CHECK(cloud.applied_configs(1)[0].version == version);
    CHECK_FALSE(contact(gw, node, &cloud).planned);
}

TEST_CASE("firmware push installs the desired version")
{
    cloud::CloudService cloud(tdf::builtin_registry());
    cloud.register_firmware(cloud::FirmwareImage::make(2, Bytes(300, 0x42)));
    cloud.set_desired_firmware(1, 2);
    Node node = testing::quiet_node(0.9);
    Gateway gw(always_on());
    gw.sync(&cloud, 0);
    const auto s = contact(gw, node, &cloud);
    CHECK(s.result.fw_applied);
    CHECK(node.fw_version() == 2);
}

TEST_CASE("duty schedule slots, idle timeout and backlog extension")
{
    GatewayParams p;
    p.duty.always_on = false;
    p.duty.window_start_s = 0;
    p.duty.window_end_s = kSecondsPerDay;
    p.duty.slot_period_s = 600;
    p.duty.slot_length_s = 120;
    p.duty.idle_timeout_s = 60;
    CHECK(p.duty.scheduled_awake(0));
    CHECK(p.duty.scheduled_awake(119));
    CHECK_FALSE(p.duty.scheduled_awake(120));
    CHECK(p.duty.scheduled_awake(600));

    Gateway gw(p);
    CHECK(gw.duty_tick(0));
    CHECK(gw.duty_tick(30));
    // No beacon for 60 s since the slot opened.
    CHECK_FALSE(gw.duty_tick(60));
    CHECK_FALSE(gw.duty_tick(90));
    CHECK(gw.duty_tick(600));

    // Mid-download at the slot boundary keeps the gateway up.
    Node node = filled_node(300);
    const auto plan = gw.on_beacon(node.emit_beacon(), 700, nullptr);
    REQUIRE(plan);
    LinkParams lp;
    Rng rng(3);
    LinkSession link(lp, rng, 40.0);
    gw.execute_plan(node, *plan, link, 700);
    CHECK(gw.duty_tick(725));
    CHECK(gw.duty_tick(735));
    // Backlog still pending, node recently heard.
    CHECK(gw.duty_tick(740));
    CHECK_FALSE(gw.duty_tick(800));
}

TEST_CASE("backlog cleared at the schedule boundary sleeps at the boundary")
{
    GatewayParams p;
    p.duty.always_on = false;
    p.duty.slot_period_s = 600;
    p.duty.slot_length_s = 120;
    p.duty.idle_timeout_s = 300;
    Gateway gw(p);
    Node node = filled_node(0);
    gw.duty_tick(100);
    const auto plan = gw.on_beacon(node.emit_beacon(), 110, nullptr);
    REQUIRE(plan);
    LinkParams lp;
    Rng rng(3);
    LinkSession link(lp, rng, 10.0);
    gw.execute_plan(node, *plan, link, 110);
    CHECK(gw.cache(1)->pending == 0);
    CHECK_FALSE(gw.duty_tick(120));
}

TEST_CASE("sync with an empty buffer only refreshes and reports health")
{
    cloud::CloudService cloud(tdf::builtin_registry());
    Gateway gw(always_on(4));
    CHECK(gw.sync(&cloud, 50));
    CHECK(cloud.health(4).size() == 1);
    CHECK(cloud.store().size() == 0);
    gw.set_online(false);
    CHECK_FALSE(gw.sync(&cloud, 60));
}

} // namespace
