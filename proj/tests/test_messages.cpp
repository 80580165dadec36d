#include <roost/messages.hpp>

#include <doctest.h>

using namespace roost;
using namespace roost::msg;

TEST_CASE("base64 matches the standard alphabet")
{
    CHECK(base64_encode(Bytes{}) == "");
    CHECK(base64_encode(Bytes{'f', 'o', 'o', 'b', 'a', 'r'}) == "Zm9vYmFy");
    CHECK(base64_encode(Bytes{'f', 'o'}) == "Zm8=");
    CHECK(base64_decode("Zm9vYg==") == Bytes{'f', 'o', 'o', 'b'});
    CHECK_THROWS_AS(base64_decode("@@@"), BadMessage);
}

TEST_CASE("documents carry the fixed field names")
{
    const auto j = to_json(Message{PageIngest{3, 40, Bytes{1, 2, 3}, 9, 1234}});
    CHECK(j.at("type") == "page_ingest");
    for (const char* k : {"node_id", "page_no", "data_b64", "gateway_id", "time"})
        CHECK(j.contains(k));
    CHECK(j.at("data_b64") == "AQID");

    const auto b = to_json(Message{BeaconRelay{1, std::nullopt, 3800, 2, 1, 5, 10}});
    CHECK(b.at("max_page").is_null());
    for (const char* k : {"node_id", "max_page", "battery_mv", "config_version", "fw_version", "gateway_id", "time"})
        CHECK(b.contains(k));
}

TEST_CASE("every message kind round trips")
{
    TaskConfig t;
    t.task_id = 1;
    t.type_id = 2;
    const Config cfg{4, 3, {t}, {{"beacon_period_s", 20}}};
    const std::vector<Message> msgs{
        BeaconRelay{1, 41, 3850, 5, 2, 7, 100},
        PageReport{1, 40, 7, 101},
        PageExpiredReport{1, 3, 7, 102},
        PageIngest{1, 40, Bytes(256, 0xEE), 7, 103},
        Health{7, 3600, 4000, 21.5, 1000, 104},
        Health{7, std::nullopt, std::nullopt, std::nullopt, std::nullopt, 105},
        cfg,
        ConfigApplied{cfg, 7, 106},
    };
    for (const auto& m : msgs) {
        const auto j = to_json(m);
        CHECK(j.at("type") == std::string(type_name(m)));
        CHECK(from_json(nlohmann::json::parse(j.dump())) == m);
    }
}

TEST_CASE("rejects malformed documents")
{
    CHECK_THROWS_AS(from_json(nlohmann::json{{"type", "nope"}}), BadMessage);
    CHECK_THROWS_AS(from_json(nlohmann::json{{"type", "page_report"}}), BadMessage);
    CHECK_THROWS_AS(from_json(nlohmann::json::array()), BadMessage);
}
