#include <roost/rng.hpp>
#include <roost/tdf.hpp>

#include <doctest.h>

using namespace roost;
using namespace roost::tdf;

namespace {

Bytes u16le(std::uint16_t v)
{
    return {static_cast<std::uint8_t>(v & 0xFF), static_cast<std::uint8_t>(v >> 8)};
}

} // namespace

TEST_CASE("registry insert, idempotent re-register and conflict")
{
    MetadataRegistry reg;
    const auto batt = TypeDescriptor::make(1, "battery_mv", {{"voltage", ScalarKind::u16, "mV"}});
    reg.register_type(batt);
    CHECK(reg.size() == 1);
    reg.register_type(batt);
    CHECK(reg.size() == 1);
    const auto gps = TypeDescriptor::make(1, "gps", {{"lat", ScalarKind::i32, ""}, {"lon", ScalarKind::i32, ""}});
    CHECK_THROWS_AS(reg.register_type(gps), DuplicateTypeId);
    CHECK_THROWS_AS(reg.register_type(TypeDescriptor::make(kPaddingTypeId, "pad", {})), InconsistentDescriptor);
}

TEST_CASE("encode_record byte layout")
{
    // Expected bytes from tests/oracles/derive_expected.py.
    CHECK(encode_record({1, 1000, u16le(3850)}) == Bytes{0x01, 0x00, 0xE8, 0x03, 0x00, 0x00, 0x0A, 0x0F});
    CHECK(encode_record({1, 0, u16le(0)}) == Bytes{0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00});
}

TEST_CASE("decode_stream stops at padding and flags unknown ids")
{
    const auto reg = builtin_registry();
    CHECK(decode_stream({}, reg).empty());

    auto data = encode_record({1, 1000, u16le(3850)});
    data.resize(32, 0xFF);
    const auto recs = decode_stream(data, reg);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0] == Record{1, 1000, u16le(3850)});
    CHECK(decode_fields(recs[0], reg.at(1)) == std::vector<std::int64_t>{3850});

    const Bytes unknown{0x63, 0x00, 0, 0, 0, 0, 1, 2};
    try {
        decode_stream(unknown, reg);
        FAIL("expected UnknownTypeId");
    } catch (const UnknownTypeId& e) {
        CHECK(e.type_id == 0x63);
        CHECK(e.offset == 0);
    }

    const Bytes truncated{0x01, 0x00, 0xE8, 0x03, 0x00, 0x00, 0x0A};
    CHECK_THROWS_AS(decode_stream(truncated, reg), TruncatedRecord);
}

TEST_CASE("registry JSON round trip")
{
    const auto reg = builtin_registry();
    const auto back = MetadataRegistry::from_json(reg.to_json());
    CHECK(back.descriptors() == reg.descriptors());
}

TEST_CASE("pack_fields and decode_fields invert each other for signed kinds")
{
    const auto reg = builtin_registry();
    const std::vector<std::int64_t> vals{-27'500'000, 153'000'000};
    const Record rec{types::kGps, 7, pack_fields(reg.at(types::kGps), vals)};
    CHECK(rec.payload.size() == 8);
    CHECK(decode_fields(rec, reg.at(types::kGps)) == vals);
}

TEST_CASE("property: random record streams round trip")
{
    const auto reg = builtin_registry();
    Rng rng(42);
    const std::vector<TypeId> ids{1, 2, 3, 4};
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<Record> recs;
        Bytes stream;
        const auto n = rng.uniform_int(0, 20);
        for (int i = 0; i < n; ++i) {
            const auto id = ids[static_cast<std::size_t>(rng.uniform_int(0, 3))];
            Record r{id, static_cast<std::uint32_t>(rng.next()), Bytes(reg.at(id).payload_len)};
            for (auto& b : r.payload)
                b = static_cast<std::uint8_t>(rng.next());
            encode_record_into(r, stream);
            recs.push_back(std::move(r));
        }
        stream.resize(stream.size() + static_cast<std::size_t>(rng.uniform_int(0, 8)), 0xFF);
        REQUIRE(decode_stream(stream, reg) == recs);
    }
}
