#include <roost/pagelog.hpp>

#include <doctest.h>

#include <sstream>

using namespace roost;

TEST_CASE("records never span pages")
{
    PageLog log(256, 16);
    auto r = log.append(Bytes(8, 0xAA));
    CHECK(r.page_no == 0);
    CHECK_FALSE(r.finalized);
    CHECK(log.open_buffer().size() == 8);
    CHECK_FALSE(log.max_page());

    r = log.append(Bytes(250, 0xBB));
    REQUIRE(r.finalized);
    CHECK(*r.finalized == 0);
    CHECK(r.page_no == 1);
    CHECK(log.open_buffer().size() == 250);

    // 8 data bytes then 248 bytes of padding, per derive_expected.py.
    const auto& p0 = log.read_page(0);
    REQUIRE(p0.data.size() == 256);
    CHECK(std::count(p0.data.begin(), p0.data.begin() + 8, 0xAA) == 8);
    CHECK(std::count(p0.data.begin() + 8, p0.data.end(), 0xFF) == 248);
    CHECK(log.max_page() == PageNo{0});
}

TEST_CASE("oversized record is rejected")
{
    PageLog log(64, 4);
    CHECK_THROWS_AS(log.append(Bytes(65, 1)), RecordTooLarge);
    CHECK_NOTHROW(log.append(Bytes(64, 1)));
}

TEST_CASE("eviction past capacity")
{
    PageLog log(16, 4);
    for (int i = 0; i < 6; ++i)
        log.append(Bytes(16, static_cast<std::uint8_t>(i)));
    // Pages 0..4 finalized, capacity 4 keeps 1..4.
    CHECK(log.max_page() == PageNo{4});
    CHECK(log.head_page_no() == 1);
    CHECK_THROWS_AS(log.read_page(0), PageExpired);
    CHECK(log.read_page(1).data == Bytes(16, 1));
    CHECK_THROWS_AS(log.read_page(99), PageNotReady);
    CHECK_THROWS_AS(log.read_page(5), PageNotReady);
}

TEST_CASE("max_page after 42 finalized pages")
{
    PageLog log(16, 100);
    for (int i = 0; i < 43; ++i)
        log.append(Bytes(16, 0));
    CHECK(log.max_page() == PageNo{41});
}

TEST_CASE("dump and load round trip")
{
    PageLog log(32, 3);
    for (int i = 0; i < 7; ++i)
        log.append(Bytes(20, static_cast<std::uint8_t>(i)));
    std::stringstream buf;
    log.dump(buf);
    const auto back = PageLog::load(buf);
    CHECK(back.page_size() == 32);
    CHECK(back.head_page_no() == log.head_page_no());
    CHECK(back.max_page() == log.max_page());
    for (PageNo p = log.head_page_no(); p <= *log.max_page(); ++p)
        CHECK(back.read_page(p) == log.read_page(p));

    std::stringstream empty;
    CHECK_FALSE(PageLog::load(empty).max_page());

    std::stringstream bad("XXXXjunkjunkjunk");
    CHECK_THROWS_AS(PageLog::load(bad), BadLogFile);
}
