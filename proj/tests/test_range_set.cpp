#include <roost/cloud.hpp>
#include <roost/range_set.hpp>
#include <roost/rng.hpp>

#include <doctest.h>

#include <set>

using namespace roost;

namespace {

// Bitmap oracle: explicit scan over [0, max].
std::pair<std::optional<PageNo>, std::vector<PageRange>> brute_needed(const std::set<PageNo>& covered,
                                                                      std::optional<PageNo> max)
{
    std::optional<PageNo> lowest;
    std::vector<PageRange> ranges;
    if (!max)
        return {lowest, ranges};
    for (PageNo p = 0; p <= *max; ++p) {
        if (covered.contains(p))
            continue;
        if (!lowest)
            lowest = p;
        if (!ranges.empty() && ranges.back().last + 1 == p)
            ranges.back().last = p;
        else
            ranges.push_back({p, p});
    }
    return {lowest, ranges};
}

} // namespace

TEST_CASE("range set merges adjacent inserts")
{
    RangeSet s;
    CHECK(s.insert(3));
    CHECK(s.insert(5));
    CHECK(s.range_count() == 2);
    CHECK(s.insert(4));
    CHECK(s.range_count() == 1);
    CHECK_FALSE(s.insert(4));
    CHECK(s.count() == 3);
    CHECK(s.first_missing(0) == 0);
    CHECK(s.first_missing(3) == 6);
    CHECK(s.gaps(0, 8) == std::vector<PageRange>{{0, 2}, {6, 8}});
    s.insert(PageRange{0, 10});
    CHECK(s.ranges() == std::vector<PageRange>{{0, 10}});
}

TEST_CASE("ledger examples")
{
    cloud::DownloadLedger ledger;
    CHECK(ledger.next_needed(1, std::nullopt) == cloud::NeededPages{std::nullopt, {}});

    for (PageNo p = 0; p < 40; ++p)
        ledger.mark_downloaded(1, p);
    // Values from derive_expected.py ("ledger ex1", "ledger after mark 40").
    CHECK(ledger.next_needed(1, 41) == cloud::NeededPages{40, {{40, 41}}});
    CHECK(ledger.mark_downloaded(1, 40));
    CHECK_FALSE(ledger.mark_downloaded(1, 40));
    CHECK(ledger.next_needed(1, 41) == cloud::NeededPages{41, {{41, 41}}});

    for (PageNo p = 0; p <= 10; ++p)
        ledger.mark_downloaded(2, p);
    for (PageNo p = 13; p <= 20; ++p)
        ledger.mark_downloaded(2, p);
    CHECK(ledger.next_needed(2, 25) == cloud::NeededPages{11, {{11, 12}, {21, 25}}});

    CHECK(ledger.mark_expired(3, 7));
    CHECK_THROWS_AS(ledger.mark_downloaded(3, 7), cloud::ConflictsWithExpired);
    CHECK_FALSE(ledger.mark_expired(1, 5));
}

TEST_CASE("property: 10000 random ledgers match the bitmap oracle")
{
    Rng rng(7);
    for (int trial = 0; trial < 10000; ++trial) {
        cloud::DownloadLedger ledger;
        std::set<PageNo> covered;
        const auto universe = static_cast<PageNo>(rng.uniform_int(1, 120));
        const auto ops = rng.uniform_int(0, 150);
        for (int i = 0; i < ops; ++i) {
            const auto p = static_cast<PageNo>(rng.uniform_int(0, universe));
            if (rng.bernoulli(0.85)) {
                if (!ledger.find(0) || !ledger.find(0)->expired.contains(p)) {
                    ledger.mark_downloaded(0, p);
                    covered.insert(p);
                }
            } else {
                ledger.mark_expired(0, p);
                covered.insert(p);
            }
        }
        std::optional<PageNo> max;
        if (rng.bernoulli(0.95))
            max = static_cast<PageNo>(rng.uniform_int(0, universe));
        const auto got = ledger.next_needed(0, max);
        const auto [lowest, ranges] = brute_needed(covered, ledger.find(0) ? ledger.find(0)->known_max_page : max);
        REQUIRE(got.lowest == lowest);
        REQUIRE(got.pending == ranges);
    }
}

TEST_CASE("ledger JSON round trip")
{
    cloud::DownloadLedger ledger;
    ledger.next_needed(4, 30);
    for (PageNo p : {0u, 1u, 2u, 9u})
        ledger.mark_downloaded(4, p);
    ledger.mark_expired(4, 5);
    const auto back = cloud::DownloadLedger::from_json(ledger.to_json());
    CHECK(back.peek(4) == ledger.peek(4));
    CHECK(back.covered(4) == ledger.covered(4));
}
