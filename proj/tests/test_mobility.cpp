#include <roost/mobility.hpp>

#include <doctest.h>

#include <cmath>
#include <map>

using namespace roost;

namespace {

std::map<int, int> interval_histogram(const MobilityParams& p, int nodes, int days, int& total)
{
    std::map<int, int> hist;
    total = 0;
    for (int n = 0; n < nodes; ++n) {
        MobilityModel m(p, {0}, 0, Rng::stream(5, 1, static_cast<std::uint64_t>(n)));
        int last = 0;
        for (int d = 1; d <= days; ++d) {
            if (m.morning(d).camp) {
                ++hist[d - last];
                ++total;
                last = d;
            }
        }
    }
    return hist;
}

} // namespace

TEST_CASE("certain return gives a contact every day")
{
    MobilityParams p;
    p.p_return = 1.0;
    int total = 0;
    const auto hist = interval_histogram(p, 5, 100, total);
    CHECK(total == 500);
    CHECK(hist.size() == 1);
    CHECK(hist.begin()->first == 1);
}

TEST_CASE("inter-contact intervals follow the geometric law")
{
    MobilityParams p;
    p.p_return = 0.7;
    int total = 0;
    const auto hist = interval_histogram(p, 200, 365, total);
    REQUIRE(total > 10000);
    for (int k = 1; k <= 5; ++k) {
        // Analytic values from derive_expected.py.
        const double expect = geometric_intercontact(0.7, k);
        const double sigma = std::sqrt(expect * (1 - expect) / total);
        const double got = static_cast<double>(hist.count(k) ? hist.at(k) : 0) / total;
        CHECK(std::abs(got - expect) <= 3 * sigma);
    }
    CHECK(geometric_intercontact(0.7, 2) == doctest::Approx(0.21));
}

TEST_CASE("symmetric camp switching splits time evenly")
{
    MobilityParams p;
    p.p_return = 1.0;
    p.p_switch = 0.2;
    MobilityModel m(p, {0, 1}, 0, Rng(11));
    int at0 = 0;
    const int days = 20000;
    for (int d = 1; d <= days; ++d)
        at0 += m.morning(d).camp == CampId{0} ? 1 : 0;
    // Stationary occupancy [0.5, 0.5] per derive_expected.py.
    CHECK(static_cast<double>(at0) / days == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("forced absences do not shift later draws")
{
    MobilityParams p;
    p.p_return = 0.5;
    MobilityModel free(p, {0, 1}, 0, Rng(3));
    MobilityModel forced(p, {0, 1}, 0, Rng(3), {{10, 5}});
    for (int d = 1; d < 40; ++d) {
        const auto a = free.morning(d);
        const auto b = forced.morning(d);
        CHECK(a.time == b.time);
        if (d >= 10 && d < 15)
            CHECK_FALSE(b.camp);
        else
            CHECK(a.camp == b.camp);
    }
}

TEST_CASE("long excursions stay within their bounds")
{
    MobilityParams p;
    p.p_return = 0.0;
    p.p_long = 1.0;
    p.long_min_days = 3;
    p.long_max_days = 5;
    MobilityModel m(p, {0}, 0, Rng(2));
    for (int d = 1; d < 200; ++d)
        CHECK_FALSE(m.morning(d).camp);

    p.p_return = 0.7;
    p.p_long = 0.5;
    MobilityModel mix(p, {0}, 0, Rng(4));
    int last = 0;
    int longest = 0;
    for (int d = 1; d < 2000; ++d)
        if (mix.morning(d).camp) {
            longest = std::max(longest, d - last);
            last = d;
        }
    CHECK(longest >= 4);
}

TEST_CASE("resident nodes never leave")
{
    MobilityParams p;
    p.mode = MobilityParams::Mode::resident;
    p.p_return = 0.0;
    MobilityModel m(p, {0, 1}, 1, Rng(1));
    for (int d = 1; d < 50; ++d)
        CHECK(m.morning(d).camp == CampId{1});
}
