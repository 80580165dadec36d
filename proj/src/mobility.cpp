#include <roost/mobility.hpp>

#include <algorithm>
#include <cmath>

namespace roost {

namespace {

bool probability(double p)
{
    return p >= 0.0 && p <= 1.0;
}

} // namespace

void MobilityParams::validate() const
{
    if (!probability(p_return))
        throw Error("mobility.p_return must be in [0, 1]");
    if (!probability(p_switch))
        throw Error("mobility.p_switch must be in [0, 1]");
    if (!probability(p_long))
        throw Error("mobility.p_long must be in [0, 1]");
    if (long_min_days < 1 || long_max_days < long_min_days)
        throw Error("mobility long excursion days must satisfy 1 <= long_min_days <= long_max_days");
    if (time_of_day(forage_start_s) != forage_start_s || time_of_day(forage_end_s) != forage_end_s)
        throw Error("mobility forage window must lie within one day");
    if (forage_end_s >= forage_start_s)
        throw Error("mobility forage window must span midnight (forage_end_s < forage_start_s)");
    if (return_spread_s < 0 || forage_end_s + return_spread_s >= forage_start_s)
        throw Error("mobility return_spread_s must end before the next forage window");
}

MobilityModel::MobilityModel(MobilityParams params, std::vector<CampId> camps, CampId home, Rng rng,
                             std::vector<Absence> absences)
    : params_(params), camps_(std::move(camps)), camp_(home), rng_(rng), absences_(std::move(absences))
{
    std::sort(camps_.begin(), camps_.end());
    if (std::find(camps_.begin(), camps_.end(), home) == camps_.end())
        throw Error("home camp " + std::to_string(home) + " is not a known camp");
}

Morning MobilityModel::morning(int day)
{
    const double u_offset = rng_.uniform();
    const double u_return = rng_.uniform();
    const double u_switch = rng_.uniform();
    const double u_camp = rng_.uniform();
    const double u_long = rng_.uniform();
    const double u_len = rng_.uniform();

    Morning m;
    m.day = day;
    m.time = static_cast<Seconds>(day) * kSecondsPerDay + params_.forage_end_s +
             static_cast<Seconds>(std::floor(u_offset * static_cast<double>(params_.return_spread_s)));

    bool present = false;
    if (params_.mode == MobilityParams::Mode::resident) {
        present = true;
    } else if (excursion_left_ > 0) {
        --excursion_left_;
    } else if (u_return < params_.p_return) {
        present = true;
        if (camps_.size() > 1 && u_switch < params_.p_switch) {
            std::vector<CampId> others;
            for (CampId c : camps_)
                if (c != camp_)
                    others.push_back(c);
            const auto idx = std::min(others.size() - 1, static_cast<std::size_t>(u_camp * others.size()));
            camp_ = others[idx];
        }
    } else if (u_long < params_.p_long) {
        const int span = params_.long_max_days - params_.long_min_days + 1;
        const int len = params_.long_min_days + std::min(span - 1, static_cast<int>(u_len * span));
        excursion_left_ = len - 1;
    }

    for (const auto& a : absences_)
        if (a.covers(day))
            present = false;
    if (present)
        m.camp = camp_;
    return m;
}

double geometric_intercontact(double p_return, int k)
{
    if (k < 1)
        return 0.0;
    return p_return * std::pow(1.0 - p_return, k - 1);
}

} // namespace roost
