#include <roost/battery.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace roost {

namespace {
constexpr std::array<std::string_view, kActivityCount> kActivityNames = {
    "sleep", "beacon", "radio_rx", "gps_high", "gps_low", "sensor_sample", "page_tx"};
}

std::string_view to_string(Activity a)
{
    return kActivityNames[static_cast<std::size_t>(a)];
}

Activity activity_from_string(std::string_view name)
{
    for (std::size_t i = 0; i < kActivityNames.size(); ++i)
        if (kActivityNames[i] == name)
            return static_cast<Activity>(i);
    throw Error("unknown activity '" + std::string(name) + "'");
}

LoadTable LoadTable::defaults()
{
    LoadTable t;
    t[Activity::sleep] = 0.05;
    t[Activity::beacon] = 60.0;
    t[Activity::radio_rx] = 50.0;
    t[Activity::gps_high] = 75.0;
    t[Activity::gps_low] = 75.0;
    t[Activity::sensor_sample] = 3.0;
    t[Activity::page_tx] = 100.0;
    return t;
}

VoltageCurve::VoltageCurve() : points_{{0.0, 3300.0}, {1.0, 4100.0}} {}

VoltageCurve::VoltageCurve(std::vector<std::pair<double, double>> points) : points_(std::move(points))
{
    if (points_.size() < 2)
        throw Error("voltage curve needs at least two points");
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (points_[i].first <= points_[i - 1].first)
            throw Error("voltage curve fractions must increase");
        if (points_[i].second < points_[i - 1].second)
            throw Error("voltage curve must be nondecreasing");
    }
}

double VoltageCurve::millivolts(double fraction) const
{
    if (fraction <= points_.front().first)
        return points_.front().second;
    if (fraction >= points_.back().first)
        return points_.back().second;
    auto hi = std::upper_bound(points_.begin(), points_.end(), fraction,
                               [](double f, const auto& p) { return f < p.first; });
    auto lo = std::prev(hi);
    const double t = (fraction - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

double HarvestProfile::factor_on(std::int64_t day) const
{
    if (day >= 0 && static_cast<std::size_t>(day) < daily_factor.size())
        return daily_factor[static_cast<std::size_t>(day)];
    return default_factor;
}

double HarvestProfile::power_mw(Seconds t) const
{
    const Seconds tod = time_of_day(t);
    if (tod < sunrise_s || tod >= sunset_s || sunset_s <= sunrise_s)
        return 0.0;
    const double phase = static_cast<double>(tod - sunrise_s) / static_cast<double>(sunset_s - sunrise_s);
    return peak_mw * factor_on(day_of(t)) * std::sin(std::numbers::pi * phase);
}

BatteryModel::BatteryModel(double capacity_mj, double initial_fraction, VoltageCurve curve, HarvestProfile harvest,
                           LoadTable loads)
    : capacity_mj_(capacity_mj), charge_mj_(capacity_mj * std::clamp(initial_fraction, 0.0, 1.0)),
      curve_(std::move(curve)), harvest_(std::move(harvest)), loads_(loads)
{
    if (capacity_mj_ <= 0)
        throw Error("battery capacity must be positive");
}

std::uint16_t BatteryModel::voltage_mv() const
{
    return static_cast<std::uint16_t>(std::lround(curve_.millivolts(fraction())));
}

double BatteryModel::apply(double delta_mj)
{
    const double wanted = charge_mj_ + delta_mj;
    charge_mj_ = std::clamp(wanted, 0.0, capacity_mj_);
    return wanted - charge_mj_;
}

nlohmann::json to_json(const LoadTable& loads)
{
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t i = 0; i < kActivityCount; ++i)
        j[std::string(kActivityNames[i])] = loads.mw[i];
    return j;
}

LoadTable load_table_from_json(const nlohmann::json& doc, LoadTable base)
{
    for (const auto& [key, value] : doc.items())
        base[activity_from_string(key)] = value.get<double>();
    return base;
}

} // namespace roost
