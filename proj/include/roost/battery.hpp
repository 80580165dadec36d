#pragma once

#include <roost/common.hpp>

#include <json.hpp>

#include <array>
#include <string_view>
#include <utility>
#include <vector>

namespace roost {

enum class Activity : std::uint8_t { sleep, beacon, radio_rx, gps_high, gps_low, sensor_sample, page_tx };
constexpr std::size_t kActivityCount = 7;

std::string_view to_string(Activity a);
Activity activity_from_string(std::string_view name);

/// Power draw per activity, milliwatts.
struct LoadTable {
    std::array<double, kActivityCount> mw{};

    double operator[](Activity a) const { return mw[static_cast<std::size_t>(a)]; }
    double& operator[](Activity a) { return mw[static_cast<std::size_t>(a)]; }

    static LoadTable defaults();
};

/// Piecewise-linear, nondecreasing map from charge fraction to millivolts.
class VoltageCurve {
public:
    /// Default: 3300 mV empty, 4100 mV full.
    VoltageCurve();
    explicit VoltageCurve(std::vector<std::pair<double, double>> points);

    double millivolts(double fraction) const;
    const std::vector<std::pair<double, double>>& points() const { return points_; }

private:
    std::vector<std::pair<double, double>> points_;
};

/// Solar input: a half sine between sunrise and sunset, scaled per day.
struct HarvestProfile {
    double peak_mw = 0.0;
    Seconds sunrise_s = 6 * 3600;
    Seconds sunset_s = 18 * 3600;
    /// Weather factor per simulation day; days past the end use default_factor.
    std::vector<double> daily_factor;
    double default_factor = 1.0;

    double factor_on(std::int64_t day) const;
    double power_mw(Seconds t) const;
};

class BatteryModel {
public:
    BatteryModel() = default;
    BatteryModel(double capacity_mj, double initial_fraction, VoltageCurve curve, HarvestProfile harvest,
                 LoadTable loads);

    double charge_mj() const { return charge_mj_; }
    double capacity_mj() const { return capacity_mj_; }
    double fraction() const { return capacity_mj_ > 0 ? charge_mj_ / capacity_mj_ : 0.0; }
    std::uint16_t voltage_mv() const;

    const HarvestProfile& harvest() const { return harvest_; }
    HarvestProfile& harvest() { return harvest_; }
    const LoadTable& loads() const { return loads_; }
    const VoltageCurve& curve() const { return curve_; }

    /// Adds delta (may be negative), clamped to [0, capacity]. Returns the
    /// part of delta that the clamp discarded.
    double apply(double delta_mj);

private:
    double capacity_mj_ = 1.0;
    double charge_mj_ = 1.0;
    VoltageCurve curve_;
    HarvestProfile harvest_;
    LoadTable loads_ = LoadTable::defaults();
};

nlohmann::json to_json(const LoadTable& loads);
LoadTable load_table_from_json(const nlohmann::json& doc, LoadTable base = LoadTable::defaults());

} // namespace roost
