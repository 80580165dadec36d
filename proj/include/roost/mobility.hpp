#pragma once

// Nightly roost mobility. A node leaves its camp at dusk to forage and, each
// morning, either returns to a camp or stays away. Contacts happen while
// the node roosts at a camp that hosts a gateway.

#include <roost/common.hpp>
#include <roost/rng.hpp>

#include <optional>
#include <vector>

namespace roost {

using CampId = std::uint32_t;

struct MobilityParams {
    enum class Mode { roost, resident };
    /// resident: the node never leaves its home camp (motion still follows
    /// the forage window).
    Mode mode = Mode::roost;
    double p_return = 0.7;
    double p_switch = 0.0;
    /// Chance that a morning away starts a long excursion.
    double p_long = 0.0;
    int long_min_days = 7;
    int long_max_days = 45;
    Seconds forage_start_s = 18 * 3600 + 1800;
    Seconds forage_end_s = 5 * 3600 + 1800;
    /// Return time is uniform in [forage_end_s, forage_end_s + spread).
    Seconds return_spread_s = 3600;

    void validate() const;
};

/// Forced absence: the node does not roost at any camp on these mornings.
struct Absence {
    int start_day = 0;
    int days = 0;
    bool covers(int day) const { return day >= start_day && day < start_day + days; }
};

struct Morning {
    int day = 0;
    /// Arrival time at the camp, or the draw time when away.
    Seconds time = 0;
    std::optional<CampId> camp;
};

class MobilityModel {
public:
    MobilityModel(MobilityParams params, std::vector<CampId> camps, CampId home, Rng rng,
                  std::vector<Absence> absences = {});

    /// Where the node roosts on the given day. Must be called for days
    /// 1, 2, ... in order; day 0 starts at the home camp. Every call draws
    /// the same number of variates so forced absences do not shift later
    /// draws.
    Morning morning(int day);

    CampId current_camp() const { return camp_; }
    const MobilityParams& params() const { return params_; }

private:
    MobilityParams params_;
    std::vector<CampId> camps_;
    CampId camp_;
    Rng rng_;
    std::vector<Absence> absences_;
    int excursion_left_ = 0;
};

/// Probability that the k-th morning after a contact is the next contact
/// when every morning returns independently with p_return.
double geometric_intercontact(double p_return, int k);

} // namespace roost
