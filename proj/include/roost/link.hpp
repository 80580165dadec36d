#pragma once

// Lossy gateway <-> node radio link. Every request/response exchange takes
// a fixed slot of 1 / (page_rate * chunks_per_page) seconds; a lost
// exchange still uses its slot and is retried up to the attempt budget.

#include <roost/common.hpp>
#include <roost/rng.hpp>

#include <cstddef>

namespace roost {

struct LinkParams {
    /// Nominal pages per second with zero loss.
    double page_rate = 5.0;
    /// When rate_max > rate_min, each contact draws its rate uniformly.
    double rate_min = 5.0;
    double rate_max = 5.0;
    double chunk_loss = 0.0;
    int attempts = 3;
    std::size_t chunks_per_page = 4;

    void validate() const;
};

class LinkSession {
public:
    LinkSession(const LinkParams& params, Rng& rng, double window_s, double page_rate);
    LinkSession(const LinkParams& params, Rng& rng, double window_s);

    /// One exchange including retries. False once the window is exhausted
    /// or the retry budget is spent; the session is then lost for good.
    bool exchange();

    bool lost() const { return lost_; }
    double slot_s() const { return slot_s_; }
    double elapsed_s() const { return static_cast<double>(slots_) * slot_s_; }
    double window_s() const { return window_s_; }
    std::uint64_t attempts() const { return slots_; }
    std::uint64_t retries() const { return retries_; }

private:
    const LinkParams& params_;
    Rng& rng_;
    double window_s_;
    double slot_s_;
    std::uint64_t slots_ = 0;
    std::uint64_t retries_ = 0;
    bool lost_ = false;
};

struct TransferOutcome {
    std::size_t pages = 0;
    bool contact_lost = false;
    double elapsed_s = 0;
};

/// Pages of a plan that fit through the link in the window.
TransferOutcome link_transfer(const LinkParams& params, Rng& rng, std::size_t plan_pages, double window_s);

/// Expected exchanges per successful chunk and the probability that a
/// chunk succeeds within the attempt budget.
double expected_attempts_given_success(double loss, int attempts);
double chunk_success_probability(double loss, int attempts);

} // namespace roost
