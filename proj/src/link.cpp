#include <roost/link.hpp>

#include <cmath>
#include <string>

namespace roost {

void LinkParams::validate() const
{
    if (!(page_rate > 0) || !(rate_min > 0) || rate_max < rate_min)
        throw Error("link rates must be positive with rate_min <= rate_max");
    if (!(chunk_loss >= 0 && chunk_loss <= 1))
        throw Error("link chunk_loss must be in [0, 1]");
    if (attempts < 1)
        throw Error("link attempts must be at least 1");
    if (chunks_per_page == 0)
        throw Error("link chunks_per_page must be positive");
}

LinkSession::LinkSession(const LinkParams& params, Rng& rng, double window_s, double page_rate)
    : params_(params), rng_(rng), window_s_(window_s),
      slot_s_(1.0 / (page_rate * static_cast<double>(params.chunks_per_page)))
{
}

LinkSession::LinkSession(const LinkParams& params, Rng& rng, double window_s)
    : LinkSession(params, rng, window_s, params.page_rate)
{
}

bool LinkSession::exchange()
{
    if (lost_)
        return false;
    for (int attempt = 0; attempt < params_.attempts; ++attempt) {
        // integer slot count keeps 200 slots of 0.05 s inside a 10 s window
        if (static_cast<double>(slots_ + 1) * slot_s_ > window_s_ + 1e-9) {
            lost_ = true;
            return false;
        }
        ++slots_;
        if (attempt > 0)
            ++retries_;
        if (params_.chunk_loss <= 0 || !rng_.bernoulli(params_.chunk_loss))
            return true;
    }
    lost_ = true;
    return false;
}

TransferOutcome link_transfer(const LinkParams& params, Rng& rng, std::size_t plan_pages, double window_s)
{
    LinkSession link(params, rng, window_s);
    TransferOutcome out;
    for (std::size_t p = 0; p < plan_pages && !link.lost(); ++p) {
        std::size_t c = 0;
        while (c < params.chunks_per_page && link.exchange())
            ++c;
        if (c == params.chunks_per_page)
            ++out.pages;
    }
    out.contact_lost = link.lost();
    out.elapsed_s = link.elapsed_s();
    return out;
}

double chunk_success_probability(double loss, int attempts)
{
    return 1.0 - std::pow(loss, attempts);
}

double expected_attempts_given_success(double loss, int attempts)
{
    const double ps = chunk_success_probability(loss, attempts);
    if (ps <= 0)
        return static_cast<double>(attempts);
    double sum = 0;
    for (int k = 1; k <= attempts; ++k)
        sum += k * std::pow(loss, k - 1) * (1 - loss);
    return sum / ps;
}

} // namespace roost
