#include "sbx/branching_engine.hpp"

#include <algorithm>
#include <cmath>

#include "sbx/error.hpp"

namespace sbx
{
BranchingEngine::BranchingEngine(double rate, OffspringTable const& table,
                                 std::size_t max_particles)
    : rate_(rate), table_(&table), max_particles_(max_particles)
{
    require(rate > 0, ErrorCode::NonPositiveRate, "branching rate must be positive");
    require(max_particles >= 1, ErrorCode::InvalidArgument, "max_particles must be >= 1");
}

void BranchingEngine::reset(std::vector<double> const& positions)
{
    pos_ = positions;
    now_ = 0;
    first_event_ = -1;
    capped_ = false;
    events_ = 0;
}

bool BranchingEngine::step(double t, RngStream& rng)
{
    next_.clear();
    for (double x0 : pos_)
    {
        stack_.push_back({x0, now_});
        while (!stack_.empty())
        {
            Pending p = stack_.back();
            stack_.pop_back();
            // follow one line of descent, leaving siblings on the stack
            while (true)
            {
                double life = rng.exponential(rate_);
                if (p.s + life >= t)
                {
                    next_.push_back(p.x + std::sqrt(t - p.s) * rng.normal());
                    break;
                }
                p.s += life;
                ++events_;
                if (first_event_ < 0 || p.s < first_event_)
                    first_event_ = p.s;
                int k = table_->sample(rng);
                if (k == 0)
                    break;
                p.x += std::sqrt(life) * rng.normal();
                for (int c = 1; c < k; ++c)
                    stack_.push_back(p);
                if (next_.size() + stack_.size() > max_particles_)
                {
                    stack_.clear();
                    return false;
                }
            }
        }
    }
    pos_.swap(next_);
    now_ = t;
    return true;
}

bool BranchingEngine::advance(double t, RngStream& rng)
{
    if (capped_)
        return false;
    require(t >= now_, ErrorCode::InvalidArgument, "time must not decrease");
    if (t == now_)
        return true;
    if (!step(t, rng))
    {
        capped_ = true;
        return false;
    }
    return true;
}

}  // namespace sbx
