#pragma once

#include <cstddef>
#include <vector>

#include "sbx/rng.hpp"
#include "sbx/skeleton_law.hpp"

namespace sbx
{
/*!
 * Exact event-driven branching Brownian motion. Every particle branches at
 * rate `rate` into k ~ table particles (k = 0 kills it). Between two
 * checkpoints the particles evolve independently, so each family tree is
 * grown depth-first from an Exp(rate) lifetime and one Gaussian increment
 * per branching; memory is touched sequentially.
 */
class BranchingEngine
{
  public:
    BranchingEngine(double rate, OffspringTable const& table, std::size_t max_particles);

    //! Start from the given positions at time 0.
    void reset(std::vector<double> const& positions);

    /*!
     * Run until time t. Returns false once the particles alive at t plus
     * those still pending pass the cap; the state then stays at the previous
     * time and later calls do nothing.
     */
    bool advance(double t, RngStream& rng);

    std::vector<double> const& positions() const { return pos_; }
    std::size_t size() const { return pos_.size(); }
    double time() const { return now_; }
    bool capped() const { return capped_; }
    //! Time of the first branching event, or -1 if none happened yet.
    double first_event_time() const { return first_event_; }
    std::size_t events() const { return events_; }

  private:
    bool step(double t, RngStream& rng);

    struct Pending
    {
        double x;
        double s;
    };

    double rate_;
    OffspringTable const* table_;
    std::size_t max_particles_;
    std::vector<double> pos_;
    std::vector<double> next_;
    std::vector<Pending> stack_;
    double now_ = 0;
    double first_event_ = -1;
    bool capped_ = false;
    std::size_t events_ = 0;
};

}  // namespace sbx
