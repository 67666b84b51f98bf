#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

namespace sbx
{
//! Finite list of (position, mass) atoms.
struct PointMeasure
{
    std::vector<double> positions;
    std::vector<double> masses;

    PointMeasure() = default;

    //! Unit-mass atoms at the given positions.
    static PointMeasure unit(std::vector<double> positions)
    {
        PointMeasure m;
        m.masses.assign(positions.size(), 1.0);
        m.positions = std::move(positions);
        return m;
    }

    std::size_t size() const { return positions.size(); }
    bool empty() const { return positions.empty(); }

    void add(double x, double mass = 1)
    {
        positions.push_back(x);
        masses.push_back(mass);
    }

    double total_mass() const
    {
        double s = 0;
        for (double m : masses)
            s += m;
        return s;
    }

    //! Largest position, -inf when empty.
    double max() const
    {
        if (positions.empty())
            return -std::numeric_limits<double>::infinity();
        return *std::max_element(positions.begin(), positions.end());
    }

    //! <f, measure>.
    template <class F>
    double integrate(F&& f) const
    {
        double s = 0;
        for (std::size_t i = 0; i < positions.size(); ++i)
            s += masses[i] * f(positions[i]);
        return s;
    }

    //! Same atoms moved by dx.
    PointMeasure translated(double dx) const
    {
        PointMeasure m = *this;
        for (double& x : m.positions)
            x += dx;
        return m;
    }

    //! Mass in (a, b].
    double mass_in(double a, double b) const
    {
        double s = 0;
        for (std::size_t i = 0; i < positions.size(); ++i)
            if (positions[i] > a && positions[i] <= b)
                s += masses[i];
        return s;
    }
};

}  // namespace sbx
