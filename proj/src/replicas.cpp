#include "sbx/replicas.hpp"

#include <cstdlib>
#include <string>

namespace sbx
{
unsigned worker_count()
{
    if (char const* env = std::getenv("SBX_WORKERS"))
    {
        try
        {
            int n = std::stoi(env);
            if (n >= 1)
                return static_cast<unsigned>(n);
        }
        catch (...)
        {
        }
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

}  // namespace sbx
