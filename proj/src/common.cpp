#include "topowave/common.hpp"

#include <atomic>
#include <thread>

namespace topowave {

BudgetError::BudgetError(int order, std::size_t projected, std::size_t budget)
    : Error("simplex budget exceeded at order " + std::to_string(order) + ": projected " +
            std::to_string(projected) + " simplices, budget " + std::to_string(budget) +
            " (lower the VR threshold or the maximum order)"),
      order_(order),
      projected_(projected) {}

DivergenceError::DivergenceError(int epoch)
    : Error("training diverged (non-finite loss) at epoch " + std::to_string(epoch)), epoch_(epoch) {}

std::string to_string(Orientation o) {
    return o == Orientation::oriented ? "oriented" : "unoriented";
}

Orientation parse_orientation(const std::string& s) {
    if (s == "oriented") return Orientation::oriented;
    if (s == "unoriented") return Orientation::unoriented;
    throw ConfigError("unknown orientation '" + s + "' (expected oriented|unoriented)");
}

namespace {
std::atomic<std::size_t> g_threads{0};
}

void set_num_threads(std::size_t n) { g_threads = n; }

std::size_t num_threads() {
    const std::size_t n = g_threads.load();
    if (n > 0) return n;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace topowave
