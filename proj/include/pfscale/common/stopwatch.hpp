#pragma once

#include <chrono>

namespace pfscale {

/// Monotonic wall-clock stopwatch.
class Stopwatch {
  public:
    using Clock = std::chrono::steady_clock;

    Stopwatch() : start_(Clock::now()) {}

    void restart() { start_ = Clock::now(); }

    double seconds() const {
        return std::chrono::duration<double>(Clock::now() - start_).count();
    }

    /// Seconds since the last lap (or construction), then restarts.
    double lap() {
        const auto now = Clock::now();
        const double s = std::chrono::duration<double>(now - start_).count();
        start_ = now;
        return s;
    }

  private:
    Clock::time_point start_;
};

}  // namespace pfscale
