#pragma once

#include <cstdint>

// Small deterministic generator for test data; keeps reruns bit-identical.
class TestRng {
  public:
    explicit TestRng(uint64_t seed) : state_(seed * 2654435761u + 1) {}

    double uniform() {
        state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(state_ >> 11) / 9007199254740992.0;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  private:
    uint64_t state_;
};
