#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "reoptdb/common.hpp"

namespace reoptdb {

// Model of how many rounds re-optimization takes when every round validates
// one plan slot and re-shuffles one uniformly chosen other: a queue of n
// entries, initially all unvalidated. Each step takes the head; if it is
// already validated the process stops, otherwise it is validated and
// reinserted at a uniform position. expected_steps is the exact expectation
// of the number of validations; it grows as O(sqrt(n)).

// Exact expectation: sum over k of k * P(the process stops after exactly k
// validations) = sum k * (k/n) * prod_{j<k} (1 - j/n).
inline double expected_steps(std::int64_t n) {
  if (n < 1) throw Error("expected_steps: n must be >= 1");
  double nd = static_cast<double>(n);
  double total = 0.0;
  double prod = 1.0;  // prod_{j=1}^{k-1} (1 - j/n)
  for (std::int64_t k = 1; k <= n; ++k) {
    double kd = static_cast<double>(k);
    total += kd * prod * (kd / nd);
    prod *= (1.0 - kd / nd);
  }
  return total;
}

// Round half up; the convention for quoting expectations as integers.
inline std::int64_t round_half_up(double x) {
  return static_cast<std::int64_t>(std::floor(x + 0.5));
}

struct StepsEstimate {
  double mean = 0.0;
  double stderr_of_mean = 0.0;
  std::int64_t trials = 0;
};

// Monte Carlo of the same process. Deterministic for a fixed seed.
inline StepsEstimate simulate_steps(std::int64_t n, std::int64_t trials,
                                    std::uint64_t seed) {
  if (n < 1) throw Error("simulate_steps: n must be >= 1");
  if (trials < 1) throw Error("simulate_steps: trials must be >= 1");
  Rng rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  std::vector<char> queue;
  for (std::int64_t t = 0; t < trials; ++t) {
    queue.assign(static_cast<std::size_t>(n), 0);
    std::int64_t steps = 0;
    while (queue.front() == 0) {
      queue.erase(queue.begin());
      ++steps;
      // Position 1..n in the queue after reinsertion.
      std::size_t pos = static_cast<std::size_t>(
          rng.below(static_cast<std::uint64_t>(n)));
      queue.insert(queue.begin() + static_cast<std::ptrdiff_t>(pos), 1);
    }
    double s = static_cast<double>(steps);
    sum += s;
    sum_sq += s * s;
  }
  StepsEstimate est;
  est.trials = trials;
  est.mean = sum / static_cast<double>(trials);
  if (trials > 1) {
    double var = (sum_sq - sum * sum / static_cast<double>(trials)) /
                 static_cast<double>(trials - 1);
    if (var < 0.0) var = 0.0;
    est.stderr_of_mean = std::sqrt(var / static_cast<double>(trials));
  }
  return est;
}

// Pools two independent estimates of the same quantity, weighting by trial
// count; lets simulations be partitioned and recombined.
inline StepsEstimate merge_estimates(const StepsEstimate& a,
                                     const StepsEstimate& b) {
  if (a.trials == 0) return b;
  if (b.trials == 0) return a;
  StepsEstimate out;
  double na = static_cast<double>(a.trials);
  double nb = static_cast<double>(b.trials);
  out.trials = a.trials + b.trials;
  double n = na + nb;
  out.mean = (a.mean * na + b.mean * nb) / n;
  // Recover each part's sum of squared deviations, then pool.
  double m2a = a.stderr_of_mean * a.stderr_of_mean * na * (na - 1.0);
  double m2b = b.stderr_of_mean * b.stderr_of_mean * nb * (nb - 1.0);
  double delta = b.mean - a.mean;
  double m2 = m2a + m2b + delta * delta * na * nb / n;
  if (out.trials > 1) {
    out.stderr_of_mean = std::sqrt(m2 / (n - 1.0) / n);
  }
  return out;
}

struct GrowthProfileRow {
  std::int64_t n = 0;
  double steps = 0.0;
  double sqrt_ratio = 0.0;  // steps / sqrt(n)
};

// expected_steps across a list of sizes, with the ratio to sqrt(n) that
// exposes the square-root growth law.
inline std::vector<GrowthProfileRow> steps_growth_profile(
    const std::vector<std::int64_t>& sizes) {
  std::vector<GrowthProfileRow> out;
  for (std::int64_t n : sizes) {
    GrowthProfileRow row;
    row.n = n;
    row.steps = expected_steps(n);
    row.sqrt_ratio = row.steps / std::sqrt(static_cast<double>(n));
    out.push_back(row);
  }
  return out;
}

// When estimation errors are underestimates only, re-optimization stops
// early: with the n slots split across m independent chains, the expected
// rounds are bounded by the expectation for a queue of n/m slots.
inline double partitioned_steps_bound(std::int64_t n, std::int64_t parts) {
  if (n < 1 || parts < 1) {
    throw Error("partitioned_steps_bound: n and parts must be >= 1");
  }
  std::int64_t reduced = n / parts;
  if (reduced < 1) reduced = 1;
  return expected_steps(reduced);
}

}  // namespace reoptdb
