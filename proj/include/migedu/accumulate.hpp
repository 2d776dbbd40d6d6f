#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <thread>
#include <vector>

namespace migedu {

/// Neumaier-compensated running sum. Merging two partial sums keeps the
/// compensation terms, so partition-parallel totals agree to ~1 ulp of the
/// serial result regardless of how the input was split.
class CompensatedSum {
  public:
    CompensatedSum() = default;
    explicit CompensatedSum(double initial) { add(initial); }

    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    void merge(const CompensatedSum &other) noexcept {
        add(other.sum_);
        add(other.comp_);
    }

    CompensatedSum &operator+=(double x) noexcept {
        add(x);
        return *this;
    }

    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Number of worker threads used by counting passes.
struct Parallelism {
    unsigned workers = 1;

    /// Reads MIGEDU_THREADS; falls back to the hardware concurrency.
    static Parallelism from_environment();
};

/// Splits `items` into `par.workers` contiguous chunks, folds each chunk into
/// its own accumulator, and merges the partials in chunk order.
/// Acc must provide `add(const T&)` and `merge(const Acc&)`.
template <typename T, typename MakeAcc>
auto reduce_partitioned(std::span<const T> items, Parallelism par, MakeAcc make) {
    using Acc = decltype(make());
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(par.workers, items.size()));
    if (workers <= 1) {
        Acc acc = make();
        for (const auto &item : items) {
            acc.add(item);
        }
        return acc;
    }

    std::vector<Acc> partials;
    partials.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        partials.push_back(make());
    }
    const std::size_t chunk = (items.size() + workers - 1) / workers;
    {
        std::vector<std::jthread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = std::min(items.size(), w * chunk);
            const std::size_t end = std::min(items.size(), begin + chunk);
            threads.emplace_back([&partials, items, w, begin, end] {
                auto &acc = partials[w];
                for (std::size_t i = begin; i < end; ++i) {
                    acc.add(items[i]);
                }
            });
        }
    }
    Acc result = std::move(partials.front());
    for (std::size_t w = 1; w < workers; ++w) {
        result.merge(partials[w]);
    }
    return result;
}

} // namespace migedu
