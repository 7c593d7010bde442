#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace dialect {

/// Sparse real vector with strictly increasing 64-bit keys.
class SparseVector {
public:
    using Entry = std::pair<std::uint64_t, double>;

    SparseVector() = default;
    /// Sorts by key; duplicate keys are summed.
    explicit SparseVector(std::vector<Entry> entries);

    std::span<const Entry> entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    /// Squared Euclidean norm, summed in key order.
    double squared_norm() const noexcept;
    /// Value at `key`, or 0.
    double at(std::uint64_t key) const noexcept;

private:
    std::vector<Entry> entries_;
};

/// Dot product accumulated in ascending key order of the shared support.
/// Walks the smaller support and binary-searches the larger one when that is
/// cheaper than a linear merge; both paths add the same terms in the same order.
double dot(const SparseVector& u, const SparseVector& v) noexcept;

/// 1 - u·v / (‖u‖‖v‖), clamped to [0, 2]. Throws std::domain_error if either
/// vector is zero.
double cosine_distance(const SparseVector& u, const SparseVector& v);
double cosine_distance(std::span<const double> u, std::span<const double> v);

}  // namespace dialect
