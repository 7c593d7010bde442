#include "dialect/sparse.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace dialect {

SparseVector::SparseVector(std::vector<Entry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.first < b.first; });
    std::size_t out = 0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (out > 0 && entries_[out - 1].first == entries_[i].first) {
            entries_[out - 1].second += entries_[i].second;
        } else {
            entries_[out++] = entries_[i];
        }
    }
    entries_.resize(out);
}

double SparseVector::squared_norm() const noexcept {
    double s = 0.0;
    for (const auto& [k, v] : entries_) s += v * v;
    return s;
}

double SparseVector::at(std::uint64_t key) const noexcept {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                               [](const Entry& e, std::uint64_t k) { return e.first < k; });
    return (it != entries_.end() && it->first == key) ? it->second : 0.0;
}

double dot(const SparseVector& u, const SparseVector& v) noexcept {
    auto small = u.entries();
    auto large = v.entries();
    if (small.size() > large.size()) std::swap(small, large);
    double s = 0.0;
    const std::size_t log_large = std::bit_width(large.size());
    if (small.size() * log_large < small.size() + large.size()) {
        auto lo = large.begin();
        for (const auto& [k, a] : small) {
            lo = std::lower_bound(lo, large.end(), k,
                                  [](const auto& e, std::uint64_t key) { return e.first < key; });
            if (lo == large.end()) break;
            if (lo->first == k) s += a * lo->second;
        }
    } else {
        std::size_t i = 0, j = 0;
        while (i < small.size() && j < large.size()) {
            if (small[i].first < large[j].first) {
                ++i;
            } else if (large[j].first < small[i].first) {
                ++j;
            } else {
                s += small[i].second * large[j].second;
                ++i, ++j;
            }
        }
    }
    return s;
}

namespace {

double distance_from(double uv, double uu, double vv) {
    if (uu == 0.0 || vv == 0.0) throw std::domain_error("cosine_distance: zero vector");
    // sqrt(uu * vv) == uu exactly when uu == vv, so identical inputs give 0.
    const double d = 1.0 - uv / std::sqrt(uu * vv);
    return std::clamp(d, 0.0, 2.0);
}

}  // namespace

double cosine_distance(const SparseVector& u, const SparseVector& v) {
    return distance_from(dot(u, v), u.squared_norm(), v.squared_norm());
}

double cosine_distance(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw std::invalid_argument("cosine_distance: length mismatch");
    double uv = 0.0, uu = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uv += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
    }
    return distance_from(uv, uu, vv);
}

}  // namespace dialect
