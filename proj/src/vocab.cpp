#include "dialect/vocab.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dialect {

void TokenCounter::add(std::string_view token, std::uint64_t times) {
    auto it = counts_.find(std::string(token));
    if (it == counts_.end()) {
        counts_.emplace(std::string(token), times);
    } else {
        it->second += times;
    }
    total_ += times;
}

void TokenCounter::merge(const TokenCounter& other) {
    for (const auto& [token, n] : other.counts_) counts_[token] += n;
    total_ += other.total_;
}

std::vector<std::pair<std::string, std::uint64_t>> RegionVocabulary::sorted() const {
    std::vector<std::pair<std::string, std::uint64_t>> out(counts.begin(), counts.end());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    return out;
}

std::string RegionVocabulary::to_tsv() const {
    std::string out;
    for (const auto& [token, n] : sorted()) {
        out += token;
        out += '\t';
        out += std::to_string(n);
        out += '\n';
    }
    return out;
}

RegionVocabulary make_vocabulary(const TokenCounter& counter, RegionCode region,
                                 std::uint64_t min_count) {
    if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
    RegionVocabulary v;
    v.region = std::move(region);
    v.total_tokens = counter.total();
    v.min_count = min_count;
    for (const auto& [token, n] : counter.counts()) {
        if (n >= min_count) v.counts.emplace(token, n);
    }
    return v;
}

RegionVocabulary build_vocabulary(std::span<const std::string> tokens, RegionCode region,
                                  std::uint64_t min_count) {
    TokenCounter counter;
    counter.add_all(tokens);
    return make_vocabulary(counter, std::move(region), min_count);
}

double min_frequency_cutoff(std::uint64_t n, double alpha) {
    if (n == 0) throw std::domain_error("min_frequency_cutoff: N must be positive");
    if (!std::isfinite(alpha) || alpha < 0.0) {
        throw std::domain_error("min_frequency_cutoff: alpha must be a non-negative number");
    }
    const double a2 = alpha * alpha;
    const double nd = static_cast<double>(n);
    return nd * a2 / (nd + a2);
}

CutoffParams CutoffParams::compute(std::uint64_t n, double alpha) {
    return {n, alpha, min_frequency_cutoff(n, alpha)};
}

std::vector<std::uint64_t> heaps_sample_points(std::uint64_t length, std::size_t samples) {
    if (samples < 2) throw std::invalid_argument("heaps_curve: need at least 2 samples");
    if (length < 2) throw std::invalid_argument("heaps_curve: stream shorter than 2 tokens");
    std::vector<std::uint64_t> at;
    at.reserve(samples);
    const double log_len = std::log(static_cast<double>(length));
    for (std::size_t j = 0; j < samples; ++j) {
        auto n = static_cast<std::uint64_t>(
            std::llround(std::exp(log_len * static_cast<double>(j) / double(samples - 1))));
        n = std::clamp<std::uint64_t>(n, 1, length);
        if (at.empty() || n > at.back()) at.push_back(n);
    }
    if (at.back() != length) at.push_back(length);
    return at;
}

LawFit fit_log_log(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit: x and y differ in length");
    if (x.size() < 2) throw std::invalid_argument("fit: need at least 2 points");
    const std::size_t n = x.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
            throw std::invalid_argument("fit: all values must be positive");
        }
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    // Shift by the first point so constant series give exact zeros.
    const double x0 = lx[0], y0 = ly[0];
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i] - x0;
        my += ly[i] - y0;
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = (lx[i] - x0) - mx;
        const double dy = (ly[i] - y0) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw std::invalid_argument("fit: degenerate input (all x equal)");

    const double slope = sxy / sxx;
    LawFit fit;
    fit.exponent = slope;
    fit.intercept = (my + y0) - slope * (mx + x0);
    fit.points = n;
    if (syy == 0.0) {
        fit.r_squared = 1.0;
    } else {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = ly[i] - (slope * lx[i] + fit.intercept);
            ss_res += r * r;
        }
        fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return fit;
}

LawFit fit_heaps(std::span<const HeapsPoint> curve) {
    std::vector<double> x, y;
    x.reserve(curve.size());
    y.reserve(curve.size());
    for (const auto& p : curve) {
        x.push_back(double(p.n));
        y.push_back(double(p.vocabulary));
    }
    return fit_log_log(x, y);
}

std::vector<RankFrequency> zipf_ranks(const RegionVocabulary& vocab) {
    if (vocab.counts.empty()) throw std::invalid_argument("zipf_ranks: empty vocabulary");
    const auto sorted = vocab.sorted();
    std::vector<RankFrequency> out;
    out.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) out.push_back({i + 1, sorted[i].second});
    return out;
}

LawFit fit_zipf(std::span<const RankFrequency> ranked, RankRange range) {
    if (range.lo > range.hi) throw std::invalid_argument("fit_zipf: empty rank range");
    std::vector<double> x, y;
    for (const auto& p : ranked) {
        if (p.rank < range.lo || p.rank > range.hi) continue;
        x.push_back(double(p.rank));
        y.push_back(double(p.frequency));
    }
    LawFit fit = fit_log_log(x, y);
    fit.exponent = fit.exponent == 0.0 ? 0.0 : -fit.exponent;
    return fit;
}

}  // namespace dialect
