#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace dialect {

/// Two-letter ISO 3166-1 alpha-2 country code.
class RegionCode {
public:
    RegionCode() = default;

    /// Throws std::invalid_argument unless `code` matches [A-Z]{2}.
    explicit RegionCode(std::string_view code);

    static bool is_well_formed(std::string_view code) noexcept;

    const std::string& str() const noexcept { return code_; }
    bool empty() const noexcept { return code_.empty(); }

    auto operator<=>(const RegionCode&) const = default;
    bool operator==(const RegionCode&) const = default;

private:
    std::string code_;
};

/// The 26 regions of the Spanish Twitter corpora (21 Spanish-speaking
/// countries plus BR, CA, FR, GB, US).
const std::vector<RegionCode>& known_regions();

/// Region registry: the built-in set plus any configured extensions.
class RegionSet {
public:
    RegionSet();
    explicit RegionSet(std::vector<RegionCode> extensions);

    bool contains(std::string_view code) const noexcept;
    void add(const RegionCode& code);
    const std::vector<RegionCode>& codes() const noexcept { return codes_; }

private:
    std::vector<RegionCode> codes_;  // sorted
};

}  // namespace dialect

template <>
struct std::hash<dialect::RegionCode> {
    size_t operator()(const dialect::RegionCode& r) const noexcept {
        return std::hash<std::string>{}(r.str());
    }
};
