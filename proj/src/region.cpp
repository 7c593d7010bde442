#include "dialect/region.hpp"

#include <algorithm>
#include <stdexcept>

namespace dialect {

RegionCode::RegionCode(std::string_view code) {
    if (!is_well_formed(code)) {
        throw std::invalid_argument("invalid region code '" + std::string(code) +
                                    "' (expected two uppercase ASCII letters)");
    }
    code_ = std::string(code);
}

bool RegionCode::is_well_formed(std::string_view code) noexcept {
    return code.size() == 2 && code[0] >= 'A' && code[0] <= 'Z' && code[1] >= 'A' &&
           code[1] <= 'Z';
}

const std::vector<RegionCode>& known_regions() {
    static const std::vector<RegionCode> regions = [] {
        std::vector<RegionCode> out;
        for (const char* c : {"AR", "BO", "BR", "CA", "CL", "CO", "CR", "CU", "DO",
                              "EC", "ES", "FR", "GB", "GQ", "GT", "HN", "MX", "NI",
                              "PA", "PE", "PR", "PY", "SV", "US", "UY", "VE"}) {
            out.emplace_back(c);
        }
        return out;
    }();
    return regions;
}

RegionSet::RegionSet() : codes_(known_regions()) {}

RegionSet::RegionSet(std::vector<RegionCode> extensions) : RegionSet() {
    for (const auto& e : extensions) add(e);
}

bool RegionSet::contains(std::string_view code) const noexcept {
    if (!RegionCode::is_well_formed(code)) return false;
    return std::binary_search(codes_.begin(), codes_.end(), RegionCode(code));
}

void RegionSet::add(const RegionCode& code) {
    auto it = std::lower_bound(codes_.begin(), codes_.end(), code);
    if (it == codes_.end() || *it != code) codes_.insert(it, code);
}

}  // namespace dialect
